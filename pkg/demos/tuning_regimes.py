"""Temperature tuning at, above and below the design pump.

Each map holds the signal marginal for temperatures around the working
point. At the design pump a single broad lobe appears at one temperature;
half a nanometre above it the broadband point moves and narrows; half a
nanometre below it two separate broadband regions and multi-peaked spectra
appear.

    python3 demos/tuning_regimes.py
"""

import numpy as np

from qpmpdc.dispersion import load_model
from qpmpdc.tuning import broadband_regions, classify_regime, pump_sweep_bandwidth, temperature_map
from qpmpdc.workingpoint import default_waveguide, solve_design_point

model = load_model()
wg = default_waveguide()
point = solve_design_point(model, wg)
cfg = point.config(model, wg)
t0 = cfg.temperature_c
temps = t0 + np.linspace(-4.0, 4.0, 801)

for shift in (-0.5, 0.0, 0.5):
    tmap = temperature_map(cfg.with_pump_nm(cfg.pump_nm + shift), temps)
    bw = tmap.bandwidth_thz
    best = int(np.nanargmax(bw))
    regions = broadband_regions(tmap.parameter, bw)
    print(f"pump {shift:+.1f} nm: {classify_regime(tmap).value:13s} best {bw[best]:5.2f} THz at "
          f"{temps[best] - t0:+.2f} K, peak {tmap.peak_wavelength_nm[best]:.1f} nm, "
          f"{len(regions)} broadband maxima")

# best temperature and bandwidth over pump wavelength
pumps = cfg.pump_nm + np.array([0.0, 0.5, 1.0, 1.5, 2.0])
surface = pump_sweep_bandwidth(cfg, pumps, t0 + np.linspace(-16.0, 4.0, 801))
print("\npump nm   best T C   max FW80 THz")
for p, t, b in zip(surface.pump_nm, surface.best_temperature_c, surface.max_bandwidth_thz):
    print(f"{p:8.3f}  {t:8.2f}  {b:8.2f}")
