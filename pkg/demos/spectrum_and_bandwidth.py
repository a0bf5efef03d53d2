"""Joint spectrum, marginals and bandwidth at the 6.0 um working point.

The cw joint spectral amplitude is a sinc of the phase mismatch. At the
working point the mismatch has neither a linear nor a quadratic term in the
detuning, so the main lobe is as wide as the cubic term allows.

    python3 demos/spectrum_and_bandwidth.py
"""

import numpy as np

from qpmpdc.dispersion import load_model
from qpmpdc.jsa import SpectralGrid, correlation_time, jsa, marginal_spectrum
from qpmpdc.phasematch import taylor_coefficients
from qpmpdc.tuning import bandwidth_fw_at_fraction
from qpmpdc.workingpoint import default_waveguide, solve_design_point

model = load_model()
wg = default_waveguide()
point = solve_design_point(model, wg)
cfg = point.config(model, wg)
print(f"working point: pump {cfg.pump_nm:.3f} nm, T {cfg.temperature_c:.3f} C, "
      f"signal {cfg.signal_nm:.2f} nm, idler {cfg.idler_nm:.1f} nm")

c = taylor_coefficients(cfg)
print(f"mismatch expansion: gv {c.gv_term:.2e} s/m, gvd {c.gvd_term:.2e} s^2/m")

result = jsa(cfg)
signal = marginal_spectrum(result, "signal")
idler = marginal_spectrum(result, "idler")
rep = bandwidth_fw_at_fraction(signal)
print(f"\nFW80 {rep.width_thz:.2f} +- {rep.uncertainty_thz:.2f} THz, "
      f"signal {rep.interval_nm[0]:.1f}-{rep.interval_nm[1]:.1f} nm")
print(f"Fourier-limited correlation time {correlation_time(signal):.1f} fs")

for level in (0.5, 0.1):
    band = idler.wavelength_nm[idler.intensity >= level]
    print(f"idler above {level:.0%} of maximum: {band.min():.0f}-{band.max():.0f} nm")

# doubling the sampling leaves the bandwidth where it is
fine = bandwidth_fw_at_fraction(marginal_spectrum(jsa(cfg, SpectralGrid().refined()), "signal"))
print(f"refined grid FW80 {fine.width_thz:.4f} THz")

# coarse text rendering of the signal marginal
print("\nsignal marginal")
for lam in np.linspace(780, 880, 11):
    k = int(np.argmin(np.abs(signal.wavelength_nm - lam)))
    print(f"{lam:6.0f} nm |{'#' * int(round(40 * signal.intensity[k]))}")
