"""Propagation loss from Fabry-Perot fringes and the brightness lower bound.

A waveguide with reflecting end facets transmits an Airy fringe pattern as
its optical length is tuned. The fringe contrast fixes the round-trip
attenuation, and with the facet reflectivity that gives the loss.

    python3 demos/loss_and_brightness.py
"""

import json
from pathlib import Path

from qpmpdc import io as qio
from qpmpdc.cli import bundled_fringe_scans
from qpmpdc.dispersion import load_model, refractive_index
from qpmpdc.metrology import (
    BrightnessInput,
    analyze_scan,
    brightness_lower_bound,
    contrast_from_loss,
    fresnel_reflectivity,
    synthetic_scan,
)

model = load_model()
n = refractive_index(model, 1550.0, 25.0, "e")
r = fresnel_reflectivity(n)
print(f"facet reflectivity at 1550 nm (n_e = {n:.4f}): R = {r:.4f}")

# forward model then inversion
for loss in (0.05, 0.2, 0.5):
    scan = synthetic_scan(r, loss, 4.0, fringes=5, samples=400, chirp=0.2)
    res = analyze_scan(scan)
    print(f"injected {loss:.2f} dB/cm: K {res.contrast:.4f} (closed form {contrast_from_loss(r, loss, 4.0):.4f})"
          f" -> {res.loss_db_per_cm:.4f} dB/cm")

print("\nbundled corpus")
for path in bundled_fringe_scans():
    res = analyze_scan(qio.read_fringe_scan(path, model))
    injected = json.loads(Path(path).with_suffix(".json").read_text())["injected_loss_db_per_cm"]
    print(f"{res.waveguide_id}: {res.loss_db_per_cm:.4f} dB/cm (injected {injected})")

# net detected pairs per pump power and bandwidth
b = brightness_lower_bound(BrightnessInput(detected_rate=1.25e8, background_rate=0.0, pump_power_mw=1.0,
                                           bandwidth_ghz=25000.0, coupling_efficiency=0.2))
print(f"\nbrightness lower bound {b.lower_bound:g} {b.units}; with 20 % coupling {b.estimate:g}")
