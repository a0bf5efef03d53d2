"""Regenerate the bundled synthetic fringe corpus.

Each waveguide gets a noise-free Airy transmission trace with a known
propagation loss. Half of the sidecars state the facet reflectivity, the
other half give a probe wavelength and polarization so that R comes from
the dispersion model.
"""

from pathlib import Path

from qpmpdc.dispersion import load_model, refractive_index
from qpmpdc.io import write_fringe_scan
from qpmpdc.metrology import fresnel_reflectivity, synthetic_scan

OUT = Path(__file__).resolve().parents[1] / "src" / "qpmpdc" / "data" / "fringes"

# id, loss dB/cm, length cm, fringes, chirp, reflectivity or (probe nm, polarization)
CORPUS = [
    ("wg01", 0.05, 4.0, 6, 0.0, 0.1406),
    ("wg02", 0.10, 4.0, 5, 0.2, 0.1406),
    ("wg03", 0.15, 4.0, 7, -0.1, (1550.0, "e")),
    ("wg04", 0.20, 4.0, 6, 0.3, (1550.0, "o")),
    ("wg05", 0.25, 2.0, 4, 0.0, 0.12),
    ("wg06", 0.30, 8.0, 8, 0.15, (1310.0, "e")),
    ("wg07", 0.40, 2.0, 5, -0.2, 0.16),
    ("wg08", 0.50, 4.0, 6, 0.1, (1064.0, "o")),
]


def main():
    model = load_model()
    OUT.mkdir(parents=True, exist_ok=True)
    for wid, loss, length, fringes, chirp, refl in CORPUS:
        extra = {"injected_loss_db_per_cm": loss}
        if isinstance(refl, tuple):
            lam, pol = refl
            refl = fresnel_reflectivity(refractive_index(model, lam, 25.0, pol))
            extra.update(probe_wavelength_nm=lam, polarization=pol, temperature_c=25.0)
        scan = synthetic_scan(refl, loss, length, fringes=fringes, samples=600 + 100 * fringes,
                              chirp=chirp, waveguide_id=wid)
        write_fringe_scan(OUT / f"{wid}.csv", scan, extra, reflectivity="probe_wavelength_nm" not in extra)
        print(wid, f"R={refl:.5f}", f"{loss} dB/cm")


if __name__ == "__main__":
    main()
