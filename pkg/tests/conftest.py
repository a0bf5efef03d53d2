import numpy as np
import pytest

from qpmpdc.dispersion import TWO_PI_C, DispersionModel, load_model
from qpmpdc.workingpoint import default_waveguide, solve_design_point

# default temperature-map sampling around a working point; the broadband
# structure of the bundled model lives on a ~0.1 K scale
MAP_SPAN_K = 4.0
MAP_STEPS = 801

# criterion number -> (passed, detail), filled by the acceptance tests
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def model():
    return load_model()


@pytest.fixture(scope="session")
def waveguide():
    return default_waveguide()


@pytest.fixture(scope="session")
def design(model, waveguide):
    """Working point of the 6.0 um period, 40 mm waveguide."""
    return solve_design_point(model, waveguide)


@pytest.fixture(scope="session")
def design_config(design, model, waveguide):
    return design.config(model, waveguide)


def map_temperatures(center_c, span_k=MAP_SPAN_K, steps=MAP_STEPS):
    return center_c + np.linspace(-span_k, span_k, steps)


def linear_beta_model(a_e, a_o, b=1e15):
    """Synthetic model whose beta is linear in omega for both polarizations.

    n(omega) = a + b / omega gives beta = (a omega + b) / c. With the default
    type-II assignment (signal e, idler o) the mismatch is exactly linear in
    the detuning, with slope (a_o - a_e) / c.
    """

    def law(a):
        return lambda lam_nm, t: a + b * np.asarray(lam_nm) * 1e-9 / TWO_PI_C

    return DispersionModel.from_functions("linear", {"e": law(a_e), "o": law(a_o)})
