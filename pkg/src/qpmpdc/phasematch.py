"""Quasi-phase-matched mismatch, poling period and its low-order expansion
about the central frequencies for a cw pump."""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dispersion import (
    SPEED_OF_LIGHT,
    OpticalField,
    Polarization,
    as_polarization,
    beta,
    beta_derivative,
    omega_to_wavelength,
    refractive_index,
    wavelength_to_omega,
)
from .errors import NonPositiveMismatch


@dataclass(frozen=True)
class WaveguideSpec:
    """Poled waveguide. Polarizations default to the type-II assignment
    pump ordinary, signal extraordinary, idler ordinary.

    ``poling_period_um`` and ``length_mm`` are taken at
    ``reference_temperature_c``; ``thermal_expansion_per_k`` (default 0)
    scales both linearly with temperature.
    """

    length_mm: float
    poling_period_um: float
    width_um: Optional[str] = None
    pump: Polarization = Polarization.ORDINARY
    signal: Polarization = Polarization.EXTRAORDINARY
    idler: Polarization = Polarization.ORDINARY
    type_ii: bool = True
    thermal_expansion_per_k: float = 0.0
    reference_temperature_c: float = 25.0

    def __post_init__(self):
        for name in ("pump", "signal", "idler"):
            object.__setattr__(self, name, as_polarization(getattr(self, name)))
        if self.width_um is not None:
            object.__setattr__(self, "width_um", str(self.width_um))
        if not self.length_mm > 0:
            raise ValueError("waveguide length must be positive")
        if not self.poling_period_um > 0:
            raise ValueError("poling period must be positive")
        if self.type_ii and self.signal == self.idler:
            raise ValueError("type-II phase matching needs orthogonal signal and idler polarizations")

    def _scale(self, temperature_c):
        return 1.0 + self.thermal_expansion_per_k * (temperature_c - self.reference_temperature_c)

    def period_m(self, temperature_c):
        return self.poling_period_um * 1e-6 * self._scale(temperature_c)

    def length_m(self, temperature_c):
        return self.length_mm * 1e-3 * self._scale(temperature_c)

    def with_period(self, poling_period_um):
        return replace(self, poling_period_um=poling_period_um)


@dataclass(frozen=True)
class ProcessConfig:
    """Evaluation point of the process.

    Only pump and signal frequencies are stored; the idler frequency is
    their difference, so energy conservation holds by construction.
    """

    model: object
    waveguide: WaveguideSpec
    pump_omega: float
    signal_omega: float
    temperature_c: float

    def __post_init__(self):
        object.__setattr__(self, "pump_omega", float(self.pump_omega))
        object.__setattr__(self, "signal_omega", float(self.signal_omega))
        object.__setattr__(self, "temperature_c", float(self.temperature_c))
        if not 0 < self.signal_omega < self.pump_omega:
            raise ValueError("signal frequency must lie between 0 and the pump frequency")
        wg = self.waveguide
        for pol, lam in ((wg.pump, self.pump_nm), (wg.signal, self.signal_nm), (wg.idler, self.idler_nm)):
            refractive_index(self.model, lam, self.temperature_c, pol)

    @classmethod
    def from_wavelengths(cls, model, waveguide, pump_nm, signal_nm, temperature_c):
        return cls(model, waveguide, wavelength_to_omega(pump_nm), wavelength_to_omega(signal_nm), temperature_c)

    @property
    def idler_omega(self):
        return self.pump_omega - self.signal_omega

    @property
    def pump_nm(self):
        return omega_to_wavelength(self.pump_omega)

    @property
    def signal_nm(self):
        return omega_to_wavelength(self.signal_omega)

    @property
    def idler_nm(self):
        return omega_to_wavelength(self.idler_omega)

    @property
    def length_m(self):
        return self.waveguide.length_m(self.temperature_c)

    def fields(self):
        wg = self.waveguide
        return (
            OpticalField(wg.pump, self.pump_nm),
            OpticalField(wg.signal, self.signal_nm),
            OpticalField(wg.idler, self.idler_nm),
        )

    def replace(self, **changes):
        return replace(self, **changes)

    def with_temperature(self, temperature_c):
        return replace(self, temperature_c=temperature_c)

    def with_pump_nm(self, pump_nm):
        """Same signal centre, new pump; the idler centre follows."""
        return replace(self, pump_omega=wavelength_to_omega(pump_nm))

    def with_period(self, poling_period_um):
        return replace(self, waveguide=self.waveguide.with_period(poling_period_um))

    def as_dict(self):
        wg = self.waveguide
        return {
            "pump_nm": self.pump_nm,
            "signal_nm": self.signal_nm,
            "idler_nm": self.idler_nm,
            "temperature_c": self.temperature_c,
            "length_mm": wg.length_mm,
            "poling_period_um": wg.poling_period_um,
            "width_um": wg.width_um,
            "polarizations": {"pump": wg.pump.value, "signal": wg.signal.value, "idler": wg.idler.value},
            "thermal_expansion_per_k": wg.thermal_expansion_per_k,
            "model": self.model.name,
            "model_version": self.model.version,
        }


def signal_idler_omegas(config, delta_omega):
    """Signal and idler frequencies at detuning ``delta_omega``; they always sum to the pump."""
    dw = np.asarray(delta_omega, dtype=float) if np.ndim(delta_omega) else float(delta_omega)
    ws = config.signal_omega + dw
    return ws, config.pump_omega - ws


def _two_prod(a, b):
    # error-free product (Dekker/Veltkamp): a * b == p + e exactly
    p = a * b
    t = 134217729.0 * a
    ahi = t - (t - a)
    alo = a - ahi
    t = 134217729.0 * b
    bhi = t - (t - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _bare_mismatch(config, signal_omega, idler_omega):
    """beta_p - beta_s - beta_i with the cancellation done in double-double.

    The three propagation constants are ~1e7 rad/m while their difference is
    ~1e6 rad/m and resolved to ~1e-9 rad/m by the solvers, so the products
    n * omega and their sum are accumulated without intermediate rounding.
    """
    wg, t, m = config.waveguide, config.temperature_c, config.model
    n_p = refractive_index(m, omega_to_wavelength(config.pump_omega), t, wg.pump)
    n_s = refractive_index(m, omega_to_wavelength(signal_omega), t, wg.signal)
    n_i = refractive_index(m, omega_to_wavelength(idler_omega), t, wg.idler)
    p1, e1 = _two_prod(n_p, config.pump_omega)
    p2, e2 = _two_prod(n_s, signal_omega)
    p3, e3 = _two_prod(n_i, idler_omega)
    acc, err1 = _two_sum(p1, -p2)
    acc, err2 = _two_sum(acc, -p3)
    return (acc + ((err1 + err2) + (e1 - e2 - e3))) / SPEED_OF_LIGHT


def delta_beta(config, delta_omega):
    """Exact phase mismatch beta_p - beta_s - beta_i - 2 pi / period (rad/m).

    ``delta_omega`` is the signal detuning (the idler is detuned by the
    opposite amount); the pump frequency stays fixed (cw pump).
    """
    ws, wi = signal_idler_omegas(config, delta_omega)
    return _bare_mismatch(config, ws, wi) - 2.0 * math.pi / config.waveguide.period_m(config.temperature_c)


def period_from_mismatch(mismatch_rad_per_m):
    """First-order QPM period (um) that cancels a bare mismatch."""
    if not mismatch_rad_per_m > 0:
        raise NonPositiveMismatch(
            f"beta_p - beta_s - beta_i = {mismatch_rad_per_m:g} rad/m; forward first-order QPM needs it positive"
        )
    return 2.0 * math.pi / mismatch_rad_per_m * 1e6


def poling_period_for(model, pump, signal, idler, temperature_c):
    """Poling period (um) that zeroes the mismatch at the given fields.

    ``pump``, ``signal`` and ``idler`` are :class:`OpticalField` instances.
    """
    mismatch = (beta(model, pump.omega, temperature_c, pump.polarization)
                - beta(model, signal.omega, temperature_c, signal.polarization)
                - beta(model, idler.omega, temperature_c, idler.polarization))
    return period_from_mismatch(mismatch)


def matched_period(config):
    """Poling period (um at the waveguide reference temperature) that phase matches ``config``."""
    period = period_from_mismatch(_bare_mismatch(config, config.signal_omega, config.idler_omega))
    return period / config.waveguide._scale(config.temperature_c)


@dataclass(frozen=True)
class TaylorCoefficients:
    """Expansion coefficients of the mismatch in the signal detuning.

    ``kappa_*`` (s/m) and ``eta_*`` (s^2/m) carry the pump-derivative parts;
    ``gv_term`` and ``gvd_term`` are the reduced cw-pump forms in which they
    cancel. Both parameterizations describe the same polynomial.
    """

    kappa_s: float
    kappa_i: float
    eta_s: float
    eta_i: float
    eta_p: float
    gv_term: float
    gvd_term: float
    delta_beta0: float

    def full_polynomial(self, delta_omega):
        dw = np.asarray(delta_omega, dtype=float)
        return (self.delta_beta0 + (self.kappa_s - self.kappa_i) * dw
                + 0.5 * (self.eta_s + self.eta_i) * dw**2 - self.eta_p * dw**2)


def _first_second(model, omega, temperature_c, pol):
    return (beta_derivative(model, omega, temperature_c, pol, 1),
            beta_derivative(model, omega, temperature_c, pol, 2))


def taylor_coefficients(config):
    wg, m, t = config.waveguide, config.model, config.temperature_c
    bp1, bp2 = _first_second(m, config.pump_omega, t, wg.pump)
    bs1, bs2 = _first_second(m, config.signal_omega, t, wg.signal)
    bi1, bi2 = _first_second(m, config.idler_omega, t, wg.idler)
    return TaylorCoefficients(
        kappa_s=bp1 - bs1,
        kappa_i=bp1 - bi1,
        eta_s=bp2 - bs2,
        eta_i=bp2 - bi2,
        eta_p=bp2,
        gv_term=-bs1 + bi1,
        gvd_term=-0.5 * (bs2 + bi2),
        delta_beta0=float(delta_beta(config, 0.0)),
    )


def taylor_mismatch(coeffs, delta_omega):
    """Second-order cw-pump approximation of the mismatch (rad/m)."""
    dw = np.asarray(delta_omega, dtype=float) if np.ndim(delta_omega) else float(delta_omega)
    return coeffs.delta_beta0 + coeffs.gv_term * dw + coeffs.gvd_term * dw * dw


def gv_term(model, waveguide, signal_omega, idler_omega, temperature_c):
    """Group-velocity mismatch -beta_s' + beta_i' (s/m); element-wise on arrays."""
    return (-beta_derivative(model, signal_omega, temperature_c, waveguide.signal, 1)
            + beta_derivative(model, idler_omega, temperature_c, waveguide.idler, 1))


def gvd_term(model, waveguide, signal_omega, idler_omega, temperature_c):
    """Second-order coefficient -(beta_s'' + beta_i'')/2 (s^2/m); element-wise on arrays."""
    return -0.5 * (beta_derivative(model, signal_omega, temperature_c, waveguide.signal, 2)
                   + beta_derivative(model, idler_omega, temperature_c, waveguide.idler, 2))
