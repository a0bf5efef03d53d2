"""Waveguide loss from low-finesse Fabry-Perot fringes and a lower bound on
the pair-source brightness.

The waveguide between its two end facets (power reflectivity R each) is a
Fabry-Perot resonator. With single-pass power transmission a the
transmitted power is

    T = (1 - R)^2 a / ((1 - Rt)^2 + 4 Rt sin^2(phi / 2)),    Rt = R a,

whose fringe contrast K = (Tmax - Tmin) / (Tmax + Tmin) = 2 Rt / (1 + Rt^2)
is inverted for Rt and hence for the propagation loss -ln(a) / L.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from .errors import (
    GainImplied,
    InvalidContrast,
    InvalidIndex,
    InvalidReflectivity,
    NegativeNetRate,
    NoFringeFound,
)

# contrasts this far above the lossless bound are read as rounding, not gain
CONTRAST_TOLERANCE = 1e-9
# relative rounding allowed when comparing the round-trip factor with R
_RT_NOISE = 1e-12
DB_PER_NEPER = 10.0 / math.log(10.0)


def _check_reflectivity(r):
    if not (np.isfinite(r) and 0 < r < 1):
        raise InvalidReflectivity(f"facet reflectivity {r} not in (0, 1)")


def airy_transmission(phase, reflectivity, loss_db_per_cm, length_cm):
    """Transmitted power of a lossy symmetric Fabry-Perot (unit input).

    ``phase`` is the round-trip phase in rad.
    """
    _check_reflectivity(reflectivity)
    a = 10.0 ** (-loss_db_per_cm * length_cm / 10.0)
    rt = reflectivity * a
    s = np.sin(0.5 * np.asarray(phase, dtype=float))
    return (1 - reflectivity) ** 2 * a / ((1 - rt) ** 2 + 4 * rt * s * s)


def contrast_from_loss(reflectivity, loss_db_per_cm, length_cm):
    """Fringe contrast of the Airy model in closed form."""
    _check_reflectivity(reflectivity)
    rt = reflectivity * 10.0 ** (-loss_db_per_cm * length_cm / 10.0)
    return 2 * rt / (1 + rt * rt)


def synthetic_scan(reflectivity, loss_db_per_cm, length_cm, fringes=5.0, samples=400,
                   chirp=0.0, offset_rad=0.3, waveguide_id=""):
    """Noise-free Airy fringe trace over ``fringes`` free spectral ranges.

    ``chirp`` bends the phase quadratically along the scan axis, as in a
    temperature scan over a dispersive waveguide.
    """
    x = np.linspace(0.0, 1.0, samples)
    phase = offset_rad + 2 * math.pi * fringes * (x + chirp * x * x) / (1 + chirp)
    power = airy_transmission(phase, reflectivity, loss_db_per_cm, length_cm)
    return FringeScan(x, power, reflectivity, length_cm, waveguide_id)


def lossless_contrast_bound(reflectivity):
    """Largest contrast compatible with no gain, 2R / (1 + R^2)."""
    return 2 * reflectivity / (1 + reflectivity**2)


@dataclass(frozen=True)
class FringeScan:
    """Transmitted power against a monotonic scan coordinate."""

    axis: np.ndarray
    power: np.ndarray
    reflectivity: float
    length_cm: float
    waveguide_id: str = ""

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        power = np.asarray(self.power, dtype=float)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "power", power)
        if axis.shape != power.shape or axis.ndim != 1:
            raise ValueError("scan axis and power must be 1-d arrays of equal length")
        d = np.diff(axis)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("scan axis must be strictly monotonic")
        if np.any(power < 0) or not np.all(np.isfinite(power)):
            raise ValueError("power samples must be finite and non-negative")
        _check_reflectivity(self.reflectivity)
        if not self.length_cm > 0:
            raise ValueError("waveguide length must be positive")


def _refined_extrema(y, idx):
    # vertex of the parabola through each discrete extremum and its neighbours
    y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
    den = y0 - 2 * y1 + y2
    safe = np.where(den == 0, 1.0, den)
    return np.where(den == 0, y1, y1 - 0.125 * (y2 - y0) ** 2 / safe)


def fringe_extrema(power):
    """Interpolated interior maxima and minima of a fringe trace."""
    y = np.asarray(power, dtype=float)
    span = np.ptp(y) if y.size else 0.0
    if span == 0:
        return np.array([]), np.array([])
    # a small prominence floor rejects rounding ripples on flat stretches
    prom = 1e-6 * span
    imax, _ = find_peaks(y, prominence=prom)
    imin, _ = find_peaks(-y, prominence=prom)
    return _refined_extrema(y, imax), _refined_extrema(y, imin)


def fringe_contrast(scan):
    """Fringe contrast K from the mean of all interior maxima and minima.

    A constant trace has K = 0. Raises :class:`NoFringeFound` when the trace
    varies but lacks an interior maximum or minimum.
    """
    power = scan.power if isinstance(scan, FringeScan) else np.asarray(scan, dtype=float)
    if power.size and np.ptp(power) == 0:
        return 0.0
    maxima, minima = fringe_extrema(power)
    if maxima.size == 0 or minima.size == 0:
        raise NoFringeFound("scan holds no complete fringe (needs a maximum and a minimum)")
    hi = float(np.mean(maxima))
    lo = max(float(np.mean(minima)), 0.0)
    return (hi - lo) / (hi + lo)


def loss_from_contrast(contrast, reflectivity, length_cm):
    """Propagation loss (dB/cm) from the fringe contrast of a waveguide with
    facet reflectivity ``reflectivity`` and length ``length_cm``.

    Returns 0 when the contrast sits at the lossless bound.
    """
    _check_reflectivity(reflectivity)
    if not length_cm > 0:
        raise ValueError("waveguide length must be positive")
    if not (np.isfinite(contrast) and 0 < contrast <= 1):
        raise InvalidContrast(f"fringe contrast {contrast} not in (0, 1]")
    bound = lossless_contrast_bound(reflectivity)
    if contrast > bound + CONTRAST_TOLERANCE:
        raise GainImplied(
            f"contrast {contrast:.6g} exceeds the lossless bound {bound:.6g} for R = {reflectivity:g}"
        )
    rt = (1 - math.sqrt(1 - contrast * contrast)) / contrast
    if rt >= reflectivity * (1 - _RT_NOISE):
        return 0.0
    return DB_PER_NEPER / length_cm * math.log(reflectivity / rt)


def fresnel_reflectivity(index):
    """Normal-incidence power reflectivity of a facet to air."""
    if not (np.isfinite(index) and index >= 1):
        raise InvalidIndex(f"refractive index {index} must be at least 1")
    return ((index - 1) / (index + 1)) ** 2


@dataclass(frozen=True)
class LossResult:
    waveguide_id: str
    contrast: float
    reflectivity: float
    loss_db_per_cm: float
    flags: str = ""


def analyze_scan(scan):
    """Contrast and loss of one :class:`FringeScan`."""
    k = fringe_contrast(scan)
    flags = []
    if k == 0:
        raise NoFringeFound(f"flat trace for waveguide {scan.waveguide_id or '?'}")
    bound = lossless_contrast_bound(scan.reflectivity)
    if k >= bound:
        flags.append("lossless_bound")
    loss = loss_from_contrast(min(k, bound), scan.reflectivity, scan.length_cm)
    return LossResult(scan.waveguide_id, k, scan.reflectivity, loss, ";".join(flags))


@dataclass(frozen=True)
class BrightnessInput:
    """Count rates (counts/s) of a spectrally filtered detection.

    ``calibration_scale`` transfers the spectrograph counts to the detector
    they were calibrated against (1 when already calibrated).
    """

    detected_rate: float
    background_rate: float
    pump_power_mw: float
    bandwidth_ghz: float
    coupling_efficiency: Optional[float] = None
    calibration_scale: float = 1.0

    def __post_init__(self):
        if not self.pump_power_mw > 0:
            raise ValueError("pump power must be positive")
        if not self.bandwidth_ghz > 0:
            raise ValueError("bandwidth must be positive")
        if not self.calibration_scale > 0:
            raise ValueError("calibration scale must be positive")
        eta = self.coupling_efficiency
        if eta is not None and not 0 < eta <= 1:
            raise ValueError("coupling efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class Brightness:
    """``lower_bound`` uses the detected pairs only; ``estimate`` further
    divides by the coupling efficiency and is None without one."""

    lower_bound: float
    estimate: Optional[float]
    units: str = "counts/(s mW GHz)"

    def to_dict(self):
        return {"lower_bound": self.lower_bound, "estimate": self.estimate, "units": self.units}


def brightness_lower_bound(inp):
    net = inp.detected_rate - inp.background_rate
    if net < 0:
        raise NegativeNetRate(
            f"background {inp.background_rate:g}/s exceeds the detected rate {inp.detected_rate:g}/s"
        )
    bound = net * inp.calibration_scale / (inp.pump_power_mw * inp.bandwidth_ghz)
    est = None if inp.coupling_efficiency is None else bound / inp.coupling_efficiency
    return Brightness(bound, est)
