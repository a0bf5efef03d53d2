"""Temperature and pump-wavelength tuning maps, FW80 bandwidth extraction and
classification of the temperature-tuning behaviour around the design pump."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import find_peaks

from .dispersion import omega_to_wavelength
from .errors import (
    EmptySpectrum,
    FractionOutOfRange,
    InsufficientRange,
    OutOfValidityRange,
)
from .jsa import SpectralGrid, jsa, marginal_spectrum

# regime classification thresholds
PEAK_HEIGHT = 0.5
PEAK_PROMINENCE = 0.2
PEAK_MERGE_BINS = 2
BROADBAND_FACTOR = 1.5
AT_DESIGN_LOBE_NM = 50.0
UNCERTAINTY_BAND = 0.05


class Regime(str, Enum):
    ABOVE_DESIGN = "above_design"
    AT_DESIGN = "at_design"
    BELOW_DESIGN = "below_design"


@dataclass(frozen=True)
class BandwidthReport:
    """Width of the main lobe at ``fraction`` of the maximum.

    ``width_thz`` is in ordinary frequency; ``interval_nm`` gives the lobe
    edges in vacuum wavelength (ascending) when the spectrum has a
    wavelength axis, else None.
    """

    width_thz: float
    interval: tuple
    interval_nm: object
    side_lobe: bool
    uncertainty_thz: float
    fraction: float = 0.8

    def to_dict(self):
        return {
            "fw_thz": self.width_thz,
            "fraction": self.fraction,
            "interval_rad_s": list(self.interval),
            "interval_nm": None if self.interval_nm is None else list(self.interval_nm),
            "side_lobe": self.side_lobe,
            "uncertainty_thz": self.uncertainty_thz,
        }


def _crossing(x, y, i, j, level):
    # abscissa between samples i and j where y passes through level
    return x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i])


def full_width_at_fraction(x, y, fraction=0.8):
    """Width (x units) of the contiguous region around the global maximum
    of ``y`` where ``y >= fraction * max``.

    Returns ``(width, (left, right), side_lobe)``. Crossings are linearly
    interpolated; a region touching the end of the data stops there.
    ``side_lobe`` is True when a sample outside the region also reaches the
    level.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not 0 < fraction < 1:
        raise FractionOutOfRange(f"fraction {fraction} not in (0, 1)")
    finite = np.isfinite(y)
    if y.size == 0 or not finite.any() or not np.nanmax(y) > 0:
        raise EmptySpectrum("spectrum has no positive samples")
    y = np.where(finite, y, -np.inf)
    if x.size > 1 and x[0] > x[-1]:
        x, y = x[::-1], y[::-1]
    k = int(np.argmax(y))
    level = fraction * y[k]
    left = k
    while left > 0 and y[left - 1] >= level:
        left -= 1
    right = k
    while right < len(y) - 1 and y[right + 1] >= level:
        right += 1
    xl = x[left] if left == 0 or not np.isfinite(y[left - 1]) else _crossing(x, y, left - 1, left, level)
    xr = x[right] if right == len(y) - 1 or not np.isfinite(y[right + 1]) else _crossing(x, y, right + 1, right, level)
    outside = np.concatenate([y[:left], y[right + 1:]])
    return xr - xl, (xl, xr), bool(np.any(outside >= level))


def bandwidth_fw_at_fraction(spectrum, fraction=0.8):
    """:class:`BandwidthReport` of a marginal spectrum (signal or idler).

    The spectrum is normalized first, so scaling it does not matter. The
    uncertainty is half the spread of the widths at ``fraction`` -+ 0.05.
    """
    det = np.asarray(spectrum.detuning, dtype=float)
    inten = np.asarray(spectrum.intensity, dtype=float)
    width, (a, b), side = full_width_at_fraction(det, inten, fraction)
    lo_f = min(fraction + UNCERTAINTY_BAND, 1 - 1e-9)
    hi_f = max(fraction - UNCERTAINTY_BAND, 1e-9)
    spread = full_width_at_fraction(det, inten, hi_f)[0] - full_width_at_fraction(det, inten, lo_f)[0]
    to_thz = 1e-12 / (2 * math.pi)
    lam = sorted(omega_to_wavelength(spectrum.center_omega + np.array([a, b])))
    return BandwidthReport(
        width_thz=width * to_thz,
        interval=(a, b),
        interval_nm=tuple(float(v) for v in lam),
        side_lobe=side,
        uncertainty_thz=0.5 * spread * to_thz,
        fraction=fraction,
    )


@dataclass(frozen=True)
class TuningMap:
    """Signal marginals stacked along a tuning parameter.

    Rows follow ``parameter``; columns follow ``wavelength_nm`` (signal
    vacuum wavelength, ascending). Rows outside model validity are absent:
    ``present`` is False and their intensities, bandwidths and peaks are NaN.
    """

    parameter_name: str
    parameter: np.ndarray
    wavelength_nm: np.ndarray
    detuning: np.ndarray
    intensity: np.ndarray
    present: np.ndarray
    reports: tuple
    center_omega: float

    @property
    def bandwidth_thz(self):
        return np.array([r.width_thz if r is not None else np.nan for r in self.reports])

    @property
    def peak_wavelength_nm(self):
        out = np.full(len(self.parameter), np.nan)
        for i in np.flatnonzero(self.present):
            out[i] = self.wavelength_nm[int(np.argmax(self.intensity[i]))]
        return out

    def row(self, i):
        return self.intensity[i]


def _row(config, grid, fraction):
    spec = marginal_spectrum(jsa(config, grid), "signal")
    return spec, bandwidth_fw_at_fraction(spec, fraction)


def _build_map(name, values, configs, grid, fraction):
    grid = grid or SpectralGrid()
    values = np.asarray(values, dtype=float)
    if values.size >= 2 and not (np.all(np.diff(values) > 0) or np.all(np.diff(values) < 0)):
        raise ValueError(f"{name} axis must be strictly monotonic")
    det = grid.delta_omega
    # columns in ascending wavelength means descending signal detuning
    order = slice(None, None, -1)
    rows = np.full((len(values), len(det)), np.nan)
    present = np.zeros(len(values), dtype=bool)
    reports = []
    center = None
    for i, make in enumerate(configs):
        try:
            cfg = make()
            spec, rep = _row(cfg, grid, fraction)
        except OutOfValidityRange:
            reports.append(None)
            continue
        center = spec.center_omega
        rows[i] = spec.intensity[order]
        present[i] = True
        reports.append(rep)
    if center is None:
        raise OutOfValidityRange(f"no {name} value of the map lies inside the model validity")
    return TuningMap(
        parameter_name=name,
        parameter=values,
        wavelength_nm=omega_to_wavelength(center + det)[order],
        detuning=det[order],
        intensity=rows,
        present=present,
        reports=tuple(reports),
        center_omega=center,
    )


def temperature_map(config, temperatures_c, grid=None, fraction=0.8):
    """Signal marginals of ``config`` at each temperature (pump and signal
    centre fixed)."""
    temps = np.asarray(temperatures_c, dtype=float)
    if temps.size < 1:
        raise ValueError("temperature list is empty")
    makers = [lambda t=t: config.with_temperature(t) for t in temps]
    return _build_map("temperature_c", temps, makers, grid, fraction)


def temperature_range(start_c, stop_c, steps):
    if steps < 2:
        raise ValueError("a temperature range needs at least two steps")
    return np.linspace(start_c, stop_c, steps)


def pump_map(config, pumps_nm, grid=None, fraction=0.8):
    """Signal marginals at each pump wavelength, temperature and signal centre fixed."""
    pumps = np.asarray(pumps_nm, dtype=float)
    makers = [lambda p=p: config.with_pump_nm(p) for p in pumps]
    return _build_map("pump_nm", pumps, makers, grid, fraction)


@dataclass(frozen=True)
class BandwidthSurface:
    """FW80 bandwidth (THz) over pump wavelength (rows) and temperature (columns)."""

    pump_nm: np.ndarray
    temperature_c: np.ndarray
    bandwidth_thz: np.ndarray

    @property
    def best_temperature_c(self):
        """Temperature maximizing the bandwidth for each pump (NaN if the row is empty)."""
        out = np.full(len(self.pump_nm), np.nan)
        for i, row in enumerate(self.bandwidth_thz):
            if np.isfinite(row).any():
                out[i] = self.temperature_c[int(np.nanargmax(row))]
        return out

    @property
    def max_bandwidth_thz(self):
        return np.array([np.nanmax(r) if np.isfinite(r).any() else np.nan for r in self.bandwidth_thz])


def pump_sweep_bandwidth(config, pumps_nm, temperatures_c, grid=None, fraction=0.8):
    """Bandwidth surface: one temperature map per pump wavelength."""
    pumps = np.asarray(pumps_nm, dtype=float)
    temps = np.asarray(temperatures_c, dtype=float)
    out = np.full((len(pumps), len(temps)), np.nan)
    for i, p in enumerate(pumps):
        try:
            base = config.with_pump_nm(p)
            out[i] = temperature_map(base, temps, grid, fraction).bandwidth_thz
        except OutOfValidityRange:
            continue
    return BandwidthSurface(pumps, temps, out)


def count_peaks(intensity):
    """Number of distinct peaks in a normalized row (merged within a few bins)."""
    y = np.nan_to_num(np.asarray(intensity, dtype=float), nan=0.0)
    # pad so that a maximum on the edge still counts as a peak
    peaks, _ = find_peaks(np.concatenate([[0.0], y, [0.0]]),
                          height=PEAK_HEIGHT, prominence=PEAK_PROMINENCE)
    merged = []
    for p in peaks:
        if not merged or p - merged[-1] > PEAK_MERGE_BINS:
            merged.append(p)
    return len(merged)


def main_lobe_span_nm(wavelength_nm, intensity):
    """Wavelength extent of the lobe holding the maximum, bounded by the
    nearest local minima on either side."""
    y = np.asarray(intensity, dtype=float)
    k = int(np.nanargmax(y))
    left = k
    while left > 0 and y[left - 1] <= y[left]:
        left -= 1
    right = k
    while right < len(y) - 1 and y[right + 1] <= y[right]:
        right += 1
    return abs(wavelength_nm[right] - wavelength_nm[left])


def _broadband_rows(bandwidth):
    bw = np.nan_to_num(np.asarray(bandwidth, dtype=float), nan=-np.inf)
    return bw > BROADBAND_FACTOR * np.nanmedian(bandwidth)


def broadband_regions(parameter, bandwidth):
    """Local bandwidth maxima that stand out of the scan.

    A maximum counts when it exceeds 1.5x the median bandwidth and is
    separated from any higher one by a dip of at least 0.2 of the largest
    bandwidth. Returns ``(parameter value, index)`` pairs in scan order.
    """
    bw = np.asarray(bandwidth, dtype=float)
    top = np.nanmax(bw)
    norm = np.concatenate([[0.0], np.nan_to_num(bw / top, nan=0.0), [0.0]])
    peaks, _ = find_peaks(norm, height=BROADBAND_FACTOR * np.nanmedian(bw) / top,
                          prominence=PEAK_PROMINENCE)
    return [(parameter[k - 1], k - 1) for k in peaks]


def classify_regime(tmap):
    """Temperature-tuning behaviour of a map taken at one pump wavelength.

    Only broadband rows (bandwidth above 1.5x the median) are inspected.
    below_design: two separate bandwidth maxima in temperature or a row with
    three or more peaks; at_design: a row whose main lobe spans more than
    50 nm; otherwise above_design.
    """
    bw = tmap.bandwidth_thz
    if not np.isfinite(bw).any():
        raise InsufficientRange("map has no valid rows")
    valid = np.flatnonzero(np.isfinite(bw))
    best = int(np.nanargmax(bw))
    if best in (valid[0], valid[-1]):
        raise InsufficientRange(
            f"largest bandwidth sits at the map edge ({tmap.parameter_name} = {tmap.parameter[best]:g}); "
            "widen the scan to cover the broadband region"
        )
    rows = np.flatnonzero(_broadband_rows(bw))
    if len(broadband_regions(tmap.parameter, bw)) >= 2:
        return Regime.BELOW_DESIGN
    if any(count_peaks(tmap.intensity[i]) >= 3 for i in rows):
        return Regime.BELOW_DESIGN
    if any(main_lobe_span_nm(tmap.wavelength_nm, tmap.intensity[i]) > AT_DESIGN_LOBE_NM for i in rows):
        return Regime.AT_DESIGN
    return Regime.ABOVE_DESIGN
