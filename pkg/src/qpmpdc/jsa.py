"""cw-pump joint spectral amplitude, marginal spectra and Fourier-limited
correlation time."""

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import omega_to_wavelength
from .errors import DegenerateSpectrum, NonPhysical, NormalizationError, OutOfValidityRange
from .phasematch import delta_beta, signal_idler_omegas

DEFAULT_POINTS = 4097
# +-30 THz keeps the idler of the bundled model's working point inside the
# 4 um limit of its ordinary index
DEFAULT_HALF_SPAN = 2 * math.pi * 30e12


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform, symmetric grid of signal detunings (rad/s), odd point count."""

    half_span: float = DEFAULT_HALF_SPAN
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.points < 17 or self.points % 2 == 0:
            raise ValueError("grid needs an odd number of points, at least 17")
        if not self.half_span > 0:
            raise ValueError("grid span must be positive")

    @classmethod
    def from_thz(cls, half_span_thz, points=DEFAULT_POINTS):
        return cls(2 * math.pi * half_span_thz * 1e12, points)

    @property
    def delta_omega(self):
        k = np.arange(-(self.points // 2), self.points // 2 + 1)
        return k * self.resolution

    @property
    def resolution(self):
        return self.half_span / (self.points // 2)

    def refined(self):
        """Same span, twice the resolution."""
        return SpectralGrid(self.half_span, 2 * self.points - 1)

    def centers_nm(self, config):
        return config.signal_nm, config.idler_nm


@dataclass(frozen=True)
class JSAResult:
    delta_omega: np.ndarray
    amplitude: np.ndarray
    delta_beta: np.ndarray
    config: object

    @property
    def intensity(self):
        return np.abs(self.amplitude) ** 2

    @property
    def phase_argument(self):
        """Delta beta * L / 2 at every grid point."""
        return 0.5 * self.delta_beta * self.config.length_m

    @property
    def signal_nm(self):
        return omega_to_wavelength(self.config.signal_omega + self.delta_omega)

    @property
    def idler_nm(self):
        return omega_to_wavelength(self.config.idler_omega - self.delta_omega)


def sinc(x):
    """sin(x)/x with sinc(0) = 1 (unnormalized, unlike ``np.sinc``)."""
    return np.sinc(np.asarray(x) / np.pi)


def jsa(config, grid=None):
    """Phase-matching amplitude sinc(dB L/2) exp(i dB L/2) on ``grid``.

    The mismatch is evaluated exactly, not from its Taylor expansion.
    """
    grid = grid or SpectralGrid()
    dw = grid.delta_omega
    ws, wi = signal_idler_omegas(config, dw[[0, -1]])
    wg = config.waveguide
    for pol, omegas, name in ((wg.signal, ws, "signal"), (wg.idler, wi, "idler")):
        lo, hi = config.model.wavelength_range(pol)
        for lam in omega_to_wavelength(omegas):
            if not lo <= lam <= hi:
                raise OutOfValidityRange(
                    f"grid edge puts the {name} at {lam:.6g} nm, outside [{lo:g}, {hi:g}] nm",
                    wavelength_nm=float(lam),
                )
    db = delta_beta(config, dw)
    x = 0.5 * db * config.length_m
    amp = sinc(x) * np.exp(1j * x)
    return JSAResult(delta_omega=dw, amplitude=amp, delta_beta=db, config=config)


@dataclass(frozen=True)
class MarginalSpectrum:
    """Normalized intensity of one photon of the pair.

    ``detuning`` is the photon's own angular-frequency offset from its
    centre, ascending; ``wavelength_nm`` follows the same order.
    """

    which: str
    detuning: np.ndarray
    wavelength_nm: np.ndarray
    intensity: np.ndarray
    center_omega: float

    @property
    def frequency_thz(self):
        return (self.center_omega + self.detuning) / (2 * math.pi) * 1e-12


def _normalized(values):
    peak = np.max(values) if values.size else 0.0
    if not peak > 0 or not np.isfinite(peak):
        raise NormalizationError("spectrum has no positive maximum")
    return values / peak


def marginal_spectrum(result, which="signal", jacobian=False):
    """Marginal of ``result`` for ``which`` in {"signal", "idler"}, max 1.

    Intensities are per frequency bin. With ``jacobian=True`` they are
    converted to per wavelength bin (factor 1/lambda^2) before normalizing.
    """
    inten = result.intensity
    cfg = result.config
    if which == "signal":
        det = result.delta_omega
        center = cfg.signal_omega
    elif which == "idler":
        # the idler detuning is the negated signal detuning
        det = -result.delta_omega[::-1]
        inten = inten[::-1]
        center = cfg.idler_omega
    else:
        raise ValueError("which must be 'signal' or 'idler'")
    lam = omega_to_wavelength(center + det)
    if jacobian:
        inten = inten / lam**2
    return MarginalSpectrum(which, det, lam, _normalized(inten), center)


def idler_wavelength_of(pump_nm, signal_nm):
    """Idler wavelength from energy conservation (all in nm)."""
    if not 0 < pump_nm < signal_nm:
        raise NonPhysical(f"signal {signal_nm} nm must be longer than the pump {pump_nm} nm (> 0)")
    return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm)


def _fwhm(x, y):
    """Full width at half maximum of the peak of ``y``, linear interpolation."""
    k = int(np.argmax(y))
    half = 0.5 * y[k]
    left = k
    while left > 0 and y[left - 1] >= half:
        left -= 1
    right = k
    while right < len(y) - 1 and y[right + 1] >= half:
        right += 1
    if left == 0 or right == len(y) - 1:
        raise DegenerateSpectrum("correlation peak not resolved inside the time window")
    xl = np.interp(half, [y[left - 1], y[left]], [x[left - 1], x[left]])
    xr = np.interp(half, [y[right + 1], y[right]], [x[right + 1], x[right]])
    return xr - xl


def fourier_limited_duration(detuning, intensity, padding=16):
    """FWHM (s) of |g(tau)|^2, g the Fourier transform of sqrt(intensity)
    with flat spectral phase. ``detuning`` must be uniform (rad/s)."""
    detuning = np.asarray(detuning, dtype=float)
    intensity = np.asarray(intensity, dtype=float)
    if np.count_nonzero(intensity > 0) < 3:
        raise DegenerateSpectrum("need at least three nonzero spectral samples")
    if padding < 8:
        raise ValueError("zero-padding factor must be at least 8")
    n = len(detuning)
    dw = (detuning[-1] - detuning[0]) / (n - 1)
    npad = 1 << int(math.ceil(math.log2(n * padding)))
    amp = np.zeros(npad)
    amp[:n] = np.sqrt(np.clip(intensity, 0, None))
    g = np.fft.fftshift(np.abs(np.fft.fft(amp)) ** 2)
    dt = 2 * math.pi / (npad * dw)
    tau = (np.arange(npad) - npad // 2) * dt
    return _fwhm(tau, g / g.max())


def correlation_time(spectrum, padding=16):
    """Fourier-limited correlation time (fs) of a :class:`MarginalSpectrum`."""
    return fourier_limited_duration(spectrum.detuning, spectrum.intensity, padding) * 1e15
