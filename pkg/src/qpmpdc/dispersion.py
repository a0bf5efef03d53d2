"""Material dispersion: refractive index, propagation constant and its
frequency derivatives for a birefringent crystal waveguide.

Wavelengths are vacuum wavelengths in nm, angular frequencies in rad/s,
temperatures in degrees Celsius.
"""

import enum
import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Mapping, Optional

import numpy as np
import yaml
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import (
    ModelFileError,
    NonConverged,
    OutOfValidityRange,
    StencilOutOfRange,
    UnknownPolarization,
)

TWO_PI_C = 2.0 * math.pi * SPEED_OF_LIGHT
MODEL_DIR_ENV = "QPM_MODEL_DIR"
DEFAULT_MODEL = "congruent_ln"


class Polarization(str, enum.Enum):
    """Crystal polarization. For a z-cut crystal TE is ordinary, TM extraordinary."""

    ORDINARY = "ordinary"
    EXTRAORDINARY = "extraordinary"

    @property
    def short(self):
        return "o" if self is Polarization.ORDINARY else "e"


_POL_ALIASES = {
    "ordinary": Polarization.ORDINARY,
    "o": Polarization.ORDINARY,
    "te": Polarization.ORDINARY,
    "extraordinary": Polarization.EXTRAORDINARY,
    "e": Polarization.EXTRAORDINARY,
    "tm": Polarization.EXTRAORDINARY,
}


def as_polarization(value) -> Polarization:
    if isinstance(value, Polarization):
        return value
    try:
        return _POL_ALIASES[str(value).strip().lower()]
    except KeyError:
        raise UnknownPolarization(f"unknown polarization {value!r}") from None


def wavelength_to_omega(wavelength_nm):
    """Vacuum wavelength (nm) to angular frequency (rad/s)."""
    if np.ndim(wavelength_nm):
        return TWO_PI_C / (np.asarray(wavelength_nm, dtype=float) * 1e-9)
    return TWO_PI_C / (float(wavelength_nm) * 1e-9)


def omega_to_wavelength(omega):
    """Angular frequency (rad/s) to vacuum wavelength (nm)."""
    if np.ndim(omega):
        return TWO_PI_C / np.asarray(omega, dtype=float) * 1e9
    return TWO_PI_C / float(omega) * 1e9


@dataclass(frozen=True)
class OpticalField:
    polarization: Polarization
    wavelength_nm: float

    def __post_init__(self):
        object.__setattr__(self, "polarization", as_polarization(self.polarization))
        if not self.wavelength_nm > 0:
            raise ValueError("wavelength must be positive")

    @property
    def omega(self):
        return wavelength_to_omega(self.wavelength_nm)

    @classmethod
    def from_omega(cls, polarization, omega):
        return cls(polarization, omega_to_wavelength(omega))


# ---------------------------------------------------------------------------
# functional forms; each maps (wavelength in um, temperature in C) -> n^2

def _lithium_niobate_thermal(k, lam_um, temp_c):
    # n^2 = a1 + b1 f + (a2 + b2 f)/(l^2 - (a3 + b3 f)^2) + (a4 + b4 f)/(l^2 - a5^2) - a6 l^2
    # with f = (T - t_ref)(T + t_shift)
    f = (temp_c - k["t_ref"]) * (temp_c + k["t_shift"])
    l2 = lam_um * lam_um
    uv = k["a3"] + k["b3"] * f
    n2 = k["a1"] + k["b1"] * f + (k["a2"] + k["b2"] * f) / (l2 - uv * uv) - k["a6"] * l2
    if k["a4"] or k["b4"]:
        n2 = n2 + (k["a4"] + k["b4"] * f) / (l2 - k["a5"] * k["a5"])
    return n2


def _sellmeier(k, lam_um, temp_c):
    # n^2 = A + sum_j B_j l^2 / (l^2 - C_j), optional linear dn/dT about t_ref
    l2 = lam_um * lam_um
    n2 = k.get("A", 1.0)
    for j in range(1, 10):
        if f"B{j}" not in k:
            break
        n2 = n2 + k[f"B{j}"] * l2 / (l2 - k[f"C{j}"])
    dndt = k.get("dn_dt", 0.0)
    if dndt:
        n = np.sqrt(n2) + dndt * (temp_c - k.get("t_ref", 25.0))
        return n * n
    return n2


FORMS = {
    "lithium_niobate_thermal": (
        _lithium_niobate_thermal,
        ("a1", "a2", "a3", "a4", "a5", "a6", "b1", "b2", "b3", "b4", "t_ref", "t_shift"),
    ),
    "sellmeier": (_sellmeier, ("B1", "C1")),
}


@dataclass(frozen=True)
class CoefficientSet:
    """Index law of one polarization together with where it may be evaluated.

    ``form`` names an entry of :data:`FORMS`. Alternatively ``function`` is a
    plain callable ``(wavelength_nm, temperature_c) -> n`` (used for synthetic
    test models); it must accept numpy arrays.
    """

    form: str
    coefficients: Mapping[str, float]
    wavelength_range_nm: tuple
    temperature_range_c: tuple
    source: str = ""
    function: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", MappingProxyType(dict(self.coefficients)))
        object.__setattr__(self, "wavelength_range_nm", tuple(float(v) for v in self.wavelength_range_nm))
        object.__setattr__(self, "temperature_range_c", tuple(float(v) for v in self.temperature_range_c))
        if self.function is None and self.form not in FORMS:
            raise ValueError(f"unknown functional form {self.form!r}")

    def bulk_index(self, wavelength_nm, temperature_c):
        if self.function is not None:
            return self.function(wavelength_nm, temperature_c)
        law = FORMS[self.form][0]
        return np.sqrt(law(self.coefficients, wavelength_nm * 1e-3, temperature_c))


@dataclass(frozen=True)
class DispersionModel:
    """Immutable per-polarization dispersion model.

    ``corrections`` maps a waveguide width label to per-polarization
    polynomial coefficients ``[c0, c1, ...]`` in vacuum wavelength (um) that
    are added to the bulk index. ``width`` selects the active label; ``None``
    means bulk dispersion.
    """

    name: str
    sets: Mapping[Polarization, CoefficientSet]
    version: str = "0"
    source: str = ""
    corrections: Mapping[str, Mapping[Polarization, tuple]] = field(default_factory=dict)
    width: Optional[str] = None

    def __post_init__(self):
        sets = {as_polarization(p): s for p, s in dict(self.sets).items()}
        object.__setattr__(self, "sets", MappingProxyType(sets))
        corr = {
            str(label): MappingProxyType(
                {as_polarization(p): tuple(float(c) for c in coeffs) for p, coeffs in dict(per_pol).items()}
            )
            for label, per_pol in dict(self.corrections).items()
        }
        object.__setattr__(self, "corrections", MappingProxyType(corr))
        if self.width is not None:
            object.__setattr__(self, "width", str(self.width))
            if self.width not in corr:
                raise KeyError(f"model {self.name!r} has no waveguide correction for width {self.width!r}")

    def with_width(self, label):
        """Copy of the model with the correction for ``label`` active (``None`` for bulk)."""
        return replace(self, width=None if label is None else str(label))

    def coefficient_set(self, pol):
        pol = as_polarization(pol)
        try:
            return self.sets[pol]
        except KeyError:
            raise UnknownPolarization(f"model {self.name!r} defines no {pol.value} index") from None

    def wavelength_range(self, pol):
        return self.coefficient_set(pol).wavelength_range_nm

    def temperature_range(self, pol):
        return self.coefficient_set(pol).temperature_range_c

    def correction(self, wavelength_nm, pol):
        if self.width is None:
            return 0.0
        coeffs = self.corrections[self.width].get(as_polarization(pol), ())
        if not coeffs:
            return 0.0
        # numpy polyval wants highest power first
        return np.polyval(coeffs[::-1], np.asarray(wavelength_nm) * 1e-3)

    @classmethod
    def from_functions(cls, name, functions, wavelength_range_nm=(200.0, 10000.0),
                       temperature_range_c=(-273.0, 1000.0)):
        """Build a model from plain index callables ``n(wavelength_nm, T)``."""
        sets = {
            as_polarization(p): CoefficientSet("custom", {}, wavelength_range_nm, temperature_range_c, function=fn)
            for p, fn in functions.items()
        }
        return cls(name=name, sets=sets, version="synthetic")


# ---------------------------------------------------------------------------
# evaluation

def _check_range(model, wavelength_nm, temperature_c, pol, exc=OutOfValidityRange):
    s = model.coefficient_set(pol)
    lo, hi = s.wavelength_range_nm
    tlo, thi = s.temperature_range_c
    if not tlo <= temperature_c <= thi:
        raise exc(
            f"temperature {temperature_c:g} C outside validity [{tlo:g}, {thi:g}] C of model "
            f"{model.name!r} ({as_polarization(pol).value})",
            temperature_c=temperature_c,
        )
    if np.ndim(wavelength_nm):
        wmin, wmax = np.min(wavelength_nm), np.max(wavelength_nm)
    else:
        wmin = wmax = wavelength_nm
    if not (lo <= wmin and wmax <= hi):
        bad = wmin if not lo <= wmin else wmax
        raise exc(
            f"wavelength {bad:.6g} nm outside validity [{lo:g}, {hi:g}] nm of model "
            f"{model.name!r} ({as_polarization(pol).value})",
            wavelength_nm=float(bad),
        )


def refractive_index(model, wavelength_nm, temperature_c, pol):
    """Refractive index n(wavelength, T) of polarization ``pol``.

    Accepts scalar or array wavelengths. Evaluating outside the model's
    declared wavelength or temperature interval raises
    :class:`OutOfValidityRange`.
    """
    pol = as_polarization(pol)
    if np.ndim(wavelength_nm):
        wavelength_nm = np.asarray(wavelength_nm, dtype=float)
    else:
        wavelength_nm = float(wavelength_nm)
    _check_range(model, wavelength_nm, temperature_c, pol)
    return _index_unchecked(model, wavelength_nm, temperature_c, pol)


def _index_unchecked(model, wavelength_nm, temperature_c, pol):
    n = model.sets[pol].bulk_index(wavelength_nm, temperature_c)
    if model.width is not None:
        n = n + model.correction(wavelength_nm, pol)
    return n


def beta(model, omega, temperature_c, pol):
    """Propagation constant n(omega) * omega / c in rad/m."""
    pol = as_polarization(pol)
    omega = np.asarray(omega, dtype=float) if np.ndim(omega) else float(omega)
    return refractive_index(model, TWO_PI_C / omega * 1e9, temperature_c, pol) * omega / SPEED_OF_LIGHT


# central-difference stencils: offsets (in units of h) and weights; derivative = sum(w f) / h^order
_STENCILS = {
    1: (np.array([-1.0, 1.0]), np.array([-0.5, 0.5])),
    2: (np.array([-1.0, 0.0, 1.0]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([-0.5, 1.0, -1.0, 0.5])),
}
DERIVATIVE_RTOL = {1: 1e-6, 2: 1e-6, 3: 1e-4}
DEFAULT_REL_STEP = 1e-3
_MAX_HALVINGS = 8


def beta_derivative(model, omega, temperature_c, pol, order, rel_step=DEFAULT_REL_STEP, rtol=None):
    """``order``-th derivative of beta with respect to omega (rad s^order / m).

    Central differences with one Richardson extrapolation step. The estimate
    is validated by halving the step: the extrapolated values at h and h/2
    must agree to ``rtol`` (defaults: 1e-6 for orders 1-2, 1e-4 for order 3),
    otherwise the step is halved again, up to a fixed number of times before
    :class:`NonConverged` is raised. The initial step is ``rel_step * omega``.
    Works element-wise on arrays of omega.
    """
    if order not in _STENCILS:
        raise ValueError("order must be 1, 2 or 3")
    pol = as_polarization(pol)
    rtol = DERIVATIVE_RTOL[order] if rtol is None else rtol
    scalar = not np.ndim(omega)
    shape = np.shape(omega)
    omega = np.asarray(omega, dtype=float).ravel()
    offsets, weights = _STENCILS[order]
    h = rel_step * omega

    for _ in range(_MAX_HALVINGS):
        # levels h, h/2, h/4 evaluated in one batch
        scales = np.array([1.0, 0.5, 0.25])
        pts = omega[:, None, None] + (h[:, None, None] * scales[None, :, None]) * offsets[None, None, :]
        lam = TWO_PI_C / pts * 1e9
        try:
            _check_range(model, lam, temperature_c, pol, exc=StencilOutOfRange)
        except StencilOutOfRange as err:
            raise StencilOutOfRange(f"derivative stencil leaves the model range: {err}",
                                    wavelength_nm=err.wavelength_nm,
                                    temperature_c=err.temperature_c) from None
        b = _index_unchecked(model, lam, temperature_c, pol) * pts / SPEED_OF_LIGHT
        hs = h[:, None] * scales[None, :]
        d = np.einsum("nlk,k->nl", b, weights) / hs**order
        # Richardson: error of the central stencils is O(h^2)
        r_coarse = (4.0 * d[:, 1] - d[:, 0]) / 3.0
        r_fine = (4.0 * d[:, 2] - d[:, 1]) / 3.0
        # rounding-noise floor of the finest difference
        noise = 64.0 * np.finfo(float).eps * np.max(np.abs(b), axis=(1, 2)) * np.sum(np.abs(weights)) \
            / (h * 0.25) ** order
        ok = np.abs(r_coarse - r_fine) <= rtol * np.abs(r_fine) + noise
        if np.all(ok):
            return float(r_fine[0]) if scalar else r_fine.reshape(shape)
        h = np.where(ok, h, 0.5 * h)
    raise NonConverged(
        f"order-{order} derivative of beta did not converge under step halving "
        f"(model {model.name!r}, {pol.value})"
    )


# ---------------------------------------------------------------------------
# model files

def _key_line(text, key):
    """1-based line number of the first line that defines ``key`` (best effort)."""
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith(f"{key}:") or stripped.startswith(f"- {key}:"):
            return i
    return None


def parse_model(text, path="<string>"):
    """Parse a dispersion model document (YAML schema documented in README)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ModelFileError(path, f"invalid YAML: {getattr(err, 'problem', err)}", line) from None
    if not isinstance(doc, dict):
        raise ModelFileError(path, "model file must be a mapping", 1)

    def need(mapping, key, where):
        if key not in mapping:
            raise ModelFileError(path, f"missing field {key!r} in {where}", _key_line(text, where.split(".")[-1]))
        return mapping[key]

    name = str(need(doc, "name", "document"))
    pols = need(doc, "polarizations", "document")
    if not isinstance(pols, dict) or not pols:
        raise ModelFileError(path, "'polarizations' must be a non-empty mapping", _key_line(text, "polarizations"))
    sets = {}
    for pol_name, entry in pols.items():
        try:
            pol = as_polarization(pol_name)
        except UnknownPolarization as err:
            raise ModelFileError(path, str(err), _key_line(text, pol_name)) from None
        if not isinstance(entry, dict):
            raise ModelFileError(path, f"section {pol_name!r} must be a mapping", _key_line(text, pol_name))
        form = str(need(entry, "form", pol_name))
        if form not in FORMS:
            raise ModelFileError(path, f"unknown form {form!r}", _key_line(text, "form"))
        coeffs = need(entry, "coefficients", pol_name)
        missing = [k for k in FORMS[form][1] if k not in coeffs]
        if missing:
            raise ModelFileError(path, f"{pol_name}: missing coefficients {missing}", _key_line(text, "coefficients"))
        try:
            coeffs = {k: float(v) for k, v in coeffs.items()}
            wl = [float(v) for v in need(entry, "wavelength_range_nm", pol_name)]
            tr = [float(v) for v in need(entry, "temperature_range_c", pol_name)]
        except (TypeError, ValueError) as err:
            raise ModelFileError(path, f"{pol_name}: non-numeric value ({err})", _key_line(text, pol_name)) from None
        if len(wl) != 2 or not 0 < wl[0] < wl[1]:
            raise ModelFileError(path, f"{pol_name}: bad wavelength_range_nm {wl}", _key_line(text, "wavelength_range_nm"))
        if len(tr) != 2 or not tr[0] < tr[1]:
            raise ModelFileError(path, f"{pol_name}: bad temperature_range_c {tr}", _key_line(text, "temperature_range_c"))
        sets[pol] = CoefficientSet(form, coeffs, wl, tr, source=str(entry.get("source", "")))

    corrections = doc.get("waveguide_corrections") or {}
    if not isinstance(corrections, dict):
        raise ModelFileError(path, "'waveguide_corrections' must be a mapping", _key_line(text, "waveguide_corrections"))
    try:
        corrections = {
            str(label): {as_polarization(p): [float(c) for c in cs] for p, cs in (per or {}).items()}
            for label, per in corrections.items()
        }
    except (TypeError, ValueError, UnknownPolarization) as err:
        raise ModelFileError(path, f"bad waveguide correction: {err}", _key_line(text, "waveguide_corrections")) from None

    return DispersionModel(
        name=name,
        sets=sets,
        version=str(doc.get("version", "0")),
        source=str(doc.get("source", "")),
        corrections=corrections,
    )


def load_model(path_or_name=DEFAULT_MODEL, width=None):
    """Load a model from a file path or by name.

    Names are resolved against the directory in ``$QPM_MODEL_DIR`` first and
    the bundled models second (``<name>.yaml``).
    """
    candidate = Path(str(path_or_name))
    if not candidate.suffix and not candidate.exists():
        search = []
        env = os.environ.get(MODEL_DIR_ENV)
        if env:
            search.append(Path(env) / f"{candidate.name}.yaml")
        search.append(Path(str(resources.files("qpmpdc") / "data" / f"{candidate.name}.yaml")))
        for p in search:
            if p.is_file():
                candidate = p
                break
        else:
            raise ModelFileError(path_or_name, "no such model file or bundled model name")
    try:
        text = candidate.read_text()
    except OSError as err:
        raise ModelFileError(candidate, f"cannot read model file ({err.strerror})") from None
    model = parse_model(text, candidate)
    return model.with_width(width) if width is not None else model
