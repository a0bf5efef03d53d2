"""Working-point solvers.

Group-velocity (GV) matching zeroes the linear term of the cw mismatch,
GVD cancellation its quadratic term. Because the quadratic coefficient is
half the derivative of the linear one with respect to the signal frequency,
the GVD-cancelled signal is the turning point of the GV mismatch curve, and
the design pump is the one for which that turning point touches zero. At the
design pump GV matching is a double root; below it there are two GV-matched
signals, above it none.

The design-point solve is therefore nested as

1. signal: zero of the GVD term at fixed pump and temperature (simple root),
2. pump: zero of the GV term evaluated at that signal,
3. temperature: zero of the mismatch for the fixed poling period.

Every level isolates its root with a dense sign-change scan before
polishing, and all solvers are deterministic.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dispersion import omega_to_wavelength, wavelength_to_omega
from .errors import DegenerateRoot, MultipleRoots, NonUnique, NoRootInBracket, OutOfValidityRange
from .phasematch import ProcessConfig, WaveguideSpec, delta_beta, gv_term, gvd_term, matched_period
from .roots import EPS, bisect_rows, polish, scan, sign_change_brackets

DEFAULT_SIGNAL_RANGE_NM = (700.0, 1100.0)
DEFAULT_PUMP_RANGE_NM = (600.0, 700.0)
# derivative stencils reach 2 * rel_step * omega plus halvings
_STENCIL_MARGIN = 2.5e-3


@dataclass(frozen=True)
class SolverTolerances:
    gv_s_per_m: float = 1e-16
    gvd_s2_per_m: float = 1e-29
    delta_beta_rad_per_m: float = 1e-9
    signal_interval_nm: float = 1e-6
    pump_interval_nm: float = 1e-4
    scan_points: int = 201
    temperature_scan_points: int = 31


DEFAULT_TOLERANCES = SolverTolerances()


def default_waveguide():
    """Type-II waveguide of the 40 mm chip; the period is a placeholder."""
    return WaveguideSpec(length_mm=40.0, poling_period_um=6.0)


@dataclass(frozen=True)
class WorkingPoint:
    pump_nm: float
    temperature_c: float
    signal_nm: float
    idler_nm: float
    poling_period_um: float
    gv_residual: float
    gvd_residual: float
    delta_beta0_residual: float
    pump_omega: float
    signal_omega: float
    model_name: str = ""
    model_version: str = ""
    tolerances: SolverTolerances = field(default=DEFAULT_TOLERANCES)

    @property
    def idler_omega(self):
        return self.pump_omega - self.signal_omega

    def within_tolerance(self):
        t = self.tolerances
        return (abs(self.gv_residual) <= t.gv_s_per_m
                and abs(self.gvd_residual) <= t.gvd_s2_per_m
                and abs(self.delta_beta0_residual) <= t.delta_beta_rad_per_m)

    def config(self, model, waveguide):
        """Process configuration at this point, with the period applied to ``waveguide``."""
        return ProcessConfig(model, waveguide.with_period(self.poling_period_um),
                             self.pump_omega, self.signal_omega, self.temperature_c)

    def to_dict(self):
        d = asdict(self)
        d["idler_omega"] = self.idler_omega
        return d


def _residuals(model, waveguide, pump_omega, signal_omega, temperature_c):
    wi = pump_omega - signal_omega
    cfg = ProcessConfig(model, waveguide, pump_omega, signal_omega, temperature_c)
    return (gv_term(model, waveguide, signal_omega, wi, temperature_c),
            gvd_term(model, waveguide, signal_omega, wi, temperature_c),
            float(delta_beta(cfg, 0.0)))


def _make_point(model, waveguide, pump_omega, signal_omega, temperature_c, tol):
    gv, gvd, db0 = _residuals(model, waveguide, pump_omega, signal_omega, temperature_c)
    return WorkingPoint(
        pump_nm=omega_to_wavelength(pump_omega),
        temperature_c=temperature_c,
        signal_nm=omega_to_wavelength(signal_omega),
        idler_nm=omega_to_wavelength(pump_omega - signal_omega),
        poling_period_um=waveguide.poling_period_um,
        gv_residual=gv,
        gvd_residual=gvd,
        delta_beta0_residual=db0,
        pump_omega=pump_omega,
        signal_omega=signal_omega,
        model_name=model.name,
        model_version=model.version,
        tolerances=tol,
    )


def signal_omega_bounds(model, waveguide, pump_omega, temperature_c, signal_range_nm=DEFAULT_SIGNAL_RANGE_NM):
    """Signal-frequency interval inside ``signal_range_nm`` for which signal
    and idler (and their derivative stencils) stay inside the model range.
    Element-wise in ``pump_omega``.
    """
    m = _STENCIL_MARGIN
    s_lo, s_hi = model.wavelength_range(waveguide.signal)
    i_lo, i_hi = model.wavelength_range(waveguide.idler)
    lam_lo = max(signal_range_nm[0], s_lo)
    lam_hi = min(signal_range_nm[1], s_hi)
    lo = wavelength_to_omega(lam_hi) * (1 + m)
    hi = wavelength_to_omega(lam_lo) * (1 - m)
    lo = np.maximum(lo, pump_omega - wavelength_to_omega(i_lo) * (1 - m))
    hi = np.minimum(hi, pump_omega - wavelength_to_omega(i_hi) * (1 + m))
    return lo, hi


def _omega_xtol(omega, interval_nm):
    # omega interval equivalent to a wavelength interval
    return 0.5 * omega * interval_nm / omega_to_wavelength(omega)


def _isolate(f, lo, hi, points, level, zero_tol):
    if not lo < hi:
        raise NoRootInBracket(f"{level}: empty bracket after clipping to the model range", level=level)
    x, y = scan(f, lo, hi, points)
    if np.all(np.isfinite(y)) and np.max(np.abs(y)) <= zero_tol:
        raise DegenerateRoot(f"{level}: residual vanishes on the whole bracket; every point is a root")
    brackets = sign_change_brackets(x, y)
    if not brackets:
        raise NoRootInBracket(f"{level}: no sign change in the scanned bracket", level=level,
                              scan=(omega_to_wavelength(x), y))
    return x, y, brackets


# ---------------------------------------------------------------------------
# GV matching at fixed pump

def gv_matched_signals(model, pump_nm, temperature_c, waveguide=None, signal_range_nm=DEFAULT_SIGNAL_RANGE_NM,
                       tolerances=DEFAULT_TOLERANCES):
    """All GV-matched signal frequencies in the bracket, as (signal, idler)
    omega pairs ordered by increasing signal wavelength."""
    wg = waveguide or default_waveguide()
    tol = tolerances
    wp = wavelength_to_omega(pump_nm)
    lo, hi = signal_omega_bounds(model, wg, wp, temperature_c, signal_range_nm)

    def f(ws):
        return gv_term(model, wg, ws, wp - ws, temperature_c)

    level = "signal (GV matching)"
    x, _, brackets = _isolate(f, float(lo), float(hi), tol.scan_points, level, tol.gv_s_per_m)
    roots = []
    for a, b in brackets:
        xtol = _omega_xtol(x[a], tol.signal_interval_nm)
        ws = polish(f, x[a], x[b], xtol)
        roots.append((ws, wp - ws))
    return sorted(roots, key=lambda r: -r[0])


def solve_gv_matched_signal(model, pump_nm, temperature_c, waveguide=None,
                            signal_range_nm=DEFAULT_SIGNAL_RANGE_NM, tolerances=DEFAULT_TOLERANCES):
    """Unique GV-matched (signal, idler) omega pair in the signal bracket.

    Raises :class:`MultipleRoots` (with every bracket, in nm) when the scan
    finds more than one sign change; nothing is solved in that case.
    """
    wg = waveguide or default_waveguide()
    tol = tolerances
    wp = wavelength_to_omega(pump_nm)
    lo, hi = signal_omega_bounds(model, wg, wp, temperature_c, signal_range_nm)

    def f(ws):
        return gv_term(model, wg, ws, wp - ws, temperature_c)

    level = "signal (GV matching)"
    x, _, brackets = _isolate(f, float(lo), float(hi), tol.scan_points, level, tol.gv_s_per_m)
    if len(brackets) > 1:
        nm = [(omega_to_wavelength(x[b]), omega_to_wavelength(x[a])) for a, b in brackets]
        raise MultipleRoots(f"{level}: {len(brackets)} sign changes, brackets (nm) {nm}", brackets=nm)
    a, b = brackets[0]
    ws = polish(f, x[a], x[b], _omega_xtol(x[a], tol.signal_interval_nm))
    return ws, wp - ws


# ---------------------------------------------------------------------------
# design point

def gvd_cancelled_signal(model, waveguide, pump_omega, temperature_c, signal_range_nm=DEFAULT_SIGNAL_RANGE_NM,
                         tolerances=DEFAULT_TOLERANCES):
    """Signal omega at which the quadratic cw term vanishes (fixed pump, T)."""
    tol = tolerances
    lo, hi = signal_omega_bounds(model, waveguide, pump_omega, temperature_c, signal_range_nm)

    def f(ws):
        return gvd_term(model, waveguide, ws, pump_omega - ws, temperature_c)

    level = "signal (GVD cancellation)"
    x, _, brackets = _isolate(f, float(lo), float(hi), tol.scan_points, level, tol.gvd_s2_per_m)
    if len(brackets) > 1:
        nm = [(omega_to_wavelength(x[b]), omega_to_wavelength(x[a])) for a, b in brackets]
        raise NonUnique(f"{level}: {len(brackets)} sign changes, brackets (nm) {nm}", brackets=nm)
    a, b = brackets[0]
    return polish(f, x[a], x[b], _omega_xtol(x[a], tol.signal_interval_nm))


def _gvd_signal_rows(model, waveguide, pump_omegas, temperature_c, signal_range_nm, tol, iterations=40):
    """Batched, bisection-accurate version of :func:`gvd_cancelled_signal`
    for many pumps; rows without exactly one sign change give NaN."""
    n = tol.scan_points
    lo, hi = signal_omega_bounds(model, waveguide, pump_omegas, temperature_c, signal_range_nm)
    valid = lo < hi
    lo = np.where(valid, lo, np.nan)
    hi = np.where(valid, hi, np.nan)
    t = np.linspace(0.0, 1.0, n)
    grid = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    out = np.full(len(pump_omegas), np.nan)
    rows = np.flatnonzero(valid)
    if rows.size == 0:
        return out
    g = grid[rows]
    wp = pump_omegas[rows][:, None]
    vals = gvd_term(model, waveguide, g, wp - g, temperature_c)
    s = np.sign(vals)
    changes = s[:, :-1] * s[:, 1:] <= 0
    single = changes.sum(axis=1) == 1
    k = np.argmax(changes, axis=1)
    r = np.arange(len(rows))
    a, b = g[r, k], g[r, k + 1]
    a, b, wp1 = a[single], b[single], pump_omegas[rows][single]
    if a.size:
        def f(ws):
            return gvd_term(model, waveguide, ws, wp1 - ws, temperature_c)
        out[rows[single]] = bisect_rows(f, a, b, iterations)
    return out


def design_pump(model, waveguide, temperature_c, pump_range_nm=DEFAULT_PUMP_RANGE_NM,
                signal_range_nm=DEFAULT_SIGNAL_RANGE_NM, tolerances=DEFAULT_TOLERANCES):
    """(pump omega, signal omega) with simultaneous GV matching and GVD
    cancellation at fixed temperature."""
    tol = tolerances
    level = "pump (GV matching at the GVD-cancelled signal)"
    lam = np.linspace(pump_range_nm[0], pump_range_nm[1], tol.scan_points)
    if not pump_range_nm[0] < pump_range_nm[1]:
        raise NoRootInBracket(f"{level}: empty pump range {pump_range_nm}", level=level)
    wps = wavelength_to_omega(lam)
    ws = _gvd_signal_rows(model, waveguide, wps, temperature_c, signal_range_nm, tol)
    ok = np.isfinite(ws)
    g = np.full(len(lam), np.nan)
    if ok.any():
        g[ok] = gv_term(model, waveguide, ws[ok], wps[ok] - ws[ok], temperature_c)
    brackets = sign_change_brackets(wps, g)
    if not brackets:
        raise NoRootInBracket(f"{level}: no sign change for T = {temperature_c:g} C", level=level, scan=(lam, g))
    if len(brackets) > 1:
        nm = [(lam[a], lam[b]) for a, b in brackets]
        raise NonUnique(f"{level}: {len(brackets)} sign changes, brackets (nm) {nm}", brackets=nm)

    cache = {}

    def inner(wp):
        if wp not in cache:
            cache[wp] = gvd_cancelled_signal(model, waveguide, wp, temperature_c, signal_range_nm, tol)
        return cache[wp]

    def f(wp):
        s = inner(wp)
        return gv_term(model, waveguide, s, wp - s, temperature_c)

    a, b = brackets[0]
    wp = polish(f, wps[a], wps[b], _omega_xtol(wps[a], tol.pump_interval_nm))
    return wp, inner(wp)


def _temperature_range(model, waveguide):
    lo, hi = -math.inf, math.inf
    for pol in (waveguide.pump, waveguide.signal, waveguide.idler):
        t0, t1 = model.temperature_range(pol)
        lo, hi = max(lo, t0), min(hi, t1)
    return lo, hi


def _noise_floor_temperature(model, waveguide, pump_omega, signal_omega, t_root, target, steps=4000):
    """Nearest temperature to ``t_root`` (walking outward in 1e-12 K steps)
    whose computed mismatch is within ``target``.

    Near the root the computed mismatch is dominated by rounding of
    propagation constants of order 1e7 rad/m; the walk picks a sample
    where that rounding nets out below the target.
    """
    def db(t):
        return float(delta_beta(ProcessConfig(model, waveguide, pump_omega, signal_omega, t), 0.0))

    step = max(1e-12, 4 * EPS * abs(t_root))
    best_t, best = t_root, db(t_root)
    for k in range(1, steps):
        if abs(best) <= target:
            break
        for t in (t_root + k * step, t_root - k * step):
            v = db(t)
            if abs(v) < abs(best):
                best_t, best = t, v
    return best_t


def _fixed_frequency_temperature(model, waveguide, pump_omega, signal_omega, t0, t_range):
    def db(t):
        return float(delta_beta(ProcessConfig(model, waveguide, pump_omega, signal_omega, t), 0.0))

    f0 = db(t0)
    if f0 == 0.0:
        return t0
    step = 1e-9
    while step < 1.0:
        for t1 in (t0 - step, t0 + step):
            if t_range[0] <= t1 <= t_range[1] and db(t1) * f0 < 0:
                return polish(db, t0, t1, xtol=1e-13)
        step *= 4.0
    return t0


def solve_design_point(model, waveguide, temperature_range_c=None, pump_range_nm=DEFAULT_PUMP_RANGE_NM,
                       signal_range_nm=DEFAULT_SIGNAL_RANGE_NM, tolerances=DEFAULT_TOLERANCES):
    """Working point of a waveguide with fixed poling period.

    Temperature is chosen so that the mismatch vanishes at the design pump
    and signal of that temperature. ``temperature_range_c`` defaults to the
    model's validity interval.
    """
    tol = tolerances
    if temperature_range_c is None:
        temperature_range_c = _temperature_range(model, waveguide)
    t_lo, t_hi = temperature_range_c
    level = "temperature (zero mismatch at fixed period)"
    if not t_lo < t_hi:
        raise NoRootInBracket(f"{level}: empty temperature range {temperature_range_c}", level=level)

    cache = {}

    def design(t):
        if t not in cache:
            cache[t] = design_pump(model, waveguide, t, pump_range_nm, signal_range_nm, tol)
        return cache[t]

    def residual(t):
        wp, ws = design(t)
        return float(delta_beta(ProcessConfig(model, waveguide, wp, ws, t), 0.0))

    temps = np.linspace(t_lo, t_hi, tol.temperature_scan_points)
    r = np.full(len(temps), np.nan)
    for k, t in enumerate(temps):
        try:
            r[k] = residual(float(t))
        except (NoRootInBracket, OutOfValidityRange):
            pass
    brackets = sign_change_brackets(temps, r)
    if not brackets:
        raise NoRootInBracket(f"{level}: no sign change for period {waveguide.poling_period_um:g} um",
                              level=level, scan=(temps, r))
    if len(brackets) > 1:
        ranges = [(temps[a], temps[b]) for a, b in brackets]
        raise NonUnique(f"{level}: {len(brackets)} sign changes, brackets (C) {ranges}", brackets=ranges)
    a, b = brackets[0]
    t_root = polish(residual, float(temps[a]), float(temps[b]), xtol=1e-10)
    wp, ws = design(t_root)
    # The design pump carries its own interval tolerance, so the nested
    # residual is only piecewise smooth; finish on the mismatch at fixed
    # pump and signal, which is smooth in temperature.
    t_root = _fixed_frequency_temperature(model, waveguide, wp, ws, t_root, (t_lo, t_hi))
    t_final = _noise_floor_temperature(model, waveguide, wp, ws, t_root, tol.delta_beta_rad_per_m)
    return _make_point(model, waveguide, wp, ws, t_final, tol)


def solve_poling_for_design(model, pump_nm, temperature_c, waveguide=None, signal_nm=None, branch=None,
                            signal_range_nm=DEFAULT_SIGNAL_RANGE_NM, tolerances=DEFAULT_TOLERANCES):
    """GV-matched centres at (pump, T) and the period that phase matches them.

    The returned point has zero mismatch by construction and reports the
    (generally nonzero) GVD residual. Below the design pump two GV-matched
    signals exist; ``branch`` ("short" or "long" signal wavelength) picks
    one, otherwise :class:`MultipleRoots` is raised. ``signal_nm`` skips the
    GV solve and uses the given signal centre.
    """
    wg = waveguide or default_waveguide()
    wp = wavelength_to_omega(pump_nm)
    if signal_nm is not None:
        ws = wavelength_to_omega(signal_nm)
    else:
        roots = gv_matched_signals(model, pump_nm, temperature_c, wg, signal_range_nm, tolerances)
        if len(roots) > 1:
            if branch is None:
                nm = [omega_to_wavelength(r[0]) for r in roots]
                raise MultipleRoots(f"{len(roots)} GV-matched signals at {nm} nm; choose a branch", brackets=nm)
            roots = [roots[0] if branch == "short" else roots[-1]]
        ws = roots[0][0]
    period = matched_period(ProcessConfig(model, wg, wp, ws, temperature_c))
    return _make_point(model, wg.with_period(period), wp, ws, temperature_c, tolerances)
