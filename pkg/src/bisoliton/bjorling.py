"""Bjorling problem through the Barbashov-Chernikov representation.

Given a strip (curve c(t) with unit normal n(t)), the parameter curve is
read off the normal, (r, s) = ((n1+n2)/(1-n3), (n1-n2)/(1-n3)) with n3 < 0,
and differentiating X(r(t), s(t)) = c(t) gives

    F'(r) r' (1 - r^2 s^2) = s^2 (c1' + c2') + (c1' - c2')
    G'(s) s' (1 - r^2 s^2) = (c1' + c2') + r^2 (c1' - c2')

with c3' = r F' r' + s G' s' as a consistency condition (it is equivalent
to n being orthogonal to c').  F', G' are tabulated against r and s and
interpolated with cubic splines.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from . import expr as ex
from .errors import (
    AmplitudeUnachievable, ConsistencyFailure, DomainViolation, IntervalOverlapsData,
    NonMonotoneParamCurve, NormalThirdComponentZero, NotUnitNormal,
)
from .geometry import B3, inner
from .surface import (
    BCSurface, eval_points, normal_from_tangents, tangents, unit_normal,
)

__all__ = [
    "BjorlingStrip", "StripReport", "ParamCurve", "ReconstructedFG", "TabulatedFunction",
    "Extension", "Bump", "BumpPerturbed", "Omega", "BjorlingSolution", "SolutionResidual",
    "validate_strip", "param_curve", "reconstruct_fg", "extend_fg", "solve_bjorling",
    "verify_solution", "perturb_nonunique", "diagonal_strip", "compare_surfaces",
    "STRIP_TOL", "CONSISTENCY_TOL",
]

STRIP_TOL = 1e-8
CONSISTENCY_TOL = 1e-6


# --------------------------------------------------------------------------
# strips

@dataclass
class BjorlingStrip:
    """Samples (t, c(t), c'(t), n(t)); arrays of shape (m,) and (m, 3)."""

    t: np.ndarray
    c: np.ndarray
    cdot: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.c = np.asarray(self.c, dtype=float).reshape(-1, 3)
        self.cdot = np.asarray(self.cdot, dtype=float).reshape(-1, 3)
        self.n = np.asarray(self.n, dtype=float).reshape(-1, 3)
        m = len(self.t)
        if not (len(self.c) == len(self.cdot) == len(self.n) == m):
            raise ValueError("strip arrays must have the same number of samples")
        for name in ("t", "c", "cdot", "n"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"strip field {name!r} has non-finite entries")

    @property
    def t_interval(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def __len__(self):
        return len(self.t)

    @classmethod
    def from_samples(cls, t, c, n, cdot=None) -> BjorlingStrip:
        """Tabulated strip; missing derivatives come from a not-a-knot cubic spline of c."""
        t = np.asarray(t, dtype=float)
        c = np.asarray(c, dtype=float)
        if cdot is None:
            if len(t) < 3:
                raise ValueError("at least 3 samples are needed to differentiate the curve")
            if np.any(np.diff(t) <= 0):
                raise ValueError("strip parameter t must be strictly increasing")
            cdot = CubicSpline(t, c, axis=0)(t, 1)
        return cls(t, c, cdot, n)

    @classmethod
    def from_exprs(cls, c, n, var: str, interval, samples: int = 201) -> BjorlingStrip:
        """Closed-form strip from three curve and three normal expressions."""
        c_ex = [ex.parse(e, var) if isinstance(e, str) else e for e in c]
        n_ex = [ex.parse(e, var) if isinstance(e, str) else e for e in n]
        t = np.linspace(interval[0], interval[1], samples)
        cv = np.stack([ex.evaluate(e, t) for e in c_ex], axis=-1)
        dv = np.stack([ex.evaluate(ex.differentiate(e), t) for e in c_ex], axis=-1)
        nv = np.stack([ex.evaluate(e, t) for e in n_ex], axis=-1)
        return cls(t, cv, dv, nv)

    def negated_normal(self) -> BjorlingStrip:
        return BjorlingStrip(self.t.copy(), self.c.copy(), self.cdot.copy(), -self.n)


def diagonal_strip(surf: BCSurface, a: float, b: float, samples: int = 201) -> BjorlingStrip:
    """Strip along r = s = t of a known surface (forward generation)."""
    t = np.linspace(a, b, samples)
    c = eval_points(surf, t, t)
    cdot = np.array([tangents(surf, (ti, ti)).Xalpha for ti in t])
    n = np.array([unit_normal(surf, (ti, ti)) for ti in t])
    return BjorlingStrip(t, c, cdot, n)


@dataclass
class StripCheck:
    name: str
    passed: bool
    worst: float
    worst_t: float


@dataclass
class StripReport:
    checks: list[StripCheck]
    strip: BjorlingStrip  # orientation-normalised (n3 < 0)
    flipped: bool

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name) -> StripCheck:
        return next(c for c in self.checks if c.name == name)


def validate_strip(strip: BjorlingStrip, tol: float = STRIP_TOL) -> StripReport:
    """Report each strip invariant and return the strip with n3 < 0."""
    if len(strip) < 2:
        raise ValueError("a strip needs at least 2 samples")
    t = strip.t
    checks = []

    def add(name, values, bad):
        i = int(np.argmax(values)) if len(values) else 0
        checks.append(StripCheck(name, not bad, float(values[i]), float(t[min(i, len(t) - 1)])))

    dt = np.diff(t)
    add("t_increasing", -dt, bool(np.any(dt <= 0)))
    unit = np.abs(inner(strip.n, strip.n, B3) - 1)
    add("unit_normal", unit, bool(np.any(unit >= tol)))
    orth = np.abs(inner(strip.n, strip.cdot, B3))
    add("orthogonal", orth, bool(np.any(orth >= tol)))
    n3 = strip.n[:, 2]
    small = -np.abs(n3)  # worst = the smallest |n3|
    add("n3_nonzero", small, bool(np.any(np.abs(n3) <= tol)))
    mixed = bool(np.any(n3 > 0) and np.any(n3 < 0))
    add("n3_constant_sign", np.where(np.sign(n3) != np.sign(n3[0]), 1.0, 0.0), mixed)

    flipped = bool(np.mean(n3) > 0)
    out = strip.negated_normal() if flipped else strip
    return StripReport(checks, out, flipped)


def _require(report: StripReport):
    for name, exc in (("n3_nonzero", NormalThirdComponentZero),
                      ("n3_constant_sign", NormalThirdComponentZero),
                      ("unit_normal", NotUnitNormal)):
        chk = report.check(name)
        if not chk.passed:
            raise exc(f"strip check {name!r} failed at t = {chk.worst_t!r}")
    if not report.check("t_increasing").passed:
        raise ValueError("strip parameter t must be strictly increasing")


# --------------------------------------------------------------------------
# parameter curve

@dataclass
class ParamCurve:
    t: np.ndarray
    r: np.ndarray
    s: np.ndarray
    dr: np.ndarray
    ds: np.ndarray
    flags: np.ndarray  # True where r' or s' (numerically) vanishes


def param_curve(strip: BjorlingStrip, tol: float = STRIP_TOL) -> ParamCurve:
    """(r(t), s(t)) from the normal field, with spline derivatives."""
    n = strip.n
    if np.mean(n[:, 2]) > 0:
        n = -n
    if np.any(np.abs(n[:, 2]) <= tol) or np.any(n[:, 2] > 0):
        i = int(np.argmax(n[:, 2]))
        raise NormalThirdComponentZero(f"n3 vanishes or changes sign near t = {strip.t[i]:.17g}")
    den = 1 - n[:, 2]
    r = (n[:, 0] + n[:, 1]) / den
    s = (n[:, 0] - n[:, 1]) / den
    if len(strip) >= 3:
        dr = CubicSpline(strip.t, r)(strip.t, 1)
        ds = CubicSpline(strip.t, s)(strip.t, 1)
    else:
        dr = np.gradient(r, strip.t)
        ds = np.gradient(s, strip.t)
    scale_r = max(1.0, float(np.ptp(r)) / max(float(np.ptp(strip.t)), 1e-300))
    scale_s = max(1.0, float(np.ptp(s)) / max(float(np.ptp(strip.t)), 1e-300))
    flags = (np.abs(dr) <= tol * scale_r) | (np.abs(ds) <= tol * scale_s)
    return ParamCurve(strip.t.copy(), r, s, dr, ds, flags)


# --------------------------------------------------------------------------
# tabulated generating functions

@dataclass(frozen=True)
class Extension:
    """How F' continues outside the tabulated interval.

    ``constant`` holds the endpoint value.  ``taper`` leaves the endpoint
    with the endpoint slope and returns to the endpoint value over ``width``
    (a quadratic blend that is C^1 at the endpoint); its bulge is limited to
    half the endpoint magnitude so no sign change is introduced.
    """

    kind: str = "constant"
    width: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "taper"):
            raise ValueError(f"unknown extension policy {self.kind!r}")
        if self.kind == "taper" and not self.width > 0:
            raise ValueError("taper width must be positive")


CONSTANT = Extension()


class TabulatedFunction:
    """F from a cubic spline of F' on [lo, hi], extended outside, with F(anchor) = 0."""

    def __init__(self, x, dvals, anchor: float, extension: Extension = CONSTANT):
        x = np.asarray(x, dtype=float)
        dvals = np.asarray(dvals, dtype=float)
        order = np.argsort(x)
        x, dvals = x[order], dvals[order]
        if np.any(np.diff(x) <= 0):
            raise NonMonotoneParamCurve("tabulation abscissae are not strictly monotone")
        self.x = x
        self.dvals = dvals
        self.lo, self.hi = float(x[0]), float(x[-1])
        self.extension = extension
        self.spline = CubicSpline(x, dvals) if len(x) >= 3 else CubicSpline(x, dvals, bc_type="natural")
        self._prim = self.spline.antiderivative()
        # per-side extension data: (endpoint, F'(end), F''(end), effective width, direction)
        self._ends = {}
        for side, end, sgn in (("hi", self.hi, 1.0), ("lo", self.lo, -1.0)):
            d0 = float(self.spline(end))
            d1 = float(self.spline(end, 1)) * sgn  # slope moving outward
            w = extension.width
            if extension.kind == "taper" and d1 != 0:
                # max bulge |d1| w / 4 <= |d0| / 2
                w = min(w, 2 * abs(d0) / abs(d1)) if d0 != 0 else 0.0
            self._ends[side] = (end, d0, d1, w if extension.kind == "taper" else 0.0)
        self.anchor = float(anchor)
        self._offset = 0.0
        self._offset = -float(self.value(self.anchor))

    @property
    def interval(self) -> tuple[float, float]:
        return self.lo, self.hi

    def with_extension(self, extension: Extension) -> TabulatedFunction:
        return TabulatedFunction(self.x, self.dvals, self.anchor, extension)

    def _ext_deriv(self, d, end):
        _, d0, d1, w = end
        if w > 0:
            dd = np.minimum(d, w)
            return d0 + d1 * dd * (1 - dd / w)
        return np.full_like(d, d0)

    def _ext_integral(self, d, end):
        _, d0, d1, w = end
        if w > 0:
            dd = np.minimum(d, w)
            return d0 * d + d1 * (dd ** 2 / 2 - dd ** 3 / (3 * w))
        return d0 * d

    def deriv(self, x):
        xa = np.asarray(x, dtype=float)
        out = self.spline(np.clip(xa, self.lo, self.hi))
        hi, lo = xa > self.hi, xa < self.lo
        if np.any(hi):
            out = np.where(hi, self._ext_deriv(np.where(hi, xa - self.hi, 0.0), self._ends["hi"]), out)
        if np.any(lo):
            out = np.where(lo, self._ext_deriv(np.where(lo, self.lo - xa, 0.0), self._ends["lo"]), out)
        return float(out) if out.ndim == 0 else out

    def value(self, x):
        xa = np.asarray(x, dtype=float)
        out = self._prim(np.clip(xa, self.lo, self.hi))
        hi, lo = xa > self.hi, xa < self.lo
        if np.any(hi):
            out = out + np.where(hi, self._ext_integral(np.where(hi, xa - self.hi, 0.0), self._ends["hi"]), 0.0)
        if np.any(lo):
            out = out - np.where(lo, self._ext_integral(np.where(lo, self.lo - xa, 0.0), self._ends["lo"]), 0.0)
        out = out + self._offset
        return float(out) if np.ndim(out) == 0 else out

    def moment(self, k: int):
        return lambda x: np.asarray(x) ** k * self.deriv(x)


@dataclass(frozen=True)
class Bump:
    """amplitude * exp(-1/(1-u^2)), u = (2x - c - d)/(d - c), supported in (c, d)."""

    c: float
    d: float
    amplitude: float

    def _u(self, x):
        return (2 * np.asarray(x, dtype=float) - self.c - self.d) / (self.d - self.c)

    def value(self, x):
        u = self._u(x)
        inside = np.abs(u) < 1
        w = np.where(inside, 1 - u * u, 1.0)
        out = np.where(inside, self.amplitude * np.exp(-1 / w), 0.0)
        return float(out) if out.ndim == 0 else out

    def deriv(self, x):
        u = self._u(x)
        inside = np.abs(u) < 1
        w = np.where(inside, 1 - u * u, 1.0)
        du = 2 / (self.d - self.c)
        out = np.where(inside, self.amplitude * np.exp(-1 / w) * (-2 * u / w ** 2) * du, 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.c + self.d)


class BumpPerturbed:
    """F + f for a generating function F and a bump f."""

    def __init__(self, base, bump: Bump):
        self.base = base
        self.bump = bump

    def value(self, x):
        return self.base.value(x) + self.bump.value(x)

    def deriv(self, x):
        return self.base.deriv(x) + self.bump.deriv(x)

    def moment(self, k: int):
        return lambda x: np.asarray(x) ** k * self.deriv(x)


@dataclass
class ReconstructedFG:
    curve: ParamCurve
    Fprime_samples: np.ndarray  # F'(r(t)) at the strip samples
    Gprime_samples: np.ndarray
    F: object  # GeneratingFunction
    G: object
    consistency: np.ndarray  # c3' - (r F' r' + s G' s') per sample
    extension: Extension = CONSTANT
    bump: Bump | None = None

    @property
    def I1(self) -> tuple[float, float]:
        return float(np.min(self.curve.r)), float(np.max(self.curve.r))

    @property
    def I2(self) -> tuple[float, float]:
        return float(np.min(self.curve.s)), float(np.max(self.curve.s))

    def F_tab(self):
        return self.F.value(self.curve.r)

    def G_tab(self):
        return self.G.value(self.curve.s)


def _strict_monotone(v):
    d = np.diff(v)
    return bool(np.all(d > 0) or np.all(d < 0))


def reconstruct_fg(strip: BjorlingStrip, consistency_tol: float = CONSISTENCY_TOL,
                   extension: Extension = CONSTANT) -> ReconstructedFG:
    """Tabulate F' against r(t) and G' against s(t) from the strip."""
    pc = param_curve(strip)
    r, s = pc.r, pc.s
    if np.any(pc.flags) or not _strict_monotone(r) or not _strict_monotone(s):
        bad = np.flatnonzero(pc.flags)
        where = f" (r' or s' vanishes at t = {pc.t[bad[0]]:.17g})" if len(bad) else ""
        raise NonMonotoneParamCurve("r(t) and s(t) must be strictly monotone" + where)
    rs = r * s
    if np.any(np.abs(rs) >= 1):
        i = int(np.argmax(np.abs(rs)))
        raise DomainViolation(f"|r s| = {abs(rs[i]):.17g} >= 1 at t = {pc.t[i]:.17g}")
    c1, c2, c3 = strip.cdot.T
    p, q = c1 + c2, c1 - c2
    den = 1 - rs * rs
    Fr = (s * s * p + q) / den  # F'(r) r'
    Gs = (p + r * r * q) / den  # G'(s) s'
    consistency = c3 - (r * Fr + s * Gs)
    scale = 1 + np.max(np.abs(strip.cdot), axis=1)
    viol = np.abs(consistency) / scale
    if np.any(viol > consistency_tol):
        i = int(np.argmax(viol))
        raise ConsistencyFailure(
            f"c3' - (r F' r' + s G' s') = {consistency[i]:.17g} at t = {pc.t[i]:.17g}"
        )
    Fp = Fr / pc.dr
    Gp = Gs / pc.ds
    F = TabulatedFunction(r, Fp, anchor=r[0], extension=extension)
    G = TabulatedFunction(s, Gp, anchor=s[0], extension=extension)
    return ReconstructedFG(pc, Fp, Gp, F, G, consistency, extension)


def extend_fg(fg: ReconstructedFG, policy: Extension = CONSTANT) -> ReconstructedFG:
    """Same data, different continuation of F' and G' beyond r(I) and s(I)."""
    if fg.bump is not None:
        raise ValueError("extend before perturbing")
    return replace(fg, F=fg.F.with_extension(policy), G=fg.G.with_extension(policy), extension=policy)


# --------------------------------------------------------------------------
# solving and verifying

@dataclass(frozen=True)
class Omega:
    """(I1 x I2) intersected with |rs| < 1."""

    r_interval: tuple[float, float]
    s_interval: tuple[float, float]

    def contains(self, r, s):
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        (r0, r1), (s0, s1) = self.r_interval, self.s_interval
        out = (r >= r0) & (r <= r1) & (s >= s0) & (s <= s1) & (np.abs(r * s) < 1)
        return bool(out) if out.ndim == 0 else out


@dataclass
class BjorlingSolution:
    surface: BCSurface
    domain: Omega
    fg: ReconstructedFG
    strip: BjorlingStrip  # orientation-normalised

    def __call__(self, r, s):
        return self.surface(r, s)


def _surface_from_fg(fg: ReconstructedFG, strip: BjorlingStrip) -> BCSurface:
    pc = fg.curve
    return BCSurface(fg.F, fg.G, base=(pc.r[0], pc.s[0]), base_value=strip.c[0])


def solve_bjorling(strip: BjorlingStrip, extension: Extension = CONSTANT,
                   consistency_tol: float = CONSISTENCY_TOL) -> BjorlingSolution:
    """Surface with X(r(a), s(a)) = c(a) built from the reconstructed F', G'."""
    report = validate_strip(strip)
    _require(report)
    fg = reconstruct_fg(report.strip, consistency_tol, extension)
    surf = _surface_from_fg(fg, report.strip)
    return BjorlingSolution(surf, Omega(fg.I1, fg.I2), fg, report.strip)


def solution_from_fg(fg: ReconstructedFG, strip: BjorlingStrip) -> BjorlingSolution:
    """Wrap (possibly perturbed) generating functions anchored at the strip's start."""
    if np.mean(strip.n[:, 2]) > 0:
        strip = strip.negated_normal()
    return BjorlingSolution(_surface_from_fg(fg, strip), Omega(fg.I1, fg.I2), fg, strip)


@dataclass
class SolutionResidual:
    curve_residual: float
    normal_residual: float
    curve_errors: np.ndarray = field(repr=False)
    normal_errors: np.ndarray = field(repr=False)

    def passes(self, tol: float) -> bool:
        return self.curve_residual < tol and self.normal_residual < tol


def verify_solution(surface, strip: BjorlingStrip) -> SolutionResidual:
    """Max-norm distance of X(r(t), s(t)) to c(t) and of the surface normal to +-n(t).

    The surface normal is taken from the tangent cross product, so it
    exercises the solution's F' and G' rather than the closed-form normal.
    """
    if isinstance(surface, BjorlingSolution):
        surface = surface.surface
    pc = param_curve(strip)
    X = eval_points(surface, pc.r, pc.s)
    cerr = np.max(np.abs(X - strip.c), axis=1)
    nerr = np.empty(len(strip))
    for i, (r, s) in enumerate(zip(pc.r, pc.s)):
        fr = tangents(surface, (r, s))
        N = normal_from_tangents(fr.Xr, fr.Xs)
        nerr[i] = min(np.max(np.abs(N - strip.n[i])), np.max(np.abs(N + strip.n[i])))
    return SolutionResidual(float(np.max(cerr)), float(np.max(nerr)), cerr, nerr)


def _max_unit_bump_slope(c, d):
    u = np.linspace(-1, 1, 20001)[1:-1]
    w = 1 - u * u
    return float(np.max(np.abs(np.exp(-1 / w) * 2 * u / w ** 2))) * 2 / (d - c)


def perturb_nonunique(fg: ReconstructedFG, J, amplitude: float, which: str = "F",
                      samples: int = 2001) -> ReconstructedFG:
    """Add a compactly supported bump f to F (or G) away from the data.

    The amplitude is reduced if needed so that max_J |f'| <= inf_J |F'| / 2.
    The bump vanishes on a neighbourhood of the data interval, so the
    perturbed surface agrees with the original there.
    """
    c, d = float(J[0]), float(J[1])
    if not d > c:
        raise ValueError("bump interval must satisfy c < d")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    if which not in ("F", "G"):
        raise ValueError("which must be 'F' or 'G'")
    lo, hi = fg.I1 if which == "F" else fg.I2
    if not (c > hi or d < lo):
        raise IntervalOverlapsData(f"bump interval ({c}, {d}) meets the data interval [{lo}, {hi}]")
    base = fg.F if which == "F" else fg.G
    xs = np.linspace(c, d, samples)
    inf_abs = float(np.min(np.abs(base.deriv(xs))))
    if inf_abs <= 0:
        raise AmplitudeUnachievable(f"{which}' vanishes on ({c}, {d})")
    amp = min(amplitude, 0.5 * inf_abs / _max_unit_bump_slope(c, d))
    bump = Bump(c, d, amp)
    pert = BumpPerturbed(base, bump)
    if which == "F":
        return replace(fg, F=pert, bump=bump)
    return replace(fg, G=pert, bump=bump)


@dataclass
class SurfaceComparison:
    square_max_diff: float
    line_max_diff: float
    line_r: float


def compare_surfaces(X1: BCSurface, X2: BCSurface, square, line_r: float,
                     s_interval, n: int = 41) -> SurfaceComparison:
    """Max difference on square[0] x square[1] and along r = line_r, s in s_interval."""
    (a0, a1), (b0, b1) = square
    rs = np.linspace(a0, a1, n)
    ss = np.linspace(b0, b1, n)
    R, S = np.meshgrid(rs, ss, indexing="ij")
    sq = float(np.max(np.abs(eval_points(X1, R, S) - eval_points(X2, R, S))))
    sl = np.linspace(s_interval[0], s_interval[1], n)
    rl = np.full_like(sl, line_r)
    ln = float(np.max(np.abs(eval_points(X1, rl, sl) - eval_points(X2, rl, sl))))
    return SurfaceComparison(sq, ln, line_r)

