"""Generalized Born-Infeld soliton surfaces from Barbashov-Chernikov data.

A surface is fixed by two generating functions F(r), G(s) and an anchor::

    x - y = F(r) - int s^2 G'(s) ds
    x + y = G(s) - int r^2 F'(r) dr
    z     = int r F'(r) dr + int s G'(s) ds

The indefinite integrals run from the base point ``(r0, s0)`` and the
constants are chosen so that ``X(r0, s0) == base_value`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

import numpy as np

from . import expr as ex
from .errors import (
    DegenerateFirstForm, DomainError, GraphInversionFailure, NonRegularPoint,
    NormalThirdComponentZero, NotUnitNormal, ProjectionSingular,
)
from .geometry import B3, cross, inner
from .quadrature import DEFAULT_QUAD, QuadPolicy, antiderivative, cumulative_antiderivative

__all__ = [
    "GeneratingFunction", "ExprFunction", "BCSurface", "ParamPoint", "FrameReport",
    "antiderivative", "eval_surface", "eval_points", "eval_grid", "tangents",
    "n_tilde", "unit_normal", "normal_from_tangents", "normal_to_param", "is_regular",
    "mean_curvature_fd", "wave_residual", "stereographic", "verify_bi_pde",
    "BIPDEReport", "REGULARITY_TOL",
]

REGULARITY_TOL = 1e-8


class GeneratingFunction(Protocol):
    """What the representation needs from F (or G)."""

    def value(self, x): ...

    def deriv(self, x): ...

    def moment(self, k: int):
        """Vectorised integrand ``x -> x**k * F'(x)``."""
        ...


@dataclass(frozen=True)
class ExprFunction:
    """Generating function given in closed form."""

    expr: ex.Expr
    dexpr: ex.Expr | None = None

    def __post_init__(self):
        d = ex.differentiate(self.expr)
        if self.dexpr is None:
            object.__setattr__(self, "dexpr", d)
        else:
            probe = np.linspace(-0.7, 0.7, 7)
            try:
                ok = np.allclose(ex.evaluate(d, probe), ex.evaluate(self.dexpr, probe),
                                 rtol=1e-10, atol=1e-12)
            except DomainError:
                ok = True
            if not ok:
                raise ValueError("supplied derivative does not match differentiate(expr)")
        object.__setattr__(self, "_moments", {})

    @classmethod
    def parse(cls, src: str, var: str) -> ExprFunction:
        return cls(ex.parse(src, var))

    @property
    def var(self) -> str:
        for n in self.expr.walk():
            if isinstance(n, ex.Var):
                return n.name
        return "x"

    def value(self, x):
        return ex.evaluate(self.expr, x)

    def deriv(self, x):
        return ex.evaluate(self.dexpr, x)

    def deriv2(self, x):
        return ex.evaluate(self.dexpr.derivative, x)

    def moment(self, k: int):
        cache = self._moments
        if k not in cache:
            integrand = ex.mul(ex.power(ex.Var(self.var), ex.num(k)), self.dexpr)
            cache[k] = integrand
        integrand = cache[k]
        return lambda x: ex.evaluate(integrand, x)

    def __str__(self):
        return str(self.expr)


class ParamPoint(NamedTuple):
    r: float
    s: float

    @property
    def alpha(self) -> float:
        return (self.r + self.s) / 2

    @property
    def beta(self) -> float:
        return (self.r - self.s) / 2

    @classmethod
    def from_conformal(cls, alpha: float, beta: float) -> ParamPoint:
        return cls(alpha + beta, alpha - beta)


@dataclass(frozen=True)
class BCSurface:
    F: GeneratingFunction
    G: GeneratingFunction
    base: tuple[float, float] = (0.0, 0.0)
    base_value: tuple[float, float, float] = (0.0, 0.0, 0.0)
    quad: QuadPolicy = DEFAULT_QUAD

    def __post_init__(self):
        object.__setattr__(self, "base", (float(self.base[0]), float(self.base[1])))
        bv = np.asarray(self.base_value, dtype=float)
        if bv.shape != (3,) or not np.all(np.isfinite(bv)):
            raise ValueError("base_value must be a finite 3-vector")
        object.__setattr__(self, "base_value", tuple(float(v) for v in bv))

    @classmethod
    def from_strings(cls, F: str, G: str, **kw) -> BCSurface:
        return cls(ExprFunction.parse(F, "r"), ExprFunction.parse(G, "s"), **kw)

    def with_anchor(self, base, base_value) -> BCSurface:
        return BCSurface(self.F, self.G, base, base_value, self.quad)

    def __call__(self, r, s):
        if np.ndim(r) == 0 and np.ndim(s) == 0:
            return eval_surface(self, (r, s))
        return eval_points(self, r, s)


@dataclass
class FrameReport:
    Xr: np.ndarray
    Xs: np.ndarray
    Xalpha: np.ndarray
    Xbeta: np.ndarray
    Eaa: float
    Ebb: float
    Eab: float
    regular: bool


def _pt(p) -> ParamPoint:
    return p if isinstance(p, ParamPoint) else ParamPoint(float(p[0]), float(p[1]))


# --------------------------------------------------------------------------
# evaluation

def _r_part(surf, r):
    """(F(r) - F(r0), int r0..r rho^2 F', int r0..r rho F') at a single r."""
    r0 = surf.base[0]
    if r == r0:
        return 0.0, 0.0, 0.0
    F = surf.F
    return (F.value(r) - F.value(r0),
            antiderivative(F.moment(2), r0, r, surf.quad),
            antiderivative(F.moment(1), r0, r, surf.quad))


def _s_part(surf, s):
    s0 = surf.base[1]
    if s == s0:
        return 0.0, 0.0, 0.0
    G = surf.G
    return (G.value(s) - G.value(s0),
            antiderivative(G.moment(2), s0, s, surf.quad),
            antiderivative(G.moment(1), s0, s, surf.quad))


def _combine(surf, rpart, spart):
    dF, Ar, Br = rpart
    dG, As, Bs = spart
    dxmy = dF - As
    dxpy = dG - Ar
    x0, y0, z0 = surf.base_value
    return np.stack(np.broadcast_arrays(
        x0 + 0.5 * (dxmy + dxpy),
        y0 + 0.5 * (dxpy - dxmy),
        z0 + (Br + Bs),
    ), axis=-1)


def eval_surface(surf: BCSurface, p) -> np.ndarray:
    """Surface point X(r, s)."""
    r, s = _pt(p)
    return _combine(surf, _r_part(surf, r), _s_part(surf, s))


def _chained_parts(fn: GeneratingFunction, x0, xs, quad):
    xs = np.asarray(xs, dtype=float)
    return (fn.value(xs) - fn.value(x0),
            cumulative_antiderivative(fn.moment(2), x0, xs, quad),
            cumulative_antiderivative(fn.moment(1), x0, xs, quad))


def eval_points(surf: BCSurface, r, s) -> np.ndarray:
    """X at paired arrays ``r``, ``s`` (broadcast); shape ``(..., 3)``.

    Antiderivatives are chained over the sorted distinct values, so the
    cost is linear in the number of distinct r and s values.
    """
    r, s = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(s, dtype=float))
    rp = _chained_parts(surf.F, surf.base[0], r, surf.quad)
    sp = _chained_parts(surf.G, surf.base[1], s, surf.quad)
    return _combine(surf, rp, sp)


def eval_grid(surf: BCSurface, rs, ss) -> np.ndarray:
    """X on the tensor grid ``rs x ss``; shape ``(len(rs), len(ss), 3)``."""
    rs = np.asarray(rs, dtype=float)
    ss = np.asarray(ss, dtype=float)
    rp = _chained_parts(surf.F, surf.base[0], rs, surf.quad)
    sp = _chained_parts(surf.G, surf.base[1], ss, surf.quad)
    rp = tuple(a[:, None] for a in rp)
    sp = tuple(a[None, :] for a in sp)
    return _combine(surf, rp, sp)


# --------------------------------------------------------------------------
# first-order geometry

def tangents(surf: BCSurface, p) -> FrameReport:
    r, s = _pt(p)
    fp = surf.F.deriv(r)
    gp = surf.G.deriv(s)
    Xr = np.array([(1 - r * r) * fp / 2, -(1 + r * r) * fp / 2, r * fp])
    Xs = np.array([(1 - s * s) * gp / 2, (1 + s * s) * gp / 2, s * gp])
    Xa = Xr + Xs
    Xb = Xr - Xs
    return FrameReport(
        Xr=Xr, Xs=Xs, Xalpha=Xa, Xbeta=Xb,
        Eaa=inner(Xa, Xa, B3), Ebb=inner(Xb, Xb, B3), Eab=inner(Xa, Xb, B3),
        regular=_regular(fp, gp, r, s, REGULARITY_TOL),
    )


def _regular(fp, gp, r, s, tol):
    return bool(abs(fp) > tol and abs(gp) > tol and abs(1 - r * r * s * s) > tol)


def is_regular(surf: BCSurface, p, tol: float = REGULARITY_TOL) -> bool:
    """True iff |F'(r)|, |G'(s)| and |1 - r^2 s^2| all exceed ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    r, s = _pt(p)
    try:
        fp = surf.F.deriv(r)
        gp = surf.G.deriv(s)
    except DomainError:
        return False
    return _regular(fp, gp, r, s, tol)


def n_tilde(r, s) -> np.ndarray:
    """((r+s), (r-s), (rs-1)) / (1+rs): the normal up to sign, free of F and G."""
    d = 1.0 + r * s
    if d == 0:
        raise NonRegularPoint(f"1 + rs = 0 at (r, s) = ({r}, {s})")
    return np.array([(r + s) / d, (r - s) / d, (r * s - 1) / d])


def unit_normal(surf: BCSurface, p, tol: float = REGULARITY_TOL) -> np.ndarray:
    """Oriented unit normal -sgn(F'(r) G'(s)) * n_tilde(r, s)."""
    r, s = _pt(p)
    if not is_regular(surf, (r, s), tol):
        raise NonRegularPoint(f"non-regular parameter point (r, s) = ({r}, {s})")
    sign = -math.copysign(1.0, surf.F.deriv(r) * surf.G.deriv(s))
    return sign * n_tilde(r, s)


def normal_from_tangents(Xr, Xs) -> np.ndarray:
    """X_r x X_s normalised in B3 (independent of the closed-form normal)."""
    m = cross(Xr, Xs, B3)
    q = inner(m, m, B3)
    if q == 0:
        raise NonRegularPoint("tangent cross product is null")
    return m / math.sqrt(abs(q))


def normal_to_param(N, tol: float = 1e-9) -> ParamPoint:
    """Invert the normal map: the parameter point whose normal is ``N``."""
    n = np.asarray(N, dtype=float)
    if abs(inner(n, n, B3) - 1) >= tol:
        raise NotUnitNormal(f"<N, N> = {inner(n, n, B3):.17g}, expected 1")
    if abs(n[2]) <= tol:
        raise NormalThirdComponentZero(f"third component {n[2]:.17g} of the normal vanishes")
    if n[2] > 0:
        n = -n
    n1, n2, n3 = n
    r = (n1 + n2) / (1 - n3)
    s = (n1 - n2) / (1 - n3)
    # (n1+n2)(n1-n2) = (1+n3)(1-n3) on the unit quadric
    for num_, alt_den, val in ((1 + n3, n1 - n2, r), (1 + n3, n1 + n2, s)):
        if abs(alt_den) > 1e-6:
            alt = num_ / alt_den
            if abs(alt - val) > 1e-6 * (1 + abs(val)):
                raise NotUnitNormal("alternative inversion formula disagrees; N is not on the unit quadric")
    return ParamPoint(float(r), float(s))


def stereographic(alpha: float, beta: float, tol: float = 1e-12) -> np.ndarray:
    """Point of {x^2 - y^2 + z^2 = 1} on the line through (alpha, beta, 0) and (0, 0, 1)."""
    d = 1 + alpha * alpha - beta * beta
    if abs(d) <= tol:
        raise ProjectionSingular(f"1 + alpha^2 - beta^2 = {d:.17g}")
    return np.array([2 * alpha / d, 2 * beta / d, (alpha * alpha - beta * beta - 1) / d])


# --------------------------------------------------------------------------
# finite-difference diagnostics

_D1 = {2: np.array([-0.5, 0.0, 0.5]),
       4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12}
_D2 = {2: np.array([1.0, -2.0, 1.0]),
       4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12}


def mean_curvature_fd(surf: BCSurface, p, h: float = 1e-3, tol: float = REGULARITY_TOL,
                      order: int = 4) -> float:
    """Mean curvature in B3 from central differences of the surface with step ``h``.

    ``order`` selects the 3-point (2) or 5-point (4) central formulas; the
    stencil is the tensor grid of offsets ``k*h`` in r and s.  Near
    1 + rs -> 0 the denominator EG - F^2 shrinks like (1 + rs)^4, so the
    second-order stencil's truncation error dominates there.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if order not in _D1:
        raise ValueError("order must be 2 or 4")
    r, s = _pt(p)
    half = order // 2
    offs = np.arange(-half, half + 1) * h
    for dr in offs:
        for ds in offs:
            if not is_regular(surf, (r + dr, s + ds), tol):
                raise NonRegularPoint(f"non-regular point near (r, s) = ({r}, {s})")
    X = eval_grid(surf, r + offs, s + offs)
    c = half
    d1, d2 = _D1[order], _D2[order]
    Xr = np.einsum("i,ik->k", d1, X[:, c]) / h
    Xs = np.einsum("j,jk->k", d1, X[c, :]) / h
    Xrr = np.einsum("i,ik->k", d2, X[:, c]) / h ** 2
    Xss = np.einsum("j,jk->k", d2, X[c, :]) / h ** 2
    Xrs = np.einsum("i,j,ijk->k", d1, d1, X) / h ** 2
    E = inner(Xr, Xr, B3)
    F = inner(Xr, Xs, B3)
    G = inner(Xs, Xs, B3)
    det = E * G - F * F
    if abs(det) < 1e-12:
        raise DegenerateFirstForm(f"EG - F^2 = {det:.17g} at (r, s) = ({r}, {s})")
    N = normal_from_tangents(Xr, Xs)
    L = inner(Xrr, N, B3)
    M = inner(Xrs, N, B3)
    Nn = inner(Xss, N, B3)
    return float((L * G - 2 * M * F + Nn * E) / (2 * det))


def wave_residual(surf: BCSurface, p, h: float = 1e-3) -> np.ndarray:
    """X_aa - X_bb by central differences in the conformal parameters."""
    if h <= 0:
        raise ValueError("h must be positive")
    pp = _pt(p)
    a, b = pp.alpha, pp.beta
    ab = [(a, b), (a + h, b), (a - h, b), (a, b + h), (a, b - h)]
    rs = np.array([a_ + b_ for a_, b_ in ab])
    ss = np.array([a_ - b_ for a_, b_ in ab])
    X = eval_points(surf, rs, ss)
    Xaa = (X[1] - 2 * X[0] + X[2]) / h ** 2
    Xbb = (X[3] - 2 * X[0] + X[4]) / h ** 2
    return Xaa - Xbb


# --------------------------------------------------------------------------
# graph recovery and the Born-Infeld equation

@dataclass
class BIPDEPoint:
    r: float
    s: float
    in_domain: bool
    regular: bool
    x: float = math.nan
    y: float = math.nan
    phi: float = math.nan
    phi_x: float = math.nan
    phi_y: float = math.nan
    phi_xx: float = math.nan
    phi_xy: float = math.nan
    phi_yy: float = math.nan
    residual: float = math.nan
    hyperbolicity: float = math.nan
    u: float = math.nan
    v: float = math.nan
    r_from_uv: float = math.nan
    s_from_uv: float = math.nan


@dataclass
class BIPDEReport:
    points: list[BIPDEPoint] = field(default_factory=list)

    @property
    def checked(self) -> list[BIPDEPoint]:
        return [p for p in self.points if p.in_domain and p.regular]

    @property
    def max_residual(self) -> float:
        return max((abs(p.residual) for p in self.checked), default=math.nan)

    @property
    def min_hyperbolicity(self) -> float:
        return min((p.hyperbolicity for p in self.checked), default=math.nan)

    @property
    def max_uv_error(self) -> float:
        return max((max(abs(p.r_from_uv - p.r), abs(p.s_from_uv - p.s)) for p in self.checked),
                   default=math.nan)

    @property
    def excluded(self) -> list[BIPDEPoint]:
        return [p for p in self.points if not (p.in_domain and p.regular)]


def _xy_jacobian(surf, r, s):
    fp = surf.F.deriv(r)
    gp = surf.G.deriv(s)
    return np.array([[(1 - r * r) * fp / 2, (1 - s * s) * gp / 2],
                     [-(1 + r * r) * fp / 2, (1 + s * s) * gp / 2]])


def _invert_xy(surf, target, seed, max_iter=50):
    """Newton solve of (x(r,s), y(r,s)) = target starting at ``seed``."""
    rs = np.array(seed, dtype=float)
    scale = 1.0 + np.max(np.abs(target))
    for _ in range(max_iter):
        X = eval_surface(surf, rs)
        res = X[:2] - target
        if np.max(np.abs(res)) <= 4e-16 * scale:
            return rs, X
        J = _xy_jacobian(surf, *rs)
        if abs(np.linalg.det(J)) < 1e-14:
            break
        step = np.linalg.solve(J, res)
        rs = rs - step
        if np.max(np.abs(step)) <= 1e-16 * (1 + np.max(np.abs(rs))):
            return rs, eval_surface(surf, rs)
    raise GraphInversionFailure(f"Newton did not converge for target (x, y) = {tuple(target)}")


def uv_to_rs(u: float, v: float) -> tuple[float, float]:
    """(r, s) = ((sqrt(1+4uv) - 1)/(2v), (sqrt(1+4uv) - 1)/(2u)), rationalised."""
    D = math.sqrt(1 + 4 * u * v)
    return 2 * u / (1 + D), 2 * v / (1 + D)


def verify_bi_pde(surf: BCSurface, grid, h: float = 1e-3, tol: float = REGULARITY_TOL) -> BIPDEReport:
    """Recover z as a graph phi(x, y) near each grid point and test the BI equation.

    For every grid point with |rs| < 1 and regular parameters, phi is
    sampled on a 3x3 stencil of step ``h`` around (x, y) by Newton inversion
    of (r, s) -> (x, y) seeded at the grid point.  The report carries the
    residual of (1 - phi_y^2) phi_xx + 2 phi_x phi_y phi_xy - (1 + phi_x^2) phi_yy,
    the hyperbolicity phi_x^2 - phi_y^2 + 1, and u = (phi_x - phi_y)/2,
    v = (phi_x + phi_y)/2 with the (r, s) they imply.  u and v use the exact
    gradient from the chain rule; the equation uses the stencil.
    """
    report = BIPDEReport()
    for p in grid:
        r, s = _pt(p)
        rec = BIPDEPoint(r=r, s=s, in_domain=abs(r * s) < 1, regular=is_regular(surf, (r, s), tol))
        report.points.append(rec)
        if not (rec.in_domain and rec.regular):
            continue
        X0 = eval_surface(surf, (r, s))
        J = _xy_jacobian(surf, r, s)
        Jinv = np.linalg.inv(J)
        phi = np.empty((3, 3))
        for i, dx in enumerate((-h, 0.0, h)):
            for j, dy in enumerate((-h, 0.0, h)):
                if dx == 0 and dy == 0:
                    phi[i, j] = X0[2]
                    continue
                target = X0[:2] + np.array([dx, dy])
                seed = np.array([r, s]) + Jinv @ np.array([dx, dy])
                _, X = _invert_xy(surf, target, seed)
                phi[i, j] = X[2]
        px = (phi[2, 1] - phi[0, 1]) / (2 * h)
        py = (phi[1, 2] - phi[1, 0]) / (2 * h)
        pxx = (phi[2, 1] - 2 * phi[1, 1] + phi[0, 1]) / h ** 2
        pyy = (phi[1, 2] - 2 * phi[1, 1] + phi[1, 0]) / h ** 2
        pxy = (phi[2, 2] - phi[2, 0] - phi[0, 2] + phi[0, 0]) / (4 * h * h)
        # exact gradient: [phi_x, phi_y] J = [z_r, z_s]
        zr = r * surf.F.deriv(r)
        zs = s * surf.G.deriv(s)
        gx, gy = np.linalg.solve(J.T, np.array([zr, zs]))
        u = (gx - gy) / 2
        v = (gx + gy) / 2
        rr, ss = uv_to_rs(u, v)
        rec.x, rec.y, rec.phi = float(X0[0]), float(X0[1]), float(X0[2])
        rec.phi_x, rec.phi_y = float(px), float(py)
        rec.phi_xx, rec.phi_xy, rec.phi_yy = float(pxx), float(pxy), float(pyy)
        rec.residual = float((1 - py ** 2) * pxx + 2 * px * py * pxy - (1 + px ** 2) * pyy)
        rec.hyperbolicity = float(px ** 2 - py ** 2 + 1)
        rec.u, rec.v = float(u), float(v)
        rec.r_from_uv, rec.s_from_uv = float(rr), float(ss)
    return report
