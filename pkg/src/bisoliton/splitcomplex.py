"""Split-complex numbers and the timelike minimal surface Bjorling formula.

For z = a + k'b with k'^2 = 1 the null coordinates a + b and a - b turn
split-holomorphic extension into two real evaluations::

    f(a + k'b) = (f(a+b) + f(a-b))/2 + k' (f(a+b) - f(a-b))/2

The timelike minimal surface through a curve c with unit normal n in L3 is

    X(t, s) = Re( c(w) + k' int_{t0}^{w} n x c' )

with w = t + k's for timelike c and w = s + k't for spacelike c, so in null
coordinates X = (c(p) + c(m))/2 + (Phi(p) - Phi(m))/2 with p, m = a +- b and
Phi the real antiderivative of n x c'.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import MixedCausalCharacter, NotOrthogonal, NotUnitNormal
from .geometry import L3, b3_to_l3, cross, inner, l3_to_b3
from .quadrature import DEFAULT_QUAD, QuadPolicy, cumulative_antiderivative

__all__ = [
    "SplitComplex", "K", "sc_add", "sc_mul", "sc_conj", "sc_extend",
    "TMSSolution", "solve_bjorling_tms", "bridge_bi_to_tms", "bridge_tms_to_bi",
    "JacobianReport", "gale_nikaido_check",
]


@dataclass(frozen=True)
class SplitComplex:
    a: float
    b: float = 0.0

    def __add__(self, other):
        other = _sc(other)
        return SplitComplex(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return SplitComplex(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-_sc(other))

    def __rsub__(self, other):
        return _sc(other) - self

    def __mul__(self, other):
        o = _sc(other)
        return SplitComplex(self.a * o.a + self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conj(self):
        return SplitComplex(self.a, -self.b)

    def modulus2(self) -> float:
        """z * conj(z) = a^2 - b^2 (may be zero or negative)."""
        return self.a * self.a - self.b * self.b

    @property
    def real(self):
        return self.a

    @property
    def imag(self):
        return self.b

    @property
    def null_coords(self):
        return self.a + self.b, self.a - self.b


K = SplitComplex(0.0, 1.0)


def _sc(x) -> SplitComplex:
    return x if isinstance(x, SplitComplex) else SplitComplex(float(x), 0.0)


def sc_add(z, w) -> SplitComplex:
    return _sc(z) + _sc(w)


def sc_mul(z, w) -> SplitComplex:
    return _sc(z) * _sc(w)


def sc_conj(z) -> SplitComplex:
    return _sc(z).conj()


def sc_extend(f, z) -> SplitComplex:
    """Split-holomorphic extension of a real function ``f`` evaluated at ``z``."""
    z = _sc(z)
    fn = f if callable(f) else ex.parse(f)
    p, m = z.null_coords
    fp, fm = fn(p), fn(m)
    return SplitComplex(0.5 * (fp + fm), 0.5 * (fp - fm))


# --------------------------------------------------------------------------
# Bjorling formula

def _parse3(items, var):
    return tuple(e if isinstance(e, ex.Expr) else ex.parse(str(e), var) for e in items)


def _eval3(exprs, x):
    return np.stack([np.broadcast_to(ex.evaluate(e, x), np.shape(x)) for e in exprs], axis=-1)


def _l3_cross_exprs(u, v):
    """Components of u x_L3 v as expressions (Euclidean cross, third negated)."""
    e1 = ex.sub(ex.mul(u[1], v[2]), ex.mul(u[2], v[1]))
    e2 = ex.sub(ex.mul(u[2], v[0]), ex.mul(u[0], v[2]))
    e3 = ex.sub(ex.mul(u[0], v[1]), ex.mul(u[1], v[0]))
    return e1, e2, ex.neg(e3)


@dataclass
class TMSSolution:
    """Timelike minimal surface X(t, s) solving the Bjorling problem in L3."""

    curve: tuple
    normal: tuple
    dcurve: tuple
    integrand: tuple
    t0: float
    branch: str  # "timelike" (w = z) or "spacelike" (w = k'z)
    interval: tuple[float, float]
    quad: QuadPolicy = field(default=DEFAULT_QUAD, repr=False)

    def _null(self, t, s):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        a, b = (t, s) if self.branch == "timelike" else (s, t)
        return a + b, a - b

    def __call__(self, t, s):
        p, m = self._null(t, s)
        cp, cm = _eval3(self.curve, p), _eval3(self.curve, m)
        phi_p = self.antiderivative(p)
        phi_m = self.antiderivative(m)
        return 0.5 * (cp + cm) + 0.5 * (phi_p - phi_m)

    def antiderivative(self, x) -> np.ndarray:
        """int_{t0}^{x} n x c' per component, chained over the distinct arguments."""
        x = np.asarray(x, dtype=float)
        comps = [cumulative_antiderivative(lambda u, e=e: ex.evaluate(e, u), self.t0, x, self.quad)
                 for e in self.integrand]
        return np.stack(comps, axis=-1)

    def curve_param(self, tau):
        """Parameter point (t, s) where the data curve sits at curve parameter ``tau``."""
        tau = np.asarray(tau, dtype=float)
        zero = np.zeros_like(tau)
        return (tau, zero) if self.branch == "timelike" else (zero, tau)

    def curve_residual(self, samples: int = 201) -> float:
        tau = np.linspace(*self.interval, samples)
        X = self(*self.curve_param(tau))
        return float(np.max(np.abs(X - _eval3(self.curve, tau))))

    def normal_residual(self, samples: int = 201, h: float = 1e-4) -> float:
        """Max over the curve of min(|N - n|, |N + n|) with N from central differences."""
        tau = np.linspace(*self.interval, samples)
        t, s = self.curve_param(tau)
        Xt = (self(t + h, s) - self(t - h, s)) / (2 * h)
        Xs = (self(t, s + h) - self(t, s - h)) / (2 * h)
        m = cross(Xt, Xs, L3)
        N = m / np.sqrt(np.abs(inner(m, m, L3)))[:, None]
        n = _eval3(self.normal, tau)
        return float(np.max(np.minimum(np.max(np.abs(N - n), axis=1), np.max(np.abs(N + n), axis=1))))


def solve_bjorling_tms(curve, normal, var: str = "t", interval=(-1.0, 1.0), t0: float | None = None,
                       tol: float = 1e-9, samples: int = 401, quad: QuadPolicy = DEFAULT_QUAD) -> TMSSolution:
    """Timelike minimal surface containing ``curve`` with unit normal ``normal`` (both in L3).

    ``curve`` and ``normal`` are triples of expressions (strings are parsed in
    ``var``).  The causal character of c' is checked on ``samples`` points of
    ``interval``; it must be everywhere spacelike or everywhere timelike.
    """
    c = _parse3(curve, var)
    n = _parse3(normal, var)
    dc = tuple(ex.differentiate(e) for e in c)
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ValueError("interval must be nondegenerate")
    t0 = lo if t0 is None else float(t0)
    tau = np.linspace(lo, hi, samples)
    cv, nv = _eval3(dc, tau), _eval3(n, tau)
    q = inner(cv, cv, L3)
    if np.any(np.abs(q) <= tol) or (np.any(q > 0) and np.any(q < 0)):
        i = int(np.argmin(np.abs(q))) if np.any(np.abs(q) <= tol) else int(np.argmax(np.sign(q) != np.sign(q[0])))
        raise MixedCausalCharacter(f"<c', c'> = {q[i]:.17g} at {var} = {tau[i]:.17g}")
    unit = np.abs(inner(nv, nv, L3) - 1)
    if np.any(unit > tol):
        i = int(np.argmax(unit))
        raise NotUnitNormal(f"<n, n> - 1 = {unit[i]:.17g} at {var} = {tau[i]:.17g}")
    orth = np.abs(inner(nv, cv, L3)) / (1 + np.max(np.abs(cv), axis=1))
    if np.any(orth > tol):
        i = int(np.argmax(orth))
        raise NotOrthogonal(f"<n, c'> = {inner(nv[i], cv[i], L3):.17g} at {var} = {tau[i]:.17g}")
    branch = "spacelike" if q[0] > 0 else "timelike"
    return TMSSolution(c, n, dc, _l3_cross_exprs(n, dc), t0, branch, (lo, hi), quad)


def bridge_bi_to_tms(c, n):
    """B3 strip (c, n) -> L3 strip ((c3, c1, c2), (n3, n1, n2)).

    Accepts arrays with last axis 3 or triples of expressions/strings.
    """
    if _is_triple_of_exprs(c):
        return (c[2], c[0], c[1]), (n[2], n[0], n[1])
    return b3_to_l3(c), b3_to_l3(n)


def bridge_tms_to_bi(c, n):
    if _is_triple_of_exprs(c):
        return (c[1], c[2], c[0]), (n[1], n[2], n[0])
    return l3_to_b3(c), l3_to_b3(n)


def _is_triple_of_exprs(v):
    return isinstance(v, (tuple, list)) and len(v) == 3 and all(isinstance(e, (str, ex.Expr)) for e in v)


# --------------------------------------------------------------------------
# Gale-Nikaido evidence

@dataclass
class JacobianReport:
    t: np.ndarray
    s: np.ndarray
    jacobian: np.ndarray  # shape (nt, ns, 2, 2)
    components: tuple[int, int]
    minors_nonvanishing: bool  # criterion (i)
    det_nonzero_and_diag_sign_constant: bool  # criterion (ii)
    zero_diagonal: bool
    witnesses: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def det(self) -> np.ndarray:
        J = self.jacobian
        return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]

    @property
    def ambiguous(self) -> bool:
        """det J is fine but a diagonal entry vanishes identically (criterion (ii) read as failing)."""
        return self.zero_diagonal and "det" not in self.witnesses

    @property
    def certified(self) -> bool:
        return self.minors_nonvanishing or self.det_nonzero_and_diag_sign_constant

    @property
    def summary(self) -> str:
        axes = ", ".join(f"X{c + 1}" for c in self.components)
        if self.certified:
            return f"sampled evidence: graph over the ({axes})-plane"
        return f"not certified as graph over the ({axes})-plane"


def _eval_any(surface, T, S):
    try:
        out = np.asarray(surface(T, S), dtype=float)
        if out.shape == T.shape + (3,):
            return out
    except (TypeError, ValueError):
        pass
    flat = [np.asarray(surface(t, s), dtype=float) for t, s in zip(T.ravel(), S.ravel())]
    return np.array(flat).reshape(T.shape + (3,))


def gale_nikaido_check(surface, region, grid_density: int = 64, components=(1, 2),
                       h: float | None = None, tol: float = 1e-8) -> JacobianReport:
    """Grid evidence for the Gale-Nikaido univalence criteria of (t, s) -> (X_p, X_q).

    Criterion (i): J11, J22 and det J nonvanishing with constant sign on
    every grid point.  Criterion (ii): det J nonvanishing with constant sign
    and both diagonal entries of constant nonzero sign; an identically zero
    diagonal entry counts as a failure and is flagged.  These are sampled
    certificates, not proofs.
    """
    (t0, t1), (s0, s1) = region
    if not (t1 > t0 and s1 > s0):
        raise ValueError("region must be a nondegenerate rectangle")
    if grid_density < 2:
        raise ValueError("grid_density must be at least 2")
    p, q = components
    ts = np.linspace(t0, t1, grid_density)
    ss = np.linspace(s0, s1, grid_density)
    T, S = np.meshgrid(ts, ss, indexing="ij")
    if h is None:
        h = 1e-5 * max(1.0, t1 - t0, s1 - s0)
    dXt = (_eval_any(surface, T + h, S) - _eval_any(surface, T - h, S)) / (2 * h)
    dXs = (_eval_any(surface, T, S + h) - _eval_any(surface, T, S - h)) / (2 * h)
    J = np.empty(T.shape + (2, 2))
    J[..., 0, 0] = dXt[..., p]
    J[..., 0, 1] = dXs[..., p]
    J[..., 1, 0] = dXt[..., q]
    J[..., 1, 1] = dXs[..., q]
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]

    witnesses = {}

    def sign_constant_nonzero(name, v):
        bad = np.abs(v) <= tol
        if np.any(bad):
            i = np.unravel_index(np.argmax(bad), v.shape)
            witnesses[name] = (float(ts[i[0]]), float(ss[i[1]]), "vanishes")
            return False
        if np.any(np.sign(v) != np.sign(v.flat[0])):
            i = np.unravel_index(np.argmax(np.sign(v) != np.sign(v.flat[0])), v.shape)
            witnesses[name] = (float(ts[i[0]]), float(ss[i[1]]), "changes sign")
            return False
        return True

    d11 = sign_constant_nonzero("J11", J[..., 0, 0])
    d22 = sign_constant_nonzero("J22", J[..., 1, 1])
    dd = sign_constant_nonzero("det", det)
    crit_i = d11 and d22 and dd
    crit_ii = dd and d11 and d22
    zero_diag = bool(np.all(np.abs(J[..., 0, 0]) <= tol) or np.all(np.abs(J[..., 1, 1]) <= tol))
    notes = ["sampled evidence on a finite grid, not a proof"]
    if zero_diag and dd:
        notes.append("a diagonal entry vanishes identically while det J does not; "
                     "criterion (ii) is read conservatively as failing")
    return JacobianReport(ts, ss, J, (p, q), crit_i, crit_ii, zero_diag, witnesses, notes)
