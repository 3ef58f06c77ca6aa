"""Inner products, cross products and causal types in B3 and L3.

B3 is R^3 with the form diag(+1, -1, +1); L3 is Lorentz-Minkowski space with
diag(+1, +1, -1).  Vectors are plain numpy arrays whose last axis has length 3,
so every function here broadcasts over stacks of vectors.
"""

from __future__ import annotations

import enum

import numpy as np

__all__ = [
    "Signature", "CausalType", "vec3", "inner", "quad_form", "cross", "norm",
    "causal_type", "b3_to_l3", "l3_to_b3", "B3", "L3",
]


class Signature(enum.Enum):
    B3 = (1.0, -1.0, 1.0)
    L3 = (1.0, 1.0, -1.0)

    @property
    def diag(self) -> np.ndarray:
        return np.array(self.value)


B3 = Signature.B3
L3 = Signature.L3


class CausalType(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"


def vec3(v) -> np.ndarray:
    """Coerce ``v`` to a float array with last axis 3 and finite entries."""
    a = np.asarray(v, dtype=float)
    if a.shape[-1:] != (3,):
        raise ValueError(f"expected vectors of length 3, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


def inner(u, v, sig: Signature = B3):
    """Signed bilinear form of ``sig`` applied to ``u`` and ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    d = sig.value
    out = d[0] * u[..., 0] * v[..., 0] + d[1] * u[..., 1] * v[..., 1] + d[2] * u[..., 2] * v[..., 2]
    return float(out) if np.ndim(out) == 0 else out


def quad_form(v, sig: Signature = B3):
    return inner(v, v, sig)


def cross(u, v, sig: Signature = B3) -> np.ndarray:
    """Cross product characterised by ``inner(cross(u, v), w) == det[u; v; w]``.

    det[u; v; w] = w . (u x_E v) with x_E the Euclidean product, so the
    metric cross product is the Euclidean one with each component divided
    by the corresponding diagonal entry (which is +-1).
    """
    e = np.cross(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return e * sig.diag


def norm(v, sig: Signature = B3):
    """sqrt(|<v, v>|)."""
    return np.sqrt(np.abs(inner(v, v, sig)))


def causal_type(v, sig: Signature = L3, tol: float = 1e-9) -> CausalType:
    if tol <= 0:
        raise ValueError("tol must be positive")
    q = inner(v, v, sig)
    if abs(q) <= tol:
        return CausalType.LIGHTLIKE
    return CausalType.SPACELIKE if q > 0 else CausalType.TIMELIKE


def b3_to_l3(p) -> np.ndarray:
    """(x, y, z) in B3 -> (z, x, y) in L3; preserves the quadratic form."""
    p = np.asarray(p, dtype=float)
    return p[..., [2, 0, 1]]


def l3_to_b3(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p[..., [1, 2, 0]]
