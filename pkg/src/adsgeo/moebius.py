"""Numerics of PSL(2,R): classification, translation length, fixed points.

Elements are stored as unit-determinant 2x2 real matrices modulo sign.  The
sign is fixed by making the first entry of (a, b, c, d) whose magnitude
exceeds a small threshold positive, so that equality of group elements can be
tested entrywise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TRACE_TOL = 1e-9

HYPERBOLIC = "hyperbolic"
PARABOLIC = "parabolic"
ELLIPTIC = "elliptic"
IDENTITY = "identity"


class NotHyperbolic(Exception):
    """Raised when a hyperbolic-only quantity is requested of a non-hyperbolic element."""


_SIGN_EPS = 1e-12


def _normalize(a, b, c, d):
    det = a * d - b * c
    if det <= 0.0 or not math.isfinite(det):
        raise ValueError(f"matrix determinant {det} is not positive")
    s = 1.0 / math.sqrt(det)
    a, b, c, d = a * s, b * s, c * s, d * s
    for v in (a, b, c, d):
        if abs(v) > _SIGN_EPS:
            if v < 0.0:
                a, b, c, d = -a, -b, -c, -d
            break
    return a, b, c, d


@dataclass(frozen=True)
class MoebiusElement:
    """A unit-determinant 2x2 real matrix, sign-normalized (PSL(2,R) element)."""

    a: float
    b: float
    c: float
    d: float

    @staticmethod
    def from_entries(a, b, c, d) -> "MoebiusElement":
        return MoebiusElement(*_normalize(float(a), float(b), float(c), float(d)))

    @staticmethod
    def from_matrix(m) -> "MoebiusElement":
        m = np.asarray(m, dtype=float)
        return MoebiusElement.from_entries(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @staticmethod
    def identity() -> "MoebiusElement":
        return MoebiusElement(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def is_identity(self, tol=1e-9) -> bool:
        return (
            abs(self.a - 1.0) <= tol
            and abs(self.d - 1.0) <= tol
            and abs(self.b) <= tol
            and abs(self.c) <= tol
        )


def hyperbolic_translation(length: float) -> MoebiusElement:
    """Translation by `length` along the geodesic (0, oo) of the upper half-plane."""
    if length <= 0:
        raise ValueError("translation length must be positive")
    h = math.exp(length / 2.0)
    return MoebiusElement.from_entries(h, 0.0, 0.0, 1.0 / h)


def rotation(theta: float) -> MoebiusElement:
    """Rotation by angle theta about the point i."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return MoebiusElement.from_entries(c, s, -s, c)


def compose(m: MoebiusElement, n: MoebiusElement) -> MoebiusElement:
    return MoebiusElement.from_entries(
        m.a * n.a + m.b * n.c,
        m.a * n.b + m.b * n.d,
        m.c * n.a + m.d * n.c,
        m.c * n.b + m.d * n.d,
    )


def inverse(m: MoebiusElement) -> MoebiusElement:
    # adjugate of a det-1 matrix
    return MoebiusElement.from_entries(m.d, -m.b, -m.c, m.a)


def conjugate(m: MoebiusElement, h: MoebiusElement) -> MoebiusElement:
    """h m h^{-1}."""
    return compose(compose(h, m), inverse(h))


def power(m: MoebiusElement, n: int) -> MoebiusElement:
    if n == 0:
        return MoebiusElement.identity()
    if n < 0:
        return power(inverse(m), -n)
    out = MoebiusElement.identity()
    base = m
    while n:
        if n & 1:
            out = compose(out, base)
        base = compose(base, base)
        n >>= 1
    return out


@dataclass(frozen=True)
class IsometryClass:
    tag: str
    translation_length: float | None = None
    attracting: tuple[float, float] | None = None
    repelling: tuple[float, float] | None = None


def _fixed_directions(m: MoebiusElement):
    """Eigen-directions of a hyperbolic element, (attracting, repelling)."""
    w, v = np.linalg.eig(m.matrix)
    order = np.argsort(-np.abs(w))
    att = v[:, order[0]].real
    rep = v[:, order[1]].real
    def norm(u):
        u = u / math.hypot(u[0], u[1])
        if abs(u[0]) > _SIGN_EPS:
            if u[0] < 0:
                u = -u
        elif u[1] < 0:
            u = -u
        return (float(u[0]), float(u[1]))
    return norm(att), norm(rep)


def classify(m: MoebiusElement, tol: float = DEFAULT_TRACE_TOL) -> IsometryClass:
    """Classify by the trace trichotomy: |tr| > 2 hyperbolic, = 2 parabolic, < 2 elliptic."""
    if m.is_identity(tol):
        return IsometryClass(IDENTITY)
    t = abs(m.trace)
    if t > 2.0 + tol:
        att, rep = _fixed_directions(m)
        return IsometryClass(
            HYPERBOLIC,
            translation_length=2.0 * math.acosh(t / 2.0),
            attracting=att,
            repelling=rep,
        )
    if t >= 2.0 - tol:
        return IsometryClass(PARABOLIC)
    return IsometryClass(ELLIPTIC)


def translation_length(m: MoebiusElement, tol: float = DEFAULT_TRACE_TOL) -> float:
    """2*arccosh(|tr|/2) for a hyperbolic element; raises NotHyperbolic otherwise."""
    t = abs(m.trace)
    if t <= 2.0 + tol:
        raise NotHyperbolic(f"|trace| = {t} is not > 2")
    return 2.0 * math.acosh(t / 2.0)


def translation_length_of_trace(t: float) -> float:
    """Translation length as a function of |trace|; 0 on [0, 2]."""
    t = abs(t)
    if t <= 2.0:
        return 0.0
    return 2.0 * math.acosh(t / 2.0)


def apply_to_projective(m: MoebiusElement, p: tuple[float, float]) -> tuple[float, float]:
    x = m.a * p[0] + m.b * p[1]
    y = m.c * p[0] + m.d * p[1]
    h = math.hypot(x, y)
    return (x / h, y / h)
