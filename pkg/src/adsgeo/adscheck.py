"""The Lorentzian layer: bilinear form, spacelike distance, axes, translation length.

The model is the unit-determinant 2x2 matrices with the quadratic form -det,
acted on by pairs (left, right) via X -> left X right^{-1}.  Boundary points
are rank-one matrices u_L u_R^t (the Segre picture); the boundary action
sends u_L u_R^t to (left u_L)((right^{-1})^t u_R)^t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import moebius
from .moebius import HYPERBOLIC, MoebiusElement

SPACELIKE_TOL = 1e-9


class NotSpacelikeSeparated(Exception):
    pass


class NotHyperbolicPair(Exception):
    pass


def _det(X):
    return X[0, 0] * X[1, 1] - X[0, 1] * X[1, 0]


def ads_point(X) -> np.ndarray:
    """Validate and sign-normalize a point of the model (det 1 up to 1e-9)."""
    X = np.asarray(X, dtype=float)
    d = _det(X)
    if abs(d - 1.0) > 1e-9:
        raise ValueError(f"determinant {d} is not 1")
    flat = X.reshape(-1)
    for v in flat:
        if abs(v) > 1e-12:
            if v < 0:
                X = -X
            break
    return X


def ads_form(X, Y) -> float:
    """Polarization of -det: B(X,Y) = -(det(X+Y) - det X - det Y)/2."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return -0.5 * (_det(X + Y) - _det(X) - _det(Y))


def spacelike_distance(X, Y) -> float:
    """arccosh(-B(X,Y)) along a common spacelike geodesic."""
    b = ads_form(X, Y)
    if b > -1.0 + SPACELIKE_TOL:
        raise NotSpacelikeSeparated(f"form value {b} > -1")
    return math.acosh(-b)


@dataclass(frozen=True)
class BoundaryPoint:
    """Rank-one matrix u_L u_R^t up to scale."""

    matrix: tuple

    @staticmethod
    def from_projective(u_left, u_right) -> "BoundaryPoint":
        m = np.outer(u_left, u_right)
        return BoundaryPoint.from_matrix(m)

    @staticmethod
    def from_matrix(m) -> "BoundaryPoint":
        m = np.asarray(m, dtype=float)
        s = np.linalg.svd(m, compute_uv=False)
        if s[1] > 1e-9 * s[0]:
            raise ValueError("matrix is not rank one")
        m = m / np.linalg.norm(m)
        flat = m.reshape(-1)
        for v in flat:
            if abs(v) > 1e-12:
                if v < 0:
                    m = -m
                break
        return BoundaryPoint(tuple(map(tuple, m)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix)

    def close_to(self, other: "BoundaryPoint", tol=1e-8) -> bool:
        return bool(np.max(np.abs(self.array - other.array)) <= tol)


@dataclass(frozen=True)
class AdSIsometry:
    left: MoebiusElement
    right: MoebiusElement

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Rinv = moebius.inverse(self.right).matrix
        return self.left.matrix @ X @ Rinv

    def apply_boundary(self, p: BoundaryPoint) -> BoundaryPoint:
        Rinv_t = moebius.inverse(self.right).matrix.T
        return BoundaryPoint.from_matrix(self.left.matrix @ p.array @ Rinv_t.T)


def _hyperbolic_frames(g: AdSIsometry):
    left = moebius.classify(g.left)
    right = moebius.classify(g.right)
    if left.tag != HYPERBOLIC or right.tag != HYPERBOLIC:
        raise NotHyperbolicPair(f"components classify as ({left.tag}, {right.tag})")
    return left, right


def _dual_fixed_points(m: MoebiusElement):
    """Attracting/repelling directions of (m^{-1})^t, the boundary action on the right factor."""
    star = moebius.MoebiusElement.from_matrix(moebius.inverse(m).matrix.T)
    cls = moebius.classify(star)
    return cls.attracting, cls.repelling


def axis(g: AdSIsometry) -> tuple[BoundaryPoint, BoundaryPoint]:
    """(g+, g-): endpoints of the unique spacelike axis in the Segre boundary."""
    left, _ = _hyperbolic_frames(g)
    att_r, rep_r = _dual_fixed_points(g.right)
    plus = BoundaryPoint.from_projective(left.attracting, att_r)
    minus = BoundaryPoint.from_projective(left.repelling, rep_r)
    return plus, minus


def mixed_invariant_endpoints(g: AdSIsometry) -> tuple[BoundaryPoint, BoundaryPoint]:
    """Endpoints of the other invariant geodesic, mixing attracting and repelling factors.

    This geodesic is fixed by g but is not the axis; for holonomies of
    globally hyperbolic manifolds it lies outside the developing image, and
    it fails the attracting/attracting endpoint contract.
    """
    left, _ = _hyperbolic_frames(g)
    att_r, rep_r = _dual_fixed_points(g.right)
    return (BoundaryPoint.from_projective(left.attracting, rep_r),
            BoundaryPoint.from_projective(left.repelling, att_r))


def _eig_frame_columns(m: MoebiusElement, attracting_first: bool):
    w, v = np.linalg.eig(m.matrix)
    w, v = w.real, v.real
    order = np.argsort(-np.abs(w))
    if not attracting_first:
        order = order[::-1]
    P = v[:, order].copy()
    for j in range(2):
        k = int(np.argmax(np.abs(P[:, j])))
        if P[k, j] < 0:
            P[:, j] = -P[:, j]
    det = np.linalg.det(P)
    if det < 0:
        P[:, 1] = -P[:, 1]
        det = -det
    return P / math.sqrt(det)


def axis_point(g: AdSIsometry) -> np.ndarray:
    """A point on the axis, from the simultaneous diagonal normal form.

    Conjugating left to diag(e^l, e^-l) and right to diag(e^-m, e^m) makes the
    axis the diagonal one-parameter subgroup through the identity; pulling the
    identity back gives P_L P_R^{-1}.
    """
    _hyperbolic_frames(g)
    PL = _eig_frame_columns(g.left, attracting_first=True)
    PR = _eig_frame_columns(g.right, attracting_first=False)
    X = PL @ np.linalg.inv(PR)
    X = X / math.sqrt(abs(_det(X)))
    return ads_point(X)


def lorentz_length(g: AdSIsometry) -> tuple[float, float, float]:
    """(direct, average, |difference|): translation length measured two ways.

    The direct value is the spacelike distance from an axis point o to g.o;
    it must match (l_left + l_right)/2.
    """
    o = axis_point(g)
    go = g.apply(o)
    if ads_form(o, go) > 0:
        go = -go  # pick the matrix representative on o's side of the double cover
    direct = spacelike_distance(o, go)
    avg = 0.5 * (moebius.translation_length(g.left) + moebius.translation_length(g.right))
    return direct, avg, abs(direct - avg)


def lorentz_length_battery(rng: np.random.Generator, n_pairs: int = 10_000,
                           trace_range=(2.05, 12.0)) -> dict:
    """Random conjugated hyperbolic pairs: max |direct - (l1+l2)/2| over the batch."""
    lo, hi = trace_range
    worst = 0.0
    worst_pair = None
    for _ in range(n_pairs):
        tl, tr = rng.uniform(lo, hi, size=2)
        hl = _random_conjugator(rng)
        hr = _random_conjugator(rng)
        left = moebius.conjugate(_hyperbolic_of_trace(tl), hl)
        right = moebius.conjugate(_hyperbolic_of_trace(tr), hr)
        g = AdSIsometry(left, right)
        direct, avg, diff = lorentz_length(g)
        if diff > worst:
            worst = diff
            worst_pair = (tl, tr)
    return {"pairs": n_pairs, "max_deviation": worst, "worst_traces": worst_pair}


def _hyperbolic_of_trace(t: float) -> MoebiusElement:
    lam = (t + math.sqrt(t * t - 4.0)) / 2.0
    return MoebiusElement.from_entries(lam, 0.0, 0.0, 1.0 / lam)


def _random_conjugator(rng) -> MoebiusElement:
    while True:
        m = rng.normal(size=(2, 2))
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det > 1e-3:
            return MoebiusElement.from_matrix(m / math.sqrt(det))


def lorentz_counts(spec, radii) -> list:
    """(R, #{classes with (l1+l2)/2 <= R}) for the Lorentzian counting frame."""
    from .spectrum import count_weighted

    return [(float(r), count_weighted(spec, 1.0, 1.0, 2.0 * float(r))) for r in radii]


def delta_lorentz(spec, logt_correction: bool = False, grid_n: int = 28,
                  tail_fraction: float = 0.6):
    """Growth of #{l_Lor <= R}; equals twice the pair exponent on the same data."""
    from . import manhattan

    r_hi = spec.cutoff * 0.5 * (1.0 - 1e-9)
    radii = np.linspace(0.2 * r_hi, r_hi, grid_n)
    counts = lorentz_counts(spec, radii)
    return manhattan.growth_exponent(counts, tail_fraction=tail_fraction,
                                     logt_correction=logt_correction)
