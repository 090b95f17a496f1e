"""Growth-exponent estimators: Manhattan curve, slopes, stretch, correlation numbers.

All estimates are least-squares slopes of log-counts over a tail window, with
the regression standard error attached.  Counts of classes follow an
e^(hT)/T-type law, so an optional correction adds the fitted log T term back
before regressing; both values are reported by the callers.  The curve is
sampled in polar form: the abscissa of convergence of the weighted series in
direction theta scales inversely with the weights, so one growth estimate per
direction places a point on the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectrum as spectrum_mod
from .spectrum import OrbitBall, PairSpectrum, count_band, count_box, count_weighted

TOL_FLOOR = 0.02


class InsufficientData(Exception):
    pass


class EmptyBand(Exception):
    pass


class OutOfRange(Exception):
    pass


def tolerance(stderr: float, floor: float = TOL_FLOOR) -> float:
    """Default acceptance tolerance: max(floor, 2*stderr)."""
    return max(floor, 2.0 * stderr)


@dataclass(frozen=True)
class GrowthEstimate:
    exponent: float
    stderr: float
    window: tuple[float, float]
    sample_count: int
    corrected: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def agrees_with(self, other: "GrowthEstimate", extra: float = 0.0) -> bool:
        return abs(self.exponent - other.exponent) <= self.stderr + other.stderr + extra


def growth_exponent(counts, tail_fraction: float = 0.6, logt_correction: bool = False,
                    min_samples: int = 8, min_top_count: int = 50,
                    logt_power: float = 1.0) -> GrowthEstimate:
    """Least-squares slope of log N(T) over the tail window [tail*Tmax, Tmax].

    With `logt_correction`, regresses log N + logt_power*log T instead,
    compensating the 1/T^power prefactor of the counting laws.
    """
    pts = [(float(t), int(n)) for t, n in counts if n > 0]
    if not pts:
        raise InsufficientData("no positive counts")
    pts.sort()
    t_max = pts[-1][0]
    window = [(t, n) for t, n in pts if t >= tail_fraction * t_max - 1e-12]
    if len(window) < min_samples:
        raise InsufficientData(f"{len(window)} samples in tail window, need {min_samples}")
    if window[-1][1] < min_top_count:
        raise InsufficientData(f"top count {window[-1][1]} below {min_top_count}")
    t = np.array([p[0] for p in window])
    y = np.log([p[1] for p in window])
    if logt_correction:
        y = y + logt_power * np.log(t)
    n = len(t)
    tbar = t.mean()
    sxx = ((t - tbar) ** 2).sum()
    if sxx <= 0:
        raise InsufficientData("degenerate window")
    slope = ((t - tbar) * (y - y.mean())).sum() / sxx
    resid = y - (y.mean() + slope * (t - tbar))
    stderr = math.sqrt(max((resid ** 2).sum(), 0.0) / max(n - 2, 1) / sxx)
    # non-monotone local slope flags the window as untrustworthy for a limsup
    local = np.diff(y) / np.diff(t)
    wobble = int(np.count_nonzero(np.diff(local) < -3 * (stderr + 1e-9) * 10))
    return GrowthEstimate(
        exponent=float(max(slope, 0.0)),
        stderr=float(stderr),
        window=(float(t[0]), float(t[-1])),
        sample_count=n,
        corrected=logt_correction,
        meta={"raw_slope": float(slope), "nonmonotone_slope_points": wobble},
    )


def count_grid(s, x: float, y: float, n: int = 28, t_lo=None, t_hi=None):
    """(T, N(T)) pairs on a uniform grid inside the certified region."""
    if t_hi is None:
        if isinstance(s, OrbitBall):
            x0, y0 = s.weights
            worst = max((x0 / x) if x > 0 else 0.0, (y0 / y) if y > 0 else 0.0)
            t_hi = s.radius / worst
        else:
            t_hi = s.certified_cutoff(x, y)
        t_hi *= 1.0 - 1e-9
    if t_lo is None:
        t_lo = 0.2 * t_hi
    ts = np.linspace(t_lo, t_hi, n)
    return [(float(t), count_weighted(s, x, y, float(t))) for t in ts]


def delta_pair(spec: PairSpectrum, orbit: OrbitBall | None = None,
               logt_correction: bool = False, grid_n: int = 28,
               tail_fraction: float = 0.6) -> GrowthEstimate:
    """Critical exponent of the pair from class counts, orbit frame attached.

    The class-frame counts follow an e^(dT)/T law and honor the correction
    toggle; the orbit-frame law has no 1/T factor, so that estimate is always
    a raw slope.
    """
    est = growth_exponent(count_grid(spec, 1.0, 1.0, n=grid_n),
                          tail_fraction=tail_fraction, logt_correction=logt_correction)
    meta = dict(est.meta, frame="classes")
    if orbit is not None:
        oest = growth_exponent(count_grid(orbit, 1.0, 1.0, n=grid_n),
                               tail_fraction=tail_fraction, logt_correction=False)
        meta["orbit_frame"] = oest
    return GrowthEstimate(est.exponent, est.stderr, est.window, est.sample_count,
                          est.corrected, meta)


# ---------------------------------------------------------------------------
# Manhattan curve


def default_thetas(n: int = 17, inset: float = 0.05):
    """Chebyshev-spaced directions in (inset, pi/2 - inset)."""
    k = np.arange(1, n + 1)
    nodes = np.cos((2 * k - 1) * math.pi / (2 * n))  # in (-1, 1)
    lo, hi = inset, math.pi / 2 - inset
    return list(np.sort(lo + (hi - lo) * (nodes + 1) / 2))


@dataclass
class CurveEstimate:
    thetas: np.ndarray
    r: np.ndarray
    stderr: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def x(self) -> np.ndarray:
        return self.r * np.cos(self.thetas)

    @property
    def y(self) -> np.ndarray:
        return self.r * np.sin(self.thetas)

    def convexity_defects(self) -> np.ndarray:
        """Per interior sample: how far the point sits above the neighbor chord.

        Nonpositive values mean locally convex; compare against 3*stderr.
        """
        x, y = self.x, self.y
        order = np.argsort(x)
        x, y = x[order], y[order]
        d = np.zeros(len(x))
        inner = np.zeros(len(self.thetas))
        for i in range(1, len(x) - 1):
            t = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1])
            chord = y[i - 1] + t * (y[i + 1] - y[i - 1])
            d[i] = y[i] - chord
        inner[order] = d
        return inner

    def diagonal_crossing(self) -> tuple[float, float]:
        """Intersection of the sampled polyline with the line y = x."""
        x, y = self.x, self.y
        order = np.argsort(x)
        x, y = x[order], y[order]
        f = y - x
        for i in range(len(x) - 1):
            if f[i] == 0.0:
                return float(x[i]), float(y[i])
            if f[i] * f[i + 1] < 0:
                t = f[i] / (f[i] - f[i + 1])
                return float(x[i] + t * (x[i + 1] - x[i])), float(y[i] + t * (y[i + 1] - y[i]))
        raise OutOfRange("sampled curve does not cross the diagonal")


def curve_sample(spec: PairSpectrum, thetas=None, logt_correction: bool = True,
                 grid_n: int = 24, tail_fraction: float = 0.6,
                 min_top_count: int = 50) -> CurveEstimate:
    """Sample the Manhattan curve in polar form.

    For each direction theta the exponent e of T -> #{cos(theta) l1 +
    sin(theta) l2 <= T} is estimated; by homogeneity of the abscissa of
    convergence the point e*(cos theta, sin theta) lies on the curve.
    """
    if thetas is None:
        thetas = default_thetas()
    rs, errs = [], []
    for th in thetas:
        cx, cy = math.cos(th), math.sin(th)
        est = growth_exponent(count_grid(spec, cx, cy, n=grid_n),
                              tail_fraction=tail_fraction,
                              logt_correction=logt_correction,
                              min_top_count=min_top_count)
        rs.append(est.exponent)
        errs.append(est.stderr)
    return CurveEstimate(
        thetas=np.array(list(thetas)), r=np.array(rs), stderr=np.array(errs),
        meta={"logt_correction": logt_correction, "cutoff": spec.cutoff},
    )


def normal_slope(curve: CurveEstimate, x: float, n_fit: int = 5) -> float:
    """Slope of the normal at abscissa x: -1/q'(x) from a local quadratic fit."""
    xs, ys = curve.x, curve.y
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    if not (xs[0] <= x <= xs[-1]):
        raise OutOfRange(f"abscissa {x} outside sampled range [{xs[0]:.3f}, {xs[-1]:.3f}]")
    k = min(max(n_fit, 3), len(xs))
    nearest = np.argsort(np.abs(xs - x))[:k]
    xs_f, ys_f = xs[nearest], ys[nearest]
    coef = np.polyfit(xs_f - x, ys_f, 2)
    qprime = coef[1]
    if qprime >= -1e-12:
        raise OutOfRange(f"degenerate tangent slope {qprime} at {x}")
    return -1.0 / qprime


def delta_slope(spec: PairSpectrum, lam: float, eps: float,
                logt_correction: bool = False, grid_n: int = 28,
                tail_fraction: float = 0.6, min_top_count: int = 30) -> GrowthEstimate:
    """Directional critical exponent: growth of classes with l2/l1 near lam."""
    if lam <= 0 or eps <= 0:
        raise ValueError("need lam > 0 and eps > 0")
    t_hi = spec.cutoff * (1.0 - 1e-9)
    ts = np.linspace(0.2 * t_hi, t_hi, grid_n)
    counts = [(float(t), count_band(spec, lam, eps, float(t))) for t in ts]
    if counts[-1][1] == 0:
        raise EmptyBand(f"no classes with ratio within {eps} of {lam}")
    try:
        return growth_exponent(counts, tail_fraction=tail_fraction,
                               logt_correction=logt_correction,
                               min_top_count=min_top_count)
    except InsufficientData as exc:
        raise EmptyBand(str(exc)) from exc


def correlation(spec: PairSpectrum, lam: float, logt_correction: bool = False,
                min_samples: int = 5, min_top_count: int = 10) -> GrowthEstimate:
    """Correlation number: growth of #{l1 in [T,T+1), l2 in [lam T, lam T+1)} over integer T.

    The counting law carries a T^(3/2) prefactor, which the correction toggle
    compensates.
    """
    dlo, dhi = spec.dilation_range()
    if not (dlo <= lam <= dhi):
        raise EmptyBand(f"slope {lam} outside the dilation range [{dlo:.3f}, {dhi:.3f}]")
    t_top = int(math.floor((spec.cutoff - 2.0) / (1.0 + lam)))
    counts = []
    for t in range(1, t_top + 1):
        counts.append((float(t), count_box(spec, lam, float(t))))
    pos = [(t, n) for t, n in counts if n > 0]
    if len(pos) < min_samples or (pos and pos[-1][1] < min_top_count):
        raise EmptyBand(f"box counts too sparse for slope {lam}")
    return growth_exponent(pos, tail_fraction=0.45, logt_correction=logt_correction,
                           min_samples=min_samples, min_top_count=min_top_count,
                           logt_power=1.5)


def dilation_bounds(spec: PairSpectrum) -> tuple[float, float, float]:
    """(dil-, dil+, Thurston lower bound) from the finite spectrum.

    The sup/inf over all classes is not attained on a finite sample, so
    log max(dil+, 1/dil-) is a lower bound for the symmetrized Thurston
    distance.
    """
    dlo, dhi = spec.dilation_range()
    return dlo, dhi, math.log(max(dhi, 1.0 / dlo))


def stretch_mean_ratio(spec: PairSpectrum, t_top: float | None = None) -> float:
    """Independent geodesic-stretch estimate: mean l2/l1 over l1 in [T-1, T].

    Typical classes for the first metric equidistribute, so this ratio
    approximates the stretch that the curve reads off as the normal slope at
    abscissa 1.
    """
    cert = spec.certified_cutoff(1.0, 0.0)
    t_top = cert * (1 - 1e-9) if t_top is None else t_top
    if t_top > cert * (1 + 1e-12):
        raise spectrum_mod.UncertifiedRegion(f"l1 window top {t_top} beyond {cert}")
    sel = (spec.l1 >= t_top - 1.0) & (spec.l1 <= t_top)
    if not sel.any():
        raise InsufficientData("no classes in the stretch window")
    return float(np.mean(spec.l2[sel] / spec.l1[sel]))


def maximal_slope_from_band(spec: PairSpectrum, lams, eps: float,
                            logt_correction: bool = False):
    """argmax over the lambda grid of the directional exponent, with the values."""
    best = None
    vals = []
    for lam in lams:
        try:
            est = delta_slope(spec, lam, eps, logt_correction=logt_correction)
        except EmptyBand:
            vals.append((lam, None))
            continue
        vals.append((lam, est))
        if best is None or est.exponent > best[1].exponent:
            best = (lam, est)
    if best is None:
        raise EmptyBand("all slope bands empty")
    return best, vals
