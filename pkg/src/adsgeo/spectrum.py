"""Orbit and closed-geodesic pair spectra in H^2 x H^2, with completeness audits.

Enumeration is a breadth-first search over the Cayley graph, carried out on
batched 2x2 matrices.  A branch is pruned once its weighted displacement
exceeds the target radius plus the largest one-step decrease, and (for
non-free groups) elements are deduplicated by their sign-normalized matrices
rounded to 1e-7.

Conjugacy classes are captured from an element ball: every class of weighted
length <= T has a conjugate whose basepoint displacement is within an
empirical "capture gap" of the length, so the ball of radius T + slack
contains a representative.  The observed gaps certify the slack (the audit
raises HorizonUnsound and grows the radius when the margin thins).  This
metric horizon replaces the word-length horizon T/c_min, which is unusable
for surface groups: word growth (~7 per letter in genus 2) overwhelms the
length-per-letter rate set by the shortest geodesics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import moebius, reps, words
from .reps import MarkedRepresentation
from .words import FREE_RANK_2, Presentation

DEDUP_DECIMALS = 7
FINGERPRINT_TOL = 1e-6
DEFAULT_CAPTURE_SLACK = 3.5
AUDIT_MARGIN = 0.75
DEFAULT_MAX_ENTRIES = 60_000_000

_MIX = (
    np.uint64(0x9E3779B97F4A7C15),
    np.uint64(0xC2B2AE3D27D4EB4F),
    np.uint64(0x165667B19E3779F9),
    np.uint64(0x27D4EB2F165667C5),
)


class BudgetExceeded(Exception):
    """Enumeration grew past the configured element cap."""


class HorizonUnsound(Exception):
    """Completeness audit failed even after growing the capture radius."""


class UncertifiedRegion(Exception):
    """A count was requested outside the region certified complete."""


class FormatError(Exception):
    pass


class VersionError(Exception):
    pass


def displacement(m: moebius.MoebiusElement) -> float:
    """Hyperbolic distance d(m.i, i) in the upper half-plane."""
    s = (m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d) / 2.0
    return math.acosh(max(s, 1.0))


def _hash_rows(keys):
    """64-bit mix of quantized (n,4) int64 rows; hits are verified exactly."""
    h = np.zeros(len(keys), dtype=np.uint64)
    for j in range(4):
        h ^= keys[:, j].astype(np.uint64) * _MIX[j]
        h = (h ^ (h >> np.uint64(29))) * np.uint64(0xBF58476D1CE4E5B9)
    return h ^ (h >> np.uint64(32))


def _sign_normalize(flat):
    eps = 1e-9
    s = np.where(
        np.abs(flat[:, 0]) > eps, np.sign(flat[:, 0]),
        np.where(np.abs(flat[:, 1]) > eps, np.sign(flat[:, 1]),
                 np.where(np.abs(flat[:, 2]) > eps, np.sign(flat[:, 2]), np.sign(flat[:, 3]))),
    )
    return flat * s[:, None]


def _quantize(flat):
    return np.round(flat * (10.0 ** DEDUP_DECIMALS)).astype(np.int64)


class _Seen:
    """Membership set for quantized matrix rows: sorted hashes + exact verification."""

    def __init__(self):
        self.h = np.empty(0, dtype=np.uint64)
        self.rows = np.empty((0, 4), dtype=np.int64)

    def filter_new(self, keys):
        """Mask of first occurrences not already in the set."""
        n = len(keys)
        h = _hash_rows(keys)
        new = np.ones(n, dtype=bool)
        order = np.argsort(h, kind="stable")
        hs, ks = h[order], keys[order]
        same_h = np.zeros(n, dtype=bool)
        same_h[1:] = hs[1:] == hs[:-1]
        same_row = np.zeros(n, dtype=bool)
        same_row[1:] = same_h[1:] & (ks[1:] == ks[:-1]).all(axis=1)
        new[order[same_row]] = False
        # hash runs containing distinct rows: settle in python (hash collisions, ~never)
        odd = same_h & ~same_row
        for i in np.nonzero(odd)[0]:
            j = i - 1
            while j >= 0 and hs[j] == hs[i]:
                if new[order[j]] and np.array_equal(ks[j], ks[i]):
                    new[order[i]] = False
                    break
                j -= 1
        if len(self.h):
            pos = np.searchsorted(self.h, h)
            valid = pos < len(self.h)
            hit = np.zeros(n, dtype=bool)
            hit[valid] = self.h[pos[valid]] == h[valid]
            exact = np.zeros(n, dtype=bool)
            exact[hit] = (self.rows[pos[hit]] == keys[hit]).all(axis=1)
            new &= ~exact
            for i in np.nonzero(hit & ~exact & new)[0]:
                p = pos[i] + 1
                while p < len(self.h) and self.h[p] == h[i]:
                    if np.array_equal(self.rows[p], keys[i]):
                        new[i] = False
                        break
                    p += 1
        return new

    def add(self, keys):
        h = _hash_rows(keys)
        self.h = np.concatenate([self.h, h])
        self.rows = np.concatenate([self.rows, keys])
        order = np.argsort(self.h, kind="stable")
        self.h = self.h[order]
        self.rows = self.rows[order]


@dataclass
class BallData:
    """Flat per-element arrays for an explored ball (index 0 is the identity)."""

    alphabet: str
    parent: np.ndarray
    letter: np.ndarray
    dw: np.ndarray          # weighted displacement
    d1: np.ndarray
    d2: np.ndarray
    tr1: np.ndarray
    tr2: np.ndarray
    trp: np.ndarray | None
    keys1: np.ndarray | None
    keys2: np.ndarray | None
    weights: tuple
    radius: float
    expand_radius: float
    max_step: float

    def word_of(self, idx: int) -> str:
        out = []
        while idx > 0:
            out.append(self.alphabet[self.letter[idx]])
            idx = int(self.parent[idx])
        return "".join(reversed(out))


def _same_rep(r1, r2):
    if r2 is None or r2 is r1:
        return True
    return all(r1.images[g] == r2.images[g] for g in r1.presentation.generators)


def _track_gens(rep):
    tab = rep.matrix_table()
    gens = rep.presentation.generators
    return np.array([tab[g] for g in gens] + [tab[g.upper()] for g in gens])


def _norm_flat(C):
    flat = C.reshape(-1, 4)
    det = flat[:, 0] * flat[:, 3] - flat[:, 1] * flat[:, 2]
    flat = flat / np.sqrt(np.abs(det))[:, None]
    return _sign_normalize(flat)


def _disp_of(flat):
    return np.arccosh(np.maximum((flat * flat).sum(axis=1) * 0.5, 1.0))


def _ball(r1, r2, probe, weights, radius, expand_margin, max_entries,
          keep_keys=False, chunk=1_500_000) -> BallData:
    pres = r1.presentation
    n_gen = len(pres.generators)
    alphabet = pres.generators + pres.generators.upper()
    inv_of = np.array(list(range(n_gen, 2 * n_gen)) + list(range(n_gen)), dtype=np.int8)
    same = _same_rep(r1, r2)
    G1 = _track_gens(r1)
    G2 = None if same else _track_gens(r2)
    Gp = None if probe is None else _track_gens(probe)
    w1, w2 = weights

    g1d = _disp_of(G1.reshape(-1, 4))
    g2d = g1d if same else _disp_of(G2.reshape(-1, 4))
    max_step = float(np.max(w1 * g1d + w2 * g2d))
    expand_radius = radius + (max_step if expand_margin is None else expand_margin)

    dedupe = pres.mode != FREE_RANK_2
    seen = _Seen() if dedupe else None
    if dedupe:
        seen.add(_quantize(np.eye(2).reshape(1, 4)))

    parent = [np.array([-1], dtype=np.int64)]
    letter = [np.zeros(1, dtype=np.int8)]
    dws = [np.zeros(1)]
    d1s = [np.zeros(1)]
    d2s = [np.zeros(1)]
    tr1s = [np.full(1, 2.0)]
    tr2s = [np.full(1, 2.0)]
    trps = [np.full(1, 2.0)] if probe is not None else None
    k1s = [_quantize(np.eye(2).reshape(1, 4))] if keep_keys else None
    k2s = [_quantize(np.eye(2).reshape(1, 4))] if (keep_keys and not same) else None

    layer = {
        "M1": np.eye(2).reshape(1, 2, 2),
        "M2": None if same else np.eye(2).reshape(1, 2, 2),
        "Mp": None if probe is None else np.eye(2).reshape(1, 2, 2),
        "last": np.array([-1], dtype=np.int8),
        "idx": np.array([0], dtype=np.int64),
    }
    total = 1

    while len(layer["idx"]):
        buf = {k: [] for k in ("f1", "f2", "fp", "parent", "letter", "dw", "d1", "d2")}
        for j in range(2 * n_gen):
            ok = np.nonzero(layer["last"] != inv_of[j])[0]
            for lo in range(0, len(ok), chunk):
                sel = ok[lo:lo + chunk]
                f1 = _norm_flat(np.einsum("nij,jk->nik", layer["M1"][sel], G1[j]))
                dd1 = _disp_of(f1)
                if same:
                    f2, dd2 = None, dd1
                else:
                    f2 = _norm_flat(np.einsum("nij,jk->nik", layer["M2"][sel], G2[j]))
                    dd2 = _disp_of(f2)
                dw = w1 * dd1 + w2 * dd2
                keep = dw <= expand_radius
                if not keep.any():
                    continue
                buf["f1"].append(f1[keep])
                if f2 is not None:
                    buf["f2"].append(f2[keep])
                if probe is not None:
                    fp = _norm_flat(np.einsum("nij,jk->nik", layer["Mp"][sel], Gp[j]))
                    buf["fp"].append(fp[keep])
                buf["parent"].append(layer["idx"][sel][keep])
                buf["letter"].append(np.full(int(keep.sum()), j, dtype=np.int8))
                buf["dw"].append(dw[keep])
                buf["d1"].append(dd1[keep])
                buf["d2"].append(dd2[keep])
        if not buf["parent"]:
            break
        f1 = np.concatenate(buf["f1"])
        f2 = np.concatenate(buf["f2"]) if buf["f2"] else None
        fp = np.concatenate(buf["fp"]) if buf["fp"] else None
        par = np.concatenate(buf["parent"])
        let = np.concatenate(buf["letter"])
        dw = np.concatenate(buf["dw"])
        dd1 = np.concatenate(buf["d1"])
        dd2 = np.concatenate(buf["d2"])
        if dedupe:
            keys = _quantize(f1)
            fresh = seen.filter_new(keys)
            seen.add(keys[fresh])
            f1, par, let, dw = f1[fresh], par[fresh], let[fresh], dw[fresh]
            dd1, dd2 = dd1[fresh], dd2[fresh]
            if f2 is not None:
                f2 = f2[fresh]
            if fp is not None:
                fp = fp[fresh]
        if not len(par):
            break
        total += len(par)
        if total > max_entries:
            raise BudgetExceeded(f"element budget {max_entries} exceeded")
        base = sum(len(p) for p in parent)
        parent.append(par)
        letter.append(let)
        dws.append(dw)
        d1s.append(dd1)
        d2s.append(dd2)
        tr1s.append(f1[:, 0] + f1[:, 3])
        tr2s.append(tr1s[-1] if same else f2[:, 0] + f2[:, 3])
        if probe is not None:
            trps.append(fp[:, 0] + fp[:, 3])
        if keep_keys:
            k1s.append(_quantize(f1))
            if not same:
                k2s.append(_quantize(f2))
        layer = {
            "M1": f1.reshape(-1, 2, 2),
            "M2": None if same else f2.reshape(-1, 2, 2),
            "Mp": None if probe is None else fp.reshape(-1, 2, 2),
            "last": let,
            "idx": np.arange(base, base + len(par), dtype=np.int64),
        }

    return BallData(
        alphabet=alphabet,
        parent=np.concatenate(parent),
        letter=np.concatenate(letter),
        dw=np.concatenate(dws),
        d1=np.concatenate(d1s),
        d2=np.concatenate(d2s),
        tr1=np.concatenate(tr1s),
        tr2=np.concatenate(tr2s),
        trp=np.concatenate(trps) if probe is not None else None,
        keys1=np.concatenate(k1s) if keep_keys else None,
        keys2=np.concatenate(k2s) if (keep_keys and not same) else None,
        weights=(w1, w2),
        radius=radius,
        expand_radius=expand_radius,
        max_step=max_step,
    )


# ---------------------------------------------------------------------------
# orbit balls


@dataclass
class OrbitBall:
    rep1: MarkedRepresentation
    rep2: MarkedRepresentation
    radius: float
    weights: tuple
    d1: np.ndarray
    d2: np.ndarray
    fingerprints: np.ndarray  # (n, 4) or (n, 8) int64: quantized matrix (pair)
    max_step: float

    @property
    def size(self) -> int:
        return len(self.d1)


def orbit_ball(r1: MarkedRepresentation, r2: MarkedRepresentation, radius: float,
               weights=(1.0, 1.0), max_entries=DEFAULT_MAX_ENTRIES,
               expand_margin=None) -> OrbitBall:
    """All group elements with w1*d1 + w2*d2 <= radius (basepoint i in both factors).

    The search expands to radius + (largest one-step decrease), the bound from
    the spec'd pruning rule; `expand_margin` overrides it.  Completeness is
    cross-checked against exhaustive enumeration in the tests.
    """
    w1, w2 = weights
    if w1 < 0 or w2 < 0 or (w1 == 0 and w2 == 0):
        raise ValueError("weights must be nonnegative and not both zero")
    same = _same_rep(r1, r2)
    ball = _ball(r1, None if same else r2, None, (w1, w2), radius,
                 expand_margin, max_entries, keep_keys=True)
    keep = ball.dw <= radius
    fps = ball.keys1[keep]
    if ball.keys2 is not None:
        fps = np.concatenate([fps, ball.keys2[keep]], axis=1)
    return OrbitBall(
        rep1=r1, rep2=r2, radius=radius, weights=(w1, w2),
        d1=ball.d1[keep], d2=ball.d2[keep], fingerprints=fps,
        max_step=ball.max_step,
    )


# ---------------------------------------------------------------------------
# class spectra


_PROBE_FREE_TRACES = (3.3, 3.9, -4.7)
_PROBE_GENUS2_FN = ((1.9, 2.3, 2.7), (0.37, -0.59, 0.83))
_probe_cache: dict = {}


def probe_representation(pres: Presentation) -> MarkedRepresentation:
    """Frozen third representation used for class-identity fingerprints."""
    if pres.mode not in _probe_cache:
        if pres.mode == FREE_RANK_2:
            _probe_cache[pres.mode] = reps.from_free_pair(*_PROBE_FREE_TRACES, probe_depth=0)
        else:
            _probe_cache[pres.mode] = reps.from_fenchel_nielsen(
                reps.FenchelNielsen(*_PROBE_GENUS2_FN), probe_depth=0)
    return _probe_cache[pres.mode]


@dataclass
class PairSpectrum:
    rep1: MarkedRepresentation
    rep2: MarkedRepresentation
    cutoff: float
    entries_words: list
    l1: np.ndarray
    l2: np.ndarray
    primitive: np.ndarray
    completeness_bound: float  # certified capture radius in the weighted metric
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.entries_words)

    def dilation_range(self) -> tuple[float, float]:
        if not self.size:
            raise ValueError("empty spectrum")
        r = self.l2 / self.l1
        return float(r.min()), float(r.max())

    def certified_cutoff(self, x: float, y: float) -> float:
        """Largest T with {x*l1 + y*l2 <= T} certified inside the enumerated region.

        Entries live in the cone l2/l1 in [dlo, dhi] (exact for an identity
        pair, the padded observed range otherwise), so the weighted sublevel
        set is covered once its value on the cone edges reaches the cutoff.
        """
        if self.meta.get("identical_pair"):
            edges = (1.0,)
        else:
            dlo, dhi = self.dilation_range()
            edges = (dlo * 0.98, dhi * 1.02)
        return self.cutoff * min((x + y * r) / (1.0 + r) for r in edges)


def class_spectrum(r1: MarkedRepresentation, r2: MarkedRepresentation, T: float,
                   capture_slack: float = DEFAULT_CAPTURE_SLACK,
                   audit_margin: float = AUDIT_MARGIN,
                   expand_margin=None,
                   max_entries=DEFAULT_MAX_ENTRIES,
                   max_retries: int = 2) -> PairSpectrum:
    """Deduplicated classes with l1 + l2 <= T.

    Classes are collected from the element ball of radius T + capture_slack,
    merged by the fingerprint (l1, l2, l_probe) at tolerance 1e-6, and
    audited: if the largest observed (min displacement - length) gap eats
    into the slack by more than audit_margin, the radius is grown and the
    enumeration rerun (HorizonUnsound once retries are exhausted).
    """
    pres = r1.presentation
    if r2.presentation.mode != pres.mode:
        raise ValueError("representations use different presentations")
    if T <= 0:
        raise ValueError("cutoff must be positive")
    probe = probe_representation(pres)
    same = _same_rep(r1, r2)
    slack = capture_slack
    max_gap = math.inf
    for _ in range(max_retries + 1):
        ball = _ball(r1, None if same else r2, probe, (1.0, 1.0), T + slack,
                     expand_margin, max_entries)
        spec = _collect_classes(ball, r1, r2, T, same)
        max_gap = spec.meta["max_capture_gap"]
        if max_gap <= slack - audit_margin:
            spec.meta["capture_slack"] = slack
            return spec
        slack += 2.0
    raise HorizonUnsound(
        f"capture gap {max_gap:.3f} too close to slack {slack - 2.0:.3f} after retries")


def _collect_classes(ball: BallData, r1, r2, T, same) -> PairSpectrum:
    tol = moebius.DEFAULT_TRACE_TOL
    t1 = np.abs(ball.tr1)
    t2 = np.abs(ball.tr2)
    hyp = (t1 > 2.0 + tol) & (t2 > 2.0 + tol)
    hyp[0] = False
    idx = np.nonzero(hyp)[0]
    l1 = 2.0 * np.arccosh(t1[idx] / 2.0)
    l2 = l1 if same else 2.0 * np.arccosh(t2[idx] / 2.0)
    inside = l1 + l2 <= T
    idx, l1, l2 = idx[inside], l1[inside], l2[inside]
    lp = 2.0 * np.arccosh(np.maximum(np.abs(ball.trp[idx]) / 2.0, 1.0))

    # stage 1: exact grouping of fingerprint cells (vectorized)
    cells = np.stack([
        np.round(l1 / FINGERPRINT_TOL).astype(np.int64),
        np.round(l2 / FINGERPRINT_TOL).astype(np.int64),
        np.round(lp / FINGERPRINT_TOL).astype(np.int64),
    ], axis=1)
    uniq, inverse = np.unique(cells, axis=0, return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(uniq)))
    dw_sorted = ball.dw[idx][order]
    idx_sorted = idx[order]
    cell_min_dw = np.minimum.reduceat(dw_sorted, bounds) if len(uniq) else np.empty(0)
    cell_rep = np.minimum.reduceat(idx_sorted, bounds) if len(uniq) else np.empty(0, np.int64)
    cell_count = np.diff(np.append(bounds, len(order)))
    pos_in_idx = np.searchsorted(idx, cell_rep)
    cell_l1 = l1[pos_in_idx]
    cell_l2 = l2[pos_in_idx]
    cell_lp = lp[pos_in_idx]

    # stage 2: merge cells within tolerance (repairs rounding-boundary splits);
    # genuinely distinct classes inside one tolerance box merge too, and are logged
    sweep = np.lexsort((cell_lp, cell_l2, cell_l1))
    groups = []
    margin = math.inf
    for c in sweep:
        placed = False
        for g in reversed(groups):
            if cell_l1[c] - g["l1"] > FINGERPRINT_TOL:
                break
            dist = max(abs(cell_l1[c] - g["l1"]), abs(cell_l2[c] - g["l2"]),
                       abs(cell_lp[c] - g["lp"]))
            if dist <= FINGERPRINT_TOL:
                g["dw"] = min(g["dw"], cell_min_dw[c])
                if cell_rep[c] < g["rep"]:
                    g["rep"] = int(cell_rep[c])
                g["members"] += int(cell_count[c])
                g["cells"] += 1
                placed = True
                break
            margin = min(margin, dist)
        if not placed:
            groups.append({
                "l1": cell_l1[c], "l2": cell_l2[c], "lp": cell_lp[c],
                "dw": float(cell_min_dw[c]), "rep": int(cell_rep[c]),
                "members": int(cell_count[c]), "cells": 1,
            })

    pres = r1.presentation
    recs = []
    max_gap = 0.0
    collisions = 0
    for g in groups:
        word = ball.word_of(g["rep"])
        cls = words.canonical_class(word, pres)
        recs.append((g["l1"], g["l2"], cls.canonical, cls.is_primitive()))
        max_gap = max(max_gap, g["dw"] - (g["l1"] + g["l2"]))
        if g["cells"] > 3:
            collisions += 1
    recs.sort(key=lambda r: (r[0] + r[1], r[2]))
    spec = PairSpectrum(
        rep1=r1, rep2=r2, cutoff=T,
        entries_words=[r[2] for r in recs],
        l1=np.array([r[0] for r in recs]),
        l2=np.array([r[1] for r in recs]),
        primitive=np.array([r[3] for r in recs], dtype=bool),
        completeness_bound=ball.radius,
        meta={
            "identical_pair": same,
            "max_capture_gap": max_gap,
            "fingerprint_margin": margin,
            "wide_merges": collisions,
            "ball_elements": int(len(ball.dw)),
            "max_word_length": int(max((len(r[2]) for r in recs), default=0)),
        },
    )
    return spec


# ---------------------------------------------------------------------------
# counting


def count_weighted(s, x: float, y: float, T: float) -> int:
    """#{entries with x*l1 + y*l2 <= T} (orbit balls count displacements instead)."""
    if x < 0 or y < 0 or (x == 0 and y == 0):
        raise ValueError("weights must be nonnegative and not both zero")
    if isinstance(s, OrbitBall):
        x0, y0 = s.weights
        worst = max((x0 / x) if x > 0 else 0.0, (y0 / y) if y > 0 else 0.0)
        if x == 0 and x0 > 0 or y == 0 and y0 > 0:
            raise UncertifiedRegion("orbit ball does not certify zero-weight directions")
        if T * worst > s.radius * (1 + 1e-12):
            raise UncertifiedRegion(f"orbit count at ({x},{y},{T}) beyond radius {s.radius}")
        return int(np.count_nonzero(x * s.d1 + y * s.d2 <= T))
    if T > s.certified_cutoff(x, y) * (1 + 1e-12):
        raise UncertifiedRegion(
            f"count at ({x},{y},{T}) beyond certified cutoff {s.certified_cutoff(x, y):.3f}")
    return int(np.count_nonzero(x * s.l1 + y * s.l2 <= T))


def count_band(s: PairSpectrum, lam: float, eps: float, T: float) -> int:
    """#{classes with |l2/l1 - lam| <= eps and l1 + l2 <= T}."""
    if lam <= 0 or eps < 0:
        raise ValueError("need lam > 0 and eps >= 0")
    if T > s.cutoff * (1 + 1e-12):
        raise UncertifiedRegion(f"band count at T={T} beyond cutoff {s.cutoff}")
    ratio = s.l2 / s.l1
    return int(np.count_nonzero((np.abs(ratio - lam) <= eps) & (s.l1 + s.l2 <= T)))


def count_box(s: PairSpectrum, lam: float, T: float) -> int:
    """#{classes with l1 in [T, T+1) and l2 in [lam*T, lam*T + 1)}."""
    if lam <= 0:
        raise ValueError("need lam > 0")
    if (1.0 + lam) * T + 2.0 > s.cutoff * (1 + 1e-12):
        raise UncertifiedRegion(f"box at T={T}, lam={lam} beyond cutoff {s.cutoff}")
    in1 = (s.l1 >= T) & (s.l1 < T + 1.0)
    in2 = (s.l2 >= lam * T) & (s.l2 < lam * T + 1.0)
    return int(np.count_nonzero(in1 & in2))


def restrict_primitive(s: PairSpectrum) -> PairSpectrum:
    keep = s.primitive
    return PairSpectrum(
        rep1=s.rep1, rep2=s.rep2, cutoff=s.cutoff,
        entries_words=[w for w, k in zip(s.entries_words, keep) if k],
        l1=s.l1[keep], l2=s.l2[keep], primitive=s.primitive[keep],
        completeness_bound=s.completeness_bound,
        meta=dict(s.meta, primitive_only=True),
    )


# ---------------------------------------------------------------------------
# persistence

FORMAT_HEADER = "MSPEC/1"


def save_spectrum(s: PairSpectrum, path) -> None:
    lines = [FORMAT_HEADER]
    for tag, rep in (("rep1", s.rep1), ("rep2", s.rep2)):
        for ln in reps.descriptor_lines(rep):
            lines.append(f"{tag}.{ln}")
    lines.append(f"cutoff {s.cutoff:.17g}")
    lines.append(f"completeness {s.completeness_bound:.17g}")
    lines.append(f"entries {s.size}")
    for w, a, b, p in zip(s.entries_words, s.l1, s.l2, s.primitive):
        flag = " p" if p else ""
        lines.append(f"entry {w} {a:.17g} {b:.17g}{flag}")
    lines.append("end")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_spectrum(path) -> PairSpectrum:
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FORMAT_HEADER:
        raise VersionError(f"missing {FORMAT_HEADER} header")
    if lines[-1] != "end":
        raise FormatError("file is truncated (no end sentinel)")
    rep_lines = {"rep1": [], "rep2": []}
    cutoff = completeness = None
    declared = None
    entries = []
    for ln in lines[1:-1]:
        key, _, rest = ln.partition(" ")
        if key.startswith("rep1.") or key.startswith("rep2."):
            tag, sub = key.split(".", 1)
            rep_lines[tag].append((sub + " " + rest) if rest else sub)
        elif key == "cutoff":
            cutoff = float(rest)
        elif key == "completeness":
            completeness = float(rest)
        elif key == "entries":
            declared = int(rest)
        elif key == "entry":
            parts = rest.split()
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "p"):
                raise FormatError(f"malformed entry line: {ln!r}")
            entries.append((parts[0], float(parts[1]), float(parts[2]), len(parts) == 4))
        else:
            raise FormatError(f"unrecognized line: {ln!r}")
    if cutoff is None or completeness is None or declared is None:
        raise FormatError("missing cutoff/completeness/entries header")
    if declared != len(entries):
        raise FormatError(f"declared {declared} entries, found {len(entries)}")
    r1 = reps.rep_from_descriptor(rep_lines["rep1"])
    same = rep_lines["rep1"] == rep_lines["rep2"]
    r2 = r1 if same else reps.rep_from_descriptor(rep_lines["rep2"])
    return PairSpectrum(
        rep1=r1, rep2=r2, cutoff=cutoff,
        entries_words=[e[0] for e in entries],
        l1=np.array([e[1] for e in entries]),
        l2=np.array([e[2] for e in entries]),
        primitive=np.array([e[3] for e in entries], dtype=bool),
        completeness_bound=completeness,
        meta={"identical_pair": same, "loaded": True},
    )
