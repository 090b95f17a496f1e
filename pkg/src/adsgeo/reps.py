"""Marked Fuchsian representations: Fenchel-Nielsen genus-2 assembly and rank-2 free pairs.

The genus-2 surface is built from two one-holed tori glued along their common
boundary geodesic (the separating curve [a,b]), which together with the two
handle cores gives a pants decomposition with three length and three twist
parameters.  Each holed torus is explicit: the core translation along a fixed
axis plus a perpendicular crossing element whose trace is solved from the
commutator trace identity

    tr[A,B] = tr(A)^2 + tr(B)^2 + tr(AB)^2 - tr(A) tr(B) tr(AB) - 2,

so the boundary has exactly the requested length.  The relator holds to
rounding error by construction, and the whole representation is conjugated so
the separating axis passes through the basepoint i midway between the two
handle cores (this keeps orbit balls around i balanced).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import moebius, words
from .moebius import MoebiusElement
from .words import FREE_RANK_2, GENUS_TWO, Presentation

RELATOR_RESIDUAL_BOUND = 1e-8
DEFAULT_PROBE_DEPTH = 8
MIN_PANTS_LENGTH = 1e-6


class DegenerateParameters(Exception):
    """Fenchel-Nielsen parameters outside the numerically usable range."""


class NotDiscernedDiscrete(Exception):
    """The probe found a non-hyperbolic nontrivial class."""


@dataclass(frozen=True)
class FenchelNielsen:
    lengths: tuple[float, float, float]
    twists: tuple[float, float, float]

    def __post_init__(self):
        if len(self.lengths) != 3 or len(self.twists) != 3:
            raise ValueError("expected 3 lengths and 3 twists")
        if any(l <= 0 for l in self.lengths):
            raise ValueError("pants curve lengths must be positive")


@dataclass(frozen=True)
class MarkedRepresentation:
    presentation: Presentation
    images: dict  # generator letter -> MoebiusElement
    relator_residual: float
    discreteness_witness: float
    probe_depth: int
    descriptor: dict = field(default_factory=dict, compare=False)

    def matrix_table(self) -> dict:
        """Letter -> 2x2 ndarray for generators and inverses."""
        out = {}
        for g, m in self.images.items():
            out[g] = m.matrix
            out[g.upper()] = moebius.inverse(m).matrix
        return out


def _hyp(length):
    h = math.exp(length / 2.0)
    return np.array([[h, 0.0], [0.0, 1.0 / h]])


def _comm(A, B):
    return A @ B @ np.linalg.inv(A) @ np.linalg.inv(B)


def _holed_torus(core_len, boundary_len, twist):
    """Core translation A along (0, oo) and crossing element B; tr[A,B] = -2cosh(boundary/2)."""
    c = math.cosh(core_len / 2.0)
    denom = 2.0 * (c * c - 1.0)
    if denom < 1e-12:
        raise DegenerateParameters(f"core length {core_len} too small to solve the gluing")
    d2 = (2.0 * c * c - 1.0 + math.cosh(boundary_len / 2.0)) / denom
    d = math.sqrt(d2)
    e = math.sqrt(d2 - 1.0)
    A = _hyp(core_len)
    B = np.array([[d, e], [e, d]]) @ _hyp(twist)
    return A, B


def _eig_frame(M):
    """Columns (attracting, repelling), det +1, deterministic signs."""
    w, v = np.linalg.eig(M)
    w, v = w.real, v.real
    order = np.argsort(-np.abs(w))
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


def _axis_feet(M):
    """Product of the boundary fixed points of M (axis assumed disjoint from (0, oo))."""
    a, b = M[0, 0], M[0, 1]
    c, d = M[1, 0], M[1, 1]
    if abs(c) < 1e-14:
        raise DegenerateParameters("axis through infinity while recentering")
    # fixed points of (az+b)/(cz+d): product = -b/c
    prod = -b / c
    if prod <= 0:
        raise DegenerateParameters("handle core axis crosses the separating axis")
    return prod


def _probe_words_all_hyperbolic(mats, inv_pairs, depth, trace_tol=1e-7):
    """Evaluate all reduced words to `depth`; return min translation length.

    Identity matrices (relator consequences) are skipped; any other image with
    |trace| <= 2 + trace_tol fails the probe.
    """
    n = len(mats)
    G = np.array(mats)
    layer = np.eye(2)[None, :, :]
    last = np.array([-1])
    min_len = math.inf
    for _ in range(depth):
        outs, lets = [], []
        for j in range(n):
            keep = last != inv_pairs[j]
            if not keep.any():
                continue
            outs.append(np.einsum("nij,jk->nik", layer[keep], G[j]))
            lets.append(np.full(int(keep.sum()), j, dtype=np.int8))
        if not outs:
            break
        layer = np.concatenate(outs)
        last = np.concatenate(lets)
        det = layer[:, 0, 0] * layer[:, 1, 1] - layer[:, 0, 1] * layer[:, 1, 0]
        layer /= np.sqrt(np.abs(det))[:, None, None]
        tr = np.abs(layer[:, 0, 0] + layer[:, 1, 1])
        near_one = np.abs(tr - 2.0) <= trace_tol
        if near_one.any():
            sub = layer[near_one]
            off = np.maximum(np.abs(sub[:, 0, 1]), np.abs(sub[:, 1, 0]))
            diag = np.maximum(np.abs(np.abs(sub[:, 0, 0]) - 1.0), np.abs(np.abs(sub[:, 1, 1]) - 1.0))
            not_identity = np.maximum(off, diag) > 1e-6
            if not_identity.any():
                raise NotDiscernedDiscrete("probe found a parabolic class")
        if (tr < 2.0 - trace_tol).any():
            raise NotDiscernedDiscrete("probe found an elliptic class")
        hyp = tr > 2.0 + trace_tol
        if hyp.any():
            min_len = min(min_len, float(np.min(2.0 * np.arccosh(tr[hyp] / 2.0))))
    if not math.isfinite(min_len):
        raise NotDiscernedDiscrete("probe found no hyperbolic class")
    return min_len


def _finish(pres, raw_images, descriptor, probe_depth):
    images = {g: MoebiusElement.from_matrix(m) for g, m in raw_images.items()}
    if pres.mode == GENUS_TWO:
        tab = {g: images[g].matrix for g in pres.generators}
        R = np.eye(2)
        for ch in pres.relator:
            R = R @ (np.linalg.inv(tab[ch.lower()]) if ch.isupper() else tab[ch])
        R /= math.sqrt(abs(np.linalg.det(R)))
        if R[0, 0] + R[1, 1] < 0:
            R = -R
        residual = float(np.max(np.abs(R - np.eye(2))))
        if residual > RELATOR_RESIDUAL_BOUND:
            raise DegenerateParameters(f"relator residual {residual:.2e} exceeds bound")
    else:
        residual = 0.0
    witness = math.nan
    if probe_depth > 0:
        mats, inv_pairs = [], []
        gens = pres.generators
        n = len(gens)
        for g in gens:
            mats.append(images[g].matrix)
        for g in gens:
            mats.append(np.linalg.inv(images[g].matrix))
        inv_pairs = np.array(list(range(n, 2 * n)) + list(range(n)))
        witness = _probe_words_all_hyperbolic(mats, inv_pairs, probe_depth)
    return MarkedRepresentation(
        presentation=pres,
        images=images,
        relator_residual=residual,
        discreteness_witness=witness,
        probe_depth=probe_depth,
        descriptor=descriptor,
    )


def from_fenchel_nielsen(fn: FenchelNielsen, probe_depth: int = DEFAULT_PROBE_DEPTH) -> MarkedRepresentation:
    """Genus-2 representation with pants curves (a, c, [a,b]) of the given lengths."""
    l1, l2, l3 = fn.lengths
    t1, t2, t3 = fn.twists
    if min(l1, l2, l3) < MIN_PANTS_LENGTH:
        raise DegenerateParameters("pants curve length below 1e-6")
    pres = Presentation(GENUS_TWO)
    A1, B1 = _holed_torus(l1, l3, t1)
    A2r, B2r = _holed_torus(l2, l3, t2)
    C1 = _comm(A1, B1)
    C2 = _comm(A2r, B2r)
    P1 = _eig_frame(np.linalg.inv(C1))
    P2 = _eig_frame(C2)
    # match the second commutator to the inverse of the first, then twist along it;
    # full twist t3 = l3 conjugates the second handle by [a,b] (the tau_s remarking)
    E3 = P1 @ _hyp(-t3) @ np.linalg.inv(P1)
    G = E3 @ (P1 @ np.linalg.inv(P2))
    Ginv = np.linalg.inv(G)
    raw = {"a": A1, "b": B1, "c": G @ A2r @ Ginv, "d": G @ B2r @ Ginv}
    # recenter: separating axis through i, basepoint midway between the handle cores
    Q = np.linalg.inv(P1)
    raw = {g: Q @ m @ P1 for g, m in raw.items()}
    h = math.sqrt(math.sqrt(_axis_feet(raw["a"]) * _axis_feet(raw["c"])))
    S = np.diag([1.0 / math.sqrt(h), math.sqrt(h)])
    Sinv = np.diag([math.sqrt(h), 1.0 / math.sqrt(h)])
    raw = {g: S @ m @ Sinv for g, m in raw.items()}
    descriptor = {
        "mode": GENUS_TWO,
        "fn_lengths": tuple(float(x) for x in fn.lengths),
        "fn_twists": tuple(float(x) for x in fn.twists),
        "history": (),
    }
    return _finish(pres, raw, descriptor, probe_depth)


def from_free_pair(tr_a: float, tr_b: float, tr_ab: float,
                   probe_depth: int = DEFAULT_PROBE_DEPTH) -> MarkedRepresentation:
    """Rank-2 free representation with prescribed traces (Fricke normal form)."""
    pres = Presentation(FREE_RANK_2)
    for name, t in (("a", tr_a), ("b", tr_b)):
        if abs(t) <= 2.0 + 1e-9:
            raise NotDiscernedDiscrete(f"generator {name} is not hyperbolic (trace {t})")
    if tr_ab * tr_ab <= 4.0:
        raise NotDiscernedDiscrete(f"product trace {tr_ab} gives a non-hyperbolic ab")
    xi = (tr_ab + math.copysign(math.sqrt(tr_ab * tr_ab - 4.0), tr_ab)) / 2.0
    A = np.array([[tr_a, -1.0], [1.0, 0.0]])
    B = np.array([[0.0, xi], [-1.0 / xi, tr_b]])
    descriptor = {"mode": FREE_RANK_2, "traces": (float(tr_a), float(tr_b), float(tr_ab)), "history": ()}
    return _finish(pres, {"a": A, "b": B}, descriptor, probe_depth)


def evaluate(rep: MarkedRepresentation, w: str) -> MoebiusElement:
    tab = rep.matrix_table()
    M = np.eye(2)
    for ch in w:
        M = M @ tab[ch]
        M /= math.sqrt(abs(np.linalg.det(M)))
    return MoebiusElement.from_matrix(M)


def length_of(rep: MarkedRepresentation, cls) -> float:
    """Translation length of a class (a ConjClass or a word)."""
    w = cls.canonical if hasattr(cls, "canonical") else str(cls)
    return moebius.translation_length(evaluate(rep, w))


def remark(rep: MarkedRepresentation, table: words.EndomorphismTable) -> MarkedRepresentation:
    """Precompose the marking with an automorphism: g -> evaluate(rep, table[g])."""
    raw = {g: evaluate(rep, table[g]).matrix for g in rep.presentation.generators}
    descriptor = dict(rep.descriptor)
    descriptor["history"] = tuple(descriptor.get("history", ())) + (
        tuple(sorted(table.items())),
    )
    # the image group is unchanged, so the witness carries over
    out = _finish(rep.presentation, raw, descriptor, probe_depth=0)
    return MarkedRepresentation(
        presentation=out.presentation,
        images=out.images,
        relator_residual=out.relator_residual,
        discreteness_witness=rep.discreteness_witness,
        probe_depth=rep.probe_depth,
        descriptor=out.descriptor,
    )


def twisted(rep: MarkedRepresentation, curve: str, power: int) -> MarkedRepresentation:
    return remark(rep, words.twist_automorphism(rep.presentation, curve, power))


# ---------------------------------------------------------------------------
# descriptor serialization

def descriptor_lines(rep: MarkedRepresentation) -> list[str]:
    d = rep.descriptor
    lines = [f"mode {d['mode']}"]
    if "fn_lengths" in d:
        lines.append("fn_lengths " + " ".join(f"{x:.16e}" for x in d["fn_lengths"]))
        lines.append("fn_twists " + " ".join(f"{x:.16e}" for x in d["fn_twists"]))
    if "traces" in d:
        lines.append("traces " + " ".join(f"{x:.16e}" for x in d["traces"]))
    for table in d.get("history", ()):
        lines.append("remark " + " ".join(f"{g}:{w}" for g, w in table))
    for g in rep.presentation.generators:
        m = rep.images[g]
        lines.append(f"gen {g} " + " ".join(f"{x:.16e}" for x in (m.a, m.b, m.c, m.d)))
    return lines


def rep_from_descriptor(lines: list[str], probe_depth: int = 0) -> MarkedRepresentation:
    mode = None
    fn_lengths = fn_twists = traces = None
    history = []
    gens = {}
    for line in lines:
        key, _, rest = line.partition(" ")
        if key == "mode":
            mode = rest.strip()
        elif key == "fn_lengths":
            fn_lengths = tuple(float(x) for x in rest.split())
        elif key == "fn_twists":
            fn_twists = tuple(float(x) for x in rest.split())
        elif key == "traces":
            traces = tuple(float(x) for x in rest.split())
        elif key == "remark":
            history.append({p.split(":")[0]: p.split(":")[1] for p in rest.split()})
        elif key == "gen":
            g, vals = rest.split(" ", 1)
            gens[g] = tuple(float(x) for x in vals.split())
    if mode == GENUS_TWO and fn_lengths is not None:
        rep = from_fenchel_nielsen(FenchelNielsen(fn_lengths, fn_twists), probe_depth=probe_depth)
    elif mode == FREE_RANK_2 and traces is not None:
        rep = from_free_pair(*traces, probe_depth=probe_depth)
    else:
        raise ValueError("descriptor lacks construction parameters")
    for table in history:
        rep = remark(rep, table)
    for g, vals in gens.items():
        stored = MoebiusElement.from_entries(*vals)
        got = rep.images[g]
        if max(abs(stored.a - got.a), abs(stored.b - got.b),
               abs(stored.c - got.c), abs(stored.d - got.d)) > 1e-9:
            raise ValueError(f"descriptor matrices disagree with reconstruction for {g!r}")
    return rep
