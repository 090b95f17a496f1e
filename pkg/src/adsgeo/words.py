"""Words in surface-group and free-group generators.

Words are ASCII strings: a lowercase letter is a generator, the corresponding
uppercase letter its inverse.  Rank-2 free groups use generators "ab"; the
genus-2 surface group uses "abcd" with the single relator [a,b][c,d].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator

FREE_RANK_2 = "free2"
GENUS_TWO = "genus2"


class TrivialWord(Exception):
    """Raised when a word reduces to the identity but a nontrivial class is required."""


class UnsupportedCurve(Exception):
    """Raised for a twist request along a curve with no generator-substitution table."""


def invert_word(w: str) -> str:
    return w[::-1].swapcase()


def free_reduce(w: str) -> str:
    out = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def cyclic_reduce(w: str) -> str:
    w = free_reduce(w)
    while len(w) >= 2 and w[0] == w[-1].swapcase():
        w = w[1:-1]
    return w


def _rotations(w: str):
    for i in range(len(w)):
        yield w[i:] + w[:i]


@dataclass(frozen=True)
class Presentation:
    mode: str

    def __post_init__(self):
        if self.mode not in (FREE_RANK_2, GENUS_TWO):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == GENUS_TWO:
            _check_small_cancellation(self.relator)

    @property
    def generators(self) -> str:
        return "ab" if self.mode == FREE_RANK_2 else "abcd"

    @property
    def letters(self) -> str:
        g = self.generators
        return g + g.upper()

    @property
    def relator(self) -> str:
        return "" if self.mode == FREE_RANK_2 else "abABcdCD"

    @property
    def letter_order(self) -> str:
        # a < A < b < B < ... ; fixes the canonicalization total order
        return "".join(g + g.upper() for g in self.generators)


def _relator_pieces(relator: str):
    """All cyclic rotations of the relator and its inverse."""
    rots = set(_rotations(relator)) | set(_rotations(invert_word(relator)))
    return sorted(rots)


def _check_small_cancellation(relator: str):
    """Pieces between distinct rotations of relator^{+-1} must have length <= 1."""
    rots = _relator_pieces(relator)
    n = len(relator)
    for r in rots:
        for s in rots:
            if r == s:
                continue
            k = 0
            while k < n and r[k] == s[k]:
                k += 1
            if k > n // 6:
                raise ValueError(f"presentation is not C'(1/6): piece {r[:k]!r}")


def dehn_reduce(w: str, pres: Presentation) -> str:
    """Dehn's algorithm: replace any subword longer than half the relator.

    Works on the word as written (no wrap-around); the output represents the
    same group element and is never longer than the input.
    """
    if pres.mode != GENUS_TWO:
        return free_reduce(w)
    rots = _relator_pieces(pres.relator)
    half = len(pres.relator) // 2
    w = free_reduce(w)
    changed = True
    while changed:
        changed = False
        for r in rots:
            for k in range(len(r), half, -1):
                u = r[:k]
                i = w.find(u)
                if i >= 0:
                    # u v is a relator rotation, so u = v^{-1}
                    v = r[k:]
                    w = free_reduce(w[:i] + invert_word(v) + w[i + k:])
                    changed = True
                    break
            if changed:
                break
    return w


def cyclic_dehn_reduce(w: str, pres: Presentation) -> str:
    """Dehn-reduce the cyclic word: subwords may wrap around the end."""
    if pres.mode != GENUS_TWO:
        return cyclic_reduce(w)
    rots = _relator_pieces(pres.relator)
    half = len(pres.relator) // 2
    w = cyclic_reduce(w)
    changed = True
    while changed:
        changed = False
        if len(w) <= half:
            break
        doubled = w + w
        for r in rots:
            for k in range(len(r), half, -1):
                u = r[:k]
                if k > len(w):
                    continue
                i = doubled.find(u)
                if 0 <= i < len(w):
                    v = r[k:]
                    rot = doubled[i:i + len(w)]  # rotation of w starting at the match
                    w = cyclic_reduce(invert_word(v) + rot[k:])
                    changed = True
                    break
            if changed:
                break
        w = cyclic_reduce(w)
    return w


@dataclass(frozen=True)
class ConjClass:
    """Canonical unoriented conjugacy-class representative."""

    canonical: str

    @property
    def word_length(self) -> int:
        return len(self.canonical)

    def is_primitive(self) -> bool:
        w = self.canonical
        n = len(w)
        for d in range(1, n):
            if n % d == 0 and w == w[d:] + w[:d]:
                return False
        return True


def _min_rotation(w: str, key):
    return min(_rotations(w), key=key)


def canonical_class(w: str, pres: Presentation) -> ConjClass:
    """Minimal representative over cyclic rotations of the word and its inverse.

    Total order: length, then lexicographic in the order a < A < b < B < ...
    In genus-2 mode the word is cyclically Dehn-reduced first; equality of the
    result is a necessary condition for conjugacy (sufficiency is delegated to
    the spectrum fingerprint merge).
    """
    w = cyclic_dehn_reduce(w, pres)
    if not w:
        raise TrivialWord("word reduces to the identity")
    order = {ch: i for i, ch in enumerate(pres.letter_order)}
    key = lambda s: [order[ch] for ch in s]
    best = min(_min_rotation(w, key), _min_rotation(invert_word(w), key), key=key)
    return ConjClass(best)


def enumerate_classes(pres: Presentation, max_word_length: int) -> Iterator[ConjClass]:
    """All distinct classes with canonical length <= max_word_length, shortest first.

    Exhaustive and exact for the free group; in genus-2 mode the stream
    consists of Dehn-reduced cyclic canonicals (candidate classes).
    """
    letters = pres.letters
    inv = {ch: ch.swapcase() for ch in letters}
    order = {ch: i for i, ch in enumerate(pres.letter_order)}

    def emit(length):
        out = []
        stack = [("", None)]
        while stack:
            w, last = stack.pop()
            if len(w) == length:
                if w[0] == inv[w[-1]] and length > 1:
                    continue
                try:
                    cls = canonical_class(w, pres)
                except TrivialWord:
                    continue
                if cls.canonical == w:
                    out.append(cls)
                continue
            for ch in reversed(letters):
                if last is not None and ch == inv[last]:
                    continue
                stack.append((w + ch, ch))
        out.sort(key=lambda c: [order[ch] for ch in c.canonical])
        return out

    for length in range(1, max_word_length + 1):
        yield from emit(length)


EndomorphismTable = Dict[str, str]


def identity_table(pres: Presentation) -> EndomorphismTable:
    return {g: g for g in pres.generators}


def apply_automorphism(table: EndomorphismTable, w: str) -> str:
    out = []
    for ch in w:
        img = table[ch.lower()]
        out.append(invert_word(img) if ch.isupper() else img)
    return free_reduce("".join(out))


def compose_tables(first: EndomorphismTable, second: EndomorphismTable) -> EndomorphismTable:
    """Table of first o second: apply `second`, then `first`."""
    return {g: apply_automorphism(first, w) for g, w in second.items()}


def table_power(table: EndomorphismTable, n: int, pres: Presentation) -> EndomorphismTable:
    if n < 0:
        return table_power(invert_table(table, pres), -n, pres)
    out = identity_table(pres)
    for _ in range(n):
        out = compose_tables(table, out)
    return out


def invert_table(table: EndomorphismTable, pres: Presentation) -> EndomorphismTable:
    """Inverse of the supported twist tables (transvection-style substitutions)."""
    inv = {}
    for g, w in table.items():
        if w == g:
            inv[g] = g
            continue
        # w is of the form  g*u, u*g, or u g u^{-1}; invert by replacing u -> u^{-1}
        if w.startswith(g):
            inv[g] = free_reduce(g + invert_word(w[len(g):]))
        elif w.endswith(g):
            inv[g] = free_reduce(invert_word(w[:-len(g)]) + g)
        else:
            i = w.find(g)
            if i < 0:
                raise ValueError(f"cannot invert table entry {g!r} -> {w!r}")
            u = w[:i]
            inv[g] = free_reduce(invert_word(u) + g + u)
    return inv


SEPARATING_CURVE = "abAB"


def twist_automorphism(pres: Presentation, curve: str, power: int) -> EndomorphismTable:
    """Generator-substitution table of the Dehn twist along a supported curve.

    Supported curves: each generator, and (genus 2 only) the separating curve
    [a,b].  A twist along generator g sends its dual generator h to h*g^power;
    the separating twist conjugates the second-handle generators by [a,b].
    """
    curve = curve if curve in pres.generators else cyclic_reduce(curve)
    table = identity_table(pres)
    if power == 0:
        return table
    if pres.mode == FREE_RANK_2:
        duals = {"a": "b", "b": "a"}
    else:
        duals = {"a": "b", "b": "a", "c": "d", "d": "c"}
    if curve in duals:
        g, h = curve, duals[curve]
        core = g if power > 0 else g.swapcase()
        table[h] = h + core * abs(power)
        return table
    if pres.mode == GENUS_TWO and curve in (SEPARATING_CURVE, canonical_class(SEPARATING_CURVE, pres).canonical):
        s = SEPARATING_CURVE if power > 0 else invert_word(SEPARATING_CURVE)
        pre = s * abs(power)
        post = invert_word(pre)
        table["c"] = free_reduce(pre + "c" + post)
        table["d"] = free_reduce(pre + "d" + post)
        return table
    raise UnsupportedCurve(f"no twist table for curve {curve!r}")


def validate_twist_table(table: EndomorphismTable, pres: Presentation) -> str:
    """Image of the relator under the table; must Dehn-reduce to the identity."""
    if pres.mode != GENUS_TWO:
        return ""
    img = apply_automorphism(table, pres.relator)
    return cyclic_dehn_reduce(img, pres)
