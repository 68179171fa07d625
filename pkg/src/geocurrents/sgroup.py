"""Group combinatorics for the two supported presentations.

Letters are signed integers: ``k`` is the k-th basis generator (1-based) and
``-k`` its inverse.  ``genus2`` is the closed genus-2 surface group acting by
side pairings of a regular octagon with interior angles pi/4; ``free2`` is a
rank-two Schottky group.
"""
from __future__ import annotations

import functools
import heapq
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .config import get_config
from .errors import (BoundExceededError, ConjugacyDiagnosticError, NoLimitError, ParseError,
                     PreconditionError, ResourceError)
from .hypgeom import IDENTITY, Isometry, compose, diag, rotation

Word = tuple[int, ...]

_TOKEN = re.compile(r"[A-Za-z]\d*")


def _mirror(m: Isometry) -> Isometry:
    """Conjugate by the reflection z -> -conj(z)."""
    return Isometry(m.a, -m.b, -m.c, m.d)


def _octagon_generators() -> tuple[Isometry, ...]:
    r = math.acosh(1.0 + math.sqrt(2.0))
    t = diag(math.exp(r))
    rot = rotation(math.pi / 4.0)

    def pairing(i: int, j: int) -> Isometry:
        # sends side i of the octagon onto side j
        return (rot ** j) @ t @ (rot ** (-(i + 4)))

    gens = (pairing(2, 0), pairing(1, 3), pairing(6, 4), pairing(5, 7))
    return tuple(_mirror(g) for g in gens)


def _schottky_generators() -> tuple[Isometry, ...]:
    a = diag(3.0)
    quarter = rotation(math.pi / 2.0)
    return a, quarter @ a @ quarter.inverse()


class Presentation:
    """Generators, relators and their isometries; one shared instance per mode."""

    def __init__(self, mode: str, names: Sequence[str], generators: Sequence[Isometry],
                 relators: Sequence[Word]):
        self.mode = mode
        self.names = tuple(names)
        self.generators = tuple(generators)
        self.relators = tuple(tuple(r) for r in relators)
        self.rank = len(self.names)
        self.alphabet: tuple[int, ...] = tuple(sorted(
            [k for k in range(1, self.rank + 1)] + [-k for k in range(1, self.rank + 1)],
            key=letter_key))
        self._letter_iso = {k: g for k, g in enumerate(self.generators, 1)}
        self._letter_iso.update({-k: g.inverse() for k, g in enumerate(self.generators, 1)})
        self._lookup = {n: k for k, n in enumerate(self.names, 1)}
        self._dehn = _dehn_table(self.relators)
        self._half = _half_table(self.relators)
        self.identity = GroupElement(self, (), IDENTITY)

    def __repr__(self) -> str:
        return f"Presentation({self.mode!r})"

    def __reduce__(self):
        return (get_presentation, (self.mode,))

    # -- parsing and printing --
    def letter_name(self, s: int) -> str:
        n = self.names[abs(s) - 1]
        return n if s > 0 else n[0].upper() + n[1:]

    def format(self, word: Word) -> str:
        return " ".join(self.letter_name(s) for s in word)

    def parse(self, text: str) -> Word:
        text = text.strip()
        if text in ("", "e", "1"):
            return ()
        stripped = re.sub(r"\s+", "", text)
        tokens = _TOKEN.findall(stripped)
        if "".join(tokens) != stripped:
            raise ParseError(f"cannot parse word {text!r}")
        out = []
        for tok in tokens:
            low = tok[0].lower() + tok[1:]
            if low not in self._lookup:
                raise ParseError(f"unknown generator {tok!r} in {self.mode} mode")
            k = self._lookup[low]
            out.append(k if tok[0].islower() else -k)
        return tuple(out)

    def letter_iso(self, s: int) -> Isometry:
        return self._letter_iso[s]

    # -- words to elements --
    def evaluate(self, word: Word) -> Isometry:
        m = IDENTITY
        for s in word:
            m = compose(m, self._letter_iso[s])
        return m

    def element(self, word: Word | str | "GroupElement") -> "GroupElement":
        if isinstance(word, GroupElement):
            return word
        if isinstance(word, str):
            word = self.parse(word)
        w = self.reduce_word(tuple(word))
        return GroupElement(self, w, self.evaluate(w))

    def __call__(self, word) -> "GroupElement":
        return self.element(word)

    def generator(self, name: str) -> "GroupElement":
        return self.element(name)

    def basis(self) -> list["GroupElement"]:
        return [self.element((k,)) for k in range(1, self.rank + 1)]

    # -- combinatorics --
    def reduce_word(self, word: Word) -> Word:
        w = free_reduce(word)
        if self._dehn:
            w = _dehn_reduce(w, self._dehn)
        return w

    def relator_residual(self) -> float:
        worst = 0.0
        for r in self.relators:
            m = self.evaluate(r)
            worst = max(worst, min(abs(m.a - 1) + abs(m.b) + abs(m.c) + abs(m.d - 1),
                                   abs(m.a + 1) + abs(m.b) + abs(m.c) + abs(m.d + 1)))
        return worst


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A reduced word together with its evaluated isometry."""

    pres: Presentation
    word: Word
    iso: Isometry = field(repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.pres is other.pres and self.word == other.word

    def __hash__(self) -> int:
        return hash((self.pres.mode, self.word))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.pres.element(self.word + other.word)

    def inverse(self) -> "GroupElement":
        return self.pres.element(invert(self.word))

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        return self.pres.element(self.word * n)

    def __len__(self) -> int:
        return len(self.word)

    @property
    def is_identity(self) -> bool:
        return not self.word

    def same_element(self, other: "GroupElement") -> bool:
        return not self.pres.reduce_word(self.word + invert(other.word))

    def __str__(self) -> str:
        return self.pres.format(self.word) or "e"

    def __repr__(self) -> str:
        return f"GroupElement({str(self)!r})"


def letter_key(s: int) -> int:
    """Shortlex letter order a1 < A1 < b1 < B1 < a2 < ..."""
    return 2 * (abs(s) - 1) + (1 if s < 0 else 0)


def shortlex_key(word: Word) -> tuple:
    return (len(word), tuple(letter_key(s) for s in word))


def invert(word: Word) -> Word:
    return tuple(-s for s in reversed(word))


def free_reduce(word: Iterable[int]) -> Word:
    out: list[int] = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def cyclic_free_reduce(word: Word) -> Word:
    w = free_reduce(word)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def _cyclic_relators(relators: Sequence[Word]) -> list[Word]:
    out = []
    for r in relators:
        for base in (r, invert(r)):
            for k in range(len(base)):
                rot = base[k:] + base[:k]
                if rot not in out:
                    out.append(rot)
    return out


def _dehn_table(relators: Sequence[Word]) -> dict[Word, Word]:
    """Subwords longer than half a cyclic relator mapped to their shorter complement."""
    table: dict[Word, Word] = {}
    for rot in _cyclic_relators(relators):
        n = len(rot)
        for k in range(n // 2 + 1, n + 1):
            table.setdefault(rot[:k], invert(rot[k:]))
    return table


def _half_table(relators: Sequence[Word]) -> dict[Word, list[Word]]:
    table: dict[Word, list[Word]] = {}
    for rot in _cyclic_relators(relators):
        n = len(rot)
        if n % 2 == 0:
            table.setdefault(rot[: n // 2], []).append(invert(rot[n // 2:]))
    return table


def _dehn_reduce(word: Word, table: dict[Word, Word]) -> Word:
    lengths = sorted({len(k) for k in table}, reverse=True)
    w = list(word)
    i = 0
    while i < len(w):
        for k in lengths:
            piece = tuple(w[i:i + k])
            if len(piece) == k and piece in table:
                w = list(free_reduce(w[:i] + list(table[piece]) + w[i + k:]))
                i = max(0, i - max(lengths))
                break
        else:
            i += 1
    return tuple(w)


def _cyclic_dehn(word: Word, table: dict[Word, Word]) -> Word:
    w = cyclic_free_reduce(word)
    lengths = sorted({len(k) for k in table}, reverse=True)
    changed = True
    while changed and w:
        changed = False
        n = len(w)
        doubled = w + w
        for i in range(n):
            for k in lengths:
                if k > n:
                    continue
                piece = doubled[i:i + k]
                if piece in table:
                    rotated = doubled[i:i + n]
                    w = cyclic_free_reduce(table[piece] + rotated[k:])
                    changed = True
                    break
            if changed:
                break
    return w


def min_rotation(word: Word) -> Word:
    if not word:
        return word
    return min((word[k:] + word[:k] for k in range(len(word))), key=shortlex_key)


# ---------------------------------------------------------------------------
# conjugacy
# ---------------------------------------------------------------------------

_HALF_SWAP_CAP = 4096


def _cyclic_normal(pres: Presentation, word: Word) -> Word:
    if pres._dehn:
        return _cyclic_dehn(word, pres._dehn)
    return cyclic_free_reduce(word)


def cyclic_representatives(w: GroupElement) -> set[Word]:
    """Cyclically reduced words (as least rotations) representing the class of ``w``.

    In the surface group, cyclic Dehn reduction is followed by the closure
    under exchanges of half-relators, which relates the cyclically reduced
    representatives of one class at the lengths exercised here.
    """
    pres = w.pres
    start = _cyclic_normal(pres, w.word)
    if not pres._half:
        return {min_rotation(start)}
    while True:
        seen = {min_rotation(start)}
        frontier = [start]
        shorter = None
        while frontier and shorter is None and len(seen) <= _HALF_SWAP_CAP:
            nxt = []
            for cw in frontier:
                n = len(cw)
                doubled = cw + cw
                for i in range(n if n >= 4 else 0):
                    piece = doubled[i:i + 4]
                    for repl in pres._half.get(piece, ()):
                        cand = _cyclic_normal(pres, repl + doubled[i + 4:i + n])
                        if len(cand) < len(start):
                            shorter = cand
                            break
                        key = min_rotation(cand)
                        if key not in seen:
                            seen.add(key)
                            nxt.append(cand)
                    if shorter is not None:
                        break
                if shorter is not None:
                    break
            frontier = nxt
        if shorter is None:
            return seen
        start = shorter


def conjugacy_normal_form(w: GroupElement) -> GroupElement:
    """Shortlex-least cyclic word in the conjugacy class of ``w``."""
    pres = w.pres
    nf = min(cyclic_representatives(w), key=shortlex_key)
    el = GroupElement(pres, nf, pres.evaluate(nf))
    if nf and abs(abs(el.iso.trace) - abs(w.iso.trace)) > 1e-7 * max(1.0, abs(w.iso.trace)):
        raise ConjugacyDiagnosticError(
            f"normal form {pres.format(nf)!r} disagrees in trace with {w}")
    return el


def _period(word: Word) -> int:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word == word[:p] * (n // p):
            return p
    return n


def primitive_root(w: GroupElement) -> tuple[GroupElement, int]:
    """(u, m) with w conjugate to u^m and u not a proper power."""
    pres = w.pres
    reps = cyclic_representatives(w)
    if not next(iter(reps)):
        return pres.identity, 1
    best = min(reps, key=lambda r: (_period(r), shortlex_key(r)))
    p = _period(best)
    root = GroupElement(pres, best[:p], pres.evaluate(best[:p]))
    return root, len(best) // p


def are_conjugate(u: GroupElement, v: GroupElement) -> bool:
    return conjugacy_normal_form(u).word == conjugacy_normal_form(v).word


def is_cyclically_reduced(word: Word) -> bool:
    return not word or word[0] != -word[-1]


# ---------------------------------------------------------------------------
# balls
# ---------------------------------------------------------------------------

class _ElementSet:
    """Approximate set of isometries keyed by rounded entries with neighbour probing."""

    def __init__(self, cell: float = 1e-6):
        self.cell = cell
        self.buckets: dict[tuple[int, int], list[Isometry]] = {}

    def _key(self, m: Isometry) -> tuple[int, int]:
        return (math.floor(m.a / self.cell), math.floor(m.b / self.cell))

    def add(self, m: Isometry) -> bool:
        """Insert and return True if ``m`` was not already present."""
        ka, kb = self._key(m)
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                for other in self.buckets.get((ka + da, kb + db), ()):
                    if m.close_to(other, 1e-8):
                        return False
        self.buckets.setdefault((ka, kb), []).append(m)
        return True


def ball_size_bound(pres: Presentation, L: int) -> int:
    k = 2 * pres.rank
    return 1 + k * sum((k - 1) ** j for j in range(L))


def ball(L: int, pres: Presentation) -> Iterator[GroupElement]:
    """Reduced words of length <= L, one per element, in shortlex order."""
    cfg = get_config()
    if L < 0:
        raise PreconditionError("ball radius must be non-negative")
    if L > cfg.ball_max or ball_size_bound(pres, L) > cfg.ball_max_elements:
        raise ResourceError(f"ball of radius {L} exceeds configured resources")
    yield from _ball_cached(pres.mode, L)


@functools.lru_cache(maxsize=16)
def _ball_cached(mode: str, L: int) -> tuple[GroupElement, ...]:
    pres = get_presentation(mode)
    seen = _ElementSet()
    seen.add(IDENTITY)
    out = [pres.identity]
    level = [pres.identity]
    for length in range(1, L + 1):
        nxt = []
        for g in level:
            for s in pres.alphabet:
                if g.word and g.word[-1] == -s:
                    continue
                w = pres.reduce_word(g.word + (s,))
                if len(w) != length:
                    continue
                m = compose(g.iso, pres.letter_iso(s))
                if seen.add(m):
                    nxt.append(GroupElement(pres, w, m))
        out.extend(nxt)
        level = nxt
    return tuple(out)


def ball_list(L: int, pres: Presentation) -> list[GroupElement]:
    return list(ball(L, pres))


def conjugacy_classes(L: int, pres: Presentation) -> list[GroupElement]:
    """Normal forms of the nontrivial classes met by ball(L), sorted shortlex."""
    forms = {}
    for g in ball(L, pres):
        if g.is_identity:
            continue
        nf = conjugacy_normal_form(g)
        forms.setdefault(nf.word, nf)
    return [forms[k] for k in sorted(forms, key=shortlex_key)]


# ---------------------------------------------------------------------------
# generating sets and word length
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratingSet:
    elements: tuple[GroupElement, ...]
    weights: tuple[float, ...]
    symmetric: bool = True

    def __post_init__(self) -> None:
        if len(self.elements) != len(self.weights):
            raise PreconditionError("one weight per element is required")
        if any(w <= 0 for w in self.weights):
            raise PreconditionError("weights must be positive")
        if not self.elements:
            raise PreconditionError("empty generating set")

    @property
    def pres(self) -> Presentation:
        return self.elements[0].pres

    @classmethod
    def standard(cls, pres: Presentation, weight: float = 1.0) -> "GeneratingSet":
        return cls(tuple(pres.basis()), tuple(weight for _ in range(pres.rank)))

    @classmethod
    def from_words(cls, pres: Presentation, words: Iterable[str | Word],
                   weights: Iterable[float] | None = None, symmetric: bool = True) -> "GeneratingSet":
        els = tuple(pres.element(w) for w in words)
        ws = tuple(float(x) for x in weights) if weights is not None else tuple(1.0 for _ in els)
        return cls(els, ws, symmetric)

    @classmethod
    def from_json(cls, pres: Presentation, data: list[dict]) -> "GeneratingSet":
        return cls.from_words(pres, [d["word"] for d in data],
                              [float(d.get("weight", 1.0)) for d in data])

    def moves(self) -> list[tuple[GroupElement, float]]:
        out = list(zip(self.elements, self.weights))
        if self.symmetric:
            out += [(e.inverse(), w) for e, w in zip(self.elements, self.weights)]
        return out

    def is_standard_uniform(self) -> bool:
        pres = self.pres
        words = sorted(e.word for e in self.elements)
        return (words == sorted((k,) for k in range(1, pres.rank + 1)) and self.symmetric
                and len(set(self.weights)) == 1)

    def syllable_costs(self) -> dict[int, list[tuple[int, float]]] | None:
        """Per basis letter, the (exponent, weight) moves, if every element is a basis power."""
        out: dict[int, list[tuple[int, float]]] = {k: [] for k in range(1, self.pres.rank + 1)}
        for e, w in self.moves():
            if not e.word or len(set(abs(s) for s in e.word)) != 1:
                return None
            letter = abs(e.word[0])
            exp = sum(1 if s > 0 else -1 for s in e.word)
            out[letter].append((exp, w))
        return out


def _syllables(word: Word) -> list[tuple[int, int]]:
    """Cyclic syllable decomposition [(letter, exponent)] of a cyclically reduced word."""
    if not word:
        return []
    start = 0
    if len(set(abs(s) for s in word)) > 1:
        while abs(word[start - 1]) == abs(word[start]):
            start += 1
    rot = word[start:] + word[:start]
    out: list[tuple[int, int]] = []
    for s in rot:
        if out and out[-1][0] == abs(s):
            out[-1] = (abs(s), out[-1][1] + (1 if s > 0 else -1))
        else:
            out.append((abs(s), 1 if s > 0 else -1))
    return out


@functools.lru_cache(maxsize=4096)
def _power_cost(moves: tuple[tuple[int, float], ...], e: int) -> float:
    """Least total weight of moves whose exponents sum to e (Dijkstra on the integers)."""
    if e == 0:
        return 0.0
    span = abs(e) + max(abs(m) for m, _ in moves) + 1
    dist = {0: 0.0}
    heap = [(0.0, 0)]
    while heap:
        d, v = heapq.heappop(heap)
        if v == e:
            return d
        if d > dist.get(v, math.inf):
            continue
        for m, w in moves:
            u = v + m
            if abs(u) > span:
                continue
            if d + w < dist.get(u, math.inf):
                dist[u] = d + w
                heapq.heappush(heap, (d + w, u))
    raise BoundExceededError(f"exponent {e} not reachable by the given powers")


def _element_dijkstra(targets: list[Isometry], gs: GeneratingSet, bound: int) -> float:
    """Weighted Cayley-graph distance from the identity to the nearest target."""
    moves = gs.moves()
    seen = _ElementSet()
    heap: list[tuple[float, int, Isometry]] = [(0.0, 0, IDENTITY)]
    counter = 1
    expanded = 0
    while heap:
        d, _, m = heapq.heappop(heap)
        if not seen.add(m):
            continue
        if any(m.close_to(t, 1e-8) for t in targets):
            return d
        expanded += 1
        if expanded > bound:
            break
        for e, w in moves:
            heapq.heappush(heap, (d + w, counter, compose(m, e.iso)))
            counter += 1
    raise BoundExceededError(f"no expression found within {bound} expanded elements")


def word_length(w: GroupElement, gs: GeneratingSet) -> float:
    """Least weighted length of a cyclic conjugate of ``w`` over the generating set."""
    if w.pres is not gs.pres:
        raise PreconditionError("element and generating set use different presentations")
    nf = conjugacy_normal_form(w)
    if nf.is_identity:
        return 0.0
    costs = gs.syllable_costs() if not nf.pres.relators else None
    if costs is not None:
        total = 0.0
        for letter, e in _syllables(nf.word):
            moves = tuple(sorted(costs[letter]))
            if not moves:
                raise BoundExceededError(f"generator {letter} not covered by the set")
            total += _power_cost(moves, e)
        return total
    if nf.pres.mode == "genus2" and gs.is_standard_uniform():
        from .tiling import wall_crossings
        return gs.weights[0] * wall_crossings(nf)
    bound = get_config().word_search_bound
    word = nf.word
    targets = [nf.pres.evaluate(word[k:] + word[:k]) for k in range(len(word))]
    return _element_dijkstra(targets, gs, bound)


# ---------------------------------------------------------------------------
# stable length
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StableLength:
    value: float
    spread: float
    sequence: tuple[float, ...]
    method: str


def stable_length_report(f: Callable[[GroupElement], float], w: GroupElement, N: int = 16,
                         K: int = 4, tol: float = 1e-7) -> StableLength:
    """Limit of f(w^n)/n via Fekete's lemma, with a spread diagnostic."""
    if N < 1:
        raise PreconditionError("N must be positive")
    seq = [float(f(w ** n)) for n in range(1, N + 1)]
    ratios = [a / n for n, a in enumerate(seq, 1)]
    tail = ratios[-min(K, N):]
    spread = max(tail) - min(tail)

    def holds(sign: int) -> bool:
        return all(sign * (seq[m + n - 1] - seq[m - 1] - seq[n - 1]) <= tol
                   for m in range(1, N + 1) for n in range(1, N + 1 - m))

    if holds(1):
        return StableLength(min(ratios), spread, tuple(seq), "subadditive-inf")
    if holds(-1):
        return StableLength(max(ratios), spread, tuple(seq), "superadditive-sup")
    if spread <= tol:
        return StableLength(sum(tail) / len(tail), spread, tuple(seq), "plateau")
    raise NoLimitError("f(w^n)/n neither sub/superadditive nor settled", seq)


def stable_length(f: Callable[[GroupElement], float], w: GroupElement, N: int = 16) -> float:
    return stable_length_report(f, w, N).value


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def get_presentation(mode: str) -> Presentation:
    if mode == "genus2":
        pres = Presentation("genus2", ("a1", "b1", "a2", "b2"), _octagon_generators(),
                            [(1, 2, -1, -2, 3, 4, -3, -4)])
        if pres.relator_residual() > 1e-7:
            raise ConjugacyDiagnosticError("octagon generators fail the surface relation")
        return pres
    if mode == "free2":
        return Presentation("free2", ("a", "b"), _schottky_generators(), [])
    raise PreconditionError(f"unknown group mode {mode!r}")
