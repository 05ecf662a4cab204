"""Reduced words, canonical forms and combinatorics in graph products of groups.

Elements of the graph product are stored as canonical words: reduced letter
sequences that are lexicographically least among all rearrangements (the
rearrangement class of a reduced word is its orbit under swapping adjacent
letters whose vertices are joined in the graph).  The canonical form is
computed greedily by repeatedly extracting the smallest letter that can be
commuted to the front; a plain "swap descending neighbours" bubble pass is not
enough, since reaching the lexicographic minimum can require temporarily
ascending swaps.

A word is *reduced* when for every pair of equal-vertex positions k < l some
intermediate position p carries a vertex not joined to it; equivalently, no
two same-vertex letters can be brought together by allowed swaps.  All
equivalent reduced words are permutations of one another and have equal
length, so word length and the vertex multiset are well defined on elements.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import (
    BudgetExceededError,
    ContextMismatchError,
    ElementOutOfRangeError,
    EmptySetError,
    GPMultError,
    NoV0LetterError,
)
from .graphgroup import FiniteGroup, SimplicialGraph

DEFAULT_BUDGET = 100_000


class Letter(NamedTuple):
    """One syllable of a word: a non-identity element of one vertex group."""

    vertex: int  # vertex index in the graph's declared order
    elem: int    # group element index; stored words never carry the identity


@dataclass(frozen=True, eq=False)
class GPElement:
    """Canonical (lexicographically least reduced) word in a graph product."""

    ctx: "WordContext" = field(repr=False)
    letters: tuple = ()

    def __eq__(self, other):
        return (
            isinstance(other, GPElement)
            and self.ctx is other.ctx
            and self.letters == other.letters
        )

    def __hash__(self):
        return hash(self.letters)

    def __len__(self):
        return len(self.letters)

    @property
    def vertex_word(self) -> tuple:
        return tuple(l.vertex for l in self.letters)

    def __repr__(self):
        return f"GPElement{list(map(tuple, self.letters))!r}"


def _sort_key(x: GPElement):
    return (len(x.letters), x.letters)


@dataclass(frozen=True)
class StandardForm:
    """Decomposition x = y * c * a * b singled out by the length minimizations.

    ``a`` is a letter at the distinguished vertex ``v0``; ``b`` is shortest
    such that the prefix through ``a`` realizes the maximal non-commuting
    count ``nc`` over the truncation down-set of x, and ``y`` is shortest with
    y*a below x realizing the same count.
    """

    y: GPElement
    c: GPElement
    a: Letter
    b: GPElement
    v0: int
    nc: int


class WordContext:
    """A graph together with one finite group per vertex.

    Owns every word-level operation; elements are only meaningful relative to
    the context that produced them, and mixing contexts raises
    ``ContextMismatchError``.
    """

    def __init__(self, graph: SimplicialGraph, groups: Sequence[FiniteGroup]):
        if len(groups) != graph.n:
            raise ContextMismatchError(
                "need one group per vertex", vertices=graph.n, groups=len(groups)
            )
        self.graph = graph
        self.groups = tuple(groups)
        self._downset_cache: dict = {}
        self._sf_cache: dict = {}

    # ------------------------------------------------------------------
    # constructors

    def identity(self) -> GPElement:
        return GPElement(self, ())

    def letter(self, vertex: int, elem: int) -> GPElement:
        """Single-letter element; the group identity yields the empty word."""
        self._check_letter(vertex, elem)
        if elem == self.groups[vertex].identity:
            return self.identity()
        return GPElement(self, (Letter(vertex, elem),))

    def generators(self):
        """All single non-identity letters, in (vertex, element) order."""
        out = []
        for v, grp in enumerate(self.groups):
            for g in range(grp.order):
                if g != grp.identity:
                    out.append(Letter(v, g))
        return out

    def _check_letter(self, vertex: int, elem: int) -> None:
        if not (0 <= vertex < self.graph.n):
            raise ElementOutOfRangeError("vertex index out of range", vertex=vertex)
        if not (0 <= elem < self.groups[vertex].order):
            raise ElementOutOfRangeError(
                "group element out of range", vertex=vertex, elem=elem
            )

    def _check_ctx(self, *elements) -> None:
        for x in elements:
            if not isinstance(x, GPElement) or x.ctx is not self:
                raise ContextMismatchError("element belongs to a different context")

    # ------------------------------------------------------------------
    # normalization

    def normalize(self, raw) -> GPElement:
        """Canonical form of an arbitrary letter sequence.

        Accepts (vertex, elem) pairs; identity letters are dropped, mergeable
        same-vertex letters are combined (possibly cancelling), and the
        resulting reduced word is rotated to its lexicographic minimum.
        """
        letters = []
        for v, g in raw:
            self._check_letter(v, g)
            if g != self.groups[v].identity:
                letters.append(Letter(v, g))
        reduced = self._reduce(letters)
        return GPElement(self, tuple(self._canonical(reduced)))

    def _reduce(self, letters: list) -> list:
        """Merge same-vertex letters whenever only commuting letters separate them."""
        work = list(letters)
        changed = True
        while changed:
            changed = False
            n = len(work)
            for i in range(n):
                vi = work[i].vertex
                for j in range(i + 1, n):
                    if work[j].vertex != vi:
                        continue
                    # first same-vertex successor; later ones are blocked by this one
                    if all(
                        self.graph.adjacent(vi, work[p].vertex)
                        for p in range(i + 1, j)
                    ):
                        grp = self.groups[vi]
                        g = grp.mul(work[i].elem, work[j].elem)
                        del work[j]
                        if g == grp.identity:
                            del work[i]
                        else:
                            work[i] = Letter(vi, g)
                        changed = True
                    break
                if changed:
                    break
        return work

    def _canonical(self, reduced: list) -> list:
        """Lexicographically least rearrangement of a reduced word.

        Greedy: among letters that commute with everything before them, pull
        the one with the smallest vertex to the front, then recurse on the
        rest.  Same-vertex letters never overtake each other because a vertex
        is not adjacent to itself.
        """
        rem = list(reduced)
        out = []
        while rem:
            best = None
            best_idx = -1
            for j, (v, _) in enumerate(rem):
                if all(self.graph.adjacent(v, rem[i].vertex) for i in range(j)):
                    if best is None or v < best:
                        best, best_idx = v, j
            out.append(rem.pop(best_idx))
        return out

    def is_reduced(self, vertices) -> bool:
        """Reducedness of a vertex word (no group elements involved)."""
        vs = tuple(vertices)
        for k in range(len(vs)):
            for l in range(k + 1, len(vs)):
                if vs[k] != vs[l]:
                    continue
                if not any(
                    not self.graph.adjacent(vs[k], vs[p]) for p in range(k + 1, l)
                ):
                    return False
        return True

    # ------------------------------------------------------------------
    # group operations

    def multiply(self, x: GPElement, y: GPElement) -> GPElement:
        self._check_ctx(x, y)
        return self.normalize(x.letters + y.letters)

    def product(self, *xs) -> GPElement:
        out = self.identity()
        for x in xs:
            out = self.multiply(out, x)
        return out

    def inverse(self, x: GPElement) -> GPElement:
        self._check_ctx(x)
        inv = [
            Letter(l.vertex, self.groups[l.vertex].inverse(l.elem))
            for l in reversed(x.letters)
        ]
        return self.normalize(inv)

    # ------------------------------------------------------------------
    # rearrangements and the truncation order

    def rearrangements(self, x: GPElement, budget: int = DEFAULT_BUDGET):
        """All reduced letter sequences equivalent to x, sorted.

        Breadth-first search over adjacent commuting swaps; raises
        ``BudgetExceededError`` when the class exceeds ``budget`` sequences.
        """
        self._check_ctx(x)
        return self._rearrangements_seq(x.letters, budget)

    def _rearrangements_seq(self, letters: tuple, budget: int):
        seen = {tuple(letters)}
        frontier = deque(seen)
        while frontier:
            w = frontier.popleft()
            for i in range(len(w) - 1):
                if self.graph.adjacent(w[i].vertex, w[i + 1].vertex):
                    s = w[:i] + (w[i + 1], w[i]) + w[i + 2 :]
                    if s not in seen:
                        seen.add(s)
                        if len(seen) > budget:
                            raise BudgetExceededError(
                                "rearrangement class exceeds budget", budget=budget
                            )
                        frontier.append(s)
        return sorted(seen)

    def _vertex_rearrangements(self, vertices: tuple, budget: int = DEFAULT_BUDGET):
        seen = {tuple(vertices)}
        frontier = deque(seen)
        while frontier:
            w = frontier.popleft()
            for i in range(len(w) - 1):
                if self.graph.adjacent(w[i], w[i + 1]):
                    s = w[:i] + (w[i + 1], w[i]) + w[i + 2 :]
                    if s not in seen:
                        seen.add(s)
                        if len(seen) > budget:
                            raise BudgetExceededError(
                                "rearrangement class exceeds budget", budget=budget
                            )
                        frontier.append(s)
        return sorted(seen)

    def _from_reduced(self, letters) -> GPElement:
        return GPElement(self, tuple(self._canonical(list(letters))))

    def _immediate_truncations(self, z: GPElement):
        out = set()
        for r in self._rearrangements_seq(z.letters, DEFAULT_BUDGET):
            if r:
                out.add(self._from_reduced(r[1:]))
                out.add(self._from_reduced(r[:-1]))
        return out

    def leq(self, x: GPElement, y: GPElement, budget: int = DEFAULT_BUDGET) -> bool:
        """Truncation order: x below y when x arises by repeatedly dropping a
        first or last letter from rearrangements of y."""
        self._check_ctx(x, y)
        if x == y:
            return True
        if len(x) >= len(y):
            return False
        seen = {y}
        frontier = deque([y])
        while frontier:
            z = frontier.popleft()
            for t in self._immediate_truncations(z):
                if t == x:
                    return True
                if t not in seen:
                    seen.add(t)
                    if len(seen) > budget:
                        raise BudgetExceededError(
                            "truncation search exceeds budget", budget=budget
                        )
                    if len(t) > len(x):
                        frontier.append(t)
        return False

    def downset(self, x: GPElement, max_size: int = 10_000):
        """All elements below x in the truncation order (x included), sorted."""
        self._check_ctx(x)
        cached = self._downset_cache.get(x.letters)
        if cached is None:
            cached = self.complete_closure([x], max_size=max_size)
            self._downset_cache[x.letters] = cached
        return cached

    def complete_closure(self, elements, max_size: int = 10_000):
        """Smallest truncation-closed set containing the input and the identity.

        Closed means: with every member, all one-letter truncations of all its
        rearrangements are members too.  Sorted deterministically by (length,
        letters).
        """
        seed = {self.identity()}
        for x in elements:
            self._check_ctx(x)
            seed.add(x)
        out = set(seed)
        todo = deque(sorted(seed, key=_sort_key))
        while todo:
            z = todo.popleft()
            for t in self._immediate_truncations(z):
                if t not in out:
                    out.add(t)
                    if len(out) > max_size:
                        raise BudgetExceededError(
                            "closure exceeds size budget", max_size=max_size
                        )
                    todo.append(t)
        return tuple(sorted(out, key=_sort_key))

    def is_complete(self, elements) -> bool:
        """Whether a set is already truncation-closed and contains the identity."""
        xs = set(elements)
        if self.identity() not in xs:
            return False
        for z in xs:
            for t in self._immediate_truncations(z):
                if t not in xs:
                    return False
        return True

    # ------------------------------------------------------------------
    # non-commuting counts and standard form

    def nc_length(self, x, v0: int, check_all: bool = False) -> int:
        """Non-commuting count of x relative to the vertex v0.

        -1 when no rearrangement ends with a v0 letter; otherwise the number
        of letters, in the prefix of such a rearrangement, whose vertex is not
        joined to v0 (same-vertex letters count).  Accepts an element or a
        reduced vertex word.  With ``check_all`` the value is recomputed from
        every qualifying rearrangement and compared.
        """
        if isinstance(x, GPElement):
            self._check_ctx(x)
            vertices = x.vertex_word
        else:
            vertices = tuple(x)
            if not self.is_reduced(vertices):
                raise GPMultError("vertex word is not reduced", word=vertices)
        if not (0 <= v0 < self.graph.n):
            raise ElementOutOfRangeError("vertex index out of range", vertex=v0)
        val = self._nc_direct(vertices, v0)
        if check_all:
            vals = set()
            for r in self._vertex_rearrangements(vertices):
                if r and r[-1] == v0:
                    vals.add(
                        sum(1 for v in r[:-1] if not self.graph.adjacent(v, v0))
                    )
            if not vals:
                vals = {-1}
            if vals != {val}:
                raise GPMultError(
                    "non-commuting count disagrees across rearrangements",
                    word=vertices,
                    values=sorted(vals),
                )
        return val

    def _nc_direct(self, vertices: tuple, v0: int) -> int:
        last = -1
        for i, v in enumerate(vertices):
            if v == v0:
                last = i
        if last < 0:
            return -1
        # letters that cannot commute past the final v0 letter pin it down
        for k in range(last + 1, len(vertices)):
            if not self.graph.adjacent(vertices[k], v0):
                return -1
        return sum(
            1
            for i, v in enumerate(vertices)
            if i != last and not self.graph.adjacent(v, v0)
        )

    def nc_length_set(self, elements, v0: int) -> int:
        """Maximum non-commuting count over a nonempty collection."""
        elements = list(elements)
        if not elements:
            raise EmptySetError("non-commuting count of an empty collection")
        return max(self.nc_length(x, v0) for x in elements)

    def standard_form(self, x: GPElement, v0: int) -> StandardForm:
        """The unique decomposition x = y * c * a * b relative to v0.

        Exhaustive search over rearrangements: among splits whose prefix
        through the chosen v0 letter realizes the maximal non-commuting count
        of the down-set of x, first minimize the length of b, then the length
        of y.  Raises ``NoV0LetterError`` when x has no v0 letter.
        """
        self._check_ctx(x)
        key = (x.letters, v0)
        cached = self._sf_cache.get(key)
        if cached is not None:
            return cached
        forms = self.standard_form_candidates(x, v0)
        if len(forms) != 1:
            raise GPMultError(
                "standard form is not unique",
                word=x.letters,
                v0=v0,
                count=len(forms),
            )
        form = next(iter(forms))
        self._sf_cache[key] = form
        return form

    def standard_form_candidates(self, x: GPElement, v0: int):
        """All minimizers of the standard-form search (should be exactly one)."""
        self._check_ctx(x)
        if v0 not in x.vertex_word:
            raise NoV0LetterError("element has no letter at the vertex", v0=v0)
        n_target = self.nc_length_set(self.downset(x), v0)
        # stage 1: choose the split point at a v0 letter, minimizing |b|
        cands = []
        for r in self._rearrangements_seq(x.letters, DEFAULT_BUDGET):
            for i, letter in enumerate(r):
                if letter.vertex != v0:
                    continue
                count = sum(
                    1 for m in r[:i] if not self.graph.adjacent(m.vertex, v0)
                )
                if count == n_target:
                    cands.append((r[:i], letter, r[i + 1 :]))
        if not cands:
            raise GPMultError(
                "no split realizes the down-set maximum", word=x.letters, v0=v0
            )
        min_b = min(len(b) for (_, _, b) in cands)
        cands = [c for c in cands if len(c[2]) == min_b]
        # stage 2: split the prefix as y * c, minimizing |y|
        finals = {}
        best_y = None
        for prefix, letter, b in cands:
            for rp in self._rearrangements_seq(tuple(prefix), DEFAULT_BUDGET):
                for j in range(len(rp) + 1):
                    y_letters, c_letters = rp[:j], rp[j:]
                    y_vw = tuple(m.vertex for m in y_letters) + (v0,)
                    if not self.is_reduced(y_vw):
                        continue
                    if self._nc_direct(y_vw, v0) != n_target:
                        continue
                    ya = self._from_reduced(tuple(y_letters) + (letter,))
                    if not self.leq(ya, x):
                        continue
                    if best_y is None or j < best_y:
                        best_y = j
                    form = StandardForm(
                        y=self._from_reduced(y_letters),
                        c=self._from_reduced(c_letters),
                        a=letter,
                        b=self._from_reduced(b),
                        v0=v0,
                        nc=n_target,
                    )
                    finals.setdefault(j, set()).add(form)
        if best_y is None:
            raise GPMultError(
                "no admissible y split found", word=x.letters, v0=v0
            )
        return finals[best_y]

    # ------------------------------------------------------------------
    # enumeration

    def ball(self, radius: int, budget: int = DEFAULT_BUDGET):
        """All elements of word length at most ``radius``, sorted."""
        gens = self.generators()
        out = {self.identity()}
        frontier = [self.identity()]
        for _ in range(radius):
            nxt = []
            for x in frontier:
                for l in gens:
                    y = self.normalize(x.letters + (l,))
                    if y not in out:
                        out.add(y)
                        if len(out) > budget:
                            raise BudgetExceededError(
                                "ball exceeds budget", budget=budget
                            )
                        nxt.append(y)
            frontier = nxt
        return tuple(sorted(out, key=_sort_key))

    def random_element(self, rng, max_len: int) -> GPElement:
        """Normalization of a uniformly random raw word of length <= max_len."""
        m = int(rng.integers(0, max_len + 1))
        letters = []
        for _ in range(m):
            v = int(rng.integers(0, self.graph.n))
            grp = self.groups[v]
            if grp.order == 1:
                continue
            g = int(rng.integers(1, grp.order))
            letters.append((v, g))
        return self.normalize(letters)

    # ------------------------------------------------------------------
    # serialization

    def to_pairs(self, x: GPElement):
        """Letters as [vertex_id, element_index] pairs (for JSON)."""
        self._check_ctx(x)
        return [[self.graph.vertices[l.vertex], int(l.elem)] for l in x.letters]

    def from_pairs(self, pairs) -> GPElement:
        letters = []
        for vid, elem in pairs:
            letters.append((self.graph.vertex_index(vid), int(elem)))
        return self.normalize(letters)
