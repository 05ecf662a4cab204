"""Positive definite multipliers, their graph products, and kernels.

A multiplier assigns a central algebra element to each element of a finite
group.  Positive definiteness is relative to an action: the matrix with
entries ``alpha_{x_j}(h(x_i^-1 x_j))`` over a tuple of group elements must be
positive in the matrix algebra over A.  The graph product of one multiplier
per vertex is evaluated on reduced words by twisting each letter's value with
the inverse action of its right tail and multiplying; when the per-edge
commutation requirements hold (adjacent actions commute as maps, and each
vertex action fixes the multipliers of its neighbours), the value does not
depend on the chosen rearrangement.

The kernel of a multiplier is ``K(x, y) = alpha_y(h(x^-1 y))``; positive
definiteness of h is equivalent to positivity of all kernel matrices over
finite tuples, and the identities verified in :mod:`gpmult.verifier` are all
phrased through K.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    ActionSystem,
    ActionTable,
    Automorphism,
    actions_commute,
    point_permutation_action,
    trivial_action,
)
from .errors import (
    BadIdentityValueError,
    ContextMismatchError,
    EdgeViolationError,
    HypothesisViolatedError,
    NormTooLargeError,
    NotUnitalError,
    StructureMismatchError,
)
from .graphgroup import FiniteGroup, SimplicialGraph
from .matalg import (
    BlockStructure,
    CentralElement,
    OperatorMatrix,
    is_positive,
)
from .wordcraft import GPElement, WordContext

UNITAL_TOL = 1e-12
COMMUTE_TOL = 1e-12
WELL_DEFINED_TOL = 1e-10
HERMITIAN_ID_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Multiplier:
    """Central-valued function on a finite group."""

    group: FiniteGroup
    structure: BlockStructure
    values: tuple  # one CentralElement per group element

    def __post_init__(self):
        if len(self.values) != self.group.order:
            raise StructureMismatchError(
                "need one value per group element",
                expected=self.group.order,
                got=len(self.values),
            )
        for v in self.values:
            if v.structure != self.structure:
                raise StructureMismatchError("value has wrong structure")

    def value(self, g: int) -> CentralElement:
        return self.values[g]

    @property
    def is_unital(self) -> bool:
        one = CentralElement.one(self.structure)
        return self.values[self.group.identity].maxabs_diff(one) <= UNITAL_TOL

    def off_identity_sup(self) -> float:
        e = self.group.identity
        sups = [v.norm() for g, v in enumerate(self.values) if g != e]
        return max(sups) if sups else 0.0


def delta_multiplier(group: FiniteGroup, structure: BlockStructure) -> Multiplier:
    """1 at the identity, 0 elsewhere; positive definite for every action."""
    vals = [
        CentralElement.one(structure)
        if g == group.identity
        else CentralElement.zero(structure)
        for g in range(group.order)
    ]
    return Multiplier(group, structure, tuple(vals))


def geometric_multiplier(group: FiniteGroup, structure: BlockStructure, c: float) -> Multiplier:
    """c^(cyclic distance to the identity) on a cyclic group.

    Only defined for the cyclic presets, where element k has distance
    min(k, n-k) to the identity.
    """
    n = group.order
    idx = np.arange(n)
    expected = (idx[:, None] + idx[None, :]) % n
    if not np.array_equal(group.table, expected):
        raise StructureMismatchError("geometric preset needs a cyclic group table")
    vals = [
        CentralElement.constant(structure, complex(c) ** min(k, n - k))
        for k in range(n)
    ]
    return Multiplier(group, structure, tuple(vals))


def is_positive_definite(
    h: Multiplier,
    table: ActionTable,
    S=None,
    tol: float = 1e-9,
    hermitian_tol: float = 1e-8,
):
    """Positive definiteness of a multiplier relative to an action.

    Assembles the matrix with entries ``alpha_{x_j}(h(x_i^-1 x_j))`` over the
    tuple S (default: the whole group) and certifies positivity of the
    flattened matrix.  Returns ``(ok, lambda_min)``.
    """
    if table.group is not h.group or table.structure != h.structure:
        raise ContextMismatchError("multiplier and action do not match")
    if S is None:
        S = list(range(h.group.order))
    grid = []
    for xi in S:
        row = []
        for xj in S:
            g = h.group.mul(h.group.inverse(xi), xj)
            row.append(table.autos[xj].apply_central(h.values[g]))
        grid.append(row)
    m = OperatorMatrix.from_central_grid(h.structure, grid)
    return is_positive(m, tol=tol, hermitian_tol=hermitian_tol)


def convention_flip(h: Multiplier) -> Multiplier:
    """Exchange the two positive definiteness conventions: h~(s) = h(s^-1)*.

    Applying the flip twice gives the original multiplier back.
    """
    vals = [h.values[h.group.inverse(g)].conj() for g in range(h.group.order)]
    return Multiplier(h.group, h.structure, tuple(vals))


def hermitian_identity_check(h: Multiplier, table: ActionTable) -> float:
    """Largest deviation in h(a^-1)* = alpha_a(h(a)) over the group.

    Zero (up to roundoff) for every positive definite multiplier.
    """
    worst = 0.0
    for a in range(h.group.order):
        lhs = h.values[h.group.inverse(a)].conj()
        rhs = table.autos[a].apply_central(h.values[a])
        worst = max(worst, lhs.maxabs_diff(rhs))
    return worst


def unitalize(h: Multiplier, tol: float = 1e-12) -> Multiplier:
    """Replace the identity value by 1, keeping all other values.

    Requires every off-identity value to have norm at most 1/2 and the
    identity value to be positive and at most 1; under those constraints the
    result of a positive definite multiplier is again positive definite.
    """
    e = h.group.identity
    sup = h.off_identity_sup()
    if sup > 0.5 + tol:
        raise NormTooLargeError(
            "off-identity values must have norm at most 1/2", sup=sup
        )
    he = h.values[e].scalars
    if np.max(np.abs(he.imag)) > tol or np.min(he.real) < -tol or np.max(he.real) > 1 + tol:
        raise BadIdentityValueError(
            "identity value must satisfy 0 <= h(e) <= 1", value=list(he)
        )
    vals = list(h.values)
    vals[e] = CentralElement.one(h.structure)
    return Multiplier(h.group, h.structure, tuple(vals))


@dataclass
class WellDefinedReport:
    ok: bool
    max_deviation: float
    word: tuple | None
    checked_words: int
    checked_expressions: int


@dataclass
class WitnessReport:
    ok: bool
    max_off_norm: float
    threshold: float
    f_size: int
    ball_size: int


class MultiplierSystem:
    """A full graph-product setup: words, actions, and one multiplier per vertex."""

    def __init__(self, actions: ActionSystem, multipliers):
        multipliers = tuple(multipliers)
        words = actions.words
        if len(multipliers) != words.graph.n:
            raise StructureMismatchError("need one multiplier per vertex")
        for v, h in enumerate(multipliers):
            if h.group is not words.groups[v]:
                raise ContextMismatchError("multiplier group mismatch", vertex=v)
            if h.structure != actions.structure:
                raise StructureMismatchError("multiplier on wrong structure", vertex=v)
        self.actions = actions
        self.words = words
        self.structure = actions.structure
        self.multipliers = multipliers
        self.valid_actions = None
        self.valid_multipliers = None
        self._value_cache: dict = {}
        self._kernel = KernelTable(self)

    # ------------------------------------------------------------------
    # setup validation

    def validate(self) -> None:
        """Run every setup check, recording flags; raises on the first failure."""
        self.valid_actions = False
        self.actions.validate_actions()
        self.actions.setup_commutes_per_graph()
        self.valid_actions = True
        self.valid_multipliers = False
        for v, h in enumerate(self.multipliers):
            ok, lam = is_positive_definite(h, self.actions.tables[v])
            if not ok:
                raise HypothesisViolatedError(
                    "vertex multiplier is not positive definite",
                    vertex=self.words.graph.vertices[v],
                    lambda_min=lam,
                )
        multipliers_commute(self)
        self.valid_multipliers = True

    # ------------------------------------------------------------------
    # evaluation

    def value_of_letter(self, letter) -> CentralElement:
        return self.multipliers[letter.vertex].values[letter.elem]

    def gp_value(self, x: GPElement) -> CentralElement:
        """Graph-product multiplier evaluated on the canonical expression."""
        if x.ctx is not self.words:
            raise ContextMismatchError("element belongs to a different context")
        cached = self._value_cache.get(x.letters)
        if cached is None:
            cached = self.gp_value_letters(x.letters)
            self._value_cache[x.letters] = cached
        return cached

    def gp_value_letters(self, letters) -> CentralElement:
        """Evaluate on one specific reduced expression.

        Each letter's value is twisted by the inverse action of its right
        tail; tails are inverted at the word level, never the map level.
        """
        letters = tuple(letters)
        if not letters:
            return CentralElement.one(self.structure)
        out = None
        for j, letter in enumerate(letters[:-1]):
            tail = self.words._from_reduced(letters[j + 1 :])
            tail_inv = self.words.inverse(tail)
            factor = self.actions.act_word(tail_inv).on_central(
                self.value_of_letter(letter)
            )
            out = factor if out is None else out * factor
        last = self.value_of_letter(letters[-1])
        return last if out is None else out * last

    def kernel(self, x: GPElement, y: GPElement) -> CentralElement:
        return self._kernel.get(x, y)

    def kernel_matrix(self, xs, threads: int = 1) -> OperatorMatrix:
        xs = list(xs)
        if threads > 1 and len(xs) > 1:
            from concurrent.futures import ThreadPoolExecutor

            def row(x):
                return [self.kernel(x, y) for y in xs]

            with ThreadPoolExecutor(max_workers=threads) as pool:
                grid = list(pool.map(row, xs))
        else:
            grid = [[self.kernel(x, y) for y in xs] for x in xs]
        return OperatorMatrix.from_central_grid(self.structure, grid)


class KernelTable:
    """Lazy memoized kernel K(x, y) = alpha_y(h(x^-1 y))."""

    def __init__(self, system: MultiplierSystem):
        self.system = system
        self.cache: dict = {}

    def get(self, x: GPElement, y: GPElement) -> CentralElement:
        key = (x.letters, y.letters)
        val = self.cache.get(key)
        if val is None:
            words = self.system.words
            z = words.multiply(words.inverse(x), y)
            val = self.system.actions.act_word(y).on_central(self.system.gp_value(z))
            self.cache[key] = val
        return val


def multipliers_commute(system: MultiplierSystem, tol: float = COMMUTE_TOL) -> None:
    """Check that each vertex action fixes the multipliers of its neighbours.

    For every edge (i, j), every a in G_i and b in G_j the value h_j(b) must
    be fixed by alpha_{i,a} (and symmetrically).  Raises
    ``EdgeViolationError`` with the worst deviation on the first bad edge.
    """
    graph = system.words.graph
    for i, j in graph.edge_index_pairs():
        for (src, dst) in ((i, j), (j, i)):
            table = system.actions.tables[src]
            h = system.multipliers[dst]
            worst = 0.0
            for a in range(table.group.order):
                auto = table.autos[a]
                for b in range(h.group.order):
                    moved = auto.apply_central(h.values[b])
                    worst = max(worst, moved.maxabs_diff(h.values[b]))
            if worst > tol:
                raise EdgeViolationError(
                    "adjacent action moves a multiplier value",
                    edge=(graph.vertices[src], graph.vertices[dst]),
                    deviation=worst,
                )


def gp_well_defined(
    system: MultiplierSystem,
    radius: int = 4,
    tol: float = WELL_DEFINED_TOL,
    budget: int = 100_000,
) -> WellDefinedReport:
    """Compare the product evaluation across all rearrangements of all short words.

    Runs regardless of whether the setup checks passed, so it doubles as a
    detector for broken setups: the report carries the worst word and its
    deviation.
    """
    words = system.words
    worst = 0.0
    witness = None
    n_words = 0
    n_exprs = 0
    for x in words.ball(radius, budget=budget):
        base = system.gp_value(x)
        n_words += 1
        for r in words.rearrangements(x, budget=budget):
            n_exprs += 1
            dev = system.gp_value_letters(r).maxabs_diff(base)
            if dev > worst:
                worst = dev
                witness = r
    return WellDefinedReport(
        ok=worst <= tol,
        max_deviation=worst,
        word=witness,
        checked_words=n_words,
        checked_expressions=n_exprs,
    )


def haagerup_witness_ball(
    system: MultiplierSystem,
    K: int,
    eps: float,
    L: int,
    per_vertex=None,
) -> WitnessReport:
    """Certify smallness of the product multiplier off a finite witness set.

    The witness set F consists of the identity and all elements of length at
    most K whose letters lie in the chosen per-vertex subsets (default: the
    whole vertex group).  Preconditions: every vertex multiplier is unital
    with off-identity values of norm at most 1/2, ``2^-K <= eps``, and
    ``L > K``.  Reports the largest multiplier norm over the radius-L ball
    outside F and whether it stays below eps.
    """
    for v, h in enumerate(system.multipliers):
        if not h.is_unital:
            raise NotUnitalError("vertex multiplier is not unital", vertex=v)
        if h.off_identity_sup() > 0.5 + 1e-12:
            raise HypothesisViolatedError(
                "off-identity values must have norm at most 1/2",
                vertex=v,
                sup=h.off_identity_sup(),
            )
    if 2.0 ** (-K) > eps:
        raise HypothesisViolatedError("need 2^-K <= eps", K=K, eps=eps)
    if L <= K:
        raise HypothesisViolatedError("need L > K", K=K, L=L)
    words = system.words
    if per_vertex is None:
        allowed = [set(range(g.order)) for g in words.groups]
    else:
        allowed = [set(per_vertex.get(v, range(g.order))) for v, g in enumerate(words.groups)]

    def in_F(x: GPElement) -> bool:
        if len(x) > K:
            return False
        return all(l.elem in allowed[l.vertex] for l in x.letters)

    ball = words.ball(L)
    f_size = sum(1 for x in ball if in_F(x))
    worst = 0.0
    for x in ball:
        if in_F(x):
            continue
        worst = max(worst, system.gp_value(x).norm())
    return WitnessReport(
        ok=worst < eps,
        max_off_norm=worst,
        threshold=eps,
        f_size=f_size,
        ball_size=len(ball),
    )


# ----------------------------------------------------------------------
# fixtures

def _edge_pair_context(group1: FiniteGroup, group2: FiniteGroup) -> WordContext:
    graph = SimplicialGraph.build((0, 1), [(0, 1)])
    return WordContext(graph, (group1, group2))


def tensor_fixture(
    group1: FiniteGroup,
    table1: ActionTable,
    h1: Multiplier,
    group2: FiniteGroup,
    table2: ActionTable,
    h2: Multiplier,
) -> MultiplierSystem:
    """Single-edge system on A1 (x) A2 with actions alpha1 (x) id and id (x) alpha2.

    The two tensored actions commute by construction and each tensored
    multiplier is fixed by the other side's action, so the product multiplier
    on the direct product group is the tensor of the two inputs.
    """
    from .matalg import tensor_algebra

    s1, s2 = table1.structure, table2.structure
    ts, _, _ = tensor_algebra(s1, s2)
    k2 = s2.num_blocks

    def left_auto(a: Automorphism) -> Automorphism:
        perm = []
        unis = []
        for i in range(s1.num_blocks):
            for j in range(s2.num_blocks):
                perm.append(a.block_perm[i] * k2 + j)
        for i in range(s1.num_blocks):
            for j, d2 in enumerate(s2.block_dims):
                unis.append(np.kron(a.unitaries[i], np.eye(d2)))
        return Automorphism(ts, tuple(perm), tuple(unis))

    def right_auto(a: Automorphism) -> Automorphism:
        perm = []
        unis = []
        for i in range(s1.num_blocks):
            for j in range(s2.num_blocks):
                perm.append(i * k2 + a.block_perm[j])
        for i, d1 in enumerate(s1.block_dims):
            for j in range(s2.num_blocks):
                unis.append(np.kron(np.eye(d1), a.unitaries[j]))
        return Automorphism(ts, tuple(perm), tuple(unis))

    t1 = ActionTable(group1, ts, tuple(left_auto(a) for a in table1.autos))
    t2 = ActionTable(group2, ts, tuple(right_auto(a) for a in table2.autos))

    def left_central(c: CentralElement) -> CentralElement:
        scalars = np.empty(ts.num_blocks, dtype=np.complex128)
        for i in range(s1.num_blocks):
            for j in range(s2.num_blocks):
                scalars[i * k2 + j] = c.scalars[i]
        return CentralElement(ts, scalars)

    def right_central(c: CentralElement) -> CentralElement:
        scalars = np.empty(ts.num_blocks, dtype=np.complex128)
        for i in range(s1.num_blocks):
            for j in range(s2.num_blocks):
                scalars[i * k2 + j] = c.scalars[j]
        return CentralElement(ts, scalars)

    m1 = Multiplier(group1, ts, tuple(left_central(v) for v in h1.values))
    m2 = Multiplier(group2, ts, tuple(right_central(v) for v in h2.values))

    words = _edge_pair_context(group1, group2)
    actions = ActionSystem(words, ts, (t1, t2))
    return MultiplierSystem(actions, (m1, m2))


def groupoid_from_space(
    graph: SimplicialGraph,
    groups,
    num_points: int,
    point_maps,
    values,
) -> MultiplierSystem:
    """System on the function algebra of a finite point set.

    ``point_maps[v][g]`` is the image list of the point map of element g at
    vertex v (omit a vertex for the trivial action); ``values[v][g]`` lists
    one complex number per point.  This realises multipliers on the
    transformation groupoid of the actions as central-valued multipliers on
    the diagonal algebra.
    """
    structure = BlockStructure(tuple([1] * num_points))
    words = WordContext(graph, tuple(groups))
    tables = []
    mults = []
    for v, grp in enumerate(words.groups):
        maps = point_maps.get(v) if isinstance(point_maps, dict) else point_maps[v]
        if maps is None:
            tables.append(trivial_action(grp, structure))
        else:
            tables.append(point_permutation_action(grp, structure, maps))
        vals = values[v] if not isinstance(values, dict) else values[v]
        mults.append(
            Multiplier(
                grp,
                structure,
                tuple(
                    CentralElement(structure, np.asarray(row, dtype=np.complex128))
                    for row in vals
                ),
            )
        )
    actions = ActionSystem(words, structure, tuple(tables))
    return MultiplierSystem(actions, tuple(mults))
