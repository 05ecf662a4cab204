"""Automorphisms of block algebras and actions of finite groups.

An automorphism of a block-diagonal algebra permutes blocks of equal
dimension and conjugates each target block by a unitary: output block k is
``U_k a_{perm^-1(k)} U_k*``.  An action assigns one automorphism per group
element; validation checks the homomorphism property exhaustively on matrix
units.  Automorphisms are never inverted numerically - words are inverted at
the group level instead, so inverse actions come from inverse words.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContextMismatchError,
    EdgeViolationError,
    NotHomomorphismError,
    SetupInvalidError,
    StructureMismatchError,
)
from .graphgroup import FiniteGroup
from .matalg import AlgebraElement, BlockStructure, CentralElement
from .wordcraft import GPElement, WordContext

MAP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Automorphism:
    """Block permutation plus per-block unitary conjugation.

    ``block_perm[j]`` is the index of the block that source block j is sent
    to; ``unitaries[k]`` is the d_k x d_k unitary conjugating the *target*
    block k.
    """

    structure: BlockStructure
    block_perm: tuple
    unitaries: tuple
    _perm_inv: tuple = field(repr=False, default=None)

    def __post_init__(self):
        perm = tuple(int(p) for p in self.block_perm)
        K = self.structure.num_blocks
        if sorted(perm) != list(range(K)):
            raise StructureMismatchError("block_perm is not a permutation", perm=perm)
        for j, k in enumerate(perm):
            if self.structure.block_dims[j] != self.structure.block_dims[k]:
                raise StructureMismatchError(
                    "block_perm mixes dimensions", source=j, target=k
                )
        unis = tuple(np.asarray(u, dtype=np.complex128) for u in self.unitaries)
        if len(unis) != K:
            raise StructureMismatchError("need one unitary per block")
        for k, u in enumerate(unis):
            d = self.structure.block_dims[k]
            if u.shape != (d, d):
                raise StructureMismatchError(
                    "unitary has wrong shape", block=k, got=u.shape
                )
            if float(np.max(np.abs(u @ u.conj().T - np.eye(d)))) > 1e-10:
                raise StructureMismatchError("matrix is not unitary", block=k)
        inv = [0] * K
        for j, k in enumerate(perm):
            inv[k] = j
        object.__setattr__(self, "block_perm", perm)
        object.__setattr__(self, "unitaries", unis)
        object.__setattr__(self, "_perm_inv", tuple(inv))

    @classmethod
    def identity(cls, structure: BlockStructure) -> "Automorphism":
        return cls(
            structure,
            tuple(range(structure.num_blocks)),
            tuple(np.eye(d) for d in structure.block_dims),
        )

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.structure != self.structure:
            raise StructureMismatchError("element has wrong structure")
        blocks = []
        for k in range(self.structure.num_blocks):
            u = self.unitaries[k]
            blocks.append(u @ a.blocks[self._perm_inv[k]] @ u.conj().T)
        return AlgebraElement(self.structure, blocks)

    def apply_central(self, c: CentralElement) -> CentralElement:
        """Central elements only move with the block permutation."""
        if c.structure != self.structure:
            raise StructureMismatchError("element has wrong structure")
        return CentralElement(
            self.structure, c.scalars[np.array(self._perm_inv, dtype=np.intp)]
        )

    def is_identity_map(self, tol: float = MAP_TOL) -> bool:
        for e in _matrix_units(self.structure):
            if self.apply(e).maxabs_diff(e) > tol:
                return False
        return True


def _matrix_units(structure: BlockStructure):
    units = []
    for k, d in enumerate(structure.block_dims):
        for r in range(d):
            for c in range(d):
                units.append(AlgebraElement.matrix_unit(structure, k, r, c))
    return units


@dataclass(frozen=True, eq=False)
class ActionTable:
    """One automorphism per element of a finite group."""

    group: FiniteGroup
    structure: BlockStructure
    autos: tuple

    def __post_init__(self):
        if len(self.autos) != self.group.order:
            raise StructureMismatchError(
                "need one automorphism per group element",
                expected=self.group.order,
                got=len(self.autos),
            )
        for a in self.autos:
            if a.structure != self.structure:
                raise StructureMismatchError("automorphism on wrong structure")

    def auto(self, g: int) -> Automorphism:
        return self.autos[g]


def validate_action(table: ActionTable, tol: float = MAP_TOL) -> None:
    """Exhaustively check that the table is an action by automorphisms.

    The identity element must act as the identity map and
    ``auto(g*h) == auto(g) o auto(h)`` must hold on every matrix unit.
    """
    units = _matrix_units(table.structure)
    e = table.group.identity
    if not table.autos[e].is_identity_map(tol):
        raise NotHomomorphismError("identity element does not act trivially", g=e)
    n = table.group.order
    for g in range(n):
        for h in range(n):
            gh = table.group.mul(g, h)
            for u in units:
                lhs = table.autos[gh].apply(u)
                rhs = table.autos[g].apply(table.autos[h].apply(u))
                if lhs.maxabs_diff(rhs) > tol:
                    raise NotHomomorphismError(
                        "action is not multiplicative",
                        g=g,
                        h=h,
                        deviation=lhs.maxabs_diff(rhs),
                    )


def actions_commute(t1: ActionTable, t2: ActionTable, tol: float = MAP_TOL) -> bool:
    """Whether two actions on the same structure commute as maps.

    Compared on matrix units, not on the unitaries themselves, so phase
    differences between conjugating unitaries do not matter.
    """
    if t1.structure != t2.structure:
        raise StructureMismatchError("actions live on different structures")
    units = _matrix_units(t1.structure)
    for g in range(t1.group.order):
        a1 = t1.autos[g]
        for h in range(t2.group.order):
            a2 = t2.autos[h]
            for u in units:
                d = a1.apply(a2.apply(u)).maxabs_diff(a2.apply(a1.apply(u)))
                if d > tol:
                    return False
    return True


class ActionSystem:
    """Words plus one validated action table per vertex, on a common algebra."""

    def __init__(self, words: WordContext, structure: BlockStructure, tables):
        tables = tuple(tables)
        if len(tables) != words.graph.n:
            raise StructureMismatchError("need one action table per vertex")
        for v, t in enumerate(tables):
            if t.structure != structure:
                raise StructureMismatchError("action on wrong structure", vertex=v)
            if t.group is not words.groups[v]:
                raise ContextMismatchError("action table group mismatch", vertex=v)
        self.words = words
        self.structure = structure
        self.tables = tables
        self.validated = False
        self.commutes_ok = None

    def validate_actions(self, tol: float = MAP_TOL) -> None:
        for t in self.tables:
            validate_action(t, tol)
        self.validated = True

    def setup_commutes_per_graph(self, tol: float = MAP_TOL) -> None:
        """Check that the actions of adjacent vertices commute as maps.

        Raises ``EdgeViolationError`` naming the first offending edge.
        """
        for i, j in self.words.graph.edge_index_pairs():
            if not actions_commute(self.tables[i], self.tables[j], tol):
                self.commutes_ok = False
                raise EdgeViolationError(
                    "adjacent actions do not commute",
                    edge=(self.words.graph.vertices[i], self.words.graph.vertices[j]),
                )
        self.commutes_ok = True

    def require_valid(self) -> None:
        if not self.validated or self.commutes_ok is not True:
            raise SetupInvalidError(
                "action system has not passed validation",
                validated=self.validated,
                commutes=self.commutes_ok,
            )

    def act_word(self, x) -> "WordAction":
        """The composite map of a word, letters composed left to right.

        Accepts an element or a raw letter sequence; for an element the
        canonical letters are used, and when the per-edge commutation checks
        passed the result does not depend on the chosen rearrangement.
        """
        if isinstance(x, GPElement):
            if x.ctx is not self.words:
                raise ContextMismatchError("element belongs to a different context")
            letters = x.letters
        else:
            letters = tuple(x)
        return WordAction(self, letters)


class WordAction:
    """Composition alpha_{l1} o alpha_{l2} o ... o alpha_{ln} for a letter word."""

    __slots__ = ("system", "letters")

    def __init__(self, system: ActionSystem, letters):
        self.system = system
        self.letters = tuple(letters)

    def on(self, a: AlgebraElement) -> AlgebraElement:
        for l in reversed(self.letters):
            a = self.system.tables[l.vertex].autos[l.elem].apply(a)
        return a

    def on_central(self, c: CentralElement) -> CentralElement:
        for l in reversed(self.letters):
            c = self.system.tables[l.vertex].autos[l.elem].apply_central(c)
        return c


# ----------------------------------------------------------------------
# action presets

def trivial_action(group: FiniteGroup, structure: BlockStructure) -> ActionTable:
    ident = Automorphism.identity(structure)
    return ActionTable(group, structure, tuple(ident for _ in range(group.order)))


def diagonal_phase_action(group, structure, phases) -> ActionTable:
    """Conjugation by diagonal unitaries diag(exp(i * theta)).

    ``phases[g][k]`` lists the angles for block k under element g.  The
    homomorphism property is the caller's responsibility and is what
    :func:`validate_action` checks.
    """
    autos = []
    for g in range(group.order):
        unis = []
        for k, d in enumerate(structure.block_dims):
            theta = np.asarray(phases[g][k], dtype=float)
            if theta.shape != (d,):
                raise StructureMismatchError(
                    "phase list has wrong length", element=g, block=k
                )
            unis.append(np.diag(np.exp(1j * theta)))
        autos.append(
            Automorphism(structure, tuple(range(structure.num_blocks)), tuple(unis))
        )
    return ActionTable(group, structure, tuple(autos))


def block_permutation_action(group, structure, perms) -> ActionTable:
    """Automorphisms that shuffle isomorphic blocks, with identity unitaries.

    ``perms[g]`` sends source block j to target block perms[g][j]; blocks
    connected by the permutation must have equal dimension.
    """
    autos = []
    for g in range(group.order):
        perm = tuple(int(p) for p in perms[g])
        unis = tuple(
            np.eye(structure.block_dims[k]) for k in range(structure.num_blocks)
        )
        autos.append(Automorphism(structure, perm, unis))
    return ActionTable(group, structure, tuple(autos))


def point_permutation_action(group, structure, maps) -> ActionTable:
    """Action on a commutative algebra of functions by permuting points.

    Requires all blocks one-dimensional.  ``maps[g]`` is the point map of g
    (image list); functions are moved by precomposition with the inverse, so
    the block permutation of the automorphism is the point map itself.
    """
    if any(d != 1 for d in structure.block_dims):
        raise StructureMismatchError("point permutations need all blocks of dim 1")
    autos = []
    for g in range(group.order):
        perm = tuple(int(p) for p in maps[g])
        unis = tuple(np.eye(1) for _ in range(structure.num_blocks))
        autos.append(Automorphism(structure, perm, unis))
    return ActionTable(group, structure, tuple(autos))
