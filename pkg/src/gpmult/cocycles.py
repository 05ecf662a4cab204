"""Inner-product modules, cocycles, and negative definiteness for one group.

Two twisting conventions appear for positive definiteness of a multiplier h:
the package default twists matrix entries by the column index,
``alpha_{x_j}(h(x_i^-1 x_j))``, while the module machinery here uses the
row-twisted convention ``alpha_{x_i}(h(x_i^-1 x_j))``; ``convention_flip``
(s -> h(s^-1)*) exchanges the two.  Everything in this module expects
row-convention multipliers - flip package-default ones first.

The module of a row-convention positive definite h on a finite group G is
represented concretely by its Gram matrix ``gram[s, t] = alpha_s(h(s^-1 t))``
over the full group (no null-space quotient is formed; all identities are
checked through inner products).  The left regular vectors
``(u_s v)(t) = alpha_s(v(s^-1 t))`` act unitarily for the twisted form, and
for unital h the vector xi = delta_e has ``<u_s xi | xi> = h(s)``.  The
associated cocycle ``b(s) = xi - u_s xi`` satisfies b(st) = b(s) + u_s b(t)
and ``<b(s)|b(s)> = 2 - h(s) - h(s)*``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ActionTable
from .errors import (
    NotCentralError,
    NotPositiveError,
    NotUnitalError,
    StructureMismatchError,
    SupportEscapeError,
)
from .matalg import (
    AlgebraElement,
    CentralElement,
    OperatorMatrix,
    central_exp,
    embed_central,
    extract_central,
    is_central,
    is_positive,
)
from .multipliers import Multiplier, convention_flip, is_positive_definite


class GNSModule:
    """Inner-product module of a row-convention positive definite multiplier.

    The support is always the whole (finite) group, so the twisted left
    regular action never escapes it.
    """

    def __init__(self, h: Multiplier, table: ActionTable, gram, lambda_min: float):
        self.h = h
        self.table = table
        self.group = h.group
        self.structure = h.structure
        self.gram = gram  # grid of CentralElement
        self.gram_embedded = [[embed_central(c) for c in row] for row in gram]
        self.lambda_min = lambda_min

    # -- vectors --

    def zero_vector(self) -> "ModuleVector":
        z = AlgebraElement.zero(self.structure)
        return ModuleVector(self, tuple(z for _ in range(self.group.order)))

    def delta(self, g: int, coeff: AlgebraElement | None = None) -> "ModuleVector":
        if coeff is None:
            coeff = AlgebraElement.identity(self.structure)
        coeffs = [AlgebraElement.zero(self.structure) for _ in range(self.group.order)]
        coeffs[g] = coeff
        return ModuleVector(self, tuple(coeffs))

    def inner(self, f: "ModuleVector", g: "ModuleVector") -> AlgebraElement:
        """Twisted form <f|g> = sum_{s,t} g(s)* gram[s,t] f(t)."""
        out = AlgebraElement.zero(self.structure)
        for s in range(self.group.order):
            gs = g.coeffs[s].adjoint()
            for t in range(self.group.order):
                out = out + gs * self.gram_embedded[s][t] * f.coeffs[t]
        return out

    def u_action(self, s: int, v: "ModuleVector") -> "ModuleVector":
        """(u_s v)(t) = alpha_s(v(s^-1 t)); unitary for the twisted form."""
        if v.module is not self:
            raise StructureMismatchError("vector from a different module")
        if not (0 <= s < self.group.order):
            raise SupportEscapeError("group element outside the support", element=s)
        s_inv = self.group.inverse(s)
        auto = self.table.autos[s]
        coeffs = [
            auto.apply(v.coeffs[self.group.mul(s_inv, t)])
            for t in range(self.group.order)
        ]
        return ModuleVector(self, tuple(coeffs))


@dataclass(frozen=True, eq=False)
class ModuleVector:
    """Finitely supported A-valued function on the group, as a coefficient tuple."""

    module: GNSModule
    coeffs: tuple

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        return ModuleVector(
            self.module, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return ModuleVector(
            self.module, tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        )

    def times(self, a: AlgebraElement) -> "ModuleVector":
        """Right module action, coefficientwise."""
        return ModuleVector(self.module, tuple(c * a for c in self.coeffs))

    def maxabs_diff(self, other: "ModuleVector") -> float:
        return max(
            a.maxabs_diff(b) for a, b in zip(self.coeffs, other.coeffs)
        )


def gns_build(h: Multiplier, table: ActionTable, tol: float = 1e-9) -> GNSModule:
    """Module of a row-convention pd multiplier; certifies the Gram matrix.

    Raises ``NotPositiveError`` when the Gram matrix over the whole group
    fails the positivity test.
    """
    if table.group is not h.group or table.structure != h.structure:
        raise StructureMismatchError("multiplier and action do not match")
    n = h.group.order
    gram = []
    for s in range(n):
        row = []
        for t in range(n):
            g = h.group.mul(h.group.inverse(s), t)
            row.append(table.autos[s].apply_central(h.values[g]))
        gram.append(row)
    m = OperatorMatrix.from_central_grid(h.structure, gram)
    ok, lam = is_positive(m, tol=tol, hermitian_tol=1e-8)
    if not ok:
        raise NotPositiveError(
            "Gram matrix of the multiplier is not positive", lambda_min=lam
        )
    return GNSModule(h, table, gram, lam)


class Cocycle:
    """b(s) = xi - u_s xi for xi = delta_e, defined for unital multipliers."""

    def __init__(self, module: GNSModule):
        self.module = module
        self.xi = module.delta(module.group.identity)
        self.b = tuple(
            self.xi - module.u_action(s, self.xi) for s in range(module.group.order)
        )

    def squared_norm(self, s: int) -> AlgebraElement:
        return self.module.inner(self.b[s], self.b[s])


def cocycle_build(module: GNSModule) -> Cocycle:
    one = CentralElement.one(module.structure)
    if module.h.values[module.group.identity].maxabs_diff(one) > 1e-12:
        raise NotUnitalError("cocycle needs a unital multiplier")
    return Cocycle(module)


def cocycle_identity_residual(c: Cocycle) -> float:
    """Worst coefficientwise residual of b(st) = b(s) + u_s b(t) over all pairs."""
    mod = c.module
    worst = 0.0
    for s in range(mod.group.order):
        for t in range(mod.group.order):
            st = mod.group.mul(s, t)
            rhs = c.b[s] + mod.u_action(s, c.b[t])
            worst = max(worst, c.b[st].maxabs_diff(rhs))
    return worst


def squared_norm_residual(c: Cocycle) -> float:
    """Worst deviation of <b(s)|b(s)> from 2 - h(s) - h(s)* over the group."""
    mod = c.module
    one = AlgebraElement.identity(mod.structure)
    worst = 0.0
    for s in range(mod.group.order):
        hs = embed_central(mod.h.values[s])
        expected = 2.0 * one - hs - hs.adjoint()
        worst = max(worst, c.squared_norm(s).maxabs_diff(expected))
    return worst


@dataclass
class NDReport:
    ok: bool
    worst_margin: float
    symmetry_deviation: float
    trials: int
    mode: str


def negative_definite_check(
    psi,
    table: ActionTable,
    trials: int = 500,
    seed: int = 0,
    mode: str = "random",
    tol: float = 1e-8,
) -> NDReport:
    """Numerical evidence that psi is row-twisted negative definite.

    ``psi`` maps each group element to an :class:`AlgebraElement`.  Checks
    the symmetry ``alpha_s(psi(s^-1)) = psi(s)*`` exactly, then evaluates the
    form ``sum_{i,j} b_i* alpha_{g_i}(psi(g_i^-1 g_j)) b_j`` over tuples
    (g_i) = G with coefficients summing to zero, and records the largest
    eigenvalue of the Hermitian part (should stay below tol).

    ``mode="random"`` draws seeded random coefficient tuples; ``mode="sweep"``
    deterministically sweeps matrix-unit difference patterns (small groups).
    """
    group = table.group
    structure = table.structure
    n = group.order
    psi = [psi[g] if not callable(psi) else psi(g) for g in range(n)]
    sym_dev = 0.0
    for s in range(n):
        lhs = table.autos[s].apply(psi[group.inverse(s)])
        sym_dev = max(sym_dev, lhs.maxabs_diff(psi[s].adjoint()))
    # precompute the twisted matrix M[i][j] = alpha_{g_i}(psi(g_i^-1 g_j))
    M = [
        [
            table.autos[i].apply(psi[group.mul(group.inverse(i), j)])
            for j in range(n)
        ]
        for i in range(n)
    ]

    def form_lambda_max(bs) -> float:
        acc = AlgebraElement.zero(structure)
        for i in range(n):
            bi = bs[i].adjoint()
            for j in range(n):
                acc = acc + bi * M[i][j] * bs[j]
        dense = acc.dense()
        herm = (dense + dense.conj().T) / 2.0
        return float(np.linalg.eigvalsh(herm)[-1])

    worst = -np.inf
    count = 0
    if mode == "sweep":
        units = []
        for k, d in enumerate(structure.block_dims):
            for r in range(d):
                for col in range(d):
                    units.append(AlgebraElement.matrix_unit(structure, k, r, col))
        zero = AlgebraElement.zero(structure)
        for i in range(n):
            for j in range(i + 1, n):
                for u in units:
                    bs = [zero] * n
                    bs[i] = u
                    bs[j] = -1.0 * u
                    worst = max(worst, form_lambda_max(bs))
                    count += 1
    elif mode == "random":
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            bs = []
            for _ in range(n - 1):
                blocks = [
                    rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                    for d in structure.block_dims
                ]
                bs.append(AlgebraElement(structure, blocks))
            total = AlgebraElement.zero(structure)
            for b in bs:
                total = total + b
            bs.append(-1.0 * total)
            worst = max(worst, form_lambda_max(bs))
            count += 1
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if count == 0:
        worst = 0.0
    return NDReport(
        ok=(worst <= tol and sym_dev <= 1e-10),
        worst_margin=float(worst),
        symmetry_deviation=sym_dev,
        trials=count,
        mode=mode,
    )


def schoenberg_multiplier(c: Cocycle, t: float) -> Multiplier:
    """The row-convention multiplier s -> exp(-t Q(s)^2), Q(s) = <b(s)|b(s)>.

    Requires every Q(s) to be central (automatic when the cocycle comes from
    a central-valued multiplier); raises ``NotCentralError`` otherwise.
    """
    mod = c.module
    vals = []
    for s in range(mod.group.order):
        q = c.squared_norm(s)
        if not is_central(q):
            raise NotCentralError("squared norm is not central", element=s)
        qc = extract_central(q)
        vals.append(central_exp(-t * (qc * qc)))
    return Multiplier(mod.group, mod.structure, tuple(vals))


def schoenberg_is_pd(c: Cocycle, t: float, tol: float = 1e-9):
    """Positivity of the Schoenberg multiplier, in the row convention."""
    h = schoenberg_multiplier(c, t)
    return is_positive_definite(convention_flip(h), c.module.table, tol=tol)


def spectral_gap(q_values, group) -> dict:
    """Smallest block scalar (real part) of each positive central value.

    ``q_values`` maps group elements to :class:`CentralElement`; the result
    maps each element to its gap, and growing gaps off finite sets witness
    properness of the associated function.
    """
    out = {}
    for g in range(group.order):
        q = q_values[g]
        out[g] = float(np.min(q.scalars.real)) if q.scalars.size else 0.0
    return out


def sublevel(gaps: dict, radius: float):
    """Elements whose gap does not exceed the radius, sorted."""
    return sorted(g for g, v in gaps.items() if v <= radius)
