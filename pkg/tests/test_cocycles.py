"""Modules, cocycles, Schoenberg multipliers, negative definiteness."""

import numpy as np
import pytest

from gpmult.cocycles import (
    cocycle_build,
    cocycle_identity_residual,
    gns_build,
    negative_definite_check,
    schoenberg_is_pd,
    schoenberg_multiplier,
    spectral_gap,
    squared_norm_residual,
    sublevel,
)
from gpmult.dynamics import block_permutation_action, trivial_action
from gpmult.errors import NotPositiveError, NotUnitalError
from gpmult.graphgroup import cyclic_group
from gpmult.matalg import BlockStructure, CentralElement, embed_central
from gpmult.multipliers import Multiplier

SCALAR = BlockStructure((1,))


def scalar_multiplier(group, *vals):
    return Multiplier(
        group,
        SCALAR,
        tuple(CentralElement(SCALAR, np.array([v], dtype=complex)) for v in vals),
    )


def z4_module():
    z4 = cyclic_group(4)
    h = scalar_multiplier(z4, 1.0, 0.5, 0.2, 0.5)
    return h, gns_build(h, trivial_action(z4, SCALAR))


def test_gram_matches_classical_circulant():
    """With trivial action on C the Gram matrix is the classical [h(s^-1 t)]."""
    h, mod = z4_module()
    hv = np.array([1.0, 0.5, 0.2, 0.5])
    classical = np.array([[hv[(t - s) % 4] for t in range(4)] for s in range(4)])
    got = np.array([[mod.gram[s][t].scalars[0] for t in range(4)] for s in range(4)])
    assert np.max(np.abs(classical - got)) == 0.0
    # smallest circulant eigenvalue, also the smallest DFT value of h
    assert abs(mod.lambda_min - 0.2) < 1e-12
    assert abs(mod.lambda_min - np.fft.fft(hv).real.min()) < 1e-12


def test_gns_build_rejects_nonpositive():
    z2 = cyclic_group(2)
    with pytest.raises(NotPositiveError):
        gns_build(scalar_multiplier(z2, 1.0, 1.2), trivial_action(z2, SCALAR))


def test_vector_of_identity_represents_h():
    _, mod = z4_module()
    c = cocycle_build(mod)
    hv = [1.0, 0.5, 0.2, 0.5]
    for s in range(4):
        v = mod.inner(mod.u_action(s, c.xi), c.xi)
        assert abs(v.dense()[0, 0] - hv[s]) < 1e-14


def test_u_action_preserves_the_form():
    _, mod = z4_module()
    f, g = mod.delta(1), mod.delta(2)
    lhs = mod.inner(mod.u_action(3, f), mod.u_action(3, g))
    assert lhs.maxabs_diff(mod.inner(f, g)) < 1e-14


def test_cocycle_residuals_vanish():
    _, mod = z4_module()
    c = cocycle_build(mod)
    assert cocycle_identity_residual(c) <= 1e-12
    assert squared_norm_residual(c) <= 1e-12
    assert np.max(np.abs(c.squared_norm(0).dense())) == 0.0  # b(e) = 0


def test_cocycle_needs_unital_multiplier():
    z2 = cyclic_group(2)
    mod = gns_build(scalar_multiplier(z2, 0.9, 0.3), trivial_action(z2, SCALAR))
    with pytest.raises(NotUnitalError):
        cocycle_build(mod)


def test_cocycle_on_block_swapping_action():
    """Residuals also vanish when the action permutes blocks."""
    st = BlockStructure((1, 1))
    z2 = cyclic_group(2)
    swap = block_permutation_action(z2, st, [[0, 1], [1, 0]])
    h = Multiplier(z2, st, (CentralElement.one(st), CentralElement(st, [0.4, 0.4])))
    c = cocycle_build(gns_build(h, swap))
    assert cocycle_identity_residual(c) <= 1e-12
    assert squared_norm_residual(c) <= 1e-12
    assert np.allclose(c.squared_norm(1).dense().diagonal(), [1.2, 1.2])  # 2 - 2 h(g)


def test_spectral_gap_and_sublevel():
    _, mod = z4_module()
    c = cocycle_build(mod)
    qc = [
        CentralElement(SCALAR, np.array([c.squared_norm(s).dense()[0, 0]], dtype=complex))
        for s in range(4)
    ]
    gaps = spectral_gap(qc, mod.group)
    assert gaps == {0: 0.0, 1: 1.0, 2: pytest.approx(1.6), 3: 1.0}
    assert sublevel(gaps, 0.5) == [0]
    assert sublevel(gaps, 1.1) == [0, 1, 3]


def test_schoenberg_values_and_positivity():
    _, mod = z4_module()
    c = cocycle_build(mod)
    sm = schoenberg_multiplier(c, 0.5)
    hv = np.array([1.0, 0.5, 0.2, 0.5])
    expected = np.exp(-0.5 * (2 - 2 * hv) ** 2)
    got = np.array([sm.values[g].scalars[0].real for g in range(4)])
    assert np.max(np.abs(got - expected)) < 1e-14
    ok, lam = schoenberg_is_pd(c, 0.5)
    assert ok
    # the classical oracle again: smallest DFT value of the new multiplier
    assert abs(lam - np.fft.fft(got).real.min()) < 1e-12


def test_schoenberg_tends_to_one_monotonically():
    z3 = cyclic_group(3)
    h = scalar_multiplier(z3, 1.0, 0.4, 0.4)
    c = cocycle_build(gns_build(h, trivial_action(z3, SCALAR)))
    prev_gap = np.inf
    for t in (10.0, 1.0, 0.1, 0.01):
        sm = schoenberg_multiplier(c, t)
        gap = max(
            float(np.max(np.abs(sm.values[g].scalars - 1.0))) for g in range(3)
        )
        ok, _ = schoenberg_is_pd(c, t)
        assert ok
        assert gap <= prev_gap + 1e-12
        prev_gap = gap
    assert prev_gap < 0.05  # pointwise close to 1 by t = 0.01


def test_schoenberg_square_is_not_pd_for_uneven_gaps():
    """The squared exponential can fail for small t when Q takes unequal
    nonzero values: d/dt of the lowest circulant eigenvalue at t=0 is
    2 q_1 - q_2^2 with q = (0, 1, 1.6, 1) here, which is negative.  The
    unsquared exponential exp(-t Q) stays positive definite for every t, as
    negative definiteness of Q demands."""
    _, mod = z4_module()
    c = cocycle_build(mod)
    ok, lam = schoenberg_is_pd(c, 0.1)
    assert not ok
    assert lam < -0.03
    q = np.array([c.squared_norm(s).dense()[0, 0].real for s in range(4)])
    assert np.allclose(q, [0.0, 1.0, 1.6, 1.0])
    for t in (0.01, 0.1, 1.0, 10.0):
        assert np.fft.fft(np.exp(-t * q)).real.min() > -1e-12


def test_negative_definite_check_accepts_squared_norms():
    z4 = cyclic_group(4)
    _, mod = z4_module()
    c = cocycle_build(mod)
    psi = [c.squared_norm(s) for s in range(4)]
    rep = negative_definite_check(psi, trivial_action(z4, SCALAR), trials=200, seed=5)
    assert rep.ok
    assert rep.worst_margin < 0  # strictly inside for these coefficients
    assert rep.symmetry_deviation == 0.0
    assert rep.trials == 200 and rep.mode == "random"


def test_negative_definite_check_rejects_positive_definite_function():
    """A pd multiplier itself makes the form positive - the check must say no."""
    z4 = cyclic_group(4)
    h, _ = z4_module()
    psi = [embed_central(v) for v in h.values]
    rep = negative_definite_check(psi, trivial_action(z4, SCALAR), trials=200, seed=5)
    assert not rep.ok
    assert rep.worst_margin > 1.0


def test_negative_definite_check_sweep_mode():
    z4 = cyclic_group(4)
    _, mod = z4_module()
    c = cocycle_build(mod)
    psi = [c.squared_norm(s) for s in range(4)]
    rep = negative_definite_check(psi, trivial_action(z4, SCALAR), mode="sweep")
    assert rep.ok
    assert rep.trials == 6  # one matrix unit, six element pairs
    assert abs(rep.worst_margin + 2.0) < 1e-12


def test_negative_definite_check_flags_broken_symmetry():
    z4 = cyclic_group(4)
    h = scalar_multiplier(z4, 1.0, 0.5, 0.2, 0.3)  # h(3) != conj(h(1))
    psi = [embed_central(v) for v in h.values]
    rep = negative_definite_check(psi, trivial_action(z4, SCALAR), trials=10, seed=5)
    assert not rep.ok
    assert abs(rep.symmetry_deviation - 0.2) < 1e-14


def test_negative_definite_check_unknown_mode():
    z2 = cyclic_group(2)
    h = scalar_multiplier(z2, 1.0, 0.5)
    with pytest.raises(ValueError):
        negative_definite_check(
            [embed_central(v) for v in h.values],
            trivial_action(z2, SCALAR),
            mode="exhaustive",
        )
