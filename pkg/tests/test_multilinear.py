import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import alternate_by_loops, random_form, rel
from iiaflow import jets
from iiaflow.errors import RankError, SlotError
from iiaflow.jets import DIM, Jet2
from iiaflow.multilinear import (
    Tensor,
    alt,
    alternate,
    apply_J,
    basis_form,
    contract,
    interior,
    levi_civita_pairing,
    pack_form,
    perm_sign,
    raise_lower,
    tensor_product,
    unpack_form,
    wedge,
)
from iiaflow.typeiia import standard_omega

seeds = st.integers(0, 2**32 - 1)


def _spd(rng):
    a = rng.normal(size=(DIM, DIM))
    return a @ a.T + DIM * np.eye(DIM)


def test_metric_contraction_gives_kronecker(rng):
    g = _spd(rng)
    t = tensor_product(Tensor(np.linalg.inv(g), "uu"), Tensor(g, "dd"))
    np.testing.assert_allclose(contract(t, 1, 2).comps, np.eye(DIM), atol=1e-12)


def test_symplectic_full_trace_is_six():
    om = standard_omega()
    t = tensor_product(Tensor(np.linalg.inv(om), "uu"), Tensor(om, "dd"))
    mixed = contract(t, 1, 2)
    assert mixed.variance == "ud"
    assert float(contract(mixed, 0, 1).comps) == pytest.approx(6.0, abs=1e-14)


def test_raise_lower_round_trip_against_loops(rng):
    g = _spd(rng)
    gi = np.linalg.inv(g)
    t = rng.normal(size=(DIM,) * 3)
    lowered = raise_lower(Tensor(t, "udd"), 0, Tensor(g, "dd"))
    loops = np.zeros_like(t)
    for i, j, k in np.ndindex(t.shape):
        loops[i, j, k] = sum(g[i, m] * t[m, j, k] for m in range(DIM))
    assert rel(lowered.comps, loops) <= 1e-12
    back = raise_lower(lowered, 0, Tensor(gi, "uu"))
    assert back.variance == "udd"
    assert rel(back.comps, t) <= 1e-12


def test_raised_symplectic_form_squares_to_minus_one(geometries):
    for G in geometries:
        mixed = raise_lower(Tensor(G.omega, "dd"), 1, Tensor(G.g_inv, "uu")).comps
        assert rel(mixed @ mixed, -np.eye(DIM)) <= 1e-10


def test_raise_lower_rejects_wrong_slot(rng):
    with pytest.raises(SlotError):
        raise_lower(Tensor(rng.normal(size=(DIM, DIM)), "dd"), 0, Tensor(np.eye(DIM), "dd"))


def test_contract_rejects_same_variance():
    with pytest.raises(SlotError):
        contract(Tensor(np.eye(DIM), "dd"), 0, 1)


def test_alternate_is_projector(rng):
    t = Tensor(rng.normal(size=(DIM,) * 3), "ddd")
    once = alternate(t)
    np.testing.assert_allclose(alternate(once).comps, once.comps, atol=1e-14)


def test_alternate_kills_symmetric(rng):
    a = rng.normal(size=(DIM, DIM))
    assert np.abs(alt(a + a.T)).max() == 0.0


def test_alternate_matches_permutation_sum(rng):
    t = rng.normal(size=(DIM,) * 3)
    assert rel(alt(t), alternate_by_loops(t)) <= 1e-14


def test_basis_wedge_sign():
    e1, e2 = np.eye(DIM)[0], np.eye(DIM)[1]
    w = wedge(Tensor(e1, "d"), Tensor(e2, "d")).comps
    assert w[0, 1] == 1.0 and w[1, 0] == -1.0
    assert np.count_nonzero(w) == 2


@pytest.mark.parametrize("p, q", [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3)])
def test_wedge_graded_symmetry(rng, p, q):
    a, b = Tensor(random_form(rng, p), "d" * p), Tensor(random_form(rng, q), "d" * q)
    assert rel(wedge(a, b).comps, (-1) ** (p * q) * wedge(b, a).comps) <= 1e-13


def test_one_form_wedge_two_form_is_cyclic_sum(rng):
    a, b = rng.normal(size=DIM), random_form(rng, 2)
    cyclic = (
        np.einsum("j,kp->jkp", a, b) + np.einsum("k,pj->jkp", a, b) + np.einsum("p,jk->jkp", a, b)
    )
    assert rel(wedge(Tensor(a, "d"), Tensor(b, "dd")).comps, cyclic) <= 1e-14


def test_wedge_degree_overflow(rng):
    with pytest.raises(RankError):
        wedge(Tensor(random_form(rng, 3), "ddd"), Tensor(random_form(rng, 4), "dddd"))


def test_interior_of_basis():
    e1 = np.eye(DIM)[0]
    out = interior(Tensor(e1, "u"), Tensor(basis_form(0, 1), "dd"))
    np.testing.assert_array_equal(out.comps, np.eye(DIM)[1])


def test_interior_twice_vanishes(rng):
    v = Tensor(rng.normal(size=DIM), "u")
    f = Tensor(random_form(rng, 3), "ddd")
    assert np.abs(interior(v, interior(v, f)).comps).max() <= 1e-13


def test_interior_of_norm_gradient(jet_geometries):
    for G in jet_geometries:
        grad_vec = G.g_inv @ G.grad_nps
        lhs = interior(Tensor(grad_vec, "u"), Tensor(G.phi, "ddd")).comps
        rhs = -G.nps * np.einsum("mn,n,mkp->kp", G.g_inv, G.alpha, G.phi)
        assert rel(lhs, rhs) <= 1e-10


def test_apply_J_twice(geometries):
    for G in geometries:
        J = Tensor(G.J, "ud")
        t = Tensor(G.phi, "ddd")
        for slot in range(3):
            assert rel(apply_J(apply_J(t, slot, J), slot, J).comps, -G.phi) <= 1e-12


def test_omega_with_J_is_metric(geometries):
    for G in geometries:
        assert rel(apply_J(Tensor(G.omega, "dd"), 1, Tensor(G.J, "ud")).comps, G.g) <= 1e-10


def test_phi_is_J_anti_invariant_in_two_slots(geometries):
    for G in geometries:
        J = Tensor(G.J, "ud")
        both = apply_J(apply_J(Tensor(G.phi, "ddd"), 0, J), 1, J)
        assert rel(both.comps, -G.phi) <= 1e-10


def test_pairing_of_complementary_basis():
    v = levi_civita_pairing(Tensor(basis_form(1, 2, 3, 4, 5), "ddddd")).comps
    np.testing.assert_allclose(v, np.eye(DIM)[0], atol=1e-15)


def test_pairing_of_repeated_covector_vanishes():
    e = np.eye(DIM)
    f = np.einsum("a,b,c,d,e->abcde", e[1], e[1], e[2], e[3], e[4])
    assert np.abs(levi_civita_pairing(Tensor(alt(f), "ddddd")).comps).max() == 0.0


def test_pairing_against_permutation_sum(rng):
    from itertools import permutations

    f = random_form(rng, 5)
    out = np.zeros(DIM)
    for p in permutations(range(DIM)):
        out[p[0]] += perm_sign(p) * f[p[1:]]
    out /= 120.0
    assert rel(levi_civita_pairing(Tensor(f, "ddddd")).comps, out) <= 1e-13


def test_tensor_signature_checks():
    with pytest.raises(SlotError):
        Tensor(np.eye(DIM), "dx")
    with pytest.raises(RankError):
        Tensor(np.eye(DIM), "d")


def test_pack_round_trip(rng):
    f = random_form(rng, 3)
    assert pack_form(f).shape == (20,)
    np.testing.assert_array_equal(unpack_form(pack_form(f), 3), f)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(-10, 10))
def test_contract_is_linear(seed, c):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, DIM, DIM, DIM))
    lhs = contract(Tensor(c * a + b, "udd"), 0, 2).comps
    rhs = c * contract(Tensor(a, "udd"), 0, 2).comps + contract(Tensor(b, "udd"), 0, 2).comps
    assert rel(lhs, rhs) <= 1e-13


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([(1, 2), (2, 2), (1, 3), (3, 3)]))
def test_wedge_output_is_alternating(seed, degrees):
    rng = np.random.default_rng(seed)
    p, q = degrees
    w = wedge(Tensor(random_form(rng, p), "d" * p), Tensor(random_form(rng, q), "d" * q))
    assert rel(alternate(w).comps, w.comps) <= 1e-13


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_apply_J_commutes_with_alternation_on_two_forms(seed):
    rng = np.random.default_rng(seed)
    Jm = np.linalg.inv(rng.normal(size=(DIM, DIM)))
    J = Tensor(Jm, "ud")
    t = Tensor(random_form(rng, 2), "dd")
    both = apply_J(apply_J(t, 0, J), 1, J)
    assert rel(alternate(both).comps, both.comps) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_zero_derivative_jets_embed_exactly(seed):
    rng = np.random.default_rng(seed)
    a, b = random_form(rng, 1), random_form(rng, 2)
    v = rng.normal(size=DIM)
    plain = interior(Tensor(v, "u"), wedge(Tensor(a, "d"), Tensor(b, "dd"))).comps
    lifted = interior(
        Tensor(Jet2.constant(v), "u"), wedge(Tensor(Jet2.constant(a), "d"), Tensor(Jet2.constant(b), "dd"))
    ).comps
    np.testing.assert_array_equal(jets.value(lifted), plain)
    assert np.abs(lifted.grad).max() == 0.0 and np.abs(lifted.hess).max() == 0.0
