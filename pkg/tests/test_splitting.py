import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csrp.errors import ConfigurationError
from csrp.lie_algebra import load_preset
from csrp.splitting import (
    antisymmetric_ones,
    canonical_preset,
    change_symplectic_basis,
    derive_Q,
    random_symplectic,
    require_valid,
    symmetric_basis_matrices,
    validate_splitting,
)


@pytest.mark.parametrize("g", [1, 2, 3, 5])
def test_canonical_preset_is_valid_with_unit_metric(g):
    spec = canonical_preset(g, load_preset("su2"))
    assert validate_splitting(spec).passed
    # standard basis with S* a_i = -b_i: Q_ij = -omega(S* l_i, l_j) = delta_ij
    np.testing.assert_array_equal(spec.q_mat, np.eye(g))
    np.testing.assert_array_equal(spec.lam, np.vstack([np.zeros((g, g)), -np.eye(g)]))


def test_antisymmetric_ones():
    n = antisymmetric_ones(3, 2.0)
    assert n[0, 1, 2] == 2.0 and n[2, 1, 0] == -2.0 and n[1, 2, 0] == 2.0
    assert n[0, 0, 1] == 0.0
    assert not np.any(antisymmetric_ones(2))


def test_symmetric_basis_count():
    mats = symmetric_basis_matrices(3)
    assert len(mats) == 6
    assert all(np.array_equal(m, m.T) for m in mats)
    flat = np.array([m.ravel() for m in mats])
    assert np.linalg.matrix_rank(flat) == 6


def test_airy_defaults_follow_lie_algebra():
    lie = load_preset("su3")
    spec = canonical_preset(2, lie)
    assert spec.block_size == 8
    np.testing.assert_array_equal(spec.airy_F, lie.adjoint_matrices())
    np.testing.assert_array_equal(spec.airy_J, spec.q_mat)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_symplectic_change_of_basis_preserves_everything(g, seed):
    rng = np.random.default_rng(seed)
    t = random_symplectic(g, rng, scale=0.3)
    spec = canonical_preset(g)
    omega = spec.omega
    np.testing.assert_allclose(t.T @ omega @ t, omega, atol=1e-9 * max(1.0, np.abs(t).max() ** 2))
    moved = change_symplectic_basis(spec, t)
    rep = validate_splitting(moved)
    scale = np.linalg.cond(t) ** 2
    bad = [c for c in rep.failures() if not c.name.startswith(("q_", "s_star", "omega", "lambda")) or c.residual > 1e-9 * scale]
    assert not bad, str(rep)
    np.testing.assert_allclose(moved.q_mat, spec.q_mat, atol=1e-9 * scale)


def test_derive_q_rejects_mismatch():
    with pytest.raises(ConfigurationError):
        derive_Q(np.eye(4), np.eye(2), np.ones((4, 2)))


def test_violations_are_reported():
    spec = canonical_preset(2)
    bad = spec.replace(s_star=np.eye(4))
    rep = validate_splitting(bad)
    assert not rep["s_star_antisymplectic"].passed
    with pytest.raises(ConfigurationError):
        require_valid(bad)
    flipped = spec.replace(lambda_plus=-spec.lam, lam=spec.s_star @ -spec.lam)
    assert not validate_splitting(flipped)["positivity_on_lambda_plus"].passed
    assert not validate_splitting(spec.replace(airy_J=-np.eye(2)))["airy_J_positive_definite"].passed
    assert not validate_splitting(spec.replace(v_vec=np.ones(3)))["shapes"].passed


def test_genus_must_be_positive():
    with pytest.raises(ConfigurationError):
        canonical_preset(0)
