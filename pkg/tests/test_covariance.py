import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csrp.covariance import (
    build_bose_model,
    build_fermi_model,
    build_three_region_model,
    fermi_constants,
    induced_lambda_metric,
    validate_bose_model,
    validate_fermi_model,
)
from csrp.errors import ConfigurationError
from csrp.lie_algebra import load_preset
from csrp.splitting import canonical_preset, change_symplectic_basis, random_symplectic


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 4), st.integers(0, 10_000))
def test_bose_models_validate(g, m, seed):
    model = build_bose_model(canonical_preset(g), m, seed)
    rep = validate_bose_model(model)
    assert rep.passed, str(rep)
    assert model.dim == 2 * (g + m)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.integers(0, 10_000))
def test_fermi_models_validate(m, seed):
    rep = validate_fermi_model(build_fermi_model(canonical_preset(2), m, seed))
    assert rep.passed, str(rep)


@pytest.mark.parametrize("seed", [0, 1, 17])
def test_induced_metric_recovers_q_independent_of_seed(seed):
    rng = np.random.default_rng(seed)
    spec = change_symplectic_basis(canonical_preset(3), random_symplectic(3, rng, 0.3))
    model = build_bose_model(spec, 2, seed)
    np.testing.assert_allclose(induced_lambda_metric(model), spec.q_mat, atol=1e-10)


def test_reflected_gram_spectrum():
    # spectrum of the reflected Gram is spec(Q) plus one zero per null mode
    spec = canonical_preset(2)
    model = build_bose_model(spec, 3, 5)
    ev = np.sort(np.linalg.eigvalsh(model.q_gram()))
    np.testing.assert_allclose(ev, [0, 0, 0, 1, 1], atol=1e-12)


def test_bose_cross_block_sign():
    spec = canonical_preset(2)
    model = build_bose_model(spec, 1, 3)
    k = model.dim_side
    # C(f_plus, h_minus) = omega(pi_plus f, pi_minus h)
    expected = model.pi_plus.T @ spec.omega @ model.pi_minus
    np.testing.assert_allclose(model.cov[:k, k:], expected, atol=0)


def test_fermi_cross_pairing_is_vol_times_constants():
    spec = canonical_preset(1).replace(vol=2.5)
    model = build_fermi_model(spec, 1, 0)
    k = model.dim_side
    # plus c_f direction against minus c_g direction
    assert model.pairing[0, k + 2] == pytest.approx(2.5)
    assert model.pairing[k + 2, 0] == pytest.approx(-2.5)
    vec = np.zeros(model.dim)
    vec[0], vec[2], vec[k + 2] = 1.5, 4.0, -1.0
    np.testing.assert_allclose(fermi_constants(model, vec), [1.5, 3.0])


def test_fermi_t_map_preserves_plus_pairing():
    model = build_fermi_model(canonical_preset(1), 3, 9)
    k = model.dim_side
    pp = model.pairing[:k, :k]
    np.testing.assert_allclose(model.t_map.T @ pp @ model.t_map, pp, atol=1e-10)


def test_three_region_model_shapes():
    lie = load_preset("su2")
    m3 = build_three_region_model(canonical_preset(2, lie), 4, 2)
    assert m3.bose.dim == (2 + 2) + (4 + 2) + (2 + 2)
    np.testing.assert_allclose(m3.bose.cov, m3.bose.cov.T)
    np.testing.assert_allclose(m3.fermi.cov, -m3.fermi.cov.T)
    assert m3.fermi.dim == 3 * 2 * 3


def test_negative_null_modes_rejected():
    with pytest.raises(ConfigurationError):
        build_bose_model(canonical_preset(1), -1, 0)
    with pytest.raises(ConfigurationError):
        build_fermi_model(canonical_preset(1), -1, 0)


def test_invalid_splitting_rejected():
    bad = canonical_preset(2).replace(s_star=np.eye(4))
    with pytest.raises(ConfigurationError):
        build_bose_model(bad, 0, 0)
