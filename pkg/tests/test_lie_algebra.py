import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from csrp.errors import ConfigurationError
from csrp.lie_algebra import (
    from_structure_constants,
    jacobi_residual,
    load_preset,
    structure_constants,
    validate_lie,
)


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for p in itertools.permutations(range(3)):
        inversions = sum(1 for i, j in itertools.combinations(range(3), 2) if p[i] > p[j])
        eps[p] = (-1) ** inversions
    return eps


@pytest.mark.parametrize("name", ["u1", "su2", "su3"])
def test_presets_validate(name):
    rep = validate_lie(load_preset(name))
    assert rep.passed, str(rep)


def test_su2_constants_are_scaled_levi_civita():
    # e_a = i sigma_a / sqrt 2 gives [e_a, e_b] = -sqrt2 eps_abc e_c
    f = load_preset("su2").f
    np.testing.assert_allclose(f, -np.sqrt(2.0) * levi_civita(), atol=1e-15)


@pytest.mark.parametrize("name,n", [("su2", 2), ("su3", 3)])
def test_killing_contraction(name, n):
    # sum_cd f_acd f_bcd = 2N delta_ab for su(N) in this normalisation
    f = load_preset(name).f
    np.testing.assert_allclose(np.einsum("acd,bcd->ab", f, f), 2 * n * np.eye(n * n - 1), atol=1e-12)


def test_u1_is_abelian():
    lie = load_preset("u1")
    assert lie.dim == 1 and lie.is_abelian
    assert not load_preset("su2").is_abelian


@pytest.mark.parametrize("name", ["su2", "su3"])
def test_adjoint_matrices_reproduce_commutators(name):
    lie = load_preset(name)
    e = lie.rep_matrices
    ad = lie.adjoint_matrices()
    for a, b in itertools.product(range(lie.dim), repeat=2):
        comm = e[a] @ e[b] - e[b] @ e[a]
        np.testing.assert_allclose(np.einsum("c,cij->ij", ad[a][:, b], e), comm, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(float, 8, elements=st.floats(-3, 3)), arrays(float, 8, elements=st.floats(-3, 3)))
def test_adjoint_is_a_representation(x, y):
    lie = load_preset("su3")
    ad = lie.adjoint_matrices()
    adx, ady = np.einsum("a,aij->ij", x, ad), np.einsum("a,aij->ij", y, ad)
    xy = np.einsum("a,b,abc->c", x, y, lie.f)
    np.testing.assert_allclose(np.einsum("c,cij->ij", xy, ad), adx @ ady - ady @ adx, atol=1e-9)


def test_structure_constants_totally_antisymmetric():
    f = structure_constants(load_preset("su3").rep_matrices)
    for perm in itertools.permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[list(perm)])
        np.testing.assert_allclose(np.transpose(f, perm), sign * f, atol=1e-14)


def test_non_lie_constants_fail_jacobi():
    # in dimension 4 every 3-form is a Lie bracket (su2 + u1); dimension 5 is generic
    rng = np.random.default_rng(0)
    f = rng.normal(size=(5, 5, 5))
    f = sum(np.linalg.det(np.eye(3)[list(p)]) * np.transpose(f, p) for p in itertools.permutations(range(3)))
    lie = from_structure_constants(5, f.ravel())
    assert jacobi_residual(lie.f) > 1e-3
    rep = validate_lie(lie)
    assert not rep.passed and rep["jacobi"].residual > 1e-3


def test_bad_inputs():
    with pytest.raises(ConfigurationError):
        load_preset("so5")
    with pytest.raises(ConfigurationError):
        from_structure_constants(2, [0.0] * 7)
