"""Compact Lie algebra data: orthonormal basis and structure constants.

The inner product on the algebra is ``<a, b> = -tr(a b)`` in the defining
representation, and the basis returned by the presets is orthonormal for it.
Structure constants are ``f[a, b, c] = -tr(e_a [e_b, e_c])`` so that
``[e_a, e_b] = sum_c f[a, b, c] e_c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .report import ValidationReport

TOL = 1e-12


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Structure constants of a compact Lie algebra in an orthonormal basis.

    Attributes:
        name: Preset name or ``"custom"``.
        dim: Dimension ``n`` of the algebra.
        f: Real array of shape ``(n, n, n)``.
        rep_matrices: Optional anti-Hermitian matrices of the defining
            representation, shape ``(n, k, k)``.
    """

    name: str
    dim: int
    f: np.ndarray
    rep_matrices: Optional[np.ndarray] = None

    def adjoint_matrices(self) -> np.ndarray:
        """Matrices of ``ad(e_a)``: entry ``[a, c, b]`` is the ``e_c`` component of ``[e_a, e_b]``."""
        return np.transpose(self.f, (0, 2, 1)).copy()

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.f)


def pauli_matrices() -> np.ndarray:
    return np.array(
        [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
    )


def gell_mann_matrices() -> np.ndarray:
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = np.diag([1, 1, -2]) / np.sqrt(3)
    return lam


def structure_constants(mats: np.ndarray) -> np.ndarray:
    """Compute ``-tr(e_a [e_b, e_c])`` for every triple of basis matrices."""
    mats = np.asarray(mats, dtype=complex)
    comm = np.einsum("bij,cjk->bcik", mats, mats) - np.einsum("cij,bjk->bcik", mats, mats)
    f = -np.einsum("aij,bcji->abc", mats, comm)
    return np.ascontiguousarray(f.real)


def _from_hermitian(herm: np.ndarray, name: str) -> LieAlgebraSpec:
    # hermitian generators with tr(h_a h_b) = 2 delta  ->  e_a = i h_a / sqrt(2)
    mats = 1j * herm / np.sqrt(2.0)
    return LieAlgebraSpec(name, len(mats), structure_constants(mats), mats)


def load_preset(name: str) -> LieAlgebraSpec:
    """Return one of the built-in algebras ``u1``, ``su2`` or ``su3``."""
    if name == "u1":
        return LieAlgebraSpec("u1", 1, np.zeros((1, 1, 1)), np.array([[[1j]]]))
    if name == "su2":
        return _from_hermitian(pauli_matrices(), "su2")
    if name == "su3":
        return _from_hermitian(gell_mann_matrices(), "su3")
    raise ConfigurationError(f"unknown Lie algebra preset {name!r} (expected u1, su2 or su3)")


def from_structure_constants(dim: int, f: Sequence[float], name: str = "custom") -> LieAlgebraSpec:
    """Build a spec from a flattened row-major structure-constant array."""
    arr = np.asarray(f, dtype=float)
    if dim < 1 or arr.size != dim**3:
        raise ConfigurationError(f"structure constants need {dim**3} entries, got {arr.size}")
    return LieAlgebraSpec(name, int(dim), arr.reshape(dim, dim, dim).copy())


def jacobi_residual(f: np.ndarray) -> float:
    t = np.einsum("abm,mcd->abcd", f, f)
    jac = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(jac))) if jac.size else 0.0


def antisymmetry_residual(f: np.ndarray) -> float:
    r1 = np.max(np.abs(f + np.transpose(f, (1, 0, 2))))
    r2 = np.max(np.abs(f + np.transpose(f, (0, 2, 1))))
    return float(max(r1, r2))


def validate_lie(spec: LieAlgebraSpec) -> ValidationReport:
    rep = ValidationReport("lie_algebra")
    f = np.asarray(spec.f, dtype=float)
    rep.add("shape", 0.0 if f.shape == (spec.dim,) * 3 else 1.0, 0.0)
    rep.add("antisymmetry", antisymmetry_residual(f), TOL)
    rep.add("jacobi", jacobi_residual(f), TOL)
    if spec.rep_matrices is not None:
        mats = np.asarray(spec.rep_matrices)
        gram = -np.einsum("aij,bji->ab", mats, mats)
        rep.add("orthonormality", float(np.max(np.abs(gram - np.eye(spec.dim)))), TOL)
        rep.add("commutator_consistency", float(np.max(np.abs(structure_constants(mats) - f))), TOL)
    return rep
