"""Linear data of a reflection-split 3-manifold.

Everything lives on ``H^1(Sigma, R) = R^{2g}`` with intersection form ``omega``.
The involution ``s_star`` is anti-symplectic, ``lambda_plus`` spans the image of
the plus side, and ``lam = s_star @ lambda_plus`` spans the image of the minus
side.  The positive form on ``span(lam)`` is ``Q_ij = -omega(S* l_i, l_j)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .lie_algebra import LieAlgebraSpec
from .report import ValidationReport

TOL = 1e-12


@dataclass(frozen=True)
class SplittingSpec:
    """Cohomological shadow of the split manifold plus interaction inputs.

    ``airy_B`` has shape ``(g, m, m)`` and ``airy_F`` shape ``(n, m, m)``.
    """

    genus: int
    omega: np.ndarray
    s_star: np.ndarray
    lambda_plus: np.ndarray
    lam: np.ndarray
    q_mat: np.ndarray
    n_tensor: np.ndarray
    v_vec: np.ndarray
    vol: float
    airy_J: np.ndarray
    airy_K: np.ndarray
    airy_B: np.ndarray
    airy_F: np.ndarray

    def replace(self, **changes) -> "SplittingSpec":
        return replace(self, **changes)

    @property
    def block_size(self) -> int:
        return int(self.airy_K.shape[0])


def derive_Q(omega: np.ndarray, s_star: np.ndarray, lam: np.ndarray, with_residual: bool = False):
    """Form ``Q_ij = -(S* l_i)^T omega l_j`` on the columns of ``lam``, symmetrized."""
    omega, s_star, lam = (np.asarray(a, dtype=float) for a in (omega, s_star, lam))
    n2 = omega.shape[0]
    if omega.shape != (n2, n2) or s_star.shape != (n2, n2) or lam.ndim != 2 or lam.shape[0] != n2:
        raise ConfigurationError(
            f"dimension mismatch: omega {omega.shape}, s_star {s_star.shape}, lambda {lam.shape}"
        )
    raw = -(s_star @ lam).T @ omega @ lam
    q = 0.5 * (raw + raw.T)
    asym = float(np.max(np.abs(raw - raw.T))) if raw.size else 0.0
    return (q, asym) if with_residual else q


def antisymmetric_ones(g: int, amplitude: float = 1.0) -> np.ndarray:
    """Totally antisymmetric tensor with entry ``amplitude`` at every ``a < b < c``."""
    n = np.zeros((g, g, g))
    for a, b, c in itertools.combinations(range(g), 3):
        for perm, sign in _PERMS3:
            idx = tuple((a, b, c)[p] for p in perm)
            n[idx] = sign * amplitude
    return n


_PERMS3 = [((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1)]


def symmetric_basis_matrices(m: int) -> list[np.ndarray]:
    """``E_pp`` and ``E_pq + E_qp`` for ``p < q``, in row-major order."""
    out = []
    for p in range(m):
        for q in range(p, m):
            e = np.zeros((m, m))
            e[p, q] = e[q, p] = 1.0
            out.append(e)
    return out


def canonical_preset(genus: int, lie: Optional[LieAlgebraSpec] = None, n_amplitude: float = 1.0) -> SplittingSpec:
    """Standard symplectic basis ``(a_1..a_g, b_1..b_g)`` with ``S* a_i = -b_i``.

    The determinant block size of the Airy data is ``dim lie`` (1 without a
    Lie algebra); ``B_a`` cycles through the symmetric basis matrices and
    ``F_alpha`` are adjoint matrices.
    """
    if genus < 1:
        raise ConfigurationError("genus must be >= 1")
    g = int(genus)
    eye, zero = np.eye(g), np.zeros((g, g))
    omega = np.block([[zero, eye], [-eye, zero]])
    s_star = np.block([[zero, -eye], [-eye, zero]])
    lambda_plus = np.vstack([eye, zero])
    lam = s_star @ lambda_plus
    q = derive_Q(omega, s_star, lam)
    m = lie.dim if lie is not None else 1
    sym = symmetric_basis_matrices(m)
    airy_b = np.array([sym[a % len(sym)] for a in range(g)])
    airy_f = lie.adjoint_matrices() if lie is not None else np.zeros((1, 1, 1))
    return SplittingSpec(
        genus=g,
        omega=omega,
        s_star=s_star,
        lambda_plus=lambda_plus,
        lam=lam,
        q_mat=q,
        n_tensor=antisymmetric_ones(g, n_amplitude),
        v_vec=np.ones(g),
        vol=1.0,
        airy_J=q.copy(),
        airy_K=np.eye(m),
        airy_B=airy_b,
        airy_F=airy_f,
    )


def random_symplectic(g: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Product of random shears and a block-diagonal ``diag(A, A^{-T})``, all in ``Sp(2g)``."""
    eye, zero = np.eye(g), np.zeros((g, g))
    s1 = rng.normal(scale=scale, size=(g, g))
    s2 = rng.normal(scale=scale, size=(g, g))
    a = eye + rng.normal(scale=scale, size=(g, g))
    upper = np.block([[eye, s1 + s1.T], [zero, eye]])
    lower = np.block([[eye, zero], [s2 + s2.T, eye]])
    diag = np.block([[a, zero], [zero, np.linalg.inv(a).T]])
    return upper @ lower @ diag


def change_symplectic_basis(spec: SplittingSpec, t: np.ndarray) -> SplittingSpec:
    """Express the splitting data in coordinates ``x = t x'`` (``t`` symplectic)."""
    t_inv = np.linalg.inv(t)
    lam_plus = t_inv @ spec.lambda_plus
    s_star = t_inv @ spec.s_star @ t
    omega = t.T @ spec.omega @ t
    lam = s_star @ lam_plus
    return spec.replace(omega=omega, s_star=s_star, lambda_plus=lam_plus, lam=lam,
                        q_mat=derive_Q(omega, s_star, lam))


def _max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def validate_splitting(spec: SplittingSpec) -> ValidationReport:
    rep = ValidationReport("splitting")
    g = spec.genus
    om, s, lp, lam = spec.omega, spec.s_star, spec.lambda_plus, spec.lam
    shapes_ok = (
        om.shape == (2 * g, 2 * g) and s.shape == (2 * g, 2 * g)
        and lp.shape == (2 * g, g) and lam.shape == (2 * g, g)
        and spec.q_mat.shape == (g, g) and spec.n_tensor.shape == (g, g, g)
        and spec.v_vec.shape == (g,) and spec.airy_J.shape == (g, g)
        and spec.airy_B.shape[0] == g
    )
    rep.add("shapes", 0.0 if shapes_ok else 1.0, 0.0)
    if not shapes_ok:
        return rep
    rep.add("omega_antisymmetric", _max_abs(om + om.T), TOL)
    sv = np.linalg.svd(om, compute_uv=False)
    rep.add_positive("omega_nondegenerate", sv.min() / max(sv.max(), 1.0), 1e-12)
    rep.add("s_star_involution", _max_abs(s @ s - np.eye(2 * g)), TOL)
    rep.add("s_star_antisymplectic", _max_abs(s.T @ om @ s + om), TOL)
    pos = (s @ lp).T @ om @ lp
    pos = 0.5 * (pos + pos.T)
    rep.add_positive("positivity_on_lambda_plus", np.linalg.eigvalsh(pos).min())
    rep.add("lambda_is_s_star_lambda_plus", _max_abs(lam - s @ lp), TOL)
    q_derived = derive_Q(om, s, lam)
    q = spec.q_mat
    rep.add("q_symmetric", _max_abs(q - q.T), TOL)
    rep.add_positive("q_positive_definite", np.linalg.eigvalsh(0.5 * (q + q.T)).min())
    rep.add("q_matches_derived", _max_abs(q - q_derived), 1e-10)
    n = spec.n_tensor
    n_res = max(_max_abs(n + np.transpose(n, (1, 0, 2))), _max_abs(n + np.transpose(n, (0, 2, 1))))
    rep.add("n_tensor_antisymmetric", n_res, TOL)
    rep.add_positive("vol_positive", spec.vol)
    j = spec.airy_J
    rep.add("airy_J_symmetric", _max_abs(j - j.T), TOL)
    rep.add_positive("airy_J_positive_definite", np.linalg.eigvalsh(0.5 * (j + j.T)).min())
    m = spec.airy_K.shape[0]
    blocks_ok = spec.airy_K.shape == (m, m) and spec.airy_B.shape[1:] == (m, m) and spec.airy_F.shape[1:] == (m, m)
    rep.add("airy_block_shapes", 0.0 if blocks_ok else 1.0, 0.0)
    return rep


def require_valid(spec: SplittingSpec) -> None:
    rep = validate_splitting(spec)
    if not rep.passed:
        names = ", ".join(c.name for c in rep.failures())
        raise ConfigurationError(f"splitting data fails validation: {names}")
