"""Cubic Bose and Bose-Fermi interaction elements and the operators they define.

The Bose element is the degree-3 state whose Fock pairings against generator
triples are ``-f_{abc} N_{ijk}``.  The Bose-Fermi element lives in
(Bose degree 1) (x) (Fermi degree 2); its pairings, taken with the operator
``J`` on the Fermi factor, are ``6 f_{a mu nu} V_i`` against
``x_{i a} (x) (0, mu) ^ (2, nu)``.  Both are obtained by solving the defining
linear systems against the relevant Gram matrices.

Operators on the tensor space act on states flattened as
``bose_index * dimF + fermi_index``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bose_fock import BoseSpace, OperatorMatrix, gram_adjoint, multiplication_operator
from .errors import ContractViolation, NumericalFailure
from .expm import expm_action, norm_bound
from .fermi_fock import FermiSpace, dagger_adjoint
from .lie_algebra import LieAlgebraSpec
from .splitting import SplittingSpec

DENSE_LIMIT = 400


class TensorSpace:
    """``BoseSpace (x) FermiSpace`` with the positive and split metrics."""

    def __init__(self, bose: BoseSpace, fermi: FermiSpace):
        self.bose = bose
        self.fermi = fermi
        self.dim = bose.dim * fermi.dim
        self.shape = (bose.dim, fermi.dim)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v

    def number_bose(self) -> np.ndarray:
        return np.repeat(self.bose.degrees, self.fermi.dim).astype(float)

    def number_total(self) -> np.ndarray:
        return (self.bose.degrees[:, None] + self.fermi.degrees[None, :]).ravel().astype(float)

    def lift_bose(self, op) -> sp.csr_matrix:
        m = op.matrix if isinstance(op, OperatorMatrix) else sp.csr_matrix(op)
        return sp.csr_matrix(sp.kron(m, sp.identity(self.fermi.dim), format="csr"))

    def hilbert_gram(self) -> sp.csr_matrix:
        return sp.csr_matrix(sp.kron(self.bose.gram, self.fermi.gram_plus))

    def split_gram(self) -> sp.csr_matrix:
        return sp.csr_matrix(sp.kron(self.bose.gram, self.fermi.split_gram()))

    def whiteners(self):
        """``W`` with ``hilbert_gram = W^T W`` and its inverse."""
        wb, wbinv = self.bose.whiteners()
        d = np.sqrt(self.fermi.gram_plus.diagonal())
        w = sp.kron(wb, sp.diags(d), format="csr")
        winv = sp.kron(wbinv, sp.diags(1.0 / d), format="csr")
        return w, winv

    def j_apply(self, v: np.ndarray) -> np.ndarray:
        return (self.fermi.j_matrix @ v.reshape(self.shape).T).T.ravel()

    def vacuum_pairing(self, v: np.ndarray) -> complex:
        """``<Omega, J v>`` in the Hilbert metric."""
        return self.j_apply(v)[0]


# ---------------------------------------------------------------- Bose -----


def build_xi_b(spec: SplittingSpec, lie: LieAlgebraSpec, space: BoseSpace) -> np.ndarray:
    """Degree-3 Bose interaction state."""
    if space.d < 3:
        raise ContractViolation(f"the cubic Bose element needs truncation d >= 3, got {space.d}")
    n = space.n
    rhs = np.array([
        -lie.f[p % n, q % n, r % n] * spec.n_tensor[p // n, q // n, r // n]
        for p, q, r in space.multisets[space.block(3)]
    ])
    out = np.zeros(space.dim)
    if np.any(rhs):
        out[space.block(3)] = sla.solve(space.gram_blocks[3], rhs, assume_a="pos")
    return out


def xi_b_pairings(space: BoseSpace, xi: np.ndarray) -> np.ndarray:
    """Fock pairings of a degree-3 state against the degree-3 monomial basis."""
    return space.gram_blocks[3] @ xi[space.block(3)]


def build_o_b(space: BoseSpace, xi_b: np.ndarray) -> OperatorMatrix:
    """``xi . + (xi .)^*``, self-adjoint in the Fock Gram."""
    if not np.any(xi_b):
        return OperatorMatrix(sp.csr_matrix((space.dim, space.dim)), "gram")
    x = multiplication_operator(space, xi_b)
    return x + gram_adjoint(space, x)


# ---------------------------------------------------------- Bose-Fermi -----


def fermi_pair_states(fspace: FermiSpace) -> np.ndarray:
    """States ``(0, mu) ^ (2, nu)`` stacked as ``(n, n, dimF)``."""
    n = fspace.n
    return np.array([[fspace.monomial_state([mu, n + nu]) for nu in range(n)] for mu in range(n)])


def build_xi_bf(spec: SplittingSpec, lie: LieAlgebraSpec, bspace: BoseSpace, fspace: FermiSpace) -> np.ndarray:
    """Coefficients ``c[i*n + a, mu, nu]`` of ``xi_BF`` on ``x_{ia} (x) (0,mu)^(2,nu)``."""
    if bspace.d < 1:
        raise ContractViolation("the Bose-Fermi element needs truncation d >= 1")
    n, g = lie.dim, spec.genus
    if bspace.n != n or fspace.n != n:
        raise ContractViolation("space colours do not match the Lie algebra")
    pairs = fermi_pair_states(fspace).reshape(n * n, fspace.dim)
    fermi_pairing = pairs @ (fspace.split_gram() @ pairs.T)
    bose_pairing = bspace.gram_blocks[1]
    system = np.kron(bose_pairing, fermi_pairing)
    rhs = np.zeros((g * n, n, n))
    for i in range(g):
        rhs[i * n:(i + 1) * n] = 6.0 * lie.f * spec.v_vec[i]
    rhs = rhs.ravel()
    if not np.any(rhs):
        return np.zeros((g * n, n, n))
    return np.linalg.solve(system.T, rhs).reshape(g * n, n, n)


def xi_bf_closed_form(spec: SplittingSpec, lie: LieAlgebraSpec, bspace: BoseSpace) -> np.ndarray:
    """``(M_1^{-1} (x) I) r / vol^2`` with ``r = 6 f V``; an independent route to :func:`build_xi_bf`."""
    n, g = lie.dim, spec.genus
    rhs = np.concatenate([6.0 * lie.f * spec.v_vec[i] for i in range(g)]).reshape(g * n, n * n)
    return (np.linalg.solve(bspace.gram_blocks[1], rhs) / spec.vol ** 2).reshape(g * n, n, n)


def build_o_bf(tspace: TensorSpace, xi_bf: np.ndarray) -> OperatorMatrix:
    """``xi_BF . + (xi_BF .)^dagger`` on the tensor space (split-form symmetric)."""
    bspace, fspace = tspace.bose, tspace.fermi
    n = fspace.n
    total = sp.csr_matrix((tspace.dim, tspace.dim))
    if not np.any(xi_bf):
        return OperatorMatrix(total, "split")
    pair_ops = [[fspace.wedge_ops[mu] @ fspace.wedge_ops[n + nu] for nu in range(n)] for mu in range(n)]
    raise_ops = bspace.raise_ops()
    for a in range(xi_bf.shape[0]):
        if not np.any(xi_bf[a]):
            continue
        f_op = sp.csr_matrix((fspace.dim, fspace.dim))
        for mu, nu in zip(*np.nonzero(xi_bf[a])):
            f_op = f_op + xi_bf[a, mu, nu] * pair_ops[mu][nu]
        r = raise_ops[a]
        total = total + sp.kron(r, f_op)
        total = total + sp.kron(gram_adjoint(bspace, r).matrix, dagger_adjoint(fspace, f_op).matrix)
    total = sp.csr_matrix(total)
    total.eliminate_zeros()
    return OperatorMatrix(total, "split")


def split_symmetry_residual(tspace: TensorSpace, op: OperatorMatrix) -> float:
    """``max |S O - O^H S|`` with ``S`` the split Gram."""
    s = tspace.split_gram()
    m = op.matrix
    diff = s @ m - m.conj().T @ s
    return float(abs(diff).max()) if diff.nnz else 0.0


# -------------------------------------------------------------- bounds -----


@dataclass
class BoundCertificate:
    k1: float
    k2: float
    k2_floor: float
    slack: float
    grid: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"k1": self.k1, "k2": self.k2, "k2_floor": self.k2_floor, "slack": self.slack}


def _hermitian_extreme(op, dim: int, which: str, dtype=float) -> float:
    """Largest (``LA``) or smallest (``SA``) eigenvalue of a Hermitian operator."""
    if dim <= DENSE_LIMIT:
        dense = op(np.eye(dim))
        vals = np.linalg.eigvalsh(0.5 * (dense + dense.conj().T))
        return float(vals[-1] if which == "LA" else vals[0])
    lin = spla.LinearOperator((dim, dim), matvec=op, dtype=dtype)
    v0 = np.ones(dim) / np.sqrt(dim)
    try:
        vals = spla.eigsh(lin, k=1, which=which, v0=v0, tol=1e-12, maxiter=50 * dim)[0]
    except spla.ArpackNoConvergence as exc:
        raise NumericalFailure("eigensolver did not converge") from exc
    return float(np.real(vals[0]))


def whitened(tspace: TensorSpace, op: OperatorMatrix) -> sp.csr_matrix:
    w, winv = tspace.whiteners()
    return sp.csr_matrix(w @ op.matrix @ winv)


def certify_bound(o_bf: OperatorMatrix, tspace: TensorSpace, growth: float = 2.0,
                  rel_tol: float = 1e-4) -> BoundCertificate:
    """Constants with ``O^* O <= k1 N_B + k2`` in the Hilbert metric.

    ``k2_floor`` is the norm of ``O`` on the Bose vacuum sector, the smallest
    ``k2`` any ``k1`` can achieve.  The returned ``k1`` is the smallest value
    (geometric grid, then bisection) whose optimal ``k2`` is within
    ``growth * k2_floor``.
    """
    if o_bf.nnz == 0 or abs(o_bf.matrix).max() == 0:
        return BoundCertificate(0.0, 0.0, 0.0, 0.0)
    oh = whitened(tspace, o_bf)
    ohh = sp.csr_matrix(oh.conj().T)
    nb = tspace.number_bose()
    dim = tspace.dim
    dt = oh.dtype

    def k2_of(k1: float) -> float:
        return max(0.0, _hermitian_extreme(lambda x: ohh @ (oh @ x) - k1 * (nb * x.T).T, dim, "LA", dt))

    vac = np.nonzero(nb == 0)[0]
    sub = oh[:, vac]
    subh = sp.csr_matrix(sub.conj().T)
    floor = max(0.0, _hermitian_extreme(lambda x: subh @ (sub @ x), len(vac), "LA", dt))
    target = max(growth * floor, 1e-12 * norm_bound(oh) ** 2)

    grid = []
    top = k2_of(0.0)
    grid.append((0.0, top))
    if top <= target:
        k1 = 0.0
    else:
        lo, hi = 0.0, max(floor, 1e-12)
        j = 0
        while True:
            val = k2_of(hi)
            grid.append((hi, val))
            if val <= target:
                break
            lo = hi
            j += 1
            hi = max(floor, 1e-12) * 2.0 ** (j / 4.0)
            if j > 400:
                raise NumericalFailure("bound search did not bracket")
        while hi - lo > rel_tol * hi:
            mid = 0.5 * (lo + hi)
            if k2_of(mid) <= target:
                hi = mid
            else:
                lo = mid
        k1 = hi
    k2 = k2_of(k1)
    k2 = k2 * (1 + 1e-9) + 1e-12 * max(1.0, k2)
    slack = _hermitian_extreme(lambda x: k1 * (nb * x.T).T + k2 * x - ohh @ (oh @ x), dim, "SA", dt)
    return BoundCertificate(float(k1), float(k2), float(floor), float(slack), grid)


def step_operator_norm(o_bf: OperatorMatrix, tspace: TensorSpace, eps: float, lam: float, n: int) -> float:
    """``|| exp(-eps N / n) exp(i lam O_BF / n) ||`` in the Hilbert metric."""
    oh = whitened(tspace, o_bf)
    ohh = sp.csr_matrix(oh.conj().T)
    damp = np.exp(-eps * tspace.number_total() / n)
    bound = norm_bound(oh)
    dim = tspace.dim

    def gram(x):
        y = expm_action(oh, x, 1j * lam / n, bound=bound)
        y = (damp ** 2 * y.T).T
        return expm_action(ohh, y, -1j * lam / n, bound=bound)

    return float(np.sqrt(max(_hermitian_extreme(gram, dim, "LA", complex), 0.0)))


def fit_growth_constant(o_bf: OperatorMatrix, tspace: TensorSpace, eps: float, lam: float,
                        ns: Sequence[int] = (4, 8, 16, 32), atol: float = 1e-9) -> tuple[float, float, list]:
    """``c_n = n log ||step_n||``; returns ``(c, spread, c_values)`` with ``c`` the largest ``c_n``.

    ``spread = (max - min) / max(max |c_n|, atol)``.  When ``O_BF`` is also
    self-adjoint in the Hilbert metric every step has norm 1 and all
    ``c_n`` vanish up to rounding, which ``atol`` absorbs.
    """
    if o_bf.nnz == 0:
        return 0.0, 0.0, [0.0] * len(ns)
    cs = [n * float(np.log(step_operator_norm(o_bf, tspace, eps, lam, n))) for n in ns]
    spread = (max(cs) - min(cs)) / max(max(abs(c) for c in cs), atol)
    return max(cs), spread, cs


# ---------------------------------------------------------------- bundle ---


@dataclass
class InteractionSet:
    xi_b: np.ndarray
    xi_bf: np.ndarray
    o_b: OperatorMatrix
    o_bf: OperatorMatrix
    k1: Optional[float] = None
    k2: Optional[float] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        nz = np.nonzero(self.xi_bf)
        return {
            "xi_b_norm": float(np.linalg.norm(self.xi_b)),
            "xi_b_support": int(np.count_nonzero(self.xi_b)),
            "xi_bf": [[int(a), int(mu), int(nu), float(self.xi_bf[a, mu, nu])] for a, mu, nu in zip(*nz)],
            "o_b_nnz": int(self.o_b.nnz),
            "o_bf_nnz": int(self.o_bf.nnz),
            "k1": self.k1,
            "k2": self.k2,
            "notes": list(self.notes),
        }


def build_interactions(spec: SplittingSpec, lie: LieAlgebraSpec, tspace: TensorSpace) -> InteractionSet:
    """Both interaction elements and operators; the cubic Bose term is dropped below d = 3."""
    bspace, fspace = tspace.bose, tspace.fermi
    notes = []
    if bspace.d >= 3:
        xi_b = build_xi_b(spec, lie, bspace)
    else:
        xi_b = np.zeros(bspace.dim)
        notes.append("d < 3: cubic Bose term set to zero")
    o_b = build_o_b(bspace, xi_b)
    if bspace.d >= 1:
        xi_bf = build_xi_bf(spec, lie, bspace, fspace)
    else:
        xi_bf = np.zeros((spec.genus * lie.dim, lie.dim, lie.dim))
        notes.append("d < 1: Bose-Fermi term set to zero")
    o_bf = build_o_bf(tspace, xi_bf)
    return InteractionSet(xi_b, xi_bf, o_b, o_bf, notes=notes)
