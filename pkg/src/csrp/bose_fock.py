"""Truncated symmetric algebra ``Sym^{<=d}(Lambda (x) g)`` with its Gram matrix.

Basis elements are monomials ``x^I`` in the generators ``(mode a, colour alpha)``
(flat index ``a * n + alpha``), ordered by degree and then lexicographically
in the sorted generator tuple.  The inner product uses the permanent
convention

    <v_1 ... v_k, w_1 ... w_k> = sum over permutations s of prod_i M(v_i, w_s(i))

with one-particle metric ``M = Q (x) I_n``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import ContractViolation
from .lie_algebra import LieAlgebraSpec
from .splitting import SplittingSpec


@dataclass(frozen=True)
class OperatorMatrix:
    """Sparse operator together with the metric its adjoints refer to."""

    matrix: sp.csr_matrix
    metric: str = "gram"

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(sp.csr_matrix(self.matrix @ other.matrix), self.metric)
        return self.matrix @ other

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(sp.csr_matrix(self.matrix + other.matrix), self.metric)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(sp.csr_matrix(self.matrix * scalar), self.metric)

    __rmul__ = __mul__

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def nnz(self) -> int:
        return self.matrix.nnz


def _csr(op) -> sp.csr_matrix:
    if isinstance(op, OperatorMatrix):
        return op.matrix
    return sp.csr_matrix(op)


class BoseSpace:
    """Truncated bosonic Fock space.

    Args:
        metric: One-particle metric on the ``g`` modes (``Q``); colours are
            orthonormal, so the generator metric is ``metric (x) I_n``.
        n_colors: Dimension of the Lie algebra.
        d: Truncation degree.
    """

    def __init__(self, metric: np.ndarray, n_colors: int, d: int):
        if d < 0:
            raise ContractViolation("truncation degree must be >= 0")
        self.q = np.array(metric, dtype=float)
        self.g = self.q.shape[0]
        self.n = int(n_colors)
        self.d = int(d)
        self.n_gen = self.g * self.n
        self.M = np.kron(self.q, np.eye(self.n))
        self.generators = [(a, al) for a in range(self.g) for al in range(self.n)]

        self.multisets: list[tuple] = []
        self.block_sizes = []
        for k in range(self.d + 1):
            block = list(itertools.combinations_with_replacement(range(self.n_gen), k))
            self.multisets.extend(block)
            self.block_sizes.append(len(block))
        self.offsets = np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(int)
        self.dim = int(self.offsets[-1])
        self.degrees = np.repeat(np.arange(self.d + 1), self.block_sizes)
        self.exponents = np.zeros((self.dim, self.n_gen), dtype=np.int64)
        for i, ms in enumerate(self.multisets):
            for j in ms:
                self.exponents[i, j] += 1
        self.index = {tuple(e): i for i, e in enumerate(map(tuple, self.exponents))}
        self.gram_blocks = self._gram_blocks()
        self.gram = sp.block_diag(self.gram_blocks, format="csr")
        self._raise = None
        self._whiten = None

    # ------------------------------------------------------------ structure

    def block(self, k: int) -> slice:
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))

    def _gram_blocks(self) -> list[np.ndarray]:
        blocks = [np.ones((1, 1))]
        for k in range(1, self.d + 1):
            sl = self.block(k)
            prev = blocks[-1]
            prev_off = self.offsets[k - 1]
            exps = self.exponents[sl]
            sets = self.multisets[sl]
            first = np.array([ms[0] for ms in sets])
            rest = np.array([self.index[tuple(self._minus(e, ms[0]))] - prev_off for e, ms in zip(exps, sets)])
            size = len(sets)
            gram = np.zeros((size, size))
            for b in range(self.n_gen):
                jb = exps[:, b]
                cols = np.nonzero(jb)[0]
                if cols.size == 0:
                    continue
                src = np.array([self.index[tuple(self._minus(exps[c], b))] - prev_off for c in cols])
                coeff = self.M[first, b]
                rows = np.nonzero(coeff)[0]
                if rows.size == 0:
                    continue
                gram[np.ix_(rows, cols)] += (
                    coeff[rows, None] * prev[np.ix_(rest[rows], src)] * jb[cols][None, :]
                )
            blocks.append(0.5 * (gram + gram.T))
        return blocks

    @staticmethod
    def _minus(exp: np.ndarray, j: int) -> np.ndarray:
        e = exp.copy()
        e[j] -= 1
        return e

    @property
    def gram_is_diagonal(self) -> bool:
        return all(np.count_nonzero(b - np.diag(np.diag(b))) == 0 for b in self.gram_blocks)

    def dims_per_degree(self) -> list[int]:
        return list(self.block_sizes)

    def expected_dim(self) -> int:
        return sum(comb(self.n_gen + k - 1, k) for k in range(self.d + 1))

    # ------------------------------------------------------------- vectors

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v

    def inner(self, u: np.ndarray, v: np.ndarray):
        """``u^H G v`` along the first axis."""
        return np.conj(u).T @ (self.gram @ v)

    def norm(self, v: np.ndarray) -> float:
        return float(np.sqrt(max(np.real(self.inner(v, v)), 0.0)))

    def raise_ops(self) -> list[sp.csr_matrix]:
        """Multiplication by each generator (truncated above degree ``d``)."""
        if self._raise is None:
            ops = []
            src_all = np.nonzero(self.degrees < self.d)[0]
            for j in range(self.n_gen):
                tgt = [self.index[tuple(self.exponents[i] + np.eye(self.n_gen, dtype=np.int64)[j])] for i in src_all]
                ops.append(sp.csr_matrix((np.ones(len(src_all)), (tgt, src_all)), shape=(self.dim, self.dim)))
            self._raise = ops
        return self._raise

    def one_particle(self, coeffs: Sequence[float]) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.result_type(np.asarray(coeffs), float))
        if self.d >= 1:
            v[self.block(1)] = coeffs
        return v

    def product_state(self, vectors: Sequence[np.ndarray]) -> np.ndarray:
        """Symmetric product of one-particle coefficient vectors (zero above ``d``)."""
        state = self.vacuum().astype(np.result_type(float, *[np.asarray(v) for v in vectors]) if vectors else float)
        if len(vectors) > self.d:
            return np.zeros_like(state)
        ops = self.raise_ops()
        for vec in vectors:
            new = np.zeros_like(state)
            for j, c in enumerate(vec):
                if c != 0:
                    new = new + c * (ops[j] @ state)
            state = new
        return state

    def monomial_state(self, generator_indices: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.dim)
        e = np.zeros(self.n_gen, dtype=np.int64)
        for j in generator_indices:
            e[j] += 1
        v[self.index[tuple(e)]] = 1.0
        return v

    def whiteners(self):
        """Block-diagonal ``W`` with ``gram = W^T W`` and its inverse (both sparse)."""
        if self._whiten is None:
            ws, winv = [], []
            for b in self.gram_blocks:
                if np.count_nonzero(b - np.diag(np.diag(b))) == 0:
                    dd = np.sqrt(np.diag(b))
                    ws.append(sp.diags(dd))
                    winv.append(sp.diags(1.0 / dd))
                else:
                    u = sla.cholesky(b, lower=False)
                    ws.append(sp.csr_matrix(u))
                    winv.append(sp.csr_matrix(sla.solve_triangular(u, np.eye(len(b)), lower=False)))
            self._whiten = (sp.block_diag(ws, format="csr"), sp.block_diag(winv, format="csr"))
        return self._whiten

    def gram_inverse(self) -> sp.csr_matrix:
        return sp.block_diag([np.linalg.inv(b) for b in self.gram_blocks], format="csr")


def build_bose_space(spec: SplittingSpec, lie: LieAlgebraSpec, d: int, metric: Optional[np.ndarray] = None) -> BoseSpace:
    """Fock space over ``span(lam) (x) g`` with metric ``Q`` (or an explicit override)."""
    return BoseSpace(spec.q_mat if metric is None else metric, lie.dim, d)


def number_operator(space: BoseSpace) -> OperatorMatrix:
    return OperatorMatrix(sp.diags(space.degrees.astype(float), format="csr"), "gram")


def multiplication_operator(space: BoseSpace, xi: np.ndarray) -> OperatorMatrix:
    """Matrix of ``v -> xi . v`` for a homogeneous degree-3 state ``xi``."""
    xi = np.asarray(xi)
    if xi.shape != (space.dim,):
        raise ContractViolation("state has the wrong dimension")
    support = np.nonzero(xi)[0]
    if support.size and np.any(space.degrees[support] != 3):
        raise ContractViolation("multiplication operator needs a homogeneous degree-3 state")
    rows, cols, vals = [], [], []
    sources = np.nonzero(space.degrees <= space.d - 3)[0]
    for k in support:
        ek = space.exponents[k]
        for i in sources:
            rows.append(space.index[tuple(space.exponents[i] + ek)])
            cols.append(i)
            vals.append(xi[k])
    mat = sp.csr_matrix((np.array(vals, dtype=xi.dtype if vals else float), (rows, cols)),
                        shape=(space.dim, space.dim))
    return OperatorMatrix(mat, "gram")


def gram_adjoint(space: BoseSpace, op) -> OperatorMatrix:
    """``G^{-1} op^H G``: the adjoint in the Fock inner product."""
    m = _csr(op)
    adj = space.gram_inverse() @ m.conj().T @ space.gram
    return OperatorMatrix(sp.csr_matrix(adj), "gram")
