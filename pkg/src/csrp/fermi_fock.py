"""Exterior algebra ``Lambda^*(g + g)`` with positive and split metrics.

Generators are ordered ``(0,0) < ... < (0,n-1) < (2,0) < ... < (2,n-1)``
(flat indices ``0..n-1`` for the 0-form type, ``n..2n-1`` for the 2-form
type).  A basis monomial is the wedge of its generators in increasing order;
basis order is by degree, then lexicographic.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp

from .bose_fock import OperatorMatrix, _csr
from .lie_algebra import LieAlgebraSpec


class FermiSpace:
    """Fermionic state space for an ``n``-dimensional Lie algebra.

    Attributes:
        gram_plus: Diagonal Gram of the positive metric, ``vol^{|I|}``.
        j_matrix: Signed permutation matrix of ``Lambda^* J`` with ``J(a, b) = (b, a)``.
    """

    def __init__(self, n: int, vol: float = 1.0):
        self.n = int(n)
        self.vol = float(vol)
        self.n_gen = 2 * self.n
        self.subsets = [s for k in range(self.n_gen + 1) for s in itertools.combinations(range(self.n_gen), k)]
        self.dim = len(self.subsets)
        self.index = {s: i for i, s in enumerate(self.subsets)}
        self.degrees = np.array([len(s) for s in self.subsets])
        self.wedge_ops = [self._wedge_generator(i) for i in range(self.n_gen)]
        self.gram_plus = sp.diags(self.vol ** self.degrees.astype(float), format="csr")
        self.j_matrix = self._lift(self._swap_generator)

    def _wedge_generator(self, i: int) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for col, s in enumerate(self.subsets):
            if i in s:
                continue
            pos = sum(1 for x in s if x < i)
            rows.append(self.index[tuple(sorted(s + (i,)))])
            cols.append(col)
            vals.append(-1.0 if pos % 2 else 1.0)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def _swap_generator(self, i: int) -> int:
        return i + self.n if i < self.n else i - self.n

    def _lift(self, gen_map) -> sp.csr_matrix:
        """Matrix of the algebra automorphism induced by a generator permutation."""
        rows, cols, vals = [], [], []
        for col, s in enumerate(self.subsets):
            state = self.vacuum()
            for i in reversed(s):
                state = self.wedge_ops[gen_map(i)] @ state
            (row,) = np.nonzero(state)[0]
            rows.append(row)
            cols.append(col)
            vals.append(state[row])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v

    def inner_plus(self, u: np.ndarray, v: np.ndarray):
        return np.conj(u).T @ (self.gram_plus @ v)

    def inner_split(self, u: np.ndarray, v: np.ndarray):
        return np.conj(u).T @ (self.gram_plus @ (self.j_matrix @ v))

    def split_gram(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.gram_plus @ self.j_matrix)

    def one_particle_block(self) -> slice:
        return slice(1, 1 + self.n_gen)

    def one_particle(self, zero_part, two_part) -> np.ndarray:
        """State ``(a, b)`` with ``a`` on the 0-form and ``b`` on the 2-form generators."""
        v = np.zeros(self.dim, dtype=np.result_type(np.asarray(zero_part), np.asarray(two_part), float))
        v[1:1 + self.n] = zero_part
        v[1 + self.n:1 + self.n_gen] = two_part
        return v

    def wedge_product(self, vectors) -> np.ndarray:
        """``v_1 ^ v_2 ^ ... ^ v_k`` for one-particle coefficient vectors of length ``2n``."""
        state = self.vacuum().astype(complex if any(np.iscomplexobj(v) for v in vectors) else float)
        for vec in reversed(list(vectors)):
            new = np.zeros_like(state)
            for i, c in enumerate(vec):
                if c != 0:
                    new = new + c * (self.wedge_ops[i] @ state)
            state = new
        return state

    def monomial_state(self, generators) -> np.ndarray:
        """Wedge of generators in the given order (sign included)."""
        return self.wedge_product([np.eye(self.n_gen)[i] for i in generators])


def build_fermi_space(lie: LieAlgebraSpec, vol: float = 1.0) -> FermiSpace:
    return FermiSpace(lie.dim, vol)


def c_signs(space: FermiSpace) -> np.ndarray:
    """Diagonal of the conjugation ``m -> (-1)^{|m|(|m|-1)/2 + #(2-type)} m``."""
    out = np.empty(space.dim)
    for i, s in enumerate(space.subsets):
        k = len(s)
        s2 = sum(1 for x in s if x >= space.n)
        out[i] = (-1.0) ** (k * (k - 1) // 2 + s2)
    return out


def c_conjugation(space: FermiSpace, p: np.ndarray) -> np.ndarray:
    return c_signs(space) * p


def number_operator_F(space: FermiSpace) -> OperatorMatrix:
    return OperatorMatrix(sp.diags(space.degrees.astype(float), format="csr"), "plus")


def fermi_multiplication(space: FermiSpace, eta: np.ndarray) -> OperatorMatrix:
    """Left exterior multiplication by an arbitrary state ``eta``."""
    eta = np.asarray(eta)
    total = sp.csr_matrix((space.dim, space.dim), dtype=np.result_type(eta, float))
    for k in np.nonzero(eta)[0]:
        op = sp.identity(space.dim, format="csr")
        for i in space.subsets[k]:
            op = op @ space.wedge_ops[i]
        total = total + eta[k] * op
    return OperatorMatrix(sp.csr_matrix(total), "plus")


def plus_adjoint(space: FermiSpace, op) -> sp.csr_matrix:
    m = _csr(op)
    ginv = sp.diags(1.0 / space.gram_plus.diagonal())
    return sp.csr_matrix(ginv @ m.conj().T @ space.gram_plus)


def dagger_adjoint(space: FermiSpace, op) -> OperatorMatrix:
    """Adjoint in the split form: ``J^{-1} op^* J`` with ``*`` the positive-metric adjoint."""
    j = space.j_matrix
    return OperatorMatrix(sp.csr_matrix(j @ plus_adjoint(space, op) @ j), "split")
