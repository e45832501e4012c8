"""Gaussian and Berezin moment functionals on polynomials over a covariance model.

Polynomials are formal sums of monomials whose factors are coloured vectors:
a model coordinate tensored with a Lie-algebra colour, flattened as
``coord * n + colour``.  Colours contract with the identity, so the pairing of
two coloured vectors is ``x^T (P (x) I_n) y`` with ``P`` the model pairing.

Bose monomials are symmetric products; Fermi monomials are ordered wedge
products.  Wick ordering is ``exp(-i_v)`` where ``i_v`` removes a pair of
factors and multiplies by their pairing (with the reordering sign for
Fermi factors).

The Fermi functional ``psi`` is evaluated two ways: by the determinant of the
0-form/2-form pairing matrix after reordering a monomial to
``f_m ^ ... ^ f_1 ^ g_1 ^ ... ^ g_m``, and by a signed sum over perfect
matchings (:func:`psi_pfaffian`).
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .bose_fock import BoseSpace
from .errors import CapacityError, ContractViolation
from .fermi_fock import FermiSpace

BOSE_CAPACITY = 12
FERMI_CAPACITY = 8


# ------------------------------------------------------------ field spaces --


class Fields:
    """Coloured one-particle vectors over a covariance model."""

    kind = "generic"

    def __init__(self, model, n_colors: int):
        self.model = model
        self.n = int(n_colors)
        self.dim = model.dim * self.n
        self.pairing = np.kron(model.pairing, np.eye(self.n))
        self.regions = {
            name: slice(sl.start * self.n, sl.stop * self.n) for name, sl in model.regions.items()
        }

    def vector(self, coord: int, color=0) -> np.ndarray:
        """Model basis vector ``coord`` tensored with a colour (index or vector)."""
        col = np.eye(self.n)[color] if np.ndim(color) == 0 else np.asarray(color, dtype=float)
        v = np.zeros(self.dim)
        v[coord * self.n:(coord + 1) * self.n] = col
        return v

    def colored(self, model_vec: np.ndarray, color) -> np.ndarray:
        col = np.eye(self.n)[color] if np.ndim(color) == 0 else np.asarray(color, dtype=float)
        return np.kron(np.asarray(model_vec, dtype=float), col)

    def as_matrix(self, vec: np.ndarray) -> np.ndarray:
        """Reshape a coloured vector to ``(model_dim, n)``."""
        return np.asarray(vec).reshape(self.model.dim, self.n)

    def map(self, model_matrix: np.ndarray) -> np.ndarray:
        return np.kron(model_matrix, np.eye(self.n))

    def support(self, vec: np.ndarray) -> set:
        return {name for name, sl in self.regions.items() if np.any(vec[sl] != 0)}

    def pair(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ self.pairing @ y)

    def random_vector(self, rng: np.random.Generator, region: str, coords: Optional[Sequence[int]] = None) -> np.ndarray:
        sl = self.model.regions[region]
        local = np.arange(sl.stop - sl.start) if coords is None else np.asarray(coords)
        v = np.zeros((self.model.dim, self.n))
        v[sl.start + local] = rng.normal(size=(len(local), self.n))
        return v.ravel()

    # polynomial constructors
    def one(self, coef: float = 1.0):
        return self.poly_class(self, [(coef, ())])

    def zero(self):
        return self.poly_class(self, [])

    def monomial(self, *factors, coef: float = 1.0):
        return self.poly_class(self, [(coef, tuple(np.asarray(f, dtype=float) for f in factors))])


class BoseFields(Fields):
    kind = "bose"

    @property
    def poly_class(self):
        return BosePolynomial

    @property
    def r_star(self) -> np.ndarray:
        return self.map(self.model.r_star)

    def class_coordinates(self, vec: np.ndarray) -> np.ndarray:
        """Coefficients of ``pi_plus`` of a plus-side vector in the ``lam`` basis, flattened ``a * n + colour``."""
        p = self.model.regions["plus"]
        return (self.model.class_coords @ self.as_matrix(vec)[p]).ravel()

    def null_coords(self, region: str = "plus") -> list:
        g = self.model.g
        return list(range(g, g + self.model.m))


class FermiFields(Fields):
    kind = "fermi"

    def __init__(self, model, n_colors: int):
        super().__init__(model, n_colors)
        self.form_degree = np.repeat(model.form_degree, self.n)
        self.c_matrix = np.where(self.form_degree == 2, -1.0, 1.0)

    @property
    def poly_class(self):
        return FermiPolynomial

    @property
    def r_star(self) -> np.ndarray:
        return self.map(self.model.r_star)

    def constants(self, vec: np.ndarray) -> np.ndarray:
        """One-particle Fermi state ``(c_f, c_g)`` (length ``2n``) of a coloured vector."""
        c = self.model.pi @ self.as_matrix(vec)
        return np.concatenate([c[0], c[1]])

    def typed_parts(self, vec: np.ndarray):
        zero = np.where(self.form_degree == 0, vec, 0.0)
        return zero, vec - zero

    def form_type(self, vec: np.ndarray) -> Optional[int]:
        has0 = np.any(vec[self.form_degree == 0] != 0)
        has2 = np.any(vec[self.form_degree == 2] != 0)
        if has0 and has2:
            return None
        return 2 if has2 else 0


# ------------------------------------------------------------ polynomials --


class _Polynomial:
    def __init__(self, fields: Fields, terms: Iterable):
        self.fields = fields
        self.terms = [(c, tuple(f)) for c, f in terms]

    def _new(self, terms):
        return type(self)(self.fields, terms)

    def __add__(self, other):
        if np.isscalar(other):
            other = self.fields.one(other)
        return self._new(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if np.isscalar(other):
            return self._new([(c * other, f) for c, f in self.terms])
        return self._new([(c1 * c2, f1 + f2) for c1, f1 in self.terms for c2, f2 in other.terms])

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    @property
    def degree(self) -> int:
        return max((len(f) for _, f in self.terms), default=0)

    def map_factors(self, matrix: np.ndarray):
        return self._new([(c, tuple(matrix @ x for x in f)) for c, f in self.terms])

    def reflect(self):
        return self.map_factors(self.fields.r_star)

    def support(self) -> set:
        out = set()
        for _, f in self.terms:
            for x in f:
                out |= self.fields.support(x)
        return out

    def __len__(self):
        return len(self.terms)


class BosePolynomial(_Polynomial):
    """Linear combination of symmetric monomials of coloured Bose vectors."""


class FermiPolynomial(_Polynomial):
    """Linear combination of ordered wedge monomials of coloured Fermi vectors."""


# -------------------------------------------------------- combinatorics ----


@lru_cache(maxsize=None)
def partial_matchings(k: int) -> tuple:
    """All sets of disjoint pairs of ``range(k)`` as ``(pairs, rest, sign)``.

    ``sign`` is the parity of the permutation listing the pairs first
    (each pair in increasing order) followed by the unpaired positions.
    """
    out = []

    def rec(remaining, pairs):
        if not remaining:
            paired = [x for p in pairs for x in p]
            rest = tuple(sorted(set(range(k)) - set(paired)))
            out.append((tuple(pairs), rest, _parity(paired + list(rest))))
            return
        i, tail = remaining[0], remaining[1:]
        rec(tail, pairs)
        for idx, j in enumerate(tail):
            rec(tail[:idx] + tail[idx + 1:], pairs + [(i, j)])

    rec(tuple(range(k)), [])
    return tuple(out)


def _parity(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def hafnian(a: np.ndarray) -> float:
    """Sum over perfect matchings of products of entries (symmetric ``a``)."""
    n = len(a)
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0

    @lru_cache(maxsize=None)
    def rec(mask: int) -> float:
        if mask == 0:
            return 1.0
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        total = 0.0
        m = rest
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            if a[i, j] != 0:
                total += a[i, j] * rec(rest & ~(1 << j))
        return total

    return rec((1 << n) - 1)


def pfaffian_expansion(a: np.ndarray) -> float:
    """Signed sum over perfect matchings of the upper triangle of ``a``."""
    n = len(a)
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0

    @lru_cache(maxsize=None)
    def rec(mask: int) -> float:
        if mask == 0:
            return 1.0
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        total = 0.0
        m = rest
        between = 0
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            if a[i, j] != 0:
                sign = -1.0 if between % 2 else 1.0
                total += sign * a[i, j] * rec(rest & ~(1 << j))
            between += 1
        return total

    return rec((1 << n) - 1)


def permanent(a: np.ndarray) -> float:
    """Ryser's formula."""
    n = len(a)
    if n == 0:
        return 1.0
    total = 0.0
    for r in range(1, n + 1):
        for cols in itertools.combinations(range(n), r):
            total += (-1) ** r * np.prod(a[:, cols].sum(axis=1))
    return (-1) ** n * total


# --------------------------------------------------------- functionals -----


def _factor_gram(fields: Fields, factors) -> np.ndarray:
    if not factors:
        return np.zeros((0, 0))
    x = np.array(factors)
    return x @ fields.pairing @ x.T


def phi(poly: BosePolynomial) -> float:
    """Gaussian moment functional: sum over pair partitions of covariance products."""
    total = 0.0
    for coef, factors in poly.terms:
        k = len(factors)
        if k > BOSE_CAPACITY:
            raise CapacityError(f"monomial degree {k} exceeds Bose capacity {BOSE_CAPACITY}")
        if k % 2:
            continue
        total += coef * hafnian(_factor_gram(poly.fields, factors))
    return total


def _psi_typed_word(fields: FermiFields, word, types) -> float:
    zeros = [i for i, t in enumerate(types) if t == 0]
    twos = [i for i, t in enumerate(types) if t == 2]
    if len(zeros) != len(twos):
        return 0.0
    order = zeros[::-1] + twos
    sign = _parity(order)
    if not zeros:
        return float(sign)
    f = np.array([word[i] for i in zeros])
    g = np.array([word[i] for i in twos])
    return sign * float(np.linalg.det(f @ fields.pairing @ g.T))


def psi_monomial(fields: FermiFields, factors) -> float:
    """Determinant route for one wedge monomial (mixed factors expanded by type)."""
    k = len(factors)
    if k % 2:
        return 0.0
    if k // 2 > FERMI_CAPACITY:
        raise CapacityError(f"m = {k // 2} exceeds Fermi capacity {FERMI_CAPACITY}")
    parts = [fields.typed_parts(x) for x in factors]
    choices = []
    for i, (z, t) in enumerate(parts):
        opts = []
        if np.any(z != 0):
            opts.append((0, z))
        if np.any(t != 0):
            opts.append((2, t))
        if not opts:
            return 0.0
        choices.append(opts)
    total = 0.0
    for combo in itertools.product(*choices):
        types = [c[0] for c in combo]
        if 2 * types.count(0) != k:
            continue
        total += _psi_typed_word(fields, [c[1] for c in combo], types)
    return total


def psi(poly: FermiPolynomial, factorial_normalized: bool = False) -> float:
    """Berezin functional via the determinant of the 0-form/2-form pairing matrix.

    With ``factorial_normalized`` each degree-``2m`` monomial is divided by
    ``m!``; that variant no longer agrees with :func:`psi_pfaffian`.
    """
    total = 0.0
    for coef, f in poly.terms:
        value = coef * psi_monomial(poly.fields, f)
        if factorial_normalized:
            value /= math.factorial(len(f) // 2)
        total += value
    return total


def psi_pfaffian(poly: FermiPolynomial) -> float:
    """Berezin functional via the matching expansion of the antisymmetric pairing."""
    total = 0.0
    for coef, factors in poly.terms:
        if len(factors) // 2 > FERMI_CAPACITY:
            raise CapacityError(f"m = {len(factors) // 2} exceeds Fermi capacity {FERMI_CAPACITY}")
        total += coef * pfaffian_expansion(_factor_gram(poly.fields, factors))
    return total


# -------------------------------------------------------- Wick ordering ----


def _contract(poly, t: float):
    fermionic = isinstance(poly, FermiPolynomial)
    pairing = poly.fields.pairing
    out = []
    for coef, factors in poly.terms:
        k = len(factors)
        for pairs, rest, sign in partial_matchings(k):
            value = coef * (t ** len(pairs))
            if fermionic:
                value *= sign
            for i, j in pairs:
                value *= factors[i] @ pairing @ factors[j]
                if value == 0:
                    break
            if value != 0:
                out.append((value, tuple(factors[r] for r in rest)))
    return poly._new(out)


def wick_order(poly):
    """``:P: = exp(-i_v) P``."""
    return _contract(poly, -1.0)


def wick_unorder(poly):
    """``exp(+i_v) P``; also the expansion of ``P`` in Wick-ordered monomials."""
    return _contract(poly, 1.0)


def ordered_moment_rhs(fields: Fields, left, right) -> float:
    """Right-hand side of the Wick identity for two monomials.

    Bose: permanent of the cross-pairing matrix.  Fermi: the determinant of the
    cross-pairing matrix times ``(-1)^{k(k-1)/2}``.  Zero when degrees differ.
    """
    if len(left) != len(right):
        return 0.0
    if not left:
        return 1.0
    cross = np.array(left) @ fields.pairing @ np.array(right).T
    if fields.kind == "bose":
        return float(permanent(cross))
    k = len(left)
    return float((-1) ** (k * (k - 1) // 2) * np.linalg.det(cross))


# ------------------------------------------------ reflection positivity ----


def _require_plus(poly, name: str) -> None:
    extra = poly.support() - {"plus"}
    if extra:
        raise ContractViolation(f"{name} must be supported in the plus region, found {sorted(extra)}")


def q_form(p: BosePolynomial, q: BosePolynomial) -> float:
    """``Phi((R* P) Q)`` for plus-supported polynomials."""
    _require_plus(p, "P")
    _require_plus(q, "Q")
    return phi(p.reflect() * q)


def gram_q(polys: Sequence[BosePolynomial]) -> np.ndarray:
    k = len(polys)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            out[i, j] = out[j, i] = q_form(polys[i], polys[j])
    return out


def pi_sigma(p: BosePolynomial, space: BoseSpace) -> np.ndarray:
    """Boundary state of a plus-supported polynomial in the Bose Fock space."""
    _require_plus(p, "P")
    if p.degree > space.d:
        raise ContractViolation(f"degree {p.degree} exceeds truncation {space.d}")
    fields = p.fields
    out = np.zeros(space.dim)
    for coef, factors in wick_unorder(p).terms:
        out = out + coef * space.product_state([fields.class_coordinates(x) for x in factors])
    return out


def pi_sigma_F(p: FermiPolynomial, space: FermiSpace) -> np.ndarray:
    """Boundary state of a Fermi polynomial: Wick expansion, then ``(c_f, c_g)`` per factor."""
    fields = p.fields
    out = np.zeros(space.dim)
    for coef, factors in wick_unorder(p).terms:
        out = out + coef * space.wedge_product([fields.constants(x) for x in factors])
    return out


# ----------------------------------------------------- Fermi conjugations --


def c_map(p: FermiPolynomial) -> FermiPolynomial:
    """``(f, g)^c = (f, -g)`` on factors, with the reversal sign ``(-1)^{k(k-1)/2}``."""
    flip = p.fields.c_matrix
    out = []
    for coef, factors in p.terms:
        k = len(factors)
        out.append((coef * (-1) ** (k * (k - 1) // 2), tuple(flip * x for x in factors)))
    return p._new(out)


def t_map(p: FermiPolynomial) -> FermiPolynomial:
    """``f_1..f_n g_1..g_m -> L g_m .. L g_1 (-*d f_n) .. (-*d f_1)`` on the plus side.

    Each monomial must list pure 0-form factors before pure 2-form factors.
    """
    fields = p.fields
    model = fields.model
    plus = model.regions["plus"]
    t_full = np.zeros((model.dim, model.dim))
    t_full[plus, plus] = model.t_map
    t_col = fields.map(t_full)
    out = []
    for coef, factors in p.terms:
        types = [fields.form_type(x) for x in factors]
        if None in types or types != sorted(types):
            raise ContractViolation("t-map needs pure 0-form factors followed by pure 2-form factors")
        if fields.support(np.sum(factors, axis=0) if factors else np.zeros(fields.dim)) - {"plus"}:
            raise ContractViolation("t-map is defined on plus-supported polynomials")
        n0 = types.count(0)
        zeros, twos = factors[:n0], factors[n0:]
        new = [t_col @ g for g in reversed(twos)] + [t_col @ f for f in reversed(zeros)]
        out.append((coef, tuple(new)))
    return p._new(out)


def ghost_witness(fields: FermiFields, null_coord: int = 0, color=0) -> tuple[float, float]:
    """Value of ``Psi(R p^t ^ p)`` for ``p = (L g . xi) ^ (g . xi)`` with ``c_g = 0``.

    Returns ``(value, norm_product)`` where ``norm_product = |xi|^2 |L g|^2``.
    """
    model = fields.model
    m = model.m
    if m < 1:
        raise ContractViolation("the ghost witness needs at least one null 2-form")
    side = model.dim_side
    g_model = np.zeros(model.dim)
    g_model[(1 + m) + 1 + null_coord] = 1.0
    lg_model = np.zeros(model.dim)
    lg_model[: 1 + m] = model.same_side @ g_model[1 + m: side]
    xi = np.eye(fields.n)[color] if np.ndim(color) == 0 else np.asarray(color, dtype=float)
    p = fields.monomial(np.kron(lg_model, xi), np.kron(g_model, xi))
    value = psi(t_map(p).reflect() * p)
    norm_product = float(xi @ xi) * float(lg_model @ lg_model)
    return value, norm_product


# ------------------------------------------------------------ evaluation ---


def bose_evaluate(p: BosePolynomial, x: np.ndarray) -> float:
    """Value of the polynomial function ``prod_i <f_i, x>`` summed over terms."""
    return float(sum(c * np.prod([f @ x for f in fs]) for c, fs in p.terms))


def fermi_evaluate(p: FermiPolynomial, covectors: dict) -> float:
    """Pair each degree-``k`` part with the decomposable ``k``-covector ``covectors[k]`` (shape ``(k, dim)``)."""
    total = 0.0
    for c, fs in p.terms:
        k = len(fs)
        if k == 0:
            total += c
        elif k in covectors:
            total += c * np.linalg.det(covectors[k] @ np.array(fs).T)
    return float(total)


def random_polynomial(fields: Fields, rng: np.random.Generator, region: str, max_degree: int,
                      n_terms: int = 3, coords: Optional[Sequence[int]] = None, min_degree: int = 0):
    terms = []
    for _ in range(n_terms):
        k = int(rng.integers(min_degree, max_degree + 1))
        terms.append((float(rng.normal()), tuple(fields.random_vector(rng, region, coords) for _ in range(k))))
    return fields.poly_class(fields, terms)


# ------------------------------------------------------ mixed polynomials --


class MixedPolynomial:
    """Sums of products ``(Bose monomial) (x) (Fermi monomial)``."""

    def __init__(self, bose: BoseFields, fermi: FermiFields, terms: Iterable):
        self.bose = bose
        self.fermi = fermi
        self.terms = [(c, tuple(b), tuple(f)) for c, b, f in terms]

    @classmethod
    def from_parts(cls, pb: BosePolynomial, pf: FermiPolynomial) -> "MixedPolynomial":
        return cls(pb.fields, pf.fields, [(cb * cf, b, f) for cb, b in pb.terms for cf, f in pf.terms])

    def _new(self, terms):
        return MixedPolynomial(self.bose, self.fermi, terms)

    def __add__(self, other):
        return self._new(self.terms + other.terms)

    def __mul__(self, other):
        if np.isscalar(other):
            return self._new([(c * other, b, f) for c, b, f in self.terms])
        return self._new([(c1 * c2, b1 + b2, f1 + f2)
                          for c1, b1, f1 in self.terms for c2, b2, f2 in other.terms])

    def bose_part(self, i: int) -> BosePolynomial:
        c, b, _ = self.terms[i]
        return BosePolynomial(self.bose, [(c, b)])

    def fermi_part(self, i: int) -> FermiPolynomial:
        _, _, f = self.terms[i]
        return FermiPolynomial(self.fermi, [(1.0, f)])

    def reflect(self) -> "MixedPolynomial":
        rb, rf = self.bose.r_star, self.fermi.r_star
        return self._new([(c, tuple(rb @ x for x in b), tuple(rf @ x for x in f)) for c, b, f in self.terms])

    def c_map(self) -> "MixedPolynomial":
        """Conjugation ``(.)^c`` acting on the Fermi factor only."""
        out = []
        for i, (c, b, _) in enumerate(self.terms):
            for cf, f in c_map(self.fermi_part(i)).terms:
                out.append((c * cf, b, f))
        return self._new(out)

    def support(self) -> set:
        out = set()
        for _, b, f in self.terms:
            for x in b:
                out |= self.bose.support(x)
            for x in f:
                out |= self.fermi.support(x)
        return out


def phi_psi(p: MixedPolynomial) -> float:
    """``(Phi (x) Psi)`` evaluated termwise."""
    total = 0.0
    for i, (c, b, f) in enumerate(p.terms):
        fb = phi(BosePolynomial(p.bose, [(1.0, b)]))
        if fb != 0:
            total += c * fb * psi(p.fermi_part(i))
    return total


def pi_combined(p: MixedPolynomial, bspace: BoseSpace, fspace: FermiSpace) -> np.ndarray:
    """Boundary state in ``BoseSpace (x) FermiSpace`` as an array of shape ``(dimB, dimF)``."""
    out = np.zeros((bspace.dim, fspace.dim))
    for i, (c, b, f) in enumerate(p.terms):
        vb = pi_sigma(BosePolynomial(p.bose, [(c, b)]), bspace)
        vf = pi_sigma_F(p.fermi_part(i), fspace)
        out += np.outer(vb, vf)
    return out


def combined_inner(bspace: BoseSpace, fspace: FermiSpace, u: np.ndarray, v: np.ndarray) -> float:
    """``<u, J v>`` with the Bose Gram on the first axis and the Fermi split form on the second."""
    right = bspace.gram @ v @ (fspace.gram_plus @ fspace.j_matrix).T
    return float(np.sum(np.conj(u) * right))


def random_mixed(bose: BoseFields, fermi: FermiFields, rng: np.random.Generator, region: str,
                 max_bose: int, max_fermi: int, n_terms: int = 3) -> MixedPolynomial:
    terms = []
    for _ in range(n_terms):
        kb = int(rng.integers(0, max_bose + 1))
        kf = int(rng.integers(0, max_fermi + 1))
        terms.append((float(rng.normal()),
                      tuple(bose.random_vector(rng, region) for _ in range(kb)),
                      tuple(fermi.random_vector(rng, region) for _ in range(kf))))
    return MixedPolynomial(bose, fermi, terms)
