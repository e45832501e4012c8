"""Finite-dimensional one-particle models with explicit covariance matrices.

A model is a real vector space split into regions together with a bilinear
pairing ``C(f, h)`` standing in for ``<f, L h>``.  Cross-region pairings are
forced to factor through cohomology classes; same-region blocks are seeded
random matrices.  Reflection acts by exchanging the plus and minus blocks
coordinate by coordinate.

Sign conventions:

* Bose: for ``f`` on the plus side and ``h`` on the minus side,
  ``C(f, h) = omega(pi_plus f, pi_minus h)``.  With this sign the reflected
  form ``q(f, g) = C(R* f, g)`` equals ``Q(pi_plus f, pi_plus g)``.
* Fermi: ``cov`` uses the trace convention (cross-region value
  ``-vol * c_f * c_g``); :attr:`FermiOneParticleModel.pairing` is its negative,
  the value seen after contracting algebra colours with the positive metric.

Coordinates inside each Fermi region are ordered
``[c_f direction, null 0-forms, c_g direction, null 2-forms]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .report import ValidationReport
from .splitting import SplittingSpec, require_valid

TOL = 1e-12


def _well_conditioned(rng: np.random.Generator, k: int) -> np.ndarray:
    """Random ``k x k`` matrix with singular values in ``[0.5, 2]``."""
    if k == 0:
        return np.zeros((0, 0))
    q1, _ = np.linalg.qr(rng.normal(size=(k, k)))
    q2, _ = np.linalg.qr(rng.normal(size=(k, k)))
    return q1 @ np.diag(rng.uniform(0.5, 2.0, size=k)) @ q2


def _random_orthogonal(rng: np.random.Generator, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((0, 0))
    q, r = np.linalg.qr(rng.normal(size=(k, k)))
    return q * np.sign(np.diag(r))


def _random_symmetric(rng: np.random.Generator, k: int) -> np.ndarray:
    b = rng.normal(size=(k, k))
    return 0.5 * (b + b.T)


def _swap(k: int) -> np.ndarray:
    z, e = np.zeros((k, k)), np.eye(k)
    return np.block([[z, e], [e, z]])


def _max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------- Bose ----


@dataclass(frozen=True)
class BoseOneParticleModel:
    """Two-region Bose model; plus block first, then minus block.

    ``pi_plus`` and ``pi_minus`` map a side's coordinates to ``H^1(Sigma)``;
    ``class_coords`` maps plus coordinates to coefficients in the ``lam`` basis.
    Coordinates ``g .. g+m-1`` of each side are null modes; the first ``g``
    coordinates map to the ``lam`` basis through a random orthogonal matrix,
    so the reflected Gram has the same spectrum as ``Q`` plus ``m`` zeros.
    """

    spec: SplittingSpec
    g: int
    m: int
    cov: np.ndarray
    r_star: np.ndarray
    pi_plus: np.ndarray
    pi_minus: np.ndarray
    class_coords: np.ndarray
    seed: int = 0

    @property
    def dim_side(self) -> int:
        return self.g + self.m

    @property
    def dim(self) -> int:
        return 2 * self.dim_side

    @property
    def regions(self) -> dict:
        k = self.dim_side
        return {"plus": slice(0, k), "minus": slice(k, 2 * k)}

    @property
    def pairing(self) -> np.ndarray:
        return self.cov

    def q_gram(self) -> np.ndarray:
        """``q(e_i, e_j) = C(R* e_i, e_j)`` on the plus block."""
        p = self.regions["plus"]
        return self.r_star[:, p].T @ self.cov[:, p]

    def to_dict(self) -> dict:
        return {
            "kind": "bose", "g": self.g, "null_modes": self.m, "seed": self.seed,
            "cov": self.cov.tolist(), "r_star": self.r_star.tolist(),
            "pi_plus": self.pi_plus.tolist(), "pi_minus": self.pi_minus.tolist(),
        }


def build_bose_model(spec: SplittingSpec, null_modes: int, seed: int) -> BoseOneParticleModel:
    if null_modes < 0:
        raise ConfigurationError("null_modes must be >= 0")
    require_valid(spec)
    g, m = spec.genus, int(null_modes)
    k = g + m
    rng = np.random.default_rng(seed)
    coords = np.hstack([_random_orthogonal(rng, g), np.zeros((g, m))])
    pi_plus = spec.lam @ coords
    pi_minus = spec.s_star @ pi_plus
    same = _random_symmetric(rng, k)
    cross = pi_plus.T @ spec.omega @ pi_minus
    cov = np.block([[same, cross], [cross.T, same]])
    return BoseOneParticleModel(spec, g, m, cov, _swap(k), pi_plus, pi_minus, coords, seed)


def induced_lambda_metric(model: BoseOneParticleModel) -> np.ndarray:
    """Recover the metric on ``span(lam)`` from the reflected Gram of the model."""
    pinv = np.linalg.pinv(model.class_coords)
    q = pinv.T @ model.q_gram() @ pinv
    return 0.5 * (q + q.T)


def validate_bose_model(model: BoseOneParticleModel) -> ValidationReport:
    rep = ValidationReport("bose_model")
    spec, k = model.spec, model.dim_side
    p, mi = model.regions["plus"], model.regions["minus"]
    r, c = model.r_star, model.cov
    rep.add("r_star_involution", _max_abs(r @ r - np.eye(model.dim)), TOL)
    rep.add("r_star_exchanges_blocks", _max_abs(r[p, p]) + _max_abs(r[mi, mi]), 0.0)
    rep.add("cov_symmetric", _max_abs(c - c.T), TOL)
    rep.add("intertwining", _max_abs(model.pi_minus @ r[mi, p] - spec.s_star @ model.pi_plus), TOL)
    rank = np.linalg.matrix_rank(model.pi_plus) if k else 0
    rep.add("pi_plus_rank", abs(rank - model.g), 0)
    proj = spec.lam @ np.linalg.pinv(spec.lam)
    rep.add("pi_plus_range", _max_abs(proj @ model.pi_plus - model.pi_plus), 1e-10)
    cross = model.pi_plus.T @ spec.omega @ model.pi_minus
    rep.add("cross_factorization", _max_abs(c[p, mi] - cross), TOL)
    rep.add("reflection_invariance", _max_abs(r.T @ c @ r - c), TOL)
    gq = model.q_gram()
    ev = np.linalg.eigvalsh(0.5 * (gq + gq.T)) if k else np.zeros(0)
    scale = max(1.0, float(np.max(np.abs(ev)))) if k else 1.0
    rep.add("q_gram_psd", max(0.0, -float(ev.min())) if k else 0.0, 1e-10 * scale)
    kernel = int(np.sum(np.abs(ev) <= 1e-10 * scale))
    rep.add("q_gram_kernel_is_null_modes", abs(kernel - model.m), 0)
    pull = model.class_coords.T @ spec.q_mat @ model.class_coords
    rep.add("q_gram_is_pullback_of_Q", _max_abs(gq - pull), TOL)
    return rep


# --------------------------------------------------------------- Fermi ----


@dataclass(frozen=True)
class FermiOneParticleModel:
    """Two-region Fermi model (plus block first).

    ``cov`` is antisymmetric and only pairs 0-form with 2-form coordinates.
    ``pi`` (shape ``(2, dim)``) reads ``(c_f, c_g)`` off a vector, summed over both sides.
    ``same_side`` is the plus-plus pairing block ``K`` (rows: 0-form
    coordinates, columns: 2-form coordinates, positive-metric convention)
    and ``t_map`` realises ``(f, g) -> (L g, -star d f)`` on the plus side.
    """

    m: int
    vol: float
    cov: np.ndarray
    r_star: np.ndarray
    pi: np.ndarray
    form_degree: np.ndarray
    same_side: np.ndarray
    t_map: np.ndarray
    seed: int = 0

    @property
    def dim_side(self) -> int:
        return 2 * (1 + self.m)

    @property
    def dim(self) -> int:
        return 2 * self.dim_side

    @property
    def regions(self) -> dict:
        k = self.dim_side
        return {"plus": slice(0, k), "minus": slice(k, 2 * k)}

    @property
    def pairing(self) -> np.ndarray:
        return -self.cov

    def to_dict(self) -> dict:
        return {"kind": "fermi", "null_modes": self.m, "vol": self.vol, "seed": self.seed,
                "cov": self.cov.tolist(), "r_star": self.r_star.tolist()}


def _fermi_side_layout(m: int):
    zero = list(range(0, 1 + m))
    two = list(range(1 + m, 2 * (1 + m)))
    return zero, two


def _assemble_fermi(blocks: dict, region_dims: list, m: int) -> np.ndarray:
    """Antisymmetric pairing from (region_a, region_b) -> K blocks (0-forms of a, 2-forms of b)."""
    offsets = np.concatenate([[0], np.cumsum(region_dims)])
    zero, two = _fermi_side_layout(m)
    total = int(offsets[-1])
    pair = np.zeros((total, total))
    for (ra, rb), kmat in blocks.items():
        rows = offsets[ra] + np.array(zero)
        cols = offsets[rb] + np.array(two)
        pair[np.ix_(rows, cols)] += kmat
        pair[np.ix_(cols, rows)] -= kmat.T
    return pair


def _random_same_side(rng: np.random.Generator, m: int) -> np.ndarray:
    # the c_f row pairs only with the c_g direction, so L preserves the constants
    k = np.zeros((1 + m, 1 + m))
    k[0, 0] = 1.0
    k[1:, 0] = rng.normal(size=m)
    k[1:, 1:] = _well_conditioned(rng, m)
    return k


def build_fermi_model(spec: SplittingSpec, null_modes: int, seed: int) -> FermiOneParticleModel:
    if null_modes < 0:
        raise ConfigurationError("null_modes must be >= 0")
    require_valid(spec)
    m = int(null_modes)
    rng = np.random.default_rng(seed)
    k_same = _random_same_side(rng, m)
    k_cross = np.zeros((1 + m, 1 + m))
    k_cross[0, 0] = spec.vol
    side = 2 * (1 + m)
    pairing = _assemble_fermi({(0, 0): k_same, (1, 1): k_same, (0, 1): k_cross, (1, 0): k_cross},
                              [side, side], m)
    zero, two = _fermi_side_layout(m)
    pi = np.zeros((2, side))
    pi[0, zero[0]] = 1.0
    pi[1, two[0]] = 1.0
    pi_full = np.hstack([pi, pi])
    degree = np.array([0] * (1 + m) + [2] * (1 + m))
    t = np.zeros((side, side))
    t[np.ix_(zero, two)] = k_same
    t[np.ix_(two, zero)] = -np.linalg.inv(k_same)
    return FermiOneParticleModel(m, float(spec.vol), -pairing, _swap(side), pi_full,
                                 np.concatenate([degree, degree]), k_same, t, seed)


def fermi_constants(model, vec: np.ndarray) -> np.ndarray:
    """``(c_f, c_g)`` of an uncoloured vector (sum over all regions)."""
    return model.pi @ vec


def validate_fermi_model(model: FermiOneParticleModel) -> ValidationReport:
    rep = ValidationReport("fermi_model")
    c, r = model.cov, model.r_star
    p, mi = model.regions["plus"], model.regions["minus"]
    deg = model.form_degree
    rep.add("antisymmetry", _max_abs(c + c.T), TOL)
    same_type = np.equal.outer(deg, deg)
    rep.add("pairs_only_0_with_2", _max_abs(c[same_type]), 0.0)
    rep.add("r_star_involution", _max_abs(r @ r - np.eye(model.dim)), TOL)
    rep.add("reflection_invariance", _max_abs(r.T @ c @ r - c), TOL)
    rep.add("constants_reflection_invariant", _max_abs(model.pi @ r - model.pi), TOL)
    # cross pairing: -vol * c_f * c_g for every 0-form/2-form pair in different regions
    cf = model.pi[0] * (deg == 0)
    cg = model.pi[1] * (deg == 2)
    expected = -model.vol * (np.outer(cf, cg) - np.outer(cg, cf))
    cross = np.zeros_like(c, dtype=bool)
    cross[p, mi] = True
    cross[mi, p] = True
    rep.add("cross_region_pairing", _max_abs((c - expected)[cross]), TOL)
    t, pp = model.t_map, model.pairing[p, p]
    rep.add("t_map_invariance", _max_abs(t.T @ pp @ t - pp), 1e-10)
    return rep


# -------------------------------------------------------- three regions ----


@dataclass(frozen=True)
class ThreeRegionBoseModel:
    """Regions ``U | V | W`` separated by cuts ``1`` (between U and V) and ``2`` (between V and W).

    ``class_maps[cut][region]`` maps region coordinates into ``H^1(Sigma)``;
    ``sides[cut][region]`` is 1 for the U-side of the cut and 2 otherwise.
    Side-1 classes lie in ``span(lam)``, side-2 classes in ``span(lambda_plus)``.
    """

    spec: SplittingSpec
    cov: np.ndarray
    region_dims: dict
    class_maps: dict
    sides: dict

    @property
    def regions(self) -> dict:
        out, start = {}, 0
        for name in ("U", "V", "W"):
            out[name] = slice(start, start + self.region_dims[name])
            start += self.region_dims[name]
        return out

    @property
    def dim(self) -> int:
        return sum(self.region_dims.values())

    @property
    def pairing(self) -> np.ndarray:
        return self.cov


@dataclass(frozen=True)
class ThreeRegionFermiModel:
    vol: float
    m: int
    cov: np.ndarray
    pi: np.ndarray
    form_degree: np.ndarray

    @property
    def regions(self) -> dict:
        k = 2 * (1 + self.m)
        return {name: slice(i * k, (i + 1) * k) for i, name in enumerate(("U", "V", "W"))}

    @property
    def dim(self) -> int:
        return 6 * (1 + self.m)

    @property
    def pairing(self) -> np.ndarray:
        return -self.cov


@dataclass(frozen=True)
class ThreeRegionModel:
    bose: ThreeRegionBoseModel
    fermi: ThreeRegionFermiModel
    seed: int = 0
    extras: dict = field(default_factory=dict)


def build_three_region_model(spec: SplittingSpec, seed: int, null_modes: int = 1) -> ThreeRegionModel:
    require_valid(spec)
    g, m = spec.genus, int(null_modes)
    rng = np.random.default_rng(seed)
    lam, s, om = spec.lam, spec.s_star, spec.omega
    a_u = np.hstack([_well_conditioned(rng, g), np.zeros((g, m))])
    a_v = np.hstack([_well_conditioned(rng, 2 * g), np.zeros((2 * g, m))])
    a_w = np.hstack([_well_conditioned(rng, g), np.zeros((g, m))])
    cls_u = lam @ a_u
    cls_v1 = s @ lam @ a_v[:g]
    cls_v2 = lam @ a_v[g:]
    cls_w = s @ lam @ a_w
    class_maps = {1: {"U": cls_u, "V": cls_v1, "W": cls_w}, 2: {"U": cls_u, "V": cls_v2, "W": cls_w}}
    sides = {1: {"U": 1, "V": 2, "W": 2}, 2: {"U": 1, "V": 1, "W": 2}}
    dims = {"U": g + m, "V": 2 * g + m, "W": g + m}
    blocks = {name: _random_symmetric(rng, dims[name]) for name in dims}
    uv = cls_u.T @ om @ cls_v1
    vw = cls_v2.T @ om @ cls_w
    uw = cls_u.T @ om @ cls_w
    cov = np.block([
        [blocks["U"], uv, uw],
        [uv.T, blocks["V"], vw],
        [uw.T, vw.T, blocks["W"]],
    ])
    bose = ThreeRegionBoseModel(spec, cov, dims, class_maps, sides)

    side = 2 * (1 + m)
    k_cross = np.zeros((1 + m, 1 + m))
    k_cross[0, 0] = spec.vol
    fblocks = {}
    for a in range(3):
        for b in range(3):
            fblocks[(a, b)] = _random_same_side(rng, m) if a == b else k_cross
    pairing = _assemble_fermi(fblocks, [side] * 3, m)
    zero, two = _fermi_side_layout(m)
    pi = np.zeros((2, side))
    pi[0, zero[0]] = 1.0
    pi[1, two[0]] = 1.0
    degree = np.array([0] * (1 + m) + [2] * (1 + m))
    fermi = ThreeRegionFermiModel(float(spec.vol), m, -pairing, np.hstack([pi] * 3), np.tile(degree, 3))
    return ThreeRegionModel(bose, fermi, seed)
