"""Finite-dimensional integral with Gaussian weight, imaginary cubic phase and a determinant prefactor.

    Z(lam) = int dt exp(-<t, (J^-1 (x) I) t> - i lam C(t)) det(K (x) I + 6 i lam sum t_a^al B_a (x) F_al)

over ``t in R^{g n}`` (flattened ``a * n + al``), with ``C(t) = sum f_{al be ga} N_{abc} t_a^al t_b^be t_c^ga``.
The Gaussian factor is integrated exactly by the change of variables
``t = L s`` with ``L L^T = J (x) I``, leaving ``det L * int exp(-|s|^2) h(L s) ds``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, ConfigurationError
from .lie_algebra import LieAlgebraSpec
from .splitting import SplittingSpec

QUADRATURE_CAP = 12
MAX_NODES = 4_000_000
SHARD_SIZE = 1 << 16
METHODS = ("monte_carlo", "gauss_quadrature")


@dataclass(frozen=True)
class AiryConfig:
    lam: float = 0.0
    method: str = "monte_carlo"
    samples: int = 100_000
    order: Optional[int] = None
    seed: int = 0
    threads: Optional[int] = None


@dataclass(frozen=True)
class AiryResult:
    value: complex
    stderr: float
    samples: int
    method: str
    order: Optional[int] = None
    delta: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "stderr": self.stderr,
            "samples": self.samples,
            "method": self.method,
            "order": self.order,
            "delta": self.delta,
        }


class AiryIntegrand:
    """Precomputed tensors of the integrand for one ``(spec, lie)`` pair."""

    def __init__(self, spec: SplittingSpec, lie: LieAlgebraSpec):
        g, n = spec.genus, lie.dim
        if spec.airy_F.shape[0] != n:
            raise ConfigurationError(f"airy_F has {spec.airy_F.shape[0]} matrices, Lie algebra has dim {n}")
        jmat = np.asarray(spec.airy_J, dtype=float)
        if not np.allclose(jmat, jmat.T) or np.linalg.eigvalsh(0.5 * (jmat + jmat.T)).min() <= 0:
            raise ConfigurationError("airy_J must be symmetric positive definite")
        self.g, self.n, self.dim = g, n, g * n
        cov = np.kron(jmat, np.eye(n))
        self.chol = np.linalg.cholesky(cov)
        self.sqrt_det = float(np.prod(np.diag(self.chol)))
        m = spec.airy_K.shape[0]
        self.block = m * m
        self.base = np.kron(spec.airy_K, np.eye(m)).astype(complex)
        self.linear = np.array([np.kron(spec.airy_B[a], spec.airy_F[al]) for a in range(g) for al in range(n)])
        c3 = np.einsum("abc,xyz->axbycz", spec.n_tensor, lie.f).reshape(self.dim, self.dim, self.dim)
        self.cubic = c3.reshape(self.dim, self.dim * self.dim)
        self.has_phase = bool(np.any(c3))
        self.closed_form_lambda0 = math.pi ** (self.dim / 2) * self.sqrt_det * float(np.real(np.linalg.det(self.base)))

    def cubic_form(self, t: np.ndarray) -> np.ndarray:
        if not self.has_phase:
            return np.zeros(len(t))
        u = (t @ self.cubic).reshape(len(t), self.dim, self.dim)
        return np.einsum("sij,si,sj->s", u, t, t)

    def reduced(self, t: np.ndarray, lam: float) -> np.ndarray:
        """``h(t)``: phase times determinant (the Gaussian factor removed)."""
        mats = self.base[None] + 6j * lam * np.einsum("sd,dij->sij", t, self.linear)
        dets = np.linalg.det(mats) if self.block > 1 else mats[:, 0, 0]
        if self.has_phase and lam != 0:
            return np.exp(-1j * lam * self.cubic_form(t)) * dets
        return dets


def _thread_count(requested: Optional[int]) -> int:
    if requested:
        return max(1, int(requested))
    env = os.environ.get("CSRP_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def _shard_sums(integrand: AiryIntegrand, lam: float, seed_seq: np.random.SeedSequence, size: int):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    z = rng.standard_normal((size, integrand.dim))
    t = (z @ integrand.chol.T) / math.sqrt(2.0)
    h = integrand.reduced(t, lam)
    return complex(h.sum()), float(np.sum(h.real ** 2)), float(np.sum(h.imag ** 2))


def monte_carlo(integrand: AiryIntegrand, lam: float, samples: int, seed: int, threads: Optional[int] = None) -> AiryResult:
    """Importance-sampled estimate; shards use independent Philox streams and merge in order."""
    if samples < 2:
        raise ConfigurationError("monte carlo needs at least 2 samples")
    n_shards = math.ceil(samples / SHARD_SIZE)
    sizes = [SHARD_SIZE] * (n_shards - 1) + [samples - SHARD_SIZE * (n_shards - 1)]
    seqs = np.random.SeedSequence(seed).spawn(n_shards)
    with ThreadPoolExecutor(max_workers=_thread_count(threads)) as pool:
        parts = list(pool.map(lambda args: _shard_sums(integrand, lam, *args), zip(seqs, sizes)))
    total = sum(p[0] for p in parts)
    sq_re = sum(p[1] for p in parts)
    sq_im = sum(p[2] for p in parts)
    mean = total / samples
    var = (sq_re - samples * mean.real ** 2 + sq_im - samples * mean.imag ** 2) / (samples - 1)
    norm = math.pi ** (integrand.dim / 2) * integrand.sqrt_det
    return AiryResult(complex(norm * mean), float(norm * math.sqrt(max(var, 0.0) / samples)), samples, "monte_carlo")


def _hermite_sum(integrand: AiryIntegrand, lam: float, order: int) -> complex:
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    dim = integrand.dim
    total = 0.0 + 0.0j
    chunk = max(1, 200_000 // max(order, 1))
    grid = np.indices((order,) * dim).reshape(dim, -1).T
    for start in range(0, len(grid), chunk):
        idx = grid[start:start + chunk]
        s = nodes[idx]
        w = np.prod(weights[idx], axis=1)
        total += np.sum(w * integrand.reduced(s @ integrand.chol.T, lam))
    return complex(total * integrand.sqrt_det)


def default_order(integrand: AiryIntegrand) -> int:
    """Exact for the determinant polynomial when the phase vanishes."""
    return max(2, (integrand.block + 1) // 2 + 2)


def gauss_quadrature(integrand: AiryIntegrand, lam: float, order: Optional[int] = None) -> AiryResult:
    """Tensor Gauss-Hermite rule; ``delta`` is the change from ``order - 1``."""
    if integrand.dim > QUADRATURE_CAP:
        raise CapacityError(f"quadrature dimension {integrand.dim} exceeds cap {QUADRATURE_CAP}")
    q = default_order(integrand) if order is None else int(order)
    if q < 2:
        raise ConfigurationError("quadrature order must be >= 2")
    if q ** integrand.dim > MAX_NODES:
        raise CapacityError(f"{q}^{integrand.dim} quadrature nodes exceed the limit {MAX_NODES}")
    value = _hermite_sum(integrand, lam, q)
    delta = abs(value - _hermite_sum(integrand, lam, q - 1))
    return AiryResult(value, 0.0, q ** integrand.dim, "gauss_quadrature", q, float(delta))


def airy_value(spec: SplittingSpec, lie: LieAlgebraSpec, cfg: AiryConfig) -> AiryResult:
    if cfg.method not in METHODS:
        raise ConfigurationError(f"unknown method {cfg.method!r}; expected one of {METHODS}")
    integrand = AiryIntegrand(spec, lie)
    if cfg.method == "monte_carlo":
        return monte_carlo(integrand, cfg.lam, cfg.samples, cfg.seed, cfg.threads)
    return gauss_quadrature(integrand, cfg.lam, cfg.order)


def airy_sweep(spec: SplittingSpec, lie: LieAlgebraSpec, lams: Sequence[float], cfg: AiryConfig) -> list[dict]:
    """One row per ``lam`` sharing the seed of ``cfg``."""
    rows = []
    if not len(lams):
        return rows
    integrand = AiryIntegrand(spec, lie)
    for lam in lams:
        if cfg.method == "monte_carlo":
            res = monte_carlo(integrand, float(lam), cfg.samples, cfg.seed, cfg.threads)
        elif cfg.method == "gauss_quadrature":
            res = gauss_quadrature(integrand, float(lam), cfg.order)
        else:
            raise ConfigurationError(f"unknown method {cfg.method!r}")
        row = {"lambda": float(lam)}
        row.update(res.to_dict())
        rows.append(row)
    return rows


AIRY_COLUMNS = ["lambda", "re", "im", "stderr", "samples", "method", "order", "delta"]
