"""Trotter sequence for the truncated partition function and its diagnostics.

``Z_n = <Omega, J (exp(-eps N/n) exp(i lam O_BF/n) exp(i lam O_B/n))^n Omega>``
is evaluated by applying exponential actions to a single state.  The
finite-dimensional oracle ``exp(-eps N + i lam (O_B + O_BF))`` is computed
independently with scipy.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bose_fock import BoseSpace
from .covariance import build_bose_model, induced_lambda_metric
from .errors import ConfigurationError
from .expm import expm_action, norm_bound
from .fermi_fock import FermiSpace
from .interaction import InteractionSet, TensorSpace, build_interactions
from .lie_algebra import LieAlgebraSpec
from .splitting import SplittingSpec

ORDERS = ("bf-b", "b-bf")
DENSE_DIRECT_LIMIT = 1024


@dataclass
class PartitionSetup:
    spec: SplittingSpec
    lie: LieAlgebraSpec
    d: int
    seed: int
    tspace: TensorSpace
    interactions: InteractionSet

    def __post_init__(self):
        self._ob = self.interactions.o_b.matrix.tocsr()
        self._obf = self.interactions.o_bf.matrix.tocsr()
        self._bound_b = norm_bound(self._ob)
        self._bound_bf = norm_bound(self._obf)
        self._n_total = self.tspace.number_total().reshape(self.tspace.shape)


def setup_partition(spec: SplittingSpec, lie: LieAlgebraSpec, d: int, seed: int = 0,
                    null_modes: int = 1) -> PartitionSetup:
    """Spaces and operators at truncation ``d``.

    The Bose metric is recovered from a seeded covariance model, so outputs
    must not depend on ``seed``.
    """
    model = build_bose_model(spec, null_modes, seed)
    bspace = BoseSpace(induced_lambda_metric(model), lie.dim, d)
    fspace = FermiSpace(lie.dim, spec.vol)
    tspace = TensorSpace(bspace, fspace)
    return PartitionSetup(spec, lie, d, seed, tspace, build_interactions(spec, lie, tspace))


def z_n(setup: PartitionSetup, eps: float, lam: float, n: int, order: str = "bf-b",
        tol: float = 1e-12) -> complex:
    if order not in ORDERS:
        raise ConfigurationError(f"unknown order {order!r}; expected one of {ORDERS}")
    if n < 1:
        raise ConfigurationError("n must be positive")
    shape = setup.tspace.shape
    damp = np.exp(-eps * setup._n_total / n)
    state = np.zeros(shape, dtype=complex)
    state[0, 0] = 1.0
    t = 1j * lam / n

    def bose_step(s):
        return expm_action(setup._ob, s, t, tol, setup._bound_b)

    def mixed_step(s):
        return expm_action(setup._obf, s.ravel(), t, tol, setup._bound_bf).reshape(shape)

    first, second = (bose_step, mixed_step) if order == "bf-b" else (mixed_step, bose_step)
    for _ in range(n):
        state = damp * second(first(state))
    return complex(setup.tspace.vacuum_pairing(state.ravel()))


def generator(setup: PartitionSetup, eps: float, lam: float) -> sp.csr_matrix:
    ts = setup.tspace
    return sp.csr_matrix(
        -eps * sp.diags(ts.number_total()) + 1j * lam * (ts.lift_bose(setup.interactions.o_b) + setup._obf)
    )


def z_direct(setup: PartitionSetup, eps: float, lam: float) -> complex:
    """``<Omega, J exp(-eps N + i lam (O_B + O_BF)) Omega>`` via scipy."""
    g = generator(setup, eps, lam)
    omega = setup.tspace.vacuum().astype(complex)
    if setup.tspace.dim <= DENSE_DIRECT_LIMIT:
        v = sla.expm(g.toarray()) @ omega
    else:
        v = spla.expm_multiply(g.tocsc(), omega)
    return complex(setup.tspace.vacuum_pairing(v))


def fitted_order(ns: Sequence[int], errors: Sequence[float]) -> float:
    """``-slope`` of ``log error`` against ``log n`` (nonzero errors only)."""
    pts = [(math.log(n), math.log(e)) for n, e in zip(ns, errors) if e > 0]
    if len(pts) < 2:
        return float("inf")
    x, y = np.array(pts).T
    return float(-np.polyfit(x, y, 1)[0])


def geometric_ns(n_max: int, n_min: int = 1) -> list[int]:
    out, n = [], n_min
    while n <= n_max:
        out.append(n)
        n *= 2
    return out


@dataclass
class PartitionRun:
    inputs: dict
    ns: list
    z_values: list
    z_direct: Optional[complex]
    cauchy: list
    richardson: Optional[complex]
    order_fit: Optional[float]
    non_cauchy: bool
    wall_ms: list = field(default_factory=list)

    def rows(self, timing: bool = False) -> list[dict]:
        out = []
        for i, (n, z) in enumerate(zip(self.ns, self.z_values)):
            row = dict(self.inputs)
            row.update({
                "n": n,
                "re_z": z.real,
                "im_z": z.imag,
                "cauchy_diff": self.cauchy[i] if i < len(self.cauchy) else "",
                "re_z_direct": self.z_direct.real if self.z_direct is not None else "",
                "im_z_direct": self.z_direct.imag if self.z_direct is not None else "",
                "wall_ms": round(self.wall_ms[i], 3) if timing and self.wall_ms else "",
            })
            out.append(row)
        return out

    def to_dict(self) -> dict:
        def cplx(z):
            return None if z is None else [z.real, z.imag]

        return {
            "inputs": self.inputs,
            "ns": self.ns,
            "z_values": [cplx(z) for z in self.z_values],
            "z_direct": cplx(self.z_direct),
            "cauchy": self.cauchy,
            "richardson": cplx(self.richardson),
            "order_fit": self.order_fit,
            "non_cauchy": self.non_cauchy,
        }


def z_limit(setup: PartitionSetup, eps: float, lam: float, n_max: int = 256, order: str = "bf-b",
            direct: Optional[bool] = None, inputs: Optional[dict] = None) -> PartitionRun:
    """Sequence over ``n = 1, 2, 4, ..., n_max`` with convergence diagnostics.

    The fitted order uses the distance to ``z_direct`` when it is computed,
    otherwise the successive differences ``|Z_n - Z_2n|``.
    """
    ns = geometric_ns(n_max)
    values, wall = [], []
    for n in ns:
        t0 = time.perf_counter()
        values.append(z_n(setup, eps, lam, n, order))
        wall.append(1e3 * (time.perf_counter() - t0))
    cauchy = [abs(values[i] - values[i + 1]) for i in range(len(values) - 1)]
    if direct is None:
        direct = setup.tspace.dim <= 20000
    zd = z_direct(setup, eps, lam) if direct else None
    if zd is not None:
        fit_ns, errs = ns[1:], [abs(z - zd) for z in values[1:]]
    else:
        fit_ns, errs = ns[:-1][1:], cauchy[1:]
    order_fit = fitted_order(fit_ns, errs) if len(fit_ns) >= 2 else None
    richardson = 2 * values[-1] - values[-2] if len(values) >= 2 else None
    tail = cauchy[-3:]
    non_cauchy = any(b > a * (1 + 1e-9) + 1e-14 for a, b in zip(tail, tail[1:]))
    base = {
        "genus": setup.spec.genus,
        "lie": setup.lie.name,
        "d": setup.d,
        "eps": eps,
        "lambda": lam,
        "order": order,
        "seed": setup.seed,
    }
    base.update(inputs or {})
    return PartitionRun(base, ns, values, zd, cauchy, richardson, order_fit, non_cauchy, wall)


def scaled_spec(spec: SplittingSpec, n_scale: float = 1.0, v_scale: float = 1.0) -> SplittingSpec:
    return spec.replace(n_tensor=spec.n_tensor * n_scale, v_vec=spec.v_vec * v_scale)


def sweep(spec: SplittingSpec, lie: LieAlgebraSpec, eps: Sequence[float], lam: Sequence[float],
          degrees: Sequence[int], seeds: Sequence[int] = (0,), n_scales: Sequence[float] = (1.0,),
          v_scales: Sequence[float] = (1.0,), n_max: int = 16, order: str = "bf-b",
          direct: bool = False, null_modes: int = 1, extra: Optional[dict] = None,
          timing: bool = False) -> list[dict]:
    """Rows of :meth:`PartitionRun.rows` for every grid point, in grid order."""
    rows = []
    setups = {}
    for d, seed, ns_, vs in itertools.product(degrees, seeds, n_scales, v_scales):
        key = (d, seed, ns_, vs)
        setups[key] = setup_partition(scaled_spec(spec, ns_, vs), lie, d, seed, null_modes)
    for d, seed, ns_, vs, e, l in itertools.product(degrees, seeds, n_scales, v_scales, eps, lam):
        inputs = {"n_scale": ns_, "v_scale": vs}
        inputs.update(extra or {})
        run = z_limit(setups[(d, seed, ns_, vs)], e, l, n_max, order, direct, inputs)
        rows.extend(run.rows(timing))
    return rows


def truncation_table(spec: SplittingSpec, lie: LieAlgebraSpec, degrees: Sequence[int], eps: float,
                     lam: float, n: int, seed: int = 0) -> list[dict]:
    """``Z_n`` against ``d`` with ``|Z_n(d) - Z_n(d-1)|``; a report, not a convergence claim."""
    out, prev = [], None
    for d in degrees:
        z = z_n(setup_partition(spec, lie, d, seed), eps, lam, n)
        out.append({"d": d, "re_z": z.real, "im_z": z.imag, "delta": "" if prev is None else abs(z - prev)})
        prev = z
    return out
