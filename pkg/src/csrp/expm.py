"""Action of a matrix exponential on a vector by scaled Taylor series.

The step count ``s`` keeps ``theta = |t| * bound / s <= 6`` where ``bound``
is ``sqrt(||A||_1 ||A||_inf)``, an upper bound for the spectral norm, and is
chosen to minimise the total number of products.  The
series is cut at the first ``K`` with ``e * theta^(K+1) / (K+1)! <= tol``,
which bounds the relative truncation error of each step a priori.  The
number of terms is fixed before evaluation, so results are reproducible
bit for bit.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

MAX_TERMS = 60
MAX_THETA = 6.0


def norm_bound(a) -> float:
    """``sqrt(||a||_1 ||a||_inf)`` for a dense or sparse matrix."""
    if sp.issparse(a):
        absa = abs(a)
        one = float(absa.sum(axis=0).max()) if a.nnz else 0.0
        inf = float(absa.sum(axis=1).max()) if a.nnz else 0.0
    else:
        absa = np.abs(np.asarray(a))
        one = float(absa.sum(axis=0).max()) if absa.size else 0.0
        inf = float(absa.sum(axis=1).max()) if absa.size else 0.0
    return math.sqrt(one * inf)


def taylor_terms(theta: float, tol: float) -> int:
    if theta == 0:
        return 0
    k = 0
    term = math.e * theta
    while term > tol and k < MAX_TERMS:
        k += 1
        term *= theta / (k + 1)
    return k


def plan(bound: float, t: complex, tol: float = 1e-12) -> tuple[int, int]:
    """``(steps, terms)`` for ``exp(t A)`` with ``||A|| <= bound``."""
    mag = abs(t) * bound
    if mag == 0:
        return 0, 0
    best = None
    for steps in range(max(1, math.ceil(mag / MAX_THETA)), max(1, math.ceil(mag)) + 1):
        terms = taylor_terms(mag / steps, tol)
        if best is None or steps * terms < best[0] * best[1]:
            best = (steps, terms)
        if steps > 4 * math.ceil(mag / MAX_THETA) + 8:
            break
    return best


def expm_action(a, v: np.ndarray, t: complex = 1.0, tol: float = 1e-12, bound: float | None = None) -> np.ndarray:
    """``exp(t a) @ v`` for ``a`` supporting ``@`` (sparse, dense or LinearOperator).

    ``v`` may be a vector or a 2-D block of column vectors.
    """
    if bound is None:
        bound = norm_bound(a)
    steps, terms = plan(bound, t, tol)
    dtype = np.result_type(v, complex if np.iscomplexobj(t) or np.iscomplex(t) else float,
                           a.dtype if hasattr(a, "dtype") else float)
    out = np.array(v, dtype=dtype)
    if steps == 0:
        return out
    h = t / steps
    for _ in range(steps):
        term = out
        acc = out.copy()
        for k in range(1, terms + 1):
            term = (a @ term) * (h / k)
            acc += term
        out = acc
    return out
