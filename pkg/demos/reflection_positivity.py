"""
Reflection positivity on random polynomials
===========================================

Build a Gaussian model with a couple of null modes, draw plus-side
polynomials, and look at the spectrum of their reflected Gram matrix.
"""

import numpy as np

from csrp.covariance import build_bose_model
from csrp.lie_algebra import load_preset
from csrp.splitting import canonical_preset
from csrp.wick import BoseFields, gram_q, random_polynomial

lie = load_preset("su2")
model = build_bose_model(canonical_preset(2, lie), null_modes=2, seed=0)
fields = BoseFields(model, lie.dim)

rng = np.random.default_rng(1)
polys = [random_polynomial(fields, rng, "plus", 4) for _ in range(20)]

# eigenvalues are nonnegative up to roundoff
ev = np.linalg.eigvalsh(gram_q(polys))
print("smallest / largest eigenvalue:", ev[0], ev[-1])
print("ratio:", ev[0] / ev[-1])
