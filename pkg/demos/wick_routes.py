"""
Two routes to the Grassmann Gaussian functional
===============================================

The determinant route and the Pfaffian route should agree on every
monomial; swapping two adjacent factors flips the sign.
"""

import numpy as np

from csrp.covariance import build_fermi_model
from csrp.lie_algebra import load_preset
from csrp.splitting import canonical_preset
from csrp.wick import FermiFields, psi, psi_pfaffian

lie = load_preset("su2")
fields = FermiFields(build_fermi_model(canonical_preset(1, lie), null_modes=1, seed=3), lie.dim)
rng = np.random.default_rng(0)

for k in (1, 2, 3):
    xs = [fields.random_vector(rng, side) for side in ["plus", "minus"] * k]
    mono = fields.monomial(*xs)
    swapped = fields.monomial(xs[1], xs[0], *xs[2:])
    print(k, psi(mono), psi_pfaffian(mono), psi(swapped))
