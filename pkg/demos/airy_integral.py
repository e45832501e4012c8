"""
Matrix Airy integral: sampling against quadrature
=================================================
"""

from csrp.airy import AiryIntegrand, gauss_quadrature, monte_carlo
from csrp.lie_algebra import load_preset
from csrp.splitting import canonical_preset

lie = load_preset("su2")
integrand = AiryIntegrand(canonical_preset(1, lie), lie)

print("closed form at lambda = 0:", integrand.closed_form_lambda0)
for lam in (0.0, 0.3, 0.8):
    exact = gauss_quadrature(integrand, lam)
    mc = monte_carlo(integrand, lam, 200_000, seed=7)
    z = abs(mc.value - exact.value) / mc.stderr if mc.stderr else 0.0
    print(f"lambda={lam}: quadrature {exact.value:.10g} (delta {exact.delta:.1e}), "
          f"MC {mc.value:.6g} +- {mc.stderr:.2g}  [{z:.2f} sigma]")
