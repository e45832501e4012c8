"""Cut-and-glue checks on a three-region model ``U | V | W``.

Cutting along either hypersurface must reproduce the full moment functional
as an inner product of boundary states.  Side-2 boundary classes live in
``span(lambda_plus)``; they are carried into ``span(lam)`` by ``s_star``
before being expanded in the ``lam`` basis, which turns the cross
covariance ``omega(x, y)`` into the Fock metric ``Q``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .bose_fock import BoseSpace
from .covariance import ThreeRegionModel
from .errors import ContractViolation
from .fermi_fock import FermiSpace
from .report import ValidationReport
from .wick import (
    BoseFields,
    BosePolynomial,
    FermiFields,
    FermiPolynomial,
    MixedPolynomial,
    c_map,
    combined_inner,
    phi,
    phi_psi,
    pi_sigma_F,
    psi,
    random_mixed,
    random_polynomial,
    wick_unorder,
)

TOL = 1e-10


class CutGeometry:
    """Boundary maps for the two cuts of a three-region Bose model."""

    def __init__(self, fields: BoseFields):
        self.fields = fields
        model = fields.model
        spec = model.spec
        self._lam_pinv = np.linalg.pinv(spec.lam)
        self._s_star = spec.s_star

    def class_coordinates(self, vec: np.ndarray, cut: int) -> np.ndarray:
        model = self.fields.model
        mat = self.fields.as_matrix(vec)
        total = np.zeros((model.spec.genus, self.fields.n))
        side = None
        for name, sl in model.regions.items():
            block = mat[sl]
            if not np.any(block):
                continue
            s = model.sides[cut][name]
            if side is not None and s != side:
                raise ContractViolation(f"factor straddles cut {cut}")
            side = s
            cls = model.class_maps[cut][name] @ block
            if s == 2:
                cls = self._s_star @ cls
            total += self._lam_pinv @ cls
        return total.ravel()

    def state(self, poly: BosePolynomial, cut: int, space: BoseSpace) -> np.ndarray:
        if poly.degree > space.d:
            raise ContractViolation(f"degree {poly.degree} exceeds truncation {space.d}")
        out = np.zeros(space.dim)
        for coef, factors in wick_unorder(poly).terms:
            out = out + coef * space.product_state([self.class_coordinates(x, cut) for x in factors])
        return out


def _fermi_state(poly: FermiPolynomial, space: FermiSpace) -> np.ndarray:
    return pi_sigma_F(poly, space)


def _mixed_state(p: MixedPolynomial, geom: CutGeometry, cut: int, bspace: BoseSpace, fspace: FermiSpace):
    out = np.zeros((bspace.dim, fspace.dim))
    for i, (c, b, _) in enumerate(p.terms):
        vb = geom.state(BosePolynomial(p.bose, [(c, b)]), cut, bspace)
        out += np.outer(vb, pi_sigma_F(p.fermi_part(i), fspace))
    return out


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def verify_gluing(model3: ThreeRegionModel, trials: int, n_colors: int = 1, max_degree: int = 3,
                  seed: Optional[int] = None, mixed_degree: int = 2) -> ValidationReport:
    """Random triples ``p in U``, ``q in V``, ``r in W`` against both cut evaluations.

    Bose, Fermi and combined residuals are reported as maxima over trials.
    """
    rng = np.random.default_rng(model3.seed if seed is None else seed)
    bfields = BoseFields(model3.bose, n_colors)
    ffields = FermiFields(model3.fermi, n_colors)
    geom = CutGeometry(bfields)
    spec = model3.bose.spec
    bspace = BoseSpace(spec.q_mat, n_colors, 3 * max_degree)
    fspace = FermiSpace(n_colors, model3.fermi.vol)
    mspace = BoseSpace(spec.q_mat, n_colors, 3 * mixed_degree)

    worst = {k: 0.0 for k in ("bose_cut1", "bose_cut2", "bose_cut_agreement", "fermi_cut1",
                              "fermi_cut2", "combined_cut1", "combined_cut2")}
    for _ in range(trials):
        p, q, r = (random_polynomial(bfields, rng, reg, max_degree) for reg in ("U", "V", "W"))
        full = phi(p * q * r)
        cut1 = bspace.inner(geom.state(p, 1, bspace), geom.state(q * r, 1, bspace))
        cut2 = bspace.inner(geom.state(p * q, 2, bspace), geom.state(r, 2, bspace))
        worst["bose_cut1"] = max(worst["bose_cut1"], _rel(full, cut1))
        worst["bose_cut2"] = max(worst["bose_cut2"], _rel(full, cut2))
        diff = geom.state(p, 1, bspace) - geom.state(p, 2, bspace)
        worst["bose_cut_agreement"] = max(worst["bose_cut_agreement"], float(np.max(np.abs(diff))))

        fp, fq, fr = (random_polynomial(ffields, rng, reg, max_degree) for reg in ("U", "V", "W"))
        full = psi(fp * fq * fr)
        cut1 = fspace.inner_split(_fermi_state(c_map(fp), fspace), _fermi_state(fq * fr, fspace))
        cut2 = fspace.inner_split(_fermi_state(c_map(fp * fq), fspace), _fermi_state(fr, fspace))
        worst["fermi_cut1"] = max(worst["fermi_cut1"], _rel(full, cut1))
        worst["fermi_cut2"] = max(worst["fermi_cut2"], _rel(full, cut2))

        mp, mq, mr = (random_mixed(bfields, ffields, rng, reg, mixed_degree, mixed_degree, n_terms=2)
                      for reg in ("U", "V", "W"))
        full = phi_psi(mp * mq * mr)
        cut1 = combined_inner(bspace=mspace, fspace=fspace,
                              u=_mixed_state(mp.c_map(), geom, 1, mspace, fspace),
                              v=_mixed_state(mq * mr, geom, 1, mspace, fspace))
        cut2 = combined_inner(bspace=mspace, fspace=fspace,
                              u=_mixed_state((mp * mq).c_map(), geom, 2, mspace, fspace),
                              v=_mixed_state(mr, geom, 2, mspace, fspace))
        worst["combined_cut1"] = max(worst["combined_cut1"], _rel(full, cut1))
        worst["combined_cut2"] = max(worst["combined_cut2"], _rel(full, cut2))

    rep = ValidationReport("gluing")
    for name, value in worst.items():
        rep.add(name, value, TOL)
    return rep
