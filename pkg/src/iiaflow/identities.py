"""Registry of pointwise identities of Type IIA geometry as residual checks.

Each :class:`IdentityCheck` maps a :class:`~iiaflow.geometry.Geometry` to a
normalized residual ``max|lhs - rhs| / max(1, largest term)``. Checks that
need second derivatives of phi only make sense on jet samples; the rest also
run on left-invariant structures.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import flow, jets
from .errors import ApplicabilityError
from .geometry import (
    Geometry,
    LieAlgebra,
    flat_standard_jet,
    load_catalog,
    resolve_algebra,
    sample_typeiia_invariant,
    sample_typeiia_jet,
)
from .jets import einsum
from .multilinear import interior_form, wedge_forms
from .typeiia import ndagger

APPLICABILITY = ("jet", "invariant", "both")


def residual(lhs, rhs, *terms) -> float:
    """max|lhs - rhs| normalized by max(1, magnitude of any contributing term)."""
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    scale = max([1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs)))] + [float(np.max(np.abs(t))) for t in terms])
    err = float(np.max(np.abs(lhs - rhs)))
    return err / scale


def _worst(*values: float) -> float:
    return max(values)


@dataclass(frozen=True)
class IdentityCheck:
    id: str
    name: str
    description: str
    anchor: str
    evaluator: Callable[[Geometry], float]
    applicability: str = "both"

    def __post_init__(self):
        if self.applicability not in APPLICABILITY:
            raise ValueError(f"bad applicability {self.applicability!r}")

    def applies_to(self, kind: str) -> bool:
        return self.applicability == "both" or self.applicability == kind


# ------------------------------------------------------------ shared pieces


def _J_lower(t, J, slot):
    """Replace slot ``slot`` of a covariant tensor by its J-image: t_{..Ja..} = J^m_a t_{..m..}."""
    return np.moveaxis(np.tensordot(J, np.moveaxis(t, slot, 0), axes=([0], [0])), 0, slot)


def _N_up_last(G):
    """N_ij^k."""
    return np.einsum("ijb,bk->ijk", G.N_low, G.g_inv)


def _N_up_first(G):
    """N^k_ij."""
    return G.N


def _N_mid_up(G):
    """N_i^k_j."""
    return np.einsum("kb,ibj->ikj", G.g_inv, G.N_low)


def _alpha_N(G):
    """N_i^k_j alpha_k + N_j^k_i alpha_k."""
    m = np.einsum("ikj,k->ij", _N_mid_up(G), G.alpha)
    return m + m.T


def _div_N(G):
    """D_k N_ij^k + D_k N_ji^k."""
    m = np.einsum("kb,kijb->ij", G.g_inv, G.DN_low)
    return m + m.T


def _tr(G, m):
    return float(np.einsum("ij,ij->", G.g_inv, m))


def _E1(G):
    """E_{l;jkp} = phi_{lam kp} N_lj^lam + phi_{j lam p} N_lk^lam + phi_{jk lam} N_lp^lam."""
    sh, ph = _N_up_last(G), G.phi
    return (
        np.einsum("lja,akp->ljkp", sh, ph)
        + np.einsum("lka,jap->ljkp", sh, ph)
        + np.einsum("lpa,jka->ljkp", sh, ph)
    )


def _E2(G):
    """E_{m;ljkp} built from the projected derivative of phi."""
    sh, Dp = _N_up_last(G), G.D_phi
    return (
        np.einsum("mlu,ujkp->mljkp", sh, Dp)
        + np.einsum("mju,lukp->mljkp", sh, Dp)
        + np.einsum("mku,ljup->mljkp", sh, Dp)
        + np.einsum("mpu,ljku->mljkp", sh, Dp)
    )


def _commutator_term(G):
    """g^{lm}([nabla_m, nabla_j] phi_kpl + [nabla_m, nabla_k] phi_pjl + [nabla_m, nabla_p] phi_jkl)."""
    nn = G.nabla2_phi
    C = nn - nn.transpose(1, 0, 2, 3, 4)
    gI = G.g_inv
    return (
        np.einsum("lm,mjkpl->jkp", gI, C)
        + np.einsum("lm,mkpjl->jkp", gI, C)
        + np.einsum("lm,mpjkl->jkp", gI, C)
    )


def _rough_laplacian(G):
    return np.einsum("lm,mljkp->jkp", G.g_inv, G.nabla2_phi)


def _riemann_mixed(G):
    """R^l_j^lam_p from the fully lowered tensor, indexed [l, j, lam, p]."""
    return np.einsum("la,kc,ajcp->ljkp", G.g_inv, G.g_inv, G.riemann_low, optimize=True)


def F_explicit(G):
    Rm, ph = _riemann_mixed(G), G.phi
    T = (
        np.einsum("ljap,akl->jkp", Rm, ph)
        - np.einsum("lpaj,akl->jkp", Rm, ph)
        - np.einsum("ljak,apl->jkp", Rm, ph)
        + np.einsum("lkaj,apl->jkp", Rm, ph)
        + np.einsum("lpak,ajl->jkp", Rm, ph)
        - np.einsum("lkap,ajl->jkp", Rm, ph)
    )
    return G.sym_pair(T)


def F_evaluated(G):
    J, rm = G.J, G.riemann
    a = np.einsum("ai,bl,ablj->ij", J, J, rm, optimize=True)  # R_{Ji,Jlam}^lam_j
    b = np.einsum("ai,dl,ajld->ij", J, J, rm, optimize=True)  # R_{Ji,j}^lam_{Jlam}
    inner = (
        -(a + a.T)
        + (b + b.T)
        + 2.0 * G.ricci
        + 2.0 * _div_N(G)
        + 2.0 * _alpha_N(G)
        + 4.0 * G.N2_minus
        - 4.0 * G.N2_plus
    )
    return G.nps * inner


def F_evaluated_second_slot(G):
    """Same as :func:`F_evaluated` but with J on the second slot of R_{Ji,j}; not equivalent."""
    J, rm = G.J, G.riemann
    a = np.einsum("ai,bl,ablj->ij", J, J, rm, optimize=True)
    b = np.einsum("bj,dl,ibld->ij", J, J, rm, optimize=True)  # R_{i,Jj}^lam_{Jlam}
    inner = (
        -(a + a.T)
        + (b + b.T)
        + 2.0 * G.ricci
        + 2.0 * _div_N(G)
        + 2.0 * _alpha_N(G)
        + 4.0 * G.N2_minus
        - 4.0 * G.N2_plus
    )
    return G.nps * inner


def _jric(G):
    """R_{Jj,Ji} indexed [i, j]."""
    return (G.J.T @ G.ricci @ G.J).T


# ---------------------------------------------------------------- checks


def _gtilde_two_ways(G):
    s = G.s
    quad = jets.value(s.g_tilde)
    return residual(quad, G.nps * G.g)


def _volume(G):
    return residual(np.linalg.det(G.g), np.linalg.det(G.omega))


def _J_on_phi(G):
    ph, J = G.phi, G.J
    a = _J_lower(ph, J, 0)
    b = _J_lower(ph, J, 1)
    c = _J_lower(ph, J, 2)
    ab = _J_lower(a, J, 1)
    ac = _J_lower(a, J, 2)
    bc = _J_lower(b, J, 2)
    return _worst(
        residual(ph, -ab), residual(ph, -ac), residual(ph, -bc), residual(a, b), residual(b, c)
    )


def _contract_omega(G):
    om, g, ph = G.omega, G.g, G.phi
    lhs = np.einsum("ij,iab,jcd->abcd", G.omega_inv, ph, ph)
    rhs = 0.25 * G.nps * (
        np.einsum("ac,bd->abcd", om, g)
        + np.einsum("bd,ac->abcd", om, g)
        - np.einsum("bc,ad->abcd", om, g)
        - np.einsum("ad,bc->abcd", om, g)
    )
    return residual(lhs, rhs)


def _contract_metric(G):
    om, g, ph = G.omega, G.g, G.phi
    lhs = np.einsum("ij,iab,jcd->abcd", G.g_inv, ph, ph)
    rhs = 0.25 * G.nps * (
        np.einsum("ac,bd->abcd", g, g)
        + np.einsum("ca,bd->abcd", om, om)
        - np.einsum("ad,cb->abcd", om, om)
        - np.einsum("bc,ad->abcd", g, g)
    )
    return residual(lhs, rhs)


def _hat_bilinear(G):
    lhs = G.pair(G.phi_hat).T  # phi_hat_{lam kp} phi_iab w^ka w^pb indexed [lam, i]
    via_J = -_J_lower(G.phi, G.J, 0)
    return _worst(residual(lhs, G.nps * G.omega), residual(G.phi_hat, via_J))


def _N_type(G):
    J, N, NL = G.J, G.N, G.N_low
    a = np.einsum("kab,ai->kib", N, J)  # N^k_{Ji,j}
    b = -np.einsum("km,mij->kij", J, N)  # -N^{Jk}_ij
    c = np.einsum("kia,aj->kij", N, J)  # N^k_{i,Jj}
    lo1 = _J_lower(NL, J, 0)
    lo2 = _J_lower(NL, J, 1)
    lo3 = _J_lower(NL, J, 2)
    return _worst(residual(a, b), residual(b, c), residual(lo1, lo2), residual(lo2, lo3))


def _N_bianchi(G):
    NL = G.N_low
    return residual(NL + NL.transpose(1, 2, 0) + NL.transpose(2, 0, 1), 0.0, NL)


def _grad_J(G):
    rhs = -2.0 * np.einsum("km,ijm->ikj", G.J, _N_up_last(G))
    return residual(G.nabla_J, rhs)


def _qua_N(G):
    nsq = G.N_sq
    return _worst(
        residual(G.N2_minus, 2.0 * G.N2_plus - 0.25 * nsq * G.g),
        residual(nsq, _tr(G, G.N2_plus)),
        residual(nsq, 2.0 * _tr(G, G.N2_minus)),
    )


def _N_phi_switch(G):
    N, ph = G.N, G.phi
    lhs = np.einsum("pij,pkl->ijkl", N, ph)
    rhs = -np.einsum("pkl,pij->ijkl", N, ph)
    return residual(lhs, rhs)


def _frakD_phi(G):
    a, ja = G.alpha, G.J_alpha
    r1 = 0.5 * (-np.einsum("m,ijk->mijk", a, G.phi) - np.einsum("m,ijk->mijk", ja, G.phi_hat))
    r2 = 0.5 * (-np.einsum("m,ijk->mijk", a, G.phi_hat) + np.einsum("m,ijk->mijk", ja, G.phi))
    # D = nabla + torsion shift, so nabla phi bounds the size of the cancelling pieces
    nabla_hat = jets.value(G.nabla(G.s.phi_hat, "ddd"))
    return _worst(
        residual(G.D_phi, r1, jets.value(G.nabla_phi_j)),
        residual(G.D_phi_hat, r2, nabla_hat),
    )


def _riemann_J(G):
    J, Rl, DN = G.J, G.riemann_low, G.DN_low
    lhs = np.einsum("mk,nl,jimn->jikl", J, J, Rl, optimize=True)  # R_{j,i,Jk,Jl}
    B = (
        -2.0 * DN
        + 2.0 * DN.transpose(1, 0, 2, 3)
        - 2.0 * np.einsum("aij,akl->ijkl", G.N, G.N_low)
    )  # B[i, j, k, l]
    rhs = Rl + B.transpose(1, 0, 2, 3)  # R_jikl + B_ijkl, indexed [j, i, k, l]
    return residual(lhs, rhs, Rl, B)


def _ricci_typeiia(G):
    H, J = G.hess_log_nps, G.J
    sN = np.einsum("sb,sibj->ij", G.g_inv, G.DN_low)  # D_s N_i^s_j
    rhs = -(sN + sN.T) - 2.0 * G.N2_minus + 0.5 * H + 0.5 * J.T @ H @ J
    return residual(G.ricci, rhs, H)


def _bochner_kodaira(G):
    rhs = -_rough_laplacian(G) + _commutator_term(G)
    return residual(G.dd_dagger_phi, rhs, _commutator_term(G))


def _torsion_quadratic_pairing(G):
    E1, sh = _E1(G), _N_up_last(G)
    gI = G.g_inv
    t = (
        np.einsum("lm,makp,lja->jkp", gI, E1, sh)
        + np.einsum("lm,mjap,lka->jkp", gI, E1, sh)
        + np.einsum("lm,mjka,lpa->jkp", gI, E1, sh)
    )
    return residual(G.pair(t), 0.5 * G.nps * G.N_sq * G.g)


def _torsion_derivative_pairing(G):
    t = np.einsum("ml,mljkp->jkp", G.g_inv, _E2(G))
    return residual(G.sym_pair(t), 0.0, G.pair(t))


def _rough_laplacian_pairing(G):
    lhs = G.sym_pair(_rough_laplacian(G))
    return residual(lhs, G.nps * (G.div_alpha + G.N_sq) * G.g)


def _curvature_commutator_F(G):
    lhs = G.sym_pair(_commutator_term(G))
    F = F_explicit(G)
    rhs = G.nps * (-2.0 * G.ricci.T - G.scalar * G.g + G.ricci + _jric(G)) + F
    return _worst(residual(lhs, rhs, F), residual(F, F_evaluated(G)))


def _curvature_commutator_closed(G):
    lhs = G.sym_pair(_commutator_term(G))
    rhs = G.nps * (
        -G.scalar * G.g + 2.0 * _div_N(G) + 2.0 * _alpha_N(G) + 4.0 * G.N2_minus - 8.0 * G.N2_plus
    )
    return residual(lhs, rhs)


def _bochner_pairing(G):
    lhs = G.sym_pair(-G.nps * G.dd_dagger_phi)
    rhs = G.nps**2 * (
        G.scalar * G.g
        - 2.0 * _div_N(G)
        + (G.div_alpha + G.N_sq) * G.g
        - 2.0 * _alpha_N(G)
        - 4.0 * G.N2_minus
        + 8.0 * G.N2_plus
    )
    return residual(lhs, rhs)


def _grad_dagger_pairing(G):
    term = -wedge_forms(G.grad_nps, jets.value(G.codiff_phi_j))
    m = np.einsum("jpi,p->ij", _N_mid_up(G), G.alpha)
    return residual(G.sym_pair(term), -2.0 * G.nps**2 * (m + m.T))


def _DN_switch(G):
    DNup = np.einsum("pa,kaij->kpij", G.g_inv, G.DN_low)  # D_k N^p_ij
    ph = G.phi
    lhs = np.einsum("kpij,pal->kijal", DNup, ph)
    NJ = np.einsum("pam,ml->pal", G.N, G.J)  # N^p_{lam, Jl}
    rhs = -np.einsum("kpal,pij->kijal", DNup, ph) + np.einsum("pal,k,pij->kijal", NJ, G.J_alpha, ph)
    return residual(lhs, rhs)


def _d_iota_pairing(G):
    s = G.s
    grad_up = einsum("mn,n->m", s.g_inv, G.backend.partial(s.norm_phi_sq))
    term = jets.value(G.d(interior_form(grad_up, s.phi)))
    a, ja, na, J = G.alpha, G.J_alpha, G.nabla_alpha, G.J
    jj = J.T @ na @ J  # J^p_i J^q_j nabla_p alpha_q
    rhs = G.nps**2 * (
        0.5 * (na + na.T)
        - np.outer(a, a)
        + np.outer(ja, ja)
        - 2.0 * G.alpha_sq * G.g
        - 0.5 * (jj + jj.T)
        + G.div_alpha * G.g
    )
    return residual(G.sym_pair(term), rhs)


def _d_ndagger_pairing(G):
    s = G.s
    term = jets.value(G.d(ndagger(G.N_j, s.phi, s.g_inv) * s.norm_phi_sq))
    rhs = G.nps**2 * (
        2.0 * _div_N(G)
        + 4.0 * _alpha_N(G)
        - _tr(G, G.N2_minus) * G.g
        - 4.0 * G.N2_plus
        + 2.0 * G.N2_minus
    )
    return residual(G.sym_pair(term), rhs)


def velocity_scales(G, to_metric):
    """Images of the individual flow summands under a linear map, for normalization."""
    return [to_metric(t) for t in flow.rhs_laplacian_terms(G)]


def _metric_flow(G):
    phidot = flow.rhs_laplacian(G)
    direct = flow.metric_velocity_from_phidot(G, phidot)
    scales = velocity_scales(G, lambda t: flow.metric_velocity_from_phidot(G, t))
    closed = flow.metric_velocity_closed_form(G)
    H, J = G.hess_log_nps, G.J
    a, ja = G.alpha, G.J_alpha
    intermediate = -G.nps * (
        2.0 * _div_N(G)
        - H
        + J.T @ H @ J
        - np.outer(a, a)
        + np.outer(ja, ja)
        + 4.0 * _alpha_N(G)
    )
    return _worst(residual(direct, closed, *scales), residual(direct, intermediate, *scales))


def _flow_form_equivalence(G):
    terms = flow.rhs_laplacian_terms(G)
    two = terms[0] + terms[1]
    four = flow.rhs_four_terms(G)
    return _worst(residual(flow.rhs_original(G), two, *terms), residual(sum(four), two, *terms, *four))


def _ndagger_two_forms(G):
    s = G.s
    nd = jets.value(ndagger(G.N_j, s.phi, s.g_inv))
    twice = 2.0 * np.einsum("mjb,bl,mkl->kj", G.N, G.g_inv, G.phi)
    return _worst(residual(nd, twice), residual(nd, -nd.T))


def _dilaton(G):
    phidot = flow.rhs_laplacian(G)
    gt_dot = flow.g_tilde_velocity(G, phidot)
    a_term = _alpha_N(G)
    H = G.nabla_alpha
    J = G.J
    a, ja = G.alpha, G.J_alpha
    assembled = -G.nps**2 * (
        2.0 * _div_N(G)
        + G.scalar * G.g
        + 2.0 * G.div_alpha * G.g
        + 0.5 * (H + H.T)
        - 0.5 * (J.T @ H @ J + (J.T @ H @ J).T)
        - np.outer(a, a)
        + np.outer(ja, ja)
        - 2.0 * G.alpha_sq * G.g
        + 4.0 * a_term
    )
    rate = flow.log_norm_rate(G, phidot)
    predicted = G.nps * (-2.0 * G.div_alpha - G.scalar + 2.0 * G.alpha_sq)
    gt_scales = velocity_scales(G, lambda t: flow.g_tilde_velocity(G, t))
    rate_scales = velocity_scales(G, lambda t: flow.log_norm_rate(G, t))
    return _worst(residual(gt_dot, assembled, *gt_scales), residual(rate, predicted, *rate_scales))


CATALOG: tuple[IdentityCheck, ...] = (
    IdentityCheck("ID-01", "gTilde-two-ways", "quadratic formula for g~ equals |phi|^2 g", "conformal metric g~ = |phi|^2 g", _gtilde_two_ways),
    IdentityCheck("ID-02", "volume", "det g equals det omega", "volume form of g agrees with the symplectic volume", _volume),
    IdentityCheck("ID-03", "J-on-phi", "phi is of type (3,0)+(0,3) under J", "action of J on phi", _J_on_phi),
    IdentityCheck("ID-04", "contract-omega", "single omega-contraction of phi (x) phi", "bilinear in phi with one omega contraction", _contract_omega),
    IdentityCheck("ID-05", "contract-metric", "single g-contraction of phi (x) phi", "bilinear in phi with one metric contraction", _contract_metric),
    IdentityCheck("ID-06", "hat-bilinear", "phi_hat paired with phi gives |phi|^2 omega", "mixed bilinear of phi_hat and phi", _hat_bilinear),
    IdentityCheck("ID-07", "N-type", "J-equivariance of the Nijenhuis tensor", "Nijenhuis tensor of type (0,2)", _N_type),
    IdentityCheck("ID-08", "N-Bianchi", "cyclic sum of N_ijk vanishes", "Bianchi identity for N from d omega = 0", _N_bianchi),
    IdentityCheck("ID-09", "gradJ", "nabla J expressed through N", "Levi-Civita derivative of J", _grad_J),
    IdentityCheck("ID-10", "qua-N", "quadratic relations between N^2_+, N^2_- and |N|^2", "quadratic Nijenhuis identities", _qua_N),
    IdentityCheck("ID-11", "N-phi-switch", "N^p_ij phi_pkl = -N^p_kl phi_pij", "Nijenhuis/phi index switch", _N_phi_switch),
    IdentityCheck("ID-12", "frakD-phi", "projected derivative of phi and phi_hat through alpha", "projected derivative of phi", _frakD_phi),
    IdentityCheck("ID-13", "riemann-J", "J acting on the last pair of Rm", "J-twisted Riemann tensor", _riemann_J, "jet"),
    IdentityCheck("ID-14", "ricci-typeiia", "Ricci tensor through D N, N^2_- and Hess log|phi|^2", "Ricci identity of Type IIA structures", _ricci_typeiia, "jet"),
    IdentityCheck("ID-15", "bochner-kodaira", "dd^dag phi as rough Laplacian plus commutators", "Bochner-Kodaira formula for closed 3-forms", _bochner_kodaira, "jet"),
    IdentityCheck("ID-16", "torsion-quadratic", "N-quadratic E terms paired with phi", "quadratic torsion terms of the Laplacian", _torsion_quadratic_pairing, "jet"),
    IdentityCheck("ID-17", "torsion-derivative", "E terms built from D phi drop out after symmetrization", "projected-derivative torsion terms", _torsion_derivative_pairing, "jet"),
    IdentityCheck("ID-18", "rough-laplacian", "rough Laplacian of phi paired with phi", "contribution of the rough Laplacian", _rough_laplacian_pairing, "jet"),
    IdentityCheck("ID-19", "curvature-commutator-F", "commutator terms with the explicit F, and F evaluated", "curvature commutator contribution with F", _curvature_commutator_F, "jet"),
    IdentityCheck("ID-20", "curvature-commutator-closed", "commutator terms in closed form", "curvature commutator contribution in closed form", _curvature_commutator_closed, "jet"),
    IdentityCheck("ID-21", "bochner-pairing", "-|phi|^2 dd^dag phi paired with phi", "total Bochner-Kodaira contribution", _bochner_pairing, "jet"),
    IdentityCheck("ID-22", "grad-dagger-pairing", "-d|phi|^2 ^ d^dag phi paired with phi", "gradient/codifferential contribution", _grad_dagger_pairing, "jet"),
    IdentityCheck("ID-23", "DN-switch", "differentiated N/phi index switch", "projected derivative of the index switch", _DN_switch, "jet"),
    IdentityCheck("ID-24", "d-iota-pairing", "d(iota_grad|phi|^2 phi) paired with phi", "interior-product contribution", _d_iota_pairing, "jet"),
    IdentityCheck("ID-25", "d-ndagger-pairing", "d(|phi|^2 N^dag phi) paired with phi", "N-dagger contribution", _d_ndagger_pairing, "jet"),
    IdentityCheck("ID-26", "metric-flow", "metric velocity from the flow equals the closed form", "evolution of the metric under the flow", _metric_flow),
    IdentityCheck("ID-27", "flow-form-equivalence", "d Lambda d(|phi|^2 phi_hat) and the Laplacian form agree", "two forms of the flow equation", _flow_form_equivalence, "jet"),
    IdentityCheck("ID-28", "ndagger-two-forms", "N^dag phi equals twice one half of its definition", "two expressions for N-dagger", _ndagger_two_forms),
    IdentityCheck("ID-29", "dilaton", "evolution of g~ and of log|phi|^2", "evolution of the dilaton", _dilaton, "jet"),
)

CHECKS = {c.id: c for c in CATALOG}


def get_check(key: str) -> IdentityCheck:
    """Look up a check by id (``ID-07``) or by name (``N-type``)."""
    if key in CHECKS:
        return CHECKS[key]
    for c in CATALOG:
        if c.name == key:
            return c
    raise KeyError(f"unknown check {key!r}")


def run_check(check: IdentityCheck, sample) -> float:
    """Residual of one check on a Geometry (or a backend, wrapped on the fly)."""
    G = sample if isinstance(sample, Geometry) else Geometry(sample)
    if not check.applies_to(G.kind):
        raise ApplicabilityError(f"{check.id} does not apply to {G.kind} samples")
    r = float(check.evaluator(G))
    if not np.isfinite(r):
        raise ArithmeticError(f"{check.id} produced a non-finite residual")
    return r


# ------------------------------------------------------------------ suite


@dataclass
class CheckStats:
    id: str
    anchor: str
    max: float = 0.0
    total: float = 0.0
    count: int = 0

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else 0.0

    def add(self, r: float) -> None:
        self.max = max(self.max, r)
        self.total += r
        self.count += 1

    def merged(self, other: "CheckStats") -> "CheckStats":
        return CheckStats(self.id, self.anchor, max(self.max, other.max), self.total + other.total, self.count + other.count)


@dataclass
class SuiteReport:
    seed: int
    trials: int
    tolerance: float
    stats: dict[str, CheckStats] = field(default_factory=dict)

    def passed(self, check_id: str) -> bool:
        return self.stats[check_id].max <= self.tolerance

    @property
    def all_passed(self) -> bool:
        return all(self.passed(k) for k in self.stats)

    def merge(self, other: "SuiteReport") -> "SuiteReport":
        stats = dict(self.stats)
        for k, v in other.stats.items():
            stats[k] = stats[k].merged(v) if k in stats else v
        return SuiteReport(self.seed, self.trials + other.trials, self.tolerance, stats)

    def to_dict(self) -> dict:
        ordered = sorted(self.stats.values(), key=lambda s: s.id)
        return {
            "seed": self.seed,
            "trials": self.trials,
            "tolerance": self.tolerance,
            "checks": [
                {
                    "id": s.id,
                    "anchor": s.anchor,
                    "samples": s.count,
                    "max": s.max,
                    "mean": s.mean,
                    "pass": s.max <= self.tolerance,
                }
                for s in ordered
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def trial_seeds(seed: int, trial: int, n: int) -> list[int]:
    """Independent integer seeds for the samples of one trial."""
    ss = np.random.SeedSequence([seed, trial])
    return [int(x) for x in ss.generate_state(n)]


def trial_samples(seed: int, trial: int, flat: bool = False, algebras: Iterable | None = None) -> list[Geometry]:
    """One jet sample plus one invariant sample per algebra (catalog names, notation or ``LieAlgebra``)."""
    if flat:
        return [Geometry(flat_standard_jet())]
    if algebras is None:
        chosen = list(load_catalog().values())
    else:
        chosen = [a if isinstance(a, LieAlgebra) else resolve_algebra(a) for a in algebras]
    seeds = trial_seeds(seed, trial, 1 + len(chosen))
    out = [Geometry(sample_typeiia_jet(seeds[0]))]
    for algebra, s in zip(chosen, seeds[1:]):
        out.append(Geometry(sample_typeiia_invariant(algebra, s)))
    return out


def _select(check_filter) -> list[IdentityCheck]:
    if not check_filter:
        return list(CATALOG)
    return [get_check(k) for k in check_filter]


def _run_trials(seed, trials, tolerance, check_filter, flat, algebras) -> SuiteReport:
    checks = _select(check_filter)
    stats = {c.id: CheckStats(c.id, c.anchor) for c in checks}
    for trial in trials:
        for G in trial_samples(seed, trial, flat, algebras):
            for c in checks:
                if c.applies_to(G.kind):
                    stats[c.id].add(run_check(c, G))
    return SuiteReport(seed, len(trials), tolerance, stats)


def run_suite(
    seed: int = 0,
    trials: int = 1,
    tolerance: float = 1e-8,
    check_filter: Iterable[str] | None = None,
    flat: bool = False,
    algebras: Iterable[str] | None = None,
    workers: int = 1,
) -> SuiteReport:
    """Sample fresh data per trial and aggregate residuals of the selected checks.

    Trials are seeded from ``(seed, trial index)`` so sharding over ``workers``
    processes does not change the report.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    check_filter = list(check_filter) if check_filter else None
    algebras = list(algebras) if algebras is not None else None
    if workers <= 1:
        return _run_trials(seed, range(trials), tolerance, check_filter, flat, algebras)
    shards = [list(range(trials))[k::workers] for k in range(workers)]
    shards = [s for s in shards if s]
    with ProcessPoolExecutor(max_workers=len(shards)) as ex:
        parts = list(ex.map(_run_trials, *zip(*[(seed, s, tolerance, check_filter, flat, algebras) for s in shards])))
    report = parts[0]
    for p in parts[1:]:
        report = report.merge(p)
    return report


def run_on_sample(sample, tolerance: float = 1e-8, check_filter: Iterable[str] | None = None, seed: int = 0) -> SuiteReport:
    """Evaluate the selected checks on one stored sample, skipping inapplicable ones."""
    G = sample if isinstance(sample, Geometry) else Geometry(sample)
    stats = {}
    for c in _select(list(check_filter) if check_filter else None):
        if c.applies_to(G.kind):
            st = CheckStats(c.id, c.anchor)
            st.add(run_check(c, G))
            stats[c.id] = st
    return SuiteReport(seed, 1, tolerance, stats)

