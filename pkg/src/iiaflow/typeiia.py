"""Pointwise Type IIA structures built from a symplectic form and a 3-form.

All functions take component arrays (ndarrays or jets) following the
storage conventions of :mod:`iiaflow.multilinear`:

* ``omega[a, b] = omega_ab`` and ``omega_inv = inv(omega)``, so that
  ``omega^{ak} omega_{kp} = delta^a_p``;
* ``J[k, j] = J^k_j`` acting on vectors by ``V -> J @ V``;
* ``g[i, j] = omega_{ik} J^k_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from . import jets
from .errors import DegenerateForm, InvalidStructure, NotPositive, NotPrimitive, RankError
from .jets import einsum
from .multilinear import basis_form, epsilon, pack_form

DEGENERACY_THRESHOLD = 1e-6
PRIMITIVITY_TOL = 1e-10
STRUCTURE_TOL = 1e-8


def standard_omega() -> np.ndarray:
    """e^12 + e^34 + e^56."""
    return basis_form(0, 1) + basis_form(2, 3) + basis_form(4, 5)


def standard_phi() -> np.ndarray:
    """e^135 - e^146 - e^236 - e^245."""
    return basis_form(0, 2, 4) - basis_form(0, 3, 5) - basis_form(1, 2, 5) - basis_form(1, 3, 4)


def form_norm(f) -> float:
    """Euclidean norm of the independent components."""
    return float(np.linalg.norm(pack_form(jets.value(f))))


def hitchin_K(phi):
    """K^i_j = (1/5!) eps^{i a1..a5} (iota_{e_j} phi ^ phi)_{a1..a5}.

    Expanding the wedge gives (1/12) eps^{iabcde} phi_jab phi_cde, which is
    what is evaluated here.
    """
    t = einsum("iabcde,cde->iab", epsilon(), phi)
    return einsum("iab,jab->ij", t, phi) * (1.0 / 12.0)


def hitchin_lambda(phi):
    """lambda = tr(K^2) / 6."""
    k = hitchin_K(phi)
    return einsum("ij,ji->", k, k) * (1.0 / 6.0)


def _metric_from_J(omega, J):
    return einsum("ik,kj->ij", omega, J)


def hitchin_J(phi, omega):
    """Hitchin's almost-complex structure, signed so that omega(., J.) > 0."""
    k = hitchin_K(phi)
    lam = einsum("ij,ji->", k, k) * (1.0 / 6.0)
    scale = form_norm(phi)
    if not float(jets.value(lam)) < -DEGENERACY_THRESHOLD * scale**4:
        raise DegenerateForm(f"Hitchin invariant {float(jets.value(lam)):.3e} is not safely negative")
    J = k * jets.reciprocal(jets.sqrt(-lam))
    g0 = _metric_from_J(np.asarray(jets.value(omega)), jets.value(J))
    for sign in (1.0, -1.0):
        gs = sign * g0
        if np.allclose(gs, gs.T, atol=1e-8 * max(1.0, np.abs(gs).max())) and np.all(
            np.linalg.eigvalsh(0.5 * (gs + gs.T)) > 0
        ):
            return J * sign
    raise NotPositive("neither sign of the Hitchin structure gives a positive-definite metric")


def lambda_contraction(f, omega_inv):
    """(Lambda f)_I = (1/2) omega^{ba} f_{abI}, normalized so Lambda(omega) = 3."""
    k = jets.value(f).ndim
    if k < 2:
        raise RankError("Lambda needs a form of degree >= 2")
    rest = "cdef"[: k - 2]
    return einsum(f"ba,ab{rest}->{rest}", omega_inv, f) * 0.5


def hat_dual(phi, J):
    """phi_hat_{lkp} = -phi_{Jl,kp} = -J^m_l phi_{mkp}."""
    return -einsum("ml,mkp->lkp", J, phi)


def norm_sq(phi, g_inv):
    """|phi|^2 = (1/3!) phi_ijk phi_lmn g^il g^jm g^kn."""
    raised = einsum("il,jm,kn,lmn->ijk", g_inv, g_inv, g_inv, phi)
    return einsum("ijk,ijk->", phi, raised) * (1.0 / 6.0)


def g_tilde_quadratic(phi, omega_inv):
    """-phi_iab phi_jkp omega^ak omega^bp."""
    return -einsum("iab,jkp,ak,bp->ij", phi, phi, omega_inv, omega_inv)


def ndagger(N, phi, g_inv):
    """(N^dagger phi)_kj = N^m_j^l phi_mkl - N^m_k^l phi_mjl, with N[a,b,c] = N^a_bc."""
    half = einsum("mjb,bl,mkl->kj", N, g_inv, phi)
    return half - jets.transpose(half, (1, 0))


@dataclass(frozen=True)
class TypeIIAStructure:
    """omega, phi and everything Hitchin's construction derives from them."""

    omega: Any
    omega_inv: Any
    phi: Any
    J: Any
    g: Any
    g_inv: Any
    norm_phi_sq: Any
    phi_hat: Any
    g_tilde: Any

    def residuals(self) -> dict[str, float]:
        """Relative residuals of the defining structural identities at the base point."""
        v = jets.value
        om, omi, phi, J, g = v(self.omega), v(self.omega_inv), v(self.phi), v(self.J), v(self.g)
        nps = float(v(self.norm_phi_sq))
        gt_quad = v(g_tilde_quadratic(phi, omi))

        def rel(a, b):
            return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)), np.max(np.abs(b))))

        return {
            "J_squared": rel(J @ J, -np.eye(6)),
            "g_symmetric": rel(g, g.T),
            "omega_J_invariant": rel(J.T @ om @ J, om),
            "primitive": rel(v(lambda_contraction(phi, omi)), 0.0),
            "g_tilde": rel(nps * g, gt_quad),
            "volume": rel(np.array(np.linalg.det(g)), np.array(np.linalg.det(om))),
        }


def build_structure(omega, phi, validate: bool = True) -> TypeIIAStructure:
    """Assemble the Type IIA structure of (omega, phi)."""
    om0 = np.asarray(jets.value(omega))
    if np.linalg.matrix_rank(om0) < 6:
        raise DegenerateForm("omega is degenerate")
    omega_inv = jets.inv(omega)
    prim = jets.value(lambda_contraction(phi, omega_inv))
    scale = max(form_norm(phi), 1e-300)
    if np.max(np.abs(prim)) > PRIMITIVITY_TOL * scale:
        raise NotPrimitive(f"Lambda(phi) has size {np.max(np.abs(prim)):.3e}")
    J = hitchin_J(phi, omega)
    g = _metric_from_J(omega, J)
    g = (g + jets.transpose(g, (1, 0))) * 0.5
    g_inv = jets.inv(g)
    nps = norm_sq(phi, g_inv)
    structure = TypeIIAStructure(
        omega=omega,
        omega_inv=omega_inv,
        phi=phi,
        J=J,
        g=g,
        g_inv=g_inv,
        norm_phi_sq=nps,
        phi_hat=hat_dual(phi, J),
        g_tilde=g * nps,
    )
    if validate:
        bad = {k: r for k, r in structure.residuals().items() if r > STRUCTURE_TOL}
        if bad:
            raise InvalidStructure(f"structure identities violated: {bad}")
    return structure
