"""Differential structure over two backends.

``JetChartBackend``
    A flat Darboux chart around the origin with constant ``omega`` and a
    3-form whose components are jets (a degree-2 polynomial field).
``LieAlgebraBackend``
    Left-invariant fields on a nilpotent Lie group, described in an
    invariant frame ``e_i`` with ``[e_i, e_j] = c^k_ij e_k``.

Both expose the same three primitives (frame derivative of components,
exterior derivative, Levi-Civita connection) and everything else is
written once on top of them.  Connection coefficients are stored as
``Gamma[k, i, j] = Gamma^k_ij`` with ``nabla_{e_i} e_j = Gamma^k_ij e_k``;
covariant derivatives put the new index first.  In a non-holonomic frame
``Gamma`` is not symmetric: its antisymmetric part is ``c``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from itertools import combinations_with_replacement
from math import factorial
from pathlib import Path

import numpy as np

from . import jets
from .errors import (
    DegenerateForm,
    DomainError,
    IIAError,
    NoSolution,
    RankError,
    SamplingExhausted,
)
from .jets import DIM, Jet2, einsum
from .multilinear import alt, form_indices, pack_form, unpack_form
from .typeiia import (
    TypeIIAStructure,
    build_structure,
    form_norm,
    hitchin_lambda,
    lambda_contraction,
    standard_omega,
    standard_phi,
)

_SLOTS = "abcdefgh"
_HESS_PAIRS = tuple(combinations_with_replacement(range(DIM), 2))
N_JET_COEFFS = 20 * (1 + DIM + len(_HESS_PAIRS))
MAX_CONDITION = 1e4
NULL_CUTOFF = 1e-10


def _null_space(a: np.ndarray) -> np.ndarray:
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > NULL_CUTOFF * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:].T.copy()


# ---------------------------------------------------------------- backends


class JetChartBackend:
    """Darboux chart at the origin carrying a 2-jet of the 3-form."""

    kind = "jet"

    def __init__(self, omega: np.ndarray, coeffs: np.ndarray, meta: dict | None = None):
        self.omega = np.asarray(omega, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape != (N_JET_COEFFS,):
            raise ValueError(f"expected {N_JET_COEFFS} jet coefficients")
        self.meta = dict(meta or {})
        self.phi = coeffs_to_jet(self.coeffs)
        self.c = np.zeros((DIM, DIM, DIM))

    def partial(self, t):
        return jets.partial(t)

    def exterior_d(self, f):
        k = jets.value(f).ndim
        if k >= DIM:
            raise RankError("d of a top-degree form")
        return alt(jets.partial(f)) * float(k + 1)

    def levi_civita(self, g, g_inv):
        dg = jets.partial(g)
        lowered = (
            jets.transpose(dg, (1, 0, 2))
            + jets.transpose(dg, (1, 2, 0))
            - jets.transpose(dg, (0, 1, 2))
        )
        # lowered[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
        return einsum("kl,lij->kij", g_inv, lowered) * 0.5

    def constraint_residuals(self) -> dict[str, float]:
        r = jet_constraints(self.coeffs)
        return {"closed": float(np.max(np.abs(r["closed"]))), "primitive": float(np.max(np.abs(r["primitive"])))}

    def to_json(self) -> dict:
        c = self.coeffs
        return {
            "kind": "jet",
            "omega": self.omega.tolist(),
            "phi0": c[:20].tolist(),
            "phi1": c[20:140].reshape(20, DIM).tolist(),
            "phi2": c[140:].reshape(20, len(_HESS_PAIRS)).tolist(),
            "hessian_pairs": [list(p) for p in _HESS_PAIRS],
            "constraint_residuals": self.constraint_residuals(),
            **self.meta,
        }

    @classmethod
    def from_json(cls, data: dict) -> "JetChartBackend":
        coeffs = np.concatenate(
            [np.ravel(data["phi0"]), np.ravel(data["phi1"]), np.ravel(data["phi2"])]
        )
        meta = {k: data[k] for k in ("seed", "scale") if k in data}
        return cls(np.array(data["omega"]), coeffs, meta)


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants ``c[k, i, j] = c^k_ij`` of a nilpotent Lie algebra."""

    name: str
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        object.__setattr__(self, "c", c)
        if c.shape != (DIM, DIM, DIM):
            raise ValueError("structure constants must have shape (6, 6, 6)")
        if np.max(np.abs(c + c.transpose(0, 2, 1)), initial=0.0) > 1e-14:
            raise ValueError("structure constants must be antisymmetric in the lower indices")
        if jacobi_residual(c) > 1e-12:
            raise ValueError("structure constants violate the Jacobi identity")
        if not is_nilpotent(c):
            raise ValueError("Lie algebra is not nilpotent")

    def bracket(self, x, y):
        return np.einsum("kij,i,j->k", self.c, x, y)

    def d(self, f: np.ndarray) -> np.ndarray:
        return ce_differential(self.c, f)


def jacobi_residual(c: np.ndarray) -> float:
    # c^m_ij c^l_km + cyclic(i, j, k)
    t = np.einsum("mij,lkm->lijk", c, c)
    cyc = t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2)
    return float(np.max(np.abs(cyc), initial=0.0))


def is_nilpotent(c: np.ndarray) -> bool:
    span = np.eye(DIM)
    for _ in range(DIM + 1):
        nxt = np.einsum("kij,ia,jb->kab", c, np.eye(DIM), span).reshape(DIM, -1)
        if nxt.size == 0 or np.max(np.abs(nxt), initial=0.0) < 1e-12:
            return True
        u, s, _ = np.linalg.svd(nxt, full_matrices=False)
        span = u[:, s > 1e-10 * s[0]]
    return False


def ce_differential(c: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Chevalley-Eilenberg differential of an invariant k-form.

    (d b)(X0..Xk) = sum_{a<b} (-1)^{a+b} b([Xa, Xb], X0..^a..^b..Xk), which
    in components is -(k+1)k/2 times the alternation of c^m_{i0 i1} b_{m i2..ik}.
    """
    f = np.asarray(f, dtype=float)
    k = f.ndim
    if k >= DIM:
        raise RankError("d of a top-degree form")
    if k == 0:
        return np.zeros(DIM)
    rest = _SLOTS[: k - 1]
    s = np.einsum(f"mxy,m{rest}->xy{rest}", c, f)
    return alt(s) * (-(k + 1) * k / 2.0)


class LieAlgebraBackend:
    """Invariant (omega, phi) on a nilpotent Lie algebra."""

    kind = "invariant"

    def __init__(self, algebra: LieAlgebra, omega: np.ndarray, phi: np.ndarray):
        self.algebra = algebra
        self.c = algebra.c
        self.omega = np.asarray(omega, dtype=float)
        self.phi = np.asarray(phi, dtype=float)

    def partial(self, t):
        return np.zeros((DIM,) + np.shape(jets.value(t)))

    def exterior_d(self, f):
        return ce_differential(self.c, jets.value(f))

    def levi_civita(self, g, g_inv):
        c = self.c
        lowered = 0.5 * (
            np.einsum("mij,ml->lij", c, g)
            - np.einsum("mjl,mi->lij", c, g)
            + np.einsum("mli,mj->lij", c, g)
        )
        return np.einsum("kl,lij->kij", g_inv, lowered)

    def with_phi(self, phi: np.ndarray) -> "LieAlgebraBackend":
        return LieAlgebraBackend(self.algebra, self.omega, phi)

    @classmethod
    def from_json(cls, data: dict) -> "LieAlgebraBackend":
        algebra = LieAlgebra(data.get("algebra", "inline"), np.array(data["c"], dtype=float))
        return cls(algebra, unpack_form(data["omega"], 2), unpack_form(data["phi"], 3))

    def to_json(self) -> dict:
        return {
            "kind": "invariant",
            "algebra": self.algebra.name,
            "c": self.c.tolist(),
            "omega": pack_form(self.omega).tolist(),
            "phi": pack_form(self.phi).tolist(),
        }


# ------------------------------------------------------ generic operations


def levi_civita(backend, g, g_inv=None):
    """Levi-Civita connection coefficients Gamma^k_ij."""
    if g_inv is None:
        g_inv = jets.inv(g)
    return backend.levi_civita(g, g_inv)


def covariant_derivative(backend, gamma, t, variance: str):
    """nabla_m t with the derivative index first.

    ``variance`` has one character per slot of ``t``: ``"u"`` or ``"d"``.
    """
    r = len(variance)
    if jets.value(t).ndim != r:
        raise RankError("variance string does not match tensor rank")
    idx = _SLOTS[:r]
    out = backend.partial(t)
    for s, v in enumerate(variance):
        swapped = idx[:s] + "z" + idx[s + 1:]
        if v == "u":
            out = out + einsum(f"{idx[s]}mz,{swapped}->m{idx}", gamma, t)
        else:
            out = out - einsum(f"zm{idx[s]},{swapped}->m{idx}", gamma, t)
    return out


def projected_derivative(backend, gamma, shift, t, variance: str):
    """The projected connection: nabla corrected slotwise by the Nijenhuis shift.

    ``shift[i, p, m] = N_ip^m``; vectors get ``-N_ip^m X^p`` and covectors
    ``+N_ij^p W_p``.
    """
    r = len(variance)
    idx = _SLOTS[:r]
    out = covariant_derivative(backend, gamma, t, variance)
    for s, v in enumerate(variance):
        swapped = idx[:s] + "z" + idx[s + 1:]
        if v == "u":
            out = out - einsum(f"mz{idx[s]},{swapped}->m{idx}", shift, t)
        else:
            out = out + einsum(f"m{idx[s]}z,{swapped}->m{idx}", shift, t)
    return out


def riemann(backend, gamma):
    """R[i, j, k, l] = R_ij^k_l with [nabla_i, nabla_j] V^k = R_ij^k_l V^l."""
    dg = backend.partial(gamma)  # dg[i, k, j, l] = e_i(Gamma^k_jl)
    rm = jets.transpose(dg, (0, 2, 1, 3)) - jets.transpose(dg, (2, 0, 1, 3))
    gg = einsum("kim,mjl->ijkl", gamma, gamma)
    rm = rm + gg - jets.transpose(gg, (1, 0, 2, 3))
    return rm - einsum("mij,kml->ijkl", backend.c, gamma)


def ricci(rm, g, g_inv):
    """Ricci R_ij = R_ipj^p and scalar curvature."""
    low = einsum("km,ijml->ijkl", g, rm)
    ric = einsum("ipjq,pq->ij", low, g_inv)
    return ric, einsum("ij,ij->", ric, g_inv)


def nijenhuis(backend, gamma, J):
    """N[k, i, j] = N^k_ij = (1/4)(J^r_i nabla_r J^k_j + J^k_r nabla_j J^r_i - (i<->j))."""
    dJ = covariant_derivative(backend, gamma, J, "ud")
    a = einsum("ri,rkj->kij", J, dJ) + einsum("kr,jri->kij", J, dJ)
    return (a - jets.transpose(a, (0, 2, 1))) * 0.25


def nijenhuis_bracket(c, J):
    """4N(X, Y) = [JX, JY] - [X, Y] - J[JX, Y] - J[X, JY] in an invariant frame."""
    t = (
        np.einsum("kab,ai,bj->kij", c, J, J)
        - c
        - np.einsum("km,maj,ai->kij", J, c, J)
        - np.einsum("km,mib,bj->kij", J, c, J)
    )
    return 0.25 * t


def exterior_d(backend, f):
    return backend.exterior_d(f)


def exterior_d_via_nabla(backend, gamma, f):
    k = jets.value(f).ndim
    return alt(covariant_derivative(backend, gamma, f, "d" * k)) * float(k + 1)


def codifferential(backend, g_inv, gamma, f):
    """(d^dagger f)_I = -g^{lm} nabla_m f_{lI}."""
    k = jets.value(f).ndim
    if k < 1:
        raise RankError("codifferential of a 0-form")
    rest = _SLOTS[: k - 1]
    df = covariant_derivative(backend, gamma, f, "d" * k)
    return -einsum(f"lm,ml{rest}->{rest}", g_inv, df)


def alpha_form(backend, structure: TypeIIAStructure):
    """alpha = -d log|phi|^2."""
    nps = structure.norm_phi_sq
    if float(jets.value(nps)) <= 0:
        raise DomainError("|phi|^2 must be positive")
    return -backend.partial(jets.log(nps))


# -------------------------------------------------------- evaluation cache


class Geometry:
    """All derived tensors of a sampled Type IIA structure, computed on demand.

    Attributes ending in ``_j`` keep their jets (for further differentiation);
    the others are base-point values as plain arrays.
    """

    def __init__(self, backend, validate: bool = True):
        self.backend = backend
        self.kind = backend.kind
        self.structure = build_structure(backend.omega, backend.phi, validate=validate)

    # structure jets
    @property
    def s(self) -> TypeIIAStructure:
        return self.structure

    @cached_property
    def gamma_j(self):
        return levi_civita(self.backend, self.s.g, self.s.g_inv)

    @cached_property
    def N_j(self):
        return nijenhuis(self.backend, self.gamma_j, self.s.J)

    @cached_property
    def N_low_j(self):
        return einsum("ad,dbc->abc", self.s.g, self.N_j)

    @cached_property
    def shift_j(self):
        """shift[i, p, m] = N_ip^m."""
        return einsum("ipb,bm->ipm", self.N_low_j, self.s.g_inv)

    @cached_property
    def alpha_j(self):
        return alpha_form(self.backend, self.s)

    def nabla(self, t, variance: str):
        return covariant_derivative(self.backend, self.gamma_j, t, variance)

    def D(self, t, variance: str):
        return projected_derivative(self.backend, self.gamma_j, self.shift_j, t, variance)

    def d(self, f):
        return self.backend.exterior_d(f)

    def codiff(self, f):
        return codifferential(self.backend, self.s.g_inv, self.gamma_j, f)

    # base-point values
    @cached_property
    def omega(self):
        return jets.value(self.s.omega)

    @cached_property
    def omega_inv(self):
        return jets.value(self.s.omega_inv)

    @cached_property
    def phi(self):
        return jets.value(self.s.phi)

    @cached_property
    def phi_hat(self):
        return jets.value(self.s.phi_hat)

    @cached_property
    def J(self):
        return jets.value(self.s.J)

    @cached_property
    def g(self):
        return jets.value(self.s.g)

    @cached_property
    def g_inv(self):
        return jets.value(self.s.g_inv)

    @cached_property
    def nps(self) -> float:
        return float(jets.value(self.s.norm_phi_sq))

    @cached_property
    def N(self):
        return jets.value(self.N_j)

    @cached_property
    def N_low(self):
        return jets.value(self.N_low_j)

    @cached_property
    def alpha(self):
        return jets.value(self.alpha_j)

    @cached_property
    def gamma(self):
        return jets.value(self.gamma_j)

    @cached_property
    def riemann(self):
        return jets.value(riemann(self.backend, self.gamma_j))

    @cached_property
    def riemann_low(self):
        """R_{ijkl} = g_km R_ij^m_l."""
        return np.einsum("km,ijml->ijkl", self.g, self.riemann)

    @cached_property
    def ricci(self):
        return ricci(self.riemann, self.g, self.g_inv)[0]

    @cached_property
    def scalar(self) -> float:
        return float(np.einsum("ij,ij->", self.ricci, self.g_inv))

    @cached_property
    def DN_low(self):
        """DN[s, a, b, c] = (frak D)_s N_abc."""
        return jets.value(self.D(self.N_low_j, "ddd"))

    @cached_property
    def hess_log_nps(self):
        """nabla_i nabla_j log|phi|^2 = -nabla_i alpha_j."""
        return -jets.value(self.nabla(self.alpha_j, "d"))

    @cached_property
    def N2_plus(self):
        """(N^2_+)_ij = N^{pq}_i N_pqj."""
        up = np.einsum("pa,qb,abi->pqi", self.g_inv, self.g_inv, self.N_low)
        return np.einsum("pqi,pqj->ij", up, self.N_low)

    @cached_property
    def N2_minus(self):
        """(N^2_-)_ij = N^{pq}_i N_qpj."""
        up = np.einsum("pa,qb,abi->pqi", self.g_inv, self.g_inv, self.N_low)
        return np.einsum("pqi,qpj->ij", up, self.N_low)

    @cached_property
    def N_sq(self) -> float:
        """|N|^2 = N^{mkp} N_mkp."""
        return float(np.einsum("ijk,ia,jb,kc,abc->", self.N_low, self.g_inv, self.g_inv, self.g_inv, self.N_low, optimize=True))

    @cached_property
    def div_alpha(self) -> float:
        """nabla_mu alpha^mu."""
        return float(np.einsum("ij,ij->", self.g_inv, -self.hess_log_nps))

    @cached_property
    def alpha_sq(self) -> float:
        return float(self.alpha @ self.g_inv @ self.alpha)

    @cached_property
    def J_alpha(self):
        """alpha_{Jm} = J^p_m alpha_p."""
        return self.J.T @ self.alpha

    @cached_property
    def grad_nps(self):
        """d|phi|^2 at the base point."""
        return jets.value(self.backend.partial(self.s.norm_phi_sq))

    @cached_property
    def nabla_alpha(self):
        """nabla_p alpha_q."""
        return jets.value(self.nabla(self.alpha_j, "d"))

    @cached_property
    def nabla_J(self):
        """nabla_i J^k_j stored as [i, k, j]."""
        return jets.value(self.nabla(self.s.J, "ud"))

    @cached_property
    def nabla_phi_j(self):
        return self.nabla(self.s.phi, "ddd")

    @cached_property
    def nabla2_phi(self):
        """nabla_m nabla_l phi_jkp stored as [m, l, j, k, p]."""
        return jets.value(self.nabla(self.nabla_phi_j, "dddd"))

    @cached_property
    def D_phi(self):
        return jets.value(self.D(self.s.phi, "ddd"))

    @cached_property
    def D_phi_hat(self):
        return jets.value(self.D(self.s.phi_hat, "ddd"))

    @cached_property
    def codiff_phi_j(self):
        return self.codiff(self.s.phi)

    @cached_property
    def dd_dagger_phi(self):
        return jets.value(self.d(self.codiff_phi_j))

    def pair(self, t):
        """t_jkp phi_iab omega^ka omega^pb, indexed [i, j]."""
        return np.einsum("jkp,iab,ka,pb->ij", t, self.phi, self.omega_inv, self.omega_inv, optimize=True)

    def sym_pair(self, t):
        """The pairing plus its (i <-> j) transpose."""
        p = self.pair(t)
        return p + p.T


# ------------------------------------------------------------ jet sampling


def coeffs_to_jet(coeffs: np.ndarray) -> Jet2:
    """Jet of phi0 + phi1.x + (1/2) x.phi2.x from the flat coefficient vector."""
    coeffs = np.asarray(coeffs, dtype=float)
    a = coeffs[:20]
    b = coeffs[20:140].reshape(20, DIM)
    c_packed = coeffs[140:].reshape(20, len(_HESS_PAIRS))
    c = np.zeros((20, DIM, DIM))
    for n, (m, p) in enumerate(_HESS_PAIRS):
        c[:, m, p] = c_packed[:, n]
        c[:, p, m] = c_packed[:, n]
    return Jet2(unpack_form(a, 3), unpack_form(b, 3), unpack_form(c, 3))


def jet_constraints(coeffs: np.ndarray, omega: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Truncation coefficients of d phi (degrees 0, 1) and Lambda phi (degrees 0, 1, 2)."""
    omega = standard_omega() if omega is None else omega
    phi = coeffs_to_jet(coeffs)
    dphi = alt(jets.partial(phi)) * 4.0
    closed = np.concatenate([pack_form(dphi.val).ravel(), pack_form(dphi.grad, 4).ravel()])
    lam = lambda_contraction(phi, np.linalg.inv(omega))
    hess = np.array([lam.hess[:, m, p] for m, p in _HESS_PAIRS])
    primitive = np.concatenate([lam.val.ravel(), lam.grad.ravel(), hess.ravel()])
    return {"closed": closed, "primitive": primitive}


@lru_cache(maxsize=None)
def _jet_null_basis_cached() -> np.ndarray:
    cols = []
    eye = np.eye(N_JET_COEFFS)
    for n in range(N_JET_COEFFS):
        r = jet_constraints(eye[n])
        cols.append(np.concatenate([r["closed"], r["primitive"]]))
    basis = _null_space(np.array(cols).T)
    basis.setflags(write=False)
    return basis


def jet_null_basis() -> np.ndarray:
    """Orthonormal basis of 2-jets of closed primitive 3-forms (omega standard)."""
    return _jet_null_basis_cached()


def _structure_ok(omega, phi) -> bool:
    try:
        s = build_structure(omega, phi)
    except IIAError:
        return False
    return np.linalg.cond(jets.value(s.g)) <= MAX_CONDITION


def sample_typeiia_jet(seed: int, scale: float = 1.0, max_tries: int = 50000) -> JetChartBackend:
    """Random 2-jet of a closed primitive positive 3-form in a Darboux chart.

    Only a small fraction (well under 1%) of Gaussian primitive constant
    parts are positive, hence the generous rejection budget.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    rng = np.random.default_rng(seed)
    basis = jet_null_basis()
    omega = standard_omega()
    for _ in range(max_tries):
        x = basis @ rng.standard_normal(basis.shape[1])
        x *= scale / np.linalg.norm(x[:20])
        x = basis @ (basis.T @ x)
        phi0 = unpack_form(x[:20], 3)
        if hitchin_lambda(phi0) >= 0:
            continue
        if _structure_ok(omega, phi0):
            return JetChartBackend(omega, x, {"seed": int(seed), "scale": float(scale)})
    raise SamplingExhausted(f"no positive jet sample after {max_tries} draws")


def flat_standard_jet() -> JetChartBackend:
    """The standard model with all derivatives zero."""
    x = np.zeros(N_JET_COEFFS)
    x[:20] = pack_form(standard_phi())
    return JetChartBackend(standard_omega(), x, {"seed": None, "scale": 2.0})


def perturb_closedness(backend: JetChartBackend, size: float, seed: int) -> JetChartBackend:
    """Perturb the quadratic coefficients inside the primitive subspace only.

    The result keeps Lambda(phi) = 0 but violates d(phi) = 0 at degree 1.
    """
    rng = np.random.default_rng(seed)
    cols = []
    eye = np.eye(N_JET_COEFFS)
    for n in range(140, N_JET_COEFFS):
        cols.append(jet_constraints(eye[n])["primitive"])
    prim_null = _null_space(np.array(cols).T)
    delta = prim_null @ rng.standard_normal(prim_null.shape[1])
    delta *= size / np.max(np.abs(delta))
    x = backend.coeffs.copy()
    x[140:] += delta
    return JetChartBackend(backend.omega, x, backend.meta)


# ------------------------------------------------------ invariant sampling


def closed_forms(c: np.ndarray, k: int) -> np.ndarray:
    """Basis (columns of packed coefficients) of CE-closed invariant k-forms."""
    idx = form_indices(k)
    eye = np.eye(len(idx))
    a = np.array([pack_form(ce_differential(c, unpack_form(e, k))) for e in eye]).T
    return _null_space(a)


def closed_primitive_3forms(c: np.ndarray, omega: np.ndarray) -> np.ndarray:
    eye = np.eye(20)
    omega_inv = np.linalg.inv(omega)
    rows = []
    for e in eye:
        f = unpack_form(e, 3)
        rows.append(np.concatenate([pack_form(ce_differential(c, f)), lambda_contraction(f, omega_inv)]))
    return _null_space(np.array(rows).T)


def sample_typeiia_invariant(
    algebra: LieAlgebra, seed: int, max_tries: int = 400, inner_tries: int = 25
) -> LieAlgebraBackend:
    """Random invariant closed omega and closed primitive positive phi."""
    rng = np.random.default_rng(seed)
    if not np.any(algebra.c):
        omega, phi0 = standard_omega(), standard_phi()
        basis = closed_primitive_3forms(algebra.c, omega)
        for _ in range(max_tries * inner_tries):
            phi = unpack_form(basis @ (basis.T @ pack_form(phi0)) + 0.3 * basis @ rng.standard_normal(basis.shape[1]), 3)
            if _structure_ok(omega, phi):
                return LieAlgebraBackend(algebra, omega, phi)
        raise SamplingExhausted("abelian sampling failed")
    two = closed_forms(algebra.c, 2)
    probe = unpack_form(two @ np.random.default_rng(0).standard_normal(two.shape[1]), 2)
    if two.shape[1] == 0 or abs(np.linalg.det(probe)) < 1e-12 * max(1.0, np.abs(probe).max()) ** 6:
        raise NoSolution(f"{algebra.name} admits no invariant symplectic form")
    for _ in range(max_tries):
        omega = unpack_form(two @ rng.standard_normal(two.shape[1]), 2)
        if abs(np.linalg.det(omega)) < 1e-6 * np.abs(omega).max() ** 6:
            continue
        basis = closed_primitive_3forms(algebra.c, omega)
        if basis.shape[1] == 0:
            continue
        for _ in range(inner_tries):
            phi = unpack_form(basis @ rng.standard_normal(basis.shape[1]), 3)
            if _structure_ok(omega, phi):
                return LieAlgebraBackend(algebra, omega, phi)
    raise SamplingExhausted(f"no positive invariant structure on {algebra.name}")


# ---------------------------------------------------------------- catalog


def _catalog_raw() -> list[dict]:
    text = resources.files("iiaflow").joinpath("data/nilpotent.json").read_text()
    return json.loads(text)


def load_catalog() -> dict[str, LieAlgebra]:
    return {entry["name"]: LieAlgebra(entry["name"], np.array(entry["c"])) for entry in _catalog_raw()}


def algebra_from_differentials(name: str, differentials: dict[int, list[tuple[float, int, int]]]) -> LieAlgebra:
    """Build c from ``de^k = sum coef * e^{ij}`` (1-based indices)."""
    c = np.zeros((DIM, DIM, DIM))
    for k, terms in differentials.items():
        for coef, i, j in terms:
            # (de^k)_ij = -c^k_ij
            c[k - 1, i - 1, j - 1] -= coef
            c[k - 1, j - 1, i - 1] += coef
    return LieAlgebra(name, c)


_TERM = re.compile(r"([+-]?)(\d)(\d)")


def parse_differentials(text: str) -> dict[int, list[tuple[float, int, int]]]:
    """Parse Salamon-style notation such as ``(0,0,0,12,13,14+23)``.

    Entry ``k`` lists de^k as a signed sum of index pairs, so ``14+23`` means
    e^14 + e^23 and ``-35`` means -e^35. Indices are 1-based single digits.
    """
    body = text.strip().strip("()")
    parts = [p.strip() for p in body.split(",")]
    if len(parts) != DIM:
        raise ValueError(f"expected {DIM} differentials, got {len(parts)}")
    out: dict[int, list[tuple[float, int, int]]] = {}
    for k, part in enumerate(parts, start=1):
        if part in ("0", ""):
            continue
        compact = part.replace(" ", "")
        terms = []
        pos = 0
        for m in _TERM.finditer(compact):
            if m.start() != pos:
                raise ValueError(f"cannot parse differential {part!r}")
            sign = -1.0 if m.group(1) == "-" else 1.0
            i, j = int(m.group(2)), int(m.group(3))
            if not (1 <= i <= DIM and 1 <= j <= DIM) or i == j:
                raise ValueError(f"bad index pair in {part!r}")
            terms.append((sign, i, j))
            pos = m.end()
        if pos != len(compact) or not terms:
            raise ValueError(f"cannot parse differential {part!r}")
        out[k] = terms
    return out


def resolve_algebra(spec: str) -> LieAlgebra:
    """A catalog name, inline notation like ``0,0,0,0,12,13``, or a JSON file with ``c``."""
    catalog = load_catalog()
    if spec in catalog:
        return catalog[spec]
    path = Path(spec)
    if spec.endswith(".json") and path.is_file():
        data = json.loads(path.read_text())
        return LieAlgebra(data.get("name", path.stem), np.array(data["c"], dtype=float))
    return algebra_from_differentials(spec, parse_differentials(spec))

