"""The Type IIA flow of closed primitive positive 3-forms.

Right-hand sides are evaluated pointwise on a :class:`~iiaflow.geometry.Geometry`,
so they work on jet samples (single instant) and on invariant structures
(where they define an ODE for the 20 coefficients of phi).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import IIAError, InvalidState, PositivityLost, StepRejected
from .geometry import Geometry, LieAlgebraBackend, ce_differential
from .jets import einsum
from .multilinear import interior_form, pack_form, unpack_form, wedge_forms
from .typeiia import lambda_contraction, ndagger

# dLd(|phi|^2 phi_hat) equals -dd^dag(|phi|^2 phi) + 2d(|phi|^2 N^dag phi)
# times this factor under Lambda(omega) = 3; measured, see tests.
ORIGINAL_FORM_FACTOR = 1.0

MONITOR_REJECT = 1e-6


def _ndagger_phi_j(G: Geometry):
    return ndagger(G.N_j, G.s.phi, G.s.g_inv)


def rhs_laplacian_terms(G: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """The two summands -dd^dag(|phi|^2 phi) and 2 d(|phi|^2 N^dag phi).

    They typically cancel to a much smaller velocity, so their sizes are the
    natural scale for round-off in anything built from the flow.
    """
    s = G.s
    scaled = s.phi * s.norm_phi_sq
    first = -jets.value(G.d(G.codiff(scaled)))
    second = 2.0 * jets.value(G.d(_ndagger_phi_j(G) * s.norm_phi_sq))
    return first, second


def rhs_laplacian(G: Geometry) -> np.ndarray:
    """-dd^dag(|phi|^2 phi) + 2 d(|phi|^2 N^dag phi) at the base point."""
    first, second = rhs_laplacian_terms(G)
    return first + second


def rhs_four_term(G: Geometry) -> np.ndarray:
    """-|phi|^2 dd^dag phi - d|phi|^2 ^ d^dag phi + d(iota_{grad|phi|^2} phi) + 2d(|phi|^2 N^dag phi)."""
    return sum(rhs_four_terms(G))


def rhs_four_terms(G: Geometry) -> tuple[np.ndarray, ...]:
    """The four summands of the expanded right-hand side, in order."""
    s = G.s
    nps = G.nps
    t1 = -nps * G.dd_dagger_phi
    t2 = -wedge_forms(G.grad_nps, jets.value(G.codiff_phi_j))
    grad_up = einsum("mn,n->m", s.g_inv, G.backend.partial(s.norm_phi_sq))
    t3 = jets.value(G.d(interior_form(grad_up, s.phi)))
    t4 = 2.0 * jets.value(G.d(_ndagger_phi_j(G) * s.norm_phi_sq))
    return t1, t2, t3, t4


def rhs_original(G: Geometry) -> np.ndarray:
    """d Lambda d(|phi|^2 phi_hat), scaled by the measured normalization factor."""
    s = G.s
    four = G.d(s.phi_hat * s.norm_phi_sq)
    return ORIGINAL_FORM_FACTOR * jets.value(G.d(lambda_contraction(four, s.omega_inv)))


def metric_velocity_closed_form(G: Geometry) -> np.ndarray:
    """Closed-form metric velocity in terms of curvature, N and alpha."""
    a = G.alpha
    ja = G.J_alpha
    n_alpha = np.einsum("pb,jbi,p->ij", G.g_inv, G.N_low, a)  # N_j^p_i alpha_p
    bracket = (
        2.0 * G.ricci
        - 2.0 * G.hess_log_nps
        + 4.0 * G.N2_minus
        - np.outer(a, a)
        + np.outer(ja, ja)
        + 4.0 * (n_alpha + n_alpha.T)
    )
    return -G.nps * bracket


def g_tilde_velocity(G: Geometry, phidot: np.ndarray) -> np.ndarray:
    """d/dt g~_ij = -{(phidot_iab) phi_jkp omega^ka omega^pb + (i <-> j)}."""
    return -G.sym_pair(phidot)


def log_norm_rate(G: Geometry, phidot: np.ndarray) -> float:
    """d/dt log|phi|^2 = (1/6) d/dt log det g~."""
    gt = G.nps * G.g
    return float(np.trace(np.linalg.solve(gt, g_tilde_velocity(G, phidot)))) / 6.0


def metric_velocity_from_phidot(G: Geometry, phidot: np.ndarray) -> np.ndarray:
    """d/dt g = |phi|^-2 (d/dt g~ - (d/dt log|phi|^2) g~)."""
    gt = G.nps * G.g
    return (g_tilde_velocity(G, phidot) - log_norm_rate(G, phidot) * gt) / G.nps


# ------------------------------------------------------------ integration


@dataclass
class FlowState:
    t: float
    phi_coeffs: np.ndarray
    backend: LieAlgebraBackend

    @property
    def phi(self) -> np.ndarray:
        return unpack_form(self.phi_coeffs, 3)

    def geometry(self) -> Geometry:
        return Geometry(self.backend.with_phi(self.phi))

    @classmethod
    def from_backend(cls, backend: LieAlgebraBackend, t: float = 0.0) -> "FlowState":
        return cls(t, pack_form(backend.phi), backend)


TRACE_COLUMNS = (
    ["t"]
    + [f"phi_{n}" for n in range(1, 21)]
    + ["normPhiSq", "detG", "N2", "scalarR", "primResidual", "closedResidual"]
)


@dataclass
class FlowTrace:
    rows: list = field(default_factory=list)

    def append(self, t: float, coeffs: np.ndarray, G: Geometry) -> None:
        prim = float(np.max(np.abs(lambda_contraction(G.phi, G.omega_inv))))
        closed = float(np.max(np.abs(ce_differential(G.backend.c, G.phi))))
        self.rows.append(
            [float(t)]
            + [float(c) for c in coeffs]
            + [G.nps, float(np.linalg.det(G.g)), G.N_sq, G.scalar, prim, closed]
        )

    def column(self, name: str) -> np.ndarray:
        k = TRACE_COLUMNS.index(name)
        return np.array([r[k] for r in self.rows])

    def write_csv(self, target) -> None:
        """Write to a path or an open text stream."""
        if hasattr(target, "write"):
            self._write_rows(target)
            return
        with open(target, "w", newline="") as fh:
            self._write_rows(fh)

    def _write_rows(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.rows:
            w.writerow([repr(x) for x in r])


def rk4_step(f, y: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step for y' = f(y, t)."""
    k1 = f(y, t)
    k2 = f(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(y + dt * k3, t + dt)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def velocity(state_phi: np.ndarray, backend: LieAlgebraBackend) -> np.ndarray:
    """Packed d/dt phi for the invariant flow."""
    G = Geometry(backend.with_phi(unpack_form(state_phi, 3)))
    return pack_form(rhs_laplacian(G))


def _geometry_or_halt(backend, coeffs, t, step, trace) -> Geometry:
    try:
        return Geometry(backend.with_phi(unpack_form(coeffs, 3)))
    except IIAError as exc:
        raise PositivityLost(f"structure lost positivity at t={t}: {exc}", t=t, step=step, trace=trace) from None


def evolve(
    state: FlowState,
    dt: float,
    steps: int,
    record_every: int = 1,
    reject_tol: float = MONITOR_REJECT,
) -> FlowTrace:
    """Classical RK4 with per-step conservation monitors.

    Raises :class:`PositivityLost` (carrying the trace so far) if phi leaves
    the positive cone, and :class:`StepRejected` when a monitor exceeds
    ``reject_tol``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    backend = state.backend
    try:
        G0 = Geometry(backend.with_phi(state.phi))
    except IIAError as exc:
        raise InvalidState(str(exc)) from None
    det0 = float(np.linalg.det(G0.g))
    trace = FlowTrace()
    trace.append(state.t, state.phi_coeffs, G0)
    y, t = np.array(state.phi_coeffs, dtype=float), float(state.t)

    step = 0

    def f(coeffs, stage_t):
        G = _geometry_or_halt(backend, coeffs, stage_t, step, trace)
        return pack_form(rhs_laplacian(G))

    for step in range(1, steps + 1):
        y = rk4_step(f, y, t, dt)
        t = t + dt
        G = _geometry_or_halt(backend, y, t, step, trace)
        scale = max(1.0, float(np.max(np.abs(y))))
        closed = float(np.max(np.abs(ce_differential(backend.c, G.phi)))) / scale
        prim = float(np.max(np.abs(lambda_contraction(G.phi, G.omega_inv)))) / scale
        drift = abs(float(np.linalg.det(G.g)) - det0) / abs(det0)
        if max(closed, prim, drift) > reject_tol:
            raise StepRejected(
                f"monitor exceeded at step {step}: closed={closed:.2e} primitive={prim:.2e} detG drift={drift:.2e}",
                t=t,
                step=step,
                trace=trace,
            )
        if step % record_every == 0 or step == steps:
            trace.append(t, y, G)
    return trace


def integrate(state: FlowState, dt: float, steps: int) -> np.ndarray:
    """Terminal packed coefficients after ``steps`` RK4 steps (no monitors)."""
    y = np.array(state.phi_coeffs, dtype=float)
    t = float(state.t)
    for _ in range(steps):
        y = rk4_step(lambda c, _t: velocity(c, state.backend), y, t, dt)
        t += dt
    return y
