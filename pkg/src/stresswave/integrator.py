"""Implicit HHT-alpha time stepping with Newton-Raphson stage solves.

Each step advances the nodal stress, rate and acceleration vectors.
The acceleration is the Newton unknown; stress and rate follow from the
Newmark relations

    S_{n+1}  = S_n + dt Sd_n + dt^2 [(1 - 2 beta)/2 Sdd_n + beta Sdd_{n+1}]
    Sd_{n+1} = Sd_n + dt [(1 - gamma) Sdd_n + gamma Sdd_{n+1}]

with beta = (1 - alpha)^2 / 4 and gamma = 1/2 - alpha derived from the
dissipation parameter alpha in [-1/3, 0].  Stress Dirichlet data at the
two boundary nodes is enforced exactly by converting it to equivalent
acceleration constraints through the Newmark update.
"""
from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import assembly
from .constitutive import MaterialParams
from .fe_space import FeSpace, build_space

if TYPE_CHECKING:
    from .config import ScenarioConfig


@dataclass(frozen=True)
class HhtParams:
    """Dissipation parameter, step size and the derived Newmark pair."""

    alpha: float
    dt: float

    def __post_init__(self):
        if not -1.0 / 3.0 <= self.alpha <= 0.0:
            raise ValueError(f"alpha must lie in [-1/3, 0], got {self.alpha}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def beta_nm(self) -> float:
        return 0.25 * (1.0 - self.alpha) ** 2

    @property
    def gamma_nm(self) -> float:
        return 0.5 - self.alpha


@dataclass
class SystemState:
    """Nodal stress, stress rate and stress acceleration at time t."""

    t: float
    Sigma: np.ndarray
    Sigma_dot: np.ndarray
    Sigma_ddot: np.ndarray

    def __post_init__(self):
        n = len(self.Sigma)
        if len(self.Sigma_dot) != n or len(self.Sigma_ddot) != n:
            raise ValueError("state vectors must share one length")

    @classmethod
    def zeros(cls, n_dofs: int, t: float = 0.0) -> "SystemState":
        return cls(t, np.zeros(n_dofs), np.zeros(n_dofs), np.zeros(n_dofs))


@dataclass(frozen=True)
class NewtonSettings:
    """Convergence control for the per-step Newton iteration.

    The residual norm (Euclidean, unconstrained DoFs) must drop below
    tol relative to the first iterate of the step, with abs_floor as an
    absolute escape for vanishing first residuals.
    """

    tol: float = 1.0e-10
    k_max: int = 20
    abs_floor: float = 1.0e-12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")


@dataclass(frozen=True)
class BoundaryDrive:
    """Oscillatory stress Dirichlet data: 0 at x=0, A sin(omega t) at x=L."""

    amplitude: float = 0.02
    omega: float = 2.0 * np.pi

    def value(self, t: float) -> float:
        return self.amplitude * np.sin(self.omega * t)

    def accel(self, t: float) -> float:
        """Second time derivative of the drive (for consistent t=0 data)."""
        return -self.amplitude * self.omega**2 * np.sin(self.omega * t)


@dataclass
class NewtonReport:
    iters: int
    residual_norm: float
    history: list = field(default_factory=list)


class NewtonDivergedError(RuntimeError):
    """Newton failed to reach tolerance within k_max iterations."""

    def __init__(self, message: str, t: float, iters: int, history: list):
        super().__init__(message)
        self.t = t
        self.iters = iters
        self.history = history


def newmark_update(state_n: SystemState, Sigma_ddot_next: np.ndarray,
                   hht: HhtParams) -> tuple[np.ndarray, np.ndarray]:
    """Next stress and stress-rate vectors from the next acceleration."""
    dt, beta, gamma = hht.dt, hht.beta_nm, hht.gamma_nm
    Sigma_next = (state_n.Sigma + dt * state_n.Sigma_dot
                  + dt**2 * (0.5 * (1.0 - 2.0 * beta) * state_n.Sigma_ddot
                             + beta * Sigma_ddot_next))
    Sigma_dot_next = (state_n.Sigma_dot
                      + dt * ((1.0 - gamma) * state_n.Sigma_ddot
                              + gamma * Sigma_ddot_next))
    return Sigma_next, Sigma_dot_next


def boundary_acceleration(bc_value_next: float, node: int,
                          state_n: SystemState, hht: HhtParams) -> float:
    """Acceleration that makes the Newmark update hit bc_value_next exactly."""
    dt, beta = hht.dt, hht.beta_nm
    free = (state_n.Sigma[node] + dt * state_n.Sigma_dot[node]
            + dt**2 * 0.5 * (1.0 - 2.0 * beta) * state_n.Sigma_ddot[node])
    return (bc_value_next - free) / (beta * dt**2)


def _boundary_values(space: FeSpace, drive: BoundaryDrive | None,
                     t: float) -> tuple[np.ndarray, np.ndarray]:
    """(constrained mask, prescribed stress values) at the boundary nodes."""
    mask = np.zeros(space.n_dofs, dtype=bool)
    mask[0] = mask[-1] = True
    vals = np.zeros(space.n_dofs)
    if drive is not None:
        vals[-1] = drive.value(t)
    return mask, vals


def advance_step(state_n: SystemState, space: FeSpace, hht: HhtParams,
                 p: MaterialParams, newton: NewtonSettings,
                 drive: BoundaryDrive | None = None,
                 forcing: Callable | None = None,
                 load_prev: np.ndarray | None = None,
                 load_next: np.ndarray | None = None,
                 ) -> tuple[SystemState, NewtonReport]:
    """Advance one HHT-alpha step by Newton iteration on the acceleration.

    `load_prev` / `load_next` may carry already-assembled load vectors
    at t_n / t_{n+1} to avoid re-assembly inside time loops; they are
    computed on demand otherwise.
    """
    t_next = state_n.t + hht.dt
    if forcing is not None:
        if load_next is None:
            load_next = assembly.assemble_load_at(space, forcing, t_next)
        if load_prev is None:
            load_prev = assembly.assemble_load_at(space, forcing, state_n.t)

    mask, bc_vals = _boundary_values(space, drive, t_next)
    prescribed = np.zeros(space.n_dofs)
    for node in np.flatnonzero(mask):
        prescribed[node] = boundary_acceleration(bc_vals[node], node, state_n, hht)

    sdd = state_n.Sigma_ddot.copy()
    sdd[mask] = prescribed[mask]
    free = ~mask

    def residual_at(sdd_vec):
        Sigma, Sigma_dot = newmark_update(state_n, sdd_vec, hht)
        trial = SystemState(t_next, Sigma, Sigma_dot, sdd_vec)
        R = assembly.assemble_residual(space, trial, state_n, hht, p,
                                       load_next, load_prev)
        return trial, R

    trial, R = residual_at(sdd)
    ref_norm = float(np.linalg.norm(R[free]))
    threshold = max(newton.tol * ref_norm, newton.abs_floor)
    history = [ref_norm]
    iters = 0
    while True:
        r_norm = history[-1]
        if iters >= 1 and r_norm <= threshold:
            break
        if iters >= newton.k_max:
            raise NewtonDivergedError(
                f"Newton did not converge at t={t_next:.6g}: "
                f"|R|={r_norm:.3e} after {iters} iterations "
                f"(threshold {threshold:.3e})",
                t=t_next, iters=iters, history=history)
        stage = assembly.stage_state(trial, state_n, hht.alpha)
        S = assembly.assemble_tangent(space, stage, hht, p)
        system = assembly.AssembledSystem(residual=R, tangent=S,
                                          constrained=mask,
                                          prescribed=prescribed)
        system = assembly.apply_dirichlet(system, sdd)
        delta = system.tangent.solve(-system.residual)
        sdd = sdd + delta
        iters += 1
        trial, R = residual_at(sdd)
        history.append(float(np.linalg.norm(R[free])))

    report = NewtonReport(iters=iters, residual_norm=history[-1],
                          history=history)
    return trial, report


def initial_acceleration(space: FeSpace, Sigma0: np.ndarray,
                         Sigma_dot0: np.ndarray, p: MaterialParams,
                         drive: BoundaryDrive | None = None,
                         forcing: Callable | None = None,
                         t0: float = 0.0) -> np.ndarray:
    """Acceleration consistent with the semi-discrete balance at t0.

    Solves M(S0) Sdd0 = L(t0) - F_vel(S0, Sd0) - K S0 with the boundary
    accelerations constrained to the drive's second time derivative.
    """
    K = assembly.assemble_stiffness(space)
    rhs = -assembly.assemble_inertial(space, Sigma0, Sigma_dot0,
                                      np.zeros_like(Sigma0), p)
    rhs -= K.matvec(Sigma0)
    if forcing is not None:
        rhs += assembly.assemble_load_at(space, forcing, t0)

    mask = np.zeros(space.n_dofs, dtype=bool)
    mask[0] = mask[-1] = True
    prescribed = np.zeros(space.n_dofs)
    if drive is not None:
        prescribed[-1] = drive.accel(t0)
    M = assembly.assemble_mass(space, Sigma0, p)
    system = assembly.AssembledSystem(residual=-rhs, tangent=M,
                                      constrained=mask, prescribed=prescribed)
    system = assembly.apply_dirichlet(system, np.zeros(space.n_dofs))
    return system.tangent.solve(-system.residual)


@dataclass
class RunReport:
    """Aggregate statistics of one simulation."""

    steps: int
    total_newton_iters: int
    max_newton_iters: int
    newton_iters: list
    wall_time: float
    residual_histories: list | None = None


def run_simulation(config: "ScenarioConfig",
                   forcing: Callable | None = None,
                   initial_sigma: Callable | None = None,
                   initial_rate: Callable | None = None,
                   solve_initial_accel: bool = True,
                   record_convergence: bool = False,
                   ) -> tuple[list[SystemState], RunReport]:
    """Run a scenario from t=0 to t_final, collecting state snapshots.

    Initial stress / stress-rate profiles are nodal interpolants of the
    given callables (zero by default).  Snapshots are taken at t=0,
    every output.snapshot_interval and at t_final.  The initial
    acceleration is solved from the t=0 balance unless
    solve_initial_accel is False (then it starts at zero).
    """
    space = build_space(config.mesh.L, config.mesh.n_cells,
                        config.mesh.degree_policy)
    hht = HhtParams(alpha=config.time.alpha, dt=config.time.dt)
    p = config.material
    drive = config.drive
    newton = config.newton

    Sigma0 = np.zeros(space.n_dofs)
    Sigma_dot0 = np.zeros(space.n_dofs)
    if initial_sigma is not None:
        Sigma0 = np.asarray(initial_sigma(space.dof_coords), dtype=float)
    if initial_rate is not None:
        Sigma_dot0 = np.asarray(initial_rate(space.dof_coords), dtype=float)
    if solve_initial_accel:
        Sigma_ddot0 = initial_acceleration(space, Sigma0, Sigma_dot0, p,
                                           drive, forcing)
    else:
        Sigma_ddot0 = np.zeros(space.n_dofs)
    state = SystemState(0.0, Sigma0, Sigma_dot0, Sigma_ddot0)

    t_final = config.time.t_final
    n_steps = int(round(t_final / hht.dt))
    if abs(n_steps * hht.dt - t_final) > 1e-9 * max(t_final, 1.0):
        n_steps = int(np.ceil(t_final / hht.dt))

    interval = config.output.snapshot_interval
    next_snap = interval if interval else np.inf

    snapshots = [state]
    newton_iters = []
    histories = [] if record_convergence else None
    load_prev = None
    if forcing is not None:
        load_prev = assembly.assemble_load_at(space, forcing, 0.0)

    t_start = _time.perf_counter()
    for step in range(n_steps):
        t_target = min((step + 1) * hht.dt, t_final)
        step_hht = hht
        if abs(t_target - (state.t + hht.dt)) > 1e-12 * max(t_final, 1.0):
            step_hht = HhtParams(alpha=hht.alpha, dt=t_target - state.t)
        load_next = None
        if forcing is not None:
            load_next = assembly.assemble_load_at(space, forcing, t_target)
        state, report = advance_step(state, space, step_hht, p, newton,
                                     drive, forcing, load_prev, load_next)
        state.t = t_target  # avoid accumulated roundoff in t
        newton_iters.append(report.iters)
        if histories is not None:
            histories.append(report.history)
        load_prev = load_next
        if state.t >= next_snap - 0.5 * hht.dt and step < n_steps - 1:
            snapshots.append(state)
            next_snap = (np.floor((state.t + 0.5 * hht.dt) / interval) + 1.0) \
                * interval
    snapshots.append(state)

    run_report = RunReport(steps=n_steps,
                           total_newton_iters=int(np.sum(newton_iters)),
                           max_newton_iters=int(np.max(newton_iters)) if newton_iters else 0,
                           newton_iters=newton_iters,
                           wall_time=_time.perf_counter() - t_start,
                           residual_histories=histories)
    return snapshots, run_report
