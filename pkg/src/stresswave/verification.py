"""Manufactured-solution verification and convergence studies.

The manufactured stress field sigma(x, t) = sin(pi x) sin(t) satisfies
homogeneous Dirichlet conditions on [0, 1].  Injecting the source

    f = rho [eps'(sigma) sigma_tt + eps''(sigma) sigma_t^2] - sigma_xx

makes it an exact solution of the stress wave equation, so the L2 error
of the discrete solution at the end time measures pure discretization
error.  Spatial and temporal refinement ladders reproduce the expected
second-order rates.
"""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constitutive import MaterialParams, strain_derivative
from .fe_space import FeSpace, build_space
from .integrator import run_simulation

SPATIAL_CELLS = (16, 32, 64, 128)
TEMPORAL_DTS = (8.0e-3, 4.0e-3, 2.0e-3, 1.0e-3)
TEMPORAL_MESH_CELLS = 64
SPATIAL_DT = 1.0e-5


@dataclass(frozen=True)
class MmsFields:
    sigma: np.ndarray
    sigma_t: np.ndarray
    sigma_tt: np.ndarray
    sigma_xx: np.ndarray


def mms_fields(x, t: float) -> MmsFields:
    """Exact stress field sin(pi x) sin(t) and its needed derivatives."""
    x = np.asarray(x, dtype=float)
    sx = np.sin(np.pi * x)
    return MmsFields(sigma=sx * np.sin(t),
                     sigma_t=sx * np.cos(t),
                     sigma_tt=-sx * np.sin(t),
                     sigma_xx=-np.pi**2 * sx * np.sin(t))


def mms_forcing(x, t: float, p: MaterialParams):
    """Source term that makes the manufactured field an exact solution."""
    f = mms_fields(x, t)
    fp = strain_derivative(f.sigma, 1, p)
    fpp = strain_derivative(f.sigma, 2, p)
    return p.rho * (fp * f.sigma_tt + fpp * f.sigma_t**2) - f.sigma_xx


def l2_error(space: FeSpace, Sigma: np.ndarray, t: float) -> float:
    """L2 norm of (sigma_h - sigma_exact) at time t, degree+3 quadrature."""
    total = 0.0
    for deg, g in space.batches(n_extra=3).items():
        sig_q = Sigma[g["dofs"]] @ g["shape"].T
        diff = sig_q - mms_fields(g["x_q"], t).sigma
        total += float(np.sum(diff**2 * g["weights"][None, :]
                              * g["jac"][:, None]))
    return float(np.sqrt(total))


@dataclass(frozen=True)
class ConvergenceRow:
    resolution: str
    dofs: int | None
    l2_error: float
    rate: float | None


@dataclass(frozen=True)
class ConvergenceTable:
    kind: str
    rows: tuple

    def rates(self) -> list:
        return [r.rate for r in self.rows if r.rate is not None]

    def write_csv(self, path):
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["resolution", "dofs", "l2_error", "rate"])
            for r in self.rows:
                writer.writerow([r.resolution,
                                 "" if r.dofs is None else r.dofs,
                                 f"{r.l2_error:.17g}",
                                 "" if r.rate is None else f"{r.rate:.17g}"])
        return path

    def __str__(self):
        lines = [f"{self.kind} convergence",
                 f"{'resolution':>14} {'dofs':>6} {'l2_error':>13} {'rate':>6}"]
        for r in self.rows:
            dofs = "" if r.dofs is None else str(r.dofs)
            rate = "" if r.rate is None else f"{r.rate:.2f}"
            lines.append(f"{r.resolution:>14} {dofs:>6} {r.l2_error:>13.4e} {rate:>6}")
        return "\n".join(lines)


def observed_rate(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    """log(e_coarse / e_fine) / log(ratio) for one refinement pair."""
    return float(np.log(e_coarse / e_fine) / np.log(ratio))


def _mms_run_error(config) -> tuple[float, int]:
    p = config.material
    if config.drive.amplitude != 0.0:
        # manufactured solution needs homogeneous boundary values
        config = dataclasses.replace(
            config, drive=dataclasses.replace(config.drive, amplitude=0.0))
    if config.output.snapshot_interval != 0.0:
        # only the final state is measured
        config = dataclasses.replace(
            config, output=dataclasses.replace(config.output,
                                               snapshot_interval=0.0))
    snapshots, _ = run_simulation(
        config,
        forcing=lambda x, t: mms_forcing(x, t, p),
        initial_sigma=lambda x: mms_fields(x, 0.0).sigma,
        initial_rate=lambda x: mms_fields(x, 0.0).sigma_t,
    )
    final = snapshots[-1]
    space = build_space(config.mesh.L, config.mesh.n_cells,
                        config.mesh.degree_policy)
    return l2_error(space, final.Sigma, final.t), space.n_dofs


def convergence_study(kind: str, base_config,
                      cells=None, dts=None) -> ConvergenceTable:
    """Run the spatial or temporal MMS refinement ladder.

    spatial:  linear elements on the standard cell ladder at a frozen
              small time step, so the spatial error dominates.
    temporal: cubic elements on a fixed fine mesh while the time step
              halves, so the time integration error dominates.

    `cells` / `dts` override the standard ladders (testing hook); the
    defaults are the module-level ladder constants.
    """
    if kind not in ("spatial", "temporal"):
        raise ValueError(f"kind must be 'spatial' or 'temporal', got {kind!r}")

    rows = []
    prev_err = None
    if kind == "spatial":
        cells = SPATIAL_CELLS if cells is None else cells
        for n in cells:
            cfg = dataclasses.replace(
                base_config,
                mesh=dataclasses.replace(base_config.mesh, n_cells=n,
                                         degree_policy="uniform(1)"),
                time=dataclasses.replace(base_config.time, dt=SPATIAL_DT),
            )
            err, ndofs = _mms_run_error(cfg)
            rate = None if prev_err is None else observed_rate(prev_err, err)
            rows.append(ConvergenceRow(f"{n} cells", ndofs, err, rate))
            prev_err = err
    else:
        dts = TEMPORAL_DTS if dts is None else dts
        for dt in dts:
            cfg = dataclasses.replace(
                base_config,
                mesh=dataclasses.replace(base_config.mesh,
                                         n_cells=TEMPORAL_MESH_CELLS,
                                         degree_policy="uniform(3)"),
                time=dataclasses.replace(base_config.time, dt=dt),
            )
            err, _ = _mms_run_error(cfg)
            rate = None if prev_err is None else observed_rate(prev_err, err)
            rows.append(ConvergenceRow(f"dt={dt:g}", None, err, rate))
            prev_err = err
    return ConvergenceTable(kind=kind, rows=tuple(rows))
