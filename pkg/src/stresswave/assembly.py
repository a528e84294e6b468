"""Assembly of the semi-discrete stress wave system.

The weak form produces, on nodal vectors (Sigma, Sigma_dot, Sigma_ddot),

    F_inrt_I = integral rho [eps'(s) s_ddot + eps''(s) s_dot^2] N_I dx
    K_IJ     = integral N_I' N_J' dx              (constant)

and the time-discrete residual weights the elastic and load terms with
the dissipation parameter alpha (in [-1/3, 0]):

    R = F_inrt(S*, Sd*, Sdd_{n+1}) + (1+alpha) K S_{n+1} - alpha K S_n
        - [(1+alpha) L_{n+1} - alpha L_n]

where the starred quantities are the alpha-weighted stage states

    S*  = (1+alpha) S_{n+1}  - alpha S_n
    Sd* = (1+alpha) Sd_{n+1} - alpha Sd_n.

This is the pairing that keeps second-order accuracy with beta =
(1-alpha)^2/4 and gamma = 1/2 - alpha: the converged acceleration is
effectively a sample of the true acceleration at t_{n+1} + alpha dt,
and the gamma excess over 1/2 cancels exactly that shift in the
kinematic updates.  The cancellation requires the inertial operator's
state-dependent coefficients to be sampled at the same shifted time,
hence the stage states; evaluating them at t_{n+1} instead degrades the
scheme to first order whenever the mass depends on the solution.  For a
linear material (b = 0) the stage states drop out of the (constant)
coefficients and the method reduces to the classical form exactly.

The Newton unknown is the acceleration vector, so the consistent
tangent chains through the Newmark updates and the stage weighting:

    S = M(S*) + (1+alpha) { gamma dt C_nl + beta dt^2 [K + K_sig] }
    C_nl  = integral 2 rho eps''(s*) sd* N_I N_J dx
    K_sig = integral rho (eps''(s*) sdd + eps'''(s*) sd*^2) N_I N_J dx.

All matrices are stored in LAPACK banded form (half-bandwidth = max
cell degree) and solved by direct banded factorization.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .constitutive import HyperbolicityError, MaterialParams, strain_derivative
from .fe_space import FeSpace


class BandedMatrix:
    """Square matrix in diagonal-ordered banded storage.

    Entry (i, j) with |i - j| <= bandwidth lives at ab[bandwidth + i - j, j],
    the layout scipy.linalg.solve_banded expects.
    """

    def __init__(self, n: int, bandwidth: int, ab: np.ndarray | None = None):
        self.n = n
        self.bandwidth = bandwidth
        if ab is None:
            ab = np.zeros((2 * bandwidth + 1, n))
        self.ab = ab

    def add_entries(self, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray):
        """Accumulate vals at (rows, cols); duplicate indices sum."""
        flat = (self.bandwidth + rows - cols) * self.n + cols
        self.ab += np.bincount(
            flat.ravel(), weights=vals.ravel(), minlength=self.ab.size
        ).reshape(self.ab.shape)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.ab[self.bandwidth] * x
        for d in range(1, self.bandwidth + 1):
            # superdiagonal d: entries (i, i+d); subdiagonal d: (i+d, i)
            y[:-d] += self.ab[self.bandwidth - d, d:] * x[d:]
            y[d:] += self.ab[self.bandwidth + d, :-d] * x[:-d]
        return y

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return solve_banded((self.bandwidth, self.bandwidth), self.ab, rhs)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo, hi = max(0, i - self.bandwidth), min(self.n, i + self.bandwidth + 1)
            for j in range(lo, hi):
                out[i, j] = self.ab[self.bandwidth + i - j, j]
        return out

    def copy(self) -> "BandedMatrix":
        return BandedMatrix(self.n, self.bandwidth, self.ab.copy())


@dataclass
class AssembledSystem:
    """Residual, tangent and the Dirichlet data of one Newton iteration.

    `constrained` flags boundary DoFs whose acceleration is prescribed;
    `prescribed` holds the target values there.  The Newton update
    solves tangent * delta = -residual after apply_dirichlet.
    """

    residual: np.ndarray
    tangent: BandedMatrix
    constrained: np.ndarray
    prescribed: np.ndarray


def _check_hyperbolic(fp: np.ndarray, sig_q: np.ndarray, x_q: np.ndarray):
    if np.any(fp <= 0.0):
        i = np.unravel_index(np.argmin(fp), fp.shape)
        raise HyperbolicityError(
            f"tangent compliance {fp[i]:.3e} <= 0 at quadrature point "
            f"x={x_q[i]:.6g} (sigma={sig_q[i]:.6g})",
            sigma=float(sig_q[i]), x=float(x_q[i]))


def assemble_stiffness(space: FeSpace) -> BandedMatrix:
    """Constant stiffness K_IJ = integral N_I' N_J' dx (cached per space)."""
    cached = space._aux_cache.get("stiffness")
    if cached is not None:
        return cached
    K = BandedMatrix(space.n_dofs, space.bandwidth)
    for p, g in space.batches().items():
        # reference element matrix, then scale by 1/jac per cell
        ke_ref = np.einsum("qi,qj,q->ij", g["dshape"], g["dshape"], g["weights"])
        ke = ke_ref[None, :, :] / g["jac"][:, None, None]
        dofs = g["dofs"]
        K.add_entries(dofs[:, :, None], dofs[:, None, :], ke)
    space._aux_cache["stiffness"] = K
    return K


def assemble_mass(space: FeSpace, Sigma: np.ndarray, p: MaterialParams) -> BandedMatrix:
    """State-dependent mass M_IJ = integral rho eps'(sigma_h) N_I N_J dx."""
    M = BandedMatrix(space.n_dofs, space.bandwidth)
    for deg, g in space.batches().items():
        sig_q = Sigma[g["dofs"]] @ g["shape"].T
        fp = strain_derivative(sig_q, 1, p)
        _check_hyperbolic(fp, sig_q, g["x_q"])
        coef = p.rho * fp * g["weights"][None, :] * g["jac"][:, None]
        me = np.einsum("mq,qi,qj->mij", coef, g["shape"], g["shape"])
        M.add_entries(g["dofs"][:, :, None], g["dofs"][:, None, :], me)
    return M


def assemble_inertial(space: FeSpace, Sigma: np.ndarray, Sigma_dot: np.ndarray,
                      Sigma_ddot: np.ndarray, p: MaterialParams) -> np.ndarray:
    """Inertial force rho [eps' s_ddot + eps'' s_dot^2] tested against N_I."""
    F = np.zeros(space.n_dofs)
    for deg, g in space.batches().items():
        shape_t = g["shape"].T
        sig_q = Sigma[g["dofs"]] @ shape_t
        sigd_q = Sigma_dot[g["dofs"]] @ shape_t
        sigdd_q = Sigma_ddot[g["dofs"]] @ shape_t
        fp = strain_derivative(sig_q, 1, p)
        _check_hyperbolic(fp, sig_q, g["x_q"])
        fpp = strain_derivative(sig_q, 2, p)
        integ = p.rho * (fp * sigdd_q + fpp * sigd_q**2) \
            * g["weights"][None, :] * g["jac"][:, None]
        fe = integ @ g["shape"]
        F += np.bincount(g["dofs"].ravel(), weights=fe.ravel(),
                         minlength=space.n_dofs)
    return F


def assemble_load_at(space: FeSpace, forcing, t: float) -> np.ndarray:
    """L_I(t) = integral forcing(x, t) N_I dx by cellwise quadrature."""
    L = np.zeros(space.n_dofs)
    for deg, g in space.batches().items():
        fvals = np.asarray(forcing(g["x_q"], t), dtype=float)
        integ = fvals * g["weights"][None, :] * g["jac"][:, None]
        fe = integ @ g["shape"]
        L += np.bincount(g["dofs"].ravel(), weights=fe.ravel(),
                         minlength=space.n_dofs)
    return L


def assemble_load(space: FeSpace, forcing, t_next: float, t_prev: float,
                  alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Load vectors at both time levels of the alpha-weighted residual."""
    return (assemble_load_at(space, forcing, t_next),
            assemble_load_at(space, forcing, t_prev))


def stage_state(state_next, state_prev, alpha: float):
    """Alpha-weighted stage state whose coefficients the inertia sees.

    Stress and rate are blended to the sampling time t_{n+1} + alpha dt;
    the acceleration stays the n+1 unknown.
    """
    if alpha == 0.0:
        return state_next
    w = 1.0 + alpha
    return dataclasses.replace(
        state_next,
        Sigma=w * state_next.Sigma - alpha * state_prev.Sigma,
        Sigma_dot=w * state_next.Sigma_dot - alpha * state_prev.Sigma_dot)


def assemble_residual(space: FeSpace, state_next, state_prev, hht,
                      p: MaterialParams, load_next: np.ndarray | None = None,
                      load_prev: np.ndarray | None = None) -> np.ndarray:
    """Time-discrete residual at the n+1 iterate (zero when balanced)."""
    K = assemble_stiffness(space)
    alpha = hht.alpha
    stage = stage_state(state_next, state_prev, alpha)
    R = assemble_inertial(space, stage.Sigma, stage.Sigma_dot,
                          state_next.Sigma_ddot, p)
    R += (1.0 + alpha) * K.matvec(state_next.Sigma)
    R -= alpha * K.matvec(state_prev.Sigma)
    if load_next is not None:
        R -= (1.0 + alpha) * load_next
    if load_prev is not None:
        R += alpha * load_prev
    return R


def assemble_tangent(space: FeSpace, stage, hht,
                     p: MaterialParams) -> BandedMatrix:
    """Consistent tangent of the residual w.r.t. the acceleration vector.

    `stage` is the alpha-weighted stage state the residual's inertial
    coefficients were evaluated at (see stage_state); for alpha = 0 it
    is simply the n+1 iterate.
    """
    K = assemble_stiffness(space)
    dt = hht.dt
    w = 1.0 + hht.alpha  # stage sensitivity d(S*)/d(S_{n+1})
    beta, gamma = hht.beta_nm, hht.gamma_nm
    S = BandedMatrix(space.n_dofs, space.bandwidth)
    for deg, g in space.batches().items():
        shape_t = g["shape"].T
        sig_q = stage.Sigma[g["dofs"]] @ shape_t
        sigd_q = stage.Sigma_dot[g["dofs"]] @ shape_t
        sigdd_q = stage.Sigma_ddot[g["dofs"]] @ shape_t
        fp = strain_derivative(sig_q, 1, p)
        fpp = strain_derivative(sig_q, 2, p)
        fppp = strain_derivative(sig_q, 3, p)
        # M + w gamma dt C_nl + w beta dt^2 K_sig, fused in one pass
        coef = p.rho * (fp
                        + w * gamma * dt * 2.0 * fpp * sigd_q
                        + w * beta * dt**2 * (fpp * sigdd_q + fppp * sigd_q**2))
        coef = coef * g["weights"][None, :] * g["jac"][:, None]
        me = np.einsum("mq,qi,qj->mij", coef, g["shape"], g["shape"])
        S.add_entries(g["dofs"][:, :, None], g["dofs"][:, None, :], me)
    S.ab += beta * dt**2 * w * K.ab
    return S


def apply_dirichlet(system: AssembledSystem, current: np.ndarray) -> AssembledSystem:
    """Impose prescribed accelerations on the Newton system.

    Constrained rows become identity equations for the exact update
    (prescribed - current); coupled columns are eliminated symmetrically
    with a right-side correction, preserving the banded structure.  The
    returned residual row for a constrained DoF j is -(prescribed_j -
    current_j) so that solving tangent * delta = -residual lands the
    iterate exactly on the prescribed value.
    """
    n = len(system.residual)
    dofs = np.flatnonzero(system.constrained)
    if np.any((dofs != 0) & (dofs != n - 1)):
        raise ValueError("acceleration constraints are only supported on "
                         "the two boundary DoFs")
    S = system.tangent.copy()
    R = system.residual.copy()
    bw = S.bandwidth
    for j in dofs:
        delta_j = system.prescribed[j] - current[j]
        lo, hi = max(0, j - bw), min(n, j + bw + 1)
        for i in range(lo, hi):
            if i == j:
                continue
            # move S[i, j] * delta_j to the right side, then cut the coupling
            R[i] += S.ab[bw + i - j, j] * delta_j
            S.ab[bw + i - j, j] = 0.0
            S.ab[bw + j - i, i] = 0.0
        S.ab[bw, j] = 1.0
        R[j] = -delta_j
    return AssembledSystem(residual=R, tangent=S,
                           constrained=system.constrained.copy(),
                           prescribed=system.prescribed.copy())
