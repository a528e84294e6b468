"""Strain-limiting constitutive law and its stress derivatives.

The material response is the saturating compliance relation

    eps(sigma) = sigma / (1 + (b*|sigma|)**a)**(1/a)

which bounds the strain by 1/b for any stress when b > 0 and reduces to
the linear law eps = sigma when b = 0.  The first three stress
derivatives drive the inertial terms and the consistent tangent of the
stress wave equation; the first derivative (tangent compliance) also
sets the local wave speed c = sqrt(1 / (rho * eps'(sigma))).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class HyperbolicityError(RuntimeError):
    """Tangent compliance eps'(sigma) dropped to zero or below.

    The stress wave equation is hyperbolic only while eps' > 0; losing
    that sign means the local wave speed is no longer real.
    """

    def __init__(self, message: str, sigma: float | None = None,
                 x: float | None = None):
        super().__init__(message)
        self.sigma = sigma
        self.x = x


@dataclass(frozen=True)
class MaterialParams:
    """Density and the two constitutive parameters of the 1D law.

    rho     : mass density, > 0
    b       : nonlinearity magnitude (1/stress), >= 0; b = 0 is linear
    a       : nonlinearity exponent, > 0
    reg_eta : width of the regularized |sigma| used in derivative
              factors that carry a negative power of |sigma|
    """

    rho: float
    b: float
    a: float
    reg_eta: float = 1.0e-8

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.b < 0:
            raise ValueError(f"b must be non-negative, got {self.b}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.reg_eta < 0:
            raise ValueError(f"reg_eta must be non-negative, got {self.reg_eta}")


def _as_result(sigma, out: np.ndarray):
    """Return a float for scalar input, ndarray otherwise."""
    if np.isscalar(sigma) or np.ndim(sigma) == 0:
        return float(out)
    return out


def strain(sigma, p: MaterialParams):
    """Evaluate eps(sigma).  Odd in sigma; |result| < 1/b for b > 0."""
    s = np.asarray(sigma, dtype=float)
    if p.b == 0.0:
        return _as_result(sigma, s + 0.0)
    with np.errstate(over="ignore"):
        w = (p.b * np.abs(s)) ** p.a
        out = s * (1.0 + w) ** (-1.0 / p.a)
    # (b|s|)^a overflowed: the law has saturated at the limiting strain
    out = np.where(np.isinf(w), np.sign(s) / p.b, out)
    return _as_result(sigma, out)


def strain_derivative(sigma, order: int, p: MaterialParams):
    """d^order(eps)/d(sigma)^order for order in {1, 2, 3}.

    Closed forms, with D = 1 + (b|s|)^a:

        eps'   = D^-(1+1/a)
        eps''  = -(a+1) b^a |s|^(a-1) sign(s) D^-(2+1/a)
        eps''' = -(a+1) b^a |s|^(a-2) [(a-1) - (a+2)(b|s|)^a] D^-(3+1/a)

    Factors |s|^(a-1) (order 2, a < 1) and |s|^(a-2) (order 3, a < 2)
    carry a negative exponent and are evaluated with the regularized
    magnitude sqrt(s^2 + reg_eta^2); every other factor is exact.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    s = np.asarray(sigma, dtype=float)
    if p.b == 0.0:
        out = np.ones_like(s) if order == 1 else np.zeros_like(s)
        return _as_result(sigma, out)

    a = p.a
    mag = np.abs(s)
    with np.errstate(over="ignore"):
        w = (p.b * mag) ** a
        d = 1.0 + w
        if order == 1:
            out = d ** (-(1.0 + 1.0 / a))
        elif order == 2:
            m = mag if a >= 1.0 else np.sqrt(s * s + p.reg_eta**2)
            out = -(a + 1.0) * p.b**a * m ** (a - 1.0) * np.sign(s) \
                * d ** (-(2.0 + 1.0 / a))
            out = np.where(np.isinf(w), 0.0, out)
        else:
            m = mag if a >= 2.0 else np.sqrt(s * s + p.reg_eta**2)
            out = -(a + 1.0) * p.b**a * m ** (a - 2.0) \
                * ((a - 1.0) - (a + 2.0) * w) * d ** (-(3.0 + 1.0 / a))
            out = np.where(np.isinf(w), 0.0, out)
    return _as_result(sigma, out)


def wave_speed(sigma, p: MaterialParams):
    """Local wave speed c(sigma) = sqrt(1 / (rho * eps'(sigma)))."""
    fp = np.asarray(strain_derivative(sigma, 1, p), dtype=float)
    if np.any(fp <= 0.0):
        idx = int(np.argmin(fp))
        bad = float(np.asarray(sigma, dtype=float).ravel()[idx]) \
            if np.ndim(sigma) else float(sigma)
        raise HyperbolicityError(
            f"tangent compliance {fp.ravel()[idx]:.3e} <= 0 at sigma={bad:.6g}",
            sigma=bad)
    return _as_result(sigma, 1.0 / np.sqrt(p.rho * fp))


@dataclass(frozen=True)
class HyperbolicityReport:
    """Grid check of eps' > 0 over a stress interval."""

    min_derivative: float
    worst_sigma: float
    passed: bool


def verify_hyperbolicity(sigma_min: float, sigma_max: float, n_samples: int,
                         p: MaterialParams,
                         derivative: Callable[[np.ndarray], np.ndarray] | None = None,
                         ) -> HyperbolicityReport:
    """Sample the tangent compliance on a uniform grid and report its minimum.

    `derivative` defaults to the material's own first derivative; a
    different callable can be injected to reuse the checker.
    """
    if not sigma_min < sigma_max:
        raise ValueError("sigma_min must be < sigma_max")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    grid = np.linspace(sigma_min, sigma_max, n_samples)
    if derivative is None:
        vals = np.asarray(strain_derivative(grid, 1, p), dtype=float)
    else:
        vals = np.asarray(derivative(grid), dtype=float)
    i = int(np.argmin(vals))
    return HyperbolicityReport(min_derivative=float(vals[i]),
                               worst_sigma=float(grid[i]),
                               passed=bool(vals[i] > 0.0))
