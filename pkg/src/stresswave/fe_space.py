"""1D continuous Lagrange finite element space with per-cell degree.

The mesh is a uniform partition of [0, L].  Each cell carries degree 1,
2 or 3; adjacent cells share exactly one endpoint node, so the space is
C0 regardless of degree mismatch.  Degrees come from one of two
policies: `uniform(p)` everywhere, or `center_graded`, which places
cubic cells in the middle band of the domain (|x/L - 1/2| < 0.2),
quadratic in the next band (< 0.4) and linear outside, judged at cell
midpoints.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

# Local node coordinates on [-1, 1].  Gauss-Lobatto for p >= 2 (better
# conditioned than equispaced; coincides for p <= 2).
_LOCAL_NODES = {
    1: np.array([-1.0, 1.0]),
    2: np.array([-1.0, 0.0, 1.0]),
    3: np.array([-1.0, -1.0 / np.sqrt(5.0), 1.0 / np.sqrt(5.0), 1.0]),
}


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre points and weights on the reference cell [-1, 1]."""

    points: np.ndarray
    weights: np.ndarray


def gauss_rule(n_points: int) -> QuadratureRule:
    """Gauss-Legendre rule, exact for polynomials of degree <= 2n - 1."""
    if not 1 <= n_points <= 10:
        raise ValueError(f"n_points must be in [1, 10], got {n_points}")
    x, w = np.polynomial.legendre.leggauss(n_points)
    return QuadratureRule(points=x, weights=w)


def lagrange_basis(nodes: np.ndarray, points) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the Lagrange basis on `nodes`.

    Returns (values, derivs), each of shape (n_points, n_nodes).
    """
    nodes = np.asarray(nodes, dtype=float)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    nn = len(nodes)
    vals = np.empty((len(pts), nn))
    ders = np.empty((len(pts), nn))
    for i in range(nn):
        others = [j for j in range(nn) if j != i]
        denom = np.prod([nodes[i] - nodes[j] for j in others])
        vals[:, i] = np.prod([pts - nodes[j] for j in others], axis=0) / denom
        der = np.zeros_like(pts)
        for k in others:
            rest = [j for j in others if j != k]
            if rest:
                der += np.prod([pts - nodes[j] for j in rest], axis=0)
            else:
                der += 1.0
        ders[:, i] = der / denom
    return vals, ders


class FeSpace:
    """Immutable mesh + DoF map for 1D C0 Lagrange elements.

    Attributes
    ----------
    cell_edges : (n_cells + 1,) cell boundary coordinates
    degrees    : (n_cells,) polynomial degree per cell
    dof_coords : (n_dofs,) global node coordinates, left to right
    cell_dofs  : list of per-cell global DoF index arrays
    """

    def __init__(self, cell_edges: np.ndarray, degrees: np.ndarray):
        cell_edges = np.asarray(cell_edges, dtype=float)
        degrees = np.asarray(degrees, dtype=int)
        if len(cell_edges) != len(degrees) + 1:
            raise ValueError("need one more edge than cells")
        if np.any(np.diff(cell_edges) <= 0):
            raise ValueError("cell edges must be strictly increasing")
        if not set(np.unique(degrees)) <= {1, 2, 3}:
            raise ValueError("cell degrees must be 1, 2 or 3")

        self.cell_edges = cell_edges
        self.degrees = degrees
        self.n_cells = len(degrees)
        self.x_left = float(cell_edges[0])
        self.x_right = float(cell_edges[-1])

        coords = [self.x_left]
        cell_dofs = []
        next_dof = 1
        for k in range(self.n_cells):
            p = int(degrees[k])
            xl, xr = cell_edges[k], cell_edges[k + 1]
            mid, half = 0.5 * (xl + xr), 0.5 * (xr - xl)
            local = mid + half * _LOCAL_NODES[p]
            dofs = [0 if k == 0 else int(cell_dofs[k - 1][-1])]
            for xi in local[1:]:
                coords.append(float(xi))
                dofs.append(next_dof)
                next_dof += 1
            cell_dofs.append(np.array(dofs, dtype=int))
        self.dof_coords = np.array(coords)
        self.cell_dofs = cell_dofs
        self.n_dofs = next_dof
        self.bandwidth = int(degrees.max())
        self._batch_cache: dict[int, dict] = {}
        self._aux_cache: dict = {}

    def cell_containing(self, x) -> np.ndarray:
        """Cell index for each point (boundary points resolve leftward)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.searchsorted(self.cell_edges, x, side="right") - 1
        return np.clip(idx, 0, self.n_cells - 1)

    def batches(self, n_extra: int = 2) -> dict[int, dict]:
        """Per-degree assembly tables at a (degree + n_extra)-point rule.

        Each entry holds cell indices, global DoF rows, jacobians,
        physical quadrature coordinates and shape tables, vectorized
        over all cells of that degree.
        """
        if n_extra in self._batch_cache:
            return self._batch_cache[n_extra]
        groups: dict[int, dict] = {}
        for p in sorted(set(self.degrees.tolist())):
            cells = np.flatnonzero(self.degrees == p)
            rule = gauss_rule(p + n_extra)
            shp, dshp = lagrange_basis(_LOCAL_NODES[p], rule.points)
            xl = self.cell_edges[cells]
            xr = self.cell_edges[cells + 1]
            jac = 0.5 * (xr - xl)
            mid = 0.5 * (xl + xr)
            groups[p] = {
                "cells": cells,
                "dofs": np.vstack([self.cell_dofs[k] for k in cells]),
                "jac": jac,
                "x_q": mid[:, None] + jac[:, None] * rule.points[None, :],
                "shape": shp,
                "dshape": dshp,
                "weights": rule.weights,
            }
        self._batch_cache[n_extra] = groups
        return groups

    def eval_field(self, values: np.ndarray, x) -> np.ndarray:
        """Evaluate the FE field with nodal `values` at physical points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cells = self.cell_containing(x)
        out = np.empty_like(x)
        for p in set(self.degrees[cells].tolist()):
            mask = self.degrees[cells] == p
            ks = cells[mask]
            xl = self.cell_edges[ks]
            xr = self.cell_edges[ks + 1]
            # exact -1/+1 when x coincides with a cell edge
            xi = 2.0 * (x[mask] - xl) / (xr - xl) - 1.0
            shp, _ = lagrange_basis(_LOCAL_NODES[p], xi)
            nod = values[np.vstack([self.cell_dofs[k] for k in ks])]
            out[mask] = np.sum(shp * nod, axis=1)
        return out


def shape_eval(space: FeSpace, cell: int, ref_points) -> tuple[np.ndarray, np.ndarray]:
    """Local basis values and reference derivatives at points in [-1, 1]."""
    if not 0 <= cell < space.n_cells:
        raise ValueError(f"cell index {cell} out of range")
    pts = np.atleast_1d(np.asarray(ref_points, dtype=float))
    if np.any(np.abs(pts) > 1.0 + 1e-12):
        raise ValueError("reference points must lie in [-1, 1]")
    return lagrange_basis(_LOCAL_NODES[int(space.degrees[cell])], pts)


def _degrees_center_graded(midpoints: np.ndarray, L: float) -> np.ndarray:
    t = np.abs(midpoints / L - 0.5)
    deg = np.ones(len(midpoints), dtype=int)
    deg[t < 0.4] = 2
    deg[t < 0.2] = 3
    return deg


def build_space(L: float, n_cells: int, policy: str = "uniform(1)") -> FeSpace:
    """Build the space on [0, L] with the given degree policy.

    `policy` is either "uniform(p)" with p in {1, 2, 3} or
    "center_graded".
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    if n_cells < 2:
        raise ValueError(f"n_cells must be >= 2, got {n_cells}")
    edges = np.linspace(0.0, L, n_cells + 1)
    m = re.fullmatch(r"uniform\((\d)\)", policy.strip())
    if m:
        p = int(m.group(1))
        if p not in (1, 2, 3):
            raise ValueError(f"uniform degree must be 1, 2 or 3, got {p}")
        degrees = np.full(n_cells, p, dtype=int)
    elif policy.strip() == "center_graded":
        midpoints = 0.5 * (edges[:-1] + edges[1:])
        degrees = _degrees_center_graded(midpoints, L)
    else:
        raise ValueError(f"unknown degree policy {policy!r}")
    return FeSpace(edges, degrees)
