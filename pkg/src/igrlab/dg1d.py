"""Periodic piecewise-linear DG space on a uniform 1D mesh.

Each cell carries two coefficients ``(mean, slope)`` in the local basis
``{1, xi}`` with ``xi = 2 (x - x_c) / h``; the mass matrix is
``diag(h, h/3)`` per cell.  Face ``j`` is the right face of cell ``j``; its
left trace comes from cell ``j`` and its right trace from cell ``j + 1``
(periodic).  Jumps are ``[[v]] = v_left - v_right``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import backend
from .backend import CyclicBlockSystem, SolverError
from .quadrature import GAUSS_POINTS, GAUSS_WEIGHTS

__all__ = [
    "Mesh1D", "DgField", "PenaltyParams", "SolverError",
    "project", "project_values", "weak_derivative", "sipg_solve", "sipg_system",
    "face_traces", "integrate",
]


class DgDomainError(ValueError):
    """Raised when an elliptic weight (density) is not strictly positive."""


@dataclass(frozen=True)
class PenaltyParams:
    c_penalty: float = 20.0
    order: int = 1

    def __post_init__(self):
        if not self.c_penalty > 0:
            raise ValueError("c_penalty must be > 0")

    def sigma(self, h):
        return self.c_penalty * self.order**2 / h


@dataclass(eq=False)
class Mesh1D:
    n_cells: int
    domain_length: float = 1.0
    periodic: bool = field(default=True, init=False)

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 4:
            raise ValueError(f"n_cells must be an integer >= 4, got {self.n_cells}")
        self.n_cells = int(self.n_cells)
        self.domain_length = float(self.domain_length)
        self.h = self.domain_length / self.n_cells

    @cached_property
    def cell_centers(self):
        return (np.arange(self.n_cells) + 0.5) * self.h

    @cached_property
    def quad_points(self):
        """Physical quadrature abscissae, shape (n_cells, 3)."""
        return self.cell_centers[:, None] + 0.5 * self.h * GAUSS_POINTS[None, :]

    @cached_property
    def faces(self):
        return (np.arange(self.n_cells) + 1.0) * self.h

    def _derivative_system(self, params):
        # the operator depends only on (mesh, penalty); build it once per pair
        cache = self.__dict__.setdefault("_dsys", {})
        key = (params.c_penalty, params.order, backend.active_backend())
        if key not in cache:
            n, h = self.n_cells, self.h
            sigma = params.sigma(h)
            diag = np.zeros((n, 2, 2))
            diag[:, 0, 0] = h
            diag[:, 1, 1] = h / 3.0
            jl = np.array([1.0, 1.0])
            jr = np.array([-1.0, 1.0])
            diag += sigma * np.outer(jl, jl)
            diag += sigma * np.outer(jr, jr)
            upper = np.broadcast_to(sigma * np.outer(jl, jr), (n, 2, 2)).copy()
            lower = np.broadcast_to(sigma * np.outer(jr, jl), (n, 2, 2)).copy()
            cache[key] = CyclicBlockSystem(lower, diag, upper)
        return cache[key]


class DgField:
    """Piecewise-linear field: ``coeffs[i] = (mean, slope)`` on cell ``i``."""

    __slots__ = ("mesh", "coeffs")

    def __init__(self, mesh, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (mesh.n_cells, 2):
            raise ValueError(f"coeffs must have shape ({mesh.n_cells}, 2), got {coeffs.shape}")
        self.mesh = mesh
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros((mesh.n_cells, 2)))

    @classmethod
    def constant(cls, mesh, value):
        c = np.zeros((mesh.n_cells, 2))
        c[:, 0] = value
        return cls(mesh, c)

    @property
    def means(self):
        return self.coeffs[:, 0]

    @property
    def slopes(self):
        return self.coeffs[:, 1]

    def at_quad(self):
        """Values at the 3 Gauss points of every cell, shape (n_cells, 3)."""
        return self.coeffs[:, :1] + self.coeffs[:, 1:] * GAUSS_POINTS[None, :]

    def at_centers(self):
        return self.coeffs[:, 0].copy()

    def __call__(self, x):
        """Pointwise evaluation (x wrapped into the periodic domain)."""
        m = self.mesh
        x = np.mod(np.asarray(x, dtype=float), m.domain_length)
        cell = np.minimum((x / m.h).astype(int), m.n_cells - 1)
        xi = 2.0 * (x - m.cell_centers[cell]) / m.h
        return self.coeffs[cell, 0] + self.coeffs[cell, 1] * xi

    def derivative_cellwise(self):
        """Broken (in-cell) derivative, constant per cell."""
        return 2.0 * self.coeffs[:, 1] / self.mesh.h

    def __add__(self, other):
        return DgField(self.mesh, self.coeffs + _coeffs(other))

    def __sub__(self, other):
        return DgField(self.mesh, self.coeffs - _coeffs(other))

    def __mul__(self, scalar):
        return DgField(self.mesh, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return DgField(self.mesh, -self.coeffs)

    def copy(self):
        return DgField(self.mesh, self.coeffs.copy())

    def __repr__(self):
        return f"DgField(n_cells={self.mesh.n_cells})"


def _coeffs(other):
    return other.coeffs if isinstance(other, DgField) else other


def project_values(mesh, values):
    """L2 projection of values given at the Gauss points, shape (n_cells, 3)."""
    values = np.asarray(values, dtype=float)
    c = np.empty((mesh.n_cells, 2))
    c[:, 0] = 0.5 * values @ GAUSS_WEIGHTS
    c[:, 1] = 1.5 * values @ (GAUSS_WEIGHTS * GAUSS_POINTS)
    return DgField(mesh, c)


def project(mesh, f):
    """L2 projection of a pointwise function ``f(x)`` onto the DG space."""
    return project_values(mesh, f(mesh.quad_points))


def face_traces(u):
    """``(left, right)`` one-sided values at each face, each shape (n_cells,)."""
    c = u.coeffs
    left = c[:, 0] + c[:, 1]
    right = np.roll(c[:, 0] - c[:, 1], -1)
    return left, right


def integrate(u):
    """Exact integral of the piecewise-linear representation."""
    return u.mesh.h * float(np.sum(u.coeffs[:, 0]))


def _weak_derivative_rhs(u):
    """-int u phi_x + sum_faces <u> [[phi]] for every basis function phi."""
    left, right = face_traces(u)
    avg = 0.5 * (left + right)
    rhs = np.zeros_like(u.coeffs)
    rhs[:, 1] -= 2.0 * u.coeffs[:, 0]
    # face j: left-cell test jump (1, 1), right-cell test jump (-1, 1)
    rhs[:, 0] += avg
    rhs[:, 1] += avg
    avg_prev = np.roll(avg, 1)
    rhs[:, 0] -= avg_prev
    rhs[:, 1] += avg_prev
    return rhs


def weak_derivative(u, params=PenaltyParams()):
    """Penalized weak derivative ``q`` of ``u``.

    Solves ``int q phi + sum_f (C p^2 / h) [[q]][[phi]] = -int u phi_x +
    sum_f <u> [[phi]]`` for all ``phi`` in the space.
    """
    system = u.mesh._derivative_system(params)
    return DgField(u.mesh, system.solve(_weak_derivative_rhs(u)))


def weak_derivative_many(fields, params=PenaltyParams()):
    """Weak derivatives of several fields on one mesh in a single solve."""
    mesh = fields[0].mesh
    rhs = np.stack([_weak_derivative_rhs(f) for f in fields], axis=-1)
    out = mesh._derivative_system(params).solve(rhs)
    return [DgField(mesh, out[..., k]) for k in range(len(fields))]


def _mass_apply(coeffs, h):
    out = np.empty_like(coeffs)
    out[:, 0] = h * coeffs[:, 0]
    out[:, 1] = (h / 3.0) * coeffs[:, 1]
    return out


def sipg_system(rho, alpha, params=PenaltyParams()):
    """Assemble and factor the SIPG operator for ``rho^-1 S - alpha (rho^-1 S_x)_x``."""
    mesh = rho.mesh
    rq = rho.at_quad()
    left, right = face_traces(rho)
    if np.any(rq <= 0) or np.any(left <= 0) or np.any(right <= 0):
        bad = np.flatnonzero((rq <= 0).any(axis=1) | (left <= 0) | (np.roll(right, 1) <= 0))
        raise DgDomainError(f"density must be positive for the elliptic solve (cell {int(bad[0])})")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    km, kp = 1.0 / left, 1.0 / right
    # the penalty scales with the larger weight trace so coercivity survives steep density
    sigma = params.sigma(mesh.h) * np.maximum(km, kp)
    lower, diag, upper = backend.sipg_blocks(1.0 / rq, km, kp, alpha, sigma, mesh.h)
    return CyclicBlockSystem(lower, diag, upper)


def _block_apply(system, x):
    return (np.einsum("nab,nb...->na...", system.lower, np.roll(x, 1, axis=0))
            + np.einsum("nab,nb...->na...", system.diag, x)
            + np.einsum("nab,nb...->na...", system.upper, np.roll(x, -1, axis=0)))


def sipg_solve(rho, alpha, rhs, params=PenaltyParams(), rtol=1e-10, system=None):
    """Solve ``rho^-1 S - alpha (rho^-1 S_x)_x = rhs`` with weighted SIPG.

    ``rhs`` is a DgField or a list of DgFields sharing one operator; the
    return value matches.  ``system`` may be a pre-factored
    :func:`sipg_system` for the same ``rho`` and ``alpha``.
    """
    many = isinstance(rhs, (list, tuple))
    fields = list(rhs) if many else [rhs]
    mesh = rho.mesh
    if system is None:
        system = sipg_system(rho, alpha, params)
    b = np.stack([_mass_apply(f.coeffs, mesh.h) for f in fields], axis=-1)
    x = system.solve(b)
    res = np.linalg.norm(_block_apply(system, x) - b)
    scale = np.linalg.norm(b)
    if not np.all(np.isfinite(x)) or res > rtol * max(scale, np.finfo(float).tiny):
        rel = res / max(scale, np.finfo(float).tiny)
        raise SolverError(f"SIPG solve residual {rel:.3e} exceeds {rtol:.1e}", residual=rel)
    out = [DgField(mesh, x[..., k]) for k in range(len(fields))]
    return out if many else out[0]
