"""Finite-difference checks of the weighted elliptic operator identities.

Small periodic grids are assembled densely so each identity can be tested
against a direct solve: the maximum principle of the scalar operator
``rho^-1 phi - alpha d/dx(rho^-1 dphi/dx)``, the commutation relations
between the vector and scalar operators, the strain decomposition of a
velocity gradient and the reduction of the matrix-valued elliptic equation
to a scalar one.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class SingularOperatorError(np.linalg.LinAlgError):
    """Raised when an operator that should be invertible is not."""


@dataclass(frozen=True)
class FdGrid:
    dims: int
    n: int
    length: float = 1.0
    periodic: bool = True

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if not 3 <= self.n <= 64:
            raise ValueError("n must lie in [3, 64]")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")
        if self.dims == 2 and self.n > 24:
            raise ValueError("2D grids are capped at 24 points per axis")

    @property
    def spacing(self):
        return self.length / self.n

    @property
    def size(self):
        return self.n**self.dims

    def coords(self):
        x = np.arange(self.n) * self.spacing
        if self.dims == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def _shift_1d(self, k):
        return np.roll(np.eye(self.n), k, axis=1)

    def _axis(self, op, axis):
        if self.dims == 1:
            return op
        eye = np.eye(self.n)
        return np.kron(op, eye) if axis == 0 else np.kron(eye, op)

    def forward(self, axis=0):
        """``(f[i+1] - f[i]) / h`` along ``axis``."""
        return self._axis((self._shift_1d(1) - np.eye(self.n)) / self.spacing, axis)

    def backward(self, axis=0):
        """``(f[i] - f[i-1]) / h`` along ``axis``."""
        return self._axis((np.eye(self.n) - self._shift_1d(-1)) / self.spacing, axis)

    def centered(self, axis=0):
        """``(f[i+1] - f[i-1]) / 2h`` along ``axis``."""
        return self._axis((self._shift_1d(1) - self._shift_1d(-1)) / (2.0 * self.spacing), axis)


def _solve(a, b):
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularOperatorError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularOperatorError("non-finite solution")
    return x


def _check_weight(rho, alpha):
    rho = np.asarray(rho, dtype=float).ravel()
    if not np.all(rho > 0):
        raise ValueError("rho must be positive")
    if not alpha >= 0:
        raise ValueError("alpha must be non-negative")
    return rho


def weighted_scalar_operator(grid, rho, alpha):
    """Conservative stencil of ``rho^-1 phi - alpha d/dx(rho^-1 dphi/dx)`` (1D).

    Face weights are arithmetic means of rho; off-diagonals are non-positive
    and rows are strictly diagonally dominant, so the matrix is an M-matrix.
    """
    rho = _check_weight(rho, alpha)
    face = 0.5 * (rho + np.roll(rho, -1))
    return np.diag(1.0 / rho) + alpha * grid.forward().T @ np.diag(1.0 / face) @ grid.forward()


class MaxPrincipleResult(NamedTuple):
    min_phi: float
    passed: bool
    phi: np.ndarray


def max_principle_check(rho, g, alpha, grid=None, tol=1e-10):
    """Solve the weighted scalar problem for ``g >= 0`` and test ``phi >= 0``.

    Passes when ``min phi >= -tol * max|g|``.
    """
    rho = np.asarray(rho, dtype=float)
    g = np.asarray(g, dtype=float)
    if grid is None:
        grid = FdGrid(1, rho.size)
    if np.any(g < 0):
        raise ValueError("g must be non-negative")
    phi = _solve(weighted_scalar_operator(grid, rho, alpha), g)
    scale = float(np.max(np.abs(g))) if g.size else 0.0
    lo = float(phi.min())
    return MaxPrincipleResult(lo, bool(lo >= -tol * scale), phi)


def _vector_operator(weight, alpha, grad, div):
    """``M_w - alpha grad M_w div`` on collocated 1D data."""
    return np.diag(weight) - alpha * grad @ np.diag(weight) @ div


def _scalar_operator(weight, alpha, grad, div):
    """``M_w - alpha div M_w grad`` on collocated 1D data."""
    return np.diag(weight) - alpha * div @ np.diag(weight) @ grad


class CommutationResult(NamedTuple):
    grad_residual: float
    div_residual: float


def _rel(a, b):
    den = max(np.linalg.norm(a), np.linalg.norm(b), np.finfo(float).tiny)
    return float(np.linalg.norm(a - b) / den)


def commutation_check(rho, f, alpha, grid=None):
    """Relative L2 residuals of both commutation identities on ``f``.

    Gradient form: ``M_rho Lv(rho)^-1 grad f == grad Ls(1/rho)^-1 M_rho^-1 f``.
    Divergence form: ``div Lv(rho)^-1 M_rho f == M_{1/rho} Ls(1/rho)^-1 div f``.
    Both sides use the same centered difference matrix for grad and div.
    """
    rho = np.asarray(rho, dtype=float)
    f = np.asarray(f, dtype=float)
    if grid is None:
        grid = FdGrid(1, rho.size)
    rho = _check_weight(rho, alpha)
    d = grid.centered()
    lv = _vector_operator(rho, alpha, d, d)
    ls_op = _scalar_operator(1.0 / rho, alpha, d, d)
    lhs = rho * _solve(lv, d @ f)
    rhs = d @ _solve(ls_op, f / rho)
    lhs_div = d @ _solve(lv, rho * f)
    rhs_div = _solve(ls_op, d @ f) / rho
    return CommutationResult(_rel(lhs, rhs), _rel(lhs_div, rhs_div))


class StrainParts(NamedTuple):
    S: np.ndarray
    Omega: np.ndarray
    S_D: np.ndarray
    S_I: np.ndarray


def strain_decompose(J):
    """Symmetric, antisymmetric, deviatoric and isotropic parts of ``J``."""
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError("J must be square")
    d = J.shape[0]
    S = 0.5 * (J + J.T)
    Omega = J - S
    S_I = np.trace(S) * np.eye(d) / d
    return StrainParts(S, Omega, S - S_I, S_I)


def strain_identity_residuals(J):
    """Absolute residuals of the three trace identities for ``J``.

    ``tr(J^2) = |S|_F^2 - |Omega|_F^2``, ``tr(J)^2 = tr(S)^2`` and
    ``tr(J^2) = tr(S_D^2) + tr(S)^2 / d + tr(Omega^2)``.
    """
    J = np.asarray(J, dtype=float)
    S, Om, SD, _ = strain_decompose(J)
    d = J.shape[0]
    trJ2 = np.trace(J @ J)
    r1 = trJ2 - (np.sum(S * S) - np.sum(Om * Om))
    r2 = np.trace(J) ** 2 - np.trace(S) ** 2
    r3 = trJ2 - (np.trace(SD @ SD) + np.trace(S) ** 2 / d + np.trace(Om @ Om))
    return np.abs([r1, r2, r3])


def _matrix_div(grid, fields):
    """Row divergence ``(div A)_i = sum_j D_j A_ij`` of a matrix field."""
    d = grid.dims
    fwd = [grid.forward(a) for a in range(d)]
    return [sum(fwd[j] @ fields[i][j] for j in range(d)) for i in range(d)]


def matrix_elliptic_reduce_check(rho, f, G, alpha, grid):
    """Discrepancy between the coupled matrix solve and its scalar reduction.

    (a) solves ``rho^-1 Sig - alpha div(rho^-1 div Sig) I = f I + G`` for all
    ``d^2`` components at once; (b) forms ``Sig = rho G + s I`` with
    ``rho^-1 s - alpha div(rho^-1 grad s) = f + alpha div(rho^-1 div(rho G))``.
    Inner divergences use forward differences, outer ones backward
    differences.  Returns the relative Frobenius-norm difference.
    """
    if grid.dims != 2:
        raise ValueError("matrix_elliptic_reduce_check needs a 2D grid")
    d, m = grid.dims, grid.size
    rho = _check_weight(rho, alpha)
    f = np.asarray(f, dtype=float).ravel()
    G = np.asarray(G, dtype=float).reshape(d, d, m)
    fwd = [grid.forward(a) for a in range(d)]
    bwd = [grid.backward(a) for a in range(d)]
    inv = np.diag(1.0 / rho)

    # s(Sig) = sum_i B_i rho^-1 sum_j F_j Sig_ij, a row block per component
    s_blocks = [[bwd[i] @ inv @ fwd[j] for j in range(d)] for i in range(d)]
    big = np.zeros((d * d * m, d * d * m))
    rhs = np.zeros(d * d * m)
    for i in range(d):
        for j in range(d):
            r = (i * d + j) * m
            big[r:r + m, r:r + m] += inv
            rhs[r:r + m] = G[i, j] + (f if i == j else 0.0)
            if i == j:
                for a in range(d):
                    for b in range(d):
                        c = (a * d + b) * m
                        big[r:r + m, c:c + m] -= alpha * s_blocks[a][b]
    coupled = _solve(big, rhs).reshape(d, d, m)

    rhoG = [[rho * G[i, j] for j in range(d)] for i in range(d)]
    div_rhoG = _matrix_div(grid, rhoG)
    source = f + alpha * sum(bwd[i] @ (div_rhoG[i] / rho) for i in range(d))
    scalar_op = inv - alpha * sum(bwd[i] @ inv @ fwd[i] for i in range(d))
    s = _solve(scalar_op, source)
    reduced = np.array(rhoG) + np.eye(d)[:, :, None] * s[None, None, :]
    return _rel(coupled, reduced)


def smooth_random_field(grid, rng, modes=3, amplitude=1.0):
    """Periodic random trigonometric field with ``modes`` wavenumbers per axis."""
    xs = grid.coords()
    out = np.zeros(xs[0].shape)
    for _ in range(modes * grid.dims):
        k = rng.integers(1, modes + 1, size=grid.dims)
        phase = sum(2.0 * np.pi * kk * x / grid.length for kk, x in zip(k, xs))
        out += rng.normal() * np.cos(phase + rng.uniform(0, 2.0 * np.pi))
    return amplitude * out / max(np.max(np.abs(out)), 1e-300)


def random_positive_field(grid, rng, lo=0.1, hi=10.0):
    """Smooth positive field with values inside ``[lo, hi]`` on a log scale."""
    z = smooth_random_field(grid, rng)
    mid, half = 0.5 * (np.log(lo) + np.log(hi)), 0.5 * (np.log(hi) - np.log(lo))
    return np.exp(mid + half * z)


class CheckRow(NamedTuple):
    name: str
    value: float
    tolerance: float
    passed: bool


def run_suite(seed=0, n_max_principle=500, n_strain=10_000, n_1d=64, n_2d=16):
    """Run every check with seeded random inputs; returns a list of :class:`CheckRow`."""
    rng = np.random.default_rng(seed)
    rows = []

    grid = FdGrid(1, n_1d)
    worst = np.inf
    for _ in range(n_max_principle):
        rho = np.exp(rng.uniform(np.log(0.1), np.log(10.0), n_1d))
        g = rng.normal(size=n_1d) ** 2
        alpha = 10.0 ** rng.uniform(-4, 0)
        res = max_principle_check(rho, g, alpha, grid)
        worst = min(worst, float(res.min_phi / g.max()))
    rows.append(CheckRow("max_principle min(phi)/max(g)", worst, -1e-10, worst >= -1e-10))

    rho = random_positive_field(grid, rng)
    f = smooth_random_field(grid, rng)
    res = commutation_check(rho, f, 10.0 ** rng.uniform(-3, -1), grid)
    rows.append(CheckRow("commutation grad", res.grad_residual, 1e-10, res.grad_residual < 1e-10))
    rows.append(CheckRow("commutation div", res.div_residual, 1e-10, res.div_residual < 1e-10))

    J = rng.normal(size=(n_strain, 3, 3))
    strain = max(float(strain_identity_residuals(j).max()) for j in J)
    rows.append(CheckRow("strain identities", strain, 1e-12, strain < 1e-12))

    g2 = FdGrid(2, n_2d)
    rho2 = random_positive_field(g2, rng, 0.5, 2.0)
    f2 = smooth_random_field(g2, rng)
    G2 = np.array([[smooth_random_field(g2, rng) for _ in range(2)] for _ in range(2)])
    resid = matrix_elliptic_reduce_check(rho2, f2, G2, 10.0 ** rng.uniform(-3, -1), g2)
    rows.append(CheckRow("matrix elliptic reduction", resid, 1e-8, resid < 1e-8))
    return rows
