"""Kernel backend selection.

The compiled extension ``igrlab._kernels`` is used when it imports and the
environment variable ``IGRLAB_PURE_PYTHON`` is unset (or "0").  Otherwise the
numpy/scipy fallback in :mod:`igrlab._fallback` is used.  Both expose the same
behaviour; :func:`use_backend` switches at runtime (tests and benchmarks).
"""
from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

#: Above this many cells the elliptic systems go to Jacobi-preconditioned CG.
DIRECT_SOLVE_MAX_CELLS = 4096

_want_pure = os.environ.get("IGRLAB_PURE_PYTHON", "0") not in ("", "0")
_active = "python" if (_want_pure or _compiled is None) else "compiled"


class SolverError(RuntimeError):
    """Linear solve failed (singular pivot or CG non-convergence)."""

    def __init__(self, message, iterations=None, residual=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message)


def available_backends():
    return ("python", "compiled") if _compiled is not None else ("python",)


def active_backend():
    return _active


def use_backend(name):
    """Select "compiled" or "python"; returns the previously active name."""
    global _active
    if name not in ("python", "compiled"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and _compiled is None:
        raise RuntimeError("compiled extension igrlab._kernels is not built")
    previous, _active = _active, name
    return previous


def sipg_blocks(kq, km, kp, alpha, sigma, h):
    if _active == "compiled":
        return _compiled.sipg_blocks(
            np.ascontiguousarray(kq, dtype=float),
            np.ascontiguousarray(km, dtype=float),
            np.ascontiguousarray(kp, dtype=float),
            float(alpha), np.ascontiguousarray(sigma, dtype=float), float(h),
        )
    return _fallback.sipg_blocks(kq, km, kp, alpha, sigma, h)


class _CompiledLU:
    def __init__(self, lower, diag, upper):
        try:
            self._factors = _compiled.cbt_factor(
                np.ascontiguousarray(lower, dtype=float),
                np.ascontiguousarray(diag, dtype=float),
                np.ascontiguousarray(upper, dtype=float),
            )
        except ZeroDivisionError as exc:
            raise SolverError(str(exc)) from exc

    def solve(self, rhs):
        shape = rhs.shape
        r = np.ascontiguousarray(rhs.reshape(shape[0], 2, -1), dtype=float)
        return _compiled.cbt_solve(self._factors, r).reshape(shape)


class _JacobiCG:
    def __init__(self, lower, diag, upper, rtol):
        self.matrix = _fallback.cyclic_block_matrix(lower, diag, upper).tocsr()
        d = self.matrix.diagonal()
        self._precond = sp.diags(1.0 / d)
        self.rtol = rtol

    def solve(self, rhs):
        shape = rhs.shape
        flat = rhs.reshape(self.matrix.shape[0], -1)
        out = np.empty_like(flat)
        for c in range(flat.shape[1]):
            b = flat[:, c]
            iters = [0]

            def count(_):
                iters[0] += 1

            x, info = spla.cg(self.matrix, b, rtol=self.rtol, atol=0.0,
                              M=self._precond, maxiter=20 * len(b), callback=count)
            res = np.linalg.norm(self.matrix @ x - b) / max(np.linalg.norm(b), 1e-300)
            if info != 0:
                raise SolverError(
                    f"CG did not converge after {iters[0]} iterations (rel. residual {res:.3e})",
                    iterations=iters[0], residual=res,
                )
            out[:, c] = x
        return out.reshape(shape)


class CyclicBlockSystem:
    """Periodic block-tridiagonal operator with 2x2 blocks, factored once.

    Row ``i`` couples cell ``i`` to cells ``i-1`` (``lower[i]``), ``i``
    (``diag[i]``) and ``i+1`` (``upper[i]``), indices modulo ``n``.
    """

    def __init__(self, lower, diag, upper, rtol=1e-10):
        self.lower, self.diag, self.upper = lower, diag, upper
        n = diag.shape[0]
        if n > DIRECT_SOLVE_MAX_CELLS:
            self._impl = _JacobiCG(lower, diag, upper, rtol)
        elif _active == "compiled":
            self._impl = _CompiledLU(lower, diag, upper)
        else:
            try:
                self._impl = _fallback.SparseLU(lower, diag, upper)
            except RuntimeError as exc:  # SuperLU: "Factor is exactly singular"
                raise SolverError(str(exc)) from exc

    def matrix(self):
        return _fallback.cyclic_block_matrix(self.lower, self.diag, self.upper)

    def solve(self, rhs):
        """Solve for ``rhs`` of shape (n, 2) or (n, 2, k)."""
        return self._impl.solve(np.asarray(rhs, dtype=float))
