"""Pure numpy/scipy versions of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .quadrature import GAUSS_POINTS, GAUSS_WEIGHTS


def cyclic_block_matrix(lower, diag, upper):
    """Assemble the (2n, 2n) CSC matrix of a periodic 2x2 block-tridiagonal operator."""
    n = diag.shape[0]
    rows, cols, vals = [], [], []
    base_r, base_c = np.meshgrid(np.arange(2), np.arange(2), indexing="ij")
    cells = np.arange(n)
    for blocks, shift in ((lower, -1), (diag, 0), (upper, 1)):
        nbr = (cells + shift) % n
        rows.append((2 * cells[:, None, None] + base_r[None]).ravel())
        cols.append((2 * nbr[:, None, None] + base_c[None]).ravel())
        vals.append(np.asarray(blocks).ravel())
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * n, 2 * n),
    )


class SparseLU:
    """Direct sparse factorization (SuperLU) of a cyclic block system."""

    def __init__(self, lower, diag, upper):
        self.matrix = cyclic_block_matrix(lower, diag, upper)
        self._lu = spla.splu(self.matrix)

    def solve(self, rhs):
        n = rhs.shape[0]
        flat = rhs.reshape(2 * n, -1)
        return self._lu.solve(flat).reshape(rhs.shape)


def sipg_blocks(kq, km, kp, alpha, sigma, h):
    """Block coefficients of the weighted SIPG bilinear form.

    ``kq`` holds the weight at the cell quadrature points, ``km``/``kp`` the
    weight traces on the left/right side of each face (face j is the right
    face of cell j) and ``sigma`` the penalty on each face.
    """
    psi = np.stack([np.ones_like(GAUSS_POINTS), GAUSS_POINTS])
    wk = kq * GAUSS_WEIGHTS[None, :]
    diag = 0.5 * h * np.einsum("nq,aq,bq->nab", wk, psi, psi)
    diag[:, 1, 1] += alpha * (2.0 / h) * wk.sum(axis=1)

    jl = np.array([1.0, 1.0])
    jr = np.array([-1.0, 1.0])
    e1 = np.array([0.0, 1.0])
    al = (km / h)[:, None] * e1[None, :]
    ar = (kp / h)[:, None] * e1[None, :]
    pen = sigma[:, None, None] * np.outer(jl, jl)[None]
    ll = alpha * (-(jl[None, :, None] * al[:, None, :] + al[:, :, None] * jl[None, None, :]) + pen)
    pen = sigma[:, None, None] * np.outer(jr, jr)[None]
    rr = alpha * (-(jr[None, :, None] * ar[:, None, :] + ar[:, :, None] * jr[None, None, :]) + pen)
    pen = sigma[:, None, None] * np.outer(jl, jr)[None]
    lr = alpha * (-(jl[None, :, None] * ar[:, None, :] + al[:, :, None] * jr[None, None, :]) + pen)

    diag += ll
    diag += np.roll(rr, 1, axis=0)
    upper = lr
    lower = np.roll(np.transpose(lr, (0, 2, 1)), 1, axis=0)
    return np.ascontiguousarray(lower), np.ascontiguousarray(diag), np.ascontiguousarray(upper)
