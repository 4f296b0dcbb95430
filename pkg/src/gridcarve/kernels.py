"""Inner loops: Jacobi and Gauss-Seidel sweeps, the explicit heat update and
the pollinator fixed-point sweep.

Every kernel has a numba version (``_nb_*``) and a numpy/scipy version
(``_np_*``); the public wrappers pick one through ``_accel``. Linear systems
arrive in row form: ``diag[r]``, neighbour indices ``nbr[r, q]`` (``-1`` for
no unknown) with coefficients ``coef[r, q]`` and the right-hand side ``b``
with Dirichlet terms already folded in.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import _accel
from ._accel import njit

# status codes returned by the fixed-point kernels
FP_OK = 0
FP_NONPOSITIVE_MOBILITY = 1
FP_NEGATIVE_DISCRIMINANT = 2


@njit
def _nb_jacobi(diag, nbr, coef, b, x, tol, max_iter):
    n = x.size
    cur = x.copy()
    nxt = np.empty_like(cur)
    it = 0
    upd = np.inf
    while it < max_iter:
        upd = 0.0
        for r in range(n):
            s = b[r]
            for q in range(4):
                c = nbr[r, q]
                if c >= 0:
                    s -= coef[r, q] * cur[c]
            v = s / diag[r]
            d = abs(v - cur[r])
            if d > upd:
                upd = d
            nxt[r] = v
        cur, nxt = nxt, cur
        it += 1
        if upd <= tol:
            break
    return cur, it, upd


@njit
def _nb_gauss_seidel(diag, nbr, coef, b, x, tol, max_iter):
    n = x.size
    cur = x.copy()
    it = 0
    upd = np.inf
    while it < max_iter:
        upd = 0.0
        for r in range(n):
            s = b[r]
            for q in range(4):
                c = nbr[r, q]
                if c >= 0:
                    s -= coef[r, q] * cur[c]
            v = s / diag[r]
            d = abs(v - cur[r])
            if d > upd:
                upd = d
            cur[r] = v
        it += 1
        if upd <= tol:
            break
    return cur, it, upd


def _offdiag(nbr, coef, n, part="all"):
    rows = np.repeat(np.arange(n), 4)
    cols = nbr.ravel()
    vals = coef.ravel()
    keep = cols >= 0
    if part == "lower":
        keep &= cols < rows
    elif part == "upper":
        keep &= cols > rows
    return sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n))


def _np_jacobi(diag, nbr, coef, b, x, tol, max_iter):
    off = _offdiag(nbr, coef, x.size)
    cur = x.copy()
    it = 0
    upd = np.inf
    while it < max_iter:
        nxt = (b - off @ cur) / diag
        upd = float(np.max(np.abs(nxt - cur))) if cur.size else 0.0
        cur = nxt
        it += 1
        if upd <= tol:
            break
    return cur, it, upd


def _np_gauss_seidel(diag, nbr, coef, b, x, tol, max_iter):
    # one lexicographic sweep is the triangular solve (D + L) x_new = b - U x_old
    n = x.size
    lower = _offdiag(nbr, coef, n, "lower") + sp.diags(diag)
    upper = _offdiag(nbr, coef, n, "upper")
    lu = splu(lower.tocsc(), permc_spec="NATURAL", diag_pivot_thresh=0.0)
    cur = x.copy()
    it = 0
    upd = np.inf
    while it < max_iter:
        nxt = lu.solve(b - upper @ cur)
        upd = float(np.max(np.abs(nxt - cur))) if n else 0.0
        cur = nxt
        it += 1
        if upd <= tol:
            break
    return cur, it, upd


def jacobi(diag, nbr, coef, b, x0, tol, max_iter):
    """Iterate simultaneous updates until the max-norm update is <= tol.

    Returns ``(x, iterations, last_update_norm)``.
    """
    args = (np.ascontiguousarray(diag, dtype=np.float64), np.ascontiguousarray(nbr, dtype=np.int64),
            np.ascontiguousarray(coef, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64),
            np.ascontiguousarray(x0, dtype=np.float64), float(tol), int(max_iter))
    if _accel.use_numba():
        return _nb_jacobi(*args)
    return _np_jacobi(*args)


def gauss_seidel(diag, nbr, coef, b, x0, tol, max_iter):
    """In-place sweeps in row order; same contract as :func:`jacobi`."""
    args = (np.ascontiguousarray(diag, dtype=np.float64), np.ascontiguousarray(nbr, dtype=np.int64),
            np.ascontiguousarray(coef, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64),
            np.ascontiguousarray(x0, dtype=np.float64), float(tol), int(max_iter))
    if _accel.use_numba():
        return _nb_gauss_seidel(*args)
    return _np_gauss_seidel(*args)


@njit
def _nb_explicit(u, ks, js, rx, ry, out):
    for r in range(ks.size):
        k = ks[r]
        j = js[r]
        c = u[k, j]
        out[r] = (c + rx * (u[k, j + 1] - 2.0 * c + u[k, j - 1])
                  + ry * (u[k + 1, j] - 2.0 * c + u[k - 1, j]))
    return out


def _np_explicit(u, ks, js, rx, ry, out):
    c = u[ks, js]
    out[:] = (c + rx * (u[ks, js + 1] - 2.0 * c + u[ks, js - 1])
              + ry * (u[ks + 1, js] - 2.0 * c + u[ks - 1, js]))
    return out


def explicit_update(u, ks, js, rx, ry):
    """Forward-Euler values at interior nodes ``(ks, js)`` of grid array ``u``.

    ``rx = nu*dt/dx**2`` and ``ry = nu*dt/dy**2``.
    """
    out = np.empty(ks.size)
    if _accel.use_numba():
        return _nb_explicit(u, ks, js, float(rx), float(ry), out)
    return _np_explicit(u, ks, js, float(rx), float(ry), out)


@njit
def _nb_fixed_point(a, ks, js, d1, kk, dx, dy, prop_to_p, relax, tol, max_iter):
    cur = a.copy()
    nxt = a.copy()
    n = ks.size
    ix2 = 1.0 / (dx * dx)
    iy2 = 1.0 / (dy * dy)
    it = 0
    upd = np.inf
    while it < max_iter:
        upd = 0.0
        for r in range(n):
            k = ks[r]
            j = js[r]
            c = cur[k, j]
            mob = 2.0 * c - 1.0 if prop_to_p else 1.0
            if mob <= 0.0:
                return cur, it, upd, 1
            s = d1 * mob * ((cur[k, j + 1] + cur[k, j - 1]) * ix2 + (cur[k + 1, j] + cur[k - 1, j]) * iy2)
            bq = 2.0 * d1 * mob * (ix2 + iy2) - (kk + 1.0)
            disc = bq * bq - 4.0 * (0.5 - s)
            if disc < 0.0:
                return cur, it, upd, 2
            sq = np.sqrt(disc)
            if bq >= 0.0:
                g = 2.0 * (s - 0.5) / (bq + sq)
            else:
                g = 0.5 * (sq - bq)
            v = (1.0 - relax) * c + relax * g
            d = abs(v - c)
            if d > upd:
                upd = d
            nxt[k, j] = v
        for r in range(n):
            cur[ks[r], js[r]] = nxt[ks[r], js[r]]
        it += 1
        if upd <= tol:
            break
    return cur, it, upd, 0


def _np_fixed_point(a, ks, js, d1, kk, dx, dy, prop_to_p, relax, tol, max_iter):
    cur = a.copy()
    ix2 = 1.0 / (dx * dx)
    iy2 = 1.0 / (dy * dy)
    it = 0
    upd = np.inf
    while it < max_iter:
        c = cur[ks, js]
        mob = 2.0 * c - 1.0 if prop_to_p else np.ones_like(c)
        if np.any(mob <= 0.0):
            return cur, it, upd, FP_NONPOSITIVE_MOBILITY
        s = d1 * mob * ((cur[ks, js + 1] + cur[ks, js - 1]) * ix2 + (cur[ks + 1, js] + cur[ks - 1, js]) * iy2)
        bq = 2.0 * d1 * mob * (ix2 + iy2) - (kk + 1.0)
        disc = bq * bq - 4.0 * (0.5 - s)
        if np.any(disc < 0.0):
            return cur, it, upd, FP_NEGATIVE_DISCRIMINANT
        sq = np.sqrt(disc)
        # larger root without cancellation when bq > 0
        g = np.where(bq >= 0.0, 2.0 * (s - 0.5) / np.where(bq + sq > 0, bq + sq, 1.0), 0.5 * (sq - bq))
        v = (1.0 - relax) * c + relax * g
        upd = float(np.max(np.abs(v - c))) if c.size else 0.0
        cur[ks, js] = v
        it += 1
        if upd <= tol:
            break
    return cur, it, upd, FP_OK


def pollinator_fixed_point(a, ks, js, d1, k, dx, dy, prop_to_p, relax, tol, max_iter):
    """Damped center-solve sweeps for the reduced pollinator equation.

    Returns ``(a, iterations, last_update_norm, status)``.
    """
    args = (np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(ks, dtype=np.int64),
            np.ascontiguousarray(js, dtype=np.int64), float(d1), float(k), float(dx), float(dy),
            bool(prop_to_p), float(relax), float(tol), int(max_iter))
    if _accel.use_numba():
        return _nb_fixed_point(*args)
    return _np_fixed_point(*args)
