"""Numba kernels for the per-sample SGD inner loops.

The per-sample loss/gradient functions here are the exact callables the
epoch drivers use, so the finite-difference tests exercise the same code
that trains the models. All arrays are float64, C-contiguous; factor
matrices are updated in place.
"""

from __future__ import annotations

import numpy as np
from numba import njit


# ---------------------------------------------------------------- classic MF

@njit(cache=True)
def classic_sample_loss(u, v, rating):
    e = rating - np.dot(u, v)
    return e * e


@njit(cache=True)
def classic_sample_grads(u, v, rating):
    """Gradients of (rating - u.v)^2 w.r.t. u and v."""
    e = rating - np.dot(u, v)
    gu = (-2.0 * e) * v
    gv = (-2.0 * e) * u
    return gu, gv


@njit(cache=True)
def classic_sgd_epoch(U, V, users, items, ratings, order, lr, reg, clip_norm):
    """One pass of per-sample SGD on the raw-scale squared error.

    The joint per-sample gradient is norm-clipped at ``clip_norm`` to keep
    the unnormalized objective from blowing up. Returns the clip count.
    """
    clipped = 0
    for t in range(order.shape[0]):
        s = order[t]
        i = users[s]
        j = items[s]
        gu, gv = classic_sample_grads(U[i], V[j], ratings[s])
        if reg != 0.0:
            gu = gu + (2.0 * reg) * U[i]
            gv = gv + (2.0 * reg) * V[j]
        sq = 0.0
        for k in range(gu.shape[0]):
            sq += gu[k] * gu[k] + gv[k] * gv[k]
        gnorm = np.sqrt(sq)
        if gnorm > clip_norm:
            scale = clip_norm / gnorm
            gu = gu * scale
            gv = gv * scale
            clipped += 1
        for k in range(gu.shape[0]):
            U[i, k] -= lr * gu[k]
            V[j, k] -= lr * gv[k]
    return clipped


# ------------------------------------------------------------ cosine-loss MF

@njit(cache=True)
def cosine_sample_loss(u, v, r, eps):
    nu = max(np.sqrt(np.dot(u, u)), eps)
    nv = max(np.sqrt(np.dot(v, v)), eps)
    c = np.dot(u, v) / (nu * nv)
    e = r - c
    return e * e


@njit(cache=True)
def cosine_sample_grads(u, v, r, eps):
    """Gradients of (r - cos(u, v))^2 w.r.t. u and v; norms floored at eps."""
    nu = max(np.sqrt(np.dot(u, u)), eps)
    nv = max(np.sqrt(np.dot(v, v)), eps)
    c = np.dot(u, v) / (nu * nv)
    coef = -2.0 * (r - c)
    gu = coef * (v / (nu * nv) - (c / (nu * nu)) * u)
    gv = coef * (u / (nu * nv) - (c / (nv * nv)) * v)
    return gu, gv


@njit(cache=True)
def _rescue_row(M, i, eps, target):
    """Rescale row i up to norm ``target`` if it collapsed below eps.

    Rescaling preserves the row's direction (cosine predictions are scale
    invariant); an exactly-zero row has no direction left and becomes
    ``target`` times the first basis vector. Returns 1 if touched.
    """
    sq = 0.0
    for k in range(M.shape[1]):
        sq += M[i, k] * M[i, k]
    n = np.sqrt(sq)
    if n >= eps:
        return 0
    if n == 0.0:
        M[i, 0] = target
        for k in range(1, M.shape[1]):
            M[i, k] = 0.0
    else:
        s = target / n
        for k in range(M.shape[1]):
            M[i, k] *= s
    return 1


@njit(cache=True)
def cosine_sgd_epoch(U, V, users, items, rnorm, order, lr, reg, eps, rescue_norm):
    """One per-sample SGD pass on the normalized cosine loss. Returns rescue count."""
    rescued = 0
    for t in range(order.shape[0]):
        s = order[t]
        i = users[s]
        j = items[s]
        gu, gv = cosine_sample_grads(U[i], V[j], rnorm[s], eps)
        if reg != 0.0:
            gu = gu + (2.0 * reg) * U[i]
            gv = gv + (2.0 * reg) * V[j]
        for k in range(gu.shape[0]):
            U[i, k] -= lr * gu[k]
            V[j, k] -= lr * gv[k]
        rescued += _rescue_row(U, i, eps, rescue_norm)
        rescued += _rescue_row(V, j, eps, rescue_norm)
    return rescued


# ------------------------------------------- hyperplane-constrained variant

@njit(cache=True)
def _project_row(M, i, alpha):
    """In-place projection of row i onto the hyperplane alpha.x = 0."""
    d = 0.0
    for k in range(alpha.shape[0]):
        d += alpha[k] * M[i, k]
    for k in range(alpha.shape[0]):
        M[i, k] -= d * alpha[k]


@njit(cache=True)
def _row_norm(M, i):
    sq = 0.0
    for k in range(M.shape[1]):
        sq += M[i, k] * M[i, k]
    return np.sqrt(sq)


@njit(cache=True)
def linfac_sgd_epoch(U, V, alpha, fallback, users, items, rnorm, order, lr, reg, eps):
    """Cosine-loss SGD with every touched row re-projected onto alpha.x = 0.

    A row that projects to (numerically) nothing is replaced by ``fallback``
    (an in-plane vector at init scale). Returns the re-init count.
    """
    reinit = 0
    for t in range(order.shape[0]):
        s = order[t]
        i = users[s]
        j = items[s]
        gu, gv = cosine_sample_grads(U[i], V[j], rnorm[s], eps)
        if reg != 0.0:
            gu = gu + (2.0 * reg) * U[i]
            gv = gv + (2.0 * reg) * V[j]
        for k in range(gu.shape[0]):
            U[i, k] -= lr * gu[k]
            V[j, k] -= lr * gv[k]
        _project_row(U, i, alpha)
        _project_row(V, j, alpha)
        if _row_norm(U, i) < eps:
            for k in range(fallback.shape[0]):
                U[i, k] = fallback[k]
            reinit += 1
        if _row_norm(V, j) < eps:
            for k in range(fallback.shape[0]):
                V[j, k] = fallback[k]
            reinit += 1
    return reinit


# ---------------------------------------------------- paraboloid-surface MF

@njit(cache=True)
def paramat_sample_loss(u, v, w, p, r, eps):
    a = np.dot(u, v)
    b = np.dot(w, p)
    d = np.sqrt((a * a + b * b) * (1.0 + r * r))
    e = r - d
    return e * e


@njit(cache=True)
def paramat_sample_grads(u, v, w, p, r, eps):
    """Gradients of (r - sqrt((a^2+b^2)(1+r^2)))^2, a = u.v, b = w.p.

    The 1/d factor is floored at eps so the gradient stays finite (and
    zero in a, b) at the surface apex d = 0.
    """
    a = np.dot(u, v)
    b = np.dot(w, p)
    one_r2 = 1.0 + r * r
    d = np.sqrt((a * a + b * b) * one_r2)
    base = -2.0 * (r - d) * one_r2 / max(d, eps)
    ga = base * a
    gb = base * b
    gu = ga * v
    gv = ga * u
    gw = gb * p
    gp = gb * w
    return gu, gv, gw, gp


@njit(cache=True)
def paramat_sgd_epoch(U, V, W, P, users, items, rnorm, order, lr, reg, eps):
    """One per-sample SGD pass on the surface-distance loss."""
    for t in range(order.shape[0]):
        s = order[t]
        i = users[s]
        j = items[s]
        gu, gv, gw, gp = paramat_sample_grads(U[i], V[j], W[i], P[j], rnorm[s], eps)
        if reg != 0.0:
            gu = gu + (2.0 * reg) * U[i]
            gv = gv + (2.0 * reg) * V[j]
            gw = gw + (2.0 * reg) * W[i]
            gp = gp + (2.0 * reg) * P[j]
        for k in range(gu.shape[0]):
            U[i, k] -= lr * gu[k]
            V[j, k] -= lr * gv[k]
            W[i, k] -= lr * gw[k]
            P[j, k] -= lr * gp[k]
    return 0
