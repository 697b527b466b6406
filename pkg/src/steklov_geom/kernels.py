"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with numba and a
numpy version. The public name is bound to one of them according to
``STEKLOV_DISABLE_NUMBA`` (see ``_accel``). Both versions are importable
under ``*_numba`` / ``*_numpy`` for tests and benchmarks.

Sequential recurrences (QL sweeps, tridiagonal solves, BFS) cannot be
vectorized; their numpy fallback is the same source run by the
interpreter.
"""
import math

import numpy as np

from ._accel import njit, pick

__all__ = [
    "element_stiffness",
    "levelset_measures",
    "householder_tridiagonal",
    "apply_householder",
    "tql_eigenvalues",
    "tridiagonal_inverse_iteration",
    "cuthill_mckee_from_roots",
]


# ---------------------------------------------------------------------------
# P1 element stiffness under a constant (per triangle) metric tensor
# ---------------------------------------------------------------------------

def _element_stiffness_py(coords, tensor):
    # coords: (nt, 3, 2) chart coordinates; tensor: (nt, 2, 2) = sqrt(det G) G^-1
    nt = coords.shape[0]
    out = np.empty((nt, 3, 3))
    for e in range(nt):
        x0 = coords[e, 0, 0]
        y0 = coords[e, 0, 1]
        a11 = coords[e, 1, 0] - x0
        a21 = coords[e, 1, 1] - y0
        a12 = coords[e, 2, 0] - x0
        a22 = coords[e, 2, 1] - y0
        det = a11 * a22 - a12 * a21
        area = 0.5 * abs(det)
        # rows of J^-1 are the chart gradients of lambda_1, lambda_2
        g1x = a22 / det
        g1y = -a12 / det
        g2x = -a21 / det
        g2y = a11 / det
        g0x = -g1x - g2x
        g0y = -g1y - g2y
        m11 = tensor[e, 0, 0]
        m12 = tensor[e, 0, 1]
        m21 = tensor[e, 1, 0]
        m22 = tensor[e, 1, 1]
        gx = (g0x, g1x, g2x)
        gy = (g0y, g1y, g2y)
        for a in range(3):
            mx = m11 * gx[a] + m12 * gy[a]
            my = m21 * gx[a] + m22 * gy[a]
            for b in range(a, 3):
                v = area * (mx * gx[b] + my * gy[b])
                out[e, a, b] = v
                out[e, b, a] = v
    return out


element_stiffness_numba = njit(_element_stiffness_py)


def element_stiffness_numpy(coords, tensor):
    edges = coords[:, 1:, :] - coords[:, :1, :]          # (nt, 2, 2): rows are edge vectors
    jac = np.swapaxes(edges, 1, 2)                       # columns are edge vectors
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1] / det
    inv[:, 0, 1] = -jac[:, 0, 1] / det
    inv[:, 1, 0] = -jac[:, 1, 0] / det
    inv[:, 1, 1] = jac[:, 0, 0] / det
    grads = np.empty((coords.shape[0], 3, 2))
    grads[:, 1:, :] = inv
    grads[:, 0, :] = -inv[:, 0, :] - inv[:, 1, :]
    area = 0.5 * np.abs(det)
    return area[:, None, None] * np.einsum("eai,eij,ebj->eab", grads, tensor, grads)


element_stiffness = pick(element_stiffness_numba, element_stiffness_numpy)


# ---------------------------------------------------------------------------
# Superlevel-set area and level-curve length of a P1 function
# ---------------------------------------------------------------------------

def _levelset_measures_py(coords, metric, sqrt_det, values, thresholds):
    nt = coords.shape[0]
    m = thresholds.shape[0]
    area = np.zeros(m)
    perim = np.zeros(m)
    for k in range(m):
        t = thresholds[k]
        acc_a = 0.0
        acc_p = 0.0
        for e in range(nt):
            v0 = values[e, 0]
            v1 = values[e, 1]
            v2 = values[e, 2]
            n_above = (v0 > t) + (v1 > t) + (v2 > t)
            if n_above == 0:
                continue
            x0 = coords[e, 0, 0]
            y0 = coords[e, 0, 1]
            x1 = coords[e, 1, 0]
            y1 = coords[e, 1, 1]
            x2 = coords[e, 2, 0]
            y2 = coords[e, 2, 1]
            full = 0.5 * abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) * sqrt_det[e]
            if n_above == 3:
                acc_a += full
                continue
            # rotate so that vertex 0 is the odd one out
            if n_above == 1:
                odd_above = True
                if v0 > t:
                    i0, i1, i2 = 0, 1, 2
                elif v1 > t:
                    i0, i1, i2 = 1, 2, 0
                else:
                    i0, i1, i2 = 2, 0, 1
            else:
                odd_above = False
                if v0 <= t:
                    i0, i1, i2 = 0, 1, 2
                elif v1 <= t:
                    i0, i1, i2 = 1, 2, 0
                else:
                    i0, i1, i2 = 2, 0, 1
            w0 = values[e, i0]
            w1 = values[e, i1]
            w2 = values[e, i2]
            a1 = (w0 - t) / (w0 - w1)
            a2 = (w0 - t) / (w0 - w2)
            frac = a1 * a2
            if odd_above:
                acc_a += frac * full
            else:
                acc_a += (1.0 - frac) * full
            px = coords[e, i0, 0]
            py = coords[e, i0, 1]
            dx = a2 * (coords[e, i2, 0] - px) - a1 * (coords[e, i1, 0] - px)
            dy = a2 * (coords[e, i2, 1] - py) - a1 * (coords[e, i1, 1] - py)
            q = metric[e, 0, 0] * dx * dx + 2.0 * metric[e, 0, 1] * dx * dy + metric[e, 1, 1] * dy * dy
            acc_p += math.sqrt(q)
        area[k] = acc_a
        perim[k] = acc_p
    return area, perim


levelset_measures_numba = njit(_levelset_measures_py)


def levelset_measures_numpy(coords, metric, sqrt_det, values, thresholds):
    edges = coords[:, 1:, :] - coords[:, :1, :]
    full = 0.5 * np.abs(edges[:, 0, 0] * edges[:, 1, 1] - edges[:, 1, 0] * edges[:, 0, 1]) * sqrt_det
    area = np.zeros(len(thresholds))
    perim = np.zeros(len(thresholds))
    rows = np.arange(coords.shape[0])
    for k, t in enumerate(thresholds):
        above = values > t
        n_above = above.sum(axis=1)
        area[k] = full[n_above == 3].sum()
        cut = (n_above == 1) | (n_above == 2)
        if not cut.any():
            continue
        sel = rows[cut]
        ab = above[sel]
        odd_above = n_above[sel] == 1
        # index of the odd vertex: the single above or the single below
        odd_mask = np.where(odd_above[:, None], ab, ~ab)
        i0 = np.argmax(odd_mask, axis=1)
        i1 = (i0 + 1) % 3
        i2 = (i0 + 2) % 3
        w0 = values[sel, i0]
        w1 = values[sel, i1]
        w2 = values[sel, i2]
        a1 = (w0 - t) / (w0 - w1)
        a2 = (w0 - t) / (w0 - w2)
        frac = a1 * a2
        area[k] += np.sum(np.where(odd_above, frac, 1.0 - frac) * full[sel])
        p = coords[sel, i0]
        d = a2[:, None] * (coords[sel, i2] - p) - a1[:, None] * (coords[sel, i1] - p)
        g = metric[sel]
        q = g[:, 0, 0] * d[:, 0] ** 2 + 2.0 * g[:, 0, 1] * d[:, 0] * d[:, 1] + g[:, 1, 1] * d[:, 1] ** 2
        perim[k] = np.sqrt(q).sum()
    return area, perim


levelset_measures = pick(levelset_measures_numba, levelset_measures_numpy)


# ---------------------------------------------------------------------------
# Householder reduction of a dense symmetric matrix to tridiagonal form
# ---------------------------------------------------------------------------

def _householder_tridiagonal_py(a):
    n = a.shape[0]
    a = a.copy()
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    vecs = np.zeros((n, n))
    betas = np.zeros(n)
    p = np.zeros(n)
    for k in range(n - 2):
        xnorm2 = 0.0
        for i in range(k + 1, n):
            xnorm2 += a[i, k] * a[i, k]
        x0 = a[k + 1, k]
        xnorm = math.sqrt(xnorm2)
        d[k] = a[k, k]
        if xnorm == 0.0 or xnorm2 - x0 * x0 == 0.0:
            e[k] = x0
            continue
        alpha = -xnorm if x0 >= 0.0 else xnorm
        v0 = x0 - alpha
        vnorm2 = xnorm2 - x0 * x0 + v0 * v0
        beta = 2.0 / vnorm2
        vecs[k, k + 1] = v0
        for i in range(k + 2, n):
            vecs[k, i] = a[i, k]
        betas[k] = beta
        e[k] = alpha
        # p = beta * A v on the trailing block (lower triangle is authoritative)
        for i in range(k + 1, n):
            p[i] = 0.0
        for j in range(k + 1, n):
            vj = vecs[k, j]
            p[j] += a[j, j] * vj
            for i in range(j + 1, n):
                aij = a[i, j]
                p[i] += aij * vj
                p[j] += aij * vecs[k, i]
        pv = 0.0
        for i in range(k + 1, n):
            p[i] *= beta
            pv += p[i] * vecs[k, i]
        half = 0.5 * beta * pv
        for i in range(k + 1, n):
            p[i] -= half * vecs[k, i]
        for j in range(k + 1, n):
            vj = vecs[k, j]
            wj = p[j]
            for i in range(j, n):
                a[i, j] -= vecs[k, i] * wj + p[i] * vj
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 1, n - 2]
    if n >= 1:
        d[n - 1] = a[n - 1, n - 1]
    return d, e, vecs, betas


householder_tridiagonal_numba = njit(_householder_tridiagonal_py)


def householder_tridiagonal_numpy(a):
    n = a.shape[0]
    a = np.array(a, dtype=float, copy=True)
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    vecs = np.zeros((n, n))
    betas = np.zeros(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        d[k] = a[k, k]
        xnorm = np.linalg.norm(x)
        tail2 = xnorm * xnorm - x[0] * x[0]
        if xnorm == 0.0 or tail2 == 0.0:
            e[k] = x[0]
            continue
        alpha = -xnorm if x[0] >= 0.0 else xnorm
        v = x.copy()
        v[0] -= alpha
        beta = 2.0 / (tail2 + v[0] * v[0])
        vecs[k, k + 1:] = v
        betas[k] = beta
        e[k] = alpha
        sub = a[k + 1:, k + 1:]
        p = beta * (sub @ v)
        w = p - (0.5 * beta * (p @ v)) * v
        sub -= np.outer(v, w)
        sub -= np.outer(w, v)
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 1, n - 2]
    if n >= 1:
        d[n - 1] = a[n - 1, n - 1]
    return d, e, vecs, betas


householder_tridiagonal = pick(householder_tridiagonal_numba, householder_tridiagonal_numpy)


def apply_householder(vecs, betas, y):
    """Map tridiagonal-basis vectors ``y`` (n, k) back to the original basis."""
    out = np.array(y, dtype=float, copy=True)
    n = vecs.shape[0]
    for k in range(n - 3, -1, -1):
        if betas[k] == 0.0:
            continue
        v = vecs[k, k + 1:]
        out[k + 1:] -= betas[k] * np.outer(v, v @ out[k + 1:])
    return out


# ---------------------------------------------------------------------------
# Implicit QL on a symmetric tridiagonal matrix (eigenvalues only)
# ---------------------------------------------------------------------------

def _tql_eigenvalues_py(d, e, tol):
    n = d.shape[0]
    d = d.copy()
    f = np.zeros(n)
    for i in range(n - 1):
        f[i] = e[i]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(f[m]) <= tol * dd or f[m] == 0.0:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 200:
                raise RuntimeError("tridiagonal QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * f[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + f[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                ff = s * f[i]
                b = c * f[i]
                r = math.hypot(ff, g)
                f[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    f[m] = 0.0
                    early = True
                    break
                s = ff / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if early:
                continue
            d[l] -= p
            f[l] = g
            f[m] = 0.0
    return np.sort(d)


tql_eigenvalues_numba = njit(_tql_eigenvalues_py)
tql_eigenvalues_numpy = _tql_eigenvalues_py
tql_eigenvalues = pick(tql_eigenvalues_numba, tql_eigenvalues_numpy)


# ---------------------------------------------------------------------------
# Inverse iteration for selected eigenvectors of a symmetric tridiagonal
# ---------------------------------------------------------------------------

def _shifted_tridiagonal_solve(d, e, lam, rhs, tiny):
    # Gaussian elimination with partial pivoting on T - lam I (LAPACK gttrf/gttrs layout)
    n = d.shape[0]
    dd = d - lam
    dl = e.copy()
    du = e.copy()
    du2 = np.zeros(max(n - 2, 0))
    swap = np.zeros(max(n - 1, 0), dtype=np.bool_)
    for i in range(n - 1):
        if abs(dd[i]) >= abs(dl[i]):
            if dd[i] == 0.0:
                dd[i] = tiny
            fact = dl[i] / dd[i]
            dl[i] = fact
            dd[i + 1] -= fact * du[i]
        else:
            fact = dd[i] / dl[i]
            dd[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = dd[i + 1]
            dd[i + 1] = temp - fact * dd[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            swap[i] = True
    if dd[n - 1] == 0.0:
        dd[n - 1] = tiny
    b = rhs.copy()
    for i in range(n - 1):
        if swap[i]:
            temp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = temp - dl[i] * b[i]
        else:
            b[i + 1] -= dl[i] * b[i]
    b[n - 1] /= dd[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i]
    return b


def _make_inverse_iteration(solve):
    def inverse_iteration(d, e, lams, starts, max_iter, tol):
        n = d.shape[0]
        k = lams.shape[0]
        vecs = np.zeros((k, n))
        refined = lams.copy()
        tnorm = 0.0
        for i in range(n):
            row = abs(d[i])
            if i > 0:
                row += abs(e[i - 1])
            if i < n - 1:
                row += abs(e[i])
            tnorm = max(tnorm, row)
        tiny = max(tnorm, 1.0) * 2.2e-16
        ty = np.zeros(n)
        for j in range(k):
            y = starts[:, j].copy()
            lam = lams[j]
            rq = lam
            for it in range(max_iter):
                y = solve(d, e, lam, y, tiny)
                # orthogonalize against every earlier vector (twice, for clusters)
                for _ in range(2):
                    for q in range(j):
                        y -= np.dot(vecs[q], y) * vecs[q]
                y /= math.sqrt(np.dot(y, y))
                for i in range(n):
                    acc = d[i] * y[i]
                    if i > 0:
                        acc += e[i - 1] * y[i - 1]
                    if i < n - 1:
                        acc += e[i] * y[i + 1]
                    ty[i] = acc
                rq = np.dot(ty, y)
                r = ty - rq * y
                if math.sqrt(np.dot(r, r)) <= tol * max(tnorm, 1.0) and it >= 1:
                    break
            vecs[j] = y
            refined[j] = rq
        return vecs.T.copy(), refined

    return inverse_iteration


tridiagonal_inverse_iteration_numba = njit(_make_inverse_iteration(njit(_shifted_tridiagonal_solve)))
tridiagonal_inverse_iteration_numpy = _make_inverse_iteration(_shifted_tridiagonal_solve)
tridiagonal_inverse_iteration = pick(
    tridiagonal_inverse_iteration_numba, tridiagonal_inverse_iteration_numpy
)


# ---------------------------------------------------------------------------
# Cuthill-McKee ordering grown from a prescribed root set
# ---------------------------------------------------------------------------

def _cuthill_mckee_from_roots_py(indptr, indices, roots):
    n = indptr.shape[0] - 1
    degree = np.empty(n, dtype=np.int64)
    for i in range(n):
        degree[i] = indptr[i + 1] - indptr[i]
    visited = np.zeros(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    root_order = roots[np.argsort(degree[roots], kind="mergesort")]
    count = 0
    for r in root_order:
        if not visited[r]:
            visited[r] = True
            order[count] = r
            count += 1
    head = 0
    while head < count:
        v = order[head]
        head += 1
        start = indptr[v]
        stop = indptr[v + 1]
        nbrs = indices[start:stop]
        fresh = np.empty(stop - start, dtype=np.int64)
        nf = 0
        for w in nbrs:
            if not visited[w]:
                visited[w] = True
                fresh[nf] = w
                nf += 1
        if nf > 0:
            fresh = fresh[:nf]
            fresh = fresh[np.argsort(degree[fresh], kind="mergesort")]
            for w in fresh:
                order[count] = w
                count += 1
    return order[:count]


cuthill_mckee_from_roots_numba = njit(_cuthill_mckee_from_roots_py)
cuthill_mckee_from_roots_numpy = _cuthill_mckee_from_roots_py
cuthill_mckee_from_roots = pick(cuthill_mckee_from_roots_numba, cuthill_mckee_from_roots_numpy)
