# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled solver loops.

Mirrors :mod:`tenseig._core._fallback` call for call. Each run allocates one
scratch block and never touches Python objects inside the loop, so batches
release the GIL.
"""
import numpy as np

from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc

DEF CONVERGED = 0
DEF ITERATION_CAP = 1
DEF STEP_FAILURE = 2

cdef double PIVOT_FLOOR = 1e-14
cdef double ZERO_NORM = 1e-14


cdef struct Work:
    int n
    int m
    const double* t
    double* buf1
    double* buf2
    double* M
    double* v
    double* g
    double* A
    double* rhs
    double* U
    double* Hp
    double* tmp
    double* z
    double* xn
    double mu


cdef Work* work_new(const double* t, int n, int m) nogil:
    cdef Work* w = <Work*> malloc(sizeof(Work))
    cdef long big = 1
    cdef int k
    for k in range(m - 1):
        big *= n
    if big < n * n:
        big = n * n
    cdef long total = 2 * big + n * n + 2 * n + (n + 1) * (n + 1) + (n + 1) + n * n + n * n + n * n + (n + 1) + n
    cdef double* block = <double*> malloc(total * sizeof(double))
    w.n = n
    w.m = m
    w.t = t
    w.buf1 = block
    w.buf2 = w.buf1 + big
    w.M = w.buf2 + big
    w.v = w.M + n * n
    w.g = w.v + n
    w.A = w.g + n
    w.rhs = w.A + (n + 1) * (n + 1)
    w.U = w.rhs + (n + 1)
    w.Hp = w.U + n * n
    w.tmp = w.Hp + n * n
    w.z = w.tmp + n * n
    w.xn = w.z + (n + 1)
    return w


cdef void work_free(Work* w) nogil:
    free(w.buf1)
    free(w)


cdef void contract(Work* w, const double* x) nogil:
    """Fill M = T(I,I,x,...,x) (exactly symmetric), v = M x and mu = x.v."""
    cdef int n = w.n
    cdef int m = w.m
    cdef const double* src = w.t
    cdef double* dst
    cdef long rows = 1
    cdef long r
    cdef int i, j, step
    cdef double s
    for step in range(m - 1):
        rows *= n
    for step in range(m - 2):
        dst = w.buf1 if step % 2 == 0 else w.buf2
        for r in range(rows):
            s = 0.0
            for j in range(n):
                s += src[r * n + j] * x[j]
            dst[r] = s
        src = dst
        rows = rows // n
    # rows == n here when m >= 3; src holds n*n entries
    for i in range(n):
        for j in range(i, n):
            w.M[i * n + j] = src[i * n + j]
            w.M[j * n + i] = src[i * n + j]
    w.mu = 0.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += w.M[i * n + j] * x[j]
        w.v[i] = s
        w.mu += x[i] * s


cdef int lu_solve(double* A, double* b, int k) nogil:
    """Solve A y = b in place (y -> b). Returns 1 when a pivot is below the floor."""
    cdef int i, j, c, p
    cdef double amax = 0.0
    cdef double floor, piv, l, tmp
    for i in range(k * k):
        if fabs(A[i]) > amax:
            amax = fabs(A[i])
    floor = PIVOT_FLOOR * amax
    for c in range(k):
        p = c
        for i in range(c + 1, k):
            if fabs(A[i * k + c]) > fabs(A[p * k + c]):
                p = i
        piv = A[p * k + c]
        if fabs(piv) <= floor or piv == 0.0:
            return 1
        if p != c:
            for j in range(k):
                tmp = A[c * k + j]
                A[c * k + j] = A[p * k + j]
                A[p * k + j] = tmp
            tmp = b[c]
            b[c] = b[p]
            b[p] = tmp
        for i in range(c + 1, k):
            l = A[i * k + c] / A[c * k + c]
            if l != 0.0:
                for j in range(c, k):
                    A[i * k + j] -= l * A[c * k + j]
                b[i] -= l * b[c]
    for i in range(k - 1, -1, -1):
        tmp = b[i]
        for j in range(i + 1, k):
            tmp -= A[i * k + j] * b[j]
        b[i] = tmp / A[i * k + i]
    return 0


cdef void householder_complement(const double* x, int n, double* U) nogil:
    """U (row-major n x (n-1)) = columns 2..n of I - 2 v v^T / v^T v, v = x + sign(x_1) e_1."""
    cdef int i, c
    cdef double vv = 0.0
    cdef double v0 = x[0] + (1.0 if x[0] >= 0.0 else -1.0)
    vv = v0 * v0
    for i in range(1, n):
        vv += x[i] * x[i]
    cdef double f = 2.0 / vv
    cdef double vi
    for i in range(n):
        vi = v0 if i == 0 else x[i]
        for c in range(n - 1):
            U[i * (n - 1) + c] = (1.0 if i == c + 1 else 0.0) - f * vi * x[c + 1]


cdef void jacobi_extremes(double* a, int n, double* lo, double* hi) nogil:
    """Smallest and largest eigenvalue of the symmetric matrix a (destroyed)."""
    cdef int sweep, p, q, k
    cdef double off, theta, t, c, s, akp, akq, scale
    for sweep in range(100):
        off = 0.0
        scale = 0.0
        for p in range(n):
            scale += a[p * n + p] * a[p * n + p]
            for q in range(p + 1, n):
                off += a[p * n + q] * a[p * n + q]
        if off <= 1e-32 * scale or off == 0.0:
            break
        for p in range(n):
            for q in range(p + 1, n):
                if a[p * n + q] == 0.0:
                    continue
                theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q])
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k * n + p]
                    akq = a[k * n + q]
                    a[k * n + p] = c * akp - s * akq
                    a[k * n + q] = s * akp + c * akq
                for k in range(n):
                    akp = a[p * n + k]
                    akq = a[q * n + k]
                    a[p * n + k] = c * akp - s * akq
                    a[q * n + k] = s * akp + c * akq
    lo[0] = a[0]
    hi[0] = a[0]
    for p in range(1, n):
        if a[p * n + p] < lo[0]:
            lo[0] = a[p * n + p]
        if a[p * n + p] > hi[0]:
            hi[0] = a[p * n + p]


cdef int normalize_into(Work* w, const double* x, const double* step, double* out) nogil:
    cdef int i
    cdef double nrm = 0.0
    for i in range(w.n):
        out[i] = x[i] + step[i]
        nrm += out[i] * out[i]
    nrm = sqrt(nrm)
    if not nrm > ZERO_NORM:
        return 1
    for i in range(w.n):
        out[i] /= nrm
    return 0


cdef int ncm_step(Work* w, const double* x, double* out) nogil:
    cdef int n = w.n
    cdef int m = w.m
    cdef int i, j
    contract(w, x)
    for i in range(n):
        w.g[i] = w.v[i] - w.mu * x[i]
        w.rhs[i] = -w.g[i]
        for j in range(n):
            w.A[i * n + j] = (m - 1) * w.M[i * n + j] - m * x[i] * w.v[j]
        w.A[i * n + i] -= w.mu
    if lu_solve(w.A, w.rhs, n):
        return 1
    return normalize_into(w, x, w.rhs, out)


cdef int oncm_step(Work* w, const double* x, double* out) nogil:
    cdef int n = w.n
    cdef int m = w.m
    cdef int k = n - 1
    cdef int i, j, c
    cdef double s
    contract(w, x)
    householder_complement(x, n, w.U)
    for i in range(n):
        w.g[i] = w.v[i] - w.mu * x[i]
        for j in range(n):
            w.A[i * n + j] = (m - 1) * w.M[i * n + j]
        w.A[i * n + i] -= w.mu
    # tmp = H U  (n x k)
    for i in range(n):
        for c in range(k):
            s = 0.0
            for j in range(n):
                s += w.A[i * n + j] * w.U[j * k + c]
            w.tmp[i * k + c] = s
    # Hp = U^T tmp, mirrored from the upper triangle
    for i in range(k):
        for c in range(i, k):
            s = 0.0
            for j in range(n):
                s += w.U[j * k + i] * w.tmp[j * k + c]
            w.Hp[i * k + c] = s
            w.Hp[c * k + i] = s
    for c in range(k):
        s = 0.0
        for j in range(n):
            s += w.U[j * k + c] * w.g[j]
        w.z[c] = -s
    if lu_solve(w.Hp, w.z, k):
        return 1
    for i in range(n):
        s = 0.0
        for c in range(k):
            s += w.U[i * k + c] * w.z[c]
        w.rhs[i] = s
    return normalize_into(w, x, w.rhs, out)


cdef double adaptive_alpha(Work* w, double tau, int direction) nogil:
    cdef int n = w.n
    cdef int m = w.m
    cdef int i
    cdef double lo, hi, a
    for i in range(n * n):
        w.tmp[i] = m * (m - 1) * w.M[i]
    jacobi_extremes(w.tmp, n, &lo, &hi)
    if direction >= 0:
        a = (tau - lo) / m
        return a if a > 0.0 else 0.0
    a = -(tau + hi) / m
    return a if a < 0.0 else 0.0


cdef int power_step(Work* w, const double* x, double* out, int variant, double alpha, double tau, int direction) nogil:
    cdef int i
    contract(w, x)
    if variant == 2:
        alpha = adaptive_alpha(w, tau, direction)
    elif variant == 0:
        alpha = 0.0
    cdef double nrm = 0.0
    for i in range(w.n):
        out[i] = w.v[i] + alpha * x[i]
        nrm += out[i] * out[i]
    nrm = sqrt(nrm)
    if not nrm > ZERO_NORM:
        return 1
    for i in range(w.n):
        out[i] /= nrm
    return 0


cdef int run_one(Work* w, double* x, int kind, int variant, double alpha, double tau, int direction,
                 double delta, int kmax, int* iters, double* trace) nogil:
    """Iterate from x (overwritten with the final iterate). kind 0/1 = NCM/O-NCM, 2 = power."""
    cdef int n = w.n
    cdef int k, i, fail
    cdef double d
    if trace != NULL:
        for i in range(n):
            trace[i] = x[i]
    for k in range(1, kmax + 1):
        if kind == 0:
            fail = ncm_step(w, x, w.xn)
        elif kind == 1:
            fail = oncm_step(w, x, w.xn)
        else:
            fail = power_step(w, x, w.xn, variant, alpha, tau, direction)
        if fail:
            iters[0] = k - 1
            return STEP_FAILURE
        d = 0.0
        for i in range(n):
            d += (w.xn[i] - x[i]) * (w.xn[i] - x[i])
            x[i] = w.xn[i]
        if trace != NULL:
            for i in range(n):
                trace[k * n + i] = x[i]
        if sqrt(d) < delta:
            iters[0] = k
            return CONVERGED
    iters[0] = kmax
    return ITERATION_CAP


def _prep(t_flat, int n, int m):
    t = np.ascontiguousarray(t_flat, dtype=np.float64).reshape(-1)
    if t.shape[0] != n ** m:
        raise ValueError("tensor size does not match n**m")
    if m < 2 or n < 2:
        raise ValueError("need order >= 2 and dim >= 2")
    return t


def _single(t_flat, int n, int m, x0, int kind, int variant, double alpha, double tau, int direction,
            double delta, int kmax, bint record):
    t = _prep(t_flat, n, m)
    cdef const double[::1] tv = t
    x = np.array(x0, dtype=np.float64).reshape(-1).copy()
    cdef double[::1] xv = x
    trace = np.empty((kmax + 1, n)) if record else None
    cdef double[:, ::1] trv
    cdef double* tp = NULL
    if record:
        trv = trace
        tp = &trv[0, 0]
    cdef int iters = 0
    cdef int status
    cdef Work* w = work_new(&tv[0], n, m)
    try:
        with nogil:
            status = run_one(w, &xv[0], kind, variant, alpha, tau, direction, delta, kmax, &iters, tp)
    finally:
        work_free(w)
    return x, iters, status, (trace[: iters + 1].copy() if record else None)


def _batch(t_flat, int n, int m, X0, int kind, int variant, double alpha, double tau, int direction,
           double delta, int kmax):
    t = _prep(t_flat, n, m)
    cdef const double[::1] tv = t
    X = np.array(X0, dtype=np.float64, order="C").reshape(-1, n).copy()
    cdef double[:, ::1] Xv = X
    cdef Py_ssize_t S = X.shape[0]
    iters = np.zeros(S, dtype=np.int32)
    status = np.zeros(S, dtype=np.int32)
    cdef int[::1] itv = iters
    cdef int[::1] stv = status
    cdef Py_ssize_t s
    cdef Work* w = work_new(&tv[0], n, m)
    try:
        with nogil:
            for s in range(S):
                stv[s] = run_one(w, &Xv[s, 0], kind, variant, alpha, tau, direction, delta, kmax, &itv[s], NULL)
    finally:
        work_free(w)
    return X, iters, status


def newton_run(t_flat, int n, int m, x0, int method, double delta, int kmax, bint record=False):
    return _single(t_flat, n, m, x0, method, 0, 0.0, 0.0, 1, delta, kmax, record)


def newton_batch(t_flat, int n, int m, X0, int method, double delta, int kmax):
    return _batch(t_flat, n, m, X0, method, 0, 0.0, 0.0, 1, delta, kmax)


def power_run(t_flat, int n, int m, x0, int variant, double alpha, double tau, int direction,
              double delta, int kmax, bint record=False):
    return _single(t_flat, n, m, x0, 2, variant, alpha, tau, direction, delta, kmax, record)


def power_batch(t_flat, int n, int m, X0, int variant, double alpha, double tau, int direction,
                double delta, int kmax):
    return _batch(t_flat, n, m, X0, 2, variant, alpha, tau, direction, delta, kmax)


def contract_matrix(t_flat, int n, int m, x):
    """Return (M, v, mu) for one point; exposed for cross-checking."""
    t = _prep(t_flat, n, m)
    cdef const double[::1] tv = t
    xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = xa
    cdef Work* w = work_new(&tv[0], n, m)
    cdef int i
    M = np.empty((n, n))
    v = np.empty(n)
    try:
        contract(w, &xv[0])
        for i in range(n * n):
            M.flat[i] = w.M[i]
        for i in range(n):
            v[i] = w.v[i]
        mu = w.mu
    finally:
        work_free(w)
    return M, v, mu
