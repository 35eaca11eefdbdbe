# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirrors the signatures and semantics of ``_kernels_py`` exactly, including the
Cholesky pivot guard. Dimensions are capped (8 links) so all scratch lives on
the stack.
"""

from libc.math cimport cos, sin, sqrt, fabs

import numpy as np

cimport numpy as cnp

from tampkit.dynamics._kernels_py import SingularKernelError

cnp.import_array()

DEF MAXN = 8        # links
DEF MAXQ = 11       # 3 object DOFs + links
DEF MAXX = 22
DEF MAXL = 3
DEF NSCALAR = 9
DEF GUARD = 1e8


cdef void _rnea(int n, double* L, double* m, double* inr, double* c,
                double* q, double* qd, double* qdd, double g, double* tau) nogil:
    cdef double th[MAXN]
    cdef double w[MAXN]
    cdef double dw[MAXN]
    cdef double acx[MAXN]
    cdef double acz[MAXN]
    cdef double ux, uz, tx, tz
    cdef double ajx = 0.0, ajz = g
    cdef double fx = 0.0, fz = 0.0, nmom = 0.0
    cdef double Fx, Fz
    cdef double s = 0.0, sw = 0.0, sdw = 0.0
    cdef int i
    for i in range(n):
        s += q[i]; sw += qd[i]; sdw += qdd[i]
        th[i] = s; w[i] = sw; dw[i] = sdw
    for i in range(n):
        ux = cos(th[i]); uz = sin(th[i])
        tx = -uz; tz = ux
        acx[i] = ajx + c[i] * dw[i] * tx - c[i] * w[i] * w[i] * ux
        acz[i] = ajz + c[i] * dw[i] * tz - c[i] * w[i] * w[i] * uz
        ajx = ajx + L[i] * dw[i] * tx - L[i] * w[i] * w[i] * ux
        ajz = ajz + L[i] * dw[i] * tz - L[i] * w[i] * w[i] * uz
    for i in range(n - 1, -1, -1):
        ux = cos(th[i]); uz = sin(th[i])
        Fx = m[i] * acx[i]; Fz = m[i] * acz[i]
        nmom += inr[i] * dw[i] + c[i] * (ux * Fz - uz * Fx) + L[i] * (ux * fz - uz * fx)
        fx += Fx; fz += Fz
        tau[i] = nmom


cdef void _mass_bias(int n, double* L, double* m, double* inr, double* c,
                     double* q, double* qd, double g, double* M, double* C) nogil:
    cdef double e[MAXN]
    cdef double zero[MAXN]
    cdef double col[MAXN]
    cdef int i, j
    for i in range(n):
        zero[i] = 0.0
    for j in range(n):
        for i in range(n):
            e[i] = 0.0
        e[j] = 1.0
        _rnea(n, L, m, inr, c, q, zero, e, 0.0, col)
        for i in range(n):
            M[i * n + j] = col[i]
    _rnea(n, L, m, inr, c, q, qd, zero, g, C)


cdef void _fk(int n, double* L, double* q, double* out) nogil:
    cdef double s = 0.0, x = 0.0, z = 0.0
    cdef int i
    for i in range(n):
        s += q[i]
        x += L[i] * cos(s)
        z += L[i] * sin(s)
    out[0] = x; out[1] = z; out[2] = s


cdef void _jac(int n, double* L, double* q, double* J) nogil:
    # rows (x, z, angle), row-major 3 x n
    cdef double th[MAXN]
    cdef double s = 0.0
    cdef double sx, sz
    cdef int i, j
    for i in range(n):
        s += q[i]
        th[i] = s
    for j in range(n):
        sx = 0.0; sz = 0.0
        for i in range(j, n):
            sx -= L[i] * sin(th[i])
            sz += L[i] * cos(th[i])
        J[0 * n + j] = sx
        J[1 * n + j] = sz
        J[2 * n + j] = 1.0


cdef void _velbias(int n, double* L, double* q, double* qd, double* out) nogil:
    cdef double s = 0.0, sw = 0.0, bx = 0.0, bz = 0.0
    cdef int i
    for i in range(n):
        s += q[i]; sw += qd[i]
        bx -= L[i] * sw * sw * cos(s)
        bz -= L[i] * sw * sw * sin(s)
    out[0] = bx; out[1] = bz; out[2] = 0.0


cdef int _gauss_solve(int n, double* A, double* B, int ncols) nogil:
    """In-place Gaussian elimination with partial pivoting; B is n x ncols."""
    cdef int i, j, k, p
    cdef double best, tmp, f
    for k in range(n):
        p = k
        best = fabs(A[k * n + k])
        for i in range(k + 1, n):
            if fabs(A[i * n + k]) > best:
                best = fabs(A[i * n + k]); p = i
        if best == 0.0:
            return 1
        if p != k:
            for j in range(n):
                tmp = A[k * n + j]; A[k * n + j] = A[p * n + j]; A[p * n + j] = tmp
            for j in range(ncols):
                tmp = B[k * ncols + j]; B[k * ncols + j] = B[p * ncols + j]; B[p * ncols + j] = tmp
        for i in range(k + 1, n):
            f = A[i * n + k] / A[k * n + k]
            for j in range(k, n):
                A[i * n + j] -= f * A[k * n + j]
            for j in range(ncols):
                B[i * ncols + j] -= f * B[k * ncols + j]
    for k in range(n - 1, -1, -1):
        for j in range(ncols):
            tmp = B[k * ncols + j]
            for i in range(k + 1, n):
                tmp -= A[k * n + i] * B[i * ncols + j]
            B[k * ncols + j] = tmp / A[k * n + k]
    return 0


cdef int _chol_solve(int k, double* A, double* b, double* out) nogil:
    """Cholesky solve with the shared pivot guard; returns 1 on degeneracy."""
    cdef double Lc[MAXL * MAXL]
    cdef double y[MAXL]
    cdef double guard = 0.0, s
    cdef int i, j, t
    for i in range(k):
        if A[i * k + i] > guard:
            guard = A[i * k + i]
    guard /= GUARD
    for i in range(k * k):
        Lc[i] = 0.0
    for i in range(k):
        s = A[i * k + i]
        for t in range(i):
            s -= Lc[i * k + t] * Lc[i * k + t]
        if s <= guard:
            return 1
        Lc[i * k + i] = sqrt(s)
        for j in range(i + 1, k):
            s = A[j * k + i]
            for t in range(i):
                s -= Lc[j * k + t] * Lc[i * k + t]
            Lc[j * k + i] = s / Lc[i * k + i]
    for i in range(k):
        s = b[i]
        for t in range(i):
            s -= Lc[i * k + t] * y[t]
        y[i] = s / Lc[i * k + i]
    for i in range(k - 1, -1, -1):
        s = y[i]
        for t in range(i + 1, k):
            s -= Lc[t * k + i] * out[t]
        out[i] = s / Lc[i * k + i]
    return 0


cdef int _fdyn(long mode, int n, double* fp, double* x, double* u,
               double* xdot, double* lam, int* nl_out) nogil:
    """State derivative; returns 1 on singular contact inertia, 2 on solve failure."""
    cdef double* L = fp + NSCALAR
    cdef double* m = fp + NSCALAR + n
    cdef double* inr = fp + NSCALAR + 2 * n
    cdef double* c = fp + NSCALAR + 3 * n
    cdef double g = fp[0], alpha = fp[1], mu = fp[2], d = fp[3], dtheta = fp[4]
    cdef double mo = fp[5], io = fp[6], hx = fp[7]
    cdef double Mr[MAXN * MAXN]
    cdef double Cr[MAXN]
    cdef double M[MAXQ * MAXQ]
    cdef double C[MAXQ]
    cdef double rhs[MAXQ * (1 + MAXL)]
    cdef double ee[3]
    cdef double Jarm[3 * MAXN]
    cdef double bias[3]
    cdef double phi[MAXL]
    cdef double J[MAXL * MAXQ]
    cdef double jdqd[MAXL]
    cdef double Fext[3]
    cdef double K[MAXL * MAXL]
    cdef double rhsl[MAXL]
    cdef double s
    cdef int nq, nl, i, j, k, ncols

    if mode == 0:
        _mass_bias(n, L, m, inr, c, x, x + n, g, M, C)
        for i in range(n):
            rhs[i] = u[i] - C[i]
        if _gauss_solve(n, M, rhs, 1):
            return 2
        for i in range(n):
            xdot[i] = x[n + i]
            xdot[n + i] = rhs[i]
        nl_out[0] = 0
        return 0

    nq = 3 + n
    _mass_bias(n, L, m, inr, c, x + 3, x + nq + 3, g, Mr, Cr)
    for i in range(nq * nq):
        M[i] = 0.0
    M[0 * nq + 0] = mo
    M[1 * nq + 1] = mo
    M[2 * nq + 2] = io
    for i in range(n):
        for j in range(n):
            M[(3 + i) * nq + (3 + j)] = Mr[i * n + j]
    C[0] = 0.0; C[1] = mo * g; C[2] = 0.0
    for i in range(n):
        C[3 + i] = Cr[i]

    _fk(n, L, x + 3, ee)
    _jac(n, L, x + 3, Jarm)
    _velbias(n, L, x + 3, x + nq + 3, bias)
    if mode == 1:
        nl = 3
        phi[0] = ee[0] - x[0]
        phi[1] = ee[1] - x[1]
        phi[2] = ee[2] - dtheta - x[2]
        for i in range(nl * nq):
            J[i] = 0.0
        J[0 * nq + 0] = -1.0
        J[1 * nq + 1] = -1.0
        J[2 * nq + 2] = -1.0
        for i in range(3):
            for j in range(n):
                J[i * nq + 3 + j] = Jarm[i * n + j]
            jdqd[i] = bias[i]
        Fext[0] = 0.0; Fext[1] = 0.0; Fext[2] = 0.0
    else:
        nl = 1
        phi[0] = d * (x[0] - ee[0]) - hx
        for i in range(nq):
            J[i] = 0.0
        J[0] = d
        for j in range(n):
            J[3 + j] = -d * Jarm[0 * n + j]
        jdqd[0] = -d * bias[0]
        Fext[0] = -d * mu * mo * g
        Fext[1] = mo * g
        Fext[2] = 0.0

    # rhs columns: [rhs0 | J^T], solved against M in one elimination
    ncols = 1 + nl
    for i in range(nq):
        rhs[i * ncols + 0] = -C[i] + (Fext[i] if i < 3 else u[i - 3])
        for k in range(nl):
            rhs[i * ncols + 1 + k] = J[k * nq + i]
    if _gauss_solve(nq, M, rhs, ncols):
        return 2

    # K = J M^-1 J^T; rhsl = jdqd + alpha J qd + J M^-1 rhs0
    for i in range(nl):
        for j in range(nl):
            s = 0.0
            for k in range(nq):
                s += J[i * nq + k] * rhs[k * ncols + 1 + j]
            K[i * nl + j] = s
        s = jdqd[i]
        for k in range(nq):
            s += alpha * J[i * nq + k] * x[nq + k]
            s += J[i * nq + k] * rhs[k * ncols + 0]
        rhsl[i] = s
    if _chol_solve(nl, K, rhsl, lam):
        return 1
    for i in range(nl):
        lam[i] = -lam[i]
    for i in range(nq):
        s = rhs[i * ncols + 0]
        for k in range(nl):
            s += rhs[i * ncols + 1 + k] * lam[k]
        xdot[i] = x[nq + i]
        xdot[nq + i] = s
    nl_out[0] = nl
    return 0


cdef int _rk4(long mode, int n, double* fp, double* x, double* u, double h,
              double* xn, double* lam, int* nl_out, int nx) nogil:
    cdef double k1[MAXX]
    cdef double k2[MAXX]
    cdef double k3[MAXX]
    cdef double k4[MAXX]
    cdef double xt[MAXX]
    cdef double lscratch[MAXL]
    cdef int i, rc, dummy
    rc = _fdyn(mode, n, fp, x, u, k1, lam, nl_out)
    if rc: return rc
    for i in range(nx):
        xt[i] = x[i] + 0.5 * h * k1[i]
    rc = _fdyn(mode, n, fp, xt, u, k2, lscratch, &dummy)
    if rc: return rc
    for i in range(nx):
        xt[i] = x[i] + 0.5 * h * k2[i]
    rc = _fdyn(mode, n, fp, xt, u, k3, lscratch, &dummy)
    if rc: return rc
    for i in range(nx):
        xt[i] = x[i] + h * k3[i]
    rc = _fdyn(mode, n, fp, xt, u, k4, lscratch, &dummy)
    if rc: return rc
    for i in range(nx):
        xn[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return 0


cdef inline void _load(object arr, double* dst, int count):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(arr, dtype=np.float64)
    cdef int i
    for i in range(count):
        dst[i] = a[i]


cdef int _dims(ip, int* mode, int* n, int* nq, int* nx, int* nl) except -1:
    mode[0] = int(ip[0])
    n[0] = int(ip[1])
    if n[0] > MAXN:
        raise ValueError("compiled kernels support at most 8 links")
    nq[0] = n[0] if mode[0] == 0 else 3 + n[0]
    nx[0] = 2 * nq[0]
    nl[0] = 0 if mode[0] == 0 else (3 if mode[0] == 1 else 1)
    return 0


def arm_mass_bias(ip, fp, q, qd):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double qb[MAXN]
    cdef double qdb[MAXN]
    cdef double Mb[MAXN * MAXN]
    cdef double Cb[MAXN]
    _load(fp, fpb, NSCALAR + 4 * n)
    _load(q, qb, n)
    _load(qd, qdb, n)
    _mass_bias(n, fpb + NSCALAR, fpb + NSCALAR + n, fpb + NSCALAR + 2 * n,
               fpb + NSCALAR + 3 * n, qb, qdb, fpb[0], Mb, Cb)
    M = np.empty((n, n))
    C = np.empty(n)
    cdef int i, j
    for i in range(n):
        C[i] = Cb[i]
        for j in range(n):
            M[i, j] = Mb[i * n + j]
    return M, C


def fk_ee(ip, fp, q):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double qb[MAXN]
    cdef double out[3]
    _load(fp, fpb, NSCALAR + 4 * n)
    _load(q, qb, n)
    _fk(n, fpb + NSCALAR, qb, out)
    return np.array([out[0], out[1], out[2]])


def ee_jacobian(ip, fp, q):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double qb[MAXN]
    cdef double Jb[3 * MAXN]
    _load(fp, fpb, NSCALAR + 4 * n)
    _load(q, qb, n)
    _jac(n, fpb + NSCALAR, qb, Jb)
    J = np.empty((3, n))
    cdef int i, j
    for i in range(3):
        for j in range(n):
            J[i, j] = Jb[i * n + j]
    return J


def ee_vel_bias(ip, fp, q, qd):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double qb[MAXN]
    cdef double qdb[MAXN]
    cdef double out[3]
    _load(fp, fpb, NSCALAR + 4 * n)
    _load(q, qb, n)
    _load(qd, qdb, n)
    _velbias(n, fpb + NSCALAR, qb, qdb, out)
    return np.array([out[0], out[1], out[2]])


def forward_dynamics(ip, fp, x, u):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double xb[MAXX]
    cdef double ub[MAXN]
    cdef double xdot[MAXX]
    cdef double lam[MAXL]
    cdef int nl_out, rc, i
    _load(fp, fpb, NSCALAR + 4 * n)
    _load(x, xb, nx)
    _load(u, ub, n)
    rc = _fdyn(mode, n, fpb, xb, ub, xdot, lam, &nl_out)
    if rc == 1:
        raise SingularKernelError("contact-space inertia ill-conditioned")
    if rc == 2:
        raise SingularKernelError("mass matrix solve failed")
    xd = np.empty(nx)
    for i in range(nx):
        xd[i] = xdot[i]
    lm = np.empty(nl)
    for i in range(nl):
        lm[i] = lam[i]
    return xd, lm


def rk4_step(ip, fp, x, u, double h):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double xb[MAXX]
    cdef double ub[MAXN]
    cdef double xn[MAXX]
    cdef double lam[MAXL]
    cdef int nl_out, rc, i
    _load(fp, fpb, NSCALAR + 4 * n)
    _load(x, xb, nx)
    _load(u, ub, n)
    rc = _rk4(mode, n, fpb, xb, ub, h, xn, lam, &nl_out, nx)
    if rc == 1:
        raise SingularKernelError("contact-space inertia ill-conditioned")
    if rc == 2:
        raise SingularKernelError("mass matrix solve failed")
    out = np.empty(nx)
    for i in range(nx):
        out[i] = xn[i]
    lm = np.empty(nl)
    for i in range(nl):
        lm[i] = lam[i]
    return out, lm


def rollout(ip, fp, x0, U, double h):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Ua = np.ascontiguousarray(U, dtype=np.float64)
    cdef int N1 = Ua.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.empty((N1 + 1, nx))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Lam = np.empty((N1, nl))
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double xb[MAXX]
    cdef double xn[MAXX]
    cdef double ub[MAXN]
    cdef double lam[MAXL]
    cdef int nl_out, rc, i, j
    _load(fp, fpb, NSCALAR + 4 * n)
    _load(x0, xb, nx)
    for j in range(nx):
        X[0, j] = xb[j]
    for i in range(N1):
        for j in range(n):
            ub[j] = Ua[i, j]
        rc = _rk4(mode, n, fpb, xb, ub, h, xn, lam, &nl_out, nx)
        if rc == 1:
            raise SingularKernelError("contact-space inertia ill-conditioned")
        if rc == 2:
            raise SingularKernelError("mass matrix solve failed")
        for j in range(nx):
            X[i + 1, j] = xn[j]
            xb[j] = xn[j]
        for j in range(nl):
            Lam[i, j] = lam[j]
    return X, Lam


def rollout_feedback(ip, fp, Xn, Un, kff, Kg, double alpha, double h):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xna = np.ascontiguousarray(Xn, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Una = np.ascontiguousarray(Un, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ka = np.ascontiguousarray(kff, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Ka = np.ascontiguousarray(Kg, dtype=np.float64)
    cdef int N1 = Una.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.empty((N1 + 1, nx))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] U = np.empty((N1, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Lam = np.empty((N1, nl))
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double xb[MAXX]
    cdef double xn_[MAXX]
    cdef double ub[MAXN]
    cdef double lam[MAXL]
    cdef double s
    cdef int nl_out, rc, i, j, k
    _load(fp, fpb, NSCALAR + 4 * n)
    for j in range(nx):
        xb[j] = Xna[0, j]
        X[0, j] = xb[j]
    for i in range(N1):
        for j in range(n):
            s = Una[i, j] + alpha * ka[i, j]
            for k in range(nx):
                s += Ka[i, j, k] * (xb[k] - Xna[i, k])
            ub[j] = s
            U[i, j] = s
        rc = _rk4(mode, n, fpb, xb, ub, h, xn_, lam, &nl_out, nx)
        if rc == 1:
            raise SingularKernelError("contact-space inertia ill-conditioned")
        if rc == 2:
            raise SingularKernelError("mass matrix solve failed")
        for j in range(nx):
            X[i + 1, j] = xn_[j]
            xb[j] = xn_[j]
        for j in range(nl):
            Lam[i, j] = lam[j]
    return X, U, Lam


def linearize_traj(ip, fp, X, U, double h, double eps=1e-6):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xa = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Ua = np.ascontiguousarray(U, dtype=np.float64)
    cdef int N1 = Ua.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] A = np.empty((N1, nx, nx))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] B = np.empty((N1, nx, n))
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double xb[MAXX]
    cdef double ub[MAXN]
    cdef double xp[MAXX]
    cdef double xm[MAXX]
    cdef double up[MAXN]
    cdef double um[MAXN]
    cdef double lam[MAXL]
    cdef double d
    cdef int nl_out, rc, i, j, k
    _load(fp, fpb, NSCALAR + 4 * n)
    for i in range(N1):
        for j in range(nx):
            xb[j] = Xa[i, j]
        for j in range(n):
            ub[j] = Ua[i, j]
        for j in range(nx):
            d = eps * (1.0 + fabs(xb[j]))
            for k in range(nx):
                xp[k] = xb[k]
            xp[j] += d
            rc = _rk4(mode, n, fpb, xp, ub, h, xp, lam, &nl_out, nx)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            for k in range(nx):
                xm[k] = xb[k]
            xm[j] -= d
            rc = _rk4(mode, n, fpb, xm, ub, h, xm, lam, &nl_out, nx)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            for k in range(nx):
                A[i, k, j] = (xp[k] - xm[k]) / (2.0 * d)
        for j in range(n):
            d = eps * (1.0 + fabs(ub[j]))
            for k in range(n):
                up[k] = ub[k]
                um[k] = ub[k]
            up[j] += d
            um[j] -= d
            rc = _rk4(mode, n, fpb, xb, up, h, xp, lam, &nl_out, nx)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            rc = _rk4(mode, n, fpb, xb, um, h, xm, lam, &nl_out, nx)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            for k in range(nx):
                B[i, k, j] = (xp[k] - xm[k]) / (2.0 * d)
    return A, B


def aux_jacobian_traj(ip, fp, X, U, double eps=1e-6):
    cdef int mode, n, nq, nx, nl
    _dims(ip, &mode, &n, &nq, &nx, &nl)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xa = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Ua = np.ascontiguousarray(U, dtype=np.float64)
    cdef int N1 = Ua.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Jx = np.empty((N1, nl, nx))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] Ju = np.empty((N1, nl, n))
    cdef double fpb[NSCALAR + 4 * MAXN]
    cdef double xb[MAXX]
    cdef double ub[MAXN]
    cdef double xp[MAXX]
    cdef double up[MAXN]
    cdef double xdot[MAXX]
    cdef double lp[MAXL]
    cdef double lm[MAXL]
    cdef double d
    cdef int nl_out, rc, i, j, k
    _load(fp, fpb, NSCALAR + 4 * n)
    for i in range(N1):
        for j in range(nx):
            xb[j] = Xa[i, j]
        for j in range(n):
            ub[j] = Ua[i, j]
        for j in range(nx):
            d = eps * (1.0 + fabs(xb[j]))
            for k in range(nx):
                xp[k] = xb[k]
            xp[j] += d
            rc = _fdyn(mode, n, fpb, xp, ub, xdot, lp, &nl_out)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            xp[j] = xb[j] - d
            for k in range(nx):
                if k != j:
                    xp[k] = xb[k]
            rc = _fdyn(mode, n, fpb, xp, ub, xdot, lm, &nl_out)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            for k in range(nl):
                Jx[i, k, j] = (lp[k] - lm[k]) / (2.0 * d)
        for j in range(n):
            d = eps * (1.0 + fabs(ub[j]))
            for k in range(n):
                up[k] = ub[k]
            up[j] += d
            rc = _fdyn(mode, n, fpb, xb, up, xdot, lp, &nl_out)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            up[j] = ub[j] - d
            rc = _fdyn(mode, n, fpb, xb, up, xdot, lm, &nl_out)
            if rc:
                raise SingularKernelError("dynamics failure during linearization")
            for k in range(nl):
                Ju[i, k, j] = (lp[k] - lm[k]) / (2.0 * d)
    return Jx, Ju
