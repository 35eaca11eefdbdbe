"""Pure-NumPy kernel backend.

Reference implementation of the hot kernels; the Cython module in
``_kernels_c.pyx`` mirrors these signatures exactly. Convention: the arm lives
in the x-z plane, joint angles are measured from the +x axis (counterclockwise
toward +z), gravity acts along -z.
"""

from __future__ import annotations

import numpy as np

NSCALAR = 9
SINGULARITY_GUARD = 1e8


class SingularKernelError(Exception):
    """Raised by kernels on degenerate contact-space inertia; wrapped by the API."""


def _unpack(ip, fp):
    mode, n = int(ip[0]), int(ip[1])
    L = fp[NSCALAR:NSCALAR + n]
    m = fp[NSCALAR + n:NSCALAR + 2 * n]
    inr = fp[NSCALAR + 2 * n:NSCALAR + 3 * n]
    c = fp[NSCALAR + 3 * n:NSCALAR + 4 * n]
    return mode, n, L, m, inr, c


def _rnea(n, L, m, inr, c, q, qd, qdd, g):
    """Inverse dynamics of the planar chain: tau = M(q) qdd + C(q, qd).

    Gravity enters through a fictitious base acceleration (0, +g).
    """
    th = np.cumsum(q)
    w = np.cumsum(qd)
    dw = np.cumsum(qdd)
    cth, sth = np.cos(th), np.sin(th)
    a_joint = np.array([0.0, g])
    a_com = np.empty((n, 2))
    for i in range(n):
        u = np.array([cth[i], sth[i]])
        t = np.array([-sth[i], cth[i]])
        a_com[i] = a_joint + c[i] * dw[i] * t - c[i] * w[i] ** 2 * u
        a_joint = a_joint + L[i] * dw[i] * t - L[i] * w[i] ** 2 * u
    tau = np.empty(n)
    f = np.zeros(2)
    nmom = 0.0
    for i in range(n - 1, -1, -1):
        F = m[i] * a_com[i]
        u = np.array([cth[i], sth[i]])
        nmom += inr[i] * dw[i] + c[i] * (u[0] * F[1] - u[1] * F[0]) \
            + L[i] * (u[0] * f[1] - u[1] * f[0])
        f += F
        tau[i] = nmom
    return tau


def arm_mass_bias(ip, fp, q, qd):
    """Arm-block mass matrix and bias vector (Coriolis + centrifugal + gravity)."""
    _, n, L, m, inr, c = _unpack(ip, fp)
    g = fp[0]
    M = np.empty((n, n))
    zero = np.zeros(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        M[:, j] = _rnea(n, L, m, inr, c, q, zero, e, 0.0)
    C = _rnea(n, L, m, inr, c, q, qd, zero, g)
    return M, C


def fk_ee(ip, fp, q):
    """End-effector pose (x, z, tool angle)."""
    _, n, L, _, _, _ = _unpack(ip, fp)
    th = np.cumsum(q)
    return np.array([np.dot(L, np.cos(th)), np.dot(L, np.sin(th)), th[-1]])


def ee_jacobian(ip, fp, q):
    """Task Jacobian of the end-effector pose, rows (x, z, angle)."""
    _, n, L, _, _, _ = _unpack(ip, fp)
    th = np.cumsum(q)
    J = np.empty((3, n))
    for j in range(n):
        J[0, j] = -np.dot(L[j:], np.sin(th[j:]))
        J[1, j] = np.dot(L[j:], np.cos(th[j:]))
        J[2, j] = 1.0
    return J


def ee_vel_bias(ip, fp, q, qd):
    """d/dt(J(q)) qd for the end-effector pose rows."""
    _, n, L, _, _, _ = _unpack(ip, fp)
    th = np.cumsum(q)
    w = np.cumsum(qd)
    bx = -np.dot(L * w ** 2, np.cos(th))
    bz = -np.dot(L * w ** 2, np.sin(th))
    return np.array([bx, bz, 0.0])


def _chol_solve_spd(A, b):
    """Cholesky solve with an explicit pivot guard shared with the compiled core."""
    k = A.shape[0]
    Lc = np.zeros((k, k))
    guard = max(A[i, i] for i in range(k)) / SINGULARITY_GUARD
    for i in range(k):
        s = A[i, i] - np.dot(Lc[i, :i], Lc[i, :i])
        if s <= guard:
            raise SingularKernelError("contact-space inertia ill-conditioned")
        Lc[i, i] = np.sqrt(s)
        for j in range(i + 1, k):
            Lc[j, i] = (A[j, i] - np.dot(Lc[j, :i], Lc[i, :i])) / Lc[i, i]
    y = np.linalg.solve(Lc, b)
    return np.linalg.solve(Lc.T, y)


def _contact_terms(ip, fp, qo, qr, qdr):
    """phi, J (nl x nq), Jdot qd (length nl), F_ext (length 3) for the mode."""
    mode, n, L, _, _, _ = _unpack(ip, fp)
    ee = fk_ee(ip, fp, qr)
    Jarm = ee_jacobian(ip, fp, qr)
    bias = ee_vel_bias(ip, fp, qr, qdr)
    if mode == 1:  # grasp-hold: full planar pose lock
        phi = np.array([ee[0] - qo[0], ee[1] - qo[1], ee[2] - fp[4] - qo[2]])
        J = np.hstack([-np.eye(3), Jarm])
        jdqd = bias.copy()
        Fext = np.zeros(3)
    else:  # push: single-point normal contact on the trailing face
        d = fp[3]
        hx = fp[7]
        phi = np.array([d * (qo[0] - ee[0]) - hx])
        J = np.zeros((1, 3 + n))
        J[0, 0] = d
        J[0, 3:] = -d * Jarm[0]
        jdqd = np.array([-d * bias[0]])
        mg = fp[5] * fp[0]
        Fext = np.array([-d * fp[2] * mg, mg, 0.0])
    return phi, J, jdqd, Fext


def forward_dynamics(ip, fp, x, u):
    """State derivative and contact force for the active mode."""
    mode, n, L, m, inr, c = _unpack(ip, fp)
    if mode == 0:
        q, qd = x[:n], x[n:]
        M, C = arm_mass_bias(ip, fp, q, qd)
        qdd = np.linalg.solve(M, u - C)
        return np.concatenate([qd, qdd]), np.empty(0)

    nq = 3 + n
    qo, qr = x[:3], x[3:nq]
    qdo, qdr = x[nq:nq + 3], x[nq + 3:]
    qd = x[nq:]
    Mr, Cr = arm_mass_bias(ip, fp, qr, qdr)
    mo, io, g, alpha = fp[5], fp[6], fp[0], fp[1]
    M = np.zeros((nq, nq))
    M[0, 0] = M[1, 1] = mo
    M[2, 2] = io
    M[3:, 3:] = Mr
    C = np.concatenate([[0.0, mo * g, 0.0], Cr])
    phi, J, jdqd, Fext = _contact_terms(ip, fp, qo, qr, qdr)
    rhs0 = -C
    rhs0[0:3] += Fext
    rhs0[3:] += u
    Minv_rhs0 = np.linalg.solve(M, rhs0)
    Minv_JT = np.linalg.solve(M, J.T)
    K = J @ Minv_JT
    lam = -_chol_solve_spd(K, jdqd + alpha * (J @ qd) + J @ Minv_rhs0)
    qdd = Minv_rhs0 + Minv_JT @ lam
    return np.concatenate([qd, qdd]), lam


def rk4_step(ip, fp, x, u, h):
    """Classical RK4 with zero-order-hold control; lam reported at (x, u)."""
    k1, lam = forward_dynamics(ip, fp, x, u)
    k2, _ = forward_dynamics(ip, fp, x + 0.5 * h * k1, u)
    k3, _ = forward_dynamics(ip, fp, x + 0.5 * h * k2, u)
    k4, _ = forward_dynamics(ip, fp, x + h * k3, u)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), lam


def rollout(ip, fp, x0, U, h):
    N = U.shape[0] + 1
    nx = x0.shape[0]
    X = np.empty((N, nx))
    X[0] = x0
    lam0 = forward_dynamics(ip, fp, x0, U[0])[1] if N > 1 else np.empty(0)
    Lam = np.empty((N - 1, lam0.shape[0]))
    for i in range(N - 1):
        X[i + 1], Lam[i] = rk4_step(ip, fp, X[i], U[i], h)
    return X, Lam


def rollout_feedback(ip, fp, Xn, Un, kff, K, alpha, h):
    """Closed-loop rollout: u_i = Un_i + alpha*k_i + K_i (x_i - Xn_i)."""
    N, nx = Xn.shape
    nu = Un.shape[1]
    X = np.empty((N, nx))
    U = np.empty((N - 1, nu))
    X[0] = Xn[0]
    nl = forward_dynamics(ip, fp, Xn[0], Un[0])[1].shape[0] if N > 1 else 0
    Lam = np.empty((N - 1, nl))
    for i in range(N - 1):
        U[i] = Un[i] + alpha * kff[i] + K[i] @ (X[i] - Xn[i])
        X[i + 1], Lam[i] = rk4_step(ip, fp, X[i], U[i], h)
    return X, U, Lam


def linearize_traj(ip, fp, X, U, h, eps=1e-6):
    """Central finite differences of rk4_step along a trajectory."""
    N1 = U.shape[0]
    nx, nu = X.shape[1], U.shape[1]
    A = np.empty((N1, nx, nx))
    B = np.empty((N1, nx, nu))
    for i in range(N1):
        x, u = X[i], U[i]
        for j in range(nx):
            d = eps * (1.0 + abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += d
            xm[j] -= d
            A[i, :, j] = (rk4_step(ip, fp, xp, u, h)[0] - rk4_step(ip, fp, xm, u, h)[0]) / (2 * d)
        for j in range(nu):
            d = eps * (1.0 + abs(u[j]))
            up, um = u.copy(), u.copy()
            up[j] += d
            um[j] -= d
            B[i, :, j] = (rk4_step(ip, fp, x, up, h)[0] - rk4_step(ip, fp, x, um, h)[0]) / (2 * d)
    return A, B


def aux_jacobian_traj(ip, fp, X, U, eps=1e-6):
    """Finite-difference Jacobians of the contact force lam(x, u) per knot."""
    N1 = U.shape[0]
    nx, nu = X.shape[1], U.shape[1]
    nl = forward_dynamics(ip, fp, X[0], U[0])[1].shape[0]
    Jx = np.empty((N1, nl, nx))
    Ju = np.empty((N1, nl, nu))
    for i in range(N1):
        x, u = X[i], U[i]
        for j in range(nx):
            d = eps * (1.0 + abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += d
            xm[j] -= d
            Jx[i, :, j] = (forward_dynamics(ip, fp, xp, u)[1] - forward_dynamics(ip, fp, xm, u)[1]) / (2 * d)
        for j in range(nu):
            d = eps * (1.0 + abs(u[j]))
            up, um = u.copy(), u.copy()
            up[j] += d
            um[j] -= d
            Ju[i, :, j] = (forward_dynamics(ip, fp, x, up)[1] - forward_dynamics(ip, fp, x, um)[1]) / (2 * d)
    return Jx, Ju
