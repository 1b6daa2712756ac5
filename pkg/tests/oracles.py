"""Independent reference implementations used to freeze expected values.

Everything here deliberately avoids the library's own code paths: naive
index loops, bisection root finding, forward Euler, and closed-form
solutions. Slow is fine; these run on small inputs only.
"""

import numpy as np


def naive_matmul(a, b):
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m), dtype=complex)
    for i in range(n):
        for j in range(m):
            acc = 0.0 + 0.0j
            for l in range(k):
                acc += a[i, l] * b[l, j]
            out[i, j] = acc
    return out


def naive_adjoint(a):
    n, m = a.shape
    out = np.zeros((m, n), dtype=complex)
    for i in range(n):
        for j in range(m):
            out[j, i] = a[i, j].conjugate()
    return out


def naive_kron(a, b):
    n, m = a.shape
    p, q = b.shape
    out = np.zeros((n * p, m * q), dtype=complex)
    for i in range(n):
        for j in range(m):
            for k in range(p):
                for l in range(q):
                    out[i * p + k, j * q + l] = a[i, j] * b[k, l]
    return out


def naive_trace(a):
    acc = 0.0 + 0.0j
    for i in range(a.shape[0]):
        acc += a[i, i]
    return acc


def _det3(a):
    return (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))


def charpoly_eigs_3x3(a, scan_points=4001, iters=200):
    """Eigenvalues of a 3x3 Hermitian matrix by bisection on det(A - x I).

    Assumes distinct eigenvalues (true with probability one for the random
    draws used in tests).
    """
    assert a.shape == (3, 3)

    def f(x):
        return _det3(a - x * np.eye(3)).real

    radius = float(np.sum(np.abs(a))) + 1.0
    xs = np.linspace(-radius, radius, scan_points)
    fs = np.array([f(x) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        if fs[i] == 0.0:
            roots.append(xs[i])
        elif fs[i] * fs[i + 1] < 0.0:
            lo, hi = xs[i], xs[i + 1]
            flo = fs[i]
            for _ in range(iters):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    assert len(roots) == 3, f"expected 3 distinct roots, found {len(roots)}"
    return np.array(sorted(roots))


def euler_mean_field(omega1, gamma1, t_final=None, dt=None):
    """Forward-Euler mean-field amplitude <a>(t) from <a>(0) = 0 under
    d<a>/dt = -i Omega1/2 - (gamma1/2) <a>; returns the final value."""
    if t_final is None:
        t_final = 40.0 / gamma1
    if dt is None:
        dt = 0.05 / gamma1
    steps = int(round(t_final / dt))
    a = 0.0 + 0.0j
    for _ in range(steps):
        a = a + dt * (-1j * omega1 / 2.0 - 0.5 * gamma1 * a)
    return a


def brute_partial_transpose(rho, dims, part_a):
    """Four-index-loop partial transpose over the subsystems in part_a."""
    dims = tuple(dims)
    total = int(np.prod(dims))
    assert rho.shape == (total, total)

    def unflatten(flat):
        out = []
        for d in reversed(dims):
            out.append(flat % d)
            flat //= d
        return tuple(reversed(out))

    def flatten(tup):
        flat = 0
        for idx, d in zip(tup, dims):
            flat = flat * d + idx
        return flat

    out = np.zeros_like(rho)
    for row in range(total):
        for col in range(total):
            ket = list(unflatten(row))
            bra = list(unflatten(col))
            for i in part_a:
                ket[i], bra[i] = bra[i], ket[i]
            out[flatten(tuple(ket)), flatten(tuple(bra))] = rho[row, col]
    return out


def damped_qubit_exact(omega0, decay_rate, t, rho0):
    """Closed-form solution for H = (omega0/2) sigma_z with the dissipator
    (decay_rate/2) L[sigma_minus], basis order (|e>, |g>)."""
    ee = rho0[0, 0] * np.exp(-decay_rate * t)
    eg = rho0[0, 1] * np.exp(-(0.5 * decay_rate + 1j * omega0) * t)
    out = np.array([[ee, eg], [eg.conjugate(), 1.0 - ee]], dtype=complex)
    return out


def reference_master_solution(h_of_t, terms, rho0, t_final, rtol=1e-11):
    """High-accuracy reference via scipy's DOP853 on the vectorized
    master equation; independent of the package's RK4 path."""
    from scipy.integrate import solve_ivp

    n = rho0.shape[0]
    prepared = [(c, c.conj().T, c.conj().T @ c, r) for c, r in terms]

    def rhs(t, y):
        rho = y.reshape(n, n)
        h = h_of_t(t)
        drho = -1j * (h @ rho - rho @ h)
        for c, cd, cdc, r in prepared:
            drho += r * (c @ rho @ cd) - 0.5 * r * (cdc @ rho + rho @ cdc)
        return drho.ravel()

    sol = solve_ivp(rhs, (0.0, t_final), rho0.ravel().astype(complex),
                    method="DOP853", rtol=rtol, atol=1e-13)
    return sol.y[:, -1].reshape(n, n)
