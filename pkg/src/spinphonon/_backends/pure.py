"""Pure NumPy kernel lane.

Same call surface as the compiled extension (`_core`): Hermitian
eigenvalues, a cheap positivity probe, the Lindblad right-hand side, and
fixed-step RK4 propagators for density matrices and state vectors. The
dissipator convention is the one used throughout the package,

    rho_dot += (rate/2) * (2 c rho c^+ - c^+c rho - rho c^+c).

Time-dependent Hamiltonians arrive in split form: a static part plus a
list of (M_k, omega_k) with H(t) = H0 + sum_k M_k e^{i omega_k t} + h.c.
"""

from __future__ import annotations

import numpy as np

NAME = "pure"


def eigvalsh_ascending(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending (LAPACK)."""
    return np.linalg.eigvalsh(a)


def min_eig_at_least(a: np.ndarray, floor: float) -> bool:
    """True iff the Hermitian matrix a has no eigenvalue below -floor.

    Probed by attempting a Cholesky factorization of a + floor*I, which is
    much cheaper than a full spectrum at the sizes used here.
    """
    shifted = a + floor * np.eye(a.shape[0])
    try:
        np.linalg.cholesky(shifted)
        return True
    except np.linalg.LinAlgError:
        return False


def _assemble_h(h0, ms, mdags, omegas, t, out):
    np.copyto(out, h0)
    for m, md, w in zip(ms, mdags, omegas):
        phase = np.exp(1j * w * t)
        out += phase * m
        out += np.conj(phase) * md


def _rhs(h, r, cops, cdags, cdcs, rates, out, t1, t2):
    """out <- -i[h, r] + sum_k (rate_k/2) L[c_k] r."""
    np.matmul(h, r, out=t1)
    np.matmul(r, h, out=t2)
    np.subtract(t1, t2, out=out)
    out *= -1j
    for c, cd, cdc, g in zip(cops, cdags, cdcs, rates):
        np.matmul(c, r, out=t1)
        np.matmul(t1, cd, out=t2)
        t2 *= g
        out += t2
        np.matmul(cdc, r, out=t1)
        np.matmul(r, cdc, out=t2)
        t1 += t2
        t1 *= 0.5 * g
        out -= t1


def lindblad_rhs(rho, h, cops, cdags, cdcs, rates):
    """One-shot master-equation right-hand side (fresh output array)."""
    n = rho.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    t1 = np.empty_like(out)
    t2 = np.empty_like(out)
    _rhs(h, rho, cops, cdags, cdcs, rates, out, t1, t2)
    return out


def propagate_master(rho, h0, ms, omegas, cops, cdags, cdcs, rates,
                     dt, t0, n_steps):
    """Advance rho by n_steps of classical RK4, re-Hermitizing each step.

    Returns the new density matrix (the input is not modified).
    """
    n = rho.shape[0]
    rho = rho.copy()
    timedep = len(ms) > 0
    mdags = [m.conj().T.copy() for m in ms]
    h = np.array(h0, dtype=np.complex128, copy=True)

    k1, k2, k3, k4 = (np.empty((n, n), dtype=np.complex128) for _ in range(4))
    rs = np.empty_like(rho)
    t1 = np.empty_like(rho)
    t2 = np.empty_like(rho)

    for step in range(n_steps):
        t = t0 + step * dt
        if timedep:
            _assemble_h(h0, ms, mdags, omegas, t, h)
        _rhs(h, rho, cops, cdags, cdcs, rates, k1, t1, t2)

        np.multiply(k1, 0.5 * dt, out=rs)
        rs += rho
        if timedep:
            _assemble_h(h0, ms, mdags, omegas, t + 0.5 * dt, h)
        _rhs(h, rs, cops, cdags, cdcs, rates, k2, t1, t2)

        np.multiply(k2, 0.5 * dt, out=rs)
        rs += rho
        _rhs(h, rs, cops, cdags, cdcs, rates, k3, t1, t2)

        np.multiply(k3, dt, out=rs)
        rs += rho
        if timedep:
            _assemble_h(h0, ms, mdags, omegas, t + dt, h)
        _rhs(h, rs, cops, cdags, cdcs, rates, k4, t1, t2)

        k2 += k3
        k2 *= 2.0
        k1 += k4
        k1 += k2
        k1 *= dt / 6.0
        rho += k1
        # enforce Hermiticity exactly; RK4 only preserves it to roundoff
        np.conjugate(rho.T, out=t1)
        rho += t1
        rho *= 0.5
    return rho


def propagate_pure(psi, h0, ms, omegas, dt, t0, n_steps):
    """RK4 on -i H(t) psi with per-step renormalization.

    Returns (psi_out, max_norm_drift) where the drift is the largest
    one-step deviation of the norm from 1 seen before renormalizing.
    """
    psi = psi.copy()
    timedep = len(ms) > 0
    mdags = [m.conj().T.copy() for m in ms]
    h = np.array(h0, dtype=np.complex128, copy=True)
    max_drift = 0.0

    for step in range(n_steps):
        t = t0 + step * dt
        if timedep:
            _assemble_h(h0, ms, mdags, omegas, t, h)
        k1 = -1j * (h @ psi)
        if timedep:
            _assemble_h(h0, ms, mdags, omegas, t + 0.5 * dt, h)
        k2 = -1j * (h @ (psi + 0.5 * dt * k1))
        k3 = -1j * (h @ (psi + 0.5 * dt * k2))
        if timedep:
            _assemble_h(h0, ms, mdags, omegas, t + dt, h)
        k4 = -1j * (h @ (psi + dt * k3))
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = np.linalg.norm(psi)
        drift = abs(norm - 1.0)
        if drift > max_drift:
            max_drift = drift
        psi /= norm
    return psi, max_drift
