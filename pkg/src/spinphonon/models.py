"""Hamiltonian builders and the physical parameter record.

The system is a driven mechanical oscillator (phonon modes a, b, and
optionally c) whose quadratic position coupling to one or more two-level
spins is amplified by the coherent steady-state amplitude alpha of the
driven mode. Builders return plain complex matrices over a HilbertSpace;
all of them are Hermitian by construction.

Naming note: the collective boson mode (b + e^{-i delta} c)/sqrt(2) is
called ``mode d`` while the spin dephasing rate is ``dephasing_rate``;
the two are unrelated despite the historical letter clash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, ParameterError, ShapeError
from .hilbert import (HilbertSpace, annihilation, collective_raising, embed,
                      qubit_ops)

MAX_DENSE_SPINS = 5


@dataclass(frozen=True)
class ModelParams:
    """All physical symbols of the model, in rad/s unless dimensionless.

    For dimensionless runs the caller scales every rate by the effective
    coupling (g*|alpha| or the squeezing strength eta) and sets the bare
    parameters consistently; nothing here assumes SI magnitudes.
    """

    omega_z: float = 2 * math.pi * 10e6      # spin splitting
    delta: float = 2 * math.pi * 10e6        # mode-b detuning, omega_b - omega_a
    Omega1: float = 2 * math.pi * 1.25e6     # drive strength, mode a
    Omega2: float = 2 * math.pi * 1.25e6     # drive strength, mode b (and c)
    g: float = 2 * math.pi * 5.0             # quadratic-gradient coupling
    gamma1: float = 2 * math.pi * 25.0       # mode-a dissipation
    gamma2: float = 5 * 2 * math.pi * 5.0    # mode-b dissipation
    gamma3: float = 5 * 2 * math.pi * 5.0    # mode-c dissipation
    dephasing_rate: float = 50 * 2 * math.pi * 5.0  # spin dephasing
    n_bath: float = 20.0                     # bath thermal occupation
    n_init: float = 0.0                      # initial thermal occupation
    alpha: complex | None = None             # steady amplitude of mode a
    N: int = 1                               # number of spins
    delta_phase: float = math.pi / 2         # collective-mode phase delta
    omega: float | None = None               # omega_z - delta unless overridden

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3", "dephasing_rate",
                     "n_bath", "n_init"):
            value = getattr(self, name)
            if value < 0 or not math.isfinite(value):
                raise ParameterError(f"{name} must be finite and >= 0, "
                                     f"got {value}")
        if self.N < 1:
            raise ParameterError("N must be >= 1")

    @property
    def omega_eff(self) -> float:
        """Squeezing detuning omega = omega_z - delta unless set explicitly."""
        return self.omega if self.omega is not None else self.omega_z - self.delta

    def with_derived_alpha(self) -> "ModelParams":
        """Copy with alpha = -i Omega1/gamma1 from the steady-state solve."""
        return replace(self, alpha=steady_state_amplitudes(self).alpha)

    def require_alpha(self) -> complex:
        if self.alpha is None:
            raise ParameterError("steady amplitude alpha is unset; call "
                                 "with_derived_alpha() or set it explicitly")
        return self.alpha


class SteadyState(NamedTuple):
    """Exact steady amplitudes and the weak-damping approximation for beta."""

    alpha: complex
    beta: complex
    beta_approx: complex
    beta_rel_diff: float


def steady_state_amplitudes(p: ModelParams) -> SteadyState:
    """Fixed point of the driven, damped mean-field mode equations.

    alpha = -i Omega1/gamma1 for the resonantly driven mode and
    beta = -(Omega2/2)/(delta - i gamma2/2) for the detuned one; the
    commonly quoted approximation beta ~ -Omega2/(2 delta) is returned
    alongside with its relative error.
    """
    if p.gamma1 <= 0:
        raise ParameterError("singular drive: gamma1 must be positive for a "
                             "steady amplitude")
    if p.delta == 0 and p.gamma2 == 0:
        raise ParameterError("mode b has neither detuning nor damping; no "
                             "steady state")
    alpha = -1j * p.Omega1 / p.gamma1
    beta = -(p.Omega2 / 2) / (p.delta - 0.5j * p.gamma2)
    if p.delta != 0:
        beta_approx = complex(-p.Omega2 / (2 * p.delta))
    else:
        beta_approx = complex(math.inf)
    rel = abs(beta - beta_approx) / abs(beta) if beta != 0 else 0.0
    return SteadyState(alpha, beta, beta_approx, rel)


@dataclass(frozen=True)
class TimeDependentOperator:
    """Hamiltonian of the form sum_k M_k e^{i w_k t} + h.c.

    Hermitian at every t by construction.
    """

    terms: tuple[tuple[np.ndarray, float], ...]

    def __init__(self, terms: Sequence[tuple[np.ndarray, float]]):
        object.__setattr__(self, "terms", tuple((np.asarray(m, dtype=np.complex128), float(w))
                                                for m, w in terms))
        if not self.terms:
            raise ParameterError("TimeDependentOperator needs at least one term")

    @property
    def dim(self) -> int:
        return self.terms[0][0].shape[0]

    def evaluate(self, t: float) -> np.ndarray:
        out = np.zeros_like(self.terms[0][0])
        for m, w in self.terms:
            phase = np.exp(1j * w * t)
            out += phase * m + np.conj(phase) * m.conj().T
        return out


def _require_kinds(space: HilbertSpace, kinds: Sequence[str], what: str):
    actual = tuple(s.kind for s in space.subsystems)
    if actual != tuple(kinds):
        raise ShapeError(f"{what} expects subsystem kinds {tuple(kinds)}, "
                         f"got {actual}")


def build_H_lab(p: ModelParams, space: HilbertSpace
                ) -> tuple[np.ndarray, np.ndarray]:
    """Rotating-frame Hamiltonian pair on spin x mode a x mode b.

    H0 = (omega_z/2) sigma_z + delta b+b + (Omega1/2)(a + a+)
         + (Omega2/2)(b + b+)
    H1 = [g a+a + g b+b + g (a+b + b+a)] sigma_x
    """
    _require_kinds(space, ("qubit", "boson", "boson"), "build_H_lab")
    ops = qubit_ops()
    sz = embed(ops.sigma_z, 0, space)
    sx = embed(ops.sigma_x, 0, space)
    a = embed(annihilation(space.subsystems[1].n_max), 1, space)
    b = embed(annihilation(space.subsystems[2].n_max), 2, space)
    ad, bd = a.conj().T, b.conj().T
    h0 = (0.5 * p.omega_z * sz + p.delta * (bd @ b)
          + 0.5 * p.Omega1 * (a + ad) + 0.5 * p.Omega2 * (b + bd))
    h1 = p.g * (ad @ a + bd @ b + ad @ b + bd @ a) @ sx
    return h0, h1


def build_H_displaced_free(p: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Free part after displacing to the steady state: (omega_z/2) sigma_z
    + delta b+b (mode a sits at zero frequency in this frame)."""
    _require_kinds(space, ("qubit", "boson", "boson"),
                   "build_H_displaced_free")
    ops = qubit_ops()
    sz = embed(ops.sigma_z, 0, space)
    b = embed(annihilation(space.subsystems[2].n_max), 2, space)
    return 0.5 * p.omega_z * sz + p.delta * (b.conj().T @ b)


def build_H_displaced(p: ModelParams, space: HilbertSpace,
                      beta: complex | None = None) -> np.ndarray:
    """Interaction after a -> a + alpha, b -> b + beta, constants retained.

    H1 = g [(a+ + alpha*)(a + alpha) + (b+ + beta*)(b + beta)
            + (a+ + alpha*)(b + beta) + (b+ + beta*)(a + alpha)] sigma_x

    beta defaults to the exact steady-state value.
    """
    _require_kinds(space, ("qubit", "boson", "boson"), "build_H_displaced")
    alpha = p.require_alpha()
    if beta is None:
        beta = steady_state_amplitudes(p).beta
    sx = embed(qubit_ops().sigma_x, 0, space)
    eye = np.eye(space.dim, dtype=np.complex128)
    a = embed(annihilation(space.subsystems[1].n_max), 1, space)
    b = embed(annihilation(space.subsystems[2].n_max), 2, space)
    a_shift = a + alpha * eye
    b_shift = b + beta * eye
    ad_shift = a.conj().T + np.conj(alpha) * eye
    bd_shift = b.conj().T + np.conj(beta) * eye
    coupling = (ad_shift @ a_shift + bd_shift @ b_shift
                + ad_shift @ b_shift + bd_shift @ a_shift)
    return p.g * coupling @ sx


def build_H_displaced_classical_pump(p: ModelParams, space: HilbertSpace,
                                     beta: complex | None = None) -> np.ndarray:
    """Displaced interaction with the pump mode kept as its c-number.

    Same expansion as build_H_displaced but with the residual quantum
    fluctuation of the driven mode dropped (a -> alpha exactly), leaving a
    spin x mode-b operator:

    H = g [|alpha|^2 + (b+ + beta*)(b + beta)
           + alpha*(b + beta) + alpha (b+ + beta*)] sigma_x

    This retains every term the rotating-wave step actually discards
    (counter-rotating exchange, the c-number sigma_x drive, the beta
    terms), so it is the right reference for validating the reduction at
    scaled parameters, where keeping the pump quantized would add a
    spurious resonant |1_a, 0_b, e> channel of relative weight 1/|alpha|
    that is negligible only at the physical |alpha|.
    """
    _require_kinds(space, ("qubit", "boson"), "build_H_displaced_classical_pump")
    alpha = p.require_alpha()
    if beta is None:
        beta = steady_state_amplitudes(p).beta
    sx = embed(qubit_ops().sigma_x, 0, space)
    eye = np.eye(space.dim, dtype=np.complex128)
    b = embed(annihilation(space.subsystems[1].n_max), 1, space)
    b_shift = b + beta * eye
    bd_shift = b.conj().T + np.conj(beta) * eye
    coupling = (abs(alpha) ** 2 * eye + bd_shift @ b_shift
                + np.conj(alpha) * b_shift + alpha * bd_shift)
    return p.g * coupling @ sx


def build_H_effective_JC(p: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Excitation-conserving exchange on spin x mode b:
    H = g (alpha* b sigma+ + alpha b+ sigma-)."""
    _require_kinds(space, ("qubit", "boson"), "build_H_effective_JC")
    alpha = p.require_alpha()
    ops = qubit_ops()
    sp = embed(ops.sigma_plus, 0, space)
    sm = embed(ops.sigma_minus, 0, space)
    b = embed(annihilation(space.subsystems[1].n_max), 1, space)
    return p.g * (np.conj(alpha) * (b @ sp) + alpha * (b.conj().T @ sm))


def build_H_ensemble(p: ModelParams, space: HilbertSpace) -> np.ndarray:
    """Collective exchange for N spins and one mode (mode listed last):
    H = g (alpha* b J+ + alpha b+ J-)."""
    kinds = tuple(s.kind for s in space.subsystems)
    n_spins = len(kinds) - 1
    if kinds != ("qubit",) * n_spins + ("boson",) or n_spins < 1:
        raise ShapeError("build_H_ensemble expects N qubits followed by one "
                         f"boson mode, got kinds {kinds}")
    if n_spins > MAX_DENSE_SPINS:
        raise CapacityError(
            f"{n_spins} spins exceed the dense-path limit of "
            f"{MAX_DENSE_SPINS}; use the analytic collective-state formula "
            "(observables.oracle_ensemble_state) instead")
    alpha = p.require_alpha()
    j_plus = collective_raising(space, list(range(n_spins)))
    b = embed(annihilation(space.subsystems[-1].n_max), n_spins, space)
    return p.g * (np.conj(alpha) * (b @ j_plus)
                  + alpha * (b.conj().T @ j_plus.conj().T))


def build_H_squeeze_full(p: ModelParams, space: HilbertSpace,
                         couplings: Mapping[str, float] | None = None
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Three-mode Hamiltonian pair on spin x a x b x c.

    H_S0 = (omega_z/2) sigma_z + delta b+b - delta c+c
           + (Omega1/2)(a + a+) + (Omega2/2)(b + b+) + (Omega2/2)(c + c+)
    H_S1 = [g_a a+a + g_b b+b + g_c c+c + g_ab (a+b + b+a)
            + g_ac (a+c + c+a) + g_bc (b+c + c+b)] sigma_x

    ``couplings`` optionally overrides individual g coefficients by key
    ('a', 'b', 'c', 'ab', 'ac', 'bc'); everything defaults to p.g.
    """
    _require_kinds(space, ("qubit", "boson", "boson", "boson"),
                   "build_H_squeeze_full")
    gmap = {k: p.g for k in ("a", "b", "c", "ab", "ac", "bc")}
    if couplings:
        unknown = set(couplings) - set(gmap)
        if unknown:
            raise ParameterError(f"unknown coupling keys {sorted(unknown)}")
        gmap.update(couplings)
    ops = qubit_ops()
    sz = embed(ops.sigma_z, 0, space)
    sx = embed(ops.sigma_x, 0, space)
    a = embed(annihilation(space.subsystems[1].n_max), 1, space)
    b = embed(annihilation(space.subsystems[2].n_max), 2, space)
    c = embed(annihilation(space.subsystems[3].n_max), 3, space)
    ad, bd, cd = a.conj().T, b.conj().T, c.conj().T
    h0 = (0.5 * p.omega_z * sz + p.delta * (bd @ b) - p.delta * (cd @ c)
          + 0.5 * p.Omega1 * (a + ad) + 0.5 * p.Omega2 * (b + bd)
          + 0.5 * p.Omega2 * (c + cd))
    h1 = (gmap["a"] * (ad @ a) + gmap["b"] * (bd @ b) + gmap["c"] * (cd @ c)
          + gmap["ab"] * (ad @ b + bd @ a)
          + gmap["ac"] * (ad @ c + cd @ a)
          + gmap["bc"] * (bd @ c + cd @ b)) @ sx
    return h0, h1


def build_H_SI(p: ModelParams, space: HilbertSpace) -> TimeDependentOperator:
    """Slow interaction on spin x b x c after the rotating-frame reduction:

    H(t) = g alpha* (b + c+) sigma+ e^{i omega t} + h.c.,
    omega = omega_z - delta.
    """
    _require_kinds(space, ("qubit", "boson", "boson"), "build_H_SI")
    alpha = p.require_alpha()
    sp = embed(qubit_ops().sigma_plus, 0, space)
    b = embed(annihilation(space.subsystems[1].n_max), 1, space)
    c = embed(annihilation(space.subsystems[2].n_max), 2, space)
    m = p.g * np.conj(alpha) * ((b + c.conj().T) @ sp)
    return TimeDependentOperator([(m, p.omega_eff)])


def squeeze_eta(p: ModelParams, s_z: float = 1.0) -> float:
    """Effective squeezing strength eta = |alpha|^2 g^2 <sigma_z> / omega.

    The spin is held in its excited state during squeezing, so <sigma_z>
    enters as the scalar s_z = +1 by default and the spin drops out of the
    two-mode dynamics.
    """
    omega = p.omega_eff
    if omega == 0:
        raise ParameterError("omega = omega_z - delta vanishes; the "
                             "squeezing reduction is singular on resonance")
    return abs(p.require_alpha()) ** 2 * p.g ** 2 * s_z / omega


def build_H_squeeze_eff(p: ModelParams, space: HilbertSpace,
                        s_z: float = 1.0) -> np.ndarray:
    """Two-mode squeezing generator on b x c:
    H = eta (b+b + c+c + bc + c+b+)."""
    _require_kinds(space, ("boson", "boson"), "build_H_squeeze_eff")
    eta = squeeze_eta(p, s_z=s_z)
    b = embed(annihilation(space.subsystems[0].n_max), 0, space)
    c = embed(annihilation(space.subsystems[1].n_max), 1, space)
    bd, cd = b.conj().T, c.conj().T
    return eta * (bd @ b + cd @ c + b @ c + cd @ bd)


class CollectiveModeOps(NamedTuple):
    d: np.ndarray
    d_dag: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def collective_mode_ops(space: HilbertSpace,
                        delta_phase: float) -> CollectiveModeOps:
    """Collective mode d = (b + e^{-i delta} c)/sqrt(2) and its quadratures
    d1 = (d + d+)/2, d2 = (d - d+)/(2i)."""
    _require_kinds(space, ("boson", "boson"), "collective_mode_ops")
    b = embed(annihilation(space.subsystems[0].n_max), 0, space)
    c = embed(annihilation(space.subsystems[1].n_max), 1, space)
    d = (b + np.exp(-1j * delta_phase) * c) / np.sqrt(2.0)
    d_dag = d.conj().T.copy()
    d1 = 0.5 * (d + d_dag)
    d2 = (d - d_dag) / 2j
    return CollectiveModeOps(d, d_dag, d1, d2)
