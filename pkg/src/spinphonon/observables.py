"""Measurement layer: negativity, fidelity, quadrature variances, and the
closed-form reference states/curves the simulations are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import linalg
from .errors import ParameterError, ShapeError
from .hilbert import DensityMatrix, HilbertSpace, StateVector
from .models import collective_mode_ops


@dataclass(frozen=True)
class BipartiteSplit:
    """A bipartition of a HilbertSpace; part_A is the transposed party."""

    space: HilbertSpace
    part_A: frozenset[int]

    def __init__(self, space: HilbertSpace, part_A: Iterable[int]):
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "part_A", frozenset(part_A))
        k = len(space)
        if not self.part_A:
            raise ParameterError("part_A must be non-empty")
        if not all(0 <= i < k for i in self.part_A):
            raise ParameterError("part_A contains an invalid subsystem index")
        if len(self.part_A) == k:
            raise ParameterError("part_A must be a proper subset")


def _matrix_of(state) -> np.ndarray:
    return state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)


def partial_transpose(rho: DensityMatrix | np.ndarray,
                      split: BipartiteSplit) -> np.ndarray:
    """Transpose the indices of the part_A subsystems.

    Element-wise: (rho^T_A)[m mu, n nu] = rho[n mu, m nu] with m, n the
    part-A indices. Hermiticity and trace are preserved.
    """
    r = _matrix_of(rho)
    dims = split.space.dims
    if r.shape != (split.space.dim, split.space.dim):
        raise ShapeError(f"density matrix shape {r.shape} does not match "
                         f"split space dim {split.space.dim}")
    k = len(dims)
    tensor = r.reshape(dims + dims)
    perm = list(range(2 * k))
    for i in split.part_A:
        perm[i], perm[k + i] = k + i, i
    return np.ascontiguousarray(tensor.transpose(perm).reshape(r.shape))


def negativity(rho: DensityMatrix | np.ndarray, split: BipartiteSplit) -> float:
    """(||rho^T_A||_1 - 1)/2, using that the partial transpose is Hermitian
    so its trace norm is the sum of absolute eigenvalues."""
    pt = partial_transpose(rho, split)
    eigs = linalg.hermitian_eigenvalues(pt)
    value = 0.5 * (float(np.sum(np.abs(eigs))) - 1.0)
    if -1e-12 < value < 0.0:
        value = 0.0
    return value


def fidelity_pure(target: StateVector, rho: DensityMatrix | np.ndarray) -> float:
    """F = sqrt(<psi| rho |psi>) between a pure target and a mixed state."""
    r = _matrix_of(rho)
    psi = target.amplitudes
    if r.shape != (psi.size, psi.size):
        raise ShapeError(f"state dim {psi.size} does not match matrix shape "
                         f"{r.shape}")
    overlap = np.vdot(psi, r @ psi).real
    return math.sqrt(max(overlap, 0.0))


def expectation(state, op: np.ndarray) -> complex:
    """tr(rho O) for a density matrix or <psi|O|psi> for a state vector."""
    if isinstance(state, StateVector):
        arr = state.amplitudes
    elif isinstance(state, DensityMatrix):
        arr = state.matrix
    else:
        arr = np.asarray(state)
    if arr.ndim == 1:
        if op.shape != (arr.size, arr.size):
            raise ShapeError("operator shape does not match state")
        return complex(np.vdot(arr, op @ arr))
    if arr.shape != op.shape:
        raise ShapeError("operator shape does not match density matrix")
    return complex(np.einsum("ij,ji->", arr, op))


def d1_variance(rho: DensityMatrix | np.ndarray, delta_phase: float,
                space: HilbertSpace | None = None) -> tuple[float, float]:
    """(<d1^2>, <d1^2> - <d1>^2) of the collective quadrature on b x c.

    For evolutions seeded with zero-mean states <d1> stays 0 and the two
    numbers coincide.
    """
    if isinstance(rho, DensityMatrix):
        space = rho.space
    elif space is None:
        raise ParameterError("space required when passing a bare matrix")
    ops = collective_mode_ops(space, delta_phase)
    d1_sq_op = ops.d1 @ ops.d1
    mean = expectation(rho, ops.d1).real
    mean_sq = expectation(rho, d1_sq_op).real
    return mean_sq, mean_sq - mean * mean


def boundary_population(rho: DensityMatrix | np.ndarray,
                        space: HilbertSpace | None = None) -> float:
    """Total population sitting at the top Fock level of any boson mode.

    Used as the truncation guard: results with a noticeable boundary
    population are artifacts of the cutoff.
    """
    if isinstance(rho, DensityMatrix):
        space = rho.space
    elif space is None:
        raise ParameterError("space required when passing a bare matrix")
    r = _matrix_of(rho)
    populations = np.diag(r).real.reshape(space.dims)
    total = 0.0
    for axis, sub in enumerate(space.subsystems):
        if sub.kind != "boson":
            continue
        total += float(np.take(populations, -1, axis=axis).sum())
    return total


# ------------------------------------------------------- closed-form oracles

def oracle_jc_state(t: float, g_alpha: float,
                    space: HilbertSpace) -> StateVector:
    """Exchange-oscillation state -sin(g|a| t)|1,g> + cos(g|a| t)|0,e>
    on a (qubit, boson) space."""
    kinds = tuple(s.kind for s in space.subsystems)
    if kinds != ("qubit", "boson"):
        raise ShapeError(f"oracle_jc_state expects (qubit, boson), got {kinds}")
    amps = np.zeros(space.dim, dtype=np.complex128)
    phase = g_alpha * t
    amps[space.flatten((0, 0))] = math.cos(phase)   # |e, 0>
    amps[space.flatten((1, 1))] = -math.sin(phase)  # |g, 1>
    return StateVector(space, amps)


def oracle_ensemble_state(t: float, g_alpha: float, n_spins: int,
                          space: HilbertSpace) -> StateVector:
    """Collective exchange state for N spins sharing one excitation:

    -sin(g|a| sqrt(N) t) |all spins g; 1 phonon>
    + cos(g|a| sqrt(N) t) |symmetric one-excitation spin state; 0 phonons>

    Reduces to oracle_jc_state for N = 1.
    """
    if n_spins < 1:
        raise ParameterError("n_spins must be >= 1")
    kinds = tuple(s.kind for s in space.subsystems)
    if kinds != ("qubit",) * n_spins + ("boson",):
        raise ShapeError("oracle_ensemble_state expects N qubits followed by "
                         f"one boson, got kinds {kinds}")
    amps = np.zeros(space.dim, dtype=np.complex128)
    phase = g_alpha * math.sqrt(n_spins) * t
    all_g = [1] * n_spins
    amps[space.flatten(all_g + [1])] = -math.sin(phase)
    w_amp = math.cos(phase) / math.sqrt(n_spins)
    for i in range(n_spins):
        labels = list(all_g)
        labels[i] = 0  # spin i excited
        amps[space.flatten(labels + [0])] = w_amp
    return StateVector(space, amps)


def d1_sq_lossless(xi: float, delta_phase: float, n_init: float = 0.0) -> float:
    """Closed-form <d1^2> under the lossless squeezing generator:

    (1 + 2 n_init) * (1 + 2(1 - cos delta) xi^2 - 2 sin(delta) xi) / 4

    with xi the dimensionless squeezing time. The (1 + 2 n_init) factor is
    the usual thermal scaling of a quadratic form in mode operators.
    """
    base = (1.0 + 2.0 * (1.0 - math.cos(delta_phase)) * xi * xi
            - 2.0 * math.sin(delta_phase) * xi) / 4.0
    return (1.0 + 2.0 * n_init) * base


def oracle_d1_min(delta_phase: float) -> tuple[float, float]:
    """Stationary point of the lossless <d1^2>(xi) curve:

    xi* = sin(delta) / (2 (1 - cos delta)), minimum (1 - cos delta)/8.

    Degenerate as delta -> 0 (xi* diverges, any finite Fock cutoff is
    invalid there), so delta must lie strictly inside (0, 2 pi).
    """
    if not 0.0 < delta_phase < 2.0 * math.pi:
        raise ParameterError("delta_phase must lie strictly inside (0, 2 pi); "
                             "the minimum is degenerate at 0")
    one_minus_cos = 1.0 - math.cos(delta_phase)
    xi_star = math.sin(delta_phase) / (2.0 * one_minus_cos)
    return xi_star, one_minus_cos / 8.0
