"""Composite Hilbert spaces, canonical operators, and initial states.

Basis conventions (fixed once, used everywhere):

* qubit basis order is (|e>, |g>), so sigma_z = diag(1, -1) and
  sigma_plus = |e><g| is the strictly upper matrix [[0, 1], [0, 0]];
* a boson with cutoff n_max has dimension n_max + 1, levels |0>..|n_max>;
* composite indices are row-major over the subsystem order of the
  HilbertSpace, i.e. the last listed subsystem varies fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import ParameterError, ShapeError

QUBIT_LABELS = {"e": 0, "g": 1}


@dataclass(frozen=True)
class SubsystemSpec:
    """One tensor factor: a qubit or a truncated boson mode."""

    kind: str
    n_max: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("qubit", "boson"):
            raise ParameterError(f"unknown subsystem kind {self.kind!r}")
        if self.kind == "boson" and (self.n_max is None or self.n_max < 1):
            raise ParameterError("boson subsystem requires n_max >= 1")
        if self.kind == "qubit" and self.n_max not in (None, 1):
            raise ParameterError("qubit dimension is fixed at 2")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "qubit" else self.n_max + 1


def qubit(label: str = "nv") -> SubsystemSpec:
    return SubsystemSpec("qubit", label=label)


def boson(n_max: int, label: str = "mode") -> SubsystemSpec:
    return SubsystemSpec("boson", n_max=n_max, label=label)


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of subsystems; owns the index bookkeeping."""

    subsystems: tuple[SubsystemSpec, ...]

    def __init__(self, subsystems: Sequence[SubsystemSpec]):
        object.__setattr__(self, "subsystems", tuple(subsystems))
        if not self.subsystems:
            raise ParameterError("HilbertSpace needs at least one subsystem")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.subsystems)

    def flatten(self, indices: Sequence[int]) -> int:
        """Composite index of a tuple of per-subsystem levels (row-major)."""
        if len(indices) != len(self.subsystems):
            raise ShapeError("index tuple length does not match subsystems")
        flat = 0
        for idx, d in zip(indices, self.dims):
            if not 0 <= idx < d:
                raise ParameterError(f"basis index {idx} out of range 0..{d-1}")
            flat = flat * d + idx
        return flat

    def unflatten(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.dim:
            raise ParameterError(f"composite index {flat} out of range")
        out = []
        for d in reversed(self.dims):
            out.append(flat % d)
            flat //= d
        return tuple(reversed(out))

    def qubit_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.subsystems) if s.kind == "qubit"]

    def boson_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.subsystems) if s.kind == "boson"]


@dataclass
class StateVector:
    """Normalized pure state on a HilbertSpace."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.space.dim,):
            raise ShapeError(f"amplitude vector has shape "
                             f"{self.amplitudes.shape}, expected "
                             f"({self.space.dim},)")
        linalg.require_finite(self.amplitudes)
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > linalg.DEFAULT_TOL.state_norm:
            raise ParameterError(f"state vector norm {norm} is not 1")

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes,
                                                  self.amplitudes.conj()))


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, (numerically) positive state on a space."""

    space: HilbertSpace
    matrix: np.ndarray
    check_positivity: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.matrix = linalg.as_cmatrix(self.matrix)
        d = self.space.dim
        if self.matrix.shape != (d, d):
            raise ShapeError(f"density matrix shape {self.matrix.shape} "
                             f"does not match space dim {d}")
        tol = linalg.DEFAULT_TOL
        if linalg.hermiticity_defect(self.matrix) > tol.density_hermiticity:
            raise ParameterError("density matrix is not Hermitian")
        tr = np.trace(self.matrix).real
        if abs(tr - 1.0) > tol.density_trace:
            raise ParameterError(f"density matrix trace {tr} is not 1")
        if self.check_positivity and not linalg.min_eigenvalue_at_least(
                self.matrix, tol.density_min_eig):
            raise ParameterError("density matrix has a significantly "
                                 "negative eigenvalue")


class QubitOps(NamedTuple):
    sigma_z: np.ndarray
    sigma_x: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray


def qubit_ops() -> QubitOps:
    """Pauli and ladder operators in the (|e>, |g>) basis order."""
    sigma_plus = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    sigma_minus = sigma_plus.conj().T
    sigma_z = np.diag([1.0, -1.0]).astype(np.complex128)
    sigma_x = sigma_plus + sigma_minus
    return QubitOps(sigma_z, sigma_x, sigma_plus, sigma_minus)


def annihilation(n_max: int) -> np.ndarray:
    """Truncated boson annihilation operator, <n-1|b|n> = sqrt(n)."""
    if n_max < 1:
        raise ParameterError("annihilation requires n_max >= 1")
    d = n_max + 1
    b = np.zeros((d, d), dtype=np.complex128)
    for n in range(1, d):
        b[n - 1, n] = np.sqrt(n)
    return b


def number_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1, dtype=np.float64)).astype(np.complex128)


def identity(space: HilbertSpace) -> np.ndarray:
    return np.eye(space.dim, dtype=np.complex128)


def embed(op: np.ndarray, index: int, space: HilbertSpace) -> np.ndarray:
    """Lift a single-subsystem operator to the composite space.

    Returns I x ... x op x ... x I with op at the given subsystem slot.
    """
    if not 0 <= index < len(space):
        raise ParameterError(f"subsystem index {index} out of range")
    d = space.dims[index]
    if op.shape != (d, d):
        raise ShapeError(f"operator shape {op.shape} does not match "
                         f"subsystem dim {d}")
    left = int(np.prod(space.dims[:index], initial=1))
    right = int(np.prod(space.dims[index + 1:], initial=1))
    out = np.kron(np.eye(left), np.kron(op, np.eye(right)))
    return np.ascontiguousarray(out, dtype=np.complex128)


def collective_raising(space: HilbertSpace,
                       qubit_indices: Sequence[int]) -> np.ndarray:
    """Sum of embedded sigma_plus over the listed qubit subsystems."""
    ops = qubit_ops()
    total = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for i in qubit_indices:
        if space.subsystems[i].kind != "qubit":
            raise ParameterError(f"subsystem {i} is not a qubit")
        total += embed(ops.sigma_plus, i, space)
    return total


def thermal_populations(n_mean: float, n_max: int) -> tuple[np.ndarray, float]:
    """Truncated Bose-Einstein weights and the truncation deficit 1 - Z.

    Weights are p_n = <n>^n / (1 + <n>)^(n+1), renormalized to sum to 1
    after the cutoff; the deficit reports how much the raw distribution
    lost to truncation.
    """
    if n_mean < 0:
        raise ParameterError("thermal occupation must be non-negative")
    n = np.arange(n_max + 1, dtype=np.float64)
    if n_mean == 0.0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p, 0.0
    log_p = n * np.log(n_mean) - (n + 1) * np.log(1.0 + n_mean)
    p = np.exp(log_p)
    z = p.sum()
    return p / z, float(1.0 - z)


def thermal_state(n_mean: float, n_max: int) -> DensityMatrix:
    """Single-mode thermal state on boson(n_max), renormalized after cutoff."""
    p, _ = thermal_populations(n_mean, n_max)
    space = HilbertSpace([boson(n_max)])
    return DensityMatrix(space, np.diag(p).astype(np.complex128))


def fock_state(n: int, n_max: int) -> StateVector:
    """Number state |n> of a single truncated mode."""
    if not 0 <= n <= n_max:
        raise ParameterError(f"Fock level {n} outside cutoff {n_max}")
    space = HilbertSpace([boson(n_max)])
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[n] = 1.0
    return StateVector(space, amps)


def basis_product_state(space: HilbertSpace, labels: Sequence) -> StateVector:
    """Product basis state from per-subsystem labels.

    Qubit labels are 'e'/'g'; boson labels are integer Fock levels.
    """
    if len(labels) != len(space):
        raise ShapeError("one label per subsystem required")
    indices = []
    for lab, sub in zip(labels, space.subsystems):
        if sub.kind == "qubit":
            if lab not in QUBIT_LABELS:
                raise ParameterError(f"qubit label must be 'e' or 'g', "
                                     f"got {lab!r}")
            indices.append(QUBIT_LABELS[lab])
        else:
            level = int(lab)
            if not 0 <= level <= sub.n_max:
                raise ParameterError(f"Fock level {level} outside cutoff "
                                     f"{sub.n_max}")
            indices.append(level)
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[space.flatten(indices)] = 1.0
    return StateVector(space, amps)


def tensor_density(space: HilbertSpace,
                   parts: Sequence[np.ndarray]) -> DensityMatrix:
    """Kronecker product of per-subsystem density matrices."""
    if len(parts) != len(space):
        raise ShapeError("one factor per subsystem required")
    out = np.array([[1.0 + 0j]])
    for part, sub in zip(parts, space.subsystems):
        if part.shape != (sub.dim, sub.dim):
            raise ShapeError(f"factor shape {part.shape} does not match "
                             f"subsystem dim {sub.dim}")
        out = np.kron(out, part)
    return DensityMatrix(space, out)
