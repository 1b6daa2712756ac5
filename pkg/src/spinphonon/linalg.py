"""Dense complex matrix layer.

Matrices are plain ``numpy.ndarray`` objects with dtype complex128 and
row-major layout; that array *is* the matrix type used everywhere in this
package (operators, states, density matrices). This module provides the
contract-checked operations on them and the one central record of
numerical tolerances.

Hermitian eigenvalues dispatch to the active kernel backend: a cyclic
Jacobi solver in the compiled lane, LAPACK in the pure lane. Sizes in this
package stay below ~300, so dense is always fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backends
from .errors import NonHermitianError, ShapeError


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances; all comparisons are relative unless noted."""

    hermiticity: float = 1e-12        # max|M - M^+| <= hermiticity * max|M|
    eig: float = 1e-9                 # eigenvalue accuracy vs matrix norm
    density_hermiticity: float = 1e-10
    density_trace: float = 1e-8       # absolute, |tr(rho) - 1|
    density_min_eig: float = 1e-7     # absolute floor on negative eigenvalues
    state_norm: float = 1e-9          # absolute, | ||psi|| - 1 |
    trace_record: float = 1e-6        # absolute trace deviation at record points
    trace_fail: float = 1e-4          # absolute trace deviation aborting a run
    psd_warn: float = 1e-5            # absolute eigenvalue floor, warn below
    psd_fail: float = 1e-3            # absolute eigenvalue floor, abort below
    norm_drift: float = 1e-8          # per-step norm drift in pure evolution


DEFAULT_TOL = Tolerances()


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a 2-D complex128 array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    require_finite(m)
    return m


def require_finite(a: np.ndarray) -> None:
    """Reject arrays containing NaN or Inf."""
    if not np.all(np.isfinite(a.view(np.float64) if a.dtype == np.complex128
                              else a)):
        raise ValueError("matrix contains non-finite entries")


def hermiticity_defect(a: np.ndarray) -> float:
    """max|M - M^+| relative to max|M| (0 for the zero matrix)."""
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)) / scale)


def is_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL.hermiticity) -> bool:
    return a.shape[0] == a.shape[1] and hermiticity_defect(a) <= tol


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with an explicit shape check."""
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, "
                         f"{a.shape} x {b.shape}")
    return a @ b


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T.copy()


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (a kron b)[ip+k, jq+l] = a[i,j] b[k,l]."""
    return np.kron(a, b)


def trace(a: np.ndarray) -> complex:
    """Sum of diagonal entries; matrix must be square."""
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"trace of non-square matrix {a.shape}")
    return complex(np.trace(a))


def hermitian_eigenvalues(a: np.ndarray,
                          tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending.

    Raises NonHermitianError when the input violates the Hermiticity
    contract (relative defect above ``tol.hermiticity``, with a small
    allowance since callers hold exactly symmetrized matrices).
    """
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"eigenvalues of non-square matrix {a.shape}")
    if hermiticity_defect(a) > 10 * tol.hermiticity:
        raise NonHermitianError(
            f"matrix is not Hermitian (relative defect "
            f"{hermiticity_defect(a):.3e})")
    return _backends.active.eigvalsh_ascending(
        np.ascontiguousarray(a, dtype=np.complex128))


def min_eigenvalue_at_least(a: np.ndarray, floor: float) -> bool:
    """Cheap certificate that Hermitian ``a`` has no eigenvalue below -floor."""
    return _backends.active.min_eig_at_least(
        np.ascontiguousarray(a, dtype=np.complex128), float(floor))
