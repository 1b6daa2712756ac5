"""Time evolution: Lindblad master equation and pure-state propagation.

Dissipator convention used throughout:

    rho_dot = -i [H, rho] + sum_k (rate_k / 2) L[c_k] rho,
    L[c] rho = 2 c rho c+ - c+c rho - rho c+c.

Note the factor: a LindbladTerm with rate r contributes (r/2) L[c], so the
coefficients printed in a master equation of the form
(gamma/2)(n+1) L[b] map to rate = gamma (n+1).

Integration is fixed-step classical RK4 (deterministic, no adaptivity);
density matrices are re-Hermitized after every step, pure states are
renormalized after every step. The inner loops run on the selected kernel
backend (compiled or pure NumPy).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import _backends, linalg
from .errors import (CapacityError, IntegratorError, ParameterError,
                     PositivityWarning, ShapeError)
from .hilbert import (DensityMatrix, HilbertSpace, StateVector, annihilation,
                      embed, qubit_ops)
from .models import MAX_DENSE_SPINS, ModelParams, TimeDependentOperator

Hamiltonian = Union[np.ndarray, TimeDependentOperator]
Observable = Union[np.ndarray, Callable[[float, np.ndarray], complex]]


@dataclass(frozen=True)
class LindbladTerm:
    """One collapse operator with its rate (convention above)."""

    collapse: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ParameterError(f"Lindblad rate must be >= 0, got {self.rate}")


@dataclass
class EvolutionSpec:
    """Everything one evolution run needs besides the initial state.

    observables maps a name either to a Hermitian operator (recorded as
    its expectation value) or to a callable f(t, state_array) -> value for
    derived quantities such as negativity.

    positivity_every counts recorded points between positivity probes
    (1 = every record point, 0 = only the final state).
    """

    hamiltonian: Hamiltonian
    terms: Sequence[LindbladTerm] = ()
    t_final: float = 1.0
    dt: float = 1e-3
    record_every: int = 1
    observables: Mapping[str, Observable] = field(default_factory=dict)
    positivity_every: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.t_final < 0:
            raise ParameterError("t_final must be >= 0")
        if self.record_every < 1:
            raise ParameterError("record_every must be >= 1")


@dataclass
class Trajectory:
    """Time-stamped observable records from one evolution run."""

    times: np.ndarray
    records: dict[str, np.ndarray]
    final_state: DensityMatrix | StateVector
    meta: dict

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0) and len(self.times) > 1:
            raise ParameterError("trajectory times must be strictly increasing")


def _split_hamiltonian(h: Hamiltonian, dim: int):
    """Return (h_static, ms, omegas) for the backend propagators."""
    if isinstance(h, TimeDependentOperator):
        if h.dim != dim:
            raise ShapeError(f"Hamiltonian dim {h.dim} != state dim {dim}")
        ms = [np.ascontiguousarray(m) for m, _ in h.terms]
        omegas = [w for _, w in h.terms]
        return np.zeros((dim, dim), dtype=np.complex128), ms, omegas
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if h.shape != (dim, dim):
        raise ShapeError(f"Hamiltonian shape {h.shape} != state dim {dim}")
    return h, [], []


def _prepare_terms(terms: Sequence[LindbladTerm], dim: int):
    cops, cdags, cdcs, rates = [], [], [], []
    for term in terms:
        if term.rate == 0.0:
            continue
        c = np.ascontiguousarray(term.collapse, dtype=np.complex128)
        if c.shape != (dim, dim):
            raise ShapeError(f"collapse operator shape {c.shape} != state "
                             f"dim {dim}")
        cops.append(c)
        cdags.append(np.ascontiguousarray(c.conj().T))
        cdcs.append(np.ascontiguousarray(c.conj().T @ c))
        rates.append(term.rate)
    return cops, cdags, cdcs, np.asarray(rates, dtype=np.float64)


def lindblad_rhs(rho: DensityMatrix | np.ndarray, h: np.ndarray,
                 terms: Sequence[LindbladTerm]) -> np.ndarray:
    """Right-hand side -i[H, rho] + sum (rate/2) L[c] rho as a matrix."""
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    r = np.ascontiguousarray(r, dtype=np.complex128)
    h_static, ms, _ = _split_hamiltonian(h, r.shape[0])
    if ms:
        raise ParameterError("lindblad_rhs takes a static Hamiltonian; "
                             "evaluate the time-dependent one first")
    cops, cdags, cdcs, rates = _prepare_terms(terms, r.shape[0])
    return _backends.active.lindblad_rhs(r, h_static, cops, cdags, cdcs, rates)


def _plan_steps(t_final: float, dt: float, multiple: int = 1
                ) -> tuple[int, float]:
    """Pick a step count near t_final/dt that is a multiple of `multiple`.

    Returns (n_steps, dt_eff) with n_steps * dt_eff == t_final exactly, so
    summary times such as the midpoint land on grid points.
    """
    if t_final == 0:
        return 0, dt
    raw = max(1, round(t_final / dt))
    n = max(multiple, multiple * round(raw / multiple))
    return n, t_final / n


def _evaluate_observables(observables, t, state_array, records):
    for name, obs in observables.items():
        if callable(obs):
            value = obs(t, state_array)
        elif state_array.ndim == 2:
            value = complex(np.einsum("ij,ji->", state_array, obs))
        else:
            value = complex(np.vdot(state_array, obs @ state_array))
        records.setdefault(name, []).append(value)


def evolve_master(rho0: DensityMatrix, spec: EvolutionSpec) -> Trajectory:
    """Propagate a density matrix and record observables.

    Raises IntegratorError when the trace drifts beyond the hard
    tolerance or an eigenvalue falls below the hard positivity floor;
    emits PositivityWarning for mild dips.
    """
    tol = linalg.DEFAULT_TOL
    rho = np.array(rho0.matrix, dtype=np.complex128, order="C", copy=True)
    dim = rho.shape[0]
    h_static, ms, omegas = _split_hamiltonian(spec.hamiltonian, dim)
    cops, cdags, cdcs, rates = _prepare_terms(spec.terms, dim)
    n_steps, dt_eff = _plan_steps(spec.t_final, spec.dt)

    times = [0.0]
    records: dict[str, list] = {}
    max_trace_dev = 0.0
    positivity_ok = True

    def checks(step_index, record_index, r):
        nonlocal max_trace_dev, positivity_ok
        dev = abs(np.trace(r).real - 1.0) + abs(np.trace(r).imag)
        if not dev <= tol.trace_fail:  # catches NaN as well
            raise IntegratorError(
                f"trace deviation {dev:.3e} at t={step_index * dt_eff:.6g} "
                f"exceeds {tol.trace_fail:.0e}; reduce dt")
        max_trace_dev = max(max_trace_dev, dev)
        probe = (spec.positivity_every > 0
                 and record_index % spec.positivity_every == 0)
        if probe or step_index == n_steps:
            if not linalg.min_eigenvalue_at_least(r, tol.psd_warn):
                if not linalg.min_eigenvalue_at_least(r, tol.psd_fail):
                    raise IntegratorError(
                        f"density matrix eigenvalue below -{tol.psd_fail:.0e} "
                        f"at t={step_index * dt_eff:.6g}; reduce dt")
                positivity_ok = False
                warnings.warn(
                    f"density matrix slightly non-positive at "
                    f"t={step_index * dt_eff:.6g}", PositivityWarning,
                    stacklevel=3)

    checks(0, 0, rho)
    records["trace_dev"] = [abs(np.trace(rho).real - 1.0)]
    _evaluate_observables(spec.observables, 0.0, rho, records)

    done = 0
    record_index = 0
    while done < n_steps:
        block = min(spec.record_every, n_steps - done)
        rho = _backends.active.propagate_master(
            rho, h_static, ms, omegas, cops, cdags, cdcs, rates,
            dt_eff, done * dt_eff, block)
        done += block
        record_index += 1
        t = done * dt_eff
        checks(done, record_index, rho)
        times.append(t)
        records["trace_dev"].append(abs(np.trace(rho).real - 1.0))
        _evaluate_observables(spec.observables, t, rho, records)

    final = DensityMatrix(rho0.space, rho)
    meta = {
        "backend": _backends.BACKEND,
        "n_steps": n_steps,
        "dt_eff": dt_eff,
        "max_trace_dev": max_trace_dev,
        "hermiticity_defect": linalg.hermiticity_defect(rho),
        "positivity_ok": positivity_ok,
    }
    return Trajectory(np.asarray(times), _as_arrays(records), final, meta)


def evolve_pure(psi0: StateVector, h: Hamiltonian, t_final: float, dt: float,
                record_every: int = 1,
                observables: Mapping[str, Observable] | None = None
                ) -> Trajectory:
    """Propagate a state vector under H(t) and record observables."""
    tol = linalg.DEFAULT_TOL
    psi = np.array(psi0.amplitudes, dtype=np.complex128, copy=True)
    dim = psi.shape[0]
    h_static, ms, omegas = _split_hamiltonian(h, dim)
    n_steps, dt_eff = _plan_steps(t_final, dt)
    observables = observables or {}

    times = [0.0]
    records: dict[str, list] = {}
    _evaluate_observables(observables, 0.0, psi, records)
    max_drift = 0.0

    done = 0
    while done < n_steps:
        block = min(record_every, n_steps - done)
        psi, drift = _backends.active.propagate_pure(
            psi, h_static, ms, omegas, dt_eff, done * dt_eff, block)
        if not drift <= 1e-3:
            raise IntegratorError(
                f"norm drift {drift:.3e} per step; reduce dt")
        if drift > tol.norm_drift:
            warnings.warn(f"per-step norm drift {drift:.2e} above "
                          f"{tol.norm_drift:.0e}", stacklevel=2)
        max_drift = max(max_drift, drift)
        done += block
        times.append(done * dt_eff)
        _evaluate_observables(observables, done * dt_eff, psi, records)

    final = StateVector(psi0.space, psi)
    meta = {
        "backend": _backends.BACKEND,
        "n_steps": n_steps,
        "dt_eff": dt_eff,
        "max_norm_drift": max_drift,
    }
    return Trajectory(np.asarray(times), _as_arrays(records), final, meta)


def _as_arrays(records: dict[str, list]) -> dict[str, np.ndarray]:
    out = {}
    for name, values in records.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr) and np.max(np.abs(arr.imag), initial=0) < 1e-10:
            arr = arr.real
        out[name] = arr
    return out


# ------------------------------------------------------------- bath terms

def bath_terms_single(p: ModelParams, space: HilbertSpace
                      ) -> list[LindbladTerm]:
    """Thermal decay/heating of mode b plus spin dephasing on spin x b:

    (gamma2/2)(n+1) L[b] + (gamma2/2) n L[b+] + (d/2) L[sigma_z]
    """
    kinds = tuple(s.kind for s in space.subsystems)
    if kinds != ("qubit", "boson"):
        raise ShapeError(f"bath_terms_single expects (qubit, boson), "
                         f"got {kinds}")
    b = embed(annihilation(space.subsystems[1].n_max), 1, space)
    sz = embed(qubit_ops().sigma_z, 0, space)
    terms = [
        LindbladTerm(b, p.gamma2 * (p.n_bath + 1.0)),
        LindbladTerm(b.conj().T.copy(), p.gamma2 * p.n_bath),
        LindbladTerm(sz, p.dephasing_rate),
    ]
    return [t for t in terms if t.rate > 0]


def bath_terms_ensemble(p: ModelParams, space: HilbertSpace
                        ) -> list[LindbladTerm]:
    """Mode terms as in bath_terms_single plus one individual sigma_z
    dephasing term per spin (the collective subspace is not preserved)."""
    kinds = tuple(s.kind for s in space.subsystems)
    n_spins = len(kinds) - 1
    if kinds != ("qubit",) * n_spins + ("boson",) or n_spins < 1:
        raise ShapeError("bath_terms_ensemble expects N qubits followed by "
                         f"one boson, got kinds {kinds}")
    if n_spins > MAX_DENSE_SPINS:
        raise CapacityError(f"{n_spins} spins exceed the dense-path limit "
                            f"of {MAX_DENSE_SPINS}")
    b = embed(annihilation(space.subsystems[-1].n_max), n_spins, space)
    sz = qubit_ops().sigma_z
    terms = [
        LindbladTerm(b, p.gamma2 * (p.n_bath + 1.0)),
        LindbladTerm(b.conj().T.copy(), p.gamma2 * p.n_bath),
    ]
    terms += [LindbladTerm(embed(sz, i, space), p.dephasing_rate)
              for i in range(n_spins)]
    return [t for t in terms if t.rate > 0]


def bath_terms_squeeze(p: ModelParams, space: HilbertSpace,
                       as_printed: bool = False) -> list[LindbladTerm]:
    """Thermal decay/heating pairs for modes b and c on the b x c space.

    The physical thermal bath heats through L[b+]/L[c+]; pass
    as_printed=True to reproduce the variant that applies L[b]/L[c] for
    the n-bar terms as well (useful only for comparison, it relaxes the
    modes to vacuum at an n-dependent rate instead of to n_bath).
    """
    kinds = tuple(s.kind for s in space.subsystems)
    if kinds != ("boson", "boson"):
        raise ShapeError(f"bath_terms_squeeze expects (boson, boson), "
                         f"got {kinds}")
    b = embed(annihilation(space.subsystems[0].n_max), 0, space)
    c = embed(annihilation(space.subsystems[1].n_max), 1, space)
    b_heat = b if as_printed else b.conj().T.copy()
    c_heat = c if as_printed else c.conj().T.copy()
    terms = [
        LindbladTerm(b, p.gamma2 * (p.n_bath + 1.0)),
        LindbladTerm(b_heat, p.gamma2 * p.n_bath),
        LindbladTerm(c, p.gamma3 * (p.n_bath + 1.0)),
        LindbladTerm(c_heat, p.gamma3 * p.n_bath),
    ]
    return [t for t in terms if t.rate > 0]
