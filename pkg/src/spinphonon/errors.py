"""Exception taxonomy shared across the package.

Every error the library raises deliberately derives from SpinPhononError,
so callers (notably the CLI) can map failures to exit codes without
catching bare ValueError/RuntimeError from third-party code.
"""


class SpinPhononError(Exception):
    """Base class for all deliberate errors raised by this package."""


class ShapeError(SpinPhononError, ValueError):
    """Operand dimensions are incompatible with the requested operation."""


class ParameterError(SpinPhononError, ValueError):
    """A physical or numerical parameter violates its precondition."""


class NonHermitianError(SpinPhononError, ValueError):
    """An operation requiring a Hermitian matrix received a non-Hermitian one."""


class CapacityError(SpinPhononError, ValueError):
    """Requested problem size exceeds what the dense solver supports."""


class IntegratorError(SpinPhononError, RuntimeError):
    """Time stepping became unstable (trace drift, NaN, or negativity blow-up)."""


class TruncationGuardError(SpinPhononError, RuntimeError):
    """Fock-space truncation absorbed too much population; result rejected."""


class ConfigError(SpinPhononError, ValueError):
    """Scenario configuration is missing, malformed, or inconsistent."""


class PositivityWarning(UserWarning):
    """A propagated density matrix dipped mildly below positivity."""


class TruncationWarning(UserWarning):
    """Noticeable population is accumulating at the Fock-space cutoff."""
