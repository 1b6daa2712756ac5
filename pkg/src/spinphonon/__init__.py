"""spinphonon: open-system simulator for a driven mechanical oscillator
coupled to NV-center spins through a quadratic magnetic-gradient coupling.

Subpackages follow the pipeline: `linalg` (dense complex matrices),
`hilbert` (spaces, operators, states), `models` (Hamiltonians and steady
amplitudes), `dynamics` (Lindblad/pure propagation), `observables`
(negativity, fidelity, squeezing variance), `runner` (scenarios, sweeps,
CSV output). Hot kernels run on a compiled core when built, with a pure
NumPy fallback selected at import (see `spinphonon._backends.BACKEND`).
"""

from ._backends import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
