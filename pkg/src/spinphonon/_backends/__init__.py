"""Kernel backend selection.

The hot numerical kernels (Hermitian eigenvalues, positivity probe,
Lindblad RHS, RK4 propagators) exist in two interchangeable lanes: a
Cython extension (`_core`) and a pure NumPy module (`pure`). The compiled
lane is preferred when it is importable. Set SPINPHONON_BACKEND=pure or
=compiled to force the choice; forcing "compiled" raises if the extension
was never built.
"""

import os

from . import pure

_requested = os.environ.get("SPINPHONON_BACKEND", "").strip().lower()
if _requested not in ("", "pure", "compiled"):
    raise ValueError(f"SPINPHONON_BACKEND must be 'pure' or 'compiled', "
                     f"got {_requested!r}")

compiled = None
if _requested != "pure":
    try:
        from . import _core as compiled
    except ImportError as exc:
        compiled = None
        if _requested == "compiled":
            raise ImportError(
                "SPINPHONON_BACKEND=compiled but the extension is not "
                "available; build it with `python setup.py build_ext "
                "--inplace` or reinstall the package"
            ) from exc

active = compiled if compiled is not None else pure
BACKEND = active.NAME
