"""Hot numeric kernels with a numba-jitted lane and a pure-numpy fallback.

The backend is chosen once at import time:

* ``ADR_SPLIT_NUMBA=0`` (or ``off``/``false``/``no``) forces the numpy lane;
* ``ADR_SPLIT_NUMBA=1`` (or ``on``/``true``/``yes``) requires numba and fails
  loudly when it cannot be imported;
* unset (or ``auto``): numba when importable, numpy otherwise.

Both lanes implement identical arithmetic, so solver output does not depend
on the backend; see ``benchmarks/bench_kernels.py`` for the speed comparison.
"""

from __future__ import annotations

import logging
import os

_log = logging.getLogger(__name__)

_ENV_VAR = "ADR_SPLIT_NUMBA"
_OFF = ("0", "off", "false", "no")
_ON = ("1", "on", "true", "yes")


def _load_backend():
    flag = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if flag in _OFF:
        from . import _numpy as impl

        return impl, "numpy"
    try:
        from . import _numba as impl

        return impl, "numba"
    except ImportError:
        if flag in _ON:
            raise ImportError(
                f"{_ENV_VAR}={flag} requires numba, which is not importable; "
                "install the 'accel' extra or unset the flag"
            )
        _log.info("numba not importable; using the pure-numpy kernel lane")
        from . import _numpy as impl

        return impl, "numpy"


_impl, BACKEND = _load_backend()

thomas = _impl.thomas
record_crossings = _impl.record_crossings
record_crossings_batch = _impl.record_crossings_batch
grid_node_values = _impl.grid_node_values
bilinear_sample = _impl.bilinear_sample


def available_backends():
    """Names of importable kernel backends ('numpy' always; 'numba' if present)."""
    names = ["numpy"]
    try:
        import numba  # noqa: F401

        names.append("numba")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Import a backend module by name (used by tests and the benchmark)."""
    if name == "numpy":
        from . import _numpy as impl
    elif name == "numba":
        from . import _numba as impl
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    return impl
