"""Hot crossbar kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it imports; set ``RRAMVMM_BACKEND=python``
to force the fallback.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


def _select():
    requested = os.environ.get("RRAMVMM_BACKEND", "").strip().lower()
    if requested:
        if requested not in BACKENDS:
            raise ImportError(f"kernel backend {requested!r} is not available")
        return requested
    return "cython" if "cython" in BACKENDS else "python"


BACKEND = _select()
_impl = BACKENDS[BACKEND]


def get_backend(name=None):
    return _impl if name is None else BACKENDS[name]


def program(*args, backend=None):
    return get_backend(backend).program(*args)


def simulate(*args, backend=None):
    return get_backend(backend).simulate(*args)


column_sum = _pykernels.column_sum


def em_step(x, w, m, s, backend=None):
    return get_backend(backend).em_step(x, w, m, s)
