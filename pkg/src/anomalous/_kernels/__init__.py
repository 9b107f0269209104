"""Hot exact kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it imports; otherwise the
pure-Python ``_pykernels`` is selected.  Callers look functions up through
this module (``_kernels.int_rank(...)``) so :func:`set_backend` takes effect
everywhere.
"""

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = ("cython", "python")

int_rank = int_det = hnf = tau_minor_rank = None
backend = None


def available_backends():
    return [b for b in BACKENDS if b != "cython" or _ckernels is not None]


def set_backend(name):
    """Select ``"cython"`` or ``"python"`` for every kernel; returns the previous name."""
    global int_rank, int_det, hnf, tau_minor_rank, backend
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        mod = _ckernels
    elif name == "python":
        mod = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    previous = backend
    int_rank = mod.int_rank
    int_det = mod.int_det
    hnf = mod.hnf
    tau_minor_rank = mod.tau_minor_rank
    backend = name
    return previous


set_backend("cython" if _ckernels is not None else "python")
