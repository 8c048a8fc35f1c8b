"""Backend dispatch for the hot mask kernels.

The environment flag ``BODYSHAPE_KERNELS`` selects the implementation:

* ``auto`` (default) - numba JIT kernels when numba imports, else numpy
* ``numba``          - force the JIT kernels, error if numba is missing
* ``numpy``          - force the pure-numpy fallback

Both implementations share contracts and are differentially tested against
each other (and scipy.ndimage) in the test suite.
"""

import os
import warnings

_FLAG = os.environ.get("BODYSHAPE_KERNELS", "auto").strip().lower()
if _FLAG not in {"auto", "numba", "numpy"}:
    warnings.warn(
        f"BODYSHAPE_KERNELS={_FLAG!r} not recognized; using 'auto'",
        RuntimeWarning,
        stacklevel=2,
    )
    _FLAG = "auto"

if _FLAG == "numpy":
    from bodyshape.kernels import numpy_impl as _impl

    ACTIVE_BACKEND = "numpy"
else:
    try:
        from bodyshape.kernels import numba_impl as _impl

        ACTIVE_BACKEND = "numba"
    except ImportError:
        if _FLAG == "numba":
            raise
        warnings.warn(
            "numba unavailable; falling back to pure-numpy mask kernels",
            RuntimeWarning,
            stacklevel=2,
        )
        from bodyshape.kernels import numpy_impl as _impl

        ACTIVE_BACKEND = "numpy"

label_components = _impl.label_components
fill_holes = _impl.fill_holes
central_run = _impl.central_run


def get_impl(name):
    """Fetch a specific implementation module ('numba' or 'numpy').

    Used by the differential tests and the benchmark; normal code goes
    through the module-level functions above.
    """
    if name == "numpy":
        from bodyshape.kernels import numpy_impl

        return numpy_impl
    if name == "numba":
        from bodyshape.kernels import numba_impl

        return numba_impl
    raise ValueError(f"unknown kernel backend {name!r}")
