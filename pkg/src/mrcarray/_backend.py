"""Select the sweep kernel: compiled extension if importable, else numpy.

Set ``MRCARRAY_PURE_PYTHON=1`` to force the fallback.
"""

import os

from mrcarray import _sweep_kernel_py

KERNELS = {"python": _sweep_kernel_py.solve_unit_drive}

try:
    from mrcarray import _sweep_kernel
except ImportError:  # extension not built
    pass
else:
    KERNELS["cython"] = _sweep_kernel.solve_unit_drive

if os.environ.get("MRCARRAY_PURE_PYTHON") or "cython" not in KERNELS:
    BACKEND = "python"
else:
    BACKEND = "cython"


def get_kernel(name=None):
    """Return the kernel called ``name`` (default: the selected back-end)."""
    return KERNELS[name or BACKEND]
