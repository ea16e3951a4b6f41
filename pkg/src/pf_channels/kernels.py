"""Backend selection for the combinatorial kernels.

The compiled extension ``pf_channels._kernels`` is used when it imports;
otherwise (or with ``PF_CHANNELS_PURE=1``) the pure-Python module is used.
``BACKEND`` names the active one.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("PF_CHANNELS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

first_extending_partition = _impl.first_extending_partition
find_separator = _impl.find_separator
