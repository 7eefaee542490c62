"""Backend selection for the hot window-energy kernels.

The compiled ``_core`` extension is used when it was built; otherwise the
NumPy implementation in ``_core_py`` is used. Setting
``DISSIPATOR_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _core_py

window_energy_py = _core_py.window_energy
interval_lower_py = _core_py.interval_lower

try:
    if os.environ.get("DISSIPATOR_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from ._core import interval_lower as interval_lower_c
    from ._core import window_energy as window_energy_c
except ImportError:
    window_energy_c = interval_lower_c = None

if window_energy_c is not None:
    BACKEND = "cython"
    window_energy = window_energy_c
    interval_lower = interval_lower_c
else:
    BACKEND = "python"
    window_energy = window_energy_py
    interval_lower = interval_lower_py
