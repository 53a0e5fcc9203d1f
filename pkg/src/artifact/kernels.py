"""Backend selection for the closure kernel.

The compiled extension is used when it was built; otherwise the pure-Python
implementation with the same contract is used. Set ARTIFACT_PURE_PYTHON=1 to
force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
bfs_closure = _kernels_py.bfs_closure

if not os.environ.get("ARTIFACT_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        bfs_closure = _compiled.bfs_closure
        BACKEND = "cython"

python_bfs_closure = _kernels_py.bfs_closure
