"""Pick the compiled kernels when available, else the pure-Python ones.

Set ``EPIBOUND_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

NAME = "python"
first_passage_batch = _pykernels.first_passage_batch
sis_advance = _pykernels.sis_advance

if os.environ.get("EPIBOUND_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        NAME = "cython"
        first_passage_batch = _kernels.first_passage_batch
        sis_advance = _kernels.sis_advance
