"""Hot counting kernels: compiled backend when available, numpy fallback otherwise.

Set HRV_PURE_PYTHON=1 to force the fallback.  Both backends implement the
same strict left-fold arithmetic, so estimates are identical bit for bit
whichever one is active; tests and the benchmark compare them directly via
available_backends().
"""

from __future__ import annotations

import os

from . import _npkernels

_impl = _npkernels
BACKEND = "numpy"

if os.environ.get("HRV_PURE_PYTHON", "") != "1":
    try:
        from . import _ckernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

rect_hits = _impl.rect_hits
sum_tail_hits = _impl.sum_tail_hits
ordered_rect_hits = _impl.ordered_rect_hits
jumpset_hits = _impl.jumpset_hits
smalljump_sup_hits = _impl.smalljump_sup_hits


def available_backends() -> dict:
    """All importable backends by name, for cross-checks and benchmarks."""
    backends = {"numpy": _npkernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        backends["compiled"] = _ckernels
    return backends
