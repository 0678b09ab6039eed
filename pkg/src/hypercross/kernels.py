"""Backend selection for the hot loops.

The compiled ``_core`` extension is used when it was built; otherwise (or
when ``HYPERCROSS_PURE=1``) the numpy implementations in ``_core_py`` run.
Both return identical integers.
"""

import os

from hypercross import _core_py

BACKEND = "python"
_impl = _core_py

if os.environ.get("HYPERCROSS_PURE", "") not in ("1", "true", "yes"):
    try:
        from hypercross import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _core_py

hyperbolicity_costs = _impl.hyperbolicity_costs
hausdorff_level = _impl.hausdorff_level
fixed_point_counts = _impl.fixed_point_counts
longest_chain = _impl.longest_chain

LABELING_ORDERS5 = _core_py.LABELING_ORDERS5
all_subsets = _core_py.all_subsets
