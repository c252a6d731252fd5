"""Backend selection for the hot kernels.

The compiled Cython extension is preferred when importable; the pure
Python implementation is the fallback.  Set SRGFORGE_PURE_PYTHON=1 to
force the fallback (used by the parity tests and the benchmark).
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("SRGFORGE_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND

SRG_OK = _pykernels.SRG_OK
SRG_NOT_REGULAR = _pykernels.SRG_NOT_REGULAR
SRG_LAMBDA_VARIES = _pykernels.SRG_LAMBDA_VARIES
SRG_MU_VARIES = _pykernels.SRG_MU_VARIES
SRG_DEGENERATE = _pykernels.SRG_DEGENERATE

srg_check = _impl.srg_check
common_neighbor_profiles = _impl.common_neighbor_profiles
lambda_graph_edge_profile = _impl.lambda_graph_edge_profile
mu_graph_edge_profile = _impl.mu_graph_edge_profile
count_cliques = _impl.count_cliques
degeneracy_order = _impl.degeneracy_order
selection_scan = _impl.selection_scan
make_ctx = _impl.make_ctx
counts_into = _impl.counts_into
is_automorphism = _impl.is_automorphism
leaf_bytes = _impl.leaf_bytes
