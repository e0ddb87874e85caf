"""Hot kernels with a compiled backend and a pure-Python fallback.

The compiled extension is used when it imports; set ``MESHFWD_PURE_PYTHON=1``
to force the fallback.  ``BACKEND`` names the active one.
"""

import os

import numpy as np

from . import _pykernels

if os.environ.get("MESHFWD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

bfs_routes = _impl.bfs_routes
all_pairs_hops = _impl.all_pairs_hops
swrr_pick = _impl.swrr_pick
greedy_pack = _impl.greedy_pack


def csr(adjacency):
    """Build a CSR adjacency from ``{node_id: iterable of node_ids}``.

    Returns ``(ids, indptr, indices)`` where ``ids`` is the sorted id list
    mapping index to node id.  Neighbour ids missing from the keys are added
    as isolated-by-default vertices so the graph stays closed.
    """
    nodes = set(adjacency)
    for nbrs in adjacency.values():
        nodes.update(nbrs)
    ids = sorted(nodes)
    index = {nid: i for i, nid in enumerate(ids)}
    indptr = np.zeros(len(ids) + 1, dtype=np.int64)
    flat = []
    for i, nid in enumerate(ids):
        nbrs = sorted(index[v] for v in adjacency.get(nid, ()))
        flat.extend(nbrs)
        indptr[i + 1] = len(flat)
    return ids, indptr, np.asarray(flat, dtype=np.int64)
