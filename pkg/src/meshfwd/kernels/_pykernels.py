"""Pure-Python implementations of the hot kernels.

Graph kernels operate on a CSR adjacency: node *indices* ``0..n-1`` where the
neighbours of ``i`` are ``indices[indptr[i]:indptr[i+1]]`` in ascending order.
Ascending order is what makes the breadth-first first-hop tie-break pick the
lowest neighbour.
"""

from collections import deque


def bfs_routes(indptr, indices, src):
    """Hop distances and first hops from ``src``.

    Returns two lists of length ``n``: ``dist`` (``-1`` if unreachable) and
    ``first_hop`` (``-1`` for ``src`` and unreachable nodes).  Among equal
    cost paths the first hop with the lowest index wins.
    """
    indptr = list(indptr)
    indices = list(indices)
    n = len(indptr) - 1
    dist = [-1] * n
    first = [-1] * n
    dist[src] = 0
    queue = deque()
    for k in range(indptr[src], indptr[src + 1]):
        v = indices[k]
        if dist[v] < 0:
            dist[v] = 1
            first[v] = v
            queue.append(v)
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        fu = first[u]
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if dist[v] < 0:
                dist[v] = du
                first[v] = fu
                queue.append(v)
    return dist, first


def all_pairs_hops(indptr, indices):
    """``n x n`` nested list of hop distances, ``-1`` when disconnected."""
    indptr = list(indptr)
    indices = list(indices)
    n = len(indptr) - 1
    out = []
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du
                    queue.append(v)
        out.append(dist)
    return out


def swrr_pick(credits, weights):
    """One smooth weighted round-robin step over aligned lists.

    ``credits`` is updated in place.  Returns the winning position; ties go
    to the lowest position.
    """
    total = 0
    best = 0
    for i in range(len(weights)):
        credits[i] += weights[i]
        total += weights[i]
        if credits[i] > credits[best]:
            best = i
    credits[best] -= total
    return best


def greedy_pack(sizes, header_bytes, mtu_bytes):
    """Number of head packets that fit in one unit of at most ``mtu_bytes``."""
    used = header_bytes
    count = 0
    for s in sizes:
        if used + s > mtu_bytes:
            break
        used += s
        count += 1
    return count
