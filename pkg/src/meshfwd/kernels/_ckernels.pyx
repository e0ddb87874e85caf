# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same contracts."""

from libc.stdlib cimport malloc, free


def bfs_routes(const long long[:] indptr, const long long[:] indices, long long src):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef long long *dist = <long long *> malloc(n * sizeof(long long))
    cdef long long *first = <long long *> malloc(n * sizeof(long long))
    cdef long long *queue = <long long *> malloc(n * sizeof(long long))
    cdef Py_ssize_t head = 0, tail = 0, i
    cdef long long u, v, k, du, fu
    if dist == NULL or first == NULL or queue == NULL:
        free(dist); free(first); free(queue)
        raise MemoryError()
    try:
        for i in range(n):
            dist[i] = -1
            first[i] = -1
        dist[src] = 0
        for k in range(indptr[src], indptr[src + 1]):
            v = indices[k]
            if dist[v] < 0:
                dist[v] = 1
                first[v] = v
                queue[tail] = v
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u] + 1
            fu = first[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du
                    first[v] = fu
                    queue[tail] = v
                    tail += 1
        return [dist[i] for i in range(n)], [first[i] for i in range(n)]
    finally:
        free(dist)
        free(first)
        free(queue)


def all_pairs_hops(const long long[:] indptr, const long long[:] indices):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef long long *dist = <long long *> malloc(n * sizeof(long long))
    cdef long long *queue = <long long *> malloc(n * sizeof(long long))
    cdef Py_ssize_t head, tail, i, s
    cdef long long u, v, k, du
    if dist == NULL or queue == NULL:
        free(dist); free(queue)
        raise MemoryError()
    out = []
    try:
        for s in range(n):
            for i in range(n):
                dist[i] = -1
            dist[s] = 0
            queue[0] = s
            head = 0
            tail = 1
            while head < tail:
                u = queue[head]
                head += 1
                du = dist[u] + 1
                for k in range(indptr[u], indptr[u + 1]):
                    v = indices[k]
                    if dist[v] < 0:
                        dist[v] = du
                        queue[tail] = v
                        tail += 1
            out.append([dist[i] for i in range(n)])
        return out
    finally:
        free(dist)
        free(queue)


def swrr_pick(list credits, list weights):
    cdef Py_ssize_t i, best = 0, m = len(weights)
    cdef double total = 0.0, c, bc = 0.0
    for i in range(m):
        c = credits[i] + weights[i]
        credits[i] = c
        total += <double> weights[i]
        if i == 0 or c > bc:
            best = i
            bc = c
    credits[best] = credits[best] - total
    return best


def greedy_pack(sizes, long long header_bytes, long long mtu_bytes):
    cdef long long used = header_bytes, s
    cdef Py_ssize_t count = 0
    for obj in sizes:
        s = obj
        if used + s > mtu_bytes:
            break
        used += s
        count += 1
    return count
