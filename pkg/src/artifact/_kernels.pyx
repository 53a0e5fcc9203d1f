# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled breadth-first closure of a matrix group over GF(p).

Matrices are d x d arrays of uint8 entries in [0, p). Elements are stored
row-major in one growing buffer and indexed by an open-addressing hash table.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint8_t, uint64_t, int64_t, int32_t
from libc.string cimport memcmp, memcpy

cnp.import_array()


cdef inline uint64_t _hash(const uint8_t* a, Py_ssize_t L) nogil:
    cdef uint64_t h = 1469598103934665603ULL
    cdef Py_ssize_t i
    for i in range(L):
        h ^= a[i]
        h *= 1099511628211ULL
    return h ^ (h >> 29)


cdef inline void _matmul(const uint8_t* a, const uint8_t* b, uint8_t* out,
                         Py_ssize_t d, int p) nogil:
    cdef Py_ssize_t i, j, k
    cdef int acc
    for i in range(d):
        for j in range(d):
            acc = 0
            for k in range(d):
                acc += a[i * d + k] * b[k * d + j]
            out[i * d + j] = <uint8_t>(acc % p)


cdef Py_ssize_t _lookup(const int64_t* table, Py_ssize_t mask, const uint8_t* store,
                        const uint8_t* key, Py_ssize_t L, uint64_t h) nogil:
    """Slot index holding key, or the empty slot where it would go."""
    cdef Py_ssize_t s = <Py_ssize_t>(h & mask)
    cdef int64_t e
    while True:
        e = table[s]
        if e < 0:
            return s
        if memcmp(store + e * L, key, L) == 0:
            return s
        s = (s + 1) & mask


def bfs_closure(const uint8_t[:, :, ::1] gens, int p, Py_ssize_t cap):
    """Closure of <gens> by BFS from the identity, multiplying on the right.

    Returns (elements, parent, gen, depth, truncated). ``elements`` has shape
    (N, d*d); element i equals elements[parent[i]] @ gens[gen[i]].
    """
    cdef Py_ssize_t G = gens.shape[0], d = gens.shape[1], L = d * d
    cdef Py_ssize_t capacity = 1024 if cap > 1024 else cap + 1
    store_np = np.zeros((capacity, L), dtype=np.uint8)
    parent_np = np.zeros(capacity, dtype=np.int64)
    gen_np = np.zeros(capacity, dtype=np.int32)
    depth_np = np.zeros(capacity, dtype=np.int32)
    cdef uint8_t[:, ::1] store = store_np
    cdef int64_t[::1] parent = parent_np
    cdef int32_t[::1] gidx = gen_np
    cdef int32_t[::1] depth = depth_np
    cdef Py_ssize_t tsize = 1
    while tsize < 2 * capacity:
        tsize <<= 1
    table_np = np.full(tsize, -1, dtype=np.int64)
    cdef int64_t[::1] table = table_np
    cdef Py_ssize_t mask = tsize - 1
    cdef Py_ssize_t i, g, s, n = 1, head = 0, j
    cdef uint64_t h
    cdef bint truncated = False
    buf_np = np.zeros(L, dtype=np.uint8)
    cdef uint8_t[::1] buf = buf_np
    for i in range(d):
        store[0, i * d + i] = 1
    parent[0] = -1
    gidx[0] = -1
    depth[0] = 0
    h = _hash(&store[0, 0], L)
    table[_lookup(&table[0], mask, &store[0, 0], &store[0, 0], L, h)] = 0

    while head < n and not truncated:
        for g in range(G):
            _matmul(&store[head, 0], &gens[g, 0, 0], &buf[0], d, p)
            h = _hash(&buf[0], L)
            s = _lookup(&table[0], mask, &store[0, 0], &buf[0], L, h)
            if table[s] >= 0:
                continue
            if n >= cap:
                truncated = True
                break
            if n >= capacity:
                capacity = min(2 * capacity, cap + 1)
                store_np = np.resize(store_np, (capacity, L))
                parent_np = np.resize(parent_np, capacity)
                gen_np = np.resize(gen_np, capacity)
                depth_np = np.resize(depth_np, capacity)
                store = store_np
                parent = parent_np
                gidx = gen_np
                depth = depth_np
                if 2 * capacity > tsize:
                    while tsize < 2 * capacity:
                        tsize <<= 1
                    table_np = np.full(tsize, -1, dtype=np.int64)
                    table = table_np
                    mask = tsize - 1
                    for j in range(n):
                        h = _hash(&store[j, 0], L)
                        table[_lookup(&table[0], mask, &store[0, 0], &store[j, 0], L, h)] = j
                    h = _hash(&buf[0], L)
                s = _lookup(&table[0], mask, &store[0, 0], &buf[0], L, h)
            memcpy(&store[n, 0], &buf[0], L)
            parent[n] = head
            gidx[n] = <int32_t>g
            depth[n] = depth[head] + 1
            table[s] = n
            n += 1
        head += 1
    return (store_np[:n].copy(), parent_np[:n].copy(), gen_np[:n].copy(),
            depth_np[:n].copy(), bool(truncated))
