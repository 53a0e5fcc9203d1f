"""Pure-Python closure kernel with the same contract as the compiled one."""
from __future__ import annotations

import numpy as np


def bfs_closure(gens: np.ndarray, p: int, cap: int):
    """Closure of <gens> by BFS from the identity, multiplying on the right.

    Level-synchronous: each frontier is multiplied by every generator in one
    numpy call, then candidates are inserted in (element, generator) order so
    the numbering matches the compiled kernel exactly.
    """
    gens = np.ascontiguousarray(gens, dtype=np.uint8)
    G, d, _ = gens.shape
    L = d * d
    gi = gens.astype(np.int64)
    ident = np.eye(d, dtype=np.uint8).reshape(L)
    seen = {ident.tobytes(): 0}
    store = [ident]
    parent, gidx, depth = [-1], [-1], [0]
    frontier = np.arange(1)
    truncated = False
    level = 0
    while frontier.size and not truncated:
        level += 1
        mats = np.stack([store[i] for i in frontier]).reshape(-1, d, d).astype(np.int64)
        prods = (np.einsum("fij,gjk->fgik", mats, gi) % p).astype(np.uint8)
        prods = prods.reshape(len(frontier) * G, L)
        nxt = []
        for c in range(prods.shape[0]):
            key = prods[c].tobytes()
            if key in seen:
                continue
            if len(store) >= cap:
                truncated = True
                break
            idx = len(store)
            seen[key] = idx
            store.append(prods[c].copy())
            parent.append(int(frontier[c // G]))
            gidx.append(c % G)
            depth.append(level)
            nxt.append(idx)
        frontier = np.array(nxt, dtype=np.int64)
    return (np.stack(store).astype(np.uint8), np.array(parent, dtype=np.int64),
            np.array(gidx, dtype=np.int32), np.array(depth, dtype=np.int32), truncated)
