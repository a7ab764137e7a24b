import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def fps_order(X, m, start):
    n, d = X.shape
    order = np.empty(m, dtype=np.int64)
    taken = np.zeros(n, dtype=np.bool_)
    mind = np.full(n, np.inf)
    cur = start
    for t in range(m):
        order[t] = cur
        taken[cur] = True
        best = -1.0
        nxt = -1
        for i in range(n):
            s = 0.0
            for j in range(d):
                diff = X[i, j] - X[cur, j]
                s += diff * diff
            if s < mind[i]:
                mind[i] = s
            if not taken[i] and mind[i] > best:
                best = mind[i]
                nxt = i
        cur = nxt
    return order


@njit(**_opts)
def nearest_center(X, C):
    n, d = X.shape
    K = C.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    for i in range(n):
        best = np.inf
        arg = 0
        for c in range(K):
            s = 0.0
            for j in range(d):
                diff = X[i, j] - C[c, j]
                s += diff * diff
            if s < best:
                best = s
                arg = c
        labels[i] = arg
        dist[i] = best
    return labels, dist


@njit(**_opts)
def _before(sa, ra, sb, rb):
    return sa > sb or (sa == sb and ra < rb)


@njit(**_opts)
def topk_rows(S, k, rank):
    n, N = S.shape
    out = np.empty((n, k), dtype=np.int64)
    if k == 0:
        return out
    vals = np.empty(k)
    idx = np.empty(k, dtype=np.int64)
    for i in range(n):
        filled = 0
        for j in range(N):
            s = S[i, j]
            if filled == k and not _before(s, rank[j], vals[k - 1], rank[idx[k - 1]]):
                continue
            pos = filled if filled < k else k - 1
            while pos > 0 and _before(s, rank[j], vals[pos - 1], rank[idx[pos - 1]]):
                vals[pos] = vals[pos - 1]
                idx[pos] = idx[pos - 1]
                pos -= 1
            vals[pos] = s
            idx[pos] = j
            if filled < k:
                filled += 1
        out[i, :] = idx
    return out
