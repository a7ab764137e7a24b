import numpy as np


def fps_order(X, m, start):
    n = X.shape[0]
    order = np.empty(m, dtype=np.int64)
    taken = np.zeros(n, dtype=bool)
    mind = np.full(n, np.inf)
    cur = start
    for t in range(m):
        order[t] = cur
        taken[cur] = True
        diff = X - X[cur]
        mind = np.minimum(mind, np.einsum("ij,ij->i", diff, diff))
        if t + 1 == m:
            break
        cand = np.where(taken, -1.0, mind)
        cur = int(np.argmax(cand))
    return order


def nearest_center(X, C):
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    step = max(1, 2**22 // max(1, C.shape[0] * X.shape[1]))
    for lo in range(0, n, step):
        diff = X[lo:lo + step, None, :] - C[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        lab = np.argmin(d2, axis=1)
        labels[lo:lo + step] = lab
        dist[lo:lo + step] = d2[np.arange(d2.shape[0]), lab]
    return labels, dist


def topk_rows(S, k, rank):
    n, N = S.shape
    out = np.empty((n, k), dtype=np.int64)
    if k == 0:
        return out
    # k-th largest value per row; everything >= it is a candidate, ties included
    kth = np.partition(S, N - k, axis=1)[:, N - k]
    for i in range(n):
        cand = np.flatnonzero(S[i] >= kth[i])
        order = np.lexsort((rank[cand], -S[i, cand]))
        out[i] = cand[order[:k]]
    return out
