import numpy as np
import pytest

from relrep import _kernels


def brute_topk(S, k, rank):
    return np.array([sorted(range(S.shape[1]), key=lambda j: (-S[i, j], rank[j]))[:k]
                     for i in range(S.shape[0])])


def brute_fps(X, m, start):
    order = [start]
    while len(order) < m:
        best, arg = -1.0, None
        for i in range(len(X)):
            if i in order:
                continue
            dmin = min(((X[i] - X[j]) ** 2).sum() for j in order)
            if dmin > best:
                best, arg = dmin, i
        order.append(arg)
    return order


@pytest.mark.parametrize("k", [1, 3, 7, 20])
def test_topk_matches_sort(backend, rng, k):
    S = rng.standard_normal((15, 20))
    rank = rng.permutation(20)
    np.testing.assert_array_equal(_kernels.topk_rows(S, k, rank), brute_topk(S, k, rank))


def test_topk_ties_use_rank(backend, rng):
    S = np.round(rng.standard_normal((30, 40)), 1)  # many exact ties
    rank = rng.permutation(40)
    np.testing.assert_array_equal(_kernels.topk_rows(S, 10, rank), brute_topk(S, 10, rank))


def test_topk_k_clipped_to_width(backend):
    S = np.array([[0.1, 0.3, 0.2]])
    np.testing.assert_array_equal(_kernels.topk_rows(S, 10, np.arange(3)), [[1, 2, 0]])


def test_fps_matches_brute_force(backend, rng):
    X = rng.standard_normal((25, 3))
    np.testing.assert_array_equal(_kernels.fps_order(X, 8, 4), brute_fps(X, 8, 4))


def test_fps_duplicates_pick_lowest_unused(backend):
    X = np.ones((5, 2))
    np.testing.assert_array_equal(_kernels.fps_order(X, 3, 0), [0, 1, 2])


def test_nearest_center(backend, rng):
    X = rng.standard_normal((50, 4))
    C = rng.standard_normal((6, 4))
    lab, d2 = _kernels.nearest_center(X, C)
    full = ((X[:, None, :] - C[None]) ** 2).sum(-1)
    np.testing.assert_array_equal(lab, full.argmin(1))
    np.testing.assert_allclose(d2, full.min(1), rtol=1e-12)


def test_nearest_center_tie_lowest_index(backend):
    lab, _ = _kernels.nearest_center(np.zeros((1, 2)), np.array([[1.0, 0], [0, 1.0]]))
    assert lab[0] == 0


def test_backends_agree(monkeypatch, rng):
    if len(_kernels.available_backends()) < 2:
        pytest.skip("numba not installed")
    X = rng.standard_normal((200, 16))
    S = X @ X[:40].T
    out = {}
    for b in ("numba", "numpy"):
        monkeypatch.setenv("RELREP_BACKEND", b)
        out[b] = (_kernels.fps_order(X, 20, 0), _kernels.topk_rows(S.T, 10, np.arange(200)),
                  _kernels.nearest_center(X, X[:7])[0])
    for a, b in zip(out["numba"], out["numpy"]):
        np.testing.assert_array_equal(a, b)


def test_unknown_backend_rejected(monkeypatch):
    monkeypatch.setenv("RELREP_BACKEND", "cuda")
    with pytest.raises(ValueError):
        _kernels.backend()
