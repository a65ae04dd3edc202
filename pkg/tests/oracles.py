"""Independent reference implementations used only by the tests.

None of these share code with the package: the SVD is one-sided Jacobi written
from scratch, DBSCAN is the O(n^3) reachability closure, edit distance is the
textbook recursion.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def jacobi_svd(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided Jacobi: rotate column pairs of A until they are mutually orthogonal.

    Returns (U, s, Vt) with s sorted descending, thin shapes, like numpy's
    ``full_matrices=False``. Zero singular values get zero U columns.
    """
    u = np.array(a, dtype=float, copy=True)
    m, n = u.shape
    v = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(u[:, p] @ u[:, p])
                beta = float(u[:, q] @ u[:, q])
                gamma = float(u[:, p] @ u[:, q])
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                c = 1 / math.sqrt(1 + t * t)
                s = c * t
                up, uq = u[:, p].copy(), u[:, q].copy()
                u[:, p], u[:, q] = c * up - s * uq, s * up + c * uq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
        if not rotated:
            break
    sing = np.linalg.norm(u, axis=0)
    order = np.argsort(-sing, kind="stable")
    sing, u, v = sing[order], u[:, order], v[:, order]
    k = min(m, n)
    left = np.zeros((m, k))
    for i in range(k):
        if sing[i] > 0:
            left[:, i] = u[:, i] / sing[i]
    return left, sing[:k], v[:, :k].T


def gram_singular_values(a: np.ndarray) -> np.ndarray:
    """Singular values from the eigenvalues of the smaller Gram matrix."""
    a = np.asarray(a, dtype=float)
    gram = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    eig = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    return np.sqrt(np.sort(eig)[::-1])


def rank_k_error(a: np.ndarray, k: int) -> float:
    """Best rank-k Frobenius error from Jacobi singular values (Eckart-Young)."""
    a = np.asarray(a, dtype=float)
    # A and its transpose share singular values; rotate the fewer columns
    _, s, _ = jacobi_svd(a if a.shape[1] <= a.shape[0] else a.T)
    return float(math.sqrt(sum(x * x for x in s[k:])))


def dbscan_oracle(dist: np.ndarray, eps: float, min_pts: int) -> list[int]:
    """Labels from the definition: closure of density-reachability from each core point.

    Cluster ids follow the first core point of each component in index order;
    a border point goes to the lowest-numbered cluster that reaches it.
    """
    n = len(dist)
    near = [[j for j in range(n) if dist[i][j] <= eps] for i in range(n)]
    core = [len(near[i]) >= min_pts for i in range(n)]
    # core-core eps adjacency, closed transitively (Floyd-Warshall style, O(n^3))
    reach = [[core[i] and core[j] and dist[i][j] <= eps for j in range(n)] for i in range(n)]
    for i in range(n):
        reach[i][i] = core[i]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    labels = [-1] * n
    component = [-1] * n
    next_id = 0
    for i in range(n):
        if core[i] and component[i] == -1:
            for j in range(n):
                if reach[i][j]:
                    component[j] = next_id
            next_id += 1
    for i in range(n):
        if core[i]:
            labels[i] = component[i]
        else:
            owners = [component[j] for j in range(n) if core[j] and dist[i][j] <= eps]
            if owners:
                labels[i] = min(owners)
    return labels


def same_partition(a: list[int], b: list[int]) -> bool:
    """Equal up to renaming cluster ids; noise (-1) must match exactly."""
    if len(a) != len(b):
        return False
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    for x, y in zip(a, b):
        if (x == -1) != (y == -1):
            return False
        if x == -1:
            continue
        if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return False
    return True


def edit_distance(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))
