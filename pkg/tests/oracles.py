"""Independent reference implementations and gradient-check helpers."""

import numpy as np


def finite_difference(f, x, step=1e-5):
    """Central finite-difference gradient of scalar f at x, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy()
        xp[idx] += step
        xm = x.copy()
        xm[idx] -= step
        g[idx] = (f(xp) - f(xm)) / (2.0 * step)
        it.iternext()
    return g


def assert_grad_close(analytic, fd, rtol=1e-4, floor=1e-6):
    analytic = np.asarray(analytic)
    fd = np.asarray(fd)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), floor)
    rel = np.abs(analytic - fd) / denom
    assert rel.max() <= rtol, f"max relative gradient error {rel.max():.3e} > {rtol}"


def dbscan_reference(points, eps, min_pts):
    """Brute-force density clustering via connected components of core points.

    Independent of the production implementation: cores are unioned
    pairwise, components are numbered by their smallest core index, and
    border points join the lowest-numbered cluster with a core neighbor.
    """
    pts = np.asarray(points, dtype=np.float64)
    m = pts.shape[0]
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    within = d2 <= eps * eps
    core = within.sum(axis=1) >= min_pts

    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for i in range(m):
        if not core[i]:
            continue
        for j in range(i + 1, m):
            if core[j] and within[i, j]:
                union(i, j)

    first_core = {}
    for i in range(m):
        if core[i]:
            root = find(i)
            if root not in first_core:
                first_core[root] = i
    cluster_of_root = {
        root: cid
        for cid, (root, _) in enumerate(sorted(first_core.items(), key=lambda kv: kv[1]))
    }

    labels = np.full(m, -1, dtype=np.int64)
    for i in range(m):
        if core[i]:
            labels[i] = cluster_of_root[find(i)]
    for i in range(m):
        if core[i]:
            continue
        neighbor_clusters = [labels[j] for j in np.flatnonzero(within[i] & core)]
        if neighbor_clusters:
            labels[i] = min(neighbor_clusters)
    return labels
