"""Random recursive tree + Bernoulli bond percolation construction.

Grow a recursive tree (each new vertex attaches to a uniform earlier
vertex), keep each edge independently with probability alpha, and assign
an i.i.d. spin to every cluster root.  The weighted spin sum
S_n = sum_i |c_i| Theta_i has the same law as the reinforced walk from
the engine module; that equivalence is verified exactly at small n and
statistically at scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .model import StepDistribution
from .rng import generator

__all__ = [
    "UnionFind",
    "Forest",
    "SpinAssignment",
    "grow_forest",
    "walk_from_forest",
    "cluster_size_trace",
    "estimate_W",
    "forest_small_n_pmf",
    "write_forest",
    "read_forest",
]


class UnionFind:
    """Union-find over 1-based labels where the smallest label is the root.

    The minimum-label convention is semantic here, not an optimization
    choice: the spin assigned to a cluster is indexed by its root label.
    """

    def __init__(self, n: int):
        self._parent = list(range(n + 1))
        self._size = [1] * (n + 1)

    def find(self, v: int) -> int:
        root = v
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[v] != root:  # path compression
            self._parent[v], v = root, self._parent[v]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if rb < ra:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]
        return ra

    def size(self, v: int) -> int:
        return self._size[self.find(v)]


@dataclass
class Forest:
    """Percolation state after n growth steps (1-based vertex labels)."""

    n: int
    parent: np.ndarray  # parent[v] for v >= 2; index 0 and 1 unused
    kept: np.ndarray    # kept[v]: edge from v to parent[v] retained
    _uf: UnionFind = field(repr=False)

    def root(self, v: int) -> int:
        return self._uf.find(v)

    def cluster_sizes(self) -> dict:
        """Map root label -> cluster size; clusters partition the vertices."""
        sizes: dict = {}
        for v in range(1, self.n + 1):
            r = self._uf.find(v)
            sizes[r] = sizes.get(r, 0) + 1
        return sizes

    def n_clusters(self) -> int:
        return len(self.cluster_sizes())


@dataclass
class SpinAssignment:
    """One i.i.d. spin per vertex label; only root spins enter the walk."""

    spins: np.ndarray  # (n, d)

    @classmethod
    def draw(cls, dist: StepDistribution, n: int, rng) -> "SpinAssignment":
        return cls(spins=dist.sample(rng, n))


def grow_forest(n: int, alpha: float, rng) -> Forest:
    """Grow the n-vertex percolated recursive tree.

    Vertex v >= 2 attaches to a uniform vertex in {1, ..., v-1}; the edge
    is kept with probability alpha.  Cluster roots are maintained
    incrementally so they are correct at every intermediate time.
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    parent, kept, _root = _kernels.forest_roots(rng, n, alpha)
    uf = UnionFind(n)
    for v in range(2, n + 1):
        if kept[v]:
            uf.union(v, int(parent[v]))
    return Forest(n=n, parent=parent, kept=kept, _uf=uf)


def walk_from_forest(forest: Forest, spins: SpinAssignment) -> np.ndarray:
    """S_n = sum over cluster roots of |cluster| * spin(root)."""
    if spins.spins.shape[0] < forest.n:
        raise ValueError("need at least one spin per vertex")
    d = spins.spins.shape[1]
    total = np.zeros(d)
    for root, size in forest.cluster_sizes().items():
        total += size * spins.spins[root - 1]
    return total


def cluster_size_trace(n_list, alpha: float, rng, k_roots: int = 1) -> dict:
    """Normalized cluster sizes |c_{i,n}| / n^alpha along one growth path.

    Returns a map root label -> series over the requested times; labels
    whose parent edge was kept (no cluster rooted there) map to zeros.
    The normalization is the rho-estimation semantics for alpha > 1/2; the
    raw series is computable for any alpha.
    """
    ns = np.asarray(sorted(set(int(n) for n in n_list)), dtype=np.int64)
    if ns[0] < 1:
        raise ValueError("times must be >= 1")
    sizes, kept = _kernels.forest_size_trace(rng, int(ns[-1]), alpha, ns, k_roots)
    scale = ns.astype(float) ** alpha if alpha > 0 else np.ones(len(ns))
    return {
        i + 1: sizes[i] / scale
        for i in range(k_roots)
    }


def estimate_W(
    alpha: float,
    dist: StepDistribution,
    n: int,
    truncation: int,
    rng,
) -> dict:
    """Estimators of the superdiffusive limit from one forest realization.

    Returns the full-sum estimator S_n / n^alpha and the truncated series
    over the first ``truncation`` root labels.  Both converge to the limit
    vector as n grows; with truncation = n they agree exactly.
    """
    if not 0.5 < alpha <= 1.0:
        raise ValueError("limit estimation requires alpha in (1/2, 1]")
    if truncation > n:
        raise ValueError("truncation cannot exceed n")
    ns = np.array([n], dtype=np.int64)
    sizes, kept = _kernels.forest_size_trace(rng, n, alpha, ns, n)
    spins = dist.sample(rng, n)
    raw = sizes[:, 0]  # |c_{i,n}| for i = 1..n (0 where kept[i])
    full = (raw[:, None] * spins).sum(axis=0) / n**alpha
    head = raw[:truncation, None] * spins[:truncation]
    truncated = head.sum(axis=0) / n**alpha
    return {"full": full, "truncated": truncated}


def _spin_pmf(dist: StepDistribution):
    return [
        (tuple(v), p)
        for v, p in zip(dist.support, dist.probs)
        if p > 0
    ]


def forest_small_n_pmf(dist: StepDistribution, alpha: float, n: int) -> dict:
    """Exact pmf of the forest-constructed S_n by exhaustive enumeration.

    Enumerates attachment choices and edge flags exactly (probability
    weights, not sampling) and convolves the cluster-size multiset with
    the spin law.  Independent of the engine enumeration; used to verify
    the construction equivalence atom by atom.
    """
    if not dist.is_discrete:
        raise ValueError("enumeration needs a discrete spin law")
    if n > 6:
        raise ValueError("enumeration capped at n = 6")
    spin_atoms = _spin_pmf(dist)
    d = dist.d

    @lru_cache(maxsize=None)
    def weighted_sum_pmf(sizes: tuple) -> tuple:
        """pmf of sum_j sizes[j] * Theta_j as a tuple of (pos, prob)."""
        if not sizes:
            return ((tuple([0.0] * d), 1.0),)
        rest = weighted_sum_pmf(sizes[1:])
        out: dict = {}
        for v, p in spin_atoms:
            for pos, w in rest:
                key = tuple(
                    round(sizes[0] * a + b, 12) for a, b in zip(v, pos)
                )
                out[key] = out.get(key, 0.0) + p * w
        return tuple(sorted(out.items()))

    pmf: dict = {}

    def recurse(v: int, roots: dict, weight: float):
        # roots: root label -> current cluster size
        if v > n:
            sizes = tuple(sorted(roots.values()))
            for pos, w in weighted_sum_pmf(sizes):
                pmf[pos] = pmf.get(pos, 0.0) + weight * w
            return
        for target in range(1, v):
            w_attach = weight / (v - 1)
            # edge kept: v joins target's cluster
            if alpha > 0.0:
                tr = _root_of(target, roots_parent)
                roots[tr] += 1
                roots_parent[v] = tr
                recurse(v + 1, roots, w_attach * alpha)
                roots_parent.pop(v)
                roots[tr] -= 1
            # edge deleted: v roots its own cluster
            if alpha < 1.0:
                roots[v] = 1
                roots_parent[v] = v
                recurse(v + 1, roots, w_attach * (1.0 - alpha))
                roots_parent.pop(v)
                roots.pop(v)

    def _root_of(v: int, parent_map: dict) -> int:
        return parent_map[v]

    roots_parent = {1: 1}
    recurse(2, {1: 1}, 1.0)

    total = sum(pmf.values())
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"enumeration weights sum to {total!r}")
    return pmf


def write_forest(path, forest: Forest, alpha: float) -> None:
    """Line-oriented dump: header with n and alpha, then `v parent kept`."""
    with open(path, "w") as fh:
        fh.write(f"# forest n={forest.n} alpha={alpha:g}\n")
        for v in range(2, forest.n + 1):
            fh.write(f"{v} {int(forest.parent[v])} {int(forest.kept[v])}\n")


def read_forest(path) -> Forest:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# forest n="):
            raise ValueError("not a forest dump")
        n = int(header.split("n=")[1].split()[0])
        parent = np.zeros(n + 1, dtype=np.int64)
        kept = np.zeros(n + 1, dtype=bool)
        for line in fh:
            v, p, k = line.split()
            parent[int(v)] = int(p)
            kept[int(v)] = bool(int(k))
    uf = UnionFind(n)
    for v in range(2, n + 1):
        if kept[v]:
            uf.union(v, int(parent[v]))
    return Forest(n=n, parent=parent, kept=kept, _uf=uf)
