"""Numba-jitted hot loops.

All kernels take explicit ``numpy.random.Generator`` objects; callers own
seeding.  Fresh-step randomness and selection randomness (reinforcement
flags and uniform past indices) are always drawn from separate generators
so a trajectory prefix does not depend on the simulation horizon.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "assemble_walk",
    "assemble_counts_walk",
    "continue_until_exit",
    "ensemble_counts_1d",
    "forest_roots",
    "forest_walk_ensemble_1d",
    "forest_size_trace",
    "return_count",
]


@njit(cache=True)
def assemble_walk(sel_rng, fresh, alpha):
    """Assemble steps by the literal recursive construction (full mode).

    At each time the walk copies a uniformly chosen past step with
    probability alpha, otherwise consumes the next fresh draw.  Selection
    randomness is consumed lazily: the past index is drawn only when the
    copy branch fires.
    """
    n, d = fresh.shape
    steps = np.empty((n, d))
    steps[0] = fresh[0]
    used = 1
    for i in range(1, n):
        if sel_rng.random() < alpha:
            j = int(sel_rng.random() * i)  # uniform on {0, ..., i-1}
            steps[i] = steps[j]
        else:
            steps[i] = fresh[used]
            used += 1
    return steps


@njit(cache=True)
def assemble_counts_walk(sel_rng, support, probs, n, alpha):
    """Counts-mode walk for a discrete step law.

    The copy/fresh branches are collapsed into one categorical draw with
    P(v) = alpha N(v)/m + (1-alpha) p(v) at time m.  Returns the chosen
    support indices.
    """
    k = probs.shape[0]
    counts = np.zeros(k)
    idx = np.empty(n, dtype=np.int64)

    u = sel_rng.random()
    acc = 0.0
    choice = k - 1
    for v in range(k):
        acc += probs[v]
        if u < acc:
            choice = v
            break
    idx[0] = choice
    counts[choice] = 1.0

    for m in range(1, n):
        u = sel_rng.random()
        acc = 0.0
        choice = k - 1
        for v in range(k):
            acc += alpha * counts[v] / m + (1.0 - alpha) * probs[v]
            if u < acc:
                choice = v
                break
        idx[m] = choice
        counts[choice] += 1.0
    return idx


@njit(cache=True)
def continue_until_exit(sel_rng, steps, position, n_filled, fresh, alpha, radius):
    """Extend a full-mode walk until ||S_n|| >= radius or inputs run out.

    ``steps`` is preallocated with rows [0, n_filled) already assembled;
    ``fresh`` supplies draws for this segment.  Returns
    (exit_time, new_n_filled, fresh_used); exit_time is -1 if the walk
    neither exits nor fills the buffer within this segment.
    """
    cap = steps.shape[0]
    d = steps.shape[1]
    used = 0
    n = n_filled
    while n < cap and used < fresh.shape[0]:
        if n == 0:
            for c in range(d):
                steps[0, c] = fresh[0, c]
            used = 1
        elif sel_rng.random() < alpha:
            j = int(sel_rng.random() * n)
            for c in range(d):
                steps[n, c] = steps[j, c]
        else:
            for c in range(d):
                steps[n, c] = fresh[used, c]
            used += 1
        norm2 = 0.0
        for c in range(d):
            position[c] += steps[n, c]
            norm2 += position[c] * position[c]
        n += 1
        if norm2 >= radius * radius:
            return n, n, used
    return -1, n, used


@njit(cache=True)
def ensemble_counts_1d(rng, n_steps, alpha, n_rep, checkpoint_ns):
    """Ensemble of 1d two-point walks on +-1 (counts mode).

    Returns the walk values at the requested checkpoint times as an
    (n_rep, len(checkpoint_ns)) array.
    """
    m = checkpoint_ns.shape[0]
    out = np.empty((n_rep, m))
    for r in range(n_rep):
        n_plus = 0.0
        s = 0.0
        ci = 0
        for step in range(1, n_steps + 1):
            if step == 1:
                p_plus = 0.5
            else:
                p_plus = alpha * n_plus / (step - 1) + (1.0 - alpha) * 0.5
            if rng.random() < p_plus:
                n_plus += 1.0
                s += 1.0
            else:
                s -= 1.0
            if ci < m and step == checkpoint_ns[ci]:
                out[r, ci] = s
                ci += 1
    return out


@njit(cache=True)
def forest_roots(rng, n, alpha):
    """Grow a random recursive tree with Bernoulli edge retention.

    Vertices are 1-based; arrays have length n + 1 with index 0 unused.
    root[v] is the smallest label in the percolation cluster of v.
    Returns (parent, kept, root).
    """
    parent = np.zeros(n + 1, dtype=np.int64)
    kept = np.zeros(n + 1, dtype=np.bool_)
    root = np.zeros(n + 1, dtype=np.int64)
    root[1] = 1
    for v in range(2, n + 1):
        parent[v] = 1 + int(rng.random() * (v - 1))
        if rng.random() < alpha:
            kept[v] = True
            root[v] = root[parent[v]]
        else:
            root[v] = v
    return parent, kept, root


@njit(cache=True)
def forest_walk_ensemble_1d(rng, n, alpha, n_rep):
    """S_n from n_rep independent forest constructions with +-1 spins."""
    out = np.empty(n_rep)
    root = np.zeros(n + 1, dtype=np.int64)
    spin = np.zeros(n + 1)
    for r in range(n_rep):
        root[1] = 1
        s = 0.0
        for v in range(1, n + 1):
            spin[v] = 1.0 if rng.random() < 0.5 else -1.0
        for v in range(2, n + 1):
            p = 1 + int(rng.random() * (v - 1))
            if rng.random() < alpha:
                root[v] = root[p]
            else:
                root[v] = v
        for v in range(1, n + 1):
            s += spin[root[v]]
        out[r] = s
    return out


@njit(cache=True)
def forest_size_trace(rng, n_max, alpha, checkpoint_ns, k_roots):
    """Cluster sizes |c_{i,n}| for roots i <= k_roots at checkpoint times.

    Returns (sizes_at_checkpoints, kept_flags) where the first array has
    shape (k_roots, len(checkpoint_ns)); rows for labels with a retained
    parent edge (no cluster rooted there) stay 0.
    """
    m = checkpoint_ns.shape[0]
    out = np.zeros((k_roots, m))
    root = np.zeros(n_max + 1, dtype=np.int64)
    size = np.zeros(n_max + 1, dtype=np.int64)
    kept = np.zeros(n_max + 1, dtype=np.bool_)
    root[1] = 1
    size[1] = 1
    ci = 0
    for v in range(1, n_max + 1):
        if v >= 2:
            p = 1 + int(rng.random() * (v - 1))
            if rng.random() < alpha:
                kept[v] = True
                root[v] = root[p]
            else:
                root[v] = v
            size[root[v]] += 1
        if ci < m and v == checkpoint_ns[ci]:
            top = k_roots if k_roots < v else v
            for i in range(1, top + 1):
                if not kept[i]:
                    out[i - 1, ci] = size[i]
            ci += 1
    return out, kept


@njit(cache=True)
def return_count(norms, r):
    """Entries into the closed ball B(0, r) separated by excursions past 2r.

    The walk starts at the origin, i.e. inside the ball; the first entry
    is only counted after an excursion beyond 2r.
    """
    count = 0
    armed = False  # beyond 2r since last visit to B(0, r)
    for i in range(norms.shape[0]):
        x = norms[i]
        if x > 2.0 * r:
            armed = True
        elif x <= r:
            if armed:
                count += 1
            armed = False
    return count
