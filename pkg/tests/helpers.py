"""Shared test utilities: independent brute-force oracles and random
space generators. Everything here stays solver-independent on purpose."""

from __future__ import annotations

import itertools
import math

import numpy as np

from mmslab.spaces import MetricMeasureSpace


def brute_force_wasserstein(a, b, dist, p):
    """Exact W_p by enumerating every vertex of the transportation polytope.

    Vertices are basic solutions supported on spanning trees of the
    complete bipartite support graph; each tree determines its flows by
    leaf stripping, and infeasible (negative-flow) trees are discarded.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n0, n1 = a.size, b.size
    edges = [(i, n0 + j) for i in range(n0) for j in range(n1)]
    n_nodes = n0 + n1
    tol = 1e-12 * max(a.sum(), 1.0)
    best = math.inf
    for combo in itertools.combinations(range(len(edges)), n_nodes - 1):
        adj = [[] for _ in range(n_nodes)]
        deg = [0] * n_nodes
        for e in combo:
            u, v = edges[e]
            adj[u].append((e, v))
            adj[v].append((e, u))
            deg[u] += 1
            deg[v] += 1
        balance = list(a) + [-x for x in b]
        used = dict.fromkeys(combo, False)
        flows = {}
        stack = [u for u in range(n_nodes) if deg[u] == 1]
        processed = 0
        while stack:
            u = stack.pop()
            if deg[u] != 1:
                continue
            for e, v in adj[u]:
                if not used[e]:
                    used[e] = True
                    flows[e] = balance[u] if u < n0 else -balance[u]
                    balance[v] += balance[u]
                    balance[u] = 0.0
                    deg[u] -= 1
                    deg[v] -= 1
                    if deg[v] == 1:
                        stack.append(v)
                    processed += 1
                    break
        if processed != n_nodes - 1:
            continue  # not spanning
        if min(flows.values()) < -tol:
            continue  # infeasible vertex
        cost = sum(f * dist[edges[e][0], edges[e][1] - n0] ** p
                   for e, f in flows.items())
        best = min(best, cost)
    return best ** (1.0 / p)


def random_euclidean_space(rng, n, curvature=0.0):
    """Random connected space: Euclidean points in the unit square, a
    random spanning path plus extra edges, random masses and weights."""
    pts = rng.uniform(0.0, 1.0, (n, 2))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(dist, 0.0)
    w = np.zeros((n, n))
    s = np.zeros((n, n))
    order = rng.permutation(n)
    pairs = list(zip(order[:-1], order[1:]))
    extra = rng.integers(0, n, size=(max(n // 2, 1), 2))
    pairs += [(i, j) for i, j in extra if i != j]
    for i, j in pairs:
        w[i, j] = w[j, i] = rng.uniform(0.5, 2.0)
        s[i, j] = s[j, i] = rng.uniform(0.5, 2.0)
    space = MetricMeasureSpace(
        name=f"random(n={n})",
        dist=dist,
        measure=rng.uniform(0.5, 2.0, n),
        conductance=w,
        boundary_weight=s,
        curvature=curvature,
    )
    space.validate()
    return space


def random_zero_mean(rng, space):
    """Random nonzero function with exactly zero m-mean."""
    f = rng.standard_normal(space.n)
    f -= np.sum(f * space.measure) / space.total_mass
    return f


def random_density_pair(rng, space, equal_mass=True):
    r0 = rng.uniform(0.1, 1.0, space.n)
    r1 = rng.uniform(0.1, 1.0, space.n)
    if equal_mass:
        r1 *= np.sum(r0 * space.measure) / np.sum(r1 * space.measure)
    return r0, r1
