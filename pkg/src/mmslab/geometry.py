"""Discrete perimeter (weighted cut) and Cheeger constant.

Per(A) = sum of boundary weights sigma_xy over edges crossing the cut;
h(X) = min Per(A)/m(A) over subsets with 0 < m(A) <= m(X)/2. Exact mode
enumerates every admissible cut (n <= 20); sweep mode scans prefix cuts
along the Fiedler eigenfunction and brackets h with a conservative
spectral lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heat import spectrum
from .spaces import MetricMeasureSpace

__all__ = ["CheegerEstimate", "perimeter", "cheeger", "EXACT_LIMIT"]

EXACT_LIMIT = 20


def _as_mask(space: MetricMeasureSpace, subset) -> np.ndarray:
    subset = np.asarray(subset)
    if subset.dtype == bool:
        if subset.shape != (space.n,):
            raise ValueError(f"mask must have length {space.n}")
        return subset
    mask = np.zeros(space.n, dtype=bool)
    if subset.size:
        if subset.min() < 0 or subset.max() >= space.n:
            raise ValueError("subset indices out of range")
        mask[subset] = True
    return mask


def perimeter(space: MetricMeasureSpace, subset) -> float:
    """Weighted cut Per(A) = sum_{x in A, y not in A} sigma_xy."""
    mask = _as_mask(space, subset)
    i, j, _, sig = space.edges()
    crossing = mask[i] != mask[j]
    return float(np.sum(sig[crossing]))


@dataclass(frozen=True)
class CheegerEstimate:
    lower: float
    upper: float
    method: str                  # "brute_force" | "sweep_cut"
    witness_set: np.ndarray      # point indices achieving `upper`

    @property
    def exact(self) -> bool:
        return self.method == "brute_force"


def _brute_force(space: MetricMeasureSpace) -> CheegerEstimate:
    n = space.n
    masks = np.arange(1, 1 << n, dtype=np.uint32)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    mass = bits @ space.measure
    half = space.total_mass / 2.0
    i, j, _, sig = space.edges()
    per = np.zeros(masks.size)
    for a, b, s in zip(i, j, sig):
        per += (bits[:, a] != bits[:, b]) * s
    admissible = (mass > 0) & (mass <= half * (1 + 1e-12))
    ratios = np.where(admissible, per / np.where(mass > 0, mass, 1.0), np.inf)
    best = int(np.argmin(ratios))  # argmin takes the lowest mask on ties
    h = float(ratios[best])
    witness = np.flatnonzero(bits[best])
    return CheegerEstimate(h, h, "brute_force", witness)


def _sweep(space: MetricMeasureSpace) -> CheegerEstimate:
    dec = spectrum(space, 2)
    lam1 = float(dec.eigenvalues[1])
    order = np.argsort(dec.eigenfunctions[:, 1], kind="stable")
    m = space.measure
    total = space.total_mass
    i, j, _, sig = space.edges()
    pos = np.empty(space.n, dtype=int)
    pos[order] = np.arange(space.n)
    best = np.inf
    best_k = 0
    mass = 0.0
    per = 0.0
    # prefix cuts: adding point order[k] flips exactly its incident edges
    incident: list[list[tuple[int, float]]] = [[] for _ in range(space.n)]
    for a, b, s in zip(i, j, sig):
        incident[a].append((b, s))
        incident[b].append((a, s))
    inside = np.zeros(space.n, dtype=bool)
    for k in range(space.n - 1):
        p = order[k]
        inside[p] = True
        mass += m[p]
        for q, s in incident[p]:
            per += -s if inside[q] else s
        ratio = per / min(mass, total - mass)
        if ratio < best:
            best, best_k = ratio, k
    witness = order[: best_k + 1]
    if np.sum(m[witness]) > total / 2.0:
        witness = order[best_k + 1:]
    # h >= (min sigma/w over edges) * lambda_1 / 2: cuts in sigma dominate
    # cuts in w up to that ratio, and lambda_1 <= 2 * min cut_w(A)/m(A)
    _, _, wts, sigs = space.edges()
    r_min = float(np.min(sigs / wts)) if wts.size else 0.0
    lower = max(r_min * lam1 / 2.0, 0.0)
    return CheegerEstimate(min(lower, best), float(best), "sweep_cut", np.sort(witness))


def cheeger(space: MetricMeasureSpace, mode: str = "auto") -> CheegerEstimate:
    """Cheeger constant estimate; `mode` is "exact", "sweep" or "auto".

    Exact mode requires n <= 20 (it enumerates all admissible cuts).
    """
    if mode == "auto":
        mode = "exact" if space.n <= EXACT_LIMIT else "sweep"
    if mode == "exact":
        if space.n > EXACT_LIMIT:
            raise ValueError(f"exact mode limited to n <= {EXACT_LIMIT}, got n={space.n}")
        return _brute_force(space)
    if mode == "sweep":
        return _sweep(space)
    raise ValueError(f"unknown cheeger mode {mode!r}")
