"""Laplacian, spectral decomposition, heat semigroup and the curvature
time profiles R_K, J_K.

The Laplacian is the generator of the edge Dirichlet form against the
point measure: (Lap f)(x) = (1/m_x) * sum_y w_xy (f(y) - f(x)). The heat
semigroup is realized spectrally, H_t f = sum_i exp(-lambda_i t) <f, phi_i> phi_i,
with a full dense symmetric eigendecomposition (spaces are desk scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .spaces import MetricMeasureSpace, SignedDensity, as_density

__all__ = [
    "SpectralDecomposition",
    "CurvatureProfile",
    "laplacian_matrix",
    "laplacian_apply",
    "spectrum",
    "heat_apply",
    "heat_operator",
    "r_profile",
    "j_profile",
]

# eigenvalues closer than this (relative to the spectral spread) are
# treated as one degenerate cluster
CLUSTER_RTOL = 1e-8
_SMALL_KT = 1e-8


def laplacian_matrix(space: MetricMeasureSpace) -> np.ndarray:
    """Dense matrix of -Laplacian acting on point values."""
    w = space.conductance
    deg = w.sum(axis=1)
    lap = np.diag(deg) - w
    return lap / space.measure[:, None]


def laplacian_apply(space: MetricMeasureSpace, f) -> SignedDensity:
    """Apply the Laplacian: (Lap f)(x) = (1/m_x) sum_y w_xy (f(y) - f(x))."""
    f = as_density(space, f)
    w = space.conductance
    out = (w @ f.values - w.sum(axis=1) * f.values) / space.measure
    return SignedDensity(space, out)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of -Laplacian, m-orthonormal, eigenvalues nondecreasing."""

    space: MetricMeasureSpace
    eigenvalues: np.ndarray          # shape (k,)
    eigenfunctions: np.ndarray       # shape (n, k), columns phi_i

    @property
    def k(self) -> int:
        return self.eigenvalues.shape[0]

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        """m-weighted inner products <f, phi_i>."""
        return self.eigenfunctions.T @ (f * self.space.measure)

    def residuals(self) -> np.ndarray:
        """m-weighted 2-norms of (-Lap phi_i - lambda_i phi_i)."""
        neg_lap = laplacian_matrix(self.space)
        r = neg_lap @ self.eigenfunctions - self.eigenfunctions * self.eigenvalues
        return np.sqrt(np.sum(r * r * self.space.measure[:, None], axis=0))

    def clusters(self) -> list[np.ndarray]:
        """Indices of eigenvalues grouped into degenerate clusters."""
        lam = self.eigenvalues
        spread = max(float(lam[-1] - lam[0]), 1.0)
        groups: list[list[int]] = [[0]]
        for i in range(1, lam.size):
            if lam[i] - lam[groups[-1][0]] <= CLUSTER_RTOL * spread:
                groups[-1].append(i)
            else:
                groups.append([i])
        return [np.array(g) for g in groups]


def _compute_spectrum(space: MetricMeasureSpace) -> SpectralDecomposition:
    """Full decomposition via the symmetrization diag(sqrt m)."""
    m = space.measure
    sqrt_m = np.sqrt(m)
    w = space.conductance
    lap = np.diag(w.sum(axis=1)) - w
    sym = lap / np.outer(sqrt_m, sqrt_m)
    lam, psi = eigh(sym)
    lam = np.maximum(lam, 0.0)
    lam[0] = 0.0
    phi = psi / sqrt_m[:, None]
    # deterministic sign: first coordinate of nonnegligible size is positive
    for i in range(phi.shape[1]):
        col = phi[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        if nz.size and col[nz[0]] < 0:
            phi[:, i] = -col
    return SpectralDecomposition(space, lam, phi)


def spectrum(space: MetricMeasureSpace, k: int | None = None) -> SpectralDecomposition:
    """First k eigenpairs of -Laplacian (all n when k is None)."""
    full = space._spectral_cache
    if k is None or k == space.n:
        return full
    if not 1 <= k <= space.n:
        raise ValueError(f"need 1 <= k <= {space.n}, got {k}")
    return SpectralDecomposition(space, full.eigenvalues[:k], full.eigenfunctions[:, :k])


def heat_apply(space: MetricMeasureSpace, f, t: float) -> SignedDensity:
    """Heat semigroup H_t f via the spectral sum; exact on eigenfunctions."""
    if t < 0:
        raise ValueError(f"heat flow needs t >= 0, got {t}")
    f = as_density(space, f)
    dec = spectrum(space)
    coef = dec.coefficients(f.values)
    out = dec.eigenfunctions @ (np.exp(-dec.eigenvalues * t) * coef)
    return SignedDensity(space, out)


def heat_operator(space: MetricMeasureSpace, t: float) -> np.ndarray:
    """Dense matrix of H_t acting on point values."""
    if t < 0:
        raise ValueError(f"heat flow needs t >= 0, got {t}")
    dec = spectrum(space)
    phi = dec.eigenfunctions
    return (phi * np.exp(-dec.eigenvalues * t)) @ (phi.T * space.measure)


def r_profile(K: float, t: float) -> float:
    """R_K(t) = (exp(2Kt) - 1)/K, continuously extended by 2t at K = 0."""
    if t <= 0:
        raise ValueError(f"profile needs t > 0, got {t}")
    if abs(K) * t < _SMALL_KT:
        return 2.0 * t
    if 2.0 * K * t > 700.0:
        return math.inf
    return math.expm1(2.0 * K * t) / K


def j_profile(K: float, t: float) -> float:
    """J_K(t) = integral_0^t sqrt(2 / (pi R_K(s))) ds in closed form."""
    if t <= 0:
        raise ValueError(f"profile needs t > 0, got {t}")
    if abs(K) * t < _SMALL_KT:
        return 2.0 * math.sqrt(t / math.pi)
    if K > 0:
        kt = K * t
        if kt > 20.0:
            # atan(sqrt(exp(2kt)-1)) = pi/2 - exp(-kt) + O(exp(-3kt))
            val = math.pi / 2.0 - math.exp(-kt)
        else:
            val = math.atan(math.sqrt(math.expm1(2.0 * kt)))
        return math.sqrt(2.0 / (math.pi * K)) * val
    x = math.exp(2.0 * K * t)  # in (0, 1)
    if x < 1e-12:
        # atanh(sqrt(1-x)) = log((1+sqrt(1-x))/sqrt(x)) ~ log(2/sqrt(x)), stable for tiny x
        val = math.log(2.0 / math.sqrt(x) - math.sqrt(x) / 2.0)
    else:
        val = math.atanh(math.sqrt(1.0 - x))
    return math.sqrt(-2.0 / (math.pi * K)) * val


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature time profiles bundled with their K."""

    K: float

    def r(self, t: float) -> float:
        return r_profile(self.K, t)

    def j(self, t: float) -> float:
        return j_profile(self.K, t)
