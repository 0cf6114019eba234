"""Finite metric measure spaces: the data model, a catalog of reference
spaces, and JSON ingestion.

A space is a finite point set with a metric, a strictly positive measure,
symmetric edge conductances (defining the Dirichlet energy and hence the
Laplacian/heat flow), symmetric boundary weights (defining the discrete
perimeter as a weighted cut) and a declared curvature parameter K.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "SpaceError",
    "InvariantViolation",
    "MetricMeasureSpace",
    "SignedDensity",
    "as_density",
    "circle_space",
    "interval_space",
    "torus_space",
    "ou_chain_space",
    "two_point_space",
    "path_space",
    "space_from_dict",
    "build_catalog_space",
    "load_space",
]

_TRIANGLE_SAMPLE = 10_000
_EXHAUSTIVE_LIMIT = 64


class SpaceError(ValueError):
    """Bad construction parameters (non-positive sizes, unknown catalog name...)."""


class InvariantViolation(SpaceError):
    """A structural invariant of the space data failed validation."""

    def __init__(self, invariant: str, detail: str):
        self.invariant = invariant
        super().__init__(f"invariant '{invariant}' violated: {detail}")


@dataclass(frozen=True)
class MetricMeasureSpace:
    """Immutable finite metric measure space.

    dist            n x n symmetric matrix of pairwise distances
    measure         n strictly positive point masses
    conductance     n x n symmetric nonnegative edge weights w (Dirichlet form)
    boundary_weight n x n symmetric nonnegative edge weights sigma (perimeter)
    curvature       declared lower curvature bound K of the continuum model
    kind            optional 1D topology tag ("circle" | "line") enabling the
                    closed-form transport oracle
    coords          optional point coordinates matching `kind`
    """

    name: str
    dist: np.ndarray
    measure: np.ndarray
    conductance: np.ndarray
    boundary_weight: np.ndarray
    curvature: float = 0.0
    kind: Optional[str] = None
    coords: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.measure.shape[0]

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.measure.tolist()))

    def diameter(self) -> float:
        return float(np.max(self.dist))

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Upper-triangle edge list (i, j, w_ij, sigma_ij) where w_ij > 0."""
        i, j = np.nonzero(np.triu(self.conductance, k=1))
        return i, j, self.conductance[i, j], self.boundary_weight[i, j]

    def validate(self) -> None:
        d, m, w, s = self.dist, self.measure, self.conductance, self.boundary_weight
        n = self.n
        for label, a, shape in (
            ("dist", d, (n, n)),
            ("measure", m, (n,)),
            ("conductance", w, (n, n)),
            ("boundary_weight", s, (n, n)),
        ):
            if a.shape != shape:
                raise InvariantViolation("shape", f"{label} has shape {a.shape}, expected {shape}")
            if not np.all(np.isfinite(a)):
                raise InvariantViolation("finite", f"{label} contains non-finite entries")
        if np.any(m <= 0):
            raise InvariantViolation("positive_measure", "measure must be strictly positive everywhere")
        scale = max(float(np.max(d)), 1.0)
        if np.any(np.abs(d - d.T) > 1e-9 * scale):
            i, j = np.unravel_index(np.argmax(np.abs(d - d.T)), d.shape)
            raise InvariantViolation("dist_symmetry", f"dist[{i},{j}] != dist[{j},{i}]")
        if np.any(np.abs(np.diag(d)) > 0):
            raise InvariantViolation("dist_diagonal", "dist must be zero on the diagonal")
        if np.any(d < 0):
            raise InvariantViolation("dist_nonnegative", "dist has negative entries")
        self._check_triangle(d, scale)
        if np.any(w < 0) or np.any(np.abs(w - w.T) > 0):
            raise InvariantViolation("conductance", "conductances must be symmetric and nonnegative")
        if np.any(s < 0) or np.any(np.abs(s - s.T) > 0):
            raise InvariantViolation("boundary_weight", "boundary weights must be symmetric and nonnegative")
        if np.any((s > 0) & (w == 0)):
            raise InvariantViolation("boundary_support", "sigma > 0 on a pair with zero conductance")
        ncomp, _ = connected_components(csr_matrix(w > 0), directed=False)
        if ncomp != 1:
            raise InvariantViolation("connectivity", f"conductance graph has {ncomp} components")

    @staticmethod
    def _check_triangle(d: np.ndarray, scale: float) -> None:
        n = d.shape[0]
        tol = 1e-12 * scale
        if n <= _EXHAUSTIVE_LIMIT:
            slack = d[:, :, None] + d[None, :, :] - d[:, None, :]
            if slack.min() < -tol:
                i, k, j = np.unravel_index(np.argmin(slack), slack.shape)
                raise InvariantViolation(
                    "triangle_inequality",
                    f"d({i},{j}) > d({i},{k}) + d({k},{j})",
                )
        else:
            rng = np.random.default_rng(0)
            trip = rng.integers(0, n, size=(_TRIANGLE_SAMPLE, 3))
            i, k, j = trip[:, 0], trip[:, 1], trip[:, 2]
            bad = d[i, j] - d[i, k] - d[k, j] > tol
            if np.any(bad):
                b = int(np.argmax(bad))
                raise InvariantViolation(
                    "triangle_inequality",
                    f"d({i[b]},{j[b]}) > d({i[b]},{k[b]}) + d({k[b]},{j[b]})",
                )

    # Spectral data is expensive; computed once on demand and shared.
    @cached_property
    def _spectral_cache(self):
        from .heat import _compute_spectrum

        return _compute_spectrum(self)


class SignedDensity:
    """A real function on the points of a space, with cached positive and
    negative parts, L1/Linf norms and mean (all against the space measure)."""

    __slots__ = ("space", "values", "positive_part", "negative_part",
                 "norm_l1", "norm_linf", "mean")

    def __init__(self, space: MetricMeasureSpace, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (space.n,):
            raise ValueError(f"expected {space.n} values, got shape {values.shape}")
        self.space = space
        self.values = values
        self.positive_part = np.maximum(values, 0.0)
        self.negative_part = np.maximum(-values, 0.0)
        m = space.measure
        pos_l1 = float(np.sum(self.positive_part * m))
        neg_l1 = float(np.sum(self.negative_part * m))
        # L1 defined as the sum of the part norms so the splitting identity
        # ||f+||_1 + ||f-||_1 = ||f||_1 is exact in floating point.
        self.norm_l1 = pos_l1 + neg_l1
        self.norm_linf = float(np.max(np.abs(values))) if space.n else 0.0
        self.mean = float(np.sum(values * m)) / space.total_mass

    def __neg__(self) -> "SignedDensity":
        return SignedDensity(self.space, -self.values)

    def scaled(self, c: float) -> "SignedDensity":
        return SignedDensity(self.space, c * self.values)

    def centered(self) -> "SignedDensity":
        return SignedDensity(self.space, self.values - self.mean)


def as_density(space: MetricMeasureSpace, f) -> SignedDensity:
    """Coerce an array (or pass through a SignedDensity) bound to `space`."""
    if isinstance(f, SignedDensity):
        if f.space is not space:
            raise ValueError("density is bound to a different space")
        return f
    return SignedDensity(space, np.asarray(f, dtype=float))


def _build(name, dist, measure, w, sigma, K, kind=None, coords=None) -> MetricMeasureSpace:
    space = MetricMeasureSpace(
        name=name,
        dist=np.asarray(dist, dtype=float),
        measure=np.asarray(measure, dtype=float),
        conductance=np.asarray(w, dtype=float),
        boundary_weight=np.asarray(sigma, dtype=float),
        curvature=float(K),
        kind=kind,
        coords=None if coords is None else np.asarray(coords, dtype=float),
    )
    space.validate()
    return space


def _chain_matrices(n: int, w_edges: np.ndarray, s_edges: np.ndarray, periodic: bool):
    w = np.zeros((n, n))
    s = np.zeros((n, n))
    idx = np.arange(n - 1)
    w[idx, idx + 1] = w_edges[: n - 1]
    s[idx, idx + 1] = s_edges[: n - 1]
    if periodic:
        w[n - 1, 0] = w_edges[n - 1]
        s[n - 1, 0] = s_edges[n - 1]
    return w + w.T, s + s.T


def circle_space(n: int, length: float = 2 * math.pi) -> MetricMeasureSpace:
    """Uniform n-point circle of circumference `length`.

    Geodesic arc distance, cell mass h = length/n, conductance 1/h on
    consecutive pairs (so the Dirichlet energy discretizes the integral of
    |f'|^2 dm), boundary weight 1 per edge (a cut counts its boundary
    points), K = 0.
    """
    if n < 2:
        raise SpaceError("circle needs n >= 2")
    if length <= 0:
        raise SpaceError("circle needs positive length")
    h = length / n
    idx = np.arange(n)
    k = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(k, n - k) * h
    w, s = _chain_matrices(n, np.full(n, 1.0 / h), np.ones(n), periodic=True)
    return _build(f"circle(n={n})", dist, np.full(n, h), w, s, 0.0,
                  kind="circle", coords=idx * h)


def interval_space(n: int, length: float = 1.0) -> MetricMeasureSpace:
    """n-point endpoint grid on [0, length] with trapezoid masses.

    Half cells at the two ends keep the total mass exactly `length` and
    give the standard reflecting closure of the second difference.
    """
    if n < 2:
        raise SpaceError("interval needs n >= 2")
    if length <= 0:
        raise SpaceError("interval needs positive length")
    h = length / (n - 1)
    x = np.arange(n) * h
    m = np.full(n, h)
    m[0] = m[-1] = h / 2
    dist = np.abs(x[:, None] - x[None, :])
    w, s = _chain_matrices(n, np.full(n - 1, 1.0 / h), np.ones(n - 1), periodic=False)
    return _build(f"interval(n={n})", dist, m, w, s, 0.0,
                  kind="line", coords=x)


def torus_space(side: int, length: float = 2 * math.pi) -> MetricMeasureSpace:
    """side x side periodic grid on the flat square torus of side `length`.

    Boundary weights equal the dual edge length h, so each axis-aligned
    boundary circle of a band contributes exactly its length.
    """
    if side < 2:
        raise SpaceError("torus needs side >= 2")
    if length <= 0:
        raise SpaceError("torus needs positive length")
    n = side * side
    h = length / side
    ii, jj = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    pts = np.stack([ii.ravel(), jj.ravel()], axis=1)
    da = np.abs(pts[:, None, :] - pts[None, :, :])
    da = np.minimum(da, side - da) * h
    dist = np.sqrt((da ** 2).sum(axis=2))
    w = np.zeros((n, n))
    s = np.zeros((n, n))
    def pid(a, b):
        return (a % side) * side + (b % side)
    for a in range(side):
        for b in range(side):
            p = pid(a, b)
            for q in (pid(a + 1, b), pid(a, b + 1)):
                w[p, q] = w[q, p] = 1.0
                s[p, q] = s[q, p] = h
    return _build(f"torus(side={side})", dist, np.full(n, h * h), w, s, 0.0)


def ou_chain_space(n: int, curvature: float = 1.0, extent_std: float = 4.0) -> MetricMeasureSpace:
    """Birth-death chain approximating the Ornstein-Uhlenbeck line with
    Gaussian invariant density of precision K = `curvature` > 0.

    Cell-centered grid on [-R, R], R = extent_std / sqrt(K); masses are
    Gaussian cell weights, conductances use the midpoint density so the
    generator discretizes f'' - K x f', boundary weights equal the density
    at the cut (the Gaussian perimeter of a half line).
    """
    if n < 2:
        raise SpaceError("ou_chain needs n >= 2")
    if curvature <= 0:
        raise SpaceError("ou_chain needs curvature K > 0")
    K = curvature
    R = extent_std / math.sqrt(K)
    h = 2 * R / n
    x = -R + (np.arange(n) + 0.5) * h
    norm = math.sqrt(K / (2 * math.pi))
    density = norm * np.exp(-K * x ** 2 / 2)
    mid = -R + np.arange(1, n) * h
    density_mid = norm * np.exp(-K * mid ** 2 / 2)
    dist = np.abs(x[:, None] - x[None, :])
    w, s = _chain_matrices(n, density_mid / h, density_mid, periodic=False)
    return _build(f"ou_chain(n={n},K={K:g})", dist, density * h, w, s, K,
                  kind="line", coords=x)


def two_point_space(d: float = 1.0) -> MetricMeasureSpace:
    """Two unit-mass points at distance d, unit conductance and boundary weight."""
    if d <= 0:
        raise SpaceError("two_point needs d > 0")
    dist = np.array([[0.0, d], [d, 0.0]])
    one = np.array([[0.0, 1.0], [1.0, 0.0]])
    return _build(f"two_point(d={d:g})", dist, np.ones(2), one, one, 0.0,
                  kind="line", coords=np.array([0.0, d]))


def path_space(weights, masses=None, sigmas=None, spacing: float = 1.0,
               curvature: float = 0.0) -> MetricMeasureSpace:
    """Path graph with user conductances on consecutive pairs.

    Points sit at 0, spacing, 2*spacing, ... with line distance; masses
    default to 1 and boundary weights default to 1.
    """
    w_edges = np.asarray(weights, dtype=float)
    n = w_edges.size + 1
    if n < 2:
        raise SpaceError("path needs at least one edge weight")
    if np.any(w_edges <= 0):
        raise SpaceError("path edge weights must be positive")
    if spacing <= 0:
        raise SpaceError("path needs positive spacing")
    m = np.ones(n) if masses is None else np.asarray(masses, dtype=float)
    s_edges = np.ones(n - 1) if sigmas is None else np.asarray(sigmas, dtype=float)
    x = spacing * np.arange(n)
    dist = np.abs(x[:, None] - x[None, :])
    w, s = _chain_matrices(n, w_edges, s_edges, periodic=False)
    return _build(f"path(n={n})", dist, m, w, s, curvature, kind="line", coords=x)


def space_from_dict(data: dict) -> MetricMeasureSpace:
    """Build and validate a space from the JSON file schema:

    { "name": str, "points": [labels], "measure": [...], "dist": [[...]],
      "edges": [{"i": int, "j": int, "w": float, "sigma": float}], "K": float }
    """
    required = {"name", "points", "measure", "dist", "edges", "K"}
    missing = required - data.keys()
    if missing:
        raise SpaceError(f"space file missing keys: {sorted(missing)}")
    unknown = data.keys() - required
    if unknown:
        raise SpaceError(f"space file has unknown keys: {sorted(unknown)}")
    n = len(data["points"])
    w = np.zeros((n, n))
    s = np.zeros((n, n))
    for e in data["edges"]:
        i, j = int(e["i"]), int(e["j"])
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise SpaceError(f"edge ({i},{j}) out of range for n={n}")
        w[i, j] = w[j, i] = float(e["w"])
        s[i, j] = s[j, i] = float(e.get("sigma", 0.0))
    return _build(str(data["name"]), data["dist"], data["measure"], w, s, data["K"])


def load_space(path) -> MetricMeasureSpace:
    """Load a space from a JSON file, validating every invariant."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpaceError(f"cannot parse {path}: {exc}") from exc
    return space_from_dict(data)


_CATALOG_SPEC = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\((.*)\))?\s*$")


def build_catalog_space(spec: str) -> MetricMeasureSpace:
    """Build a catalog space from a spec string, e.g. "circle(n=256)",
    "two_point(d=1)", "ou_chain(n=64,K=1)", or load "file:path.json".
    """
    if spec.startswith("file:"):
        return load_space(spec[5:])
    match = _CATALOG_SPEC.match(spec)
    if not match:
        raise SpaceError(f"cannot parse space spec {spec!r}")
    kind, argstr = match.group(1), match.group(2) or ""
    kwargs = {}
    for part in filter(None, (p.strip() for p in argstr.split(","))):
        if "=" not in part:
            raise SpaceError(f"malformed argument {part!r} in {spec!r}")
        key, val = part.split("=", 1)
        if ";" in val:  # list-valued, e.g. w=1;2;0.5
            kwargs[key.strip()] = [float(v) for v in val.split(";")]
        else:
            kwargs[key.strip()] = float(val)
    try:
        if kind == "circle":
            return circle_space(int(kwargs.pop("n")), kwargs.pop("L", 2 * math.pi), **kwargs)
        if kind == "interval":
            return interval_space(int(kwargs.pop("n")), kwargs.pop("L", 1.0), **kwargs)
        if kind == "torus2d":
            return torus_space(int(kwargs.pop("side")), kwargs.pop("L", 2 * math.pi), **kwargs)
        if kind == "ou_chain":
            return ou_chain_space(int(kwargs.pop("n")), kwargs.pop("K", 1.0), **kwargs)
        if kind == "two_point":
            return two_point_space(kwargs.pop("d", 1.0), **kwargs)
        if kind == "path":
            if "w" in kwargs:
                weights = np.atleast_1d(kwargs.pop("w"))
            else:
                weights = np.ones(int(kwargs.pop("n")) - 1)
            return path_space(weights, **kwargs)
    except KeyError as exc:
        raise SpaceError(f"space spec {spec!r} missing argument {exc}") from exc
    except TypeError as exc:
        raise SpaceError(f"bad arguments in space spec {spec!r}: {exc}") from exc
    raise SpaceError(f"unknown catalog space {kind!r}")
