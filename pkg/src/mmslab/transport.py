"""Transport-type distances between nonnegative measures given as
densities against the space measure.

* wasserstein: exact W_p as a finite linear program (dual simplex on the
  bipartite transportation polytope), with dual potentials as optimality
  certificate. Returns the distinguished value math.inf on mass mismatch.
* hellinger: He_p by direct summation, p in [1, 2].
* hellinger_kantorovich: HK_alpha via its static entropy-transport form
  with cost c(x, y) = -2 log cos(min(d/sqrt(alpha), pi/2)), solved by a
  log-domain scaling algorithm with exact elimination of the global dual
  translations, decomposed over connected components of the finite-cost
  graph.
* wasserstein_oracle_1d: independent closed-form solver on circle / line
  catalog spaces via cumulative distribution functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.sparse.csgraph import connected_components

from .spaces import MetricMeasureSpace

__all__ = [
    "SolverError",
    "TransportPlan",
    "EntropyTransportSolution",
    "HKSettings",
    "wasserstein",
    "hellinger",
    "hellinger_kantorovich",
    "hk_cost_matrix",
    "wasserstein_oracle_1d",
]

MASS_RTOL = 1e-9


class SolverError(RuntimeError):
    """The underlying optimizer failed to produce a certified solution."""


def _check_density(rho, n, label) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (n,):
        raise ValueError(f"{label} must have shape ({n},), got {rho.shape}")
    if np.any(rho < 0):
        raise ValueError(f"{label} has negative entries")
    return rho


@dataclass(frozen=True)
class TransportPlan:
    """Optimal coupling for W_p with its optimality certificate.

    rows/cols/flows give the sparse coupling in global point indices;
    potentials are LP duals (per unit mass) on the two supports.
    """

    distance: float
    p: float
    cost: float                      # sum pi(x,y) d(x,y)^p
    rows: np.ndarray
    cols: np.ndarray
    flows: np.ndarray
    potential_source: np.ndarray
    potential_target: np.ndarray
    support_source: np.ndarray
    support_target: np.ndarray
    duality_gap: float
    marginal_error: float            # max relative marginal violation

    @property
    def finite(self) -> bool:
        return math.isfinite(self.distance)

    def coupling_matrix(self, n: int) -> np.ndarray:
        out = np.zeros((n, n))
        out[self.rows, self.cols] = self.flows
        return out


_EMPTY = np.empty(0)


def _infinite_plan(p: float) -> TransportPlan:
    return TransportPlan(math.inf, p, math.inf, _EMPTY.astype(int), _EMPTY.astype(int),
                         _EMPTY, _EMPTY, _EMPTY, _EMPTY.astype(int), _EMPTY.astype(int),
                         math.nan, math.nan)


def _zero_plan(p: float) -> TransportPlan:
    return TransportPlan(0.0, p, 0.0, _EMPTY.astype(int), _EMPTY.astype(int),
                         _EMPTY, _EMPTY, _EMPTY, _EMPTY.astype(int), _EMPTY.astype(int),
                         0.0, 0.0)


def _solve_transport_lp(a: np.ndarray, b: np.ndarray, cost: np.ndarray):
    """Exact optimum of min <cost, pi> st row sums a, col sums b, pi >= 0."""
    n0, n1 = cost.shape
    nv = n0 * n1
    var = np.arange(nv)
    rows_a = sparse.csr_matrix((np.ones(nv), (np.repeat(np.arange(n0), n1), var)),
                               shape=(n0, nv))
    rows_b = sparse.csr_matrix((np.ones(nv), (np.tile(np.arange(n1), n0), var)),
                               shape=(n1, nv))
    res = linprog(cost.ravel(), A_eq=sparse.vstack([rows_a, rows_b], format="csr"),
                  b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise SolverError(f"transport LP failed (status {res.status}): {res.message}")
    plan = res.x.reshape(n0, n1)
    u = res.eqlin.marginals[:n0]
    v = res.eqlin.marginals[n0:]
    return plan, float(res.fun), u, v


def wasserstein(space: MetricMeasureSpace, rho0, rho1, p: float = 1.0) -> TransportPlan:
    """Exact p-Wasserstein distance between rho0*m and rho1*m.

    Returns a plan with distance = math.inf when the total masses differ
    by more than MASS_RTOL relative.
    """
    if p < 1:
        raise ValueError(f"wasserstein needs p >= 1, got {p}")
    n = space.n
    rho0 = _check_density(rho0, n, "rho0")
    rho1 = _check_density(rho1, n, "rho1")
    m = space.measure
    idx0 = np.flatnonzero(rho0 > 0)
    idx1 = np.flatnonzero(rho1 > 0)
    a = rho0[idx0] * m[idx0]
    b = rho1[idx1] * m[idx1]
    mass0, mass1 = a.sum(), b.sum()
    if abs(mass0 - mass1) > MASS_RTOL * max(mass0, mass1, 1e-300):
        return _infinite_plan(p)
    if mass0 == 0.0:
        return _zero_plan(p)
    # canonical orientation makes W(mu0, mu1) == W(mu1, mu0) bit for bit
    swapped = (idx1.tobytes(), b.tobytes()) < (idx0.tobytes(), a.tobytes())
    if swapped:
        idx0, idx1, a, b = idx1, idx0, b, a
    b = b * (a.sum() / b.sum())  # absorb the (tolerated) mass mismatch
    cost = space.dist[np.ix_(idx0, idx1)] ** p
    plan, total, u, v = _solve_transport_lp(a, b, cost)
    gap = abs(total - (a @ u + b @ v))
    # marginal violation relative to the total transported mass (per-row
    # relative error is meaningless for float-noise support masses)
    total_mass = a.sum()
    r_err = np.max(np.abs(plan.sum(axis=1) - a)) / total_mass
    c_err = np.max(np.abs(plan.sum(axis=0) - b)) / total_mass
    nz = plan > 0
    ri, ci = np.nonzero(nz)
    if swapped:
        return TransportPlan(total ** (1.0 / p), p, total, idx1[ci], idx0[ri],
                             plan[ri, ci], v, u, idx1, idx0, gap,
                             float(max(r_err, c_err)))
    return TransportPlan(total ** (1.0 / p), p, total, idx0[ri], idx1[ci],
                         plan[ri, ci], u, v, idx0, idx1, gap,
                         float(max(r_err, c_err)))


def hellinger(space: MetricMeasureSpace, rho0, rho1, p: float = 2.0) -> float:
    """He_p(rho0*m, rho1*m) = (sum |rho0^(1/p) - rho1^(1/p)|^p m)^(1/p)."""
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"hellinger needs p in [1, 2], got {p}")
    n = space.n
    rho0 = _check_density(rho0, n, "rho0")
    rho1 = _check_density(rho1, n, "rho1")
    diff = np.abs(rho0 ** (1.0 / p) - rho1 ** (1.0 / p)) ** p
    return float(np.sum(diff * space.measure)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Hellinger-Kantorovich via static entropy transport
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HKSettings:
    """Scaling-solver settings; eps_target is relative to the largest
    finite cost entry, floored by eps_floor (down at the floor the
    entropic bias is negligible while the kernel stays well mixed)."""

    eps_target_rel: float = 1e-3
    eps_floor: float = 1e-11
    eps_start: float = 1.0
    schedule_steps: int = 8
    max_iter: int = 10_000
    max_stage_iter: int = 2_000
    marginal_tol: float = 1e-9
    bias_factor: float = 10.0


@dataclass(frozen=True)
class EntropyTransportSolution:
    """HK_alpha solve: coupling, marginal divergences, cost and certificates."""

    distance: float                 # sqrt(objective)
    alpha: float
    coupling: np.ndarray            # dense n x n plan (masses)
    kl_source: float                # KL(gamma_0 | mu0)
    kl_target: float                # KL(gamma_1 | mu1)
    transport_cost: float           # integral of c_alpha against gamma
    epsilon: float                  # regularization actually used
    bias_bound: float               # declared bias: bias_factor * epsilon
    lower_bound: float              # certified dual value <= true HK^2
    converged: bool
    iterations: int
    objective_trace: tuple = field(repr=False, default=())

    @property
    def objective(self) -> float:
        return self.kl_source + self.kl_target + self.transport_cost


def hk_cost_matrix(dist: np.ndarray, alpha: float) -> np.ndarray:
    """Entropy-transport cost -2 log cos(d / sqrt(alpha)), +inf from pi/2 on."""
    if alpha <= 0:
        raise ValueError(f"hk needs alpha > 0, got {alpha}")
    x = dist / math.sqrt(alpha)
    out = np.full(dist.shape, np.inf)
    near = x < math.pi / 2
    out[near] = -2.0 * np.log(np.cos(x[near]))
    tiny = x < 1e-4  # series keeps precision where cos(x) rounds to 1
    out[tiny] = x[tiny] ** 2 * (1.0 + x[tiny] ** 2 / 6.0)
    return out


def _kl(nu: np.ndarray, mu: np.ndarray) -> float:
    mask = nu > 0
    val = float(np.sum(nu[mask] * np.log(nu[mask] / mu[mask])))
    return val - float(nu.sum()) + float(mu.sum())


def _logsumexp_rows(mat: np.ndarray) -> np.ndarray:
    mx = np.max(mat, axis=1)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        out = safe + np.log(np.sum(np.exp(mat - safe[:, None]), axis=1))
    return np.where(np.isfinite(mx), out, -np.inf)


def _scaling_component(mu0, mu1, cost, settings: HKSettings):
    """Log-domain scaling iterations on one connected component.

    gamma = exp((f + g - C)/eps) * mu0 x mu1; each sweep performs the two
    closed-form block updates and then removes the two global translation
    modes exactly (they are the slow directions of the plain iteration).
    Returns (f, g, eps, iterations, converged, trace).
    """
    lm0 = np.log(mu0)
    lm1 = np.log(mu1)
    finite = cost[np.isfinite(cost)]
    scale = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    eps_target = max(settings.eps_target_rel * scale, settings.eps_floor)
    hi = max(settings.eps_start, eps_target)
    # keep stage ratios modest so warm starts carry over without shocks
    steps = 1 if hi <= eps_target else max(
        settings.schedule_steps, int(math.ceil(math.log10(hi / eps_target) / 2)) + 1)
    schedule = np.geomspace(hi, eps_target, steps)
    f = np.zeros_like(mu0)
    g = np.zeros_like(mu1)
    total_mass = float(mu0.sum() + mu1.sum())
    n0 = mu0.size
    iterations = 0
    trace: list[float] = []
    snapshot = None  # best converged (f, g, eps) so far
    for eps in schedule:
        shrink = eps / (1.0 + eps)
        converged = False
        prev_delta = None
        last_fg = np.concatenate([f, g])
        stage_it = 0
        while iterations < settings.max_iter and stage_it < settings.max_stage_iter:
            iterations += 1
            stage_it += 1
            lse_f = _logsumexp_rows((g[None, :] - cost) / eps + lm1[None, :])
            # row marginals of the current gamma, for the stop criterion
            with np.errstate(over="ignore"):
                gamma0 = mu0 * np.exp(np.minimum(f / eps + lse_f, 700.0))
                resid = float(np.sum(np.abs(gamma0 - mu0 * np.exp(-f)))) / total_mass
            if resid < settings.marginal_tol:
                converged = True
                break
            f = -shrink * lse_f
            lse_g = _logsumexp_rows(((f[:, None] - cost) / eps + lm0[:, None]).T)
            g = -shrink * lse_g
            # exact elimination of the two global translation modes
            log_a = _logsumexp_rows((lm0 - f)[None, :])[0]
            log_b = _logsumexp_rows((lm1 - g)[None, :])[0]
            log_m = _logsumexp_rows((g / eps + lse_g + lm1)[None, :])[0]
            s = ((1.0 + eps) * log_a - log_b - eps * log_m) / (2.0 + eps)
            u = s - log_a + log_b
            f = f + s
            g = g + u
            # solver trace: negative dual value, nonincreasing within a stage
            with np.errstate(over="ignore"):
                mass_g = float(np.exp(log_m + (s + u) / eps))
                dual = (mu0.sum() - float(np.exp(log_a - s))) \
                    + (mu1.sum() - float(np.exp(log_b - u))) \
                    - eps * (mass_g - mu0.sum() * mu1.sum())
            trace.append(-dual)
            # Aitken step: the residual slow modes contract geometrically,
            # so extrapolate the potential increments every few sweeps
            cur = np.concatenate([f, g])
            delta = cur - last_fg
            last_fg = cur
            if prev_delta is not None and stage_it % 6 == 0:
                denom = float(prev_delta @ prev_delta)
                rho = float(delta @ prev_delta) / denom if denom > 0 else 0.0
                if 0.2 < rho < 0.9999:
                    jump = rho / (1.0 - rho)
                    f = f + jump * delta[:n0]
                    g = g + jump * delta[n0:]
                    last_fg = np.concatenate([f, g])
                    prev_delta = None
                    continue
            prev_delta = delta
        if converged:
            snapshot = (f.copy(), g.copy(), float(eps))
        else:
            break  # deeper stages would start from a bad iterate
    if snapshot is None:
        return f, g, float(schedule[0]), iterations, False, trace
    f, g, eps = snapshot
    return f, g, eps, iterations, True, trace


def hellinger_kantorovich(space: MetricMeasureSpace, rho0, rho1, alpha: float,
                          settings: HKSettings | None = None) -> EntropyTransportSolution:
    """HK_alpha between rho0*m and rho1*m (finite for unequal masses).

    HK^2 = min over couplings gamma of
    KL(gamma_0|mu0) + KL(gamma_1|mu1) + int c_alpha dgamma.
    """
    settings = settings or HKSettings()
    n = space.n
    rho0 = _check_density(rho0, n, "rho0")
    rho1 = _check_density(rho1, n, "rho1")
    m = space.measure
    idx0 = np.flatnonzero(rho0 > 0)
    idx1 = np.flatnonzero(rho1 > 0)
    mu0 = rho0[idx0] * m[idx0]
    mu1 = rho1[idx1] * m[idx1]
    n0, n1 = idx0.size, idx1.size
    coupling = np.zeros((n, n))
    if n0 == 0 and n1 == 0:
        return EntropyTransportSolution(0.0, alpha, coupling, 0.0, 0.0, 0.0,
                                        0.0, settings.bias_factor * 0.0, 0.0, True, 0)
    cost = hk_cost_matrix(space.dist[np.ix_(idx0, idx1)], alpha) if n0 and n1 \
        else np.zeros((n0, n1))
    # split along connected components of the finite-cost bipartite graph;
    # isolated points and isolated pairs are solved in closed form
    if n0 and n1:
        fin_i, fin_j = np.nonzero(np.isfinite(cost))
        adj = sparse.csr_matrix((np.ones(fin_i.size), (fin_i, n0 + fin_j)),
                                shape=(n0 + n1, n0 + n1))
        ncomp, labels = connected_components(adj, directed=False)
    else:
        ncomp, labels = n0 + n1, np.arange(n0 + n1)
    objective = 0.0
    lower = 0.0
    iterations = 0
    converged = True
    eps_used = 0.0
    trace: list[float] = []
    for comp in range(ncomp):
        members = np.flatnonzero(labels == comp)
        li = members[members < n0]
        rj = members[members >= n0] - n0
        if li.size == 0:
            objective += float(mu1[rj].sum())
            lower += float(mu1[rj].sum())
            continue
        if rj.size == 0:
            objective += float(mu0[li].sum())
            lower += float(mu0[li].sum())
            continue
        if li.size == 1 and rj.size == 1:
            c = float(cost[li[0], rj[0]])
            a = float(mu0[li[0]])
            b = float(mu1[rj[0]])
            s_opt = math.sqrt(a * b) * math.exp(-c / 2.0)
            coupling[idx0[li[0]], idx1[rj[0]]] = s_opt
            objective += a + b - 2.0 * s_opt
            lower += a + b - 2.0 * s_opt
            continue
        c_sub = cost[np.ix_(li, rj)]
        a_sub = mu0[li]
        b_sub = mu1[rj]
        f, g, eps, iters, ok, tr = _scaling_component(a_sub, b_sub, c_sub, settings)
        iterations += iters
        eps_used = max(eps_used, eps)
        trace.extend(tr)
        with np.errstate(invalid="ignore"):
            lg = (f[:, None] + g[None, :] - c_sub) / eps \
                + np.log(a_sub)[:, None] + np.log(b_sub)[None, :]
        lg = np.where(np.isfinite(c_sub), lg, -np.inf)
        if np.any(lg > 700.0):
            ok = False  # blown-up iterate: report it, but keep values finite
            lg = np.minimum(lg, 700.0)
        converged = converged and ok
        gamma = np.exp(lg)
        kl0 = _kl(gamma.sum(axis=1), a_sub)
        kl1 = _kl(gamma.sum(axis=0), b_sub)
        tcost = float(np.sum(np.where(gamma > 0, gamma * np.where(np.isfinite(c_sub), c_sub, 0.0), 0.0)))
        objective += kl0 + kl1 + tcost
        # certified lower bound: shift f to dual feasibility f+g <= c
        viol = f[:, None] + g[None, :] - c_sub
        delta = max(float(np.max(viol[np.isfinite(c_sub)], initial=0.0)), 0.0)
        with np.errstate(over="ignore"):
            lower += float(np.sum(a_sub * (1.0 - np.exp(-(f - delta))))
                           + np.sum(b_sub * (1.0 - np.exp(-g))))
        coupling[np.ix_(idx0[li], idx1[rj])] = gamma
    full0 = coupling.sum(axis=1)[idx0]
    full1 = coupling.sum(axis=0)[idx1]
    kl_source = _kl(full0, mu0)
    kl_target = _kl(full1, mu1)
    transport_cost = objective - kl_source - kl_target
    return EntropyTransportSolution(
        distance=math.sqrt(max(objective, 0.0)),
        alpha=alpha,
        coupling=coupling,
        kl_source=kl_source,
        kl_target=kl_target,
        transport_cost=transport_cost,
        epsilon=eps_used,
        bias_bound=settings.bias_factor * eps_used,
        lower_bound=max(lower, 0.0),
        converged=converged,
        iterations=iterations,
        objective_trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# 1D closed-form oracle
# ---------------------------------------------------------------------------

def _quantile_cost(x0, a, x1, b, p) -> float:
    """int |F0^{-1} - F1^{-1}|^p dq for atomic measures on the line."""
    o0 = np.argsort(x0, kind="stable")
    o1 = np.argsort(x1, kind="stable")
    x0, a = x0[o0], a[o0]
    x1, b = x1[o1], b[o1]
    ca = np.cumsum(a)
    cb = np.cumsum(b)
    cb = cb * (ca[-1] / cb[-1])
    i = j = 0
    q = 0.0
    total = 0.0
    while i < len(ca) and j < len(cb):
        q_next = min(ca[i], cb[j])
        total += (q_next - q) * abs(x0[i] - x1[j]) ** p
        q = q_next
        if ca[i] <= q + 1e-18 * ca[-1]:
            i += 1
        if j < len(cb) and cb[j] <= q + 1e-18 * ca[-1]:
            j += 1
    return total


def wasserstein_oracle_1d(space: MetricMeasureSpace, rho0, rho1, p: float = 1.0) -> float:
    """Closed-form W_p on catalog 1D spaces.

    Line spaces: quantile formula for any p >= 1. Circle: p = 1 only, by
    minimizing the offset of the cumulative difference function.
    """
    if space.kind not in ("circle", "line") or space.coords is None:
        raise ValueError("1D oracle needs a catalog circle or line space")
    if p < 1:
        raise ValueError(f"oracle needs p >= 1, got {p}")
    n = space.n
    rho0 = _check_density(rho0, n, "rho0")
    rho1 = _check_density(rho1, n, "rho1")
    mu0 = rho0 * space.measure
    mu1 = rho1 * space.measure
    mass0, mass1 = float(mu0.sum()), float(mu1.sum())
    if abs(mass0 - mass1) > MASS_RTOL * max(mass0, mass1, 1e-300):
        return math.inf
    if mass0 == 0.0:
        return 0.0
    if space.kind == "line":
        idx0 = np.flatnonzero(mu0 > 0)
        idx1 = np.flatnonzero(mu1 > 0)
        cost = _quantile_cost(space.coords[idx0], mu0[idx0],
                              space.coords[idx1], mu1[idx1], p)
        return cost ** (1.0 / p)
    if p != 1:
        raise ValueError("circle oracle only supports p = 1")
    order = np.argsort(space.coords, kind="stable")
    x = space.coords[order]
    delta = (mu0 - mu1)[order]
    circumference = space.n * (x[1] - x[0]) if n > 1 else 0.0
    gaps = np.diff(np.append(x, x[0] + circumference))
    partial = np.cumsum(delta)
    # min_c sum |partial - c| * gap is attained at a weighted median
    o = np.argsort(partial, kind="stable")
    wsorted = gaps[o]
    cum = np.cumsum(wsorted)
    c = partial[o][np.searchsorted(cum, cum[-1] / 2.0)]
    return float(np.sum(np.abs(partial - c) * gaps))
