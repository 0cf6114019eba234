"""Batch runner: builds spaces, computes spectra and distances, executes
verification suites, and emits deterministic JSON/CSV reports plus
plot-ready curve files.

Subcommands: describe, spectrum, verify, sweep. Config files may be JSON
or TOML; identical config + seed produces byte-identical outputs. Exit
codes: 0 all non-heuristic checks pass, 1 hard check failure, 2 config
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .geometry import cheeger
from .heat import spectrum
from .spaces import MetricMeasureSpace, SignedDensity, SpaceError, build_catalog_space
from .transport import HKSettings, hellinger_kantorovich, wasserstein

__all__ = ["RunConfig", "ConfigError", "run_suite", "describe", "main"]

CSV_COLUMNS = ("statement_id", "space", "n", "K", "p", "lhs", "rhs",
               "slack_ratio", "pass")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    spaces: list = field(default_factory=list)
    statements: list = field(default_factory=list)
    p: list = field(default_factory=lambda: [2.0])
    alpha: list = field(default_factory=lambda: [0.5, 2.0, 8.0])
    eig_indices: list = field(default_factory=lambda: [1])
    t_points: int = 20
    t_min_factor: float = 1e-6
    t_max_factor: float = 100.0
    random_instances: int = 0
    solver: dict = field(default_factory=dict)
    out: str = "reports"
    seed: int = 0

    def __post_init__(self):
        for s in self.statements:
            if s not in bnd.STATEMENTS:
                raise ConfigError(f"unknown statement id {s!r}; known: {bnd.STATEMENTS}")
        allowed_solver = {f.name for f in fields(HKSettings)}
        unknown = self.solver.keys() - allowed_solver
        if unknown:
            raise ConfigError(f"unknown solver keys: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        allowed = {f.name for f in fields(cls)}
        unknown = data.keys() - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def hk_settings(self) -> HKSettings:
        return HKSettings(**self.solver)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_config(path: str) -> RunConfig:
    text = Path(path).read_text()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    return RunConfig.from_dict(data)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def _sanitize(obj):
    """Replace NaN/Inf with None so report JSON stays strictly valid."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def _t_grid(config: RunConfig, space: MetricMeasureSpace) -> np.ndarray:
    lam1 = float(spectrum(space, 2).eigenvalues[1])
    t_char = 1.0 / lam1
    return np.geomspace(config.t_min_factor * t_char, config.t_max_factor * t_char,
                        config.t_points)


def _fiedler(space: MetricMeasureSpace, k: int = 1) -> SignedDensity:
    dec = spectrum(space, k + 1)
    return SignedDensity(space, dec.eigenfunctions[:, k])


def _random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(0.1, 1.0, n)


def _statement_reports(config: RunConfig, space: MetricMeasureSpace,
                       statement: str, rng: np.random.Generator,
                       curves: dict) -> list[bnd.BoundReport]:
    settings = config.hk_settings()
    grid = _t_grid(config, space)
    reports: list[bnd.BoundReport] = []
    dec = spectrum(space)
    if statement == "thm_1_1":
        for k in config.eig_indices:
            reports.append(bnd.verify_indeterminacy(space, dec.eigenfunctions[:, k]))
    elif statement == "cor_3_3":
        for k in config.eig_indices:
            for p in config.p:
                reports.append(bnd.verify_indeterminacy_p(space, dec.eigenfunctions[:, k], p))
    elif statement == "thm_1_4":
        for k in config.eig_indices:
            reports.append(bnd.verify_eig_bound(space, float(dec.eigenvalues[k]),
                                                dec.eigenfunctions[:, k]))
    elif statement == "cor_4_2":
        for k in config.eig_indices:
            for p in config.p:
                reports.append(bnd.verify_eig_bound_p(space, float(dec.eigenvalues[k]),
                                                      dec.eigenfunctions[:, k], p))
    elif statement == "thm_3_4":
        f = _fiedler(space)
        reports.extend(bnd.verify_hk_indeterminacy(space, f, grid, settings))
    elif statement == "prop_2_5_wass":
        f = _fiedler(space)
        pairs = [(f.positive_part, f.negative_part)]
        for _ in range(config.random_instances):
            r0 = _random_density(rng, space.n)
            r1 = _random_density(rng, space.n)
            r1 *= np.sum(r0 * space.measure) / np.sum(r1 * space.measure)
            pairs.append((r0, r1))
        for rho0, rho1 in pairs:
            for p in config.p:
                reports.extend(bnd.verify_heat_hellinger(space, rho0, rho1, p, grid))
    elif statement == "prop_2_5_hk":
        f = _fiedler(space)
        hk_reports = bnd.verify_heat_hellinger(space, f.positive_part, f.negative_part,
                                               2.0, grid, include_hk=True,
                                               settings=settings)
        reports.extend(r for r in hk_reports if r.statement_id == "prop_2_5_hk")
    elif statement == "prop_2_7":
        f = _fiedler(space)
        subsets = [f.values > 0]
        for _ in range(config.random_instances):
            mask = rng.random(space.n) < 0.5
            if mask.all() or not mask.any():
                mask[0] = not mask[0]
            subsets.append(mask)
        for mask in subsets:
            reports.extend(bnd.verify_heat_perimeter(space, mask, grid))
    elif statement == "prop_3_1":
        f = _fiedler(space)
        for t in grid:
            reports.append(bnd.verify_sqrt_heat(space, f, float(t)))
    elif statement == "lem_3_2":
        f = _fiedler(space)
        reports.append(bnd.verify_norm_cheeger(space, f))
        for _ in range(config.random_instances):
            g = rng.standard_normal(space.n)
            reports.append(bnd.verify_norm_cheeger(space, SignedDensity(space, g).centered()))
    elif statement == "step1_sweep":
        f = _fiedler(space)
        ts, curve = bnd.step1_sweep(space, f, bnd.default_t_grid(space))
        curves[f"step1_{_safe(space.name)}"] = ("t,g", np.column_stack([ts, curve]))
        plan = wasserstein(space, f.positive_part, f.negative_part, 1.0)
        reports.append(bnd.BoundReport(
            "step1_sweep", plan.distance, float(np.max(curve)),
            parameters={"K": space.curvature, "p": 1.0,
                        "argmax_t": float(ts[int(np.argmax(curve))])},
            space=space.name,
        ))
    else:  # pragma: no cover - guarded by RunConfig validation
        raise ConfigError(f"unknown statement id {statement!r}")
    return reports


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name)


def run_suite(config: RunConfig, out_dir: str | None = None) -> int:
    """Execute the configured verification suite; returns the exit code."""
    out = Path(out_dir or config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "curves").mkdir(exist_ok=True)
    rng = np.random.default_rng(config.seed)
    try:
        spaces = [build_catalog_space(s) for s in config.spaces]
    except SpaceError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    curves: dict = {}
    reports: list[bnd.BoundReport] = []
    sizes: dict[str, int] = {}
    for space in spaces:
        sizes[space.name] = space.n
        for statement in config.statements:
            reports.extend(_statement_reports(config, space, statement, rng, curves))
    payload = {
        "config": config.to_dict(),
        "reports": [_sanitize(r.to_dict()) for r in reports],
    }
    (out / "reports.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    lines = [",".join(CSV_COLUMNS)]
    for r in reports:
        row = (r.statement_id, r.space, sizes.get(r.space, ""),
               r.parameters.get("K", ""), r.parameters.get("p", ""),
               r.lhs, r.rhs, r.slack_ratio, r.passed)
        lines.append(",".join(_fmt(v) for v in row))
    (out / "reports.csv").write_text("\n".join(lines) + "\n")
    for name, (header, data) in sorted(curves.items()):
        rows = [header] + [",".join(_fmt(float(v)) for v in row) for row in data]
        (out / "curves" / f"{name}.csv").write_text("\n".join(rows) + "\n")
    failures = [r for r in reports if not r.passed and not r.heuristic]
    for r in failures:
        print(f"FAIL {r.statement_id} on {r.space}: lhs={r.lhs:.6g} rhs={r.rhs:.6g}",
              file=sys.stderr)
    print(f"{len(reports)} reports, {len(failures)} hard failures -> {out}")
    return 1 if failures else 0


def describe(space: MetricMeasureSpace, file=None) -> None:
    file = file or sys.stdout
    dec = spectrum(space, min(space.n, 2))
    lam1 = float(dec.eigenvalues[1]) if space.n > 1 else 0.0
    est = cheeger(space, "auto")
    print(f"space      {space.name}", file=file)
    print(f"n          {space.n}", file=file)
    print(f"mass       {_fmt(space.total_mass)}", file=file)
    print(f"diameter   {_fmt(space.diameter())}", file=file)
    print(f"K          {_fmt(space.curvature)}", file=file)
    print(f"lambda_1   {_fmt(lam1)}", file=file)
    kind = "exact" if est.exact else "sweep"
    print(f"cheeger    [{_fmt(est.lower)}, {_fmt(est.upper)}] ({kind})", file=file)


def _spectrum_cmd(config: RunConfig, out_dir: str | None, k: int) -> int:
    out = Path(out_dir or config.out)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    for spec in config.spaces:
        space = build_catalog_space(spec)
        dec = spectrum(space, min(k, space.n))
        rows = ["k,lambda"]
        rows += [f"{i},{_fmt(float(lam))}" for i, lam in enumerate(dec.eigenvalues)]
        path = out / "curves" / f"spectrum_{_safe(space.name)}.csv"
        path.write_text("\n".join(rows) + "\n")
        head = ", ".join(_fmt(float(v)) for v in dec.eigenvalues[: min(6, dec.k)])
        print(f"{space.name}: lambda = [{head}{', ...' if dec.k > 6 else ''}] -> {path}")
    return 0


def _sweep_cmd(config: RunConfig, out_dir: str | None) -> int:
    out = Path(out_dir or config.out)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    settings = config.hk_settings()
    for spec in config.spaces:
        space = build_catalog_space(spec)
        f = _fiedler(space)
        ts, curve = bnd.step1_sweep(space, f)
        rows = ["t,g"] + [f"{_fmt(float(t))},{_fmt(float(g))}" for t, g in zip(ts, curve)]
        (out / "curves" / f"step1_{_safe(space.name)}.csv").write_text("\n".join(rows) + "\n")
        rows = ["alpha,hk,scaled_hk"]
        for alpha in config.alpha:
            sol = hellinger_kantorovich(space, f.positive_part, f.negative_part,
                                        float(alpha), settings)
            rows.append(f"{_fmt(float(alpha))},{_fmt(sol.distance)},"
                        f"{_fmt(math.sqrt(alpha) * sol.distance)}")
        (out / "curves" / f"hk_alpha_{_safe(space.name)}.csv").write_text("\n".join(rows) + "\n")
        print(f"{space.name}: wrote step1 and hk-alpha curves to {out / 'curves'}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmslab",
                                     description="verification suites for transport "
                                     "and heat-flow inequalities on finite spaces")
    parser.add_argument("--config", help="JSON or TOML config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed override")
    sub = parser.add_subparsers(dest="command", required=True)
    p_desc = sub.add_parser("describe", help="print space summaries")
    p_desc.add_argument("spaces", nargs="*", help="space specs, e.g. circle(n=256)")
    p_spec = sub.add_parser("spectrum", help="export eigenvalue tables")
    p_spec.add_argument("spaces", nargs="*")
    p_spec.add_argument("-k", type=int, default=16, help="number of eigenvalues")
    p_ver = sub.add_parser("verify", help="run the verification suite")
    p_ver.add_argument("--statement", action="append", default=None,
                       help="statement id (repeatable; overrides config)")
    p_ver.add_argument("spaces", nargs="*")
    p_sweep = sub.add_parser("sweep", help="export g(t) and hk-vs-alpha curves")
    p_sweep.add_argument("spaces", nargs="*")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        if getattr(args, "spaces", None):
            config.spaces = list(args.spaces)
        if getattr(args, "statement", None):
            config = RunConfig.from_dict({**config.to_dict(), "statements": args.statement})
        if args.seed is not None:
            config.seed = args.seed
    except (ConfigError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "describe":
            for spec in config.spaces:
                describe(build_catalog_space(spec))
            return 0
        if args.command == "spectrum":
            return _spectrum_cmd(config, args.out, args.k)
        if args.command == "verify":
            return run_suite(config, args.out)
        if args.command == "sweep":
            return _sweep_cmd(config, args.out)
    except SpaceError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
