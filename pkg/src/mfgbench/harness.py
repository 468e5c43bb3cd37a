"""Run execution, hyperparameter sweeps, and random-game campaigns.

Every run writes four artifacts into its own directory — metrics.csv,
mean_field.csv, policy.csv, summary.json — atomically (write to a temp file,
then rename), so a partially written file is never observable at its final
path. Runs are deterministic given (config, seed); the harness owns all
concurrency and workers never share run directories, so results are
independent of the parallelism degree.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import MFGError, MFGModel
from .dynamics import BRConfig, MeanFieldConfig
from .envs import build_env
from .garnet import RNG_ALGORITHM, GarnetSpec, generate
from .solvers import SolverConfig, SolverTrace, run_solver

DEFAULT_OUT_ENV_VAR = "BENCH_MFG_OUT"
METRICS_HEADER = "iteration,exploitability,wall_time_ms"


class IoError(MFGError):
    pass


def _fmt(x: float) -> str:
    # Full-precision decimal text: 17 significant digits round-trip float64.
    return format(float(x), ".17g")


def default_out_root() -> Path:
    return Path(os.environ.get(DEFAULT_OUT_ENV_VAR, "results"))


@dataclass(frozen=True)
class RunSpec:
    """One solver run: an environment (or garnet spec), an algorithm, a seed."""

    algorithm: str
    env: str | None = None
    env_params: dict = field(default_factory=dict)
    garnet: dict | None = None
    solver_params: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str | None = None

    @property
    def env_label(self) -> str:
        if self.garnet is not None:
            g = self.garnet
            return "garnet_{}x{}x{}_{}_{}".format(
                g.get("n_states"), g.get("n_actions"), g.get("branching"),
                g.get("dynamics_structure", "additive")[0],
                g.get("reward_structure", "additive")[0],
            )
        return self.env or "unknown"


@dataclass(frozen=True)
class RunSummary:
    env: str
    algorithm: str
    seed: int
    final_exploitability: float
    iterations: int
    wall_time_ms: float
    config_hash: str
    params: dict
    config: dict
    out_dir: str
    ok: bool = True
    error: str | None = None


# Solver-parameter keys that configure the inner numerical loops.
_MF_KEYS = {"mf_max_steps": "max_steps", "mf_tol": "tol"}
_BR_KEYS = {"br_horizon": "horizon", "br_tol": "tol"}


def build_solver_config(solver_params: dict, seed: int) -> SolverConfig:
    params = dict(solver_params)
    mf_kwargs = {dst: params.pop(src) for src, dst in _MF_KEYS.items() if src in params}
    br_kwargs = {dst: params.pop(src) for src, dst in _BR_KEYS.items() if src in params}
    return SolverConfig(
        init_seed=seed,
        mf_cfg=MeanFieldConfig(**mf_kwargs),
        br_cfg=BRConfig(**br_kwargs),
        **params,
    )


def build_model(spec: RunSpec) -> MFGModel:
    if (spec.env is None) == (spec.garnet is None):
        raise MFGError("exactly one of env or garnet must be given")
    if spec.garnet is not None:
        _, model = generate(GarnetSpec(**spec.garnet))
        return model
    return build_env(spec.env, spec.env_params)


def config_hash(spec: RunSpec) -> str:
    """Stable digest of everything but the seed; canonical JSON keeps it
    platform-independent."""
    payload = {
        "algorithm": spec.algorithm,
        "env": spec.env,
        "env_params": spec.env_params,
        "garnet": spec.garnet,
        "solver_params": spec.solver_params,
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def run_directory(spec: RunSpec, out_root: Path | None = None) -> Path:
    if spec.out_dir is not None:
        return Path(spec.out_dir)
    root = Path(out_root) if out_root is not None else default_out_root()
    return root / spec.env_label / spec.algorithm / config_hash(spec) / str(spec.seed)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.parent / f".{path.name}.tmp{os.getpid()}"
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as e:
        raise IoError(f"failed to write {path}: {e}") from e


def write_trace_files(trace: SolverTrace, out_dir: Path, summary: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [METRICS_HEADER]
    for p in trace.points:
        lines.append(f"{p.iteration},{_fmt(p.exploitability)},{_fmt(p.wall_time_ms)}")
    _atomic_write(out_dir / "metrics.csv", "\n".join(lines) + "\n")

    mu = trace.final_mean_field.probs
    _atomic_write(out_dir / "mean_field.csv", ",".join(_fmt(v) for v in mu) + "\n")

    pi = trace.final_policy.action_probs
    policy_lines = [",".join(_fmt(v) for v in row) for row in pi]
    _atomic_write(out_dir / "policy.csv", "\n".join(policy_lines) + "\n")

    _atomic_write(out_dir / "summary.json", json.dumps(summary, sort_keys=True, indent=1) + "\n")


def execute_run(spec: RunSpec, out_root: Path | None = None) -> RunSummary:
    """Build the model, run the solver, persist all artifacts."""
    model = build_model(spec)
    cfg = build_solver_config(spec.solver_params, spec.seed)
    out_dir = run_directory(spec, out_root)
    chash = config_hash(spec)

    t0 = time.perf_counter()
    trace = run_solver(model, spec.algorithm, cfg)
    wall_ms = (time.perf_counter() - t0) * 1000.0

    params = dict(model.params)
    if spec.garnet is not None:
        params["dynamics_structure"] = spec.garnet.get("dynamics_structure", "additive")
        params["reward_structure"] = spec.garnet.get("reward_structure", "additive")
    summary = {
        "env": spec.env_label,
        "params": params,
        "algo": spec.algorithm,
        "config": dict(spec.solver_params),
        "seed": spec.seed,
        "final_exploitability": trace.final_exploitability,
        "iterations": cfg.iterations,
        "wall_time_ms": wall_ms,
        "config_hash": chash,
        "rng_algorithm": RNG_ALGORITHM,
    }
    write_trace_files(trace, out_dir, summary)
    return RunSummary(
        env=spec.env_label,
        algorithm=spec.algorithm,
        seed=spec.seed,
        final_exploitability=trace.final_exploitability,
        iterations=cfg.iterations,
        wall_time_ms=wall_ms,
        config_hash=chash,
        params=params,
        config=dict(spec.solver_params),
        out_dir=str(out_dir),
        ok=True,
    )


def _execute_run_guarded(spec: RunSpec, out_root: str | None) -> RunSummary:
    try:
        return execute_run(spec, Path(out_root) if out_root else None)
    except Exception as e:  # diverging configs are data, not crashes
        return RunSummary(
            env=spec.env_label,
            algorithm=spec.algorithm,
            seed=spec.seed,
            final_exploitability=float("nan"),
            iterations=0,
            wall_time_ms=0.0,
            config_hash=config_hash(spec),
            params={},
            config=dict(spec.solver_params),
            out_dir=str(run_directory(spec, Path(out_root) if out_root else None)),
            ok=False,
            error="".join(traceback.format_exception_only(type(e), e)).strip(),
        )


def apply_override(spec: RunSpec, key: str, value) -> RunSpec:
    """Route a dotted override key into the matching RunSpec section.

    ``solver.x`` targets solver parameters, ``env.x`` / ``garnet.x`` the
    model parameters; a bare key is shorthand for an environment parameter.
    """
    if key.startswith("solver."):
        return replace(spec, solver_params={**spec.solver_params, key[7:]: value})
    if key.startswith("garnet."):
        return replace(spec, garnet={**(spec.garnet or {}), key[7:]: value})
    name = key[4:] if key.startswith("env.") else key
    return replace(spec, env_params={**spec.env_params, name: value})


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian product of per-hyperparameter grids, replicated over seeds."""

    base: RunSpec
    grid: dict[str, list] = field(default_factory=dict)
    seeds: tuple[int, ...] = (0, 1, 2, 3)
    jobs: int = 1
    out_root: str | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seed list must be non-empty")
        if any(len(v) == 0 for v in self.grid.values()):
            raise ValueError("grids must be non-empty")


def _config_key(assignment: dict) -> str:
    return json.dumps(assignment, sort_keys=True, default=repr)


def expand_sweep(spec: SweepSpec) -> list[tuple[dict, RunSpec]]:
    """All (grid assignment, run spec) pairs, in deterministic order."""
    keys = sorted(spec.grid)
    combos = itertools.product(*(spec.grid[k] for k in keys)) if keys else [()]
    out = []
    for values in combos:
        assignment = dict(zip(keys, values))
        run = spec.base
        for k, v in assignment.items():
            run = apply_override(run, k, v)
        for seed in spec.seeds:
            out.append((assignment, replace(run, seed=seed)))
    return out


@dataclass(frozen=True)
class SweepResult:
    best_config: dict
    best_mean: float
    summaries: tuple[RunSummary, ...]


def select_best(
    runs: list[tuple[dict, RunSummary]],
) -> tuple[dict, float]:
    """Pick the grid assignment minimizing the seed-mean of final exploitability.

    Failed runs are skipped; a config with no successful run is not eligible.
    Ties break on the lexicographic order of the canonical config text so the
    winner is reproducible.
    """
    groups: dict[str, tuple[dict, list[float]]] = {}
    for assignment, summary in runs:
        key = _config_key(assignment)
        groups.setdefault(key, (assignment, []))
        if summary.ok and np.isfinite(summary.final_exploitability):
            groups[key][1].append(summary.final_exploitability)
    scored = [
        (float(np.mean(vals)), key, assignment)
        for key, (assignment, vals) in sorted(groups.items())
        if vals
    ]
    if not scored:
        raise MFGError("no successful run in sweep")
    best = min(scored, key=lambda t: (t[0], t[1]))
    return best[2], best[0]


def execute_sweep(spec: SweepSpec) -> SweepResult:
    pairs = expand_sweep(spec)
    specs = [run for _, run in pairs]
    out_root = spec.out_root
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            summaries = list(pool.map(_execute_run_guarded, specs, [out_root] * len(specs)))
    else:
        summaries = [_execute_run_guarded(s, out_root) for s in specs]
    tagged = list(zip((a for a, _ in pairs), summaries))
    tagged.sort(key=lambda t: (_config_key(t[0]), t[1].seed))
    best_config, best_mean = select_best(tagged)

    root = Path(out_root) if out_root else default_out_root()
    root.mkdir(parents=True, exist_ok=True)
    report = {
        "best_config": best_config,
        "best_mean_final_exploitability": best_mean,
        "runs": [asdict(s) for _, s in tagged],
    }
    _atomic_write(root / "sweep_summary.json", json.dumps(report, sort_keys=True, indent=1) + "\n")
    return SweepResult(best_config, best_mean, tuple(s for _, s in tagged))


@dataclass(frozen=True)
class CampaignRow:
    algorithm: str
    shape: str
    dynamics_structure: str
    reward_structure: str
    mean: float
    std: float
    n: int


def garnet_campaign(
    garnet_template: dict,
    garnet_seeds: list[int],
    algorithms: list[str],
    solver_params: dict | None = None,
    per_algorithm_params: dict[str, dict] | None = None,
    out_root: Path | None = None,
    jobs: int = 1,
    solver_seed: int = 0,
) -> list[CampaignRow]:
    """Run each algorithm on each seeded instance and aggregate final exploitability.

    Reports the mean and the n-1 standard deviation across instances (0.0
    when a single instance is given). Writes garnet_table.csv at the output
    root.
    """
    if not garnet_seeds or not algorithms:
        raise MFGError("need at least one garnet seed and one algorithm")
    shared = dict(solver_params or {})
    per_algo = per_algorithm_params or {}
    specs, labels = [], []
    for algo in algorithms:
        for gseed in garnet_seeds:
            params = {**shared, **per_algo.get(algo, {})}
            specs.append(
                RunSpec(
                    algorithm=algo,
                    garnet={**garnet_template, "seed": gseed},
                    solver_params=params,
                    seed=solver_seed,
                )
            )
            labels.append(algo)
    out_root = Path(out_root) if out_root else default_out_root()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_execute_run_guarded, specs, [str(out_root)] * len(specs)))
    else:
        summaries = [_execute_run_guarded(s, str(out_root)) for s in specs]

    shape = "{}x{}x{}".format(
        garnet_template["n_states"], garnet_template["n_actions"], garnet_template["branching"]
    )
    dyn = garnet_template.get("dynamics_structure", "additive")
    rew = garnet_template.get("reward_structure", "additive")
    rows = []
    for algo in algorithms:
        finals = [
            s.final_exploitability
            for lab, s in zip(labels, summaries)
            if lab == algo and s.ok and np.isfinite(s.final_exploitability)
        ]
        n = len(finals)
        mean = float(np.mean(finals)) if n else float("nan")
        std = float(np.std(finals, ddof=1)) if n > 1 else 0.0
        rows.append(CampaignRow(algo, shape, dyn, rew, mean, std, n))

    out_root.mkdir(parents=True, exist_ok=True)
    lines = ["algorithm,shape,dynamics_structure,reward_structure,mean,std,n"]
    for r in rows:
        lines.append(
            f"{r.algorithm},{r.shape},{r.dynamics_structure},{r.reward_structure},"
            f"{_fmt(r.mean)},{_fmt(r.std)},{r.n}"
        )
    _atomic_write(out_root / "garnet_table.csv", "\n".join(lines) + "\n")
    return rows
