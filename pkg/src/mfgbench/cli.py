"""Command-line entry point.

Subcommands: ``run`` (one solver run), ``sweep`` (hyperparameter grid x
seeds), ``garnet`` (random-game campaign), ``list-envs``, and ``check``
(structural checkers for an environment). Configuration is layered: an
optional TOML file provides the base, and repeated ``--set key=value`` flags
override it with dotted keys (``solver.iterations=200``, ``env.alpha=5``; a
bare key targets the environment parameters).

Exit codes: 0 success, 1 any failed run, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .checks import ll_monotonicity_check, potential_symmetry_check
from .core import InvalidParam, MFGError
from .envs import NotSkewSymmetric, UnknownEnv, build_env, list_envs
from .garnet import ADDITIVE, MULTIPLICATIVE, InvalidSpec
from .harness import (
    RunSpec,
    SweepSpec,
    apply_override,
    default_out_root,
    execute_run,
    execute_sweep,
    garnet_campaign,
)
from .solvers import UnknownAlgorithm, list_algorithms

_CONFIG_ERRORS = (
    UnknownEnv,
    UnknownAlgorithm,
    InvalidParam,
    InvalidSpec,
    NotSkewSymmetric,
    ValueError,
    TypeError,
    KeyError,
)


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def _parse_set(flags: list[str]) -> list[tuple[str, object]]:
    out = []
    for flag in flags or []:
        key, sep, value = flag.partition("=")
        if not sep or not key:
            raise ValueError(f"--set expects key=value, got {flag!r}")
        out.append((key, _parse_value(value)))
    return out


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    return tomllib.loads(Path(path).read_text())


def _spec_from_config(cfg: dict, args) -> RunSpec:
    spec = RunSpec(
        algorithm=args.algo or cfg.get("algo", ""),
        env=args.env or cfg.get("env"),
        env_params=dict(cfg.get("env_params", {})),
        garnet=dict(cfg["garnet"]) if "garnet" in cfg else None,
        solver_params=dict(cfg.get("solver", {})),
        seed=args.seed if args.seed is not None else cfg.get("seed", 0),
    )
    for key, value in _parse_set(args.set):
        spec = apply_override(spec, key, value)
    if not spec.algorithm:
        raise ValueError("an algorithm is required (--algo or config 'algo')")
    if spec.algorithm not in list_algorithms():
        raise UnknownAlgorithm(f"unknown algorithm {spec.algorithm!r}")
    return spec


def _cmd_run(args) -> int:
    spec = _spec_from_config(_load_config(args.config), args)
    out_root = Path(args.out) if args.out else default_out_root()
    summary = execute_run(spec, out_root)
    print(
        f"{summary.env} {summary.algorithm} seed={summary.seed} "
        f"final_exploitability={summary.final_exploitability:.6g} -> {summary.out_dir}"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    base = _spec_from_config(cfg, args)
    sweep_cfg = cfg.get("sweep", {})
    grid = dict(sweep_cfg.get("grid", {}))
    seeds = args.seeds or sweep_cfg.get("seeds", [0, 1, 2, 3])
    spec = SweepSpec(
        base=base,
        grid=grid,
        seeds=tuple(int(s) for s in seeds),
        jobs=args.jobs or int(sweep_cfg.get("jobs", 1)),
        out_root=args.out or (str(default_out_root())),
    )
    result = execute_sweep(spec)
    failed = [s for s in result.summaries if not s.ok]
    print(f"best config: {result.best_config} mean_final_exploitability={result.best_mean:.6g}")
    for s in failed:
        print(f"FAILED {s.algorithm} seed={s.seed}: {s.error}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_garnet(args) -> int:
    template = {
        "n_states": args.states,
        "n_actions": args.actions,
        "branching": args.branching,
        "dynamics_structure": args.dynamics,
        "reward_structure": args.rewards,
    }
    if args.discount is not None:
        template["discount"] = args.discount
    solver_params = {}
    for key, value in _parse_set(args.set):
        if not key.startswith("solver."):
            raise ValueError("garnet campaign overrides must target solver.* keys")
        solver_params[key[7:]] = value
    rows = garnet_campaign(
        template,
        garnet_seeds=[int(s) for s in args.garnet_seeds],
        algorithms=args.algos,
        solver_params=solver_params,
        out_root=Path(args.out) if args.out else None,
        jobs=args.jobs,
        solver_seed=args.seed or 0,
    )
    bad = False
    for r in rows:
        print(
            f"{r.algorithm:18s} {r.shape} ({r.dynamics_structure[0].upper()}/"
            f"{r.reward_structure[0].upper()}) mean={r.mean:.4g} std={r.std:.4g} n={r.n}"
        )
        bad = bad or r.n < len(args.garnet_seeds)
    return 1 if bad else 0


def _cmd_list_envs(_args) -> int:
    for name in list_envs():
        print(name)
    return 0


def _cmd_check(args) -> int:
    params: dict = {}
    for key, value in _parse_set(args.set):
        name = key[4:] if key.startswith("env.") else key
        params[name] = value
    model = build_env(args.env, params)
    print(f"env: {model.name} class={model.class_tag.value}")

    if model.interaction_g is not None:
        res = ll_monotonicity_check(model, model.interaction_g, trials=args.trials, rng_seed=args.seed or 0)
        if res.monotone:
            print(f"ll_monotonicity: Monotone ({args.trials} trials)")
        else:
            print(f"ll_monotonicity: ViolatedAt value={res.value:.6g}")
    else:
        print("ll_monotonicity: not applicable (no separable population term)")

    if model.interaction_matrix is not None:
        res = potential_symmetry_check(model.interaction_matrix)
        if res.potential:
            print("potential: Potential (interaction matrix symmetric)")
        else:
            print(f"potential: NotPotential x={res.x} y={res.y} gap={res.gap:.6g}")
    else:
        print("potential: not applicable (no linear interaction matrix)")

    if "contraction_threshold" in model.params:
        holds = model.params.get("contraction_holds", 0.0) >= 1.0
        word = "Holds" if holds else "Fails"
        print(f"contraction: {word} (threshold {model.params['contraction_threshold']:.6g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfgbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a single solver run")
    run.add_argument("--config", help="TOML config file")
    run.add_argument("--env", help="registered environment name")
    run.add_argument("--algo", help="algorithm id")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", help="output root directory")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    run.set_defaults(fn=_cmd_run)

    sweep = sub.add_parser("sweep", help="grid x seeds sweep with best-config selection")
    sweep.add_argument("--config", required=True, help="TOML config with a [sweep.grid] table")
    sweep.add_argument("--env")
    sweep.add_argument("--algo")
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--seeds", nargs="*", type=int, default=None)
    sweep.add_argument("--jobs", type=int, default=None)
    sweep.add_argument("--out")
    sweep.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    sweep.set_defaults(fn=_cmd_sweep)

    garnet = sub.add_parser("garnet", help="random-game campaign over seeded instances")
    garnet.add_argument("--states", type=int, required=True)
    garnet.add_argument("--actions", type=int, required=True)
    garnet.add_argument("--branching", type=int, required=True)
    garnet.add_argument("--dynamics", choices=[ADDITIVE, MULTIPLICATIVE], default=ADDITIVE)
    garnet.add_argument("--rewards", choices=[ADDITIVE, MULTIPLICATIVE], default=ADDITIVE)
    garnet.add_argument("--discount", type=float, default=None)
    garnet.add_argument("--garnet-seeds", nargs="+", type=int, default=list(range(10)))
    garnet.add_argument("--algos", nargs="+", required=True)
    garnet.add_argument("--seed", type=int, default=0, help="solver init seed")
    garnet.add_argument("--jobs", type=int, default=1)
    garnet.add_argument("--out")
    garnet.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    garnet.set_defaults(fn=_cmd_garnet)

    lst = sub.add_parser("list-envs", help="print registered environment names")
    lst.set_defaults(fn=_cmd_list_envs)

    check = sub.add_parser("check", help="run structural checkers on an environment")
    check.add_argument("--env", required=True)
    check.add_argument("--trials", type=int, default=100)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    check.set_defaults(fn=_cmd_check)
    return parser


def cli_main(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        return args.fn(args)
    except _CONFIG_ERRORS as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except MFGError as e:
        print(f"run failed: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
