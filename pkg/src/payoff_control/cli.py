"""Command-line front end.

Every subcommand resolves its settings as defaults < config file < flags.
A config file is JSON with optional top-level ``payoffs``, ``seed``,
``format`` and ``out`` keys plus a block named after the subcommand, e.g.::

    {"seed": 3, "region": {"p": ["0.998", "0.994", "0.01", "0.0012"], "samples": 5000}}

Exit status: 0 on success, 2 when a spec is infeasible or verification
fails, 1 on any usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .exceptions import PayoffControlError
from .game import PayoffParams
from .learner import LearnerConfig, run_learning_match
from .strategies import catalog
from .synthesis import ControlSpec, classify_control, synthesize
from .tournament import rank_table, run_tournament
from .verification import CLOUD_TOL, CORNER_TOL, sample_payoff_cloud, verify_spec

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
FORMAT_VERSION = 1

DEFAULTS = {
    "synthesize": {"spec": None, "format": "json"},
    "verify": {"p": None, "spec": None, "samples": 5000, "format": "json"},
    "region": {"p": None, "samples": 5000, "corner_biased": False, "format": "csv"},
    "tournament": {"stages": 200, "repetitions": 1000, "workers": 1, "joss": "table",
                   "format": "csv"},
    "rl": {"p": None, "stages": 100_000, "every": 1, "format": "csv",
           **LearnerConfig().to_dict()},
}
COMMON = {"payoffs": {"R": 2.0, "T": 3.0, "S": -1.0, "P": 0.0}, "seed": 0, "out": None}


class ConfigError(ValueError):
    pass


def parse_strategy(value, field="p"):
    """Four probabilities from a list or a comma-separated string; fractions allowed."""
    if value is None:
        raise ConfigError(f"{field}: a memory-one strategy is required")
    items = value.split(",") if isinstance(value, str) else list(value)
    try:
        probs = [float(Fraction(str(x).strip())) for x in items]
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{field}: cannot parse {value!r} as four probabilities") from None
    if len(probs) != 4:
        raise ConfigError(f"{field}: expected 4 probabilities, got {len(probs)}")
    return probs


def _load_spec(value, field="spec"):
    if value is None:
        raise ConfigError(f"{field}: a control spec (file path or object) is required")
    if isinstance(value, str):
        try:
            with open(value) as fh:
                value = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"{field}: cannot read {value!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{field}: invalid JSON in spec file: {exc}") from None
    try:
        return ControlSpec.from_dict(value)
    except PayoffControlError as exc:
        raise ConfigError(f"{field}: {exc}") from None


def _payoffs(cfg):
    d = cfg["payoffs"]
    try:
        if isinstance(d, dict):
            return PayoffParams.from_dict(d)
        return PayoffParams(*[float(x) for x in d])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"payoffs: need R, T, S, P ({exc})") from None
    except ValueError as exc:
        raise ConfigError(f"payoffs: {exc}") from None


def resolve_config(command, args) -> dict:
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[command])
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
        block = data.get(command, {})
        if not isinstance(block, dict):
            raise ConfigError(f"{command}: block must be an object")
        for src in ({k: v for k, v in data.items() if k in COMMON or k == "format"}, block):
            for k, v in src.items():
                if k not in cfg:
                    raise ConfigError(f"{command}.{k}: unknown config key")
                cfg[k] = v
    for k, v in vars(args).items():
        if k in cfg and v is not None and k != "config":
            cfg[k] = v
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format: must be 'csv' or 'json', got {cfg['format']!r}")
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        raise ConfigError(f"seed: must be an integer, got {cfg['seed']!r}")
    cfg["command"] = command
    return cfg


def nested_config(cfg) -> dict:
    """The resolved config in file layout, loadable again with ``--config``."""
    top = {k: cfg[k] for k in (*COMMON, "format")}
    top[cfg["command"]] = {k: v for k, v in cfg.items() if k not in top and k != "command"}
    return top


def _int(cfg, key, minimum=1):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < minimum:
        raise ConfigError(f"{key}: must be an integer >= {minimum}, got {v!r}")
    return int(v)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_synthesize(cfg):
    params = _payoffs(cfg)
    spec = _load_spec(cfg["spec"])
    result = synthesize(spec, params)
    cls = classify_control(spec, params) if result.feasible else None
    if cfg["format"] == "json":
        d = result.to_dict()
        d["spec"] = spec.to_dict()
        d["payoffs"] = params.to_dict()
        d["control_class"] = None if cls is None else cls.value
        text = _dump(d)
    else:
        rows = ["format_version,verdict,p1,p2,p3,p4,radius,control_class"]
        w = result.witness.probs if result.feasible else ("",) * 4
        radius = repr(result.radius) if result.feasible else ""
        rows.append(",".join([str(FORMAT_VERSION), result.verdict.value,
                              *[repr(x) if x != "" else "" for x in w], radius,
                              "" if cls is None else cls.value]))
        text = "\n".join(rows) + "\n"
    status = EXIT_OK if result.feasible else EXIT_FAIL
    note = (f"feasible: p = ({', '.join(f'{x:.6g}' for x in result.witness.probs)})"
            if result.feasible else f"infeasible: {result.message}")
    return status, text, note


def cmd_verify(cfg):
    params = _payoffs(cfg)
    p = parse_strategy(cfg["p"])
    spec = _load_spec(cfg["spec"])
    report = verify_spec(p, spec, _int(cfg, "samples"), cfg["seed"], params)
    if cfg["format"] == "json":
        text = _dump(report.to_dict())
    else:
        lines = ["format_version,objective,cloud_slack,corner_slack,passed"]
        for o, cs, ks in zip(spec.objectives, report.cloud_slack, report.corner_slack):
            ok = cs >= -CLOUD_TOL and ks >= -CORNER_TOL
            lines.append(f"1,{o.describe()},{cs!r},{ks!r},{ok}")
        text = "\n".join(lines) + "\n"
    return (EXIT_OK if report.passed else EXIT_FAIL), text, (
        "verification passed" if report.passed
        else f"verification failed: {len(report.violations)} violation(s)")


def cmd_region(cfg):
    params = _payoffs(cfg)
    p = parse_strategy(cfg["p"])
    cloud = sample_payoff_cloud(p, _int(cfg, "samples"), cfg["seed"], params,
                                bool(cfg["corner_biased"]))
    if cfg["format"] == "csv":
        text = cloud.to_csv()
    else:
        text = _dump({
            "format_version": FORMAT_VERSION,
            "p": p,
            "seed": cfg["seed"],
            "samples": cloud.n,
            "payoffs": params.to_dict(),
            "points": [
                {"q": q.tolist(), "sx": float(s[0]), "sy": float(s[1])}
                for q, s in zip(cloud.Q, cloud.payoffs)
            ],
        })
    note = f"sY in [{cloud.sy.min():.6g}, {cloud.sy.max():.6g}] over {cloud.n} opponents"
    return EXIT_OK, text, note


def cmd_tournament(cfg):
    params = _payoffs(cfg)
    if cfg["joss"] not in ("table", "classic"):
        raise ConfigError(f"joss: must be 'table' or 'classic', got {cfg['joss']!r}")
    report = run_tournament(catalog(cfg["joss"]), _int(cfg, "stages"),
                            _int(cfg, "repetitions"), cfg["seed"], params,
                            _int(cfg, "workers"))
    text = report.to_csv() if cfg["format"] == "csv" else _dump(report.to_dict())
    return EXIT_OK, text, rank_table(report).rstrip("\n")


def cmd_rl(cfg):
    params = _payoffs(cfg)
    p = parse_strategy(cfg["p"])
    try:
        config = LearnerConfig(*(float(cfg[k]) for k in LearnerConfig().to_dict()))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"learner: {exc}") from None
    trace = run_learning_match(p, config, _int(cfg, "stages"), cfg["seed"], params)
    every = _int(cfg, "every")
    window = min(10_000, len(trace.outcomes))
    sx, sy = trace.tail_averages(window)
    if cfg["format"] == "csv":
        text = trace.to_csv(every=every)
    else:
        idx = np.unique(np.r_[np.arange(0, len(trace.outcomes), every), len(trace.outcomes) - 1])
        text = _dump({
            "format_version": FORMAT_VERSION,
            "p": p,
            "seed": cfg["seed"],
            "learner": config.to_dict(),
            "tail_window": window,
            "tail_averages": {"sx": sx, "sy": sy},
            "policy": trace.policy.tolist(),
            "Q": trace.Q.tolist(),
            "q_abs_max": trace.q_abs_max,
            "trace": {
                "stage": (idx + 1).tolist(),
                "x_avg": trace.x_avg[idx].tolist(),
                "y_avg": trace.y_avg[idx].tolist(),
                "epsilon": trace.epsilon[idx].tolist(),
                "r_star": trace.r_star[idx].tolist(),
            },
        })
    return EXIT_OK, text, f"tail averages over {window} stages: sX={sx:.4f} sY={sy:.4f}"


COMMANDS = {
    "synthesize": cmd_synthesize,
    "verify": cmd_verify,
    "region": cmd_region,
    "tournament": cmd_tournament,
    "rl": cmd_rl,
}


def _payoff_list(text):
    vals = [float(Fraction(x)) for x in text.split(",")]
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("payoffs need four values R,T,S,P")
    return dict(zip("RTSP", vals))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="payoff-control",
        description="Synthesize, verify and evaluate memory-one payoff control strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--payoffs", type=_payoff_list, metavar="R,T,S,P")
    common.add_argument("--print-config", action="store_true",
                        help="print the resolved config as JSON and exit")

    p = sub.add_parser("synthesize", parents=[common], help="find a controller for a spec")
    p.add_argument("--spec", help="control spec JSON file")

    p = sub.add_parser("verify", parents=[common], help="check a strategy against a spec")
    p.add_argument("--p", help="strategy, e.g. 1,2/15,1,1/3")
    p.add_argument("--spec", help="control spec JSON file")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("region", parents=[common], help="payoff cloud against random opponents")
    p.add_argument("--p", help="strategy, e.g. 0.5,0,1,0.5")
    p.add_argument("--samples", type=int)
    p.add_argument("--corner-biased", action="store_const", const=True, default=None)

    p = sub.add_parser("tournament", parents=[common], help="round robin over the catalog")
    p.add_argument("--stages", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--joss", choices=("table", "classic"))

    p = sub.add_parser("rl", parents=[common], help="R-learning opponent against a controller")
    p.add_argument("--p", help="controller strategy")
    p.add_argument("--stages", type=int)
    p.add_argument("--every", type=int, help="write every n-th stage")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--epsilon-decay", type=float)
    p.add_argument("--epsilon-floor", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        cfg = resolve_config(args.command, args)
        if args.print_config:
            sys.stdout.write(_dump(nested_config(cfg)))
            return EXIT_OK
        status, text, note = COMMANDS[args.command](cfg)
        if cfg["out"]:
            with open(cfg["out"], "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        print(note, file=sys.stderr)
        return status
    except (ConfigError, PayoffControlError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
