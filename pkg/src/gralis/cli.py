"""Command-line front end: ``gralis <command> [flags]``.

Settings are merged as defaults < GRALIS_SEED < --config file < flags, and
the merged config is embedded in the report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ConfigurationError, GralisError, NumericalError
from .report import RunConfig, emit_report, execute, parse_grid, read_config_dict, render_report

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors count as configuration errors (exit 1), not argparse's 2
    def error(self, message):
        raise ConfigurationError(message)


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _sigma(text: str):
    if text.strip().lower() in ("uniform", "inf"):
        return "uniform"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigma must be 'uniform' or a number, got {text!r}") from None


def _threshold(text: str):
    name, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("threshold must look like NAME=VALUE")
    return name, float(val)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}") from None


def _curve(text: str) -> dict:
    if text.endswith(".json"):
        return _read_json(text)
    try:
        pts = [tuple(float(v) for v in p.split(":")) for p in text.split(",")]
        return {"k": [p[0] for p in pts], "drop": [p[1] for p in pts]}
    except (ValueError, IndexError):
        raise ConfigurationError(f"curve must be 'k:drop,k:drop,...' or a JSON file, got {text!r}") from None


def _grid(text: str) -> list:
    if text.endswith(".json"):
        data = _read_json(text)
        axes = data.get("supports", data) if isinstance(data, dict) else data
        return [[a["points"], a["probs"]] if isinstance(a, dict) else a for a in axes]
    return parse_grid(text)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = _Parser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file with flag-named keys, or a previous report")
    common.add_argument("--out", help="report path; prints to stdout when omitted")
    common.add_argument("--workers", type=int, help="threads used for scheduling only")
    common.add_argument("--seed", type=int)

    model = _Parser(add_help=False, argument_default=S)
    model.add_argument("--model", help="zoo model name")
    model.add_argument("--params", type=_floats, help="comma-separated model parameters")
    model.add_argument("--x", type=_floats)
    model.add_argument("--baseline", type=_floats)

    engine = _Parser(add_help=False, argument_default=S)
    engine.add_argument("--quad", choices=["right", "mid", "gauss"])
    engine.add_argument("--k", type=int)
    engine.add_argument("--path", choices=["simultaneous", "sequential"])
    engine.add_argument("--sigma", type=_sigma, help="kernel width or 'uniform'")

    p = _Parser(prog="gralis", description="Coalition-weighted path attribution toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("attribute", parents=[common, model, engine], argument_default=S)
    a.add_argument("--mode", choices=["exact", "mc"])
    a.add_argument("--m", type=int)
    a.add_argument("--norm", choices=["feature", "global"])
    a.add_argument("--antithetic", action="store_true")

    c = sub.add_parser("converge", parents=[common, model, engine], argument_default=S)
    c.add_argument("--m-grid", dest="m_grid", type=_ints)
    c.add_argument("--k-grid", dest="k_grid", type=_ints)
    c.add_argument("--seeds", type=int, help="replicates per m")

    i = sub.add_parser("interactions", parents=[common, model], argument_default=S)
    i.add_argument("--game", help="JSON file {n, values}")
    i.add_argument("--from-attribution", dest="from_attribution", action="store_true",
                   help="induce the game from --model, --x and --baseline")
    i.add_argument("--pairs", help="'all' or 'i,j'")

    n = sub.add_parser("anova", parents=[common, model, engine], argument_default=S)
    n.add_argument("--grid", help="'p,p@w,w;p,p@w,w' or a JSON file")

    ms = sub.add_parser("multiscale", parents=[common], argument_default=S)
    ms.add_argument("--layers", help="JSON file {layers: [{phi, var}]}")
    ms.add_argument("--lambdas", type=_floats, help="weights to use instead of the optimal ones")

    r = sub.add_parser("reduce", parents=[common, model, engine], argument_default=S)
    r.add_argument("--feature-maps", dest="feature_maps", help="JSON file {K, H, W, A, G}")

    au = sub.add_parser("audit", parents=[common, engine], argument_default=S)
    au.add_argument("--threshold", type=_threshold, action="append", help="NAME=VALUE, repeatable")

    d = sub.add_parser("delauc", parents=[common], argument_default=S)
    d.add_argument("--curve", help="'k:drop,k:drop,...' or a JSON file {k, drop}")
    return p


_FILE_FIELDS = {"game": _read_json, "layers": _read_json, "feature_maps": _read_json, "curve": _curve, "grid": _grid}
_RUNTIME = {"config", "out", "workers", "from_attribution", "threshold"}


def merged_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then GRALIS_SEED, then the config file, then explicit flags."""
    merged: dict = {}
    env = os.environ.get("GRALIS_SEED")
    if env is not None:
        try:
            merged["seed"] = int(env)
        except ValueError:
            raise ConfigurationError(f"GRALIS_SEED must be an integer, got {env!r}") from None
    flags = vars(args)
    if "config" in flags:
        merged.update(read_config_dict(flags["config"]))
    merged["command"] = args.command
    for key, val in flags.items():
        if key in _RUNTIME or key == "command":
            continue
        merged[key] = val
    if "threshold" in flags:
        merged["thresholds"] = {**merged.get("thresholds", RunConfig().thresholds), **dict(flags["threshold"])}
    if flags.get("from_attribution"):
        merged["game"] = None
    for key, load in _FILE_FIELDS.items():
        if isinstance(merged.get(key), str):
            merged[key] = load(merged[key])
    return RunConfig.from_dict(merged)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = merged_config(args)
        results, tables = execute(cfg, getattr(args, "workers", 1))
        out = getattr(args, "out", None)
        if out is None:
            sys.stdout.write(render_report(cfg, results))
        else:
            emit_report(results, out, cfg, tables)
    except NumericalError as exc:
        print(f"gralis: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GralisError, OSError) as exc:
        print(f"gralis: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
