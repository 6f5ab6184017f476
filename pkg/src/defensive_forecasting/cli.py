"""Command-line experiment runner.

Subcommands::

    defcast run        play one forecaster against a Reality, with monitor Skeptics
    defcast duel       two forecasters on one label/object stream
    defcast plot       SVG line chart of trajectory columns
    defcast calibrate  calibration bins of a trajectory
    defcast validity   Monte Carlo check of the testing interpretation

Options may also come from a JSON file given with ``--config``; keys are the
option names with dashes replaced by underscores. Flags given on the command
line override the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .forecaster import (
    ConstantForecaster,
    DefensiveForecaster,
    K29Config,
    K29Forecaster,
    LaplaceForecaster,
    RootSolverConfig,
    SignLimitForecaster,
)
from .kernels import KernelSpec
from .metrics import bias_trace, calibration_report, validity_mc
from .protocol import History, run_game, write_history_jsonl
from .reality import RealitySpec, ReplayReality
from .skeptic import SKEPTIC_KINDS, build_skeptic

FORECASTERS = ("k29", "laplace", "signlimit", "defensive", "constant")

DEFAULTS = {
    "forecaster": "k29",
    "forecaster_b": "laplace",
    "sigma": 0.01,
    "object_kernel": "none",
    "gamma": None,
    "combine": "product",
    "grid_points": 33,
    "bisection_iters": 10,
    "root_tolerance": 1e-9,
    "constant_value": 0.5,
    "reality": "bernoulli",
    "theta": 0.5,
    "script": None,
    "object_rule": "none",
    "replay_path": None,
    "seed": 0,
    "n": 1000,
    "skeptic": [],
    "eps": 0.1,
    "tf_center": 0.5,
    "tf_width": 0.05,
    "mixture_path": None,
    "out": "out",
    "summary_from": 1,
    "runs": 10000,
    "threshold": [2.0],
    "workers": 1,
}


class CLIError(Exception):
    pass


def _fmt(v) -> str:
    return repr(float(v))


# -- builders ---------------------------------------------------------------

def build_forecaster(name: str, cfg: dict):
    if name == "k29":
        kernel = KernelSpec(cfg["sigma"], cfg["object_kernel"], cfg["gamma"], cfg["combine"])
        return K29Forecaster(K29Config(kernel, _solver(cfg)))
    if name == "laplace":
        return LaplaceForecaster()
    if name == "signlimit":
        return SignLimitForecaster()
    if name == "defensive":
        return DefensiveForecaster(_solver(cfg))
    if name == "constant":
        return ConstantForecaster(cfg["constant_value"])
    raise CLIError(f"unknown forecaster {name!r}; choose from {FORECASTERS}")


def _solver(cfg):
    return RootSolverConfig(cfg["grid_points"], cfg["bisection_iters"], cfg["root_tolerance"])


def build_skeptics(cfg: dict, game: str = "II") -> list[tuple[str, object]]:
    mixture = None
    if cfg["mixture_path"]:
        mixture = json.loads(Path(cfg["mixture_path"]).read_text())
    named = []
    for kind in cfg["skeptic"]:
        s = build_skeptic(kind, eps=cfg["eps"], center=cfg["tf_center"], width=cfg["tf_width"],
                          game=game, mixture=mixture if kind == "mixture" else None)
        name = kind
        k = 2
        while name in dict(named):
            name = f"{kind}{k}"
            k += 1
        named.append((name, s))
    return named


def build_reality(cfg: dict):
    spec = RealitySpec(cfg["reality"], cfg["theta"], cfg["script"], cfg["object_rule"], cfg["replay_path"])
    return spec.build()


# -- subcommands ------------------------------------------------------------

def cmd_run(cfg: dict) -> dict:
    forecaster = build_forecaster(cfg["forecaster"], cfg)
    monitors = build_skeptics(cfg)
    if cfg["forecaster"] == "defensive" and not monitors:
        raise CLIError("the defensive forecaster needs at least one --skeptic (the first one is defended against)")
    reality = build_reality(cfg)
    history, ledgers = run_game(forecaster, [s for _, s in monitors], reality, cfg["n"], cfg["seed"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)

    bias = bias_trace(history)
    header = ["round", "p", "y"] + [f"x{j}" for j in range(history.dim)] + ["running_bias"]
    header += [f"capital_{name}" for name, _ in monitors]
    with open(out / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, r in enumerate(history):
            row = [i + 1, _fmt(r.p), r.y] + [_fmt(v) for v in r.x] + [_fmt(bias[i])]
            row += [_fmt(led.values[i + 1]) for led in ledgers]
            w.writerow(row)
    write_history_jsonl(history, out / "history.jsonl")

    summary = {
        "n": len(history),
        "seed": cfg["seed"],
        "forecaster": cfg["forecaster"],
        "reality": cfg["reality"],
        "final_running_bias": float(bias[-1]),
        "mean_forecast": float(history.p.mean()),
        "mean_label": float(history.y.mean()),
        "capital": {name: {"final": led.capital, "max": max(led.values), "min": min(led.values)}
                    for (name, _), led in zip(monitors, ledgers)},
    }
    _write_json(out / "summary.json", summary)
    return summary


def cmd_duel(cfg: dict) -> dict:
    fa = build_forecaster(cfg["forecaster"], cfg)
    fb = build_forecaster(cfg["forecaster_b"], cfg)
    ha, _ = run_game(fa, [], build_reality(cfg), cfg["n"], cfg["seed"])
    # labels are generated once, in A's game, and replayed for B
    replay = ReplayReality([(r.x, r.y) for r in ha])
    hb, _ = run_game(fb, [], replay, cfg["n"], cfg["seed"], dim=ha.dim)
    diff = np.abs(ha.p - hb.p)

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "duel.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "y"] + [f"x{j}" for j in range(ha.dim)] + ["p_A", "p_B", "abs_diff"])
        for i in range(len(ha)):
            w.writerow([i + 1, int(ha.y[i])] + [_fmt(v) for v in ha.x[i]]
                       + [_fmt(ha.p[i]), _fmt(hb.p[i]), _fmt(diff[i])])
    start = max(1, int(cfg["summary_from"]))
    tail = diff[start - 1:]
    summary = {
        "n": len(ha),
        "seed": cfg["seed"],
        "forecaster_A": cfg["forecaster"],
        "forecaster_B": cfg["forecaster_b"],
        "summary_from_round": start,
        "mean_abs_diff": float(tail.mean()) if tail.size else math.nan,
        "max_abs_diff": float(tail.max()) if tail.size else math.nan,
        "mean_p_A": float(ha.p.mean()),
        "mean_p_B": float(hb.p.mean()),
    }
    _write_json(out / "summary.json", summary)
    return summary


def _read_columns(path, columns):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [c for c in columns if c not in fields]
        if missing:
            raise CLIError(f"{path}: missing column(s) {', '.join(missing)}; available: {', '.join(fields)}")
        rows = list(reader)
    return {c: np.array([float(r[c]) for r in rows]) for c in columns}


COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def render_svg(series: dict[str, np.ndarray], width: int = 800, height: int = 400, margin: int = 40) -> str:
    """One polyline per series against the 1-based row index, linear axes."""
    if not series:
        raise CLIError("no columns selected")
    n = max(len(v) for v in series.values())
    allv = np.concatenate([v for v in series.values() if len(v)]) if n else np.zeros(1)
    lo, hi = float(np.min(allv)), float(np.max(allv))
    if 0.0 <= lo and hi <= 1.0:
        lo, hi = 0.0, 1.0
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pw, ph = width - 2 * margin, height - 2 * margin

    def sx(i):
        return margin + (pw * (i - 1) / (n - 1) if n > 1 else pw / 2)

    def sy(v):
        return margin + ph * (hi - v) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{margin - 4}" y="{margin + 4}" font-size="10" text-anchor="end">{hi:g}</text>',
        f'<text x="{margin - 4}" y="{height - margin + 4}" font-size="10" text-anchor="end">{lo:g}</text>',
        f'<text x="{margin}" y="{height - margin + 14}" font-size="10">1</text>',
        f'<text x="{width - margin}" y="{height - margin + 14}" font-size="10" text-anchor="end">{n}</text>',
    ]
    for k, (name, vals) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{sx(i + 1):.2f},{sy(v):.2f}" for i, v in enumerate(vals))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"><title>{name}</title></polyline>')
        parts.append(f'<text x="{width - margin - 4}" y="{margin + 12 * (k + 1)}" font-size="10" '
                     f'text-anchor="end" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(path, columns, out) -> Path:
    if not columns:
        raise CLIError("no columns selected")
    svg = render_svg(_read_columns(path, columns))
    out = Path(out)
    out.write_text(svg)
    return out


def cmd_calibrate(path, bins: int, out, p_column: str = "p") -> list:
    data = _read_columns(path, [p_column, "y"])
    history = History.from_arrays(data[p_column], data["y"].astype(int))
    report = calibration_report(history, bins)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lower", "upper", "count", "mean_forecast", "mean_label", "gap"])
        for b in report:
            w.writerow([_fmt(b.lower), _fmt(b.upper), b.count, _fmt(b.mean_forecast),
                        _fmt(b.mean_label), _fmt(b.gap)])
    return report


def cmd_validity(cfg: dict) -> dict:
    kinds = cfg["skeptic"] or ["slln"]
    if len(kinds) != 1:
        raise CLIError("validity takes exactly one --skeptic")
    skeptic = build_skeptic(kinds[0], eps=cfg["eps"], game="I")
    rep = validity_mc(skeptic, cfg["theta"], cfg["n"], cfg["runs"], cfg["seed"],
                      thresholds=tuple(cfg["threshold"]), workers=cfg["workers"])
    summary = {"skeptic": kinds[0], "eps": cfg["eps"], "theta": cfg["theta"], "n": cfg["n"],
               "seed": cfg["seed"], **rep.to_dict(),
               "doob_bound": {str(float(c)): 1.0 / c for c in cfg["threshold"]}}
    out = Path(cfg["out"])
    if out.suffix != ".json":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "validity.json"
    _write_json(out, summary)
    return summary


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- argument parsing -------------------------------------------------------

def _add_game_options(p: argparse.ArgumentParser, duel: bool = False):
    g = p.add_argument_group("forecaster")
    g.add_argument("--forecaster", choices=FORECASTERS)
    if duel:
        g.add_argument("--forecaster-b", choices=FORECASTERS)
        g.add_argument("--summary-from", type=int, help="first round included in summary statistics")
    g.add_argument("--sigma", type=float, help="forecast kernel bandwidth")
    g.add_argument("--object-kernel", choices=("none", "gaussian"))
    g.add_argument("--gamma", type=float, help="object kernel bandwidth")
    g.add_argument("--combine", choices=("product", "sum"))
    g.add_argument("--grid-points", type=int)
    g.add_argument("--bisection-iters", type=int)
    g.add_argument("--root-tolerance", type=float)
    g.add_argument("--constant-value", type=float)
    r = p.add_argument_group("reality")
    r.add_argument("--reality", choices=("bernoulli", "regime", "dawid", "adversarial", "replay"))
    r.add_argument("--theta", type=float)
    r.add_argument("--script", help='segments "count:theta,...", e.g. "1000:0.5,1000:0,1000:1"')
    r.add_argument("--object-rule", choices=("none", "theta"))
    r.add_argument("--replay-path")
    _add_common(p)


def _add_skeptic_options(p, multiple=True):
    s = p.add_argument_group("skeptic")
    s.add_argument("--skeptic", action="append", choices=SKEPTIC_KINDS,
                   help="monitor Skeptic; repeat for several" if multiple else None)
    s.add_argument("--eps", type=float)
    s.add_argument("--tf-center", type=float)
    s.add_argument("--tf-width", type=float)
    s.add_argument("--mixture-path", help="JSON mixture descriptor")


def _add_common(p):
    p.add_argument("--n", type=int, help="number of rounds")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--config", help="JSON config file; flags override it")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="defcast", description="Defensive forecasting experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="play a forecaster against a Reality")
    _add_game_options(p)
    _add_skeptic_options(p)

    p = sub.add_parser("duel", help="two forecasters on one label stream")
    _add_game_options(p, duel=True)

    p = sub.add_parser("plot", help="SVG line chart of CSV columns")
    p.add_argument("csv")
    p.add_argument("--columns", required=True, help="comma-separated column names")
    p.add_argument("--out", required=True)

    p = sub.add_parser("calibrate", help="calibration bins of a trajectory CSV")
    p.add_argument("csv")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--p-column", default="p")
    p.add_argument("--out", required=True)

    p = sub.add_parser("validity", help="Monte Carlo validity check")
    _add_skeptic_options(p, multiple=False)
    p.add_argument("--theta", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--threshold", type=float, action="append")
    p.add_argument("--workers", type=int)
    _add_common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < command-line flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise CLIError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise CLIError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(file_cfg)
    for key, val in vars(args).items():
        if key in DEFAULTS and val is not None:
            cfg[key] = val
    if isinstance(cfg["skeptic"], str):
        cfg["skeptic"] = [cfg["skeptic"]]
    if cfg["n"] < 1:
        raise CLIError("--n must be >= 1")
    return cfg


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plot":
            cols = [c for c in args.columns.split(",") if c]
            print(cmd_plot(args.csv, cols, args.out))
        elif args.command == "calibrate":
            cmd_calibrate(args.csv, args.bins, args.out, args.p_column)
            print(args.out)
        else:
            cfg = resolve_config(args)
            fn = {"run": cmd_run, "duel": cmd_duel, "validity": cmd_validity}[args.command]
            print(json.dumps(fn(cfg), indent=2, sort_keys=True))
    except (CLIError, ValueError, OSError, IndexError) as exc:
        print(f"defcast {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
