"""`lamina` command line: simulations, samplers, estimator suites and rendering.

Settings come from, in increasing priority: built-in defaults, a TOML file
given with --config, the LAMINA_SEED / LAMINA_THREADS environment variables,
and command-line flags.  Exit status is 0 on success, 1 on invalid input and
2 when the acceptance suite fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

log = logging.getLogger("lamina")

COMMANDS = ("simulate", "reject", "polygon", "frag", "code", "analyze", "render")
SUITES = ("acceptance", "m1", "height", "counts", "dimension")


class UsageError(Exception):
    pass


# option table ------------------------------------------------------------------

@dataclass(frozen=True)
class Option:
    name: str
    kind: str  # float, int, str, bool, floats, ints
    commands: tuple[str, ...]
    help: str
    choices: tuple[str, ...] | None = None


ALL = COMMANDS
OPTIONS = (
    Option("alpha", "float", ("simulate", "frag", "analyze"), "self-similarity index alpha >= 0"),
    Option("t_max", "float", ("simulate", "frag", "analyze"), "time horizon"),
    Option("n", "int", ("simulate", "reject", "polygon", "code"),
           "chord budget (simulate), proposals (reject), vertices (polygon), steps (code)"),
    Option("seed", "int", ALL, "master seed"),
    Option("replicas", "int", ("analyze",), "replicas per estimate"),
    Option("threads", "int", ALL, "worker processes for replicas"),
    Option("out", "str", ALL, "output file (directory for analyze); stdout when omitted"),
    Option("format", "str", ("simulate", "polygon", "code", "render"), "output format",
           ("jsonl", "csv", "svg")),
    Option("suite", "str", ("analyze",), "estimator suite", SUITES),
    Option("grid", "floats", ("simulate", "frag", "analyze"),
           "comma-separated points: snapshot/record times or r values"),
    Option("scales", "floats", ("analyze",), "comma-separated box-counting cell sizes"),
    Option("replicas_scale", "float", ("analyze",), "multiplier on acceptance replica counts"),
    Option("criteria", "ints", ("analyze",), "comma-separated acceptance criterion ids"),
    Option("model", "str", ("polygon",), "polygon sampler", ("recursive", "matching")),
    Option("measure", "str", ("frag",), "dislocation measure", ("C", "D")),
    Option("input", "str", ("analyze", "render"), "figela JSONL file"),
    Option("stroke_width", "float", ("simulate", "polygon", "code", "render"), "SVG stroke width"),
    Option("color_by_time", "bool", ("simulate", "render"), "colour chords by birth-time quantile"),
    Option("polygon_n", "int", ("render",), "draw n-gon vertex markers"),
)
BY_NAME = {o.name: o for o in OPTIONS}

DEFAULTS: dict[str, dict[str, Any]] = {
    "simulate": {"format": "jsonl", "seed": 0},
    "reject": {"seed": 0},
    "polygon": {"format": "csv", "seed": 0, "model": "recursive"},
    "frag": {"seed": 0, "measure": "D", "alpha": 2.0},
    "code": {"format": "csv", "seed": 0, "n": 10_000},
    "analyze": {"suite": "acceptance", "seed": 0, "replicas_scale": 1.0, "out": "lamina-report",
                "alpha": 2.0},
    "render": {"format": "svg"},
}


def _convert(opt: Option, value: Any, where: str) -> Any:
    try:
        if opt.kind in ("floats", "ints"):
            cast = float if opt.kind == "floats" else int
            items = value.split(",") if isinstance(value, str) else value
            if not isinstance(items, (list, tuple)) or not items:
                raise ValueError("expected a non-empty list")
            out = []
            for x in items:
                if isinstance(x, bool) or (cast is int and isinstance(x, float)):
                    raise ValueError(f"bad list item {x!r}")
                out.append(cast(x.strip() if isinstance(x, str) else x))
            return out
        if opt.kind == "bool":
            if not isinstance(value, bool):
                raise ValueError("expected true or false")
            return value
        if opt.kind == "int":
            if isinstance(value, bool) or isinstance(value, float):
                raise ValueError("expected an integer")
            return int(value)
        if opt.kind == "float":
            if isinstance(value, bool):
                raise ValueError("expected a number")
            return float(value)
        if not isinstance(value, str):
            raise ValueError("expected a string")
        if opt.choices and value not in opt.choices:
            raise ValueError(f"expected one of {', '.join(opt.choices)}")
        return value
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{where}: invalid value {value!r} for {opt.name}: {exc}") from None


# config file -------------------------------------------------------------------

def _key_line(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*(?:{re.escape(key)}|\"{re.escape(key)}\")\s*=")
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return i
    return None


def load_config(path: str, command: str) -> dict[str, Any]:
    """Flat TOML table of option names (underscored) plus an optional `command`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        msg = getattr(exc, "msg", str(exc))
        raise UsageError(f"{path}:{line}: {msg}" if line else f"{path}: {exc}") from None
    out = {}
    for key, value in data.items():
        line = _key_line(text, key)
        where = f"{path}:{line}" if line else path
        if key == "command":
            if value != command:
                raise UsageError(f"{where}: config is for command {value!r}, not {command!r}")
            continue
        opt = BY_NAME.get(key)
        if opt is None or command not in opt.commands:
            raise UsageError(f"{where}: unknown key {key!r} for command {command!r}")
        out[key] = _convert(opt, value, where)
    return out


def _env_settings() -> dict[str, Any]:
    out = {}
    for var, name in (("LAMINA_SEED", "seed"), ("LAMINA_THREADS", "threads")):
        if var in os.environ:
            out[name] = _convert(BY_NAME[name], os.environ[var].strip(), var)
    return out


# argument parsing ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lamina", description="Random recursive laminations of the disk.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "simulate": "run the continuous-time chord process and save the trajectory",
        "reject": "run the rejection model and write chord-count statistics",
        "polygon": "sample a random triangulation of the regular n-gon",
        "frag": "run a self-similar fragmentation and write mass snapshots",
        "code": "sample an excursion and the lamination it codes",
        "analyze": "run an estimator suite and write CSV/JSON plus figures",
        "render": "draw a saved figela as SVG",
    }
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, help=helps[cmd])
        sp.add_argument("--config", help="TOML file with default settings")
        for opt in OPTIONS:
            if cmd not in opt.commands:
                continue
            flag = "--" + opt.name.replace("_", "-")
            if opt.kind == "bool":
                sp.add_argument(flag, dest=opt.name, action="store_const", const=True, default=None,
                                help=opt.help)
            else:
                sp.add_argument(flag, dest=opt.name, default=None, help=opt.help,
                                metavar=opt.name.upper())
    return p


def resolve(argv: list[str] | None) -> tuple[str, dict[str, Any], bool]:
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    settings = dict(DEFAULTS[cmd])
    if ns.config:
        settings.update(load_config(ns.config, cmd))
    settings.update(_env_settings())
    for opt in OPTIONS:
        if cmd in opt.commands:
            value = getattr(ns, opt.name)
            if value is not None:
                settings[opt.name] = _convert(opt, value, "--" + opt.name.replace("_", "-"))
    return cmd, settings, ns.verbose


def _require(s: dict, *names: str) -> None:
    missing = [n for n in names if s.get(n) is None]
    if missing:
        raise UsageError("missing required setting: " + ", ".join("--" + n.replace("_", "-") for n in missing))


# output helpers ----------------------------------------------------------------

def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _render_options(s: dict, **kw):
    from .render import RenderOptions
    extra = {}
    if s.get("stroke_width") is not None:
        extra["stroke_width"] = s["stroke_width"]
    if s.get("color_by_time"):
        extra["color_by_time"] = True
    extra.update(kw)
    return RenderOptions(**extra)


# commands ----------------------------------------------------------------------

# height column of the simulate stats CSV: between 1 and -1
STATS_QUERY = (0.0, 0.5)


def cmd_simulate(s: dict) -> int:
    from .engine import EngineConfig, simulate
    from .render import render_svg
    _require(s, "alpha")
    if s.get("t_max") is None and s.get("n") is None:
        raise UsageError("simulate needs --t-max or --n")
    snaps = s.get("grid") or ([s["t_max"]] if s.get("t_max") is not None else [])
    cfg = EngineConfig(alpha=s["alpha"], t_max=s.get("t_max"), chord_budget=s.get("n"), seed=s["seed"],
                       record_snapshots_at=snaps)
    rec = simulate(cfg, [STATS_QUERY])
    f = rec.figela_at()
    fmt = s["format"]
    if fmt == "jsonl":
        text = f.jsonl_text(s["seed"], s["alpha"], {"t_max": s.get("t_max"), "chord_budget": s.get("n"),
                                                     "partial": rec.partial})
    elif fmt == "csv":
        rows = rec.stats_rows() or [[rec.final_time, rec.n_chords, *rec.final_heights]]
        text = _csv_text(rec.stats_header(), rows)
    else:
        text = render_svg(f.chord_list, [r.time for r in f.chords], _render_options(s))
    _emit(text, s.get("out"))
    log.info("simulate: %d chords, final time %.6g", len(f), rec.final_time)
    return 0


def reject_rows(counts: np.ndarray) -> list[tuple[int, int, float]]:
    """(proposals, chords, chords / sqrt(proposals)) at powers of ten and at the end."""
    n = len(counts)
    marks = sorted({10 ** k for k in range(1, 12) if 10 ** k < n} | {n}) if n else []
    return [(k, int(counts[k - 1]), counts[k - 1] / math.sqrt(k)) for k in marks]


def cmd_reject(s: dict) -> int:
    from .engine import simulate_rejection
    _require(s, "n")
    if s["n"] < 1:
        raise UsageError("--n must be >= 1")
    rec = simulate_rejection(s["n"], s["seed"])
    _emit(_csv_text(["proposals", "chords", "chords_over_sqrt_n"], reject_rows(rec.counts)), s.get("out"))
    return 0


def cmd_polygon(s: dict) -> int:
    from .polygon import sample_permutation_matching, sample_uniform_recursive
    from .render import render_svg
    _require(s, "n")
    if s["model"] == "recursive":
        st = sample_uniform_recursive(s["n"], s["seed"])
    else:
        st = sample_permutation_matching(s["n"], s["seed"], strict=False)
        if st.violations:
            log.warning("matching: %d steps had several eligible free vertices", len(st.violations))
    fmt = s["format"]
    if fmt == "csv":
        text = _csv_text(["i", "j"], st.diagonals)
    elif fmt == "jsonl":
        header = {"kind": "polygon", "n": s["n"], "model": s["model"], "seed": s["seed"]}
        n = s["n"]
        recs = [json.dumps({"a": c.a, "b": c.b, "t": k + 1, "num": sorted((i % n, j % n)), "den": n})
                for k, ((i, j), c) in enumerate(zip(st.diagonals, st.chords))]
        text = "\n".join([json.dumps(header)] + recs) + "\n"
    else:
        text = render_svg(st.chords, options=_render_options(s, polygon_n=s["n"] if s["n"] <= 500 else None))
    _emit(text, s.get("out"))
    return 0


def cmd_frag(s: dict) -> int:
    from .fragmentation import NU_C, NU_D, SNAPSHOT_COLUMNS, malthusian, run_fragmentation, snapshot_row
    _require(s, "t_max")
    m = NU_C if s["measure"] == "C" else NU_D
    grid = s.get("grid") or [s["t_max"]]
    states = run_fragmentation(s["alpha"], m, s["t_max"], s["seed"], grid)
    p = malthusian(m)
    _emit(_csv_text(SNAPSHOT_COLUMNS, (snapshot_row(st, p) for st in states)), s.get("out"))
    return 0


def cmd_code(s: dict) -> int:
    from .coding import code_lamination, sample_excursion
    from .render import render_svg
    if s["n"] < 2 or s["n"] % 2:
        raise UsageError("--n must be an even number of steps >= 2")
    g = sample_excursion(s["n"], s["seed"])
    fmt = s["format"]
    if fmt == "csv":
        text = _csv_text(["t", "g"], zip(g.t.tolist(), g.g.tolist()))
    else:
        coded = code_lamination(g)
        if fmt == "jsonl":
            header = {"kind": "chords", "steps": s["n"], "seed": s["seed"]}
            text = "\n".join([json.dumps(header)] + [json.dumps({"a": a, "b": b}) for a, b in coded.chords]) + "\n"
        else:
            text = render_svg(coded.chords, options=_render_options(s))
    _emit(text, s.get("out"))
    return 0


def cmd_render(s: dict) -> int:
    from .lamination import Figela
    from .render import render_svg
    _require(s, "input")
    if s["format"] != "svg":
        raise UsageError("render only writes svg")
    f, _ = Figela.from_jsonl(s["input"])
    opts = _render_options(s, polygon_n=s.get("polygon_n"))
    _emit(render_svg(f.chord_list, [r.time for r in f.chords], opts), s.get("out"))
    return 0


# analyze -----------------------------------------------------------------------

def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def _analyze_acceptance(s: dict, out: Path) -> int:
    from .acceptance import run_suite, suite_passed
    from .plotting import acceptance_figures
    scale = s["replicas_scale"]
    if scale <= 0:
        raise UsageError("--replicas-scale must be positive")
    results = run_suite(scale, s.get("threads"), s.get("criteria"), echo=print)
    ok = suite_passed(results)
    report = {"suite": "acceptance", "replicas_scale": scale, "passed": ok,
              "criteria": [r.to_dict() for r in results]}
    _write(out / "acceptance.json", json.dumps(report, indent=2) + "\n")
    for p in acceptance_figures(results, out):
        log.info("wrote %s", p)
    print(f"acceptance suite {'PASSED' if ok else 'FAILED'}; report in {out / 'acceptance.json'}")
    return 0 if ok else 2


def _analyze_m1(s: dict, out: Path) -> int:
    from .analysis.estimators import estimate_m1, m1_closed_form
    from .plotting import plot_m1_profile
    grid = s.get("grid") or [0.1, 0.25, 0.5, 0.75, 0.9]
    rows = estimate_m1(grid, s.get("t_max") or 400.0, s["alpha"], s.get("replicas") or 1000, s["seed"],
                       s.get("threads"))
    _write(out / "m1.csv", _csv_text(["r", "mean", "stderr", "closed_form"],
                                     ((r, m, e, float(m1_closed_form(r))) for r, m, e in rows)))
    plot_m1_profile(*zip(*rows), out / "m1_profile.svg")
    return 0


def _analyze_height(s: dict, out: Path) -> int:
    from .analysis.estimators import height_series
    from .analysis.stats import estimate_exponent
    from .engine import BETA_STAR
    from .plotting import plot_series
    times = s.get("grid") or np.geomspace(50.0, 800.0, 8).tolist()
    series = height_series(s["alpha"], 0.5, times, s.get("replicas") or 100, s["seed"], s.get("threads"))
    series.to_csv(out / "height.csv")
    slope, se = estimate_exponent(series)
    target = BETA_STAR / s["alpha"] if s["alpha"] > 0 else None
    _write(out / "height_fit.json", json.dumps({"slope": slope, "stderr": se, "target": target}, indent=2) + "\n")
    plot_series(series.t, series.value, series.stderr, out / "height_regression.svg", slope=target,
                ylabel="E H(1, -1)", title=f"alpha = {s['alpha']:g}")
    print(f"slope {slope:.6g} +- {se:.2g}")
    return 0


def _analyze_counts(s: dict, out: Path) -> int:
    from .analysis.estimators import chord_counts
    from .analysis.stats import StatSeries, estimate_exponent
    from .plotting import plot_series
    times = sorted(s.get("grid") or np.geomspace(25.0, 400.0, 6).tolist())
    c = chord_counts(s["alpha"], times, s.get("replicas") or 100, s["seed"], s.get("threads"))
    series = StatSeries.from_samples(times, c, s["seed"], f"#S_{s['alpha']:g}(t)")
    series.to_csv(out / "counts.csv")
    slope = estimate_exponent(series)[0] if len(times) >= 5 and np.all(series.value > 0) else None
    ref = 1.0 / s["alpha"] if s["alpha"] > 0 else None
    plot_series(series.t, series.value, series.stderr, out / "chord_counts.svg", slope=ref,
                ylabel="mean chord count")
    if slope is not None:
        print(f"slope {slope:.6g}")
    return 0


def _analyze_dimension(s: dict, out: Path) -> int:
    from .analysis.dimension import box_dimension, default_scales
    from .engine import EngineConfig, simulate
    from .lamination import Figela
    from .plotting import plot_box_counts
    if s.get("input"):
        chords = Figela.from_jsonl(s["input"])[0].chord_list
    else:
        _require(s, "t_max")
        chords = simulate(EngineConfig(alpha=s["alpha"], t_max=s["t_max"], seed=s["seed"])).chords
    scales = sorted(s.get("scales") or default_scales().tolist(), reverse=True)
    slope, counts = box_dimension(chords, scales)
    _write(out / "box_counts.csv", _csv_text(["cell_size", "occupied"], zip(scales, counts.tolist())))
    plot_box_counts({"chords": (scales, counts)}, out / "box_counts.svg")
    print(f"box dimension {slope:.6g} from {len(chords)} chords")
    return 0


SUITE_RUNNERS: dict[str, Callable[[dict, Path], int]] = {
    "acceptance": _analyze_acceptance, "m1": _analyze_m1, "height": _analyze_height,
    "counts": _analyze_counts, "dimension": _analyze_dimension,
}


def cmd_analyze(s: dict) -> int:
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    return SUITE_RUNNERS[s["suite"]](s, out)


RUNNERS = {"simulate": cmd_simulate, "reject": cmd_reject, "polygon": cmd_polygon, "frag": cmd_frag,
           "code": cmd_code, "analyze": cmd_analyze, "render": cmd_render}


def main(argv: list[str] | None = None) -> int:
    try:
        cmd, settings, verbose = resolve(argv)
        logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                            format="lamina: %(levelname)s: %(message)s")
        if settings.get("threads") is not None and settings["threads"] < 1:
            raise UsageError("threads must be >= 1")
        return RUNNERS[cmd](settings)
    except UsageError as exc:
        print(f"lamina: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"lamina: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
