"""Command-line interface: ``netrobust generate|analyze|attack|communities|report``.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 undefined result under ``--strict``.
A ``--config`` file of ``key = value`` lines supplies defaults that explicit
flags override.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from io import StringIO
from pathlib import Path

from . import __version__, challenge, clustering, geo, io, report, spectral
from .generators import generate
from .graph import TopologyError, Undefined

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_UNDEFINED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- key-value files ---------------------------------------------------------

REPEATABLE = {"event"}


def read_kv(path) -> dict:
    """``key = value`` per line, ``#`` comments; ``event`` may repeat."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise io.ParseError(f"cannot read file: {exc}", None, path) from None
    out: dict = {}
    for no, line in io._lines(text):
        if "=" not in line:
            raise io.ParseError(f"expected 'key = value', got {line!r}", no, path)
        k, v = (x.strip() for x in line.split("=", 1))
        k = k.replace("-", "_")
        if not k:
            raise io.ParseError("empty key", no, path)
        if k in REPEATABLE:
            out.setdefault(k, []).append((no, v))
        elif k in out:
            raise io.ParseError(f"duplicate key {k!r}", no, path)
        else:
            out[k] = v
    return out


def _value(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _floats(text: str, no, path) -> list:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise io.ParseError(f"expected numbers, got {text!r}", no, path) from None


def _event(text: str, no, path):
    kind, _, rest = text.partition(" ")
    nums = _floats(rest, no, path)
    if kind == "disk" and len(nums) == 4:
        return geo.Disk((nums[0], nums[1]), nums[2]), nums[3]
    if kind == "polygon" and len(nums) >= 7 and len(nums) % 2 == 1:
        pts = tuple(zip(nums[:-1:2], nums[1:-1:2]))
        return geo.Polygon(pts), nums[-1]
    raise io.ParseError("event must be 'disk x y r p' or 'polygon x1 y1 ... xn yn p'", no, path)


SCENARIO_KEYS = {"strategy", "metric", "adaptive", "p", "count", "fraction", "entity", "alpha",
                 "trigger", "load", "a", "tracked", "schedule", "seed", "on_undefined", "event",
                 "descending"}


def load_scenario(path, seed=None) -> challenge.ChallengeScenario:
    kv = read_kv(path)
    unknown = sorted(set(kv) - SCENARIO_KEYS)
    if unknown:
        raise io.ParseError(f"unknown scenario key(s): {', '.join(unknown)}", None, path)
    if "strategy" not in kv:
        raise io.ParseError("scenario needs a strategy", None, path)
    params = {}
    for k in ("metric", "adaptive", "p", "count", "fraction", "entity", "alpha", "trigger", "load",
              "descending"):
        if k in kv:
            params[k] = _value(kv[k])
    if "a" in kv:
        params["A"] = float(kv["a"])
    if "event" in kv:
        params["events"] = [_event(v, no, path) for no, v in kv["event"]]
    tracked = tuple(x.strip() for x in kv.get("tracked", "giant_fraction").split(",") if x.strip())
    schedule = _floats(kv["schedule"], None, path) if "schedule" in kv else None
    if seed is None:
        seed = int(kv.get("seed", 0))
    try:
        return challenge.ChallengeScenario(kv["strategy"], params, tracked, schedule, seed,
                                           kv.get("on_undefined", "record"))
    except challenge.ScenarioError as exc:
        raise io.ParseError(str(exc), None, path) from None


# -- shared plumbing ---------------------------------------------------------

DEFAULTS = {"format": "json", "seed": 0, "input_format": "edgelist", "coord_kind": "latlon",
            "strict": False, "directed": False}


def _settings(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update({k: _value(v) for k, v in read_kv(args.config).items() if k not in REPEATABLE})
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "cmd", "func"):
            cfg[k] = v
    return cfg


def _num(x) -> str:
    """Shortest round-trip decimal; tagged text for undefined values."""
    if isinstance(x, Undefined):
        return f"undefined: {x.reason}"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _load_topology(cfg) -> tuple:
    path = cfg["input"]
    t = io.ingest(path, cfg["input_format"], directed=bool(cfg["directed"]))
    inputs = {str(path): io.file_hash(path)}
    if cfg.get("coords"):
        t = io.ingest(cfg["coords"], "coords", base=t, coord_kind=cfg["coord_kind"])
        inputs[str(cfg["coords"])] = io.file_hash(cfg["coords"])
    if cfg.get("labels"):
        t = io.ingest(cfg["labels"], "labels", base=t)
        inputs[str(cfg["labels"])] = io.file_hash(cfg["labels"])
    return t, inputs


def _metric_keys(cfg):
    m = cfg.get("metrics")
    if m is None:
        return None
    keys = [k.strip() for k in str(m).split(",") if k.strip()]
    if keys == ["all"]:
        return list(report.REGISTRY)
    bad = [k for k in keys if k not in report.REGISTRY]
    if bad:
        raise UsageError(f"unknown metric key(s): {', '.join(bad)} (see --list-metrics)")
    return keys


OPTION_KEYS = ("h", "r", "p", "m", "A", "ratio", "tau", "hegemony_alpha", "p_fail", "samples",
               "null_samples", "vif_d")


def _options(cfg) -> dict:
    return {k: cfg[k] for k in OPTION_KEYS if k in cfg}


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}/{k}" if prefix else str(k), v, rows)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}/{i}" if prefix else str(i), v, rows)
    else:
        rows.append((prefix, value))


def _metrics_csv(doc: report.ReportDocument) -> str:
    buf = StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "item", "value"])
    for m in doc.metrics:
        rows = []
        _flatten("", m["value"], rows)
        for item, val in rows:
            w.writerow([m["key"], item, _num(val)])
    return buf.getvalue()


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _check_strict(cfg, doc: report.ReportDocument) -> int:
    bad = doc.undefined_keys()
    if cfg["strict"] and bad:
        print(f"undefined under strict mode: {', '.join(bad)}", file=sys.stderr)
        return EXIT_UNDEFINED
    return EXIT_OK


# -- subcommands -------------------------------------------------------------

def cmd_list_metrics(cfg) -> int:
    rows = report.coverage_rows()
    if cfg["format"] == "json":
        sys.stdout.write(json.dumps([dict(zip(("section", "metric", "status", "keys"), r)) for r in rows],
                                    indent=2) + "\n")
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["section", "metric", "status", "keys"])
        w.writerows(rows)
    return EXIT_OK


def cmd_generate(cfg) -> int:
    try:
        t = generate(cfg["model"], *cfg["params"], seed=cfg["seed"])
    except (TopologyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    _emit(io.format_edgelist(t), cfg.get("out"))
    return EXIT_OK


def cmd_analyze(cfg) -> int:
    if cfg.get("list_only"):
        return cmd_list_metrics(cfg)
    if not cfg.get("input"):
        raise UsageError("analyze needs an input file")
    keys = _metric_keys(cfg)
    t, inputs = _load_topology(cfg)
    doc = report.analyze(t, keys, seed=int(cfg["seed"]), options=_options(cfg), inputs=inputs)
    _emit(doc.dumps() if cfg["format"] == "json" else _metrics_csv(doc), cfg.get("out"))
    return _check_strict(cfg, doc)


def _curve_csv(trace, key) -> str:
    buf = StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fraction_removed", "value"])
    for f, v in trace.curve(key):
        w.writerow([_num(float(f)), _num(v)])
    return buf.getvalue()


def cmd_attack(cfg) -> int:
    scenario = load_scenario(cfg["scenario"], cfg.get("seed_flag"))
    t, inputs = _load_topology(cfg)
    try:
        trace = challenge.run_challenge(t, scenario)
    except challenge.ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED if "undefined" in str(exc) else EXIT_PARSE
    except TopologyError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out = Path(cfg.get("out_dir") or ".")
    out.mkdir(parents=True, exist_ok=True)
    for key in scenario.tracked:
        path = out / f"{key}.csv"
        path.write_text(_curve_csv(trace, key))
        print(path)
    if cfg["format"] == "json":
        (out / "trace.json").write_text(json.dumps(report._tag(report.trace_dict(trace, scenario.strategy)),
                                                   indent=2, sort_keys=True) + "\n")
        print(out / "trace.json")
    if cfg["strict"] and any(isinstance(v, Undefined) for s in trace.steps for v in s.snapshot.values()):
        return EXIT_UNDEFINED
    return EXIT_OK


def cmd_communities(cfg) -> int:
    t, _ = _load_topology(cfg)
    u = t.as_undirected()
    algos = {"spectral": lambda: clustering.detect_communities_spectral(u),
             "edge_betweenness": lambda: clustering.detect_communities_edge_betweenness(u, seed=cfg["seed"]),
             "spectral_clusters": lambda: spectral.spectral_clusters(u).assignment}
    chosen = list(algos) if cfg["algorithm"] == "all" else [cfg["algorithm"]]
    result = {a: algos[a]() for a in chosen}
    if cfg["format"] == "json":
        doc = {a: {"modularity": float(c.Q), "communities": c.count,
                   "labels": {str(t.name_of(i)): int(x) for i, x in enumerate(c.labels)}}
               for a, c in result.items()}
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", cfg.get("out"))
    else:
        buf = StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", *chosen])
        for i in range(t.v):
            w.writerow([t.name_of(i), *(int(result[a].labels[i]) for a in chosen)])
        _emit(buf.getvalue(), cfg.get("out"))
    return EXIT_OK


def cmd_report(cfg) -> int:
    keys = _metric_keys(cfg)
    t, inputs = _load_topology(cfg)
    doc = report.analyze(t, keys, seed=int(cfg["seed"]), options=_options(cfg), inputs=inputs)
    for path in cfg.get("scenario") or []:
        scenario = load_scenario(path, cfg.get("seed_flag"))
        inputs[str(path)] = io.file_hash(path)
        trace = challenge.run_challenge(t, scenario)
        doc.traces.append(report.trace_dict(trace, Path(path).stem))
    doc.provenance["inputs"] = dict(sorted(inputs.items()))
    _emit(doc.dumps(), cfg.get("out"))
    return _check_strict(cfg, doc)


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file with default settings")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--strict", action="store_const", const=True,
                        help="exit 3 when any requested value is undefined")

    ingest = _Parser(add_help=False)
    ingest.add_argument("input", nargs="?")
    ingest.add_argument("--input-format", choices=("edgelist", "weighted_edgelist", "as_rel"))
    ingest.add_argument("--directed", action="store_const", const=True)
    ingest.add_argument("--coords", help="node,lat,lon file")
    ingest.add_argument("--coord-kind", choices=("latlon", "planar"))
    ingest.add_argument("--labels", help="node,label file")
    ingest.add_argument("--metrics", help="comma-separated metric keys, or 'all'")
    ingest.add_argument("--option", action="append", default=None, metavar="KEY=VALUE",
                        help="metric parameter such as h=2 or p=0.95")

    p = _Parser(prog="netrobust", description="Topological robustness analysis of network graphs.")
    p.add_argument("--version", action="version", version=f"netrobust {__version__}")
    p.add_argument("--list-metrics", action="store_true",
                   help="list every catalogued metric with its status and exit")
    p.add_argument("--format", choices=("json", "csv"), dest="top_format")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="write a synthetic topology as an edge list")
    g.add_argument("model", choices=("er", "ba", "ws", "star", "path", "cycle", "complete"))
    g.add_argument("params", nargs="+")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", parents=[common, ingest], help="compute metrics")
    a.add_argument("--list-metrics", dest="list_only", action="store_const", const=True,
                   help="list every catalogued metric with its status and exit")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("attack", parents=[common, ingest], help="run a challenge scenario")
    t.add_argument("--scenario", required=True)
    t.add_argument("--out-dir", help="directory for the per-metric CSV curves")
    t.set_defaults(func=cmd_attack)

    c = sub.add_parser("communities", parents=[common, ingest], help="detect communities")
    c.add_argument("--algorithm", choices=("spectral", "edge_betweenness", "spectral_clusters", "all"))
    c.set_defaults(func=cmd_communities)

    r = sub.add_parser("report", parents=[common, ingest], help="metrics plus challenge traces as JSON")
    r.add_argument("--scenario", action="append")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.list_metrics and not args.cmd:
            return cmd_list_metrics({"format": args.top_format or "csv"})
        if not args.cmd:
            raise UsageError("a subcommand is required")
        seed_flag = args.seed
        opts = getattr(args, "option", None) or []
        for name in ("list_metrics", "top_format", "option"):
            if hasattr(args, name):
                delattr(args, name)
        cfg = _settings(args)
        cfg["seed_flag"] = seed_flag
        cfg.setdefault("algorithm", "all")
        if cfg.get("algorithm") is None:
            cfg["algorithm"] = "all"
        for item in opts:
            k, sep, v = item.partition("=")
            if not sep:
                raise UsageError(f"--option expects KEY=VALUE, got {item!r}")
            cfg[k.strip()] = _value(v.strip())
        if args.cmd in ("attack", "communities", "report") and not cfg.get("input"):
            raise UsageError(f"{args.cmd} needs an input file")
        return args.func(cfg)
    except UsageError as exc:
        print(f"netrobust: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except io.ParseError as exc:
        print(f"netrobust: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TopologyError as exc:
        print(f"netrobust: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
