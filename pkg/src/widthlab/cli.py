"""Command line entry point: ``widthlab <command> [<sub>] [options]``.

Exit codes: 0 when every assertion passes, 1 on an assertion failure, 2 on an
invalid configuration, 3 when a group exceeds the element cap.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import logging
import sys

import numpy as np

from .groups import DEFAULT_CAP, CapExceeded
from .suites import ConfigError, SuiteConfig, run_suite

log = logging.getLogger("widthlab")

DEFAULTS = {"seed": 0, "threads": 1, "format": "json", "cap": DEFAULT_CAP, "samples": 10000, "trials": 1000,
            "autos": "outer"}

# suite-specific options: name -> help
PARAMS = {
    "width": {"h": "normal subgroup H: full|derived|center|v4|q8|order:k"},
    "lemma epsilon": {"all_autos": None},
    "lemma rank": {"family": "family for generated specs", "q": "field sizes, e.g. 2,3", "n": "ranks, e.g. 2..4"},
    "lemma bdedrank": {},
    "lemma notinq": {},
    "lemma space": {"q": "field sizes", "m": "dimensions, e.g. 1..3"},
    "lemma scalar": {"n": "matrix size", "eps": "comma list of eps values"},
    "torus lambda": {"angles": "comma list of angles", "free": None},
    "torus scalar": {"n": "matrix size", "eps": "comma list of eps values"},
    "torus brank": {"n": "sizes, e.g. 31..40"},
    "kt identities": {"m": "tuple lengths"},
    "kt fibers": {"h": "quasi-minimal N", "c": "central C", "m": "tuple length"},
    "kt search": {"h": "H", "c": "C", "mmax": "largest m"},
    "dns certify": {"factors": "comma list of factors", "d": "generators", "levels": "levels, e.g. 1,2"},
    "g0 property": {"random": "number of random groups", "max_order": "order bound"},
    "newcomm": {"h": "H", "a": "A", "ys": "elements in cycle notation separated by ';'", "f0": "base width"},
}

COMMON = ("seed", "threads", "format", "out", "cap", "samples", "trials", "autos")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--group", "--groups", dest="groups", action="append", default=None,
                   help="group spec (repeatable, comma lists allowed; 'tier1' expands)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out")
    p.add_argument("--cap", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--autos", choices=("outer", "all", "q", "notq"))
    p.add_argument("--config", help="file of 'key = value' lines; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="widthlab", description="Width and displacement experiments.")
    sub = top.add_subparsers(dest="command", required=True)
    groups = {}
    for name, params in PARAMS.items():
        head, _, tail = name.partition(" ")
        if tail:
            if head not in groups:
                hp = sub.add_parser(head)
                groups[head] = hp.add_subparsers(dest="sub", required=True)
            p = groups[head].add_parser(tail)
        else:
            p = sub.add_parser(head)
        _add_common(p)
        for key, hlp in params.items():
            flag = "--" + key.replace("_", "-")
            if hlp is None:
                p.add_argument(flag, dest=key, action="store_true", default=None)
            else:
                p.add_argument(flag, dest=key, help=hlp)
        p.set_defaults(suite=name)
    return top


def read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value'")
            k, v = (x.strip() for x in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _split_groups(v) -> list:
    items = v if isinstance(v, list) else [v]
    return [g.strip() for it in items for g in str(it).split(",") if g.strip()]


def make_config(args: argparse.Namespace) -> SuiteConfig:
    ns = vars(args)
    merged = dict(DEFAULTS)
    if ns.get("config"):
        merged.update(read_config(ns["config"]))
    merged.update({k: v for k, v in ns.items() if v is not None and k not in ("config", "command", "sub", "verbose")})
    suite = ns["suite"]
    allowed = set(COMMON) | {"groups", "suite"} | set(PARAMS[suite])
    unknown = sorted(set(merged) - allowed)
    if unknown:
        raise ConfigError(f"unknown option(s) for {suite}: {', '.join(unknown)}")
    try:
        ints = {k: int(merged[k]) for k in ("seed", "threads", "cap", "samples", "trials")}
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if merged["format"] not in ("json", "csv"):
        raise ConfigError(f"unknown format {merged['format']!r}")
    params = {k: merged[k] for k in PARAMS[suite] if k in merged}
    for k, v in params.items():
        if isinstance(v, str) and PARAMS[suite][k] is None:
            params[k] = v.lower() in ("1", "true", "yes")
    return SuiteConfig(suite=suite, groups=_split_groups(merged.get("groups", [])), autos=merged["autos"],
                       out=merged.get("out"), format=merged["format"], params=params, **ints)


def plain(o):
    """Recursively convert numpy scalars, arrays and tuples to JSON-native values."""
    if isinstance(o, dict):
        return {str(k): plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple, np.ndarray)):
        return [plain(v) for v in o]
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    return o


def render(report: dict, fmt: str) -> str:
    report = plain(report)
    if fmt == "json":
        return json.dumps(report, indent=1, sort_keys=True) + "\n"
    rows = report["records"]
    cols = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([json.dumps(r[c], sort_keys=True) if isinstance(r.get(c), (list, dict)) else
                    ("" if r.get(c) is None else repr(r[c]) if isinstance(r.get(c), float) else r[c]) for c in cols])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
        report = run_suite(cfg)
    except ConfigError as e:
        print(f"widthlab: invalid configuration: {e}", file=sys.stderr)
        return 2
    except CapExceeded as e:
        print(f"widthlab: cap exceeded: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"widthlab: invalid input: {e}", file=sys.stderr)
        return 2
    doc = report.to_json()
    doc["generated_at"] = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
    text = render(doc, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    status = "PASS" if report.passed else "FAIL"
    print(f"{cfg.suite}: {status} ({len(report.records)} records)", file=sys.stderr)
    for f in report.failures[:20]:
        print(f"  {f}", file=sys.stderr)
    for k, v in report.summary.items():
        if not isinstance(v, (list, dict)):
            print(f"  {k}: {v}", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
