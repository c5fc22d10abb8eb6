"""Command-line front end.

Exit codes: 0 success, 2 I/O or parse error, 3 validation error.
The default seed can be overridden with the VLCAUSAL_SEED environment variable.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .core import BinSpec, Config, TimeSeries, VLCausalError, validate_pair
from .dtw import path_similarity, reconstruct
from .evaluate import benchmark
from .granger import GrangerReport, vl_granger
from .pipeline import GroupData, infer_causal_graph, time_lag_test
from .simulate import (
    GENERATORS,
    PairwiseScenario,
    SuiteInstance,
    gen_benchmark_suite,
    gen_group,
    gen_pairwise,
)
from .tentropy import TEReport, vl_transfer_entropy

logger = logging.getLogger("vlcausal")

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 2, 3
SEED_ENV = "VLCAUSAL_SEED"


class InputError(Exception):
    """I/O or parse problem; maps to exit code 2."""


# ---------------------------------------------------------------- serialization

def fmt(v: float) -> str:
    # 17 significant digits round-trip every double exactly
    return format(float(v), ".17g")


def jnum(v):
    """JSON-safe number: non-finite floats become the strings inf, -inf, nan."""
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def read_csv(path) -> Dict[str, np.ndarray]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None
    if not rows or not rows[0]:
        raise InputError(f"{path} has no header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise InputError(f"{path} has duplicate column names")
    body = [r for r in rows[1:] if r]
    cols: Dict[str, list] = {h: [] for h in header}
    for n, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise InputError(f"{path}:{n}: expected {len(header)} fields, got {len(r)}")
        for h, cell in zip(header, r):
            try:
                cols[h].append(float(cell))
            except ValueError:
                raise InputError(f"{path}:{n}: cannot parse {cell!r} in column {h!r}") from None
    return {h: np.array(v, dtype=float) for h, v in cols.items()}


def write_csv(path, columns: Dict[str, np.ndarray]) -> None:
    names = list(columns)
    n = len(next(iter(columns.values())))
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for i in range(n):
                w.writerow([fmt(columns[c][i]) for c in names])
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror or e}") from None


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest(command: str, cfg: Optional[Config], inputs: List[str], T: Optional[int] = None,
             seed: Optional[int] = None) -> dict:
    digests = {}
    for p in inputs:
        try:
            digests[str(p)] = sha256_file(p)
        except OSError as e:
            raise InputError(f"cannot read {p}: {e.strerror or e}") from None
    conf = None
    if cfg is not None:
        conf = {k: jnum(v) if not isinstance(v, (dict, list, tuple, str)) else v
                for k, v in cfg.to_dict(T).items()}
        conf["te_bins"] = {k: list(v) if isinstance(v, tuple) else v for k, v in conf["te_bins"].items()}
    return {
        "command": command,
        "config": conf,
        "inputs": digests,
        "version": __version__,
        "seed": int(seed if seed is not None else (cfg.seed if cfg else 0)),
    }


def emit_json(obj: dict, output: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write {output}: {e.strerror or e}") from None


def granger_dict(r: GrangerReport) -> dict:
    keys = ("rss_restricted", "rss_unrestricted", "bic0", "bic1", "bic_diff_ratio", "f_stat",
            "f_pvalue", "cause", "order", "delta_max", "n_obs", "fix_lag", "sim_value")
    return {k: jnum(getattr(r, k)) for k in keys}


def te_dict(r: TEReport) -> dict:
    keys = ("te_xy", "te_yx", "ratio", "pvalue_xy", "pvalue_yx", "cause", "fix_lag", "sim_value")
    return {k: jnum(getattr(r, k)) for k in keys}


def report_dict(r) -> Optional[dict]:
    if r is None:
        return None
    return granger_dict(r) if isinstance(r, GrangerReport) else te_dict(r)


# ---------------------------------------------------------------- arguments

def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV}={raw!r} is not an integer") from None


def add_config_args(p: argparse.ArgumentParser, gamma: float = 0.5) -> None:
    g = p.add_argument_group("analysis parameters")
    g.add_argument("--delta-max", type=int, default=None, help="maximum lag (default floor(0.2 T))")
    g.add_argument("--gamma", type=float, default=gamma)
    g.add_argument("--alpha", type=float, default=0.05)
    g.add_argument("--sigma", type=float, default=0.5)
    g.add_argument("--nboot", type=int, default=100)
    g.add_argument("--seed", type=int, default=None, help=f"default 0 or ${SEED_ENV}")
    g.add_argument("--criterion", choices=("bic", "ftest"), default="bic")
    g.add_argument("--te-k", type=int, default=1)
    g.add_argument("--te-l", type=int, default=1)
    g.add_argument("--use-sigma", action="store_true", help="also require sim_value >= sigma")
    g.add_argument("--vl-null", choices=("realign", "symbol"), default="realign")


def config_from(args) -> Config:
    seed = args.seed if args.seed is not None else default_seed()
    return Config(delta_max=args.delta_max, gamma=args.gamma, alpha=args.alpha, sigma=args.sigma,
                  te_k=args.te_k, te_l=args.te_l, te_bins=BinSpec(), nboot=args.nboot,
                  seed=seed, criterion=args.criterion, use_sigma=args.use_sigma,
                  vl_null=args.vl_null)


def pick(cols: Dict[str, np.ndarray], name: str, path) -> np.ndarray:
    if name not in cols:
        raise InputError(f"column {name!r} not found in {path} (have {', '.join(cols)})")
    return cols[name]


# ---------------------------------------------------------------- commands

def cmd_infer(args) -> int:
    cols = read_csv(args.input)
    x = TimeSeries(pick(cols, args.x, args.input), args.x)
    y = TimeSeries(pick(cols, args.y, args.input), args.y)
    cfg = config_from(args)
    validate_pair(x, y, cfg)
    granger = args.method == "granger"
    out = {"method": "GRANGER" if granger else "TRANSFER_ENTROPY", "mode": args.mode,
           "x": args.x, "y": args.y, "kind": None, "vl_flag": None,
           "fixed_report": None, "vl_report": None, "sim_value": None}
    if args.mode == "auto":
        v = time_lag_test(x, y, cfg, "granger" if granger else "te")
        out.update(kind=v.kind.value, vl_flag=v.vl_flag,
                   fixed_report=report_dict(v.fixed_report), vl_report=report_dict(v.vl_report),
                   sim_value=jnum(v.vl_report.sim_value))
    else:
        fixed = args.mode == "fixed"
        fn = vl_granger if granger else vl_transfer_entropy
        r = fn(x, y, cfg, fix_lag=fixed)
        out["fixed_report" if fixed else "vl_report"] = report_dict(r)
        out["sim_value"] = jnum(r.sim_value)
    out["manifest"] = manifest("infer", cfg, [args.input], T=x.T)
    emit_json(out, args.output)
    return EXIT_OK


def cmd_dtw(args) -> int:
    cols = read_csv(args.input)
    x = TimeSeries(pick(cols, args.x, args.input), args.x)
    y = TimeSeries(pick(cols, args.y, args.input), args.y)
    cfg = Config(delta_max=args.delta_max, seed=0)
    al = reconstruct(x, y, cfg)
    out = {
        "x": args.x, "y": args.y,
        "delta_max": cfg.resolve_delta_max(x.T),
        "distance": jnum(al.distance),
        "sim_value": jnum(al.sim_value),
        "path_similarity": jnum(path_similarity(al.path)),
        "delta0": int(al.delta0),
        "pairs": al.path.pairs.tolist(),
        "dtw_delays": al.path.delays(y.T).tolist(),
        "selected_delays": al.raw_delays.tolist(),
        "used_delays": al.lag_path.delays.tolist(),
        "manifest": manifest("dtw", cfg, [args.input], T=x.T),
    }
    emit_json(out, args.output)
    return EXIT_OK


def cmd_graph(args) -> int:
    cols = read_csv(args.input)
    names = args.members.split(",") if args.members else list(cols)
    members = {n: TimeSeries(pick(cols, n, args.input), n) for n in names}
    group = GroupData(members)
    cfg = config_from(args)
    res = infer_causal_graph(group, cfg, args.method)
    out = {
        "method": "GRANGER" if args.method == "granger" else "TRANSFER_ENTROPY",
        "members": names,
        "edges": [{"source": a, "target": b, "kind": k.value} for a, b, k in res.edges],
        "manifest": manifest("graph", cfg, [args.input], T=group.T),
    }
    emit_json(out, args.output)
    return EXIT_OK


def _write_manifest(path: Path, m: dict) -> None:
    try:
        path.write_text(json.dumps(m, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror or e}") from None


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    out = Path(args.output)
    if args.kind == "suite":
        suite = gen_benchmark_suite(seed, per_category=args.per_category, T=args.T)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise InputError(f"cannot create {out}: {e.strerror or e}") from None
        for inst in suite:
            write_csv(out / f"{inst.id}.csv", {"X": inst.x.values, "Y": inst.y.values})
        try:
            with open(out / "labels.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["id", "file", "category", "label"])
                for inst in suite:
                    w.writerow([inst.id, f"{inst.id}.csv", inst.category, str(inst.label).lower()])
        except OSError as e:
            raise InputError(f"cannot write labels: {e.strerror or e}") from None
        m = manifest("simulate", None, [], seed=seed)
        m["parameters"] = {"kind": "suite", "T": args.T, "per_category": args.per_category}
        _write_manifest(out / "manifest.json", m)
        return EXIT_OK
    if args.kind == "pairwise":
        sc = PairwiseScenario(generator=args.generator, causal=args.causal, T=args.T,
                              delta=args.delta, noise_scale=args.noise, seed=seed)
        x, y = gen_pairwise(sc)
        write_csv(out, {"X": x.values, "Y": y.values})
        params = {"kind": "pairwise", "generator": args.generator, "causal": args.causal,
                  "T": args.T, "delta": args.delta, "noise_scale": args.noise}
    else:
        g = gen_group(args.generator, seed=seed, T=args.T, delta=args.delta, noise_scale=args.noise)
        write_csv(out, {n: g[n].values for n in g.names})
        params = {"kind": "group", "generator": args.generator, "T": args.T,
                  "delta": args.delta, "noise_scale": args.noise}
    m = manifest("simulate", None, [], seed=seed)
    m["parameters"] = params
    _write_manifest(out.with_name(out.name + ".manifest.json"), m)
    return EXIT_OK


def load_suite(directory) -> List[SuiteInstance]:
    d = Path(directory)
    labels = d / "labels.csv"
    if not d.is_dir():
        raise InputError(f"{d} is not a directory")
    if not labels.exists():
        raise InputError(f"{d} has no labels.csv")
    try:
        with open(labels, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise InputError(f"cannot read {labels}: {e.strerror or e}") from None
    if not rows:
        raise InputError(f"{labels} lists no datasets")
    suite = []
    for r in rows:
        try:
            lab = {"true": True, "false": False}[r["label"].strip().lower()]
            cols = read_csv(d / r["file"])
        except (KeyError, AttributeError):
            raise InputError(f"malformed row in {labels}: {r}") from None
        x = TimeSeries(pick(cols, "X", r["file"]), "X")
        y = TimeSeries(pick(cols, "Y", r["file"]), "Y")
        suite.append(SuiteInstance(r["id"], r.get("category", ""), lab, x, y, None))
    return suite


BENCH_COLUMNS = ("method", "delta_max_frac", "accuracy", "tpr", "fpr", "auc",
                 "precision", "recall", "f1", "wall_ms")


def cmd_bench(args) -> int:
    suite = load_suite(args.suite)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        fracs = [float(f) for f in args.delta_max_fracs.split(",") if f.strip()]
    except ValueError:
        raise InputError(f"cannot parse --delta-max-fracs {args.delta_max_fracs!r}") from None
    cfg = config_from(args)
    rows = benchmark(suite, methods, fracs, cfg)
    out = Path(args.output)
    try:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(BENCH_COLUMNS)
            for r in rows:
                rec = r.as_record()
                # metrics use the shortest repr that round-trips; undefined ones stay empty
                w.writerow(["" if rec[c] is None else (rec[c] if c == "method" else repr(float(rec[c])))
                            for c in BENCH_COLUMNS])
    except OSError as e:
        raise InputError(f"cannot write {out}: {e.strerror or e}") from None
    files = [Path(args.suite) / "labels.csv"] + [Path(args.suite) / f"{s.id}.csv" for s in suite]
    m = manifest("bench", cfg, [str(f) for f in files])
    m["parameters"] = {"methods": methods, "delta_max_fracs": fracs}
    _write_manifest(out.with_name(out.name + ".manifest.json"), m)
    return EXIT_OK


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {s!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vlcausal", description="Variable-lag causal inference on time series.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="test whether column x causes column y")
    p.add_argument("--input", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--method", choices=("granger", "te"), default="granger")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--auto", dest="mode", action="store_const", const="auto")
    mode.add_argument("--variable-lag", dest="mode", action="store_const", const="variable")
    mode.add_argument("--fixed-lag", dest="mode", action="store_const", const="fixed")
    p.set_defaults(mode="auto")
    p.add_argument("--output", default=None, help="JSON file (default stdout)")
    add_config_args(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("simulate", help="write synthetic benchmark data")
    p.add_argument("--kind", choices=("pairwise", "group", "suite"), default="pairwise")
    p.add_argument("--generator", choices=GENERATORS, default="normal")
    p.add_argument("--causal", type=_bool, default=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--T", type=int, default=200)
    p.add_argument("--delta", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--per-category", type=int, default=15)
    p.add_argument("--output", required=True, help="CSV file, or a directory for --kind suite")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dtw", help="dump the DTW alignment of two columns")
    p.add_argument("--input", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--delta-max", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_dtw)

    p = sub.add_parser("bench", help="evaluate methods on a simulated suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--methods", default="vlg,g,vlte,te")
    p.add_argument("--delta-max-fracs", default="0.1,0.2,0.3,0.4")
    p.add_argument("--output", required=True)
    add_config_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("graph", help="pairwise causal graph over the columns of a CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--members", default=None, help="comma-separated columns (default all)")
    p.add_argument("--method", choices=("granger", "te"), default="granger")
    p.add_argument("--output", default=None)
    add_config_args(p, gamma=0.3)
    p.set_defaults(func=cmd_graph)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as e:
        print(f"vlcausal: error: {e}", file=sys.stderr)
        return EXIT_IO
    except VLCausalError as e:
        print(f"vlcausal: invalid input: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
