"""``fairflow`` command line.

Exit status: 0 on success, 2 for configuration or usage errors, 3 for
runtime failures. Machine output goes to files or stdout; stderr carries
diagnostics only. ``FAIRFLOW_SEED`` overrides the config's global seed and a
``--seed`` flag overrides both.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .analysis import compare_methods, model_selection
from .audit import Audit
from .config import parse_config
from .data import generate_synthetic, write_csv
from .errors import ConfigError, FairflowError, LabelNotBinary, MissingColumn, TooFewTrials, TypeViolation
from .experiment import ResultStore, run_experiment
from .methods import registered
from .render import render_method_comparison, render_model_selection, write_plot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
SEED_ENV = "FAIRFLOW_SEED"
ANALYSIS_FILE = "analysis.json"
PLOT_FILES = {"a": "model_selection.svg", "b": "method_comparison.svg"}

log = logging.getLogger("fairflow")


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _resolve_seed(flag: int | None, fallback: int) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return _seed(env.strip())
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"{SEED_ENV}={env!r} is not a non-negative integer") from None
    return fallback


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt(v: float | None, width: int = 8) -> str:
    return f"{'n/a':>{width}}" if v is None else f"{v:>{width}.4f}"


# -- analysis + plots written into a store ---------------------------------------


def build_analysis(store: ResultStore) -> dict[str, Any]:
    """Per-dataset model selection and method comparison, as stored in ``analysis.json``."""
    cfg = store.config
    out: dict[str, Any] = {"alpha": cfg.evaluation.alpha, "datasets": {}}
    for ds in store.datasets():
        entry = model_selection(store, ds, cfg.evaluation.alpha).to_dict()
        try:
            entry["methods"] = [m.to_dict() for m in compare_methods(store, dataset=ds)]
        except TooFewTrials as exc:
            print(f"warning: method comparison skipped for {ds}: {exc}", file=sys.stderr)
            entry["methods"] = []
        out["datasets"][ds] = entry
    return out


def _plots_for(entry: dict[str, Any], kind: str) -> tuple[str, dict[str, Any]]:
    if kind == "a":
        return render_model_selection(entry["points"], entry["frontier"], entry["best"])
    return render_method_comparison(entry["methods"])


def write_store_plots(store: ResultStore, analysis: dict[str, Any]) -> list[Path]:
    written = []
    for ds, entry in analysis["datasets"].items():
        for kind, name in PLOT_FILES.items():
            if kind == "b" and not entry["methods"]:
                continue
            svg, sidecar = _plots_for(entry, kind)
            path = store.root / "plots" / ds / name
            path.parent.mkdir(parents=True, exist_ok=True)
            write_plot(svg, sidecar, str(path))
            written.append(path)
    return written


def _summary_table(analysis: dict[str, Any]) -> str:
    lines = []
    for ds, entry in analysis["datasets"].items():
        alpha = analysis["alpha"]
        best_per_method: dict[str, dict[str, Any]] = {}
        for p in entry["points"]:
            m = p["trial_ref"]["method"]
            score = alpha * p["performance"] + (1 - alpha) * p["fairness"]
            cur = best_per_method.get(m)
            if cur is None or (score, p["fairness"]) > (cur["combined"], cur["fairness"]):
                best_per_method[m] = {**p, "combined": score}
        cis = {m["method"]: m for m in entry["methods"]}
        lines.append(f"dataset {ds} (alpha={alpha:g}; best trial per method on validation, test CI of combined score)")
        header = f"{'method':<26}{'trial':>6}{'perf':>9}{'fair':>9}{'comb':>9}{'test':>9}{'ci_low':>9}{'ci_high':>9}"
        lines += [header, "-" * len(header)]
        for m, p in sorted(best_per_method.items(), key=lambda kv: (-kv[1]["combined"], kv[0])):
            ci = cis.get(m, {})
            lines.append(
                f"{m:<26}{p['trial_ref']['trial_id']:>6} {_fmt(p['performance'])} {_fmt(p['fairness'])} {_fmt(p['combined'])}"
                f" {_fmt(ci.get('point_estimate'))} {_fmt(ci.get('ci_low'))} {_fmt(ci.get('ci_high'))}"
            )
        b = entry["best"]
        lines.append(
            f"best trade-off: {b['trial_ref']['method']}/trial_{b['trial_ref']['trial_id']} (combined {b['combined']:.4f})"
        )
        lines.append("")
    return "\n".join(lines)


# -- commands --------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    config = config.with_seed(_resolve_seed(args.seed, config.global_seed))
    store = run_experiment(config, args.out, force=args.force)
    analysis = build_analysis(store)
    _write_json(store.root / ANALYSIS_FILE, analysis)
    write_store_plots(store, analysis)
    print(f"store: {store.root}")
    print(_summary_table(analysis))
    return EXIT_OK


def _read_scores(path: Path, score_col: str, label_col: str, group_col: str) -> tuple[list[float], list[int], list[str]]:
    scores, labels, groups = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (score_col, label_col, group_col):
            if col not in header:
                raise MissingColumn(f"column {col!r} not in {path} (header: {header})")
        for i, row in enumerate(reader, start=1):
            try:
                scores.append(float(row[score_col]))
            except ValueError:
                raise TypeViolation(f"row {i}, column {score_col!r}: {row[score_col]!r} is not a number", i, score_col) from None
            token = row[label_col].strip()
            try:
                label = float(token)
            except ValueError:
                label = -1.0
            if label not in (0.0, 1.0):
                raise LabelNotBinary(f"row {i}, column {label_col!r}: label {token!r} is not 0 or 1")
            labels.append(int(label))
            groups.append(row[group_col])
    return scores, labels, groups


def cmd_audit(args: argparse.Namespace) -> int:
    path = Path(args.scores)
    scores, labels, groups = _read_scores(path, args.score_column, args.labels_column, args.group_column)
    audit = Audit(
        scores, labels, groups, threshold=args.threshold, metric=args.metric,
        reference=args.reference, tau=args.tau, fpr_budget=args.fpr_budget,
    )
    report = audit.to_dict()
    out = Path(args.out) if args.out else path.with_suffix(".audit.json")
    _write_json(out, report)

    print("group metrics")
    names = ["tpr", "fpr", "fnr", "tnr", "precision", "ppr", "prevalence"]
    print(f"{'group':<12}{'n':>6}" + "".join(f"{n:>11}" for n in names))
    for gm in audit.group_metrics():
        row = gm.to_dict()
        print(f"{gm.group:<12}{gm.counts.total:>6}" + "".join(f" {_fmt(row['metrics'][n], 10)}" for n in names))
    disp = report["disparities"]
    print()
    print(f"{disp['metric']} disparity (reference {disp['reference']}, tau {disp['tau']:g})")
    print(f"{'group':<12}{'disparity':>11}{'fair':>7}")
    for g, d in disp["per_group"].items():
        value = "inf" if d.get("infinite") else ("n/a" if d["disparity"] is None else f"{d['disparity']:.4f}")
        print(f"{g:<12}{value:>11}{'yes' if d['fair'] else 'no':>7}")
    perf = report["performance"]
    print()
    print(f"accuracy {perf['accuracy']:.4f}  fairness_score {report['fairness_score']:.4f}")
    print(f"audit written to {out}")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    store = ResultStore(args.store)
    analysis_path = store.root / ANALYSIS_FILE
    if analysis_path.exists():
        analysis = json.loads(analysis_path.read_text(encoding="utf-8"))
    else:
        analysis = build_analysis(store)
    datasets = analysis["datasets"]
    ds = args.dataset or next(iter(datasets))
    if ds not in datasets:
        raise UsageError(f"dataset {ds!r} not in store (have {sorted(datasets)})")
    entry = datasets[ds]
    if args.kind == "b" and not entry["methods"]:
        raise TooFewTrials(f"no method comparison available for {ds}")
    svg, sidecar = _plots_for(entry, args.kind)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_plot(svg, sidecar, str(out), write_sidecar=not args.no_sidecar)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate_config(args: argparse.Namespace) -> int:
    parse_config(args.config)
    print("valid")
    return EXIT_OK


def cmd_generate_synthetic(args: argparse.Namespace) -> int:
    k = args.groups
    fractions = args.fractions or [1.0 / k] * k
    if len(args.base_rates) != k or len(fractions) != k:
        raise UsageError(f"--base-rates and --fractions need {k} values (one per group)")
    if args.fractions is None:
        fractions[-1] = 1.0 - sum(fractions[:-1])
    data = generate_synthetic(args.rows, fractions, args.base_rates, args.separation, _resolve_seed(args.seed, 0))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(data, out)
    print(f"wrote {data.n_rows} rows to {out}")
    return EXIT_OK


def cmd_list_methods(args: argparse.Namespace) -> int:
    for family, kinds in registered().items():
        print(f"{family}:")
        for kind, cls in kinds.items():
            params = ", ".join(f"{n}={p.default!r}" for n, p in cls.PARAMS.items()) or "-"
            print(f"  {kind:<22}{params}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairflow", description="Reproducible fair-ML experiments.")
    parser.add_argument("--version", action="version", version=f"fairflow {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment, its analysis and plots")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="root directory for result stores")
    p.add_argument("--force", action="store_true", help="overwrite an existing store")
    p.add_argument("--seed", type=_seed, help=f"global seed (overrides {SEED_ENV} and the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit", help="audit a CSV of scores, labels and groups")
    p.add_argument("--scores", required=True, help="CSV with score, label and group columns")
    p.add_argument("--labels-column", default="label")
    p.add_argument("--group-column", default="group")
    p.add_argument("--score-column", default="score")
    p.add_argument("--reference", default=None, help="reference group (default: largest group)")
    p.add_argument("--tau", type=float, default=0.8)
    p.add_argument("--metric", default="fpr", help="group metric for disparities")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--fpr-budget", type=float, default=None)
    p.add_argument("--out", default=None, help="audit JSON path (default: <scores>.audit.json)")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("plot", help="regenerate a plot from a result store")
    p.add_argument("--store", required=True, help="result store directory")
    p.add_argument("--kind", required=True, choices=["a", "b"], help="a: model selection, b: method comparison")
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", default=None)
    p.add_argument("--no-sidecar", action="store_true", help="skip the coordinate sidecar JSON")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("validate-config", help="check a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate_config)

    p = sub.add_parser("generate-synthetic", help="write a synthetic dataset as CSV")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--groups", type=int, default=2)
    p.add_argument("--base-rates", type=_floats, required=True)
    p.add_argument("--fractions", type=_floats, default=None)
    p.add_argument("--separation", type=float, default=2.0)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_synthetic)

    p = sub.add_parser("list-methods", help="list registered method kinds")
    p.set_defaults(func=cmd_list_methods)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        if exc.errors:
            for path, msg in exc.errors:
                print(f"error: {path or '<root>'}: {msg}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FairflowError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
