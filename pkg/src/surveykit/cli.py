"""surveykit command line: detect, validate, importance, profile, simulate, fixture.

Every command writes its reports into ``--out`` and is a pure function of its
inputs and ``--seed``. Failures exit with status 2 and print an error object
as JSON on stderr (also saved as ``error.json`` when ``--out`` exists).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import report
from .autoencoder import AutoencoderDetector, TrainingConfig
from .dataset import CategoricalDataset, load_csv, save_csv, save_spec
from .entropy import entropy_report
from .errors import DegenerateData, SurveyKitError
from .fixtures import FIXTURES, make_fixture
from .kpca import KernelConfig, KpcaDetector
from .labeling import ATYPICAL, two_means_1d
from .profiling import medoid_table, medoids, select_k
from .sampling.montecarlo import run_monte_carlo
from .sampling.scenario import load_scenario, default_scenario
from .validation import (EntropyDetector, full_labels, internal_validation,
                         permutation_importance, stability_validation)

DETECTORS = ("entropy", "kpca", "ae")


def _threads() -> int:
    raw = os.environ.get("SURVEYKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise SurveyKitError(f"SURVEYKIT_THREADS must be an integer, got {raw!r}") from None


def make_detector(args):
    if args.detector == "entropy":
        return EntropyDetector()
    if args.detector == "kpca":
        return KpcaDetector(KernelConfig(args.gamma, args.variance_fraction))
    return AutoencoderDetector(TrainingConfig(epochs=args.epochs, learning_rate=args.lr,
                                              seed=args.seed))


def load_input(args) -> CategoricalDataset:
    if not args.input:
        raise SurveyKitError("--input is required")
    for p in (args.input, args.spec):
        if p and not Path(p).exists():
            raise SurveyKitError(f"no such file: {p}")
    data = load_csv(args.input, args.spec, weight_col=args.weights_col)
    if data.n < 2:
        raise DegenerateData(f"at least 2 rows are needed, got {data.n}")
    return data


def _label_name(v) -> str:
    return "Atypical" if v == ATYPICAL else "Typical"


# commands ------------------------------------------------------------------

def cmd_detect(args, out: Path) -> None:
    data = load_input(args)
    det = make_detector(args)
    model, lab = full_labels(det, data)
    scores = model.training_scores(data)
    base = {"detector": det.name, "seed": args.seed}
    if det.name == "entropy":
        rep = entropy_report(data)
        for v, l in zip(rep.variables, lab.labels):
            v.cluster_label = _label_name(l)
        items = [{"variable": v.variable, "gamma1": v.gamma1, "label": v.cluster_label}
                 for v in rep.variables]
        report.write_json(out / "entropy_report.json", {**base, "variables": rep.to_dict()},
                          "entropy_report")
        rows = [[v.variable, report.fmt(v.gamma1), v.cluster_label,
                 v.most_informative.label, report.fmt(v.most_informative.info_nats)]
                for v in rep.ranked()]
        report.write_csv(out / "entropy_table.csv",
                         ["variable", "gamma1", "label", "most_informative_category",
                          "info_nats"], rows)
    else:
        items = [{"row_id": i, det.score_key: float(s), "label": _label_name(l)}
                 for i, (s, l) in enumerate(zip(scores, lab.labels))]
    report.write_json(out / "scores.json", {**base, "items": items}, "scores")
    report.write_json(out / "labeling.json", {**base, **lab.to_dict()}, "labeling")


def cmd_validate(args, out: Path) -> None:
    data = load_input(args)
    det = make_detector(args)
    reports = []
    if args.scheme in ("loo", "both"):
        refit = None if args.refit is None else args.refit == "yes"
        reports.append(stability_validation(det, data, refit=refit,
                                            max_iterations=args.max_iterations, seed=args.seed))
    if args.scheme in ("kfold", "both"):
        reports.append(internal_validation(det, data, folds=args.folds, seed=args.seed))
    report.write_json(out / "validation.json",
                      {"detector": det.name, "seed": args.seed,
                       "reports": [r.to_dict() for r in reports]}, "validation")
    for r in reports:
        print(f"{r.scheme}: MCC {r.mcc_mean:.4f} [{r.mcc_ci_low:.4f}, {r.mcc_ci_high:.4f}]"
              f" over {r.n_iterations} iterations")


def cmd_importance(args, out: Path) -> None:
    data = load_input(args)
    det = make_detector(args)
    rep = permutation_importance(det, data, reps=args.reps, seed=args.seed)
    report.write_json(out / "importance.json", {"seed": args.seed, **rep.to_dict()}, "importance")
    rows = [[v.variable, report.fmt(v.mean), report.fmt(v.ci_low), report.fmt(v.ci_high)]
            for v in rep.ranked()]
    report.write_csv(out / "importance.csv",
                     ["variable", "average_importance", "ci_low", "ci_high"], rows)


def cmd_profile(args, out: Path) -> None:
    data = load_input(args)
    det = make_detector(args)
    if det.name == "entropy":
        raise SurveyKitError("profiling needs a row-level detector (kpca or ae)")
    _, lab = full_labels(det, data)
    ids = np.flatnonzero(lab.labels == ATYPICAL)
    rows = data.rows[ids]
    part = select_k(rows, (2, args.k_max), row_ids=ids, seed=args.seed, gamma=args.gamma)
    meds = medoids(rows, part.assignment, ids, data.specs)
    report.write_json(out / "subgroups.json",
                      {"detector": det.name, "seed": args.seed, "outliers": int(ids.size),
                       **part.to_dict(), "medoids": [m.to_dict() for m in meds]}, "subgroups")
    report.write_csv(out / "assignment.csv", ["row_id", "subgroup"],
                     [[int(r), int(c) + 1] for r, c in zip(part.row_ids, part.assignment)])
    table = medoid_table(meds, data.specs)
    report.write_csv(out / "medoids.csv", table[0], table[1:])
    print(f"{ids.size} outliers, {part.k} subgroups")


def cmd_simulate(args, out: Path) -> None:
    if args.scenario:
        if not Path(args.scenario).exists():
            raise SurveyKitError(f"no such file: {args.scenario}")
        sc = load_scenario(args.scenario)
    else:
        sc = default_scenario()
    if args.seed is not None:
        sc = sc.with_(seed=args.seed)
    if args.replications is not None:
        sc = sc.with_(replications=args.replications)
    res = run_monte_carlo(sc, workers=_threads())
    report.write_json(out / "summary.json", {"scenario": sc.to_dict(), **res.summary()},
                      "simulation")
    for name, (header, rows) in (("replications.csv", res.replication_rows()),
                                 ("trace.csv", res.trace_rows()),
                                 ("rb_distribution.csv", res.rb_rows())):
        report.write_csv(out / name, header, rows)
    print(res.table())


def cmd_fixture(args, out: Path) -> None:
    kw = {}
    if args.name == "survey" and args.injected:
        kw["n_injected"] = args.injected
    if args.name == "survey" and args.rows:
        kw["n"] = args.rows
    if args.name == "blobs":
        kw["k"] = args.k
    data, truth = make_fixture(args.name, seed=args.seed, **kw)
    save_csv(data, out / "data.csv")
    save_spec(data.specs, out / "spec.txt", "WEIGHT")
    report.write_csv(out / "truth.csv", ["index", "value"],
                     [[i, int(v)] for i, v in enumerate(truth)])


COMMANDS = {"detect": cmd_detect, "validate": cmd_validate, "importance": cmd_importance,
            "profile": cmd_profile, "simulate": cmd_simulate, "fixture": cmd_fixture}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surveykit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed_default=0):
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=seed_default)

    def data_opts(p):
        p.add_argument("--input", help="labelled CSV")
        p.add_argument("--spec", help="variable spec file")
        p.add_argument("--weights-col", dest="weights_col", default=None)
        p.add_argument("--detector", choices=DETECTORS, default="kpca")
        p.add_argument("--gamma", type=float, default=1.0)
        p.add_argument("--variance-fraction", dest="variance_fraction", type=float, default=0.95)
        p.add_argument("--epochs", type=int, default=500)
        p.add_argument("--lr", type=float, default=1e-2)

    p = sub.add_parser("detect", help="score and label items")
    common(p)
    data_opts(p)
    p = sub.add_parser("validate", help="leave-one-out and/or k-fold MCC")
    common(p)
    data_opts(p)
    p.add_argument("--scheme", choices=("loo", "kfold", "both"), default="both")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--max-iterations", dest="max_iterations", type=int, default=None,
                   help="cap on left-out rows (drawn with --seed)")
    p.add_argument("--refit", choices=("yes", "no"), default=None,
                   help="refit the detector per left-out row (default: per detector)")
    p = sub.add_parser("importance", help="permutation importance with jackknife CI")
    common(p)
    data_opts(p)
    p.add_argument("--reps", type=int, default=30)
    p = sub.add_parser("profile", help="subgroups and medoids among outliers")
    common(p)
    data_opts(p)
    p.add_argument("--k-max", dest="k_max", type=int, default=10)
    p = sub.add_parser("simulate", help="Monte Carlo sampling-strategy comparison")
    common(p, seed_default=None)
    p.add_argument("--scenario", help="TOML scenario file (default: built-in scenario)")
    p.add_argument("--replications", type=int, default=None)
    p = sub.add_parser("fixture", help="write a synthetic dataset")
    common(p)
    p.add_argument("--name", choices=FIXTURES, default="survey")
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--injected", type=int, default=0)
    p.add_argument("-k", type=int, default=3)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            COMMANDS[args.command](args, out)
        for w in caught:
            print(f"warning: {w.category.__name__}: {w.message}", file=sys.stderr)
        return 0
    except (SurveyKitError, OSError) as exc:
        err = exc.to_dict() if isinstance(exc, SurveyKitError) else \
            {"error": "io_error", "message": str(exc)}
        text = json.dumps({"schema_version": report.SCHEMA_VERSION, **err}, indent=2)
        print(text, file=sys.stderr)
        if out.is_dir():
            (out / "error.json").write_text(text + "\n", encoding="utf-8")
        return 2


if __name__ == "__main__":
    sys.exit(main())
