"""Command line interface.

Subcommands: ``synth`` (generate a dataset), ``align`` (fit a model and map
every subject), ``corr`` (between-subject correlation profiles per method),
``loso`` (leave-one-subject-out classification), ``sweep`` (grids over
gamma, coupling determinant, time-series length, or noise), and ``rerun``
(replay a recorded run configuration).

Every run directory receives ``run_config.json`` (the exact arguments, so
the run can be replayed into a fresh directory) and ``timings.json``
(monotonic nanosecond wall-clock figures).  Timings are the only
non-deterministic output: rerunning a command with the same arguments and
seed reproduces every other file byte for byte.

Exit codes: 0 success, 2 usage/configuration (including missing files),
3 invalid data, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .alignment import METHODS, fit, map_subject, save_model
from .classify import run_loso
from .data import (
    Dataset,
    LabelMatrix,
    SubjectData,
    load_dataset,
    normalize,
    save_dataset,
    write_matrix_csv,
)
from .errors import InvalidArgumentError, InvalidDataError, NumericError
from .metrics import correlation_report
from .supervision import coupling_determinant, kernels_for
from .synth import ROTATIONS, SynthConfig, config_as_dict, generate, save_ground_truth

PROG = "multialign"
SWEEP_KINDS = ("det", "gamma", "trs", "noise")


def _emit_error(exc: BaseException) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    def cell(v) -> str:
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run_config(out: Path, command: str, arguments: dict) -> None:
    _write_json(out / "run_config.json", {"command": command, "arguments": arguments})


def _write_timings(out: Path, command: str, stages: dict[str, int], started_ns: int) -> None:
    payload = {
        "command": command,
        "stages_ns": stages,
        "total_ns": time.perf_counter_ns() - started_ns,
    }
    _write_json(out / "timings.json", payload)


def _parse_gamma(text) -> float | None:
    if text is None or text == "auto":
        return None
    try:
        return float(text)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"--gamma must be a real number or 'auto', got {text!r}")


def _parse_k(text) -> int | None:
    if text is None or text == "auto":
        return None
    try:
        return int(text)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"--k must be an integer or 'auto', got {text!r}")


def _parse_values(text: str, kind: str) -> list[float]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise InvalidArgumentError("--values must list at least one grid point")
    try:
        if kind == "trs":
            return [int(part) for part in items]
        return [float(part) for part in items]
    except ValueError:
        raise InvalidArgumentError(f"--values contains a non-numeric entry: {text!r}")


def _load_normalized(args) -> Dataset:
    return normalize(load_dataset(args.data))


def cmd_synth(args) -> None:
    started = time.perf_counter_ns()
    config = SynthConfig(
        subjects=args.subjects,
        classes=args.classes,
        instances_per_class=args.instances,
        instance_length=args.instance_length,
        voxels=args.voxels,
        noise_sigma=args.noise,
        rotation=args.rotation,
        seed=args.seed,
    )
    out = _out_dir(args)
    t0 = time.perf_counter_ns()
    dataset, truth = generate(config)
    t1 = time.perf_counter_ns()
    save_dataset(dataset, out)
    save_ground_truth(truth, out / "ground_truth.json")
    t2 = time.perf_counter_ns()
    _write_run_config(out, "synth", config_as_dict(config))
    _write_timings(out, "synth", {"generate_ns": t1 - t0, "write_ns": t2 - t1}, started)


def cmd_align(args) -> None:
    started = time.perf_counter_ns()
    out = _out_dir(args)
    gamma = _parse_gamma(args.gamma)
    k = _parse_k(args.k)
    t0 = time.perf_counter_ns()
    dataset = _load_normalized(args)
    t1 = time.perf_counter_ns()
    kernels = kernels_for(dataset, gamma) if args.method in ("sha", "sha_r") else None
    model = fit(args.method, dataset, kernels, epsilon=args.epsilon, k=k,
                iterations=args.iters)
    t2 = time.perf_counter_ns()
    save_model(model, out)
    for subject in dataset.subjects:
        mapped = map_subject(model, subject)
        write_matrix_csv(out / f"z_{subject.subject_id}.csv", mapped.features)
    t3 = time.perf_counter_ns()
    _write_run_config(out, "align", {
        "data": str(args.data),
        "method": args.method,
        "epsilon": args.epsilon,
        "gamma": args.gamma,
        "k": args.k,
        "iters": args.iters,
        "seed": args.seed,
    })
    _write_timings(out, "align", {
        "load_ns": t1 - t0, "fit_ns": t2 - t1, "map_ns": t3 - t2,
    }, started)


def cmd_corr(args) -> None:
    started = time.perf_counter_ns()
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise InvalidArgumentError("--methods must name at least one method")
    for method in methods:
        if method not in METHODS:
            raise InvalidArgumentError(
                f"--methods entries must be among {METHODS}, got {method!r}"
            )
    out = _out_dir(args)
    gamma = _parse_gamma(args.gamma)
    k = _parse_k(args.k)
    t0 = time.perf_counter_ns()
    dataset = _load_normalized(args)
    t1 = time.perf_counter_ns()

    rows = []
    stages = {"load_ns": t1 - t0}
    for method in methods:
        m0 = time.perf_counter_ns()
        kernels = kernels_for(dataset, gamma) if method in ("sha", "sha_r") else None
        model = fit(method, dataset, kernels, epsilon=args.epsilon, k=k,
                    iterations=args.iters)
        mapped = [map_subject(model, subj).features for subj in dataset.subjects]
        report = correlation_report(mapped, dataset.labels,
                                    rho1_labeled_only=args.rho1_labeled_only)
        stages[f"{method}_ns"] = time.perf_counter_ns() - m0
        _write_json(out / f"corr_{method}.json", {
            "method": method,
            "params": {
                "epsilon": model.epsilon,
                "gamma": model.gamma,
                "k": model.k,
                "iterations": args.iters,
            },
            "report": report.to_json_dict(),
        })
        for name, summary in (("rho1", report.rho1), ("rho2", report.rho2),
                              ("rho3", report.rho3), ("rho4", report.rho4)):
            rows.append([method, name, summary.mean, summary.std])
    _write_csv(out / "corr_summary.csv", ["method", "metric", "mean", "std"], rows)
    _write_run_config(out, "corr", {
        "data": str(args.data),
        "methods": args.methods,
        "epsilon": args.epsilon,
        "gamma": args.gamma,
        "k": args.k,
        "iters": args.iters,
        "rho1_labeled_only": bool(args.rho1_labeled_only),
        "seed": args.seed,
    })
    _write_timings(out, "corr", stages, started)


def cmd_loso(args) -> None:
    started = time.perf_counter_ns()
    out = _out_dir(args)
    gamma = _parse_gamma(args.gamma)
    k = _parse_k(args.k)
    t0 = time.perf_counter_ns()
    dataset = load_dataset(args.data)
    t1 = time.perf_counter_ns()
    report = run_loso(dataset, args.method, epsilon=args.epsilon, gamma=gamma,
                      k=k, iterations=args.iters, ridge=args.ridge)
    payload = report.to_json_dict()
    payload["dataset"] = str(args.data)
    payload["seed"] = args.seed
    _write_json(out / f"loso_{args.method}.json", payload)
    _write_csv(
        out / "loso_summary.csv",
        ["dataset", "method", "seed", "accuracy_mean", "accuracy_std",
         "auc_mean", "auc_std"],
        [[str(args.data), args.method, args.seed, report.accuracy_mean,
          report.accuracy_std, report.auc_mean, report.auc_std]],
    )
    _write_run_config(out, "loso", {
        "data": str(args.data),
        "method": args.method,
        "epsilon": args.epsilon,
        "gamma": args.gamma,
        "k": args.k,
        "iters": args.iters,
        "ridge": args.ridge,
        "seed": args.seed,
    })
    stages = {"load_ns": t1 - t0}
    stages.update(report.timings["total"])
    _write_timings(out, "loso", stages, started)


def _truncate_dataset(dataset: Dataset, n_timepoints: int) -> Dataset:
    if not 2 <= n_timepoints <= dataset.n_timepoints:
        raise InvalidArgumentError(
            f"--values time-point counts must be in [2, {dataset.n_timepoints}], "
            f"got {n_timepoints}"
        )
    subjects = tuple(
        SubjectData(s.subject_id, s.data[:n_timepoints]) for s in dataset.subjects
    )
    labels = tuple(LabelMatrix(l.onehot[:, :n_timepoints]) for l in dataset.labels)
    return Dataset(subjects, labels, dataset.class_names)


def cmd_sweep(args) -> None:
    started = time.perf_counter_ns()
    out = _out_dir(args)
    values = _parse_values(args.values, args.kind)
    if args.kind in ("det", "gamma", "trs") and args.data is None:
        raise InvalidArgumentError(f"--data is required for --kind {args.kind}")

    rows = []
    if args.kind == "det":
        dataset = load_dataset(args.data)
        t = int(dataset.labels[0].labeled_indices.size)
        for v in values:
            rows.append(["det", float(v), "coupling_det",
                         coupling_determinant(t, v), 0.0])
    elif args.kind == "gamma":
        dataset = load_dataset(args.data)
        t = int(dataset.labels[0].labeled_indices.size)
        for v in values:
            report = run_loso(dataset, args.method, epsilon=args.epsilon,
                              gamma=float(v), k=_parse_k(args.k),
                              iterations=args.iters, ridge=args.ridge)
            rows.append(["gamma", float(v), "coupling_det",
                         coupling_determinant(t, v), 0.0])
            rows.append(["gamma", float(v), "accuracy",
                         report.accuracy_mean, report.accuracy_std])
            rows.append(["gamma", float(v), "auc", report.auc_mean, report.auc_std])
    elif args.kind == "trs":
        dataset = load_dataset(args.data)
        for v in values:
            truncated = _truncate_dataset(dataset, int(v))
            report = run_loso(truncated, args.method, epsilon=args.epsilon,
                              gamma=_parse_gamma(args.gamma), k=_parse_k(args.k),
                              iterations=args.iters, ridge=args.ridge)
            rows.append(["trs", int(v), "accuracy",
                         report.accuracy_mean, report.accuracy_std])
            rows.append(["trs", int(v), "auc", report.auc_mean, report.auc_std])
    else:  # noise
        for v in values:
            config = SynthConfig(noise_sigma=float(v), seed=args.seed)
            dataset, _ = generate(config)
            report = run_loso(dataset, args.method, epsilon=args.epsilon,
                              gamma=_parse_gamma(args.gamma), k=_parse_k(args.k),
                              iterations=args.iters, ridge=args.ridge)
            rows.append(["noise", float(v), "accuracy",
                         report.accuracy_mean, report.accuracy_std])
            rows.append(["noise", float(v), "auc", report.auc_mean, report.auc_std])

    _write_csv(out / "sweep.csv", ["kind", "value", "metric", "mean", "std"], rows)
    _write_run_config(out, "sweep", {
        "data": None if args.data is None else str(args.data),
        "kind": args.kind,
        "values": args.values,
        "method": args.method,
        "epsilon": args.epsilon,
        "gamma": args.gamma,
        "k": args.k,
        "iters": args.iters,
        "ridge": args.ridge,
        "seed": args.seed,
    })
    _write_timings(out, "sweep", {}, started)


def cmd_rerun(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        recorded = json.load(fh)
    if not isinstance(recorded, dict) or "command" not in recorded:
        raise InvalidDataError(f"{args.config} is not a run configuration")
    command = recorded["command"]
    if command == "rerun":
        raise InvalidArgumentError("cannot rerun a rerun")
    arguments = recorded.get("arguments", {})
    argv = [command]
    flag_names = {"instances_per_class": "--instances", "noise_sigma": "--noise"}
    for key, value in sorted(arguments.items()):
        if value is None:
            continue
        flag = flag_names.get(key, "--" + key.replace("_", "-"))
        if isinstance(value, bool):
            if value:
                argv.append(flag)
            continue
        argv.extend([flag, str(value)])
    argv.extend(["--out", str(args.out)])
    return main(argv)


def _add_common(parser, data_required=True, with_method=True):
    if data_required is not None:
        parser.add_argument("--data", required=data_required,
                            help="path to a dataset manifest (JSON)")
    if with_method:
        parser.add_argument("--method", choices=METHODS, default="sha",
                            help="alignment method (default: sha)")
    parser.add_argument("--epsilon", type=float, default=1e-4,
                        help="ridge term of the projectors (default: 1e-4)")
    parser.add_argument("--gamma", default="auto",
                        help="label-coupling strength, real or 'auto' = 1/(2t)")
    parser.add_argument("--k", default="auto",
                        help="shared-space dimension, integer or 'auto'")
    parser.add_argument("--iters", type=int, default=10,
                        help="iterations of the iterative method (default: 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Supervised and unsupervised functional alignment of "
                    "multi-subject time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--subjects", type=int, default=6)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--instances", type=int, default=4,
                   help="stimulus instances per class (default: 4)")
    p.add_argument("--instance-length", type=int, default=5,
                   help="time points per instance (default: 5)")
    p.add_argument("--voxels", type=int, default=50)
    p.add_argument("--noise", type=float, default=0.5,
                   help="noise standard deviation (default: 0.5)")
    p.add_argument("--rotation", choices=ROTATIONS, default="orthogonal")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("align", help="fit an alignment and map every subject")
    _add_common(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("corr", help="correlation profiles per method")
    _add_common(p, with_method=False)
    p.add_argument("--methods", default="none,rha,sha,sha_r",
                   help="comma-separated methods (default: all)")
    p.add_argument("--rho1-labeled-only", action="store_true",
                   help="restrict rho1 to labeled time points")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("loso", help="leave-one-subject-out classification")
    _add_common(p)
    p.add_argument("--ridge", type=float, default=1.0,
                   help="classifier ridge weight (default: 1.0)")
    p.set_defaults(func=cmd_loso)

    p = sub.add_parser("sweep", help="grid sweeps (determinant, gamma, TRs, noise)")
    _add_common(p, data_required=False)
    p.add_argument("--kind", choices=SWEEP_KINDS, required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated grid values")
    p.add_argument("--ridge", type=float, default=1.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rerun", help="replay a recorded run_config.json")
    p.add_argument("config", help="path to run_config.json")
    p.set_defaults(func=cmd_rerun)

    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=0,
                        help="base random seed (default: 0)")
        sp.add_argument("--out", required=True, help="output directory")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        result = args.func(args)
        return 0 if result is None else int(result)
    except InvalidArgumentError as exc:
        _emit_error(exc)
        return 2
    except OSError as exc:
        _emit_error(exc)
        return 2
    except InvalidDataError as exc:
        _emit_error(exc)
        return 3
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _emit_error(exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
