"""Command-line interface: ``mfgp bench | train | predict``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import CASE_NAMES, FINITE_DIFFERENCE, PROVIDED, get_case, load_tabulated, run_case
from .covariance import Factorization
from .data import GradObservationSet
from .errors import (
    AllCandidatesFailed,
    DimensionMismatch,
    InconsistentVariance,
    MFGPError,
    MissingGradients,
    ModelFormatError,
    NotNested,
    NotPositiveDefinite,
    ParseError,
    TooFewPoints,
    TrainingFailed,
)
from .kernel import KernelParams
from .optimizer import GAConfig
from .surrogates import (
    COKRIGING,
    GECOKRIGING,
    GEKRIGING,
    MODEL_KINDS,
    Hyperparameters,
    TrainConfig,
    TrainedSurrogate,
    predict,
    train,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

MODEL_FORMAT_VERSION = 1
DEFAULT_MODELS = (COKRIGING, GEKRIGING, GECOKRIGING)

_NUMERICAL = (NotPositiveDefinite, AllCandidatesFailed, InconsistentVariance, TrainingFailed)


class UsageError(Exception):
    pass


# --- config -----------------------------------------------------------------

_GA_KEYS = {f.name: f.type for f in fields(GAConfig)}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_overrides(path) -> dict[str, str]:
    """``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ParseError(f"expected key=value, got {text!r}", lineno)
        k, v = (s.strip() for s in text.split("=", 1))
        out[k] = v
    return out


def build_config(overrides: dict[str, str], alpha: float | None = None, seed: int | None = None) -> TrainConfig:
    ga_kw, kw = {}, {}
    lb, ub = TrainConfig.log10_length_bounds
    rl, ru = TrainConfig.rho_bounds
    for k, v in overrides.items():
        try:
            if k in _GA_KEYS:
                ga_kw[k] = _parse_bool(v) if k == "local_polish" else (float(v) if "rate" in k or k in ("blend_alpha", "mutation_scale") else int(v))
            elif k == "length_log10_lower":
                lb = float(v)
            elif k == "length_log10_upper":
                ub = float(v)
            elif k == "rho_lower":
                rl = float(v)
            elif k == "rho_upper":
                ru = float(v)
            elif k == "alpha":
                kw["alpha"] = float(v)
            elif k == "joint":
                kw["joint"] = _parse_bool(v)
            elif k == "profile_rho":
                kw["profile_rho"] = _parse_bool(v)
            elif k == "workers":
                kw["workers"] = int(v)
            else:
                raise UsageError(f"unknown config key {k!r}")
        except ValueError as exc:
            raise UsageError(f"bad value for {k}: {exc}") from None
    if seed is not None:
        ga_kw["seed"] = seed
    if alpha is not None:
        kw["alpha"] = alpha
    try:
        return TrainConfig(ga=GAConfig(**ga_kw), log10_length_bounds=(lb, ub), rho_bounds=(rl, ru), **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --- output helpers ---------------------------------------------------------------


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_lines(manifest: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in manifest.items())


def _fmt(v) -> str:
    return repr(float(v))


def _config_summary(cfg: TrainConfig) -> str:
    d = asdict(cfg)
    ga = d.pop("ga")
    parts = [f"{k}:{v}" for k, v in sorted(ga.items())] + [f"{k}:{v}" for k, v in sorted(d.items())]
    return ";".join(parts)


# --- bench -----------------------------------------------------------------------

TIMING_COLUMNS = ("train_seconds", "predict_seconds", "grad_train_seconds", "grad_predict_seconds")


def report_rows(reports, dim: int):
    header = ["model", "run", "seed", "qoi_rel_mse"] + [f"grad{i + 1}_rel_mse" for i in range(dim)]
    header += list(TIMING_COLUMNS) + ["jitter_used", "lml"]
    rows = []
    for r in reports:
        for m, mr in r.models.items():
            g = mr.grad_rel_mse + [float("nan")] * (dim - len(mr.grad_rel_mse))
            rows.append(
                [m, str(r.run), str(r.seed), _fmt(mr.qoi_rel_mse)]
                + [_fmt(v) for v in g]
                + [_fmt(getattr(mr, c)) for c in TIMING_COLUMNS]
                + [_fmt(mr.jitter_used), _fmt(mr.lml)]
            )
    return header, rows


def summary_rows(reports, models, dim: int):
    metrics = ["qoi_rel_mse"] + [f"grad{i + 1}_rel_mse" for i in range(dim)] + list(TIMING_COLUMNS)
    header = ["model", "runs"] + [f"{m}_{s}" for m in metrics for s in ("mean", "std")]
    rows = []
    for model in models:
        vals = []
        for r in reports:
            mr = r.models[model]
            g = mr.grad_rel_mse + [float("nan")] * (dim - len(mr.grad_rel_mse))
            vals.append([mr.qoi_rel_mse] + g + [getattr(mr, c) for c in TIMING_COLUMNS])
        a = np.array(vals, dtype=float)
        row = [model, str(len(reports))]
        for j in range(a.shape[1]):
            row += [_fmt(np.mean(a[:, j])), _fmt(np.std(a[:, j]))]
        rows.append(row)
    return header, rows


def _csv(header, rows) -> str:
    return ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows)


def parse_models(text: str) -> tuple[str, ...]:
    models = tuple(m.strip().lower() for m in text.split(",") if m.strip())
    if not models:
        raise UsageError("--models is empty")
    bad = [m for m in models if m not in MODEL_KINDS]
    if bad:
        raise UsageError(f"unknown model(s) {', '.join(bad)}; expected a subset of {','.join(MODEL_KINDS)}")
    return models


def cmd_bench(args) -> int:
    if args.case not in CASE_NAMES:
        raise UsageError(f"unknown case {args.case!r}; expected one of {', '.join(CASE_NAMES)}")
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    models = parse_models(args.models)
    cfg = build_config(read_overrides(args.config) if args.config else {}, args.alpha)
    case = get_case(args.case)
    reports = run_case(case, models, args.runs, args.seed, cfg)
    out = Path(args.out)
    manifest = {
        "command": "bench",
        "case": args.case,
        "models": ",".join(models),
        "runs": args.runs,
        "seed": args.seed,
        "config": _config_summary(cfg),
        "version": __version__,
    }
    if case.notes:
        manifest["notes"] = case.notes
    head = manifest_lines(manifest)
    atomic_write(out / "report.csv", head + _csv(*report_rows(reports, case.dim)))
    atomic_write(out / "summary.csv", head + _csv(*summary_rows(reports, models, case.dim)))
    for model in models:
        q = [r.models[model].qoi_rel_mse for r in reports]
        print(f"{model}: qoi rel-MSE {np.mean(q):.4g} +/- {np.std(q):.3g} over {len(q)} run(s)")
    print(f"wrote {out / 'report.csv'} and {out / 'summary.csv'}")
    return EXIT_OK


# --- model files ----------------------------------------------------------------------


def _set_to_json(s: GradObservationSet | None):
    if s is None:
        return None
    return {
        "X": s.X.tolist(),
        "y": s.y.tolist(),
        "grads": None if s.grads is None else s.grads.tolist(),
    }


def _set_from_json(d, dim):
    if d is None:
        return None
    X = np.array(d["X"], dtype=float).reshape(-1, dim)
    return GradObservationSet(X, np.array(d["y"], dtype=float), None if d["grads"] is None else np.array(d["grads"], dtype=float).reshape(-1, dim))


def surrogate_to_json(s: TrainedSurrogate, manifest: dict | None = None) -> str:
    h = s.hyper
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": s.kind,
        "component": s.component,
        "hyper": {
            "low_kernel": {"variance": h.low_kernel.variance, "lengths": list(h.low_kernel.lengths)},
            "disc_kernel": None
            if h.disc_kernel is None
            else {"variance": h.disc_kernel.variance, "lengths": list(h.disc_kernel.lengths)},
            "rho": h.rho,
            "mean_low": h.mean_low,
            "mean_disc": h.mean_disc,
            "alpha": h.alpha,
        },
        "factor": {"lower": s.factor.lower.tolist(), "jitter_used": s.factor.jitter_used, "logdet": s.factor.logdet,
                   "scale": s.factor.scale},
        "weights": s.weights.tolist(),
        "low": _set_to_json(s.low),
        "high": _set_to_json(s.high),
        "lml": s.lml,
        "manifest": manifest or {},
    }
    # json writes floats with repr, which round-trips exactly
    return json.dumps(doc)


def surrogate_from_json(text: str) -> TrainedSurrogate:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
    version = doc.get("format_version") if isinstance(doc, dict) else None
    if not isinstance(version, int):
        raise ModelFormatError("model file has no integer format_version")
    if version > MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"model file format version {version} is newer than supported version {MODEL_FORMAT_VERSION}"
        )
    try:
        h = doc["hyper"]
        lk = KernelParams(h["low_kernel"]["variance"], tuple(h["low_kernel"]["lengths"]))
        dk = None if h["disc_kernel"] is None else KernelParams(h["disc_kernel"]["variance"], tuple(h["disc_kernel"]["lengths"]))
        hyper = Hyperparameters(lk, dk, h["rho"], h["mean_low"], h["mean_disc"], h["alpha"])
        lower = np.array(doc["factor"]["lower"], dtype=float)
        lower.setflags(write=False)
        factor = Factorization(lower, float(doc["factor"]["jitter_used"]), float(doc["factor"]["logdet"]),
                               float(doc["factor"].get("scale", 1.0)))
        weights = np.array(doc["weights"], dtype=float)
        weights.setflags(write=False)
        low = _set_from_json(doc["low"], lk.dim)
        high = _set_from_json(doc["high"], lk.dim)
        kind = doc["kind"]
        if kind not in MODEL_KINDS:
            raise ModelFormatError(f"unknown model kind {kind!r}")
        if weights.shape[0] != factor.size or lower.shape != (factor.size, factor.size):
            raise ModelFormatError("factor and weights sizes disagree")
        return TrainedSurrogate(kind, hyper, factor, weights, low, high, float(doc["lml"]), doc.get("component"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model file: {exc!r}") from None


# --- train / predict ---------------------------------------------------------------------


def cmd_train(args) -> int:
    if args.model not in MODEL_KINDS:
        raise UsageError(f"unknown model {args.model!r}; expected one of {', '.join(MODEL_KINDS)}")
    cfg = build_config(read_overrides(args.config) if args.config else {}, args.alpha, args.seed)
    mode = FINITE_DIFFERENCE if args.fd_step is not None else PROVIDED
    data, _ = load_tabulated(args.input, mode, h=args.fd_step)
    s = train(args.model, data, cfg)
    manifest = {
        "command": "train",
        "input": str(args.input),
        "model": args.model,
        "seed": args.seed,
        "config": _config_summary(cfg),
        "version": __version__,
    }
    atomic_write(args.out, surrogate_to_json(s, manifest))
    print(f"lml={s.lml!r}")
    print(f"jitter_used={s.jitter_used!r}")
    print(f"wrote {args.out}")
    return EXIT_OK


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` per dimension, comma separated; tensor grid, first axis slowest."""
    axes = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise UsageError(f"grid part {part!r} is not lo:hi:n")
        try:
            lo, hi, n = float(bits[0]), float(bits[1]), int(bits[2])
        except ValueError:
            raise UsageError(f"grid part {part!r} is not lo:hi:n") from None
        if n < 1:
            raise UsageError("grid sizes must be positive")
        axes.append(np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def read_query(path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        cells = [c.strip() for c in text.split(",")]
        if lineno and all(c.lower().startswith("x") for c in cells):
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ParseError(f"non-numeric query row {text!r}", lineno) from None
    if not rows:
        raise ParseError("query file has no rows", 0)
    if len({len(r) for r in rows}) != 1:
        raise ParseError("query rows have differing lengths", 0)
    return np.array(rows, dtype=float)


def predictions_csv(s: TrainedSurrogate, X: np.ndarray) -> str:
    p = predict(s, X)
    d = X.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + ["mean", "std"]
    header += [f"gmean{i + 1}" for i in range(d)] + [f"gstd{i + 1}" for i in range(d)]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for j in range(X.shape[0]):
        vals = list(X[j]) + [p.mean[j], p.std[j]] + list(p.grad_mean[j]) + list(p.grad_std[j])
        buf.write(",".join(_fmt(v) for v in vals) + "\n")
    return buf.getvalue()


def cmd_predict(args) -> int:
    try:
        s = surrogate_from_json(Path(args.model).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read model file: {exc}") from None
    if (args.grid is None) == (args.query is None):
        raise UsageError("give exactly one of --grid or --query")
    X = parse_grid(args.grid) if args.grid is not None else read_query(args.query)
    if X.shape[1] != s.dim:
        raise DimensionMismatch(f"query points have dimension {X.shape[1]}, model expects {s.dim}")
    manifest = {"command": "predict", "model_file": str(args.model), "kind": s.kind, "version": __version__}
    atomic_write(args.out, manifest_lines(manifest) + predictions_csv(s, X))
    print(f"wrote {X.shape[0]} rows to {args.out}")
    return EXIT_OK


# --- entry point -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mfgp", description="Multi-fidelity gradient-enhanced GP surrogates.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a named benchmark case and write report/summary CSVs")
    b.add_argument("--case", required=True, help=f"one of {', '.join(CASE_NAMES)}")
    b.add_argument("--models", default=",".join(DEFAULT_MODELS), help="comma list of model kinds")
    b.add_argument("--runs", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="bench_out", help="output directory")
    b.add_argument("--config", help="file of key=value overrides")
    b.add_argument("--alpha", type=float, help="initial jitter")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("train", help="train a model on a tabulated file")
    t.add_argument("input", help="tabulated data file (fidelity,x1..,y[,g1..])")
    t.add_argument("--model", required=True, help=f"one of {', '.join(MODEL_KINDS)}")
    t.add_argument("--out", required=True, help="model file to write")
    t.add_argument("--fd-step", type=float, help="derive gradients by central differences with this step")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--config", help="file of key=value overrides")
    t.add_argument("--alpha", type=float, help="initial jitter")
    t.set_defaults(func=cmd_train)

    q = sub.add_parser("predict", help="predict with a saved model")
    q.add_argument("model", help="model file written by 'train'")
    q.add_argument("--grid", help="lo:hi:n[,lo:hi:n...]")
    q.add_argument("--query", help="CSV of query points")
    q.add_argument("--out", required=True, help="CSV to write")
    q.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _NUMERICAL as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NotNested, MissingGradients, TooFewPoints) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ParseError, DimensionMismatch, ModelFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MFGPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
