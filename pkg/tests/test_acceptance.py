"""Acceptance criteria 1-10 at their stated tolerances.

Each test records one PASS/FAIL line, printed in the terminal summary.
All stochastic pieces use seed 42 and the default training configuration.
"""

import time

import numpy as np
import pytest

from mfgp.benchmarks import CASE_NAMES, get_case, power_case, run_case
from mfgp.cli import main
from mfgp.kernel import Kernel, kernel_eval, kernel_grad_x, kernel_hess_cross
from mfgp.optimizer import derive_seed
from mfgp.surrogates import (
    COKRIGING,
    GECOKRIGING,
    GRADIENT_KINDS,
    MODEL_KINDS,
    TrainConfig,
    predict,
    train,
)

SEED = 42
RUNS = 5
CFG = TrainConfig()
PAIR = (COKRIGING, GECOKRIGING)


def _mean(reports, model, field="qoi_rel_mse"):
    return float(np.mean([getattr(r.models[model], field) for r in reports]))


def _grad_mean(reports, model):
    return float(np.mean([np.mean(r.models[model].grad_rel_mse) for r in reports]))


_REPORTS = {}


def _reports(case):
    if case not in _REPORTS:
        t0 = time.perf_counter()
        reps = run_case(case, PAIR, RUNS, SEED, CFG)
        _REPORTS[case] = (reps, time.perf_counter() - t0)
    return _REPORTS[case]


# --- 1 -------------------------------------------------------------------------


def test_criterion_01_kernel_derivatives(record_criterion):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst1 = worst2 = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        lengths = rng.uniform(0.3, 2.0, d)
        kern = Kernel.gaussian(rng.uniform(0.5, 3.0), lengths)
        x = rng.uniform(-1, 1, d)
        xp = x + rng.normal(0, 1, d) * lengths
        h1 = 1e-5 * lengths
        h2 = 1e-4 * lengths
        fd1 = np.empty(d)
        fd2 = np.empty((d, d))
        for i in range(d):
            e = np.zeros(d)
            e[i] = h1[i]
            fd1[i] = (kernel_eval(kern, x + e, xp) - kernel_eval(kern, x - e, xp)) / (2 * h1[i])
            for j in range(d):
                a = np.zeros(d)
                b = np.zeros(d)
                a[i] = h2[i]
                b[j] = h2[j]
                fd2[i, j] = (
                    kernel_eval(kern, x + a, xp + b) - kernel_eval(kern, x + a, xp - b)
                    - kernel_eval(kern, x - a, xp + b) + kernel_eval(kern, x - a, xp - b)
                ) / (4 * h2[i] * h2[j])
        g = kernel_grad_x(kern, x, xp)
        H = kernel_hess_cross(kern, x, xp)
        worst1 = max(worst1, np.linalg.norm(g - fd1) / np.linalg.norm(fd1))
        worst2 = max(worst2, np.linalg.norm(H - fd2) / np.linalg.norm(fd2))
    elapsed = time.perf_counter() - t0
    ok = worst1 < 1e-5 and worst2 < 1e-4 and elapsed < 1.0
    record_criterion(1, ok, f"first rel err {worst1:.1e} (< 1e-5), cross-second {worst2:.1e} (< 1e-4), {elapsed:.2f} s (< 1 s)")
    assert ok


# --- 2 and 3 -------------------------------------------------------------------


@pytest.fixture(scope="module")
def interpolation():
    """Train every model on every case (run 0 design) and predict at the
    high-fidelity training locations. Elapsed time covers both."""
    out = {}
    t0 = time.perf_counter()
    for name in CASE_NAMES:
        case = get_case(name)
        data = case.design(derive_seed(SEED, 0))
        for kind in MODEL_KINDS:
            s = train(kind, data, CFG.with_seed(derive_seed(SEED, 0, kind)))
            out[name, kind] = (case, data, s, predict(s, data.high.X))
    return out, time.perf_counter() - t0


def test_criterion_02_interpolation(interpolation, record_criterion):
    results, elapsed = interpolation
    worst_val = worst_grad = worst_var = 0.0
    for (name, kind), (case, data, s, p) in results.items():
        obs = data.high
        worst_val = max(worst_val, np.max(np.abs(p.mean - obs.y)) / np.max(np.abs(obs.y)))
        if kind in GRADIENT_KINDS:
            worst_grad = max(worst_grad, np.max(np.abs(p.grad_mean - obs.grads)) / np.max(np.abs(obs.grads)))
        worst_var = max(worst_var, np.max(p.variance) / s.prior_variance)
    ok = worst_val < 1e-5 and worst_grad < 1e-5 and worst_var < 1e-6 and elapsed < 30.0
    record_criterion(
        2, ok,
        f"value err {worst_val:.1e}, gradient err {worst_grad:.1e} (< 1e-5 scaled), "
        f"variance {worst_var:.1e} sigma^2 (< 1e-6), {elapsed:.1f} s (< 30 s)",
    )
    assert ok


def _fd_steps(s, X):
    """Noise-aware central-difference steps ``eps_f^(1/3) * l_i``.

    ``eps_f`` is the relative rounding level of the predicted mean: machine
    epsilon times the cancellation factor ``sum|k_i w_i| / max|mean|``,
    which is large when the training matrix is nearly singular.
    """
    K = s.cross_covariance(X)[:, : X.shape[0]]
    mean = predict(s, X).mean
    eps_f = np.finfo(float).eps * max(1.0, np.max(np.abs(K * s.weights[:, None]).sum(axis=0)) / np.max(np.abs(mean)))
    lengths = np.asarray(s.hyper.low_kernel.lengths)
    if s.hyper.disc_kernel is not None:
        lengths = np.minimum(lengths, s.hyper.disc_kernel.lengths)
    return eps_f ** (1 / 3) * lengths


def test_criterion_03_gradient_commutation(interpolation, record_criterion):
    results, _ = interpolation
    rng = np.random.default_rng(SEED)
    worst, where = 0.0, ""
    for (name, kind), (case, _, s, _) in results.items():
        if kind not in GRADIENT_KINDS:
            continue
        lo, hi = case.test_grid.min(axis=0), case.test_grid.max(axis=0)
        pad = 0.05 * (hi - lo)
        X = rng.uniform(lo + pad, hi - pad, (50, case.dim))
        g = predict(s, X).grad_mean
        steps = _fd_steps(s, X)
        fd = np.empty_like(g)
        for i in range(case.dim):
            e = np.zeros(case.dim)
            e[i] = steps[i]
            fd[:, i] = (predict(s, X + e).mean - predict(s, X - e).mean) / (2 * e[i])
        err = np.max(np.abs(g - fd)) / np.max(np.abs(fd))
        if err > worst:
            worst, where = err, f"{name}/{kind}"
    ok = worst < 1e-4
    record_criterion(3, ok, f"worst scaled gradient/FD mismatch {worst:.1e} ({where}) (< 1e-4) at 50 points per case")
    assert ok


# --- 4 - 8 ------------------------------------------------------------------------


def test_criterion_04_forrester_case_1(record_criterion):
    reps, elapsed = _reports("1d1")
    ge, co = _mean(reps, GECOKRIGING), _mean(reps, COKRIGING)
    ge_g, co_g = _grad_mean(reps, GECOKRIGING), _grad_mean(reps, COKRIGING)
    ok = ge <= 0.05 and co >= 2 * ge and ge_g <= 0.05 and co_g >= 2 * ge_g and elapsed < 120.0
    record_criterion(
        4, ok,
        f"QoI GE-Cokriging {ge:.3g} vs Cokriging {co:.3g}; gradient {ge_g:.3g} vs baseline {co_g:.3g}; {elapsed:.0f} s",
    )
    assert ok


def test_criterion_05_forrester_case_2(record_criterion):
    reps, _ = _reports("1d2")
    ge = _mean(reps, GECOKRIGING)
    wins = sum(r.models[GECOKRIGING].qoi_rel_mse < r.models[COKRIGING].qoi_rel_mse for r in reps)
    ok = ge <= 0.3 and wins >= 4
    record_criterion(
        5, ok,
        f"QoI GE-Cokriging {ge:.3g} (<= 0.3), Cokriging {_mean(reps, COKRIGING):.3g}; GE better in {wins}/{RUNS} runs (>= 4)",
    )
    assert ok


def test_criterion_06_oscillator(record_criterion):
    reps, _ = _reports("oscillator")
    traj, vel = _mean(reps, GECOKRIGING), _grad_mean(reps, GECOKRIGING)
    co = _mean(reps, COKRIGING)
    case = get_case("oscillator")
    x, v = case.truth_values, case.truth_grads[:, 0]
    diag = np.hypot(np.ptp(x), np.ptp(v))
    worst = 0.0
    for r in range(RUNS):
        s = train(GECOKRIGING, case.design(derive_seed(SEED, r)), CFG.with_seed(derive_seed(SEED, r, GECOKRIGING)))
        p = predict(s, case.test_grid)
        worst = max(worst, np.max(np.hypot(p.mean - x, p.grad_mean[:, 0] - v)) / diag)
    ok = traj <= 0.25 and vel <= 0.25 and co >= 0.5 and worst <= 0.10
    record_criterion(
        6, ok,
        f"trajectory {traj:.3g}, velocity {vel:.3g} (<= 0.25); Cokriging trajectory {co:.3g} (>= 0.5); "
        f"phase distance {100 * worst:.1f}% of diagonal (<= 10%)",
    )
    assert ok


def test_criterion_07_branin(record_criterion):
    reps, _ = _reports("branin")
    wins = sum(r.models[GECOKRIGING].qoi_rel_mse < r.models[COKRIGING].qoi_rel_mse for r in reps)
    ok = wins >= 4
    record_criterion(
        7, ok,
        f"GE-Cokriging better in {wins}/{RUNS} random nested designs (>= 4); "
        f"means {_mean(reps, GECOKRIGING):.3g} vs {_mean(reps, COKRIGING):.3g}",
    )
    assert ok


def test_criterion_08_power(record_criterion):
    data, case = power_case()
    jitters = {}
    for kind in MODEL_KINDS:
        s = train(kind, data, TrainConfig(alpha=1e-14).with_seed(derive_seed(SEED, 0, kind)))
        jitters[kind] = s.jitter_used
        assert np.all(np.isfinite(predict(s, case.test_grid).mean))
    reps, _ = _reports("power")
    ge, co = _mean(reps, GECOKRIGING), _mean(reps, COKRIGING)
    ge_g, co_g = _grad_mean(reps, GECOKRIGING), _grad_mean(reps, COKRIGING)
    ok = ge < co and ge_g < co_g
    used = ", ".join(f"{k} {v:.0e}" for k, v in jitters.items())
    record_criterion(
        8, ok, f"all models trained (jitter: {used}); QoI {ge:.2g} vs {co:.2g}; gradient {ge_g:.2g} vs {co_g:.2g}"
    )
    assert ok


# --- 9 and 10 -------------------------------------------------------------------


def test_criterion_09_timing_shape(record_criterion):
    details, ok = [], True
    for name in ("1d1", "branin"):
        reps, _ = _reports(name)
        ge_train = _mean(reps, GECOKRIGING, "train_seconds")
        co_train = _mean(reps, COKRIGING, "train_seconds")
        ge_grad = _mean(reps, GECOKRIGING, "grad_predict_seconds")
        baseline = _mean(reps, COKRIGING, "grad_train_seconds") + _mean(reps, COKRIGING, "grad_predict_seconds")
        ok = ok and ge_train > co_train and ge_grad < 0.1 * baseline
        details.append(
            f"{name}: train {ge_train:.2f} s vs {co_train:.2f} s, gradient {1e3 * ge_grad:.1f} ms vs baseline {baseline:.2f} s"
        )
    record_criterion(9, ok, "; ".join(details))
    assert ok


def test_criterion_10_bench_determinism(tmp_path, record_criterion):
    tables = []
    for name in ("a", "b"):
        out = tmp_path / name
        argv = ["bench", "--case", "1d1", "--models", "cokriging,gekriging,gecokriging",
                "--runs", "2", "--seed", str(SEED), "--out", str(out)]
        assert main(argv) == 0
        lines = (out / "report.csv").read_text().splitlines()
        manifest = [l for l in lines if l.startswith("#")]
        rows = [l.split(",") for l in lines if not l.startswith("#")]
        cols = [i for i, h in enumerate(rows[0]) if h.endswith("rel_mse")]
        tables.append((manifest, [[row[i] for i in cols] for row in rows]))
    ok = tables[0] == tables[1]
    record_criterion(10, ok, f"two bench runs, identical manifests, {len(tables[0][1]) - 1} rows of rel-MSE compared bitwise")
    assert ok
