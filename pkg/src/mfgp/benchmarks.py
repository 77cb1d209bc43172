"""Analytic two-fidelity test problems, tabulated data ingestion and the
benchmark harness.

Every analytic case exposes high/low fidelity values with exact
gradients, a nested default design and a dense test grid.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .data import GradObservationSet, MultiFidelityData, nesting_map
from .errors import (
    AllCandidatesFailed,
    InconsistentVariance,
    MissingColumns,
    NonNestedDesign,
    NotNested,
    NotPositiveDefinite,
    ParseError,
    TrainingFailed,
    ZeroTruthNorm,
)
from .optimizer import derive_seed
from .surrogates import (
    COKRIGING,
    GECOKRIGING,
    GEKRIGING,
    KRIGING,
    MODEL_KINDS,
    TrainConfig,
    predict,
    train,
    train_cokriging_gradient_baseline,
)

CASE_NAMES = ("1d1", "1d2", "branin", "oscillator", "power")

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FidelityPair:
    """High/low fidelity values and gradients as vectorized closures.

    Closures take ``(m, d)`` arrays (1-D arrays are read as scalar inputs)
    and return ``(m,)`` values or ``(m, d)`` gradients.
    """

    f_high: Func
    f_low: Func
    grad_high: Func
    grad_low: Func
    dim: int


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1)
    if x.ndim == 1:
        return x.reshape(-1, 1) if dim == 1 else x.reshape(1, -1)
    return x


@dataclass(frozen=True)
class BenchmarkCase:
    """A benchmark problem: design, test grid and high-fidelity truth.

    ``design`` maps a run seed to a ``MultiFidelityData`` so cases with
    random designs can redraw per run; fixed designs ignore the seed.
    """

    name: str
    dim: int
    design: Callable[[int], MultiFidelityData]
    test_grid: np.ndarray
    truth_values: np.ndarray
    truth_grads: np.ndarray
    notes: str = ""

    def __post_init__(self):
        m = self.test_grid.shape[0]
        if self.truth_values.shape != (m,) or self.truth_grads.shape != (m, self.dim):
            raise ValueError("truth arrays must match the test grid length")


def _observe(X: np.ndarray, f: Func, g: Func) -> GradObservationSet:
    return GradObservationSet(X, f(X), g(X))


def _pair_data(pair: FidelityPair, XL, XH) -> MultiFidelityData:
    XL = _as_points(XL, pair.dim)
    XH = _as_points(XH, pair.dim)
    return MultiFidelityData(
        _observe(XL, pair.f_low, pair.grad_low), _observe(XH, pair.f_high, pair.grad_high)
    )


def _analytic_case(name, pair: FidelityPair, design, grid, notes="") -> BenchmarkCase:
    grid = _as_points(grid, pair.dim)
    return BenchmarkCase(name, pair.dim, design, grid, pair.f_high(grid), pair.grad_high(grid), notes)


# --- Forrester ---------------------------------------------------------------

FORRESTER_X_HIGH = (0.0, 0.2, 0.6, 1.0)
FORRESTER_X_LOW = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
FORRESTER_SHIFT = 0.005


def forrester_high(x):
    x = np.asarray(x, dtype=float)
    return (6 * x - 2) ** 2 * np.sin(12 * x - 4)


def forrester_high_grad(x):
    x = np.asarray(x, dtype=float)
    return 12 * (6 * x - 2) * np.sin(12 * x - 4) + 12 * (6 * x - 2) ** 2 * np.cos(12 * x - 4)


def forrester_low(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * forrester_high(x) + 10 * (x - 0.5) - 5


def forrester_low_grad(x):
    return 0.5 * forrester_high_grad(x) + 10


def forrester_pair(case: int = 1) -> tuple[FidelityPair, MultiFidelityData, np.ndarray]:
    """Forrester pair: case 1 uses the linear low fidelity, case 2 shifts it by 0.005.

    Returns the fidelity pair, the default nested design and the
    101-point test grid on [0, 1].
    """
    if case not in (1, 2):
        raise ValueError(f"Forrester case must be 1 or 2, got {case}")
    shift = 0.0 if case == 1 else FORRESTER_SHIFT

    def wrap(fun):
        return lambda X: fun(_as_points(X, 1)[:, 0] - shift)

    def wrap_grad(fun):
        return lambda X: fun(_as_points(X, 1)[:, 0] - shift)[:, None]

    pair = FidelityPair(
        f_high=lambda X: forrester_high(_as_points(X, 1)[:, 0]),
        f_low=wrap(forrester_low),
        grad_high=lambda X: forrester_high_grad(_as_points(X, 1)[:, 0])[:, None],
        grad_low=wrap_grad(forrester_low_grad),
        dim=1,
    )
    design = _pair_data(pair, FORRESTER_X_LOW, FORRESTER_X_HIGH)
    return pair, design, np.linspace(0.0, 1.0, 101)


# --- modified Branin ---------------------------------------------------------

BRANIN_A, BRANIN_B, BRANIN_C = 1.1, 0.95, 0.9
BRANIN_GRID = 41
BRANIN_N_LOW = 30
BRANIN_N_HIGH = 10
_BR = dict(a=1.0, b=5.1 / (4 * math.pi**2), c=5 / math.pi, r=6.0, g=10.0, p=1 / (8 * math.pi), q=5.0)


def _branin_parts(X):
    X = _as_points(X, 2)
    u = 15 * X[:, 0] - 5
    v = 15 * X[:, 1]
    a, b, c, r, g, p, q = (_BR[k] for k in "abcrgpq")
    inner = v - b * u**2 + c * u - r
    return u, v, inner, a, b, c, g, p, q


def branin_high(X):
    """Modified Branin on [0, 1]^2: the classic Branin plus ``q * x``."""
    u, v, inner, a, b, c, g, p, q = _branin_parts(X)
    x = _as_points(X, 2)[:, 0]
    return a * inner**2 + g * (1 - p) * np.cos(u) + g + q * x


def branin_high_grad(X):
    u, v, inner, a, b, c, g, p, q = _branin_parts(X)
    dfu = 2 * a * inner * (c - 2 * b * u) - g * (1 - p) * np.sin(u)
    dfv = 2 * a * inner
    return np.column_stack([15 * dfu + q, 15 * dfv])


def _branin_low_args(X):
    X = _as_points(X, 2)
    return np.column_stack([BRANIN_B * X[:, 0] + (1 - BRANIN_B), BRANIN_C * X[:, 1]])


def branin_low(X):
    return BRANIN_A * branin_high(_branin_low_args(X))


def branin_low_grad(X):
    return BRANIN_A * branin_high_grad(_branin_low_args(X)) * np.array([BRANIN_B, BRANIN_C])


def branin_grid(n: int = BRANIN_GRID) -> np.ndarray:
    g = np.linspace(0.0, 1.0, n)
    U, V = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([U.ravel(), V.ravel()])


def branin_design(seed: int, n_low: int = BRANIN_N_LOW, n_high: int = BRANIN_N_HIGH):
    """Nested design drawn without replacement from the 41 x 41 grid.

    The high-fidelity points are the first ``n_high`` of the low draw.
    """
    grid = branin_grid()
    rng = np.random.default_rng(seed)
    idx = rng.choice(grid.shape[0], size=n_low, replace=False)
    return grid[idx], grid[idx[:n_high]]


def branin_pair(seed: int = 0) -> tuple[FidelityPair, MultiFidelityData, np.ndarray]:
    pair = FidelityPair(branin_high, branin_low, branin_high_grad, branin_low_grad, 2)
    XL, XH = branin_design(seed)
    return pair, _pair_data(pair, XL, XH), branin_grid()


# --- damped oscillator ---------------------------------------------------------

OSC_ZETA = 1 / math.sqrt(37)
OSC_OMEGA0 = math.sqrt(37.0)
OSC_PHI = math.acos(OSC_ZETA)
OSC_T_HIGH = tuple(0.6 * j for j in range(6))
OSC_T_LOW = tuple(0.3 * j for j in range(11))


def oscillator_high(t):
    t = np.asarray(t, dtype=float)
    wd = math.sqrt(1 - OSC_ZETA**2) * OSC_OMEGA0
    return np.exp(-OSC_ZETA * OSC_OMEGA0 * t) * np.sin(wd * t + OSC_PHI) / math.sin(OSC_PHI)


def oscillator_high_grad(t):
    t = np.asarray(t, dtype=float)
    s = OSC_ZETA * OSC_OMEGA0
    wd = math.sqrt(1 - OSC_ZETA**2) * OSC_OMEGA0
    arg = wd * t + OSC_PHI
    return np.exp(-s * t) * (wd * np.cos(arg) - s * np.sin(arg)) / math.sin(OSC_PHI)


def oscillator_low(t):
    return np.cos(OSC_OMEGA0 * np.asarray(t, dtype=float))


def oscillator_low_grad(t):
    return -OSC_OMEGA0 * np.sin(OSC_OMEGA0 * np.asarray(t, dtype=float))


def oscillator_pair() -> tuple[FidelityPair, MultiFidelityData, np.ndarray]:
    """Underdamped unit-amplitude oscillator (high) against the undamped one (low).

    Gradients are velocities. Test grid: 301 points on [0, 3].
    """

    def lift(fun, grad=False):
        if grad:
            return lambda T: fun(_as_points(T, 1)[:, 0])[:, None]
        return lambda T: fun(_as_points(T, 1)[:, 0])

    pair = FidelityPair(
        lift(oscillator_high), lift(oscillator_low),
        lift(oscillator_high_grad, True), lift(oscillator_low_grad, True), 1,
    )
    return pair, _pair_data(pair, OSC_T_LOW, OSC_T_HIGH), np.linspace(0.0, 3.0, 301)


# --- tabulated data ------------------------------------------------------------

PROVIDED = "provided"
FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True)
class Table:
    """Parsed tabulated file: fidelity labels, locations, values, optional gradients."""

    fidelity: np.ndarray
    X: np.ndarray
    y: np.ndarray
    grads: np.ndarray | None

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def level(self, name: str) -> "Table":
        m = self.fidelity == name
        return Table(self.fidelity[m], self.X[m], self.y[m], None if self.grads is None else self.grads[m])


def parse_table(path) -> Table:
    """Read ``fidelity,x1..xd,y[,g1..gd]`` rows; ``#`` lines are comments."""
    path = Path(path)
    header = None
    fid, xs, ys, gs = [], [], [], []
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            cells = [c.strip() for c in next(csv.reader([text]))]
            if header is None:
                header = cells
                d, has_g = _check_header(header, lineno)
                continue
            if len(cells) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(cells)}", lineno)
            level = cells[0].lower()
            if level not in ("low", "high"):
                raise ParseError(f"fidelity must be 'low' or 'high', got {cells[0]!r}", lineno)
            try:
                nums = [float(c) for c in cells[1:]]
            except ValueError as exc:
                raise ParseError(f"non-numeric field ({exc})", lineno) from None
            if not all(math.isfinite(v) for v in nums):
                raise ParseError("non-finite number", lineno)
            fid.append(level)
            xs.append(nums[:d])
            ys.append(nums[d])
            if has_g:
                gs.append(nums[d + 1 :])
    if header is None:
        raise ParseError("file has no header row", 0)
    if not fid:
        raise ParseError("file has no data rows", 0)
    return Table(
        np.array(fid),
        np.array(xs, dtype=float).reshape(len(xs), d),
        np.array(ys, dtype=float),
        np.array(gs, dtype=float) if has_g else None,
    )


def _check_header(header: list[str], lineno: int) -> tuple[int, bool]:
    names = [h.lower() for h in header]
    if not names or names[0] != "fidelity":
        raise MissingColumns("first column must be 'fidelity'", lineno)
    if "y" not in names:
        raise MissingColumns("missing 'y' column", lineno)
    iy = names.index("y")
    d = iy - 1
    if d < 1:
        raise MissingColumns("at least one coordinate column (x1) is required", lineno)
    expect_x = [f"x{i + 1}" for i in range(d)]
    if names[1:iy] != expect_x:
        raise MissingColumns(f"coordinate columns must be {','.join(expect_x)}", lineno)
    rest = names[iy + 1 :]
    if rest and rest != [f"g{i + 1}" for i in range(d)]:
        raise MissingColumns(f"gradient columns must be g1..g{d} (one per coordinate)", lineno)
    return d, bool(rest)


def _fd_level(t: Table, h: float, design: np.ndarray | None, tol: float = 1e-9):
    """Design points of one level and their central-difference gradients."""
    X, y = t.X, t.y
    d = t.dim

    def lookup(x):
        hits = np.flatnonzero(np.all(np.abs(X - x) <= tol * max(1.0, np.max(np.abs(x))), axis=1))
        return hits[0] if hits.size else None

    candidates = design if design is not None else X
    pts, vals, grads = [], [], []
    for x in candidates:
        i0 = lookup(x)
        g = np.empty(d)
        ok = i0 is not None
        for k in range(d if ok else 0):
            e = np.zeros(d)
            e[k] = h
            ip, im = lookup(x + e), lookup(x - e)
            if ip is None or im is None:
                ok = False
                break
            g[k] = (y[ip] - y[im]) / (2 * h)
        if ok:
            pts.append(x)
            vals.append(y[i0])
            grads.append(g)
        elif design is not None:
            raise MissingColumns(
                f"no value rows at x and x +/- {h:g} for design point {np.asarray(x).tolist()}", 0
            )
    if not pts:
        raise MissingColumns(f"no rows have both x +/- {h:g} companions for finite differences", 0)
    return GradObservationSet(np.array(pts), np.array(vals), np.array(grads))


def load_tabulated(
    path,
    gradient_mode: str = PROVIDED,
    h: float | None = None,
    design_low=None,
    design_high=None,
    truth_path=None,
    name: str = "file",
) -> tuple[MultiFidelityData, BenchmarkCase | None]:
    """Load a two-fidelity dataset from a tabulated file.

    With ``gradient_mode="finite_difference"`` gradients are central
    differences with step ``h``. Design points are the given
    ``design_low``/``design_high`` locations, or otherwise every row that
    has both ``x - h`` and ``x + h`` companions in each coordinate.

    ``truth_path`` (same format, ``high`` rows with gradients, or value-only
    rows with finite-difference companions) adds a test grid and returns a
    ``BenchmarkCase`` alongside the data; otherwise the case is None.
    """
    table = parse_table(path)
    low_t, high_t = table.level("low"), table.level("high")
    if low_t.y.size == 0 or high_t.y.size == 0:
        raise MissingColumns("file needs both 'low' and 'high' rows", 0)
    if gradient_mode == PROVIDED:
        if table.grads is None:
            low = GradObservationSet(low_t.X, low_t.y)
            high = GradObservationSet(high_t.X, high_t.y)
        else:
            low = GradObservationSet(low_t.X, low_t.y, low_t.grads)
            high = GradObservationSet(high_t.X, high_t.y, high_t.grads)
    elif gradient_mode == FINITE_DIFFERENCE:
        if h is None or not h > 0:
            raise ValueError("finite_difference mode needs a positive step h")
        dl = None if design_low is None else _as_points(design_low, table.dim)
        dh = None if design_high is None else _as_points(design_high, table.dim)
        low = _fd_level(low_t, h, dl)
        high = _fd_level(high_t, h, dh)
    else:
        raise ValueError(f"unknown gradient_mode {gradient_mode!r}")

    try:
        data = MultiFidelityData(low, high)
    except NotNested as exc:
        raise NonNestedDesign(str(exc)) from None

    case = None
    if truth_path is not None:
        truth = parse_table(truth_path).level("high")
        if truth.grads is not None:
            tset = GradObservationSet(truth.X, truth.y, truth.grads)
        elif h is not None:
            tset = _fd_level(truth, h, None)
        else:
            raise MissingColumns("truth file needs gradient columns or a finite-difference step", 0)
        case = BenchmarkCase(
            name, data.dim, lambda seed, _d=data: _d, np.array(tset.X), np.array(tset.y), np.array(tset.grads)
        )
    return data, case


# --- bundled synthetic power-style dataset ----------------------------------------

POWER_X_LOW = tuple(20.0 + 2 * j for j in range(51))
POWER_X_HIGH = (40.0, 48.0, 72.0, 98.0, 116.0)
POWER_STEP = 0.25


def power_high(x):
    """Smooth synthetic stand-in for an AC power-flow sensitivity curve."""
    x = np.asarray(x, dtype=float)
    s = (x - 20.0) / 100.0
    return 1.0 + 0.8 * s + 0.35 * np.sin(5.0 * s + 0.3) + 0.25 * s**2 * np.cos(9.0 * s)


def power_low(x):
    """Linearized (DC-like) version of ``power_high`` with a systematic bias."""
    x = np.asarray(x, dtype=float)
    s = (x - 20.0) / 100.0
    return 0.9 + 0.7 * s + 0.3 * np.sin(5.0 * s + 0.2)


def write_power_dataset(design_path, truth_path, n_truth: int = 401):
    """Write the synthetic power-style design and truth files.

    The design holds value rows at each design point and its ``+/- 0.25``
    companions; gradients come from central differences when loaded.
    """
    rows = []
    for level, pts, f in (("low", POWER_X_LOW, power_low), ("high", POWER_X_HIGH, power_high)):
        for x in pts:
            for dx in (-POWER_STEP, 0.0, POWER_STEP):
                rows.append((level, x + dx, float(f(x + dx))))
    with open(design_path, "w", newline="") as fh:
        fh.write("# synthetic power-style dataset; step 0.25 companions for central differences\n")
        fh.write("fidelity,x1,y\n")
        for level, x, v in rows:
            fh.write(f"{level},{x!r},{v!r}\n")
    grid = np.linspace(20.0, 120.0, n_truth)
    with open(truth_path, "w", newline="") as fh:
        fh.write("# synthetic power-style truth on a dense grid with exact-by-construction gradients\n")
        fh.write("fidelity,x1,y,g1\n")
        for x in grid:
            g = (power_high(x + 1e-6) - power_high(x - 1e-6)) / 2e-6
            fh.write(f"high,{float(x)!r},{float(power_high(x))!r},{float(g)!r}\n")


def bundled_power_paths() -> tuple[Path, Path]:
    root = resources.files("mfgp") / "data"
    return Path(str(root / "power_design.csv")), Path(str(root / "power_truth.csv"))


def power_case() -> tuple[MultiFidelityData, BenchmarkCase]:
    design, truth = bundled_power_paths()
    return load_tabulated(
        design, FINITE_DIFFERENCE, h=POWER_STEP,
        design_low=POWER_X_LOW, design_high=POWER_X_HIGH, truth_path=truth, name="power",
    )


# --- metrics and harness --------------------------------------------------------------


def relative_mse(pred, truth) -> float:
    """Sum of squared errors over the sum of squared truth values."""
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError("pred and truth must be non-empty and of equal length")
    denom = float(np.sum(truth**2))
    if denom == 0.0:
        raise ZeroTruthNorm("truth is identically zero; relative MSE is undefined")
    return float(np.sum((pred - truth) ** 2)) / denom


def get_case(name: str) -> BenchmarkCase:
    if name in ("1d1", "1d2"):
        pair, design, grid = forrester_pair(int(name[-1]))
        return _analytic_case(name, pair, lambda seed, _d=design: _d, grid)
    if name == "branin":
        pair, _, grid = branin_pair(0)
        return _analytic_case(
            name, pair, lambda seed: _pair_data(pair, *branin_design(seed)), grid,
            notes=f"design sizes N_L={BRANIN_N_LOW}, N_H={BRANIN_N_HIGH} are an assumption",
        )
    if name == "oscillator":
        pair, design, grid = oscillator_pair()
        return _analytic_case(name, pair, lambda seed, _d=design: _d, grid)
    if name == "power":
        return power_case()[1]
    raise KeyError(f"unknown case {name!r}; expected one of {CASE_NAMES}")


@dataclass
class ModelReport:
    """Metrics of one model in one run.

    ``grad_rel_mse`` comes from the model itself for gradient-enhanced
    models and from per-component gradient baselines for Cokriging.
    """

    model: str
    qoi_rel_mse: float
    grad_rel_mse: list[float]
    train_seconds: float
    predict_seconds: float
    grad_train_seconds: float = 0.0
    grad_predict_seconds: float = 0.0
    jitter_used: float = 0.0
    lml: float = float("nan")


@dataclass
class RunReport:
    case: str
    run: int
    seed: int
    models: dict[str, ModelReport] = field(default_factory=dict)


def _grad_source(model: str) -> str:
    return "baseline" if model in (KRIGING, COKRIGING) else "model"


def _run_model(model, data, case: BenchmarkCase, cfg: TrainConfig) -> ModelReport:
    t0 = time.perf_counter()
    s = train(model, data, cfg)
    t1 = time.perf_counter()
    p = predict(s, case.test_grid)
    t2 = time.perf_counter()
    qoi = relative_mse(p.mean, case.truth_values)
    rep = ModelReport(model, qoi, [], t1 - t0, t2 - t1, jitter_used=s.jitter_used, lml=s.lml)
    if model in (GEKRIGING, GECOKRIGING):
        rep.grad_rel_mse = [relative_mse(p.grad_mean[:, i], case.truth_grads[:, i]) for i in range(case.dim)]
        # gradients come out of the same solve as the QoI
        rep.grad_predict_seconds = rep.predict_seconds
    elif model == COKRIGING and data.has_grads:
        for i in range(case.dim):
            t0 = time.perf_counter()
            b = train_cokriging_gradient_baseline(data, i, cfg)
            t1 = time.perf_counter()
            pb = predict(b, case.test_grid)
            t2 = time.perf_counter()
            rep.grad_rel_mse.append(relative_mse(pb.mean, case.truth_grads[:, i]))
            rep.grad_train_seconds += t1 - t0
            rep.grad_predict_seconds += t2 - t1
    else:
        # value-only Kriging: differentiate the posterior mean
        rep.grad_rel_mse = [relative_mse(p.grad_mean[:, i], case.truth_grads[:, i]) for i in range(case.dim)]
    return rep


def run_case(
    case: BenchmarkCase | str,
    models: Sequence[str] = (COKRIGING, GEKRIGING, GECOKRIGING),
    runs: int = 5,
    seed: int = 0,
    cfg: TrainConfig | None = None,
    parallel_runs: int = 1,
) -> list[RunReport]:
    """Train and score each model over ``runs`` seeded repetitions.

    Run ``r`` uses the GA seed ``derive_seed(seed, r, model)``. Single-
    fidelity models see only the high-fidelity data.
    """
    if isinstance(case, str):
        case = get_case(case)
    if runs < 1:
        raise ValueError("runs must be at least 1")
    for m in models:
        if m not in MODEL_KINDS:
            raise ValueError(f"unknown model {m!r}; expected one of {MODEL_KINDS}")
    cfg = cfg or TrainConfig()

    def one(r: int) -> RunReport:
        run_seed = derive_seed(seed, r)
        data = case.design(run_seed)
        rep = RunReport(case.name, r, run_seed)
        for m in models:
            try:
                rep.models[m] = _run_model(m, data, case, cfg.with_seed(derive_seed(seed, r, m)))
            except (NotPositiveDefinite, AllCandidatesFailed, InconsistentVariance) as exc:
                raise TrainingFailed(m, exc, getattr(exc, "jitter_tried", None)) from exc
        return rep

    if parallel_runs > 1:
        with ThreadPoolExecutor(parallel_runs) as ex:
            return list(ex.map(one, range(runs)))
    return [one(r) for r in range(runs)]


def design_is_nested(data: MultiFidelityData) -> bool:
    try:
        nesting_map(data.low.X, data.high.X)
    except NotNested:
        return False
    return True
