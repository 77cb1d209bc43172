"""Seedable genetic algorithm for maximizing black-box likelihoods.

The GA works in *search coordinates*: log10 for parameters tagged
``"log10"`` (correlation lengths) and the raw value for ``"linear"``
parameters (the regression scalar rho). The objective always receives
natural-scale parameters.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import AllCandidatesFailed, NotPositiveDefinite

LOG10 = "log10"
LINEAR = "linear"


@dataclass(frozen=True)
class SearchBox:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    scales: tuple[str, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        scales = tuple(self.scales)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "scales", scales)
        if not (len(lo) == len(hi) == len(scales)) or len(lo) == 0:
            raise ValueError("lower, upper and scales must be non-empty and of equal length")
        for a, b, s in zip(lo, hi, scales):
            if s not in (LOG10, LINEAR):
                raise ValueError(f"unknown scale tag {s!r}")
            if not a < b:
                raise ValueError(f"empty interval [{a}, {b}]")
            if s == LOG10 and a <= 0:
                raise ValueError("log10-scaled parameters need a positive lower bound")

    def __len__(self):
        return len(self.lower)

    def __add__(self, other: "SearchBox") -> "SearchBox":
        return SearchBox(self.lower + other.lower, self.upper + other.upper, self.scales + other.scales)

    @property
    def _log_mask(self) -> np.ndarray:
        return np.array([s == LOG10 for s in self.scales])

    def search_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.to_search(self.lower), self.to_search(self.upper)

    def to_search(self, params) -> np.ndarray:
        p = np.array(params, dtype=float)
        m = self._log_mask
        p[..., m] = np.log10(p[..., m])
        return p

    def from_search(self, z) -> np.ndarray:
        p = np.array(z, dtype=float)
        m = self._log_mask
        p[..., m] = 10.0 ** p[..., m]
        # guard against round-off pushing a value just outside the box
        return np.clip(p, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform samples in search coordinates, returned on the natural scale."""
        lo, hi = self.search_bounds()
        return self.from_search(lo + rng.random((n, len(self))) * (hi - lo))


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    generations: int = 100
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    elitism_count: int = 2
    seed: int = 0
    local_polish: bool = True
    tournament_size: int = 3
    blend_alpha: float = 0.5
    mutation_scale: float = 0.1
    polish_iterations: int = 20

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be positive")
        if not 0 <= self.crossover_rate <= 1 or not 0 <= self.mutation_rate <= 1:
            raise ValueError("crossover_rate and mutation_rate must lie in [0, 1]")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be non-negative and below population_size")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")


class OptimizeResult(NamedTuple):
    best_params: np.ndarray
    best_value: float
    trace: tuple[float, ...]


def resolve_workers(workers: int | None = None) -> int:
    """Worker count from the argument, else ``MFGP_THREADS`` (0/unset = auto)."""
    if workers is None:
        raw = os.environ.get("MFGP_THREADS", "").strip()
        workers = int(raw) if raw else 0
    if workers <= 0:
        workers = os.cpu_count() or 1
    return max(1, int(workers))


def _safe(objective: Callable[[np.ndarray], float]):
    def wrapped(p):
        try:
            v = objective(p)
        except (NotPositiveDefinite, FloatingPointError, np.linalg.LinAlgError):
            return -math.inf
        if v is None:
            return -math.inf
        v = float(v)
        return v if math.isfinite(v) else -math.inf

    return wrapped


def maximize(
    objective: Callable[[np.ndarray], float],
    box: SearchBox,
    cfg: GAConfig = GAConfig(),
    workers: int | None = None,
) -> OptimizeResult:
    """Maximize ``objective`` over ``box``.

    Failed evaluations (factorization errors, non-finite values, ``None``)
    score ``-inf``. Candidates are evaluated in index order and results
    are reduced in index order, so the answer is independent of
    ``workers``.
    """
    f = _safe(objective)
    n_workers = resolve_workers(workers)
    rng = np.random.default_rng(cfg.seed)
    lo, hi = box.search_bounds()
    width = hi - lo
    npar = len(box)

    pool = ThreadPoolExecutor(n_workers) if n_workers > 1 else None

    def evaluate(Z: np.ndarray) -> np.ndarray:
        P = box.from_search(Z)
        if pool is None:
            return np.array([f(p) for p in P])
        return np.array(list(pool.map(f, P)))

    try:
        pop = lo + rng.random((cfg.population_size, npar)) * width
        fit = evaluate(pop)
        if not np.any(np.isfinite(fit)):
            raise AllCandidatesFailed("every candidate in the initial population failed to evaluate")

        i0 = int(np.argmax(fit))
        best_z, best_v = pop[i0].copy(), float(fit[i0])
        trace = [best_v]

        def tournament() -> np.ndarray:
            idx = rng.integers(0, cfg.population_size, size=cfg.tournament_size)
            return pop[idx[np.argmax(fit[idx])]]

        n_children = cfg.population_size - cfg.elitism_count
        for _ in range(cfg.generations):
            order = np.argsort(-fit, kind="stable")
            elite = order[: cfg.elitism_count]
            children = []
            while len(children) < n_children:
                a, b = tournament(), tournament()
                if rng.random() < cfg.crossover_rate:
                    # BLX-alpha: uniform on the parents' interval widened by alpha each side
                    cmin, cmax = np.minimum(a, b), np.maximum(a, b)
                    span = cmax - cmin
                    u = rng.random((2, npar))
                    kids = cmin - cfg.blend_alpha * span + u * (1 + 2 * cfg.blend_alpha) * span
                else:
                    kids = np.stack([a, b])
                mask = rng.random(kids.shape) < cfg.mutation_rate
                kids = kids + mask * rng.normal(0.0, cfg.mutation_scale, kids.shape) * width
                children.extend(np.clip(kids, lo, hi))
            children = np.asarray(children[:n_children])
            child_fit = evaluate(children) if n_children else np.empty(0)
            pop = np.vstack([pop[elite], children])
            fit = np.concatenate([fit[elite], child_fit])
            i = int(np.argmax(fit))
            if fit[i] > best_v:
                best_z, best_v = pop[i].copy(), float(fit[i])
            trace.append(best_v)

        if cfg.local_polish:
            best_z, best_v = _coordinate_polish(f, box, best_z, best_v, width, lo, hi, cfg.polish_iterations)
            trace[-1] = max(trace[-1], best_v)
    finally:
        if pool is not None:
            pool.shutdown()

    return OptimizeResult(box.from_search(best_z), best_v, tuple(trace))


def _coordinate_polish(f, box, z, v, width, lo, hi, iterations):
    """Derivative-free compass search; the step halves after an unproductive sweep."""
    step = 0.1 * width
    for _ in range(iterations):
        improved = False
        for j in range(len(z)):
            for sign in (1.0, -1.0):
                cand = z.copy()
                cand[j] = min(max(cand[j] + sign * step[j], lo[j]), hi[j])
                if cand[j] == z[j]:
                    continue
                cv = f(box.from_search(cand))
                if cv > v:
                    z, v, improved = cand, cv, True
                    break
        if not improved:
            step = step * 0.5
    return z, v


def random_search_values(objective, box: SearchBox, n: int, seed: int) -> np.ndarray:
    """Objective values at ``n`` uniform box samples; an optimizer sanity oracle."""
    f = _safe(objective)
    rng = np.random.default_rng(seed)
    return np.array([f(p) for p in box.sample(rng, n)])


def derive_seed(seed: int, *keys: int | str) -> int:
    """Independent 63-bit seed for a named sub-stream of ``seed``."""
    ints: list[int] = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for k in keys:
        if isinstance(k, str):
            ints.extend(k.encode())
        else:
            ints.append(int(k))
    state = np.random.SeedSequence(ints).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))

