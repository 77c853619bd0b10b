"""Monte Carlo study of the maximum likelihood estimators under censoring.

Each replication draws lifetimes ``T`` from the true model and censoring
times ``C ~ Uniform(0, c)``, records ``(min(T, C), T <= C)``, fits the model
and checks whether the Wald interval covers the truth. The bound ``c`` is
calibrated so the expected censored fraction hits the requested target.

Random streams come from ``SeedSequence(seed, spawn_key=...)`` keyed by the
replication index, so results do not depend on how replications are
scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .baselines import get_family
from .family import Distribution
from .inference import CensoredSample, FitConfig, FitResult, fit_mle

__all__ = [
    "SimScenario",
    "SimSummary",
    "calibrate_censoring",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
    "simulate_sample",
]

PILOT_DRAWS = 100_000
UNRELIABLE_FAILURE_RATE = 0.2
_MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class SimScenario:
    family: str
    true_params: tuple[float, ...]
    n: int
    censor_fraction: float
    replications: int
    seed: int
    fit_config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        fam = get_family(self.family)
        object.__setattr__(self, "family", fam.name)
        object.__setattr__(self, "true_params", tuple(float(v) for v in self.true_params))
        if len(self.true_params) != fam.k:
            raise ValueError(f"{fam.name} takes {fam.k} parameters")
        fam.build(*self.true_params)
        if not 0 <= self.censor_fraction < 1:
            raise ValueError("censor_fraction must lie in [0, 1)")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.n < 1:
            raise ValueError("sample size must be at least 1")


@dataclass
class SimSummary:
    scenario: SimScenario
    param_names: tuple[str, ...]
    bias: np.ndarray
    mse: np.ndarray
    coverage: np.ndarray
    n_used: int
    n_failed: int
    censor_bound: float
    realized_censoring: float

    @property
    def unreliable(self) -> bool:
        return self.n_failed > UNRELIABLE_FAILURE_RATE * self.scenario.replications

    def to_rows(self) -> list[dict]:
        sc = self.scenario
        return [
            {
                "model": sc.family,
                "n": sc.n,
                "censoring": sc.censor_fraction,
                "replications": sc.replications,
                "seed": sc.seed,
                "parameter": name,
                "true": sc.true_params[i],
                "bias": float(self.bias[i]),
                "mse": float(self.mse[i]),
                "cp": float(self.coverage[i]),
                "realized_censoring": self.realized_censoring,
                "censor_bound": self.censor_bound,
                "n_used": self.n_used,
                "n_failed": self.n_failed,
                "unreliable": self.unreliable,
            }
            for i, name in enumerate(self.param_names)
        ]


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def calibrate_censoring(
    model: Distribution, target: float, seed: int = 0, draws: int = PILOT_DRAWS
) -> float:
    """Upper bound ``c`` with ``P(T > C) = target`` for ``C ~ Uniform(0, c)``.

    Bisection on a pilot Monte Carlo estimate that reuses the same draws at
    every step, so the estimate is monotone in ``c``.

    Raises
    ------
    ValueError
        If ``target`` is outside (0, 1) or cannot be reached.
    """
    if not 0 < target < 1:
        raise ValueError("target censoring fraction must lie in (0, 1)")
    rng = _stream(seed, 0)
    t = model.rvs(draws, seed=rng)
    u = rng.random(draws)

    def frac(c):
        return float(np.mean(t > c * u))

    if frac(0.0) < target:
        raise ValueError(
            f"censoring fraction {target} unreachable: only {frac(0.0):.4f} of "
            "lifetimes are positive"
        )
    lo = 0.0
    hi = float(np.median(np.abs(t))) or 1.0
    for _ in range(_MAX_DOUBLINGS):
        if frac(hi) <= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ValueError(f"censoring fraction {target} unreachable below c = {hi:g}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if frac(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def simulate_sample(
    model: Distribution, n: int, censor_bound: float, rng: np.random.Generator
) -> CensoredSample:
    """One censored sample; ``censor_bound = inf`` means no censoring."""
    t = model.rvs(n, seed=rng)
    if math.isinf(censor_bound):
        return CensoredSample(t, np.ones(n, dtype=bool))
    c = censor_bound * rng.random(n)
    return CensoredSample(np.minimum(t, c), t <= c)


def _replicate(scenario: SimScenario, censor_bound: float, j: int, fitter=None):
    fam = get_family(scenario.family)
    model = fam.build(*scenario.true_params)
    data = simulate_sample(model, scenario.n, censor_bound, _stream(scenario.seed, 1, j))
    cens = data.n_censored / len(data)
    try:
        fit = fitter(data) if fitter else fit_mle(fam, data, scenario.fit_config)
    except (ValueError, RuntimeError, FloatingPointError):
        return None, cens
    if not fit.converged or fit.ci is None:
        return None, cens
    return (np.asarray(fit.estimates, dtype=float), np.asarray(fit.ci, dtype=float)), cens


def _replicate_chunk(args):
    scenario, censor_bound, indices = args
    return [_replicate(scenario, censor_bound, j) for j in indices]


def _worker_count(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("EPFAMILY_THREADS", "0") or 0)
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def run_scenario(
    scenario: SimScenario,
    fitter: Callable[[CensoredSample], FitResult] | None = None,
    workers: int | None = None,
) -> SimSummary:
    """Run every replication and aggregate bias, MSE and coverage.

    Replications whose fit fails, does not converge or yields no interval
    are dropped from the aggregates and counted in ``n_failed``.

    Parameters
    ----------
    scenario : SimScenario
    fitter : callable, optional
        Replacement estimator, mainly for harness checks. Forces serial runs.
    workers : int, optional
        Process count; defaults to ``EPFAMILY_THREADS`` (0 = all cores).
    """
    fam = get_family(scenario.family)
    model = fam.build(*scenario.true_params)
    if scenario.censor_fraction == 0:
        bound = math.inf
    else:
        bound = calibrate_censoring(model, scenario.censor_fraction, scenario.seed)

    reps = range(scenario.replications)
    workers = 1 if fitter is not None else min(_worker_count(workers), scenario.replications)
    if workers == 1:
        results = [_replicate(scenario, bound, j, fitter) for j in reps]
    else:
        chunks = [list(reps[w::workers]) for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_replicate_chunk, [(scenario, bound, c) for c in chunks]))
        results = [None] * scenario.replications
        for chunk, part in zip(chunks, parts):
            for j, r in zip(chunk, part):
                results[j] = r

    truth = np.asarray(scenario.true_params)
    ok = [r for r, _ in results if r is not None]
    censoring = float(np.mean([c for _, c in results]))
    k = fam.k
    if ok:
        est = np.array([e for e, _ in ok])
        ci = np.array([c for _, c in ok])
        err = est - truth
        bias = err.mean(axis=0)
        mse = (err**2).mean(axis=0)
        coverage = ((ci[:, :, 0] <= truth) & (truth <= ci[:, :, 1])).mean(axis=0)
    else:
        bias = mse = coverage = np.full(k, np.nan)
    return SimSummary(
        scenario=scenario,
        param_names=fam.param_names,
        bias=bias,
        mse=mse,
        coverage=coverage,
        n_used=len(ok),
        n_failed=scenario.replications - len(ok),
        censor_bound=bound,
        realized_censoring=censoring,
    )


_KEYS = {"model", "params", "n", "censoring", "replications", "seed", "starts", "level"}


def parse_scenario(text: str) -> SimScenario:
    """Parse the flat ``key = value`` scenario format.

    Keys: ``model``, ``params`` (comma separated), ``n``, ``censoring``,
    ``replications``, ``seed`` and optionally ``starts`` and ``level``.
    ``#`` starts a comment; ``:`` is accepted in place of ``=``.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split(sep, 1))
        key = key.lower()
        if key not in _KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    missing = {"model", "params", "n", "censoring", "replications", "seed"} - values.keys()
    if missing:
        raise ValueError(f"scenario missing keys: {', '.join(sorted(missing))}")
    config = FitConfig(
        starts=int(values.get("starts", FitConfig.starts)),
        ci_level=float(values.get("level", FitConfig.ci_level)),
    )
    return SimScenario(
        family=values["model"],
        true_params=tuple(float(v) for v in values["params"].replace(",", " ").split()),
        n=int(values["n"]),
        censor_fraction=float(values["censoring"]),
        replications=int(values["replications"]),
        seed=int(values["seed"]),
        fit_config=config,
    )


def load_scenario(path) -> SimScenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
