"""Censored maximum likelihood for extended Poisson family models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import linalg, optimize
from scipy.special import ndtri

from . import numdiff
from .baselines import ModelFamily, get_family
from .family import LAMBDA_THRESHOLD, DomainError

__all__ = [
    "CensoredSample",
    "FitConfig",
    "FitResult",
    "fit_mle",
    "information_criteria",
    "invert_information",
    "log_likelihood",
    "observed_information",
    "standard_errors_ci",
]


@dataclass(frozen=True)
class CensoredSample:
    """Right-censored lifetimes; ``events[i]`` is True when ``times[i]`` is a failure."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        events = np.asarray(self.events).ravel()
        if times.shape != events.shape:
            raise ValueError("times and events must have the same length")
        if not np.all(np.isin(events, (0, 1))):
            raise ValueError("event indicators must be 0/1 or boolean")
        if not np.all(np.isfinite(times)) or np.any(times < 0):
            raise ValueError("times must be finite and nonnegative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events.astype(bool))
        object.__setattr__(self, "_split", (times[self.events], times[~self.events]))

    @classmethod
    def from_records(cls, records: Iterable[tuple[float, bool | int]]) -> CensoredSample:
        records = list(records)
        if not records:
            return cls(np.empty(0), np.empty(0, dtype=bool))
        t, d = zip(*records)
        return cls(np.array(t, dtype=float), np.array(d, dtype=int))

    @classmethod
    def complete(cls, times) -> CensoredSample:
        times = np.asarray(times, dtype=float)
        return cls(times, np.ones(times.shape, dtype=bool))

    def __len__(self) -> int:
        return self.times.size

    @property
    def n_events(self) -> int:
        return int(self.events.sum())

    @property
    def n_censored(self) -> int:
        return len(self) - self.n_events


@dataclass(frozen=True)
class FitConfig:
    """Optimiser settings.

    ``tolerance`` is the simplex convergence tolerance on both the
    (transformed) parameters and the objective. The simplex only needs to
    land in the right basin; the BFGS polish finishes the convergence.
    """

    starts: int = 8
    max_iterations: int = 5000
    tolerance: float = 1e-5
    ci_level: float = 0.95
    hessian_step: float = numdiff.HESS_STEP

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 <= self.ci_level < 1:
            raise ValueError("ci_level must lie in [0, 1)")


@dataclass
class FitResult:
    family: str
    param_names: tuple[str, ...]
    estimates: np.ndarray
    loglik: float
    varcov: np.ndarray | None
    se: np.ndarray | None
    ci: np.ndarray | None
    ci_level: float
    aic: float
    aicc: float | None
    converged: bool
    identifiable: bool
    n_used: int
    iterations: int
    grad_norm: float = math.nan
    message: str = ""
    starts: list = field(default_factory=list, repr=False)

    @property
    def k(self) -> int:
        return len(self.param_names)

    @property
    def baseline_limit(self) -> bool:
        """True when the fitted shape sits inside the baseline-limit band."""
        return abs(self.estimates[0]) < LAMBDA_THRESHOLD

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.param_names, map(float, self.estimates)))


def log_likelihood(family: str | ModelFamily, params, data: CensoredSample) -> float:
    """Censored log-likelihood ``sum(d log g + (1 - d) log Gbar)``.

    For the compound family this is algebraically
    ``n log c(lam) + sum(d log f) + sum((1 - d) log((1 - exp(-lam Fbar)) / lam))
    - lam sum(d Fbar)``, and the survival term is evaluated through the same
    branchwise log so it never takes the log of a negative value.

    Parameters outside their domain give ``-inf``. A wrong number of
    parameters raises ``ValueError``.
    """
    fam = get_family(family)
    params = np.asarray(params, dtype=float)
    if params.shape != (fam.k,):
        raise ValueError(f"{fam.name} takes {fam.k} parameters, got {params.size}")
    try:
        model = fam.build(*params)
    except DomainError:
        return -math.inf
    t_event, t_cens = data._split
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        total = model._logpdf(t_event).sum() + model._logsf(t_cens).sum()
    return float(total) if np.isfinite(total) else -math.inf


def information_criteria(loglik: float, k: int, n: int) -> tuple[float, float | None]:
    """Return ``(AIC, AICc)``; AICc is None when ``n <= k + 1``."""
    aic = -2.0 * loglik + 2.0 * k
    if n <= k + 1:
        return aic, None
    return aic, aic + 2.0 * k * (k + 1) / (n - k - 1)


def observed_information(
    family: str | ModelFamily, params, data: CensoredSample, step: float = numdiff.HESS_STEP
) -> np.ndarray:
    """Negative central-difference Hessian of the log-likelihood.

    Evaluated in the original parameterisation with relative steps.

    Raises
    ------
    numdiff.NonFiniteStencil
        When the stencil leaves the parameter domain or the data support;
        the exception names the coordinate.
    """
    fam = get_family(family)
    x = np.asarray(params, dtype=float)

    def ll(p):
        return log_likelihood(fam, p, data)

    return -numdiff.hessian(ll, x, numdiff.relative_steps(x, step))


#: Smallest eigenvalue of the unit-diagonal information treated as nonzero.
#: Finite-difference Hessians carry relative error near 1e-8, so an exactly
#: singular matrix can come out barely positive definite.
SINGULAR_TOL = 1e-6


def invert_information(info: np.ndarray) -> np.ndarray | None:
    """Variance-covariance matrix, or None when ``info`` is not positive definite.

    The test is scale-free: ``info`` is rescaled to unit diagonal and judged
    singular when its smallest eigenvalue is below ``SINGULAR_TOL``.
    """
    info = np.asarray(info, dtype=float)
    if not np.all(np.isfinite(info)):
        return None
    d = np.diag(info)
    if np.any(d <= 0):
        return None
    s = 1.0 / np.sqrt(d)
    if np.linalg.eigvalsh(info * np.outer(s, s))[0] < SINGULAR_TOL:
        return None
    # the eigenvalue gate above guarantees the Cholesky factor exists
    cf = linalg.cho_factor(info)
    V = linalg.cho_solve(cf, np.eye(info.shape[0]))
    V = (V + V.T) / 2
    if not np.all(np.isfinite(V)) or np.any(np.diag(V) <= 0):
        return None
    return V


def standard_errors_ci(fit: FitResult, level: float | None = None):
    """Wald standard errors and ``level`` confidence intervals.

    Returns ``(se, ci)`` with ``ci`` of shape ``(k, 2)``, or ``(None, None)``
    for a fit flagged as non-identifiable.
    """
    level = fit.ci_level if level is None else level
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    if fit.varcov is None:
        return None, None
    se = np.sqrt(np.diag(fit.varcov))
    z = float(ndtri(0.5 + level / 2))
    ci = np.column_stack([fit.estimates - z * se, fit.estimates + z * se])
    return se, ci


class _Transform:
    def __init__(self, positive):
        self.positive = np.asarray(positive, dtype=bool)

    def to_free(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.positive, np.log(np.where(self.positive, x, 1.0)), x)

    def from_free(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore"):
            return np.where(self.positive, np.exp(u), u)


def fit_mle(
    family: str | ModelFamily,
    data: CensoredSample,
    config: FitConfig | None = None,
    starts=None,
) -> FitResult:
    """Maximum likelihood fit from multiple starts.

    Each start runs a Nelder-Mead simplex on the unconstrained scale (log for
    positive parameters); the best simplex optimum is polished by BFGS with
    central-difference gradients. Ties between starts go to the lower start
    index.

    Parameters
    ----------
    family : str or ModelFamily
        ``eep``, ``ewp``, ``ge2p``, ``egevp`` or a custom family.
    data : CensoredSample
    config : FitConfig, optional
    starts : sequence of parameter vectors, optional
        Overrides the family's default start points.

    Raises
    ------
    ValueError
        If the data has fewer than ``k + 1`` events.
    """
    fam = get_family(family)
    config = config or FitConfig()
    if data.n_events == 0:
        raise ValueError("cannot fit: every record is censored")
    if data.n_events < fam.k + 1:
        raise ValueError(f"{fam.name} needs at least {fam.k + 1} events, got {data.n_events}")

    tr = _Transform(fam.positive)

    def objective(u):
        v = -log_likelihood(fam, tr.from_free(u), data)
        return v if np.isfinite(v) else math.inf

    if starts is None:
        starts = fam.start_points(data.times, data.events)[: config.starts]
    iterations = 0
    runs = []
    for x0 in starts:
        u0 = tr.to_free(x0)
        if not np.isfinite(objective(u0)):
            runs.append((math.inf, u0, False))
            continue
        res = optimize.minimize(
            objective,
            u0,
            method="Nelder-Mead",
            options={
                "xatol": config.tolerance,
                "fatol": config.tolerance,
                "maxiter": config.max_iterations,
                "maxfev": 2 * config.max_iterations,
                "adaptive": fam.k > 2,
            },
        )
        iterations += int(res.nit)
        runs.append((float(res.fun), res.x, bool(res.success)))

    best = min(range(len(runs)), key=lambda i: (runs[i][0], i))
    fun, u_best, simplex_ok = runs[best]
    if not np.isfinite(fun):
        raise RuntimeError(f"no start point gave a finite {fam.name} likelihood")

    def jac(u):
        return numdiff.gradient(objective, u)

    polish = optimize.minimize(
        objective, u_best, jac=jac, method="BFGS",
        options={"gtol": 1e-8, "maxiter": config.max_iterations},
    )
    iterations += int(polish.nit)
    if np.isfinite(polish.fun) and polish.fun <= fun:
        fun, u_best = float(polish.fun), polish.x

    estimates = tr.from_free(u_best)
    loglik = -fun
    g = jac(u_best)
    grad_norm = float(np.linalg.norm(g)) if np.all(np.isfinite(g)) else math.inf
    converged = bool(simplex_ok or polish.success) and grad_norm < 1e-4 * (1 + abs(loglik))

    message = ""
    try:
        info = observed_information(fam, estimates, data, config.hessian_step)
        varcov = invert_information(info)
        if varcov is None:
            message = "observed information not positive definite: non-identifiable/unstable"
    except numdiff.NonFiniteStencil as exc:
        varcov = None
        message = (
            f"likelihood not finite near the optimum in {fam.param_names[exc.index]}: "
            "non-identifiable/unstable"
        )

    aic, aicc = information_criteria(loglik, fam.k, len(data))
    fit = FitResult(
        family=fam.name,
        param_names=fam.param_names,
        estimates=estimates,
        loglik=loglik,
        varcov=varcov,
        se=None,
        ci=None,
        ci_level=config.ci_level,
        aic=aic,
        aicc=aicc,
        converged=converged,
        identifiable=varcov is not None,
        n_used=len(data),
        iterations=iterations,
        grad_norm=grad_norm,
        message=message,
        starts=[tr.from_free(r[1]) for r in runs],
    )
    fit.se, fit.ci = standard_errors_ci(fit)
    return fit
