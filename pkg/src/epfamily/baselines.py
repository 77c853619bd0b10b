"""Baseline lifetime distributions and the four named compound models.

Named models, with parameter vectors ordered shape first:

=========  ===============================  ==========================
id         construction                     parameters
=========  ===============================  ==========================
``eep``    EP(exponential)                  lambda, beta
``ewp``    EP(Weibull)                      lambda, beta, alpha
``ge2p``   Exponentiated(EP(exponential))   lambda, beta, alpha
``egevp``  EP(GEV)                          lambda, mu, sigma, xi
=========  ===============================  ==========================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import xlogy

from .family import DomainError, Distribution, EPFamily

__all__ = [
    "Exponential",
    "Weibull",
    "GEV",
    "Exponentiated",
    "ModelFamily",
    "FAMILIES",
    "get_family",
    "eep",
    "ewp",
    "ge2p",
    "egevp",
]

GEV_XI_THRESHOLD = 1e-7


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive and finite, got {value}")
    return value


def _log1mexp(x):
    """``log(1 - exp(x))`` for ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > -math.log(2), np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


class Weibull(Distribution):
    """Weibull with cdf ``1 - exp(-beta * t**alpha)`` on ``t >= 0``.

    ``beta`` is a rate-like scale in units of time**(-alpha).
    """

    param_names = ("beta", "alpha")

    def __init__(self, beta: float, alpha: float):
        self.beta = _positive("beta", beta)
        self.alpha = _positive("alpha", alpha)

    @property
    def params(self):
        return (self.beta, self.alpha)

    @property
    def support(self):
        return (0.0, math.inf)

    def _chf(self, t):
        tp = np.maximum(t, 0.0)
        return self.beta * tp**self.alpha

    def _logpdf(self, t):
        with np.errstate(divide="ignore"):
            out = (
                math.log(self.alpha * self.beta)
                + xlogy(self.alpha - 1.0, np.maximum(t, 0.0))
                - self._chf(t)
            )
        return np.where(t < 0, -np.inf, out)

    def _logsf(self, t):
        return -self._chf(t)

    def _logcdf(self, t):
        return _log1mexp(-self._chf(t))

    def _ppf(self, p):
        with np.errstate(divide="ignore"):
            return (-np.log1p(-p) / self.beta) ** (1.0 / self.alpha)

    def _isf(self, s):
        with np.errstate(divide="ignore"):
            return (-np.log(s) / self.beta) ** (1.0 / self.alpha)


class Exponential(Weibull):
    """Exponential with rate ``beta``; the ``alpha = 1`` Weibull."""

    param_names = ("beta",)

    def __init__(self, beta: float):
        super().__init__(beta, 1.0)

    @property
    def params(self):
        return (self.beta,)

    def _logpdf(self, t):
        return np.where(t < 0, -np.inf, math.log(self.beta) - self.beta * t)

    def _ppf(self, p):
        with np.errstate(divide="ignore"):
            return -np.log1p(-p) / self.beta

    def _isf(self, s):
        with np.errstate(divide="ignore"):
            return -np.log(s) / self.beta


class GEV(Distribution):
    """Generalised extreme value distribution.

    ``F(t) = exp(-r(t))`` with ``r(t) = [1 + xi (t - mu) / sigma]_+ ** (-1/xi)``,
    or ``exp(-(t - mu) / sigma)`` for ``xi = 0``. Shapes with
    ``|xi| < 1e-7`` use the Gumbel branch.
    """

    param_names = ("mu", "sigma", "xi")

    def __init__(self, mu: float, sigma: float, xi: float):
        self.mu = float(mu)
        self.sigma = _positive("sigma", sigma)
        self.xi = float(xi)
        if not (math.isfinite(self.mu) and math.isfinite(self.xi)):
            raise DomainError("mu and xi must be finite")
        self._gumbel = abs(self.xi) < GEV_XI_THRESHOLD

    @property
    def params(self):
        return (self.mu, self.sigma, self.xi)

    @property
    def support(self):
        if self._gumbel:
            return (-math.inf, math.inf)
        edge = self.mu - self.sigma / self.xi
        return (edge, math.inf) if self.xi > 0 else (-math.inf, edge)

    def _log_r(self, t):
        """``log r(t)``; +inf below a lower edge, -inf above an upper edge."""
        z = (t - self.mu) / self.sigma
        if self._gumbel:
            return -z
        s = self.xi * z
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = s > -1.0
            out = -np.log1p(np.where(inside, s, 0.0)) / self.xi
        return np.where(inside, out, np.inf if self.xi > 0 else -np.inf)

    def _logpdf(self, t):
        log_r = self._log_r(t)
        r = np.exp(log_r)
        with np.errstate(invalid="ignore"):
            out = -math.log(self.sigma) + (self.xi + 1.0) * log_r - r
        return np.where(np.isfinite(log_r), out, -np.inf)

    def _logcdf(self, t):
        return -np.exp(self._log_r(t))

    def _logsf(self, t):
        return _log1mexp(-np.exp(self._log_r(t)))

    def _ppf(self, p):
        with np.errstate(divide="ignore"):
            return self._from_y(-np.log(p))

    def _isf(self, s):
        with np.errstate(divide="ignore"):
            return self._from_y(-np.log1p(-s))

    def _from_y(self, y):
        # y = -log F; inverts r(t) = y
        with np.errstate(divide="ignore", invalid="ignore"):
            log_y = np.log(y)
            if self._gumbel:
                return self.mu - self.sigma * log_y
            return self.mu + self.sigma * np.expm1(-self.xi * log_y) / self.xi


class Exponentiated(Distribution):
    """Power (Lehmann) transform: cdf ``G(t) ** alpha`` of an inner model."""

    def __init__(self, inner: Distribution, alpha: float):
        self.inner = inner
        self.alpha = _positive("alpha", alpha)

    @property
    def param_names(self):
        return self.inner.param_names + ("alpha",)

    @property
    def params(self):
        return self.inner.params + (self.alpha,)

    @property
    def support(self):
        return self.inner.support

    def _inner_logcdf(self, t):
        logG = self.inner._logcdf(t)
        upper = logG > -math.log(2)
        if np.any(upper):
            # log1p(-sf) keeps precision when G is close to one
            with np.errstate(divide="ignore", invalid="ignore"):
                logG = np.where(upper, np.log1p(-self.inner._sf(t)), logG)
        return logG

    def _logcdf(self, t):
        return self.alpha * self._inner_logcdf(t)

    def _logsf(self, t):
        return _log1mexp(self.alpha * self._inner_logcdf(t))

    def _logpdf(self, t):
        logG = self._inner_logcdf(t)
        with np.errstate(invalid="ignore"):
            power = 0.0 if self.alpha == 1.0 else (self.alpha - 1.0) * logG
        return math.log(self.alpha) + self.inner._logpdf(t) + power

    def _ppf(self, p):
        with np.errstate(divide="ignore"):
            log_u = np.log(p) / self.alpha
        u = np.exp(log_u)
        with np.errstate(invalid="ignore"):
            return np.where(
                u <= 0.5, self.inner._ppf(u), self.inner._isf(-np.expm1(log_u))
            )

    def _isf(self, s):
        with np.errstate(divide="ignore"):
            log_u = np.log1p(-s) / self.alpha
        u = np.exp(log_u)
        with np.errstate(invalid="ignore"):
            return np.where(
                u <= 0.5, self.inner._ppf(u), self.inner._isf(-np.expm1(log_u))
            )

    def __repr__(self):
        return f"Exponentiated({self.inner!r}, alpha={self.alpha:g})"


def eep(lam: float, beta: float) -> EPFamily:
    """Extended exponential-Poisson model."""
    return EPFamily(Exponential(beta), lam)


def ewp(lam: float, beta: float, alpha: float) -> EPFamily:
    """Extended Weibull-Poisson model."""
    return EPFamily(Weibull(beta, alpha), lam)


def ge2p(lam: float, beta: float, alpha: float) -> Exponentiated:
    """Generalised extended exponential-Poisson: powered EEP."""
    return Exponentiated(eep(lam, beta), alpha)


def egevp(lam: float, mu: float, sigma: float, xi: float) -> EPFamily:
    """Extended generalised-extreme-value Poisson model."""
    return EPFamily(GEV(mu, sigma, xi), lam)


# --- start points for fitting ---------------------------------------------


def _event_times(times, events):
    t = np.asarray(times, dtype=float)[np.asarray(events, dtype=bool)]
    return t[t > 0] if np.any(t > 0) else np.asarray(times, dtype=float)


def _exp_starts(times, events):
    t = _event_times(times, events)
    n_ev = max(int(np.sum(events)), 1)
    total = float(np.sum(times))
    return [
        (n_ev / total if total > 0 else 1.0,),
        (math.log(2) / max(float(np.median(t)), 1e-12),),
    ]


def _weibull_starts(times, events):
    t = np.sort(_event_times(times, events))
    starts = [(b, 1.0) for (b,) in _exp_starts(times, events)[:1]]
    # least squares on the Weibull plot: log(-log(1 - F)) = log beta + alpha log t
    if t.size >= 3:
        pos = (np.arange(1, t.size + 1) - 0.3) / (t.size + 0.4)
        slope, intercept = np.polyfit(np.log(t), np.log(-np.log1p(-pos)), 1)
        if slope > 0 and np.isfinite(intercept):
            starts.append((math.exp(intercept), float(slope)))
    if len(starts) == 1:
        starts.append((_exp_starts(times, events)[1][0], 1.0))
    return starts


def _ge2p_starts(times, events):
    return [(b, 1.0) for (b,) in _exp_starts(times, events)]


def _gev_starts(times, events):
    t = _event_times(times, events)
    sd = float(np.std(t)) or 1.0
    sigma = math.sqrt(6.0) * sd / math.pi
    mu = float(np.mean(t)) - 0.5772156649 * sigma
    # a positive shape keeps the lower support edge below the smallest time
    xi = 0.5
    edge = float(np.min(times))
    med = float(np.median(t))
    sigma2 = max(med, 1e-6)
    mu2 = med
    while mu2 - sigma2 / xi >= edge:
        sigma2 *= 2.0
    return [(mu, sigma, 0.0), (mu2, sigma2, xi)]


@dataclass(frozen=True)
class ModelFamily:
    """Parametric family as seen by the fitter.

    ``positive`` marks parameters searched on the log scale; all others
    (lambda, locations, shapes without sign constraint) are searched as-is.
    """

    name: str
    param_names: tuple[str, ...]
    positive: tuple[bool, ...]
    build: Callable[..., Distribution]
    baseline_starts: Callable[..., list]

    @property
    def k(self) -> int:
        return len(self.param_names)

    def __call__(self, *params) -> Distribution:
        return self.build(*params)

    def start_points(self, times, events, lambdas=(-1.0, 1.0, -4.0, 4.0)):
        """Baseline starts crossed with ``lambdas``, interleaved by lambda."""
        base = self.baseline_starts(times, events)
        return [(lam,) + tuple(b) for lam in lambdas for b in base]


FAMILIES: dict[str, ModelFamily] = {
    "eep": ModelFamily("eep", ("lambda", "beta"), (False, True), eep, _exp_starts),
    "ewp": ModelFamily(
        "ewp", ("lambda", "beta", "alpha"), (False, True, True), ewp, _weibull_starts
    ),
    "ge2p": ModelFamily(
        "ge2p", ("lambda", "beta", "alpha"), (False, True, True), ge2p, _ge2p_starts
    ),
    "egevp": ModelFamily(
        "egevp",
        ("lambda", "mu", "sigma", "xi"),
        (False, False, True, False),
        egevp,
        _gev_starts,
    ),
}


def get_family(name: str | ModelFamily) -> ModelFamily:
    if isinstance(name, ModelFamily):
        return name
    try:
        return FAMILIES[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown distribution {name!r}; choose from {', '.join(FAMILIES)}"
        ) from None
