"""Extended Poisson family of lifetime distributions.

A baseline cdf ``F(t; theta)`` is compounded with a zero-truncated Poisson
count through a single real shape ``lam``::

    G(t) = (exp(lam * F(t)) - 1) / (exp(lam) - 1)

``lam < 0`` is the minimum (competing risks) construction with Poisson rate
``-lam``; ``lam > 0`` is the maximum (complementary risks) construction.
The baseline is recovered as ``lam -> 0``.

All evaluation goes through log space using the helper
``log((1 - exp(-x)) / x)``, which is finite for every real ``x`` and keeps
``|lam|`` up to ``MAX_ABS_LAMBDA`` usable without overflow.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "DomainError",
    "Distribution",
    "EPFamily",
    "LAMBDA_THRESHOLD",
    "MAX_ABS_LAMBDA",
    "ZTP_MAX_TERMS",
    "density_at_zero",
    "log_norm_const",
    "norm_const",
    "q_transform",
    "sample_latent",
    "sample_ztp",
    "ztp_pmf",
]

#: ``|lam|`` below this routes every family function to the baseline limit.
LAMBDA_THRESHOLD = 1e-8
#: Largest ``|lam|`` accepted; beyond it ``expm1(lam)`` leaves double range.
MAX_ABS_LAMBDA = 700.0
#: Cap on the number of terms walked by the sequential ZTP inversion.
ZTP_MAX_TERMS = 1_000_000


class DomainError(ValueError):
    """Argument outside the mathematical domain of the operation."""


def _log_ratio(x: ArrayLike) -> NDArray[np.float64]:
    """``log((1 - exp(-x)) / x)`` for any real ``x`` (limit 0 at x = 0)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return np.float64(_log_ratio_scalar(float(x)))
    # L(x) = max(-x, 0) + log(1 - exp(-|x|)) - log|x|
    y = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.maximum(-x, 0.0) + np.log(-np.expm1(-y)) - np.log(y)
    small = y < 1e-3
    if np.any(small):
        out = np.where(small, -x / 2 + x**2 / 24 - x**4 / 2880, out)
    return out


def _log_ratio_scalar(x: float) -> float:
    y = abs(x)
    if y < 1e-3:
        return -x / 2 + x**2 / 24 - x**4 / 2880
    return max(-x, 0.0) + math.log(-math.expm1(-y)) - math.log(y)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not math.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam}")
    if abs(lam) > MAX_ABS_LAMBDA:
        raise DomainError(f"|lambda| must not exceed {MAX_ABS_LAMBDA}, got {lam}")
    return lam


def log_norm_const(lam: float) -> float:
    """Logarithm of ``lam / (1 - exp(-lam))``, real for every nonzero ``lam``.

    Computed branchwise so no logarithm ever sees a negative argument.
    """
    lam = _check_lambda(lam)
    if abs(lam) < LAMBDA_THRESHOLD:
        return 0.0
    return float(-_log_ratio(lam))


def norm_const(lam: float) -> float:
    """Normalising factor ``lam / (1 - exp(-lam))`` of the family density."""
    return math.exp(log_norm_const(lam))


def q_transform(p: ArrayLike, lam: float) -> NDArray[np.float64] | float:
    """Map a family probability to the baseline probability scale.

    Solves ``G(t) = p`` for ``F(t)``: ``log((exp(lam) - 1) p + 1) / lam``.

    Parameters
    ----------
    p : float or array_like
        Probabilities in ``[0, 1]``.
    lam : float
        Family shape parameter.

    Returns
    -------
    float or ndarray
        Values in ``[0, 1]``; equals ``p`` in the ``lam -> 0`` limit.
    """
    lam = _check_lambda(lam)
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr >= 0) & (p_arr <= 1))):
        raise DomainError("probabilities must lie in [0, 1]")
    out = _q(p_arr, lam)
    return out[()] if out.ndim == 0 else out


def _q(p: NDArray[np.float64], lam: float) -> NDArray[np.float64]:
    if abs(lam) < LAMBDA_THRESHOLD:
        return p.copy()
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.log1p(p * np.expm1(lam)) / lam
    # exact endpoints regardless of roundoff in expm1/log1p
    return np.where(p >= 1.0, 1.0, np.clip(out, 0.0, 1.0))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Distribution(ABC):
    """Continuous lifetime distribution with vectorised evaluation.

    Subclasses implement the private ``_log*``, ``_ppf`` and ``_isf`` kernels
    which must accept any real input (values outside the support give the
    appropriate boundary result). The public methods validate arguments and
    raise :class:`DomainError` on points outside the closed support.
    """

    param_names: tuple[str, ...] = ()

    @property
    @abstractmethod
    def params(self) -> tuple[float, ...]: ...

    @property
    @abstractmethod
    def support(self) -> tuple[float, float]:
        """Closed support ``(lower, upper)``; endpoints may be infinite."""

    @abstractmethod
    def _logpdf(self, t: NDArray) -> NDArray: ...

    @abstractmethod
    def _logcdf(self, t: NDArray) -> NDArray: ...

    @abstractmethod
    def _logsf(self, t: NDArray) -> NDArray: ...

    @abstractmethod
    def _ppf(self, p: NDArray) -> NDArray: ...

    def _isf(self, s: NDArray) -> NDArray:
        return self._ppf(1.0 - s)

    def _cdf(self, t: NDArray) -> NDArray:
        return np.exp(self._logcdf(t))

    def _sf(self, t: NDArray) -> NDArray:
        return np.exp(self._logsf(t))

    def _times(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        bad = ~((t >= lo) & (t <= hi))
        if np.any(bad):
            raise DomainError(
                f"time {t[bad].flat[0]} outside support [{lo}, {hi}] of {self!r}"
            )
        return t

    @staticmethod
    def _ret(x: NDArray):
        return x[()] if x.ndim == 0 else x

    def pdf(self, t: ArrayLike):
        return self._ret(np.exp(self._logpdf(self._times(t))))

    def logpdf(self, t: ArrayLike):
        return self._ret(self._logpdf(self._times(t)))

    def cdf(self, t: ArrayLike):
        return self._ret(self._cdf(self._times(t)))

    def logcdf(self, t: ArrayLike):
        return self._ret(self._logcdf(self._times(t)))

    def sf(self, t: ArrayLike):
        """Survival function ``1 - cdf``, evaluated without cancellation."""
        return self._ret(self._sf(self._times(t)))

    def logsf(self, t: ArrayLike):
        return self._ret(self._logsf(self._times(t)))

    def hazard(self, t: ArrayLike):
        """Hazard ``pdf / sf``; raises where the survival function is zero."""
        t = self._times(t)
        logsf = self._logsf(t)
        if np.any(np.isneginf(logsf)):
            raise DomainError("hazard undefined where the survival function is 0")
        return self._ret(np.exp(self._logpdf(t) - logsf))

    def ppf(self, p: ArrayLike):
        """Quantile function.

        ``p = 0`` and ``p = 1`` are accepted only when the matching support
        endpoint is finite.
        """
        p = np.asarray(p, dtype=float)
        if np.any(~((p >= 0) & (p <= 1))):
            raise DomainError("probabilities must lie in [0, 1]")
        lo, hi = self.support
        if (np.any(p == 0) and not np.isfinite(lo)) or (
            np.any(p == 1) and not np.isfinite(hi)
        ):
            raise DomainError("boundary quantile of an unbounded support")
        out = self._ppf(p)
        out = np.where(p == 0, lo, np.where(p == 1, hi, out))
        return self._ret(out)

    def rvs(self, size: int, seed=None) -> NDArray[np.float64]:
        """Inverse-transform draws; identical output for identical ``seed``."""
        if size < 0:
            raise ValueError("size must be nonnegative")
        u = _as_rng(seed).random(size)
        return self._ppf(u)

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v:g}" for k, v in zip(self.param_names, self.params))
        return f"{type(self).__name__}({args})"


class EPFamily(Distribution):
    """Baseline distribution compounded with a zero-truncated Poisson count.

    Parameters
    ----------
    baseline : Distribution
        Component lifetime distribution ``F(t; theta)``.
    lam : float
        Shape parameter. Negative values give the minimum construction,
        positive values the maximum construction. ``|lam|`` below
        ``LAMBDA_THRESHOLD`` evaluates as the baseline itself.
    """

    def __init__(self, baseline: Distribution, lam: float):
        self.baseline = baseline
        self.lam = _check_lambda(lam)
        self._limit = abs(self.lam) < LAMBDA_THRESHOLD
        self._log_ratio_lam = _log_ratio_scalar(self.lam)

    @property
    def param_names(self) -> tuple[str, ...]:
        return ("lambda",) + self.baseline.param_names

    @property
    def params(self) -> tuple[float, ...]:
        return (self.lam,) + self.baseline.params

    @property
    def support(self) -> tuple[float, float]:
        return self.baseline.support

    def _logpdf(self, t):
        logf = self.baseline._logpdf(t)
        if self._limit:
            return logf
        return logf - self._log_ratio_lam - self.lam * self.baseline._sf(t)

    def _logcdf(self, t):
        logF = self.baseline._logcdf(t)
        if self._limit:
            return logF
        F = np.exp(logF)
        return logF + _log_ratio(-self.lam * F) - _log_ratio_scalar(-self.lam)

    def _logsf(self, t):
        logS = self.baseline._logsf(t)
        if self._limit:
            return logS
        S = np.exp(logS)
        return logS + _log_ratio(self.lam * S) - self._log_ratio_lam

    def _ppf(self, p):
        if self._limit:
            return self.baseline._ppf(p)
        q = _q(p, self.lam)
        lower = q <= 0.5
        # upper half via the complementary transform to keep tail precision
        qbar = _q(1.0 - p, -self.lam)
        with np.errstate(invalid="ignore"):
            return np.where(lower, self.baseline._ppf(q), self.baseline._isf(qbar))

    def _isf(self, s):
        if self._limit:
            return self.baseline._isf(s)
        qbar = _q(s, -self.lam)
        q = _q(1.0 - s, self.lam)
        with np.errstate(invalid="ignore"):
            return np.where(qbar <= 0.5, self.baseline._isf(qbar), self.baseline._ppf(q))

    def __repr__(self) -> str:
        return f"EPFamily({self.baseline!r}, lam={self.lam:g})"


def ztp_pmf(n: ArrayLike, phi: float) -> NDArray[np.float64]:
    """Zero-truncated Poisson mass ``phi**n / (n! (exp(phi) - 1))``."""
    n = np.asarray(n)
    logp = n * math.log(phi) - _lgamma(n + 1) - math.log(math.expm1(phi))
    return np.where(n >= 1, np.exp(logp), 0.0)


def _lgamma(x):
    return np.vectorize(math.lgamma, otypes=[float])(x)


def sample_ztp(phi: float, size: int | None = None, seed=None):
    """Draw from ZTP(phi) by sequential inversion of the cumulative mass.

    Returns a single int when ``size`` is None, otherwise an int array.
    """
    phi = float(phi)
    if not (math.isfinite(phi) and phi > 0):
        raise DomainError(f"ZTP rate must be positive and finite, got {phi}")
    rng = _as_rng(seed)
    u = rng.random(1 if size is None else size)
    out = np.zeros(u.shape, dtype=np.int64)
    # log P(N = 1) = log(phi) - log(expm1(phi)), stable for small phi
    logp = math.log(phi) - (math.log(math.expm1(phi)) if phi < 700 else phi)
    cum = 0.0
    pending = np.ones(u.shape, dtype=bool)
    k = 1
    while np.any(pending):
        if k > ZTP_MAX_TERMS:
            raise RuntimeError("ZTP inversion exceeded the term cap")
        p = math.exp(logp)
        cum += p
        hit = pending & (u <= cum)
        out[hit] = k
        pending &= ~hit
        if p == 0.0 and k > phi:
            # remaining mass is below double resolution; rounding residue
            out[pending] = k
            break
        logp += math.log(phi) - math.log(k + 1)
        k += 1
    return int(out[0]) if size is None else out


def sample_latent(model: EPFamily, size: int, seed=None) -> NDArray[np.float64]:
    """Draw through the latent-count construction rather than the quantile.

    For ``lam < 0`` each draw is the minimum of ``N ~ ZTP(-lam)`` baseline
    lifetimes; for ``lam > 0`` it is the maximum of ``N ~ ZTP(lam)``.
    """
    if abs(model.lam) < LAMBDA_THRESHOLD:
        raise DomainError("latent construction is undefined at lambda = 0")
    rng = _as_rng(seed)
    if size == 0:
        return np.empty(0)
    counts = sample_ztp(abs(model.lam), size=size, seed=rng)
    draws = model.baseline.rvs(int(counts.sum()), seed=rng)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    reduce = np.minimum if model.lam < 0 else np.maximum
    return reduce.reduceat(draws, starts)


def density_at_zero(model: EPFamily) -> float | None:
    """Family density at the lower support endpoint.

    Equals ``lam / (exp(lam) - 1) * h_F(lower)`` where ``h_F`` is the
    baseline hazard. Returns ``None`` when the baseline hazard there is 0
    or infinite, i.e. the model carries no finite positive density for
    instantaneous failures.
    """
    lower = model.support[0]
    if not np.isfinite(lower):
        raise DomainError("support has no finite lower endpoint")
    t0 = np.asarray(lower, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h0 = float(np.exp(model.baseline._logpdf(t0) - model.baseline._logsf(t0)))
    if not (np.isfinite(h0) and h0 > 0):
        return None
    if model._limit:
        return h0
    lam = model.lam
    # lam / (exp(lam) - 1) = exp(-lam - log_ratio(lam))
    return h0 * math.exp(-lam - model._log_ratio_lam)
