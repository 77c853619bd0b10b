"""Kaplan-Meier product-limit estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inference import CensoredSample

__all__ = ["KMCurve", "kaplan_meier"]


@dataclass(frozen=True)
class KMCurve:
    """Right-continuous step function, one step per distinct event time."""

    times: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray

    def __call__(self, t):
        """Evaluate the survival estimate at ``t`` (1 before the first event)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        out = np.concatenate(([1.0], self.survival))[idx]
        return out[()] if out.ndim == 0 else out

    @property
    def steps(self) -> list[tuple[float, float, int, int]]:
        return list(
            zip(
                self.times.tolist(),
                self.survival.tolist(),
                self.at_risk.tolist(),
                self.events.tolist(),
            )
        )


def kaplan_meier(data: CensoredSample) -> KMCurve:
    """Product-limit estimate ``S(t) = prod_{t_j <= t} (1 - d_j / n_j)``.

    Events tied with censorings at the same time are counted first, so the
    censored records are still at risk for those events.

    Between censorings the product telescopes to a ratio of risk-set sizes,
    which is what is evaluated; with no censoring the estimate is exactly
    ``(n - failures so far) / n``.
    """
    if len(data) == 0:
        raise ValueError("Kaplan-Meier needs at least one record")
    times = data.times
    uniq, inverse = np.unique(times, return_inverse=True)
    d = np.bincount(inverse, weights=data.events, minlength=uniq.size).astype(np.int64)
    total = np.bincount(inverse, minlength=uniq.size)
    c = total - d
    at_risk = len(data) - np.concatenate(([0], np.cumsum(total)[:-1]))

    out_t, out_s, out_n, out_d = [], [], [], []
    scale = 1.0  # survival at the start of the current censoring-free stretch
    base = len(data)  # risk-set size at the start of that stretch
    s = 1.0
    for j in range(uniq.size):
        if d[j] > 0:
            s = scale * (at_risk[j] - d[j]) / base
            out_t.append(uniq[j])
            out_s.append(s)
            out_n.append(at_risk[j])
            out_d.append(d[j])
        if c[j] > 0:
            scale = s
            base = at_risk[j] - d[j] - c[j]
    return KMCurve(
        np.asarray(out_t, dtype=float),
        np.asarray(out_s, dtype=float),
        np.asarray(out_n, dtype=np.int64),
        np.asarray(out_d, dtype=np.int64),
    )
