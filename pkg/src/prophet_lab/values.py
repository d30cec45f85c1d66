"""Exact finite-horizon expected values for the k-selection problem.

Four quantities, all computed without sampling:

* ``dp_table``     - optimal online policy, via the tail-integral form of the
                     Bellman recursion V(t,j) = V(t-1,j) + I(V(t-1,j) - V(t-1,j-1));
* ``ce_table``     - the certainty-equivalent heuristic, which accepts an
                     arrival iff it exceeds the (1 - j/t) quantile;
* ``fixed_threshold_value`` - the static-threshold policy (dominance tests);
* ``prophet_value``         - the clairvoyant benchmark, the expected sum of
                     the top k of n order statistics (closed form for Pareto,
                     per-order-statistic quadrature otherwise).

Tables fill column-by-column in t; rolling helpers keep O(k) memory when
only selected rows are needed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .distributions import DistributionModel
from .numerics import (
    ConvergenceError,
    digamma,
    gamma_ratio,
    integrate_adaptive,
    log_gamma,
)

POLICY_DP = "dp"
POLICY_CE = "ce"


@dataclass
class ValueTable:
    """Grid of expected values V(t, j) with the policy's acceptance thresholds.

    ``values[t, j]`` is the expected total reward with t arrivals to go and j
    units left.  ``thresholds[t, j]`` is the acceptance cutoff used in state
    (t, j); column j = 0 holds +inf (a policy with no budget never accepts).
    """

    policy: str
    distribution: DistributionModel
    n_max: int
    k_max: int
    values: np.ndarray
    thresholds: np.ndarray

    def value(self, t: int | None = None, j: int | None = None) -> float:
        t = self.n_max if t is None else t
        j = self.k_max if j is None else j
        return float(self.values[t, j])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "j", "value", "threshold"])
            for t in range(self.n_max + 1):
                for j in range(self.k_max + 1):
                    writer.writerow(
                        [t, j, repr(float(self.values[t, j])), repr(float(self.thresholds[t, j]))]
                    )


def _check_nk(n: int, k: int) -> None:
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")


_SCALAR_K_CUTOFF = 4  # below this a plain float loop beats numpy dispatch


def dp_table(d: DistributionModel, n: int, k: int) -> ValueTable:
    """Optimal-policy value grid for 1 <= j <= k, 1 <= t <= n.

    The acceptance threshold in state (t, j) is the marginal value of a
    unit, V(t-1, j) - V(t-1, j-1); each step adds the tail integral above
    it.  O(n k) time, full grids retained.
    """
    _check_nk(n, k)
    values = np.zeros((n + 1, k + 1))
    thresholds = np.full((n + 1, k + 1), math.inf)
    row = np.zeros(k + 1)
    for t in range(1, n + 1):
        tau = np.diff(row)
        row[1:] += d.tail_integral(tau)
        values[t] = row
        thresholds[t, 1:] = tau
    return ValueTable(POLICY_DP, d, n, k, values, thresholds)


def dp_values(
    d: DistributionModel, n: int, k: int, checkpoints: Iterable[int] | None = None
) -> dict[int, np.ndarray]:
    """Rolling-memory fill; returns {t: value row} for the requested rows.

    Always includes t = n.  Each returned row holds V(t, 0..k).
    """
    _check_nk(n, k)
    keep = {n} if checkpoints is None else set(checkpoints) | {n}
    out: dict[int, np.ndarray] = {}
    if 0 in keep:
        out[0] = np.zeros(k + 1)
    if k <= _SCALAR_K_CUTOFF and d.tail_integral_scalar(0.0) is not None:
        integral = d.tail_integral_scalar
        row = [0.0] * (k + 1)
        for t in range(1, n + 1):
            old = row.copy()
            for j in range(1, k + 1):
                row[j] = old[j] + integral(old[j] - old[j - 1])
            if t in keep:
                out[t] = np.asarray(row)
        return out
    row = np.zeros(k + 1)
    for t in range(1, n + 1):
        tau = np.diff(row)
        row[1:] += d.tail_integral(tau)
        if t in keep:
            out[t] = row.copy()
    return out


def _ce_acceptance(t: int, k: int) -> np.ndarray:
    """Target acceptance probabilities min(j/t, 1) for j = 1..k."""
    return np.minimum(np.arange(1, k + 1, dtype=np.float64) / t, 1.0)


def _ce_step(d: DistributionModel, row: np.ndarray, t: int, k: int) -> np.ndarray:
    acc = _ce_acceptance(t, k)
    q = d.quantile_upper(acc)
    new = np.empty_like(row)
    new[0] = 0.0
    new[1:] = acc * (row[:-1] + q) + d.tail_integral(q) + (1.0 - acc) * row[1:]
    return new


def ce_table(d: DistributionModel, n: int, k: int) -> ValueTable:
    """Certainty-equivalent heuristic value grid.

    In state (t, j) the policy accepts iff the arrival exceeds the
    (1 - j/t) quantile, equalizing the acceptance rate over the remaining
    horizon.  States with j >= t accept everything (the threshold is the
    left endpoint), so V(t, t) = t * mean exactly.
    """
    _check_nk(n, k)
    values = np.zeros((n + 1, k + 1))
    thresholds = np.full((n + 1, k + 1), math.inf)
    row = np.zeros(k + 1)
    for t in range(1, n + 1):
        row = _ce_step(d, row, t, k)
        values[t] = row
        thresholds[t, 1:] = d.quantile_upper(_ce_acceptance(t, k))
    return ValueTable(POLICY_CE, d, n, k, values, thresholds)


def ce_values(
    d: DistributionModel, n: int, k: int, checkpoints: Iterable[int] | None = None
) -> dict[int, np.ndarray]:
    """Rolling-memory analogue of ce_table; returns {t: value row}."""
    _check_nk(n, k)
    keep = {n} if checkpoints is None else set(checkpoints) | {n}
    out: dict[int, np.ndarray] = {}
    if 0 in keep:
        out[0] = np.zeros(k + 1)
    if k <= _SCALAR_K_CUTOFF and d.quantile_upper_scalar(0.5) is not None:
        integral = d.tail_integral_scalar
        upper = d.quantile_upper_scalar
        row = [0.0] * (k + 1)
        for t in range(1, n + 1):
            old = row.copy()
            for j in range(1, k + 1):
                acc = j / t if j < t else 1.0
                q = upper(acc)
                row[j] = acc * (old[j - 1] + q) + integral(q) + (1.0 - acc) * old[j]
            if t in keep:
                out[t] = np.asarray(row)
        return out
    row = np.zeros(k + 1)
    for t in range(1, n + 1):
        row = _ce_step(d, row, t, k)
        if t in keep:
            out[t] = row.copy()
    return out


def fixed_threshold_value(d: DistributionModel, n: int, k: int, threshold: float) -> float:
    """Expected value of the policy accepting the first k arrivals above T.

    Uses the conditional-expectation recursion
    W(t,j) = p (E[X | X > T] + W(t-1,j-1)) + (1-p) W(t-1,j),  p = P(X > T),
    where p E[X | X > T] = T p + I(T).
    """
    _check_nk(n, k)
    if not (0.0 <= threshold <= d.right_endpoint):
        raise ValueError(
            f"threshold {threshold} outside support [0, {d.right_endpoint}]"
        )
    p = float(d.tail(threshold))
    gain = threshold * p + float(d.tail_integral(threshold))
    row = np.zeros(k + 1)
    for _ in range(n):
        new = np.empty_like(row)
        new[0] = 0.0
        new[1:] = gain + p * row[:-1] + (1.0 - p) * row[1:]
        row = new
    return float(row[k])


@dataclass(frozen=True)
class ProphetValue:
    """Expected sum of the top k of n i.i.d. draws, with provenance."""

    n: int
    k: int
    value: float
    method: str  # closed_form | quadrature | monte_carlo
    error_estimate: float


def _order_statistic_mean(d: DistributionModel, n: int, r: int, rel_tol: float):
    """E[X_{r:n}] (r-th smallest of n) by quadrature against the Beta kernel.

    With v = 1 - u the integrand is prefactor * v^(n-r) (1-v)^(r-1) * F_inv(1-v);
    the substitution puts the heavy-tail singularity at the origin where the
    adaptive rule refines.  Everything is assembled in log space so the
    Beta prefactor never overflows.
    """
    m = n - r  # small for the top order statistics
    ln_pref = log_gamma(n + 1.0) - log_gamma(m + 1.0) - log_gamma(float(n - m))

    def integrand(v: float) -> float:
        ln_w = ln_pref + (n - m - 1) * math.log1p(-v)
        if m:
            ln_w += m * math.log(v)
        w = math.exp(ln_w)
        if w == 0.0:
            return 0.0
        return w * float(d.quantile_upper(v))

    return integrate_adaptive(integrand, 0.0, 1.0, rel_tol=rel_tol)


def prophet_value(d: DistributionModel, n: int, k: int, rel_tol: float = 1e-8) -> ProphetValue:
    """Clairvoyant benchmark: expected sum of the k largest of n draws.

    Pareto admits an exact gamma-ratio closed form (each top order
    statistic has a Beta-integral mean, and the sum telescopes); other
    families integrate each order statistic against its Beta kernel.
    """
    _check_nk(n, k)
    if d.family == "pareto":
        g = d.gamma
        value = gamma_ratio(n + 1.0, n + 1.0 - g) * gamma_ratio(k + 1.0 - g, float(k)) / (1.0 - g)
        return ProphetValue(n, k, value, "closed_form", 0.0)
    total = 0.0
    err = 0.0
    evals = 0
    try:
        for r in range(n, n - k, -1):
            res = _order_statistic_mean(d, n, r, rel_tol)
            total += res.value
            err += res.abs_error_estimate
            evals += res.evaluations
    except ConvergenceError as exc:
        partial = exc.result
        best = total + (partial.value if partial is not None else 0.0)
        raise ConvergenceError(
            f"prophet quadrature stalled at order statistic r={r} "
            f"(partial value {best:.12g})",
            result=None if partial is None else type(partial)(best, err + partial.abs_error_estimate, evals + partial.evaluations),
        ) from exc
    return ProphetValue(n, k, total, "quadrature", err)


def prophet_asymptotic(d: DistributionModel, n: int, k: int) -> float:
    """Leading-order approximation of the prophet benchmark for large n.

    Heavy tails scale the gamma-ratio constant by the (1 - 1/n) quantile;
    index 0 adds a digamma-sum correction at the e-folding scale; finite
    endpoints subtract the same constant times the endpoint gap.
    """
    if n < 2 or k < 1:
        raise ValueError("prophet_asymptotic requires n >= 2 and k >= 1")
    u_n, a_n = d.evt_scales(n)
    g = d.gamma
    if g > 0.0:
        return gamma_ratio(k + 1.0 - g, float(k)) / (1.0 - g) * u_n
    if g == 0.0:
        correction = sum(-digamma(float(r)) for r in range(1, k + 1))
        return k * u_n + a_n * correction
    const = gamma_ratio(k + 1.0 - g, float(k)) / (1.0 - g)
    return k * d.right_endpoint - const * (d.right_endpoint - u_n)
