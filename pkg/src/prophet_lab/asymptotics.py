"""Asymptotic performance ratios and their limit coefficients.

As the horizon grows with the budget k fixed, the optimal policy's value
scales like alpha_k times the (1 - 1/n) quantile and the certainty
equivalent heuristic's like beta_k.  Both coefficient families reduce to
scalar recursions in k that depend on the law only through its extreme
value index:

* ``v_sequence``  - alpha_k = v_k / (1-gamma)^gamma, where the increment
  v_k - v_{k-1} is the unique positive root of
  x^(1/gamma) + v_{k-1} x^(1/gamma - 1) - 1 = 0;
* ``w_sequence``  - beta_k = w_k from a linear one-term recursion, with an
  equivalent gamma-ratio sum ``w_closed_form``;
* ``acr_dp`` / ``apx_ce`` - the policies' asymptotic fractions of the
  clairvoyant benchmark; both equal 1 outside the heavy-tail index range
  (0, 1), and both behave like 1 - gamma(1-gamma)/2 * log(k)/k for large k;
* ``competition_complexity`` - the market-inflation factor needed to erase
  that multiplicative loss;
* ``regret_constant_estimate`` - the limit of k^gamma (alpha_k - beta_k),
  which governs the heuristic's divergent additive regret.

Indices within 1e-6 of 0 or 1 are rejected wherever the formulas hold
only on (0, 1): the gamma-function factors blow up at both edges.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numerics import Bracket, log_gamma, solve_increasing_root

_EDGE = 1e-6


def _require_open_unit(gamma: float, what: str) -> None:
    if not (_EDGE < gamma < 1.0 - _EDGE):
        raise ValueError(f"{what} requires gamma in ({_EDGE:g}, {1 - _EDGE:g}), got {gamma}")


def v_sequence(gamma: float, k_max: int, tol: float = 1e-13) -> np.ndarray:
    """Values v_1..v_k of the optimal-policy coefficient recursion.

    v_1 = 1; each increment solves x^(1/g) + v_{k-1} x^(1/g - 1) = 1 on
    (0, 1].  Both exponents are positive for g in (0, 1), so the left side
    is strictly increasing there: the bracket is sound for every index in
    the range and no fallback is needed.  Residuals come out at 1e-12 or
    better.
    """
    _require_open_unit(gamma, "v_sequence")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    a = 1.0 / gamma
    out = np.empty(k_max)
    out[0] = 1.0
    v = 1.0
    for k in range(2, k_max + 1):
        vp = v

        def f(x: float, vp: float = vp) -> float:
            return x**a + vp * x ** (a - 1.0) - 1.0

        delta = solve_increasing_root(f, Bracket(0.0, 1.0), tol=tol)
        v = vp + delta
        out[k - 1] = v
    return out


def dp_coefficients(gamma: float, k_max: int, tol: float = 1e-13) -> np.ndarray:
    """The v-recursion extended to every index below 1.

    For gamma in (0, 1) this is ``v_sequence``.  For gamma < 0 the increment
    equation is solved in its fixed-point form v_k - v_{k-1} = v_k^theta,
    theta = -gamma/(1-gamma) in (0, 1), where increments exceed 1 and the
    unit bracket no longer applies.  At gamma = 0 the recursion degenerates
    to v_k = k.
    """
    if gamma >= 1.0 - _EDGE:
        raise ValueError(f"dp_coefficients requires gamma < 1, got {gamma}")
    if abs(gamma) <= _EDGE:
        return np.arange(1, k_max + 1, dtype=np.float64)
    if gamma > 0.0:
        return v_sequence(gamma, k_max, tol=tol)
    theta = -gamma / (1.0 - gamma)
    out = np.empty(k_max)
    out[0] = 1.0
    v = 1.0
    for k in range(2, k_max + 1):
        vp = v

        def f(x: float, vp: float = vp) -> float:
            return x - vp - x**theta

        hi = vp + 1.0
        while f(hi) < 0.0:
            hi = vp + 2.0 * (hi - vp)
        v = solve_increasing_root(f, Bracket(vp, hi), tol=tol)
        out[k - 1] = v
    return out


def s_sequence(gamma: float, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """s_k = (1-g) v_k^(1/(1-g)) and its drift diagnostic.

    The second array is t_k = s_k - k + (g/2) log k, which settles to a
    finite constant; its convergence is the quantitative content of the
    large-k expansions.
    """
    _require_open_unit(gamma, "s_sequence")
    v = v_sequence(gamma, k_max)
    s = (1.0 - gamma) * v ** (1.0 / (1.0 - gamma))
    k = np.arange(1, k_max + 1, dtype=np.float64)
    t = s - k + 0.5 * gamma * np.log(k)
    return s, t


def w_sequence(gamma: float, k_max: int) -> np.ndarray:
    """Certainty-equivalent coefficients w_1..w_k.

    w_1 = 1/(1 - g^2); w_k = k/(k+g) w_{k-1} + k^(1-g) / ((k+g)(1-g)).
    """
    _require_open_unit(gamma, "w_sequence")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    out = np.empty(k_max)
    w = 1.0 / (1.0 - gamma * gamma)
    out[0] = w
    for k in range(2, k_max + 1):
        w = (k * w + k ** (1.0 - gamma) / (1.0 - gamma)) / (k + gamma)
        out[k - 1] = w
    return out


def ce_coefficients(gamma: float, k_max: int) -> np.ndarray:
    """The w-recursion extended to every index in (-1, 1).

    The recursion divides by k + gamma and seeds at 1/(1 - gamma^2), so it
    is well posed exactly for gamma > -1; at gamma <= -1 the k = 1
    coefficient is infinite (the heuristic's endpoint deficiency then
    carries an extra logarithmic factor) and the request is rejected.
    At gamma = 0 the recursion degenerates to w_k = k.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if abs(gamma) <= _EDGE:
        return np.arange(1, k_max + 1, dtype=np.float64)
    if gamma > 0.0:
        return w_sequence(gamma, k_max)
    if gamma <= -1.0:
        raise ValueError(
            f"ce coefficients are infinite for gamma <= -1 (got {gamma}): "
            "the seed 1/(1 - gamma^2) diverges"
        )
    out = np.empty(k_max)
    w = 1.0 / (1.0 - gamma * gamma)
    out[0] = w
    for k in range(2, k_max + 1):
        w = (k * w + k ** (1.0 - gamma) / (1.0 - gamma)) / (k + gamma)
        out[k - 1] = w
    return out


def _ratio_sum_terms(gamma: float, k_max: int) -> np.ndarray:
    """Terms Gamma(r+g)/Gamma(r+1) r^(1-g) for r = 1..k_max."""
    r = np.arange(1, k_max + 1, dtype=np.float64)
    lg = np.array([log_gamma(x + gamma) - log_gamma(x + 1.0) for x in r])
    return np.exp(lg + (1.0 - gamma) * np.log(r))


def w_closed_form(gamma: float, k: int) -> float:
    """Gamma-ratio sum equal to w_sequence(gamma, k)[-1].

    w_k = Gamma(k+1) / ((1-g) Gamma(k+1+g)) * sum_{r<=k} Gamma(r+g)/Gamma(r+1) r^(1-g).
    """
    _require_open_unit(gamma, "w_closed_form")
    if k < 1:
        raise ValueError("k must be >= 1")
    total = float(np.sum(_ratio_sum_terms(gamma, k)))
    pref = math.exp(log_gamma(k + 1.0) - log_gamma(k + 1.0 + gamma)) / (1.0 - gamma)
    return pref * total


def acr_dp(gamma: float, k: int) -> float:
    """Asymptotic fraction of the clairvoyant value the optimal policy attains.

    (1-g)^(1-g) v_k Gamma(k) / Gamma(k+1-g) on the heavy-tail range; exactly
    1 for g <= 0.  At k = 1 this is min{(1-g)^(-g) / Gamma(1-g), 1}.
    """
    if gamma >= 1.0 - _EDGE:
        raise ValueError(f"acr_dp requires gamma < 1, got {gamma}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if gamma <= 0.0:
        return 1.0
    _require_open_unit(gamma, "acr_dp")
    v_k = float(v_sequence(gamma, k)[-1])
    return _acr_from_vk(gamma, k, v_k)


def _acr_from_vk(gamma: float, k: int, v_k: float) -> float:
    lg = log_gamma(float(k)) - log_gamma(k + 1.0 - gamma)
    return (1.0 - gamma) ** (1.0 - gamma) * v_k * math.exp(lg)


def apx_ce(gamma: float, k: int) -> float:
    """Asymptotic fraction of the clairvoyant value the heuristic attains.

    Gamma(k)Gamma(k+1) / (Gamma(k+1-g)Gamma(k+1+g)) times the gamma-ratio
    sum; exactly 1 for g <= 0.  Equivalently (1-g) Gamma(k)/Gamma(k+1-g) w_k.
    """
    if gamma >= 1.0 - _EDGE:
        raise ValueError(f"apx_ce requires gamma < 1, got {gamma}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if gamma <= 0.0:
        return 1.0
    _require_open_unit(gamma, "apx_ce")
    total = float(np.sum(_ratio_sum_terms(gamma, k)))
    return _apx_from_sum(gamma, k, total)


def _apx_from_sum(gamma: float, k: int, ratio_sum: float) -> float:
    lg = (
        log_gamma(float(k))
        + log_gamma(k + 1.0)
        - log_gamma(k + 1.0 - gamma)
        - log_gamma(k + 1.0 + gamma)
    )
    return math.exp(lg) * ratio_sum


def large_k_approx(gamma: float, k: int, target: str = "dp") -> float:
    """First-order large-k expansion of a ratio or its competition complexity.

    dp / ce:        1 - g(1-g)/2 * log(k)/k
    cc_dp / cc_ce:  1 + (1-g)/2  * log(k)/k
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _require_open_unit(gamma, "large_k_approx")
    lk = math.log(k) / k
    if target in ("dp", "ce"):
        return 1.0 - 0.5 * gamma * (1.0 - gamma) * lk
    if target in ("cc_dp", "cc_ce"):
        return 1.0 + 0.5 * (1.0 - gamma) * lk
    raise ValueError(f"unknown target {target!r}")


def competition_complexity(gamma: float, k: int, policy: str = "dp") -> float:
    """Market-size inflation factor that restores parity with the benchmark.

    ratio^(-1/gamma) on the heavy-tail range; 1 for gamma <= 0, where the
    loss already vanishes at the extreme-value scale.
    """
    if policy not in ("dp", "ce"):
        raise ValueError(f"policy must be 'dp' or 'ce', got {policy!r}")
    if gamma >= 1.0 - _EDGE:
        raise ValueError(f"competition_complexity requires gamma < 1, got {gamma}")
    if gamma <= 0.0:
        return 1.0
    ratio = acr_dp(gamma, k) if policy == "dp" else apx_ce(gamma, k)
    return ratio ** (-1.0 / gamma)


@dataclass(frozen=True)
class SweepRow:
    """Worst case over the index grid, for one budget k."""

    k: int
    worst_acr: float
    gamma_star_dp: float
    worst_apx: float
    gamma_star_ce: float
    worst_ce_over_dp: float
    gamma_star_ratio: float


def _sweep_column(args: tuple[float, Sequence[int], int]) -> tuple[float, np.ndarray, np.ndarray]:
    gamma, k_list, k_max = args
    v = v_sequence(gamma, k_max)
    sums = np.cumsum(_ratio_sum_terms(gamma, k_max))
    acr = np.array([_acr_from_vk(gamma, k, float(v[k - 1])) for k in k_list])
    apx = np.array([_apx_from_sum(gamma, k, float(sums[k - 1])) for k in k_list])
    return gamma, acr, apx


def worker_count() -> int:
    """Parallelism cap from PROPHET_LAB_THREADS (default: serial)."""
    raw = os.environ.get("PROPHET_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PROPHET_LAB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def ratio_grid(k_list: Sequence[int], gamma_grid: Sequence[float]) -> list[tuple]:
    """Rows (k, gamma, acr, apx, apx/acr) over the full (k, gamma) grid.

    Cells are computed per index column (the v-recursion and the ratio sum
    are shared across k) and emitted in sorted (k, gamma) order.  The grid
    parallelizes over index columns when PROPHET_LAB_THREADS allows.
    """
    k_list = sorted(set(int(k) for k in k_list))
    if not k_list or k_list[0] < 1:
        raise ValueError("k_list must contain integers >= 1")
    gammas = [float(g) for g in gamma_grid]
    if not gammas:
        raise ValueError("gamma_grid must be non-empty")
    k_max = k_list[-1]
    jobs = [(g, k_list, k_max) for g in gammas]
    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_sweep_column, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        columns = [_sweep_column(job) for job in jobs]
    columns.sort(key=lambda c: c[0])
    rows = []
    for i, k in enumerate(k_list):
        for gamma, acr, apx in columns:
            rows.append((k, gamma, float(acr[i]), float(apx[i]), float(apx[i] / acr[i])))
    return rows


def worst_case_sweep(k_list: Sequence[int], gamma_grid: Sequence[float]) -> list[SweepRow]:
    """Grid minima of both ratios and of their quotient, with the arg-mins.

    The heuristic's minimum sits essentially at the upper index boundary for
    small budgets, so grids should extend to 0.999; steps coarser than about
    0.05 can miss it entirely.
    """
    for g in gamma_grid:
        _require_open_unit(float(g), "worst_case_sweep")
    cells = ratio_grid(k_list, gamma_grid)
    rows: list[SweepRow] = []
    k_sorted = sorted(set(int(k) for k in k_list))
    per_k = {k: [] for k in k_sorted}
    for cell in cells:
        per_k[cell[0]].append(cell)
    for k in k_sorted:
        block = per_k[k]
        acr_cell = min(block, key=lambda c: c[2])
        apx_cell = min(block, key=lambda c: c[3])
        ratio_cell = min(block, key=lambda c: c[4])
        rows.append(
            SweepRow(
                k=k,
                worst_acr=acr_cell[2],
                gamma_star_dp=acr_cell[1],
                worst_apx=apx_cell[3],
                gamma_star_ce=apx_cell[1],
                worst_ce_over_dp=ratio_cell[4],
                gamma_star_ratio=ratio_cell[1],
            )
        )
    return rows


@dataclass(frozen=True)
class RegretConstantEstimate:
    """Tail behaviour of k^g (alpha_k - beta_k); both fields are estimates."""

    sequence: np.ndarray
    last_value: float
    richardson: float


def regret_constant_estimate(gamma: float, k_max: int) -> RegretConstantEstimate:
    """Estimate the limiting additive-regret constant of the heuristic.

    Returns the full sequence k^g (alpha_k - beta_k) together with its last
    value and a one-step Richardson extrapolation (assuming a 1/k correction).
    The limit has no closed form; both numbers are labelled estimates.  By
    convention the constant is exactly 0 at index 0.
    """
    if abs(gamma) <= _EDGE:
        k = np.arange(1, k_max + 1, dtype=np.float64)
        return RegretConstantEstimate(np.zeros(k_max), 0.0, 0.0)
    _require_open_unit(gamma, "regret_constant_estimate")
    alpha = v_sequence(gamma, k_max) / (1.0 - gamma) ** gamma
    beta = w_sequence(gamma, k_max)
    k = np.arange(1, k_max + 1, dtype=np.float64)
    seq = k**gamma * (alpha - beta)
    last = float(seq[-1])
    if k_max >= 2:
        half = float(seq[k_max // 2 - 1])
        rich = 2.0 * last - half
    else:
        rich = last
    return RegretConstantEstimate(seq, last, rich)


@dataclass(frozen=True)
class ExpansionDiagnostics:
    """Witnesses for the large-k expansions at one (gamma, k) cell."""

    gamma: float
    k: int
    b_k: float          # k^(1-g) Gamma(k)/Gamma(k+1-g)
    p_k: float          # Gamma(k)Gamma(k+1)/(Gamma(k+1-g)Gamma(k+1+g))
    s_sum: float        # sum of the gamma-ratio terms through k
    t_k: float          # s_k - k + (g/2) log k
    witness_dp: float   # k |acr - first-order expansion|
    witness_ce: float   # k |apx - first-order expansion|


def expansion_diagnostics(gamma: float, k: int) -> ExpansionDiagnostics:
    _require_open_unit(gamma, "expansion_diagnostics")
    if k < 1:
        raise ValueError("k must be >= 1")
    a = 1.0 - gamma
    b_k = math.exp(a * math.log(k) + log_gamma(float(k)) - log_gamma(k + a))
    p_k = math.exp(
        log_gamma(float(k))
        + log_gamma(k + 1.0)
        - log_gamma(k + 1.0 - gamma)
        - log_gamma(k + 1.0 + gamma)
    )
    sums = np.cumsum(_ratio_sum_terms(gamma, k))
    s_sum = float(sums[-1])
    v = v_sequence(gamma, k)
    s_k = (1.0 - gamma) * float(v[-1]) ** (1.0 / (1.0 - gamma))
    t_k = s_k - k + 0.5 * gamma * math.log(k)
    approx = large_k_approx(gamma, k, "dp")
    acr = _acr_from_vk(gamma, k, float(v[-1]))
    apx = _apx_from_sum(gamma, k, s_sum)
    return ExpansionDiagnostics(
        gamma=gamma,
        k=k,
        b_k=b_k,
        p_k=p_k,
        s_sum=s_sum,
        t_k=t_k,
        witness_dp=k * abs(acr - approx),
        witness_ce=k * abs(apx - approx),
    )


@dataclass(frozen=True)
class AsymptoticReport:
    """All limit sequences for one index, in units of the (1 - 1/n) quantile."""

    gamma: float
    k_max: int
    v: np.ndarray
    s: np.ndarray
    w: np.ndarray
    acr: np.ndarray
    apx: np.ndarray
    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)

    def to_json(self) -> str:
        per_k = {
            str(k + 1): {
                "v": self.v[k],
                "s": self.s[k],
                "w": self.w[k],
                "acr": self.acr[k],
                "apx": self.apx[k],
                "alpha": self.alpha[k],
                "beta": self.beta[k],
            }
            for k in range(self.k_max)
        }
        return json.dumps({"gamma": self.gamma, "k_max": self.k_max, "by_k": per_k}, indent=2)


def build_report(gamma: float, k_max: int) -> AsymptoticReport:
    _require_open_unit(gamma, "build_report")
    v = v_sequence(gamma, k_max)
    s, _ = s_sequence(gamma, k_max)
    w = w_sequence(gamma, k_max)
    sums = np.cumsum(_ratio_sum_terms(gamma, k_max))
    acr = np.array([_acr_from_vk(gamma, k, float(v[k - 1])) for k in range(1, k_max + 1)])
    apx = np.array([_apx_from_sum(gamma, k, float(sums[k - 1])) for k in range(1, k_max + 1)])
    alpha = v / (1.0 - gamma) ** gamma
    return AsymptoticReport(gamma, k_max, v, s, w, acr, apx, alpha, w.copy())
