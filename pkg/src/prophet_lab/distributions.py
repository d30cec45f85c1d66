"""Reward-law families classified by their extreme value index.

Four canonical families cover the three tail regimes that matter for the
selection recursions: Pareto and Frechet (heavy tails, index in (0, 1)),
Exponential (light tail, index 0), and BoundedPower (finite endpoint,
index < 0; the uniform law is the index -1 member).  Each family exposes
the exact quantile, tail, tail-integral, mean, and sampling primitives
the recursions consume.  Scale constants are pinned (Pareto starts at 1,
BoundedPower ends at 1 unless overridden, Exponential has rate 1): every
ratio computed downstream is scale free.

Laws with index >= 1 have infinite mean and are rejected at construction;
the performance ratios are not well defined there.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .numerics import gamma_ratio, integrate_adaptive, log_gamma

_GAMMA_EDGE = 1e-6  # heavy-tail indices this close to 0 or 1 are rejected


def _as_array(x):
    return np.asarray(x, dtype=np.float64)


class DistributionModel:
    """Common surface for the reward-law families.

    Subclasses provide closed forms wherever one exists; only the Frechet
    tail integral needs quadrature (cached, see FrechetLaw).  Instances are
    immutable after construction and safe to share across threads.
    """

    family: str
    gamma: float
    left_endpoint: float
    right_endpoint: float

    # -- family-specific cores -------------------------------------------

    def _cdf(self, x):
        raise NotImplementedError

    def _tail(self, x):
        """Exact upper tail on the support; never formed as 1 - cdf, which
        loses the tiny tail masses the recursions integrate over."""
        raise NotImplementedError

    def quantile_upper(self, s):
        """Value of the generalized inverse at 1 - s, i.e. F_inv(1 - s).

        Taking the upper tail mass s directly avoids the 1 - p cancellation
        for the extreme quantiles the recursions live on.
        """
        raise NotImplementedError

    def _tail_integral_body(self, t):
        """Integral of the tail from t to the right endpoint, t >= x_min."""
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    # -- shared behaviour --------------------------------------------------

    def cdf(self, x):
        """P(X <= x); arguments outside the support clamp to 0 or 1."""
        x = _as_array(x)
        lo, hi = self.left_endpoint, self.right_endpoint
        inside = self._cdf(np.clip(x, lo, hi))
        out = np.where(x < lo, 0.0, np.where(x >= hi, 1.0, inside))
        return float(out) if out.ndim == 0 else out

    def tail(self, x):
        """P(X > x); arguments outside the support clamp to 1 or 0."""
        x = _as_array(x)
        lo, hi = self.left_endpoint, self.right_endpoint
        inside = self._tail(np.clip(x, lo, hi))
        out = np.where(x < lo, 1.0, np.where(x >= hi, 0.0, inside))
        return float(out) if out.ndim == 0 else out

    def quantile(self, p):
        """Generalized inverse F_inv(p) = inf{x : F(x) >= p} for p in [0, 1]."""
        p = _as_array(p)
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("quantile requires p in [0, 1]")
        out = self.quantile_upper(1.0 - p)
        return float(out) if np.ndim(out) == 0 else out

    def tail_integral(self, t):
        """I(t) = integral of P(X > u) du from t to the right endpoint.

        For t below the left endpoint the tail is identically 1 there, so
        I(t) = (x_min - t) + I(x_min); in particular I(0) is the mean.
        Raises for t beyond the right endpoint.
        """
        t = _as_array(t)
        hi = self.right_endpoint
        if np.any(t > hi):
            over = float(np.max(t - hi))
            if over > 1e-9 * max(1.0, abs(hi)):
                raise ValueError(f"tail_integral argument exceeds endpoint {hi} by {over:g}")
            t = np.minimum(t, hi)
        lo = self.left_endpoint
        body = self._tail_integral_body(np.maximum(t, lo))
        out = np.where(t < lo, (lo - t) + self._i_at_left, body)
        return float(out) if out.ndim == 0 else out

    @property
    def _i_at_left(self) -> float:
        return self.mean() - self.left_endpoint

    def tail_integral_scalar(self, t: float) -> float | None:
        """Fast scalar path; None when the family has no closed form."""
        return None

    def quantile_upper_scalar(self, s: float) -> float | None:
        """Fast scalar F_inv(1 - s); None when no closed form exists."""
        return None

    def sample(self, stream: "SeededStream", count: int) -> np.ndarray:
        """Inverse-transform draws, fully determined by the stream state."""
        if count < 0:
            raise ValueError("count must be >= 0")
        if count == 0:
            return np.empty(0, dtype=np.float64)
        u = stream.uniforms(count)
        return self.quantile_upper(1.0 - u)

    def evt_scales(self, n: int) -> tuple[float, float]:
        """Location/scale pair (U_n, a_n) of the top order statistics.

        U_n is the (1 - 1/n) quantile.  The companion scale a_n depends on
        the tail regime: U_n itself for heavy tails, the quantile increment
        over one e-folding for index 0, and the endpoint gap for index < 0.
        """
        if n < 2:
            raise ValueError("evt_scales requires n >= 2")
        u_n = float(self.quantile_upper(1.0 / n))
        if self.gamma > 0.0:
            return u_n, u_n
        if self.gamma == 0.0:
            a_n = float(self.quantile_upper(1.0 / (math.e * n))) - u_n
            return u_n, a_n
        return u_n, self.right_endpoint - u_n

    def __repr__(self) -> str:
        return f"{type(self).__name__}(gamma={self.gamma:g})"


class ParetoLaw(DistributionModel):
    """Tail x^(-1/gamma) on [1, inf); index gamma in (0, 1)."""

    family = "pareto"

    def __init__(self, gamma: float):
        if not (_GAMMA_EDGE < gamma < 1.0 - _GAMMA_EDGE):
            raise ValueError(f"pareto requires gamma in (0, 1), got {gamma}")
        self.gamma = float(gamma)
        self.left_endpoint = 1.0
        self.right_endpoint = math.inf

    def _cdf(self, x):
        return 1.0 - x ** (-1.0 / self.gamma)

    def _tail(self, x):
        return x ** (-1.0 / self.gamma)

    def quantile_upper(self, s):
        with np.errstate(divide="ignore"):
            return _as_array(s) ** (-self.gamma)

    def _tail_integral_body(self, t):
        g = self.gamma
        return (g / (1.0 - g)) * t ** (1.0 - 1.0 / g)

    def tail_integral_scalar(self, t: float):
        g = self.gamma
        if t <= 1.0:
            return (1.0 - t) + g / (1.0 - g)
        return (g / (1.0 - g)) * t ** (1.0 - 1.0 / g)

    def quantile_upper_scalar(self, s: float):
        return s ** -self.gamma if s > 0.0 else math.inf

    def mean(self) -> float:
        return 1.0 / (1.0 - self.gamma)


class FrechetLaw(DistributionModel):
    """CDF exp(-x^(-1/gamma)) on (0, inf); index gamma in (0, 1).

    The tail integral has no closed form.  It is evaluated once on a
    geometric grid (one adaptive tail integral plus per-cell fixed-order
    panels accumulated right to left) and served by cubic Hermite
    interpolation with the exact derivative -tail(t) at the nodes.  The
    cache is built lazily under a lock; interpolation error is below 1e-8
    relative.
    """

    family = "frechet"

    _T_LO = 1e-3   # below this the tail equals 1.0 to double precision
    _T_HI = 1e9

    def __init__(self, gamma: float):
        if not (_GAMMA_EDGE < gamma < 1.0 - _GAMMA_EDGE):
            raise ValueError(f"frechet requires gamma in (0, 1), got {gamma}")
        self.gamma = float(gamma)
        self.left_endpoint = 0.0
        self.right_endpoint = math.inf
        self._cache_lock = threading.Lock()
        self._cache: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def _cdf(self, x):
        x = _as_array(x)
        with np.errstate(divide="ignore"):
            return np.exp(-np.where(x > 0.0, x, np.inf) ** (-1.0 / self.gamma))

    def _tail(self, x):
        x = _as_array(x)
        with np.errstate(divide="ignore"):
            return -np.expm1(-np.where(x > 0.0, x, np.inf) ** (-1.0 / self.gamma))

    def quantile_upper(self, s):
        s = _as_array(s)
        with np.errstate(divide="ignore"):
            # -log(1 - s) via log1p for the tiny tail masses that matter
            ell = -np.log1p(-s)
            out = np.where(ell > 0.0, ell, np.inf) ** (-self.gamma)
        return out

    def mean(self) -> float:
        return math.exp(log_gamma(1.0 - self.gamma))

    def _far_tail_integral(self, t):
        """I(t) for t with t^(-1/gamma) <= 1e-9, by expanding the exponential.

        I(t) = sum_j (-1)^(j+1)/j! * t^(1 - j/gamma) / (j/gamma - 1); the terms
        shrink by a factor t^(-1/gamma) each, so four terms give relative
        accuracy far below double precision here.
        """
        t = _as_array(t)
        g = self.gamma
        total = np.zeros_like(t)
        sign = 1.0
        fact = 1.0
        for j in range(1, 5):
            fact *= j
            total += sign / fact * t ** (1.0 - j / g) / (j / g - 1.0)
            sign = -sign
        return total

    def _build_cache(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with self._cache_lock:
            if self._cache is not None:
                return self._cache
            # the tail transitions over a log-t scale of order gamma, so the
            # node spacing shrinks with it to keep the Hermite error < 1e-8
            step = min(0.02, max(0.04 * self.gamma, 0.002))
            ts = np.exp(np.arange(math.log(self._T_LO), math.log(self._T_HI) + step, step))
            anchor = float(self._far_tail_integral(ts[-1]))
            # per-cell 15-node Gauss-Legendre, accumulated right to left
            nodes, weights = np.polynomial.legendre.leggauss(15)
            a, b = ts[:-1], ts[1:]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            pts = mid[:, None] + half[:, None] * nodes[None, :]
            cell = half * (self.tail(pts) @ weights)
            vals = np.empty_like(ts)
            vals[-1] = anchor
            vals[:-1] = anchor + np.cumsum(cell[::-1])[::-1]
            # interpolate log I against log t: the curve is near-linear there
            # and the Hermite error then controls *relative* accuracy directly
            log_slopes = -ts * self.tail(ts) / vals
            self._cache = (np.log(ts), np.log(vals), log_slopes)
            return self._cache

    def _tail_integral_body(self, t):
        log_ts, log_vals, slopes = self._cache if self._cache is not None else self._build_cache()
        t = _as_array(t)
        scalar = t.ndim == 0
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.empty_like(t)

        low = t < self._T_LO
        if np.any(low):
            i_lo = math.exp(log_vals[0])
            out[low] = i_lo + (self._T_LO - t[low])
        high = t >= self._T_HI
        if np.any(high):
            out[high] = self._far_tail_integral(t[high])
        mid = ~(low | high)
        if np.any(mid):
            s_q = np.log(t[mid])
            idx = np.clip(np.searchsorted(log_ts, s_q, side="right") - 1, 0, len(log_ts) - 2)
            h = log_ts[idx + 1] - log_ts[idx]
            s = (s_q - log_ts[idx]) / h
            h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
            h10 = s * (1.0 - s) ** 2
            h01 = s * s * (3.0 - 2.0 * s)
            h11 = s * s * (s - 1.0)
            log_i = (
                h00 * log_vals[idx]
                + h10 * h * slopes[idx]
                + h01 * log_vals[idx + 1]
                + h11 * h * slopes[idx + 1]
            )
            out[mid] = np.exp(log_i)
        return out[0] if scalar else out


class BoundedPowerLaw(DistributionModel):
    """Tail ((x* - x)/x*)^(-1/gamma) on [0, x*]; index gamma < 0.

    gamma = -1 with x* = 1 is the uniform law on [0, 1].
    """

    family = "bounded_power"

    def __init__(self, gamma: float, endpoint: float = 1.0):
        if not gamma < 0.0:
            raise ValueError(f"bounded_power requires gamma < 0, got {gamma}")
        if not (endpoint > 0.0 and math.isfinite(endpoint)):
            raise ValueError(f"endpoint must be positive and finite, got {endpoint}")
        self.gamma = float(gamma)
        self.left_endpoint = 0.0
        self.right_endpoint = float(endpoint)

    def _cdf(self, x):
        z = 1.0 - _as_array(x) / self.right_endpoint
        return 1.0 - z ** (-1.0 / self.gamma)

    def _tail(self, x):
        z = 1.0 - _as_array(x) / self.right_endpoint
        return z ** (-1.0 / self.gamma)

    def quantile_upper(self, s):
        return self.right_endpoint * (1.0 - _as_array(s) ** (-self.gamma))

    def _tail_integral_body(self, t):
        # integral of z^(-1/gamma) dz from 0 to 1 - t/x*, scaled by x*
        expo = 1.0 - 1.0 / self.gamma
        z = 1.0 - _as_array(t) / self.right_endpoint
        return self.right_endpoint * z ** expo / expo

    def tail_integral_scalar(self, t: float):
        if t < 0.0:
            return -t + self.mean()
        expo = 1.0 - 1.0 / self.gamma
        z = 1.0 - t / self.right_endpoint
        return self.right_endpoint * z ** expo / expo

    def quantile_upper_scalar(self, s: float):
        return self.right_endpoint * (1.0 - s ** -self.gamma)

    def mean(self) -> float:
        return self.right_endpoint / (1.0 - 1.0 / self.gamma)


class ExponentialLaw(DistributionModel):
    """Unit-rate exponential; extreme value index 0."""

    family = "exponential"

    def __init__(self):
        self.gamma = 0.0
        self.left_endpoint = 0.0
        self.right_endpoint = math.inf

    def _cdf(self, x):
        return -np.expm1(-_as_array(x))

    def _tail(self, x):
        return np.exp(-_as_array(x))

    def quantile_upper(self, s):
        with np.errstate(divide="ignore"):
            return -np.log(_as_array(s))

    def _tail_integral_body(self, t):
        return np.exp(-_as_array(t))

    def tail_integral_scalar(self, t: float):
        if t < 0.0:
            return -t + 1.0
        return math.exp(-t)

    def quantile_upper_scalar(self, s: float):
        return -math.log(s) if s > 0.0 else math.inf

    def mean(self) -> float:
        return 1.0

    def evt_scales(self, n: int) -> tuple[float, float]:
        if n < 2:
            raise ValueError("evt_scales requires n >= 2")
        return math.log(n), 1.0


def pareto(gamma: float) -> ParetoLaw:
    return ParetoLaw(gamma)


def frechet(gamma: float) -> FrechetLaw:
    return FrechetLaw(gamma)


def bounded_power(gamma: float, endpoint: float = 1.0) -> BoundedPowerLaw:
    return BoundedPowerLaw(gamma, endpoint)


def uniform() -> BoundedPowerLaw:
    return BoundedPowerLaw(-1.0, 1.0)


def exponential() -> ExponentialLaw:
    return ExponentialLaw()


_FAMILIES = {
    "pareto": lambda gamma, endpoint: ParetoLaw(gamma),
    "frechet": lambda gamma, endpoint: FrechetLaw(gamma),
    "bounded_power": lambda gamma, endpoint: BoundedPowerLaw(gamma, endpoint if endpoint else 1.0),
    "exponential": lambda gamma, endpoint: ExponentialLaw(),
}


def from_config(spec: dict) -> DistributionModel:
    """Build a law from a run-config mapping.

    Expected keys: "family" in {pareto, frechet, bounded_power, exponential},
    "gamma" (ignored for exponential), optional "endpoint" (bounded_power only).
    """
    family = spec.get("family")
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    gamma = spec.get("gamma")
    endpoint = spec.get("endpoint")
    if family == "exponential":
        if gamma not in (None, 0, 0.0):
            raise ValueError("exponential law has index 0; omit gamma or set it to 0")
    elif gamma is None:
        raise ValueError(f"family {family!r} requires a gamma value")
    if endpoint is not None and family != "bounded_power":
        raise ValueError("endpoint is only meaningful for bounded_power")
    return _FAMILIES[family](gamma, endpoint)


_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededStream:
    """Counter-based random stream: one Philox keyed by (seed, stream_index).

    Identical (seed, stream_index) pairs reproduce identical draw
    sequences regardless of how the draws are batched, because position
    in the stream is addressed absolutely via ``draw_offset``.
    """

    seed: int
    stream_index: int = 0

    def _bit_generator(self, draw_offset: int) -> np.random.Philox:
        key = (self.seed & _MASK64) | ((self.stream_index & _MASK64) << 64)
        bg = np.random.Philox(key=key)
        if draw_offset:
            if draw_offset % 4:
                raise ValueError("draw_offset must be a multiple of 4")
            bg.advance(draw_offset // 4)
        return bg

    def uniforms(self, count: int, draw_offset: int = 0) -> np.ndarray:
        """count doubles in [0, 1) starting at absolute position draw_offset."""
        gen = np.random.Generator(self._bit_generator(draw_offset))
        return gen.random(count)
