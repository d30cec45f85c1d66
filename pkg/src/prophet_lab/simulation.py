"""Trajectory-level Monte Carlo: an oracle independent of the recursions.

Policies are replayed on sampled reward streams; nothing here reuses the
value tables beyond their thresholds, so agreement between a simulated
mean and the corresponding recursion is a genuine two-route check.

Draws are addressed by absolute position in one counter-based stream per
experiment: replication r consumes positions [r*n, (r+1)*n).  Batching is
therefore free to change without changing any estimate, and identical
seeds give bitwise-identical results regardless of scheduling.  Estimates
accumulate in fixed replication order.

Second moments are infinite for indices above 1/2, so a median-of-means
value rides along as a robustness diagnostic; it never enters acceptance
decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import DistributionModel, SeededStream

_BATCH = 1 << 15  # replications per generation batch; BATCH * n stays 4-aligned
_MOM_BLOCKS = 32


class PolicyConfigError(ValueError):
    """Policy payload does not match the instance dimensions."""


@dataclass(frozen=True)
class PolicySpec:
    """A replayable acceptance rule.

    kind is one of:
      dp_thresholds  - payload is the (n+1, k+1) threshold grid of a value
                       table; accept iff the arrival is >= the state's cutoff;
      ce_quantiles   - thresholds are the (1 - j/t) quantiles, computed on
                       the fly from the state (t, j);
      fixed_threshold - payload is a scalar T; accept the first k arrivals
                       strictly above it.
    """

    kind: str
    payload: object = None

    @staticmethod
    def dp_thresholds(table) -> "PolicySpec":
        return PolicySpec("dp_thresholds", np.array(table.thresholds, dtype=np.float64))

    @staticmethod
    def ce_quantiles() -> "PolicySpec":
        return PolicySpec("ce_quantiles")

    @staticmethod
    def fixed_threshold(threshold: float) -> "PolicySpec":
        return PolicySpec("fixed_threshold", float(threshold))

    def describe(self) -> str:
        if self.kind == "fixed_threshold":
            return f"fixed_threshold(T={self.payload:g})"
        return self.kind


@dataclass(frozen=True)
class SimEstimate:
    """Monte Carlo mean with its standard error and provenance."""

    mean: float
    std_error: float
    replications: int
    seed: int
    instance: dict
    median_of_means: float

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "replications": self.replications,
            "seed": self.seed,
            "instance": self.instance,
            "median_of_means": self.median_of_means,
        }


def _instance_descriptor(d: DistributionModel, n: int, k: int, policy: str) -> dict:
    return {"family": d.family, "gamma": d.gamma, "n": n, "k": k, "policy": policy}


def _accumulate(
    values_by_batch: Callable[[int, int], np.ndarray],
    reps: int,
    collect: bool,
) -> tuple[float, float, float, np.ndarray | None]:
    """Stream batches in replication order; return (sum, sumsq, mom, values)."""
    total = 0.0
    total_sq = 0.0
    block_sums = np.zeros(_MOM_BLOCKS)
    block_counts = np.zeros(_MOM_BLOCKS, dtype=np.int64)
    collected = np.empty(reps) if collect else None
    start = 0
    while start < reps:
        stop = min(start + _BATCH, reps)
        vals = values_by_batch(start, stop)
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        if collected is not None:
            collected[start:stop] = vals
        idx = (np.arange(start, stop) * _MOM_BLOCKS) // reps
        np.add.at(block_sums, idx, vals)
        np.add.at(block_counts, idx, 1)
        start = stop
    nonzero = block_counts > 0
    block_means = block_sums[nonzero] / block_counts[nonzero]
    return total, total_sq, float(np.median(block_means)), collected


def _finish(
    total: float, total_sq: float, mom: float, reps: int, seed: int, instance: dict
) -> SimEstimate:
    mean = total / reps
    var = max(total_sq - reps * mean * mean, 0.0) / (reps - 1)
    return SimEstimate(
        mean=mean,
        std_error=math.sqrt(var / reps),
        replications=reps,
        seed=seed,
        instance=instance,
        median_of_means=mom,
    )


def _sample_batch(
    d: DistributionModel, stream: SeededStream, n: int, start: int, stop: int
) -> np.ndarray:
    u = stream.uniforms((stop - start) * n, draw_offset=start * n)
    return np.asarray(d.quantile_upper(1.0 - u)).reshape(stop - start, n)


def _replay(
    d: DistributionModel, policy: PolicySpec, rewards: np.ndarray, n: int, k: int
) -> np.ndarray:
    """Total accepted reward per replication row."""
    rows = rewards.shape[0]
    budget = np.full(rows, k, dtype=np.int64)
    total = np.zeros(rows)
    if policy.kind == "dp_thresholds":
        grid = policy.payload
        for i in range(n):
            t = n - i
            x = rewards[:, i]
            accept = x >= grid[t, budget]  # column 0 is +inf: j = 0 never accepts
            total += np.where(accept, x, 0.0)
            budget -= accept
    elif policy.kind == "ce_quantiles":
        for i in range(n):
            t = n - i
            x = rewards[:, i]
            cutoff = np.asarray(d.quantile_upper(np.minimum(budget / t, 1.0)))
            accept = (x > cutoff) & (budget > 0)
            total += np.where(accept, x, 0.0)
            budget -= accept
    elif policy.kind == "fixed_threshold":
        above = rewards > policy.payload
        taken = np.cumsum(above, axis=1) <= k
        total = np.sum(np.where(above & taken, rewards, 0.0), axis=1)
    else:
        raise PolicyConfigError(f"unknown policy kind {policy.kind!r}")
    return total


def run_policy(
    d: DistributionModel,
    policy: PolicySpec,
    n: int,
    k: int,
    reps: int,
    seed: int,
    collect: bool = False,
) -> SimEstimate | tuple[SimEstimate, np.ndarray]:
    """Unbiased estimate of a policy's expected total accepted reward."""
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if reps < 2:
        raise ValueError("reps must be >= 2")
    if policy.kind == "dp_thresholds":
        shape = getattr(policy.payload, "shape", (0, 0))
        if len(shape) != 2 or shape[0] < n + 1 or shape[1] < k + 1:
            raise PolicyConfigError(
                f"threshold grid {shape} does not cover (n={n}, k={k})"
            )
    if policy.kind == "fixed_threshold" and not (0.0 <= policy.payload <= d.right_endpoint):
        raise PolicyConfigError(f"threshold {policy.payload} outside the support")
    stream = SeededStream(seed)

    def batch(start: int, stop: int) -> np.ndarray:
        rewards = _sample_batch(d, stream, n, start, stop)
        return _replay(d, policy, rewards, n, k)

    total, total_sq, mom, values = _accumulate(batch, reps, collect)
    est = _finish(total, total_sq, mom, reps, seed, _instance_descriptor(d, n, k, policy.describe()))
    return (est, values) if collect else est


def run_prophet(
    d: DistributionModel,
    n: int,
    k: int,
    reps: int,
    seed: int,
    collect: bool = False,
) -> SimEstimate | tuple[SimEstimate, np.ndarray]:
    """Estimate of the clairvoyant benchmark: sum of the top k per replication."""
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if reps < 2:
        raise ValueError("reps must be >= 2")
    stream = SeededStream(seed)

    def batch(start: int, stop: int) -> np.ndarray:
        rewards = _sample_batch(d, stream, n, start, stop)
        if k == n:
            return np.sum(rewards, axis=1)
        top = np.partition(rewards, n - k, axis=1)[:, n - k :]
        return np.sum(top, axis=1)

    total, total_sq, mom, values = _accumulate(batch, reps, collect)
    est = _finish(total, total_sq, mom, reps, seed, _instance_descriptor(d, n, k, "prophet"))
    return (est, values) if collect else est
