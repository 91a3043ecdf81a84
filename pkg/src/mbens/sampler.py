"""Metropolis sampling of Muttalib-Borodin joint densities.

The chain is a statistical cross-check of kernel predictions, not a
production sampler.  Each step is one sweep of single-site Gaussian
proposals made in an unconstrained coordinate u:

* (0, inf): x = exp(u)
* (0, 1):   x = 1 / (1 + exp(-u))
* (-1, 1):  x = tanh(u)
* R:        x = u

with the Jacobian folded into the acceptance ratio.  Per-site step scales
are tuned during burn-in only, so the recorded part of the chain is a
plain Metropolis chain with a fixed proposal.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .specfun import DomainError
from .weights import EnsembleSpec

__all__ = [
    "ChainState",
    "ChainResult",
    "TuningError",
    "log_target",
    "run_chain",
    "linear_statistic",
    "write_samples_csv",
    "N_BATCHES",
    "TARGET_ACCEPTANCE",
]

N_BATCHES = 16
TARGET_ACCEPTANCE = (0.3, 0.5)
DEFAULT_BURN_FRACTION = 0.2
_TUNE_EVERY = 50


class TuningError(RuntimeError):
    """The proposal could not be tuned to a non-zero acceptance rate."""


def _sgn_pow(x: float, theta: float) -> float:
    return math.copysign(abs(x) ** theta, x)


def log_target(spec: EnsembleSpec, positions: Sequence[float]) -> float:
    """Unnormalised log joint density; -inf on coincident points or outside the support.

    Half-line: sum log|x_j - x_i| + sum log|x_j^theta - x_i^theta| + sum log w(x_k).
    Full line: the second product uses sgn(x)|x|^theta.
    """
    x = [float(v) for v in positions]
    w, th = spec.weight, spec.theta
    total = 0.0
    for v in x:
        if not w.in_support(v):
            return -math.inf
        total += w.log_density(v)
    s = [_sgn_pow(v, th) for v in x]
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            d1 = abs(x[j] - x[i])
            d2 = abs(s[j] - s[i])
            if d1 == 0 or d2 == 0:
                return -math.inf
            total += math.log(d1) + math.log(d2)
    return total


# ---------------------------------------------------------------- transforms


@dataclass(frozen=True)
class _Map:
    to_x: Callable[[float], float]
    to_u: Callable[[float], float]
    log_jac: Callable[[float, float], float]  # (u, x) -> log dx/du


def _logistic(u: float) -> float:
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


_MAPS = {
    (0.0, math.inf): _Map(
        lambda u: math.exp(u) if u < 709.0 else math.inf,
        math.log,
        lambda u, x: u,
    ),
    (0.0, 1.0): _Map(
        _logistic,
        lambda x: math.log(x) - math.log1p(-x),
        lambda u, x: -abs(u) - 2.0 * math.log1p(math.exp(-abs(u))),
    ),
    (-1.0, 1.0): _Map(
        math.tanh,
        math.atanh,
        lambda u, x: math.log(4.0) - 2.0 * abs(u) - 2.0 * math.log1p(math.exp(-2.0 * abs(u))),
    ),
    (-math.inf, math.inf): _Map(lambda u: u, lambda x: x, lambda u, x: 0.0),
}


def _initial_positions(spec: EnsembleSpec) -> list[float]:
    n = spec.n
    lo, hi = spec.weight.support
    if spec.fullline:
        # symmetric, away from the origin where |x|^{2c} may vanish or blow up
        if n == 1:
            return [0.5]
        return list(0.8 * np.linspace(-1.0, 1.0, n) + 0.05)
    if hi == 1.0:
        return list((np.arange(n) + 0.5) / n)
    return list(0.5 + np.arange(n, dtype=float))


# ---------------------------------------------------------------- chain


@dataclass
class ChainState:
    """Mutable chain state; ``log_density`` tracks ``log_target`` of ``positions``."""

    positions: np.ndarray
    log_density: float
    rng: np.random.Generator
    step_scale: np.ndarray

    def check(self, spec: EnsembleSpec, tol: float = 1e-9) -> bool:
        """Recompute the log density and compare (absolute tolerance scaled by magnitude)."""
        fresh = log_target(spec, self.positions)
        return abs(fresh - self.log_density) <= tol * max(1.0, abs(fresh))


@dataclass(frozen=True)
class ChainResult:
    spec: EnsembleSpec
    seed: int
    samples: np.ndarray  # (kept steps, N), after burn-in
    acceptance_rate: float
    burn_in: int
    step_scale: np.ndarray = field(repr=False)

    def meta(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "seed": self.seed,
            "burn_in": self.burn_in,
            "kept": int(self.samples.shape[0]),
            "acceptance_rate": self.acceptance_rate,
        }


def _site_delta(spec, x, s, i, xi, si) -> float:
    """log_target(x with x_i -> xi) - log_target(x), or -inf."""
    w = spec.weight
    delta = w.log_density(xi) - w.log_density(x[i])
    for j in range(len(x)):
        if j == i:
            continue
        d1 = abs(xi - x[j])
        d2 = abs(si - s[j])
        if d1 == 0.0 or d2 == 0.0:
            return -math.inf
        delta += math.log(d1 / abs(x[i] - x[j])) + math.log(d2 / abs(s[i] - s[j]))
    return delta


def run_chain(
    spec: EnsembleSpec,
    steps: int,
    seed: int,
    burn_in: int | None = None,
    initial: Sequence[float] | None = None,
    step_scale: float = 0.5,
) -> ChainResult:
    """Run ``burn_in + steps`` sweeps and return the last ``steps`` of them.

    ``burn_in`` defaults to 20% of ``steps``.  During burn-in the per-site
    scale is adjusted every few sweeps toward the middle of
    TARGET_ACCEPTANCE; afterwards it is frozen.
    """
    if int(steps) != steps or steps < 1:
        raise DomainError(f"steps must be a positive integer, got {steps}")
    steps = int(steps)
    burn = int(round(DEFAULT_BURN_FRACTION * steps)) if burn_in is None else int(burn_in)
    if burn < 0:
        raise DomainError("burn_in must be non-negative")
    w, th, n = spec.weight, spec.theta, spec.n
    tmap = _MAPS[w.support]
    x0 = list(initial) if initial is not None else _initial_positions(spec)
    if len(x0) != n:
        raise DomainError(f"initial positions must have length N={n}")
    lt = log_target(spec, x0)
    if not math.isfinite(lt):
        raise DomainError("initial positions have zero density")

    rng = np.random.default_rng(seed)
    state = ChainState(np.array(x0, dtype=float), lt, rng, np.full(n, float(step_scale)))
    x = [float(v) for v in x0]
    u = [tmap.to_u(v) for v in x]
    s = [_sgn_pow(v, th) for v in x]
    jac = [tmap.log_jac(ui, xi) for ui, xi in zip(u, x)]
    scale = [float(step_scale)] * n
    out = np.empty((steps, n))
    accepted_site = [0] * n
    accepted_total = 0
    lo_acc, hi_acc = TARGET_ACCEPTANCE
    mid_acc = 0.5 * (lo_acc + hi_acc)

    total = burn + steps
    block = 4096
    for start in range(0, total, block):
        m = min(block, total - start)
        noise = rng.standard_normal((m, n))
        logu = np.log(rng.random((m, n)))
        for r in range(m):
            t = start + r
            nz, lu = noise[r], logu[r]
            for i in range(n):
                ui = u[i] + scale[i] * nz[i]
                xi = tmap.to_x(ui)
                if not w.in_support(xi):
                    continue
                ji = tmap.log_jac(ui, xi)
                si = _sgn_pow(xi, th)
                delta = _site_delta(spec, x, s, i, xi, si)
                if delta == -math.inf:
                    continue
                if lu[i] < delta + ji - jac[i]:
                    u[i], x[i], s[i], jac[i] = ui, xi, si, ji
                    lt += delta
                    accepted_site[i] += 1
                    if t >= burn:
                        accepted_total += 1
            if t < burn and (t + 1) % _TUNE_EVERY == 0:
                for i in range(n):
                    rate = accepted_site[i] / _TUNE_EVERY
                    scale[i] *= math.exp(rate - mid_acc) if rate > 0 else 0.5
                    accepted_site[i] = 0
            if t == burn - 1:
                accepted_site = [0] * n
            if t >= burn:
                out[t - burn] = x

    acceptance = accepted_total / (steps * n)
    if acceptance == 0.0:
        raise TuningError(
            f"no proposal accepted after burn-in ({burn} sweeps); final scales {scale}"
        )
    state.positions = np.array(x)
    state.log_density = lt
    state.step_scale = np.array(scale)
    return ChainResult(spec, int(seed), out, acceptance, burn, state.step_scale)


# ---------------------------------------------------------------- statistics


def _statistic(f_id: str, threshold: float | None) -> Callable[[np.ndarray], np.ndarray]:
    if f_id == "sum_x":
        return lambda xs: xs.sum(axis=1)
    if f_id == "sum_x2":
        return lambda xs: (xs * xs).sum(axis=1)
    if f_id == "count_below":
        if threshold is None:
            raise DomainError("count_below needs a threshold")
        return lambda xs: (xs < threshold).sum(axis=1).astype(float)
    raise DomainError(f"unknown statistic {f_id!r}; use sum_x, sum_x2 or count_below")


def linear_statistic(samples, f_id: str, threshold: float | None = None) -> tuple[float, float]:
    """Mean of a linear statistic and its batch-means standard error (N_BATCHES batches)."""
    xs = np.atleast_2d(np.asarray(samples, dtype=float))
    if xs.shape[0] < N_BATCHES:
        raise DomainError(f"need at least {N_BATCHES} samples for batch means, got {xs.shape[0]}")
    vals = _statistic(f_id, threshold)(xs)
    usable = (len(vals) // N_BATCHES) * N_BATCHES
    batches = vals[:usable].reshape(N_BATCHES, -1).mean(axis=1)
    stderr = float(np.std(batches, ddof=1) / math.sqrt(N_BATCHES))
    return float(vals.mean()), stderr


def write_samples_csv(result: ChainResult, stream, every: int = 1) -> int:
    """Dump ``step, x_1..x_N`` with a JSON metadata comment line; returns the row count."""
    stream.write("# " + json.dumps(result.meta()) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["step"] + [f"x_{i + 1}" for i in range(result.spec.n)])
    rows = 0
    for k in range(0, result.samples.shape[0], max(1, int(every))):
        writer.writerow([result.burn_in + k] + [format(v, ".17g") for v in result.samples[k]])
        rows += 1
    return rows
