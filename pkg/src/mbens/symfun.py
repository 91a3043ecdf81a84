"""Partitions, Vandermonde products and Schur polynomials."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .specfun import DomainError, SignedLogReal

__all__ = [
    "Partition",
    "vandermonde",
    "elementary_symmetric",
    "schur_eval",
    "schur_at_ones",
    "mu_partition",
    "ConditioningWarning",
]

MIN_GAP = 1e-8
PIVOT_RATIO_WARN = 1e12


class ConditioningWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Partition:
    """Non-increasing tuple of non-negative integers (trailing zeros allowed)."""

    parts: tuple[int, ...]

    def __init__(self, parts: Sequence[int] = ()):
        parts = tuple(int(p) for p in parts)
        if any(p < 0 for p in parts):
            raise DomainError(f"partition parts must be non-negative: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise DomainError(f"partition parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        """Number of non-zero parts."""
        return sum(1 for p in self.parts if p > 0)

    def padded(self, n: int) -> tuple[int, ...]:
        if self.length > n:
            raise DomainError(f"partition {self.parts} has more than {n} non-zero parts")
        core = self.parts[: self.length]
        return core + (0,) * (n - len(core))

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]


def _as_partition(lam) -> Partition:
    return lam if isinstance(lam, Partition) else Partition(lam)


def vandermonde(x: Sequence[float]) -> float:
    """``prod_{i<j} (x_i - x_j)``."""
    x = [float(v) for v in x]
    out = 1.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            out *= x[i] - x[j]
    return out


def elementary_symmetric(nu: int, x: Sequence[float]) -> float:
    """e_nu(x_1, ..., x_N) by the one-variable-at-a-time triangle recurrence."""
    n = len(x)
    if not 0 <= nu <= n:
        raise DomainError(f"elementary symmetric index {nu} outside 0..{n}")
    e = [1.0] + [0.0] * n
    for i, xi in enumerate(x, start=1):
        for j in range(i, 0, -1):
            e[j] += xi * e[j - 1]
    return e[nu]


def _lu_det(mat: np.ndarray) -> float:
    """Determinant by Gaussian elimination with partial pivoting in long double."""
    a = np.array(mat, dtype=np.longdouble)
    if not np.all(np.isfinite(a)):
        raise DomainError("non-finite matrix entry")
    n = len(a)
    det = np.longdouble(1)
    pivots = []
    for col in range(n):
        row = col + int(np.argmax(np.abs(a[col:, col])))
        if a[row, col] == 0:
            return 0.0
        if row != col:
            a[[col, row]] = a[[row, col]]
            det = -det
        piv = a[col, col]
        pivots.append(abs(piv))
        det *= piv
        a[col + 1 :, col:] -= np.outer(a[col + 1 :, col] / piv, a[col, col:])
    ratio = max(pivots) / min(pivots)
    if ratio > PIVOT_RATIO_WARN:
        warnings.warn(
            f"pivot ratio {float(ratio):.3g} exceeds {PIVOT_RATIO_WARN:g}",
            ConditioningWarning,
            stacklevel=3,
        )
    return float(det)


def schur_eval(lam, x: Sequence[float]) -> float:
    """Schur polynomial s_lambda(x) as a ratio of alternants.

    Needs pairwise distinct points; at coincident points use
    :func:`schur_at_ones` (the only confluent case required here).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    parts = _as_partition(lam).padded(n)
    if n == 0:
        return 1.0
    gaps = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() <= MIN_GAP:
        raise DomainError(
            "schur_eval needs pairwise distinct points (min gap > 1e-8); "
            "use schur_at_ones for the principal specialisation"
        )
    xl = x.astype(np.longdouble)
    exps = np.array([n - 1 - i + parts[i] for i in range(n)])
    num = _lu_det(xl[None, :] ** exps[:, None])
    den = _lu_det(xl[None, :] ** np.arange(n - 1, -1, -1)[:, None])
    return num / den


def schur_at_ones(lam, n: int) -> SignedLogReal:
    """s_lambda(1, ..., 1) with n ones, by the hook-content style product."""
    parts = _as_partition(lam).padded(n)
    logmag = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            logmag += math.log(parts[i] - parts[j] + j - i) - math.log(j - i)
    return SignedLogReal(1, logmag)


def mu_partition(theta, k: int, j: int) -> Partition:
    """Partition with parts (theta-1)(k-l) + theta for l <= j, (theta-1)(k-l) after.

    With integer theta, s_{mu(r)}(x) / s_{mu(0)}(x) = e_r(x_1^theta, ..., x_k^theta).
    """
    if float(theta) != int(theta) or theta < 1:
        raise DomainError(f"mu_partition needs a positive integer theta, got {theta}")
    if not 0 <= j <= k:
        raise DomainError(f"need 0 <= j <= k, got j={j}, k={k}")
    t = int(theta)
    return Partition([(t - 1) * (k - l) + (t if l <= j else 0) for l in range(1, k + 1)])
