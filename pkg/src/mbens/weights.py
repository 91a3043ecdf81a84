"""Classical weights, their moments, and the even-weight parity reduction.

Half-line weights::

    Laguerre(a)            x^a e^{-x}            x > 0
    Jacobi(a, b)           x^a (1-x)^b           0 < x < 1
    JacobiPrime(alpha, beta)  x^alpha (1+x)^{-beta}   x > 0

Full-line (even) weights::

    GenGaussian(c)         |x|^{2c} e^{-x^2}
    GenSymJacobi(c, alpha) |x|^{2c} (1-x^2)^alpha    |x| < 1
    GenCauchy(c, alpha)    |x|^{2c} (1+x^2)^{-alpha}

Under y = x^2 an even weight w splits into the half-line weights
``y^{-1/2} w(y^{1/2})`` (even part) and ``y^{theta/2} w(y^{1/2})`` (odd part),
which are again classical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from typing import ClassVar

import mpmath

from .specfun import DomainError, SignedLogReal, gamma_ratio

__all__ = [
    "Weight",
    "Laguerre",
    "Jacobi",
    "JacobiPrime",
    "GenGaussian",
    "GenSymJacobi",
    "GenCauchy",
    "EnsembleSpec",
    "weight_eval",
    "moment",
    "moment_mp",
    "parity_reduce",
    "even_part",
    "odd_part",
    "check_size",
    "fullline_moment",
    "fullline_moment_mp",
    "weight_from_json",
    "FAMILIES",
]


@dataclass(frozen=True)
class Weight:
    family: ClassVar[str] = ""
    fullline: ClassVar[bool] = False
    support: ClassVar[tuple[float, float]] = (0.0, math.inf)

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{self.family}: parameter {f.name} must be a finite real")
            object.__setattr__(self, f.name, float(value))
        self._check()

    def _check(self):
        pass

    @property
    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> dict:
        return {"family": self.family, "params": self.params}

    def density(self, x: float) -> float:
        raise NotImplementedError

    def log_density(self, x: float) -> float:
        d = self.density(x)
        return math.log(d) if d > 0 else -math.inf

    def in_support(self, x: float) -> bool:
        lo, hi = self.support
        return lo < x < hi


def _power(x: float, e: float) -> float:
    """x^e for x >= 0 with the endpoint convention 0^0 = 1, 0^{e<0} = inf."""
    if x > 0:
        return x**e
    if e == 0:
        return 1.0
    return 0.0 if e > 0 else math.inf


@dataclass(frozen=True)
class Laguerre(Weight):
    a: float
    family: ClassVar[str] = "laguerre"

    def _check(self):
        if not self.a > -1:
            raise DomainError(f"laguerre: need a > -1, got a={self.a}")

    def density(self, x):
        if x < 0:
            return 0.0
        return _power(x, self.a) * math.exp(-x)

    def log_density(self, x):
        if x <= 0:
            return -math.inf
        return self.a * math.log(x) - x


@dataclass(frozen=True)
class Jacobi(Weight):
    a: float
    b: float
    family: ClassVar[str] = "jacobi"
    support: ClassVar[tuple[float, float]] = (0.0, 1.0)

    def _check(self):
        if not self.a > -1:
            raise DomainError(f"jacobi: need a > -1, got a={self.a}")
        if not self.b > -1:
            raise DomainError(f"jacobi: need b > -1, got b={self.b}")

    def density(self, x):
        if x < 0 or x > 1:
            return 0.0
        return _power(x, self.a) * _power(1.0 - x, self.b)

    def log_density(self, x):
        if not 0 < x < 1:
            return -math.inf
        return self.a * math.log(x) + self.b * math.log1p(-x)


@dataclass(frozen=True)
class JacobiPrime(Weight):
    alpha: float
    beta: float
    family: ClassVar[str] = "jacobi_prime"

    def _check(self):
        if not self.alpha > -1:
            raise DomainError(f"jacobi_prime: need alpha > -1, got alpha={self.alpha}")
        if not self.beta > self.alpha + 1:
            raise DomainError(
                f"jacobi_prime: need beta > alpha + 1 for integrability, "
                f"got alpha={self.alpha}, beta={self.beta}"
            )

    def density(self, x):
        if x < 0:
            return 0.0
        return _power(x, self.alpha) * (1.0 + x) ** (-self.beta)

    def log_density(self, x):
        if x <= 0:
            return -math.inf
        return self.alpha * math.log(x) - self.beta * math.log1p(x)


@dataclass(frozen=True)
class GenGaussian(Weight):
    c: float
    family: ClassVar[str] = "gen_gaussian"
    fullline: ClassVar[bool] = True
    support: ClassVar[tuple[float, float]] = (-math.inf, math.inf)

    def _check(self):
        if not self.c > -0.5:
            raise DomainError(f"gen_gaussian: need c > -1/2, got c={self.c}")

    def density(self, x):
        return _power(abs(x), 2 * self.c) * math.exp(-x * x)

    def log_density(self, x):
        if x == 0:
            return math.log(self.density(0.0)) if self.c <= 0 else -math.inf
        return 2 * self.c * math.log(abs(x)) - x * x


@dataclass(frozen=True)
class GenSymJacobi(Weight):
    c: float
    alpha: float
    family: ClassVar[str] = "gen_sym_jacobi"
    fullline: ClassVar[bool] = True
    support: ClassVar[tuple[float, float]] = (-1.0, 1.0)

    def _check(self):
        if not self.c > -0.5:
            raise DomainError(f"gen_sym_jacobi: need c > -1/2, got c={self.c}")
        if not self.alpha > -1:
            raise DomainError(f"gen_sym_jacobi: need alpha > -1, got alpha={self.alpha}")

    def density(self, x):
        if abs(x) > 1:
            return 0.0
        return _power(abs(x), 2 * self.c) * _power(1.0 - x * x, self.alpha)

    def log_density(self, x):
        if not -1 < x < 1 or x == 0:
            return math.log(self.density(x)) if self.density(x) > 0 else -math.inf
        return 2 * self.c * math.log(abs(x)) + self.alpha * math.log1p(-x * x)


@dataclass(frozen=True)
class GenCauchy(Weight):
    c: float
    alpha: float
    family: ClassVar[str] = "gen_cauchy"
    fullline: ClassVar[bool] = True
    support: ClassVar[tuple[float, float]] = (-math.inf, math.inf)

    def _check(self):
        if not self.c > -0.5:
            raise DomainError(f"gen_cauchy: need c > -1/2, got c={self.c}")
        if not self.alpha > self.c + 0.5:
            raise DomainError(
                f"gen_cauchy: need alpha > c + 1/2 for integrability, "
                f"got c={self.c}, alpha={self.alpha}"
            )

    def density(self, x):
        return _power(abs(x), 2 * self.c) * (1.0 + x * x) ** (-self.alpha)

    def log_density(self, x):
        if x == 0:
            d = self.density(0.0)
            return math.log(d) if d > 0 else -math.inf
        return 2 * self.c * math.log(abs(x)) - self.alpha * math.log1p(x * x)


FAMILIES: dict[str, type[Weight]] = {
    cls.family: cls
    for cls in (Laguerre, Jacobi, JacobiPrime, GenGaussian, GenSymJacobi, GenCauchy)
}


def weight_from_json(obj) -> Weight:
    """Build a weight from ``{"family": ..., "params": {...}}`` (dict or JSON text)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    family = str(obj["family"]).lower().replace("-", "_")
    if family not in FAMILIES:
        raise DomainError(f"unknown weight family {obj['family']!r}")
    return FAMILIES[family](**obj.get("params", {}))


def weight_eval(w: Weight, x: float) -> float:
    """Weight density at x (zero outside the support)."""
    return w.density(float(x))


def _moment_args(w: Weight, p: float) -> tuple[list[float], list[float]]:
    if isinstance(w, Laguerre):
        if not w.a + p > -1:
            raise DomainError(f"laguerre moment {p}: need a + p > -1")
        return [w.a + p + 1], []
    if isinstance(w, Jacobi):
        if not w.a + p > -1:
            raise DomainError(f"jacobi moment {p}: need a + p > -1")
        return [w.a + p + 1, w.b + 1], [w.a + p + w.b + 2]
    if isinstance(w, JacobiPrime):
        if not w.alpha + p > -1:
            raise DomainError(f"jacobi_prime moment {p}: need alpha + p > -1")
        if not w.beta - w.alpha - p - 1 > 0:
            raise DomainError(
                f"jacobi_prime moment {p}: need beta - alpha - p - 1 > 0 "
                f"(alpha={w.alpha}, beta={w.beta})"
            )
        return [w.alpha + p + 1, w.beta - w.alpha - p - 1], [w.beta]
    raise DomainError(f"moment needs a half-line weight, got {w.family}")


def moment(w: Weight, p: float) -> SignedLogReal:
    """Closed-form ``int_0^inf w(x) x^p dx`` for a half-line weight."""
    num, den = _moment_args(w, float(p))
    return gamma_ratio(num, den)


def moment_mp(w: Weight, p):
    """Extended-precision moment as an mpf (uses mpmath's own gamma)."""
    num, den = _moment_args(w, float(p))
    # redo the arithmetic in mpmath so that p need not be a double
    p = mpmath.mpf(p)
    if isinstance(w, Laguerre):
        return mpmath.gamma(w.a + p + 1)
    if isinstance(w, Jacobi):
        return mpmath.beta(w.a + p + 1, w.b + 1)
    return mpmath.beta(w.alpha + p + 1, w.beta - w.alpha - p - 1)


def even_part(w: Weight) -> Weight:
    """Half-line weight y^{-1/2} w(y^{1/2}) of an even full-line weight."""
    if isinstance(w, GenGaussian):
        return Laguerre(w.c - 0.5)
    if isinstance(w, GenSymJacobi):
        return Jacobi(w.c - 0.5, w.alpha)
    if isinstance(w, GenCauchy):
        return JacobiPrime(w.c - 0.5, w.alpha)
    raise DomainError(f"parity reduction needs a full-line weight, got {w.family}")


def odd_part(w: Weight, theta: float) -> Weight:
    """Half-line weight y^{theta/2} w(y^{1/2}) of an even full-line weight."""
    if isinstance(w, GenGaussian):
        return Laguerre(w.c + theta / 2.0)
    if isinstance(w, GenSymJacobi):
        return Jacobi(w.c + theta / 2.0, w.alpha)
    if isinstance(w, GenCauchy):
        return JacobiPrime(w.c + theta / 2.0, w.alpha)
    raise DomainError(f"parity reduction needs a full-line weight, got {w.family}")


def parity_reduce(w: Weight, theta: float) -> tuple[Weight, Weight]:
    """Even and odd half-line components of an even weight.

    even: y^{-1/2} w(y^{1/2});  odd: y^{theta/2} w(y^{1/2}).
    """
    even, odd = even_part(w), odd_part(w, theta)
    assert abs(_exponent(odd) - _exponent(even) - 0.5 - theta / 2.0) < 1e-12
    return even, odd


def _exponent(w: Weight) -> float:
    return w.alpha if isinstance(w, JacobiPrime) else w.a


def _fullline_exponent(j: int, k: int, theta: float) -> float:
    if j < 1 or k < 1:
        raise DomainError("full-line moment indices start at 1")
    return (j - 1) + theta * (k - 1)


def fullline_moment(w: Weight, j: int, k: int, theta: float) -> SignedLogReal:
    """``int_R w(x) |x|^{j-1+theta(k-1)} sgn(x)^{j+k} dx``.

    Zero when j + k is odd; otherwise the even-part moment at half the
    exponent (substitution y = x^2).
    """
    p = _fullline_exponent(j, k, theta)
    even = even_part(w)
    if (j + k) % 2:
        return SignedLogReal.zero()
    return moment(even, p / 2.0)


def fullline_moment_mp(w: Weight, j: int, k: int, theta):
    p = mpmath.mpf(j - 1) + mpmath.mpf(theta) * (k - 1)
    even = even_part(w)
    if (j + k) % 2:
        return mpmath.mpf(0)
    return moment_mp(even, p / 2)


@dataclass(frozen=True)
class EnsembleSpec:
    """One Muttalib-Borodin ensemble: weight, number of particles, theta."""

    weight: Weight
    n: int
    theta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"N must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise DomainError(f"theta must be a positive real, got {self.theta}")
        object.__setattr__(self, "theta", float(self.theta))
        check_size(self.weight, self.n, self.theta)

    @property
    def fullline(self) -> bool:
        return self.weight.fullline

    def with_n(self, n: int) -> "EnsembleSpec":
        return EnsembleSpec(self.weight, n, self.theta)

    def to_json(self) -> dict:
        return {"weight": self.weight.to_json(), "N": self.n, "theta": self.theta}

    @classmethod
    def from_json(cls, obj) -> "EnsembleSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(weight_from_json(obj["weight"]), int(obj["N"]), float(obj["theta"]))


def check_size(w: Weight, n: int, theta: float) -> None:
    """Raise DomainError if the size-n ensemble with weight w is not normalisable."""
    if n <= 0:
        return
    if isinstance(w, JacobiPrime):
        bound = w.alpha + n + theta * (n - 1)
        if not w.beta > bound:
            raise DomainError(
                f"jacobi_prime: need beta > alpha + N + theta(N-1) = {bound:.17g} "
                f"for N={n}, theta={theta:g}; got beta={w.beta:.17g}"
            )
    elif w.fullline:
        n1, n2 = (n + 1) // 2, n // 2
        try:
            check_size(even_part(w), n1, theta)
            if n2:
                check_size(odd_part(w, theta), n2, theta)
        except DomainError as exc:
            raise DomainError(f"{w.family} (parity-reduced): {exc}") from None
