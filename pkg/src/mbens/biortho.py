"""Biorthogonal polynomial pairs (p_k, q_k) and their norms h_k.

For a weight w and exponent theta the pair satisfies

    int w(x) p_k(x) q_l(x^theta) dx = h_k delta_{kl}

with both families monic.  Closed forms are provided for the three
half-line weights; the even full-line weights are reached by lifting the
half-line answers through y = x^2.  Independent checks:

* ``h_k`` is the ratio Z_{k+1} / ((k+1) Z_k) of closed-form normalisations;
  the directly printed product formulas are available from :func:`h_k_check`.
* :func:`oracle_char_poly` evaluates the averaged characteristic polynomials
  as sums of shifted moment determinants.
* :func:`reference_classical` gives the theta = 1 classical polynomials from
  their three-term recurrences.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import gmpy2
import mpmath
import numpy as np

from .norms import z_ensemble
from .specfun import (
    EXTENDED_DPS,
    DomainError,
    SignedLogReal,
    gamma_ratio,
    precision,
    signed_sum,
)
from .weights import (
    EnsembleSpec,
    Jacobi,
    JacobiPrime,
    Laguerre,
    Weight,
    even_part,
    moment_mp,
    odd_part,
)

__all__ = [
    "MonicPoly",
    "NormSequence",
    "HkCheck",
    "ConsistencyError",
    "ConditioningError",
    "h_k",
    "h_k_check",
    "norm_sequence",
    "q_poly",
    "p_poly",
    "p_poly_gamma",
    "oracle_char_poly",
    "f_nu_laguerre",
    "f_nu_bruteforce",
    "parity_lift",
    "biortho_poly",
    "reference_classical",
]

MONIC_TOL = 1e-10
HP_DIGITS = EXTENDED_DPS
_HP_ZERO = "0." + "0" * (HP_DIGITS - 1)
_HP_ONE = "1." + "0" * (HP_DIGITS - 1)


class ConsistencyError(RuntimeError):
    """An assembled polynomial failed an internal consistency check."""


class ConditioningError(RuntimeError):
    """A determinant oracle met a numerically singular base matrix."""


@dataclass(frozen=True)
class MonicPoly:
    """Monic polynomial with float64 coefficients, constant term first.

    ``digits`` optionally carries the same coefficients as decimal strings
    with ``HP_DIGITS`` significant digits; high-precision consumers (the
    Gram verification, JSON output) use them when present.
    """

    coeffs: tuple[float, ...]
    digits: tuple[str, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if not c:
            raise DomainError("a polynomial needs at least one coefficient")
        if not all(math.isfinite(v) for v in c):
            raise DomainError(f"non-finite coefficient in {c}")
        if c[-1] != 1.0:
            raise DomainError(f"leading coefficient must be exactly 1, got {c[-1]!r}")
        object.__setattr__(self, "coeffs", c)
        if self.digits is not None:
            d = tuple(str(v) for v in self.digits)
            if len(d) != len(c):
                raise DomainError("digits and coeffs differ in length")
            object.__setattr__(self, "digits", d)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for c in reversed(self.coeffs[:-1]):
            out = out * x + c
        return out if out.ndim else float(out)

    def of_square(self) -> "MonicPoly":
        """r(x^2) as a polynomial in x."""
        out = [0.0] * (2 * self.degree + 1)
        out[::2] = self.coeffs
        digits = None
        if self.digits is not None:
            digits = [_HP_ZERO] * len(out)
            digits[::2] = self.digits
            digits = tuple(digits)
        return MonicPoly(tuple(out), digits)

    def times_x(self) -> "MonicPoly":
        digits = None if self.digits is None else (_HP_ZERO,) + self.digits
        return MonicPoly((0.0,) + self.coeffs, digits)

    def hp_call(self, x: np.ndarray) -> np.ndarray:
        """Horner evaluation on an object array of gmpy2.mpfr (current context)."""
        coeffs = self.digits if self.digits is not None else [repr(c) for c in self.coeffs]
        out = np.full(len(x), gmpy2.mpfr(1), dtype=object)
        for c in reversed(coeffs[:-1]):
            out = out * x + gmpy2.mpfr(c)
        return out

    def to_json(self) -> list[str]:
        """Coefficients as decimal strings with at least 17 significant digits."""
        if self.digits is not None:
            return list(self.digits)
        return [format(c, ".16e") for c in self.coeffs]


@dataclass(frozen=True)
class NormSequence:
    weight: Weight
    theta: float
    values: tuple[SignedLogReal, ...]

    def __post_init__(self):
        for k, h in enumerate(self.values):
            if h.sign != 1:
                raise DomainError(f"norm h_{k} is not positive")


@dataclass(frozen=True)
class HkCheck:
    """Z-ratio norm next to the directly printed product formula."""

    k: int
    truth: SignedLogReal
    printed: SignedLogReal
    ratio: float
    agrees: bool
    expected_ratio: float


# ---------------------------------------------------------------- arithmetic


class _Extended:
    """Terms as mpf at EXTENDED_DPS digits, summed with mpmath.fsum."""

    def ratio(self, nums, dens):
        num = [mpmath.mpf(x) for x in nums]
        for x in num:
            if x <= 0 and abs(x - mpmath.nint(x)) < 1e-9:
                raise DomainError(f"Gamma pole in numerator at {float(x)}")
        out = mpmath.fprod(mpmath.gamma(x) for x in num)
        # rgamma vanishes at the poles, giving an exact zero
        return out * mpmath.fprod(mpmath.rgamma(mpmath.mpf(x)) for x in dens)

    def const(self, x):
        return mpmath.mpf(x)

    arg = const

    def total(self, terms):
        return mpmath.fsum(terms)


class _Double:
    """Terms as SignedLogReal, summed with a max-shifted fsum."""

    def ratio(self, nums, dens):
        return gamma_ratio([float(x) for x in nums], [float(x) for x in dens])

    def const(self, x):
        return SignedLogReal.from_real(float(x))

    def arg(self, x):
        return float(x)

    def total(self, terms) -> float:
        return signed_sum(terms).to_real()


def _run(build: Callable) -> list:
    """Evaluate ``build(backend)`` (a list of term lists) in the selected precision."""
    if precision() == "extended":
        with mpmath.workdps(EXTENDED_DPS):
            be = _Extended()
            return [be.total(t) for t in build(be)]
    be = _Double()
    return [be.total(t) for t in build(be)]


def _hp_str(v) -> str:
    """Decimal string with HP_DIGITS significant digits (zero padded likewise)."""
    if v == 0:
        return _HP_ZERO
    return mpmath.nstr(v, HP_DIGITS, strip_zeros=False, min_fixed=1, max_fixed=0)


def _digits(values) -> tuple[str, ...] | None:
    if not all(isinstance(v, mpmath.mpf) for v in values):
        return None
    return tuple(_hp_str(v) for v in values[:-1]) + (_HP_ONE,)


def _monic(coeffs: Sequence, what: str) -> MonicPoly:
    c = [float(v) for v in coeffs]
    if abs(c[-1] - 1.0) >= MONIC_TOL:
        raise ConsistencyError(f"{what}: leading coefficient {c[-1]!r} is not 1")
    c[-1] = 1.0
    return MonicPoly(tuple(c), _digits(list(coeffs)))


def _half_line(w: Weight, what: str) -> None:
    if w.fullline:
        raise DomainError(f"{what} needs a half-line weight; use parity_lift for {w.family}")


# ---------------------------------------------------------------- norms


def h_k(weight: Weight, theta: float, k: int) -> SignedLogReal:
    """Norm h_k.

    Half-line weights use Z_{k+1} / ((k+1) Z_k).  Even full-line weights use
    h_{2m} = h_m[even part] and h_{2m+1} = h_m[odd part].
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    if weight.fullline:
        m, odd = divmod(k, 2)
        part = odd_part(weight, theta) if odd else even_part(weight)
        return h_k(part, theta, m)
    upper = z_ensemble(EnsembleSpec(weight, k + 1, theta))
    lower = z_ensemble(EnsembleSpec(weight, k, theta)) if k else SignedLogReal.one()
    return upper / (lower * (k + 1))


def _printed_h(w: Weight, theta: float, k: int) -> tuple[SignedLogReal, float]:
    """Printed product formula for h_k and the ratio truth/printed it should show."""
    if isinstance(w, Laguerre):
        val = gamma_ratio([theta * k + w.a + 1, k + 1], [])
        return val * SignedLogReal(1, k * math.log(theta)), 1.0
    if isinstance(w, Jacobi):
        z = (k + w.a + w.b + 1) / theta
        val = gamma_ratio(
            [theta * k + w.a + 1, k + 1, k + w.b + 1, z],
            [(theta + 1) * k + w.a + w.b + 2, k + 1 + z],
        )
        # the printed denominator carries Gamma(k+1+z) where the Z-ratio gives Gamma(k+z)
        return val, z + k
    if isinstance(w, JacobiPrime):
        z = (w.beta - w.alpha - k - 1) / theta
        val = gamma_ratio(
            [theta * k + w.alpha + 1, k + 1, w.beta - w.alpha - 1 - (theta + 1) * k, z - k + 1],
            [z + 1, w.beta - k],
        )
        return val, 1.0
    raise DomainError(f"no printed norm formula for {w.family}")


def h_k_check(weight: Weight, theta: float, k: int, tol: float = 1e-11) -> HkCheck:
    """Compare the Z-ratio norm with the printed closed form.

    ``agrees`` is true when truth/printed = 1 within ``tol``.  For the Jacobi
    weight the printed form is off by the factor (k+a+b+1)/theta + k, which is
    reported as ``expected_ratio``.
    """
    _half_line(weight, "h_k_check")
    truth = h_k(weight, theta, k)
    printed, expected = _printed_h(weight, theta, k)
    ratio = math.exp(truth.logmag - printed.logmag) * truth.sign * printed.sign
    return HkCheck(k, truth, printed, ratio, abs(ratio - 1.0) < tol, expected)


def norm_sequence(weight: Weight, theta: float, count: int) -> NormSequence:
    return NormSequence(weight, theta, tuple(h_k(weight, theta, k) for k in range(count)))


# ---------------------------------------------------------------- q_k


def _weight_exponent(w: Weight) -> float:
    return w.alpha if isinstance(w, JacobiPrime) else w.a


def q_poly(weight: Weight, k: int, theta: float) -> MonicPoly:
    """Monic q_k for a half-line weight, from its binomial-gamma closed form."""
    _half_line(weight, "q_poly")
    if k == 0:
        return MonicPoly((1.0,))
    w = weight

    def build(be):
        th = be.arg(theta)
        out = []
        for j in range(k + 1):
            sign = -1 if (k - j) % 2 else 1
            term = be.const(sign * math.comb(k, j))
            if isinstance(w, Laguerre):
                a = be.arg(w.a)
                term = term * be.ratio([1 + a + th * k], [1 + a + th * j])
            elif isinstance(w, Jacobi):
                a = be.arg(w.a)
                s = 1 + a + be.arg(w.b) + k
                term = term * be.ratio(
                    [s + th * j, 1 + a + th * k], [s + th * k, 1 + a + th * j]
                )
            elif isinstance(w, JacobiPrime):
                al = be.arg(w.alpha)
                r = be.arg(w.beta) - k - al
                term = term * be.ratio(
                    [r - th * k, 1 + al + th * k], [r - th * j, 1 + al + th * j]
                )
            else:
                raise DomainError(f"q_poly: unsupported family {w.family}")
            out.append([term])
        return out

    return _monic(_run(build), f"q_{k}[{w.family}]")


# ---------------------------------------------------------------- p_k


def _inner_sums(be, k: int, prod_at: Callable[[int], object]) -> list:
    """sum_{s<=nu} (-1)^{k-s} / ((nu-s)! s!) * prod_at(s), one term list per nu."""
    out = []
    for nu in range(k + 1):
        terms = []
        for s in range(nu + 1):
            sign = -1 if (k - s) % 2 else 1
            c = be.const(sign) / be.const(math.factorial(nu - s) * math.factorial(s))
            terms.append(c * prod_at(s))
        out.append(terms)
    return out


def _mixed_to_monomial(be, k: int, prefactor, inner: list, basis_coeff, sign: int) -> list:
    """Expand prefactor * sum_nu A_nu (x/(1 + sign x))^nu (1 + sign x)^k to monomials.

    ``basis_coeff(nu)`` supplies the gamma factor in A_nu; the remaining
    factor of A_nu is the inner sum (a list of terms).
    """
    out = [[] for _ in range(k + 1)]
    for nu in range(k + 1):
        scale = prefactor * basis_coeff(nu)
        for m in range(k - nu + 1):
            c = be.const(math.comb(k - nu, m) * (sign**m))
            for t in inner[nu]:
                out[nu + m].append(scale * c * t)
    return out


def p_poly_gamma(family: str, gammas: Sequence[float], **params) -> MonicPoly:
    """Averaged characteristic polynomial for a general exponent vector.

    family / params: ``"laguerre"``; ``"jacobi"`` with alpha2 (weight
    (1-x)^{alpha2-1}); ``"jacobi_prime"`` with beta (weight (1+x)^{-beta}).
    """
    g = [float(v) for v in gammas]
    k = len(g)
    family = family.lower().replace("-", "_")
    if family not in ("laguerre", "jacobi", "jacobi_prime"):
        raise DomainError(f"p_poly_gamma: unknown family {family!r}")
    if k == 0:
        return MonicPoly((1.0,))

    def build(be):
        gb = [be.arg(x) for x in g]

        def prod_at(s):
            out = be.const(1)
            for gl in gb:
                out = out * be.const(gl + s + 1)
            return out

        inner = _inner_sums(be, k, prod_at)
        if family == "laguerre":
            return inner
        if family == "jacobi":
            a2 = be.arg(params["alpha2"])
            den = be.const(1)
            for gl in gb:
                den = den * be.const(gl + k + a2)
            return _mixed_to_monomial(
                be, k, be.const(1) / den, inner,
                lambda nu: be.ratio([k + a2], [k - nu + a2]), -1,
            )
        beta = be.arg(params["beta"])
        den = be.const(1)
        for gl in gb:
            den = den * be.const(beta - k - gl - 1)
        return _mixed_to_monomial(
            be, k, be.const(1) / den, inner,
            lambda nu: be.ratio([beta - k + nu], [beta - k]), 1,
        )

    return _monic(_run(build), f"p_{k}^gamma[{family}]")


def p_poly(weight: Weight, k: int, theta: float) -> MonicPoly:
    """Monic p_k for a half-line weight from the specialised gamma-ratio forms.

    With gamma_j = theta(j-1) + a the product over l collapses to
    theta^k Gamma(k + (a+s+1)/theta) / Gamma((a+s+1)/theta).
    """
    _half_line(weight, "p_poly")
    EnsembleSpec(weight, max(k, 1), theta)
    if k == 0:
        return MonicPoly((1.0,))
    w = weight
    a = _weight_exponent(w)

    def build(be):
        th, ab = be.arg(theta), be.arg(a)

        def reduced(s):
            u = (ab + s + 1) / th
            return be.ratio([k + u], [u])

        inner = _inner_sums(be, k, reduced)
        if isinstance(w, Laguerre):
            thk = be.const(th) ** k
            return [[thk * t for t in terms] for terms in inner]
        if isinstance(w, Jacobi):
            b = be.arg(w.b)
            z = (ab + b + k + 1) / th
            pref = be.ratio([z], [k + z])
            return _mixed_to_monomial(
                be, k, pref, inner,
                lambda nu: be.ratio([k + b + 1], [k - nu + b + 1]), -1,
            )
        if isinstance(w, JacobiPrime):
            beta = be.arg(w.beta)
            z = (beta - k - ab - 1) / th
            pref = be.ratio([z - k + 1], [z + 1])
            return _mixed_to_monomial(
                be, k, pref, inner,
                lambda nu: be.ratio([beta - k + nu], [beta - k]), 1,
            )
        raise DomainError(f"p_poly: unsupported family {w.family}")

    return _monic(_run(build), f"p_{k}[{w.family}]")


# ---------------------------------------------------------------- oracles


def oracle_char_poly(side: str, weight: Weight, k: int, theta: float) -> MonicPoly:
    """Averaged characteristic polynomial over the size-k ensemble, by determinants.

    With M_{jl} = moment(j-1 + theta(l-1)), the coefficient of x^nu is
    (-1)^{k-nu} E[e_{k-nu}], and E[e_r] is the sum over r-subsets S of
    det(M shifted on S) / det(M).  Side ``"p"`` shifts the integer exponents
    of rows in S by one; side ``"q"`` shifts the theta exponents of columns
    in S by theta.
    """
    _half_line(weight, "oracle_char_poly")
    if side not in ("p", "q"):
        raise DomainError(f"side must be 'p' or 'q', got {side!r}")
    if k > 6:
        raise DomainError("oracle_char_poly is limited to k <= 6")
    if k == 0:
        return MonicPoly((1.0,))
    EnsembleSpec(weight, k, theta)
    with mpmath.workdps(EXTENDED_DPS):
        th = mpmath.mpf(theta)

        def det_for(shift: frozenset):
            ints = [j + (side == "p" and j in shift) for j in range(k)]
            thetas = [l + (side == "q" and l in shift) for l in range(k)]
            if len(set(ints)) < k or len(set(thetas)) < k:
                # two equal rows or columns
                return mpmath.mpf(0)
            rows = [[moment_mp(weight, i + th * t) for t in thetas] for i in ints]
            return mpmath.det(mpmath.matrix(rows))

        base = det_for(frozenset())
        if base == 0:
            raise ConditioningError("moment matrix is numerically singular")
        coeffs = []
        for nu in range(k + 1):
            r = k - nu
            total = mpmath.fsum(det_for(frozenset(S)) for S in itertools.combinations(range(k), r))
            coeffs.append(float((-1) ** r * total / base))
    return _monic(coeffs, f"oracle {side}_{k}[{weight.family}]")


def f_nu_laguerre(nu: int, gammas: Sequence[float]) -> float:
    """sum_{s<=nu} (-1)^{nu-s} / ((nu-s)! s!) prod_l (gamma_l + s + 1)."""
    g = [float(v) for v in gammas]
    if not 0 <= nu <= len(g):
        raise DomainError(f"nu must lie in 0..{len(g)}")
    with mpmath.workdps(EXTENDED_DPS):
        terms = []
        for s in range(nu + 1):
            prod = mpmath.fprod(mpmath.mpf(x) + s + 1 for x in g)
            terms.append((-1) ** (nu - s) * prod / (math.factorial(nu - s) * math.factorial(s)))
        return float(mpmath.fsum(terms))


def f_nu_bruteforce(nu: int, gammas: Sequence[float]) -> float:
    """Same quantity as a subset sum of ratios of Laguerre C-constants.

    Sum over (N-nu)-subsets S of prod_{l in S}(gamma_l + 1) times the
    Vandermonde of the shifted exponents over that of the original ones.
    """
    g = [float(v) for v in gammas]
    n = len(g)
    if not 0 <= nu <= n:
        raise DomainError(f"nu must lie in 0..{n}")
    with mpmath.workdps(EXTENDED_DPS):
        gm = [mpmath.mpf(x) for x in g]

        def vdm(x):
            return mpmath.fprod(x[i] - x[j] for i in range(n) for j in range(i + 1, n))

        base = vdm(gm)
        if base == 0:
            raise DomainError("exponents must be pairwise distinct")
        total = []
        for S in itertools.combinations(range(n), n - nu):
            shifted = [x + 1 if i in S else x for i, x in enumerate(gm)]
            total.append(mpmath.fprod(gm[i] + 1 for i in S) * vdm(shifted) / base)
        return float(mpmath.fsum(total))


# ---------------------------------------------------------------- full line


def parity_lift(side: str, weight: Weight, k: int, theta: float) -> MonicPoly:
    """p_k or q_k for an even full-line weight.

    k = 2m gives r_m(x^2) for the even part; k = 2m+1 gives x r_m(x^2) for
    the odd part, with r the half-line polynomial of the same side.
    """
    if not weight.fullline:
        raise DomainError(f"parity_lift needs a full-line weight, got {weight.family}")
    if side not in ("p", "q"):
        raise DomainError(f"side must be 'p' or 'q', got {side!r}")
    m, odd = divmod(k, 2)
    part = odd_part(weight, theta) if odd else even_part(weight)
    half = (p_poly if side == "p" else q_poly)(part, m, theta)
    lifted = half.of_square()
    return lifted.times_x() if odd else lifted


def biortho_poly(side: str, weight: Weight, k: int, theta: float) -> MonicPoly:
    """p_k or q_k for any of the six weights."""
    if weight.fullline:
        return parity_lift(side, weight, k, theta)
    if side == "p":
        return p_poly(weight, k, theta)
    if side == "q":
        return q_poly(weight, k, theta)
    raise DomainError(f"side must be 'p' or 'q', got {side!r}")


# ---------------------------------------------------------------- theta = 1


def reference_classical(weight: Weight, k: int) -> MonicPoly:
    """Monic classical orthogonal polynomial from its three-term recurrence.

    Laguerre on (0, inf) with weight x^a e^{-x}; Jacobi on (0, 1) with weight
    x^a (1-x)^b, obtained from the standard (-1, 1) recurrence under x = (1+t)/2.
    """
    if isinstance(weight, Laguerre):
        a = mpmath.mpf(weight.a)

        def rec(n):
            return 2 * n + a + 1, n * (n + a)

    elif isinstance(weight, Jacobi):
        # (1-t)^alpha (1+t)^beta with alpha = b, beta = a
        al, be = mpmath.mpf(weight.b), mpmath.mpf(weight.a)

        def rec(n):
            s = 2 * n + al + be
            if n == 0:
                an = (be - al) / (al + be + 2)
            else:
                an = (be**2 - al**2) / (s * (s + 2))
            if n == 0:
                bn = 0
            elif n == 1:
                bn = 4 * (1 + al) * (1 + be) / ((2 + al + be) ** 2 * (3 + al + be))
            else:
                bn = 4 * n * (n + al) * (n + be) * (n + al + be) / (s**2 * (s + 1) * (s - 1))
            return (1 + an) / 2, bn / 4

    else:
        raise DomainError(f"reference_classical supports laguerre and jacobi, got {weight.family}")
    with mpmath.workdps(EXTENDED_DPS):
        prev, cur = [], [mpmath.mpf(1)]
        for n in range(k):
            alpha_n, beta_n = rec(n)
            nxt = [mpmath.mpf(0)] + cur
            for i, c in enumerate(cur):
                nxt[i] -= alpha_n * c
            for i, c in enumerate(prev):
                nxt[i] -= beta_n * c
            prev, cur = cur, nxt
        return _monic(cur, f"classical_{k}[{weight.family}]")
