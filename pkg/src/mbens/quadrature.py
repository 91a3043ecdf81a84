"""Gauss rules for the classical weights, with endpoint singularities absorbed.

Nodes are the eigenvalues of the Jacobi matrix (Golub-Welsch), polished by
one Newton step on the orthonormal recurrence.  Weights come from the
Christoffel function ``1 / sum_k phat_k(x)^2``, accumulated with running
rescaling so that they are available as logarithms even where they
underflow (far Laguerre nodes).

Integrands in this package are polynomials in x and x^theta.  For a
rational theta = P/Q the substitution x = v^Q turns them into polynomials
in v, and the rules below are built in the v variable so that they stay
(nearly) exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .specfun import DomainError, log_beta, log_gamma
from .weights import Jacobi, JacobiPrime, Laguerre, Weight, even_part

__all__ = [
    "QuadratureRule",
    "gauss_laguerre",
    "gauss_jacobi01",
    "make_quadrature",
    "theta_root",
    "MAX_NODES",
    "HPRule",
    "HP_BITS",
    "make_quadrature_hp",
]

MAX_NODES = 4096
_RESCALE = 1e150


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and log-weights approximating ``int w(x) f(x) dx`` by ``sum W_i f(x_i)``."""

    nodes: np.ndarray
    log_weights: np.ndarray
    support: tuple[float, float]
    exact_degree: int | None = None

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values) -> float:
        """``sum W_i f(x_i)`` with f given at the nodes."""
        values = np.asarray(values, dtype=float)
        keep = np.isfinite(self.log_weights)
        return math.fsum(np.exp(self.log_weights[keep]) * values[keep])


def _gauss(alpha: np.ndarray, beta: np.ndarray, log_mu0: float):
    """Gauss rule from monic recurrence coefficients.

    ``x p_k = p_{k+1} + alpha_k p_k + beta_k p_{k-1}`` with beta[0] unused.
    Returns nodes and log weights.
    """
    n = len(alpha)
    off = np.sqrt(beta[1:n])
    x = eigvalsh_tridiagonal(alpha, off)
    x = x - _newton_step(x, alpha, off)
    # Christoffel: w = 1 / sum phat_k^2 with phat_0 = 1 / sqrt(mu0)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    total = np.ones_like(x)
    logscale = np.zeros_like(x)
    for k in range(n - 1):
        nxt = ((x - alpha[k]) * cur - (off[k - 1] * prev if k else 0.0)) / off[k]
        prev, cur = cur, nxt
        total += cur * cur
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev[big] /= _RESCALE
            cur[big] /= _RESCALE
            total[big] /= _RESCALE**2
            logscale[big] += math.log(_RESCALE)
    log_w = log_mu0 - np.log(total) - 2.0 * logscale
    return x, log_w


def _newton_step(x, alpha, off):
    """p_n(x) / p_n'(x) for the orthonormal recurrence (scale invariant)."""
    n = len(alpha)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    d_prev, d = np.zeros_like(x), np.zeros_like(x)
    for k in range(n):
        b_next = off[k] if k < n - 1 else 1.0
        b_k = off[k - 1] if k else 0.0
        p_next = ((x - alpha[k]) * p - b_k * p_prev) / b_next
        d_next = ((x - alpha[k]) * d + p - b_k * d_prev) / b_next
        p_prev, p, d_prev, d = p, p_next, d, d_next
        big = np.maximum(np.abs(p), np.abs(d)) > _RESCALE
        if big.any():
            for arr in (p_prev, p, d_prev, d):
                arr[big] /= _RESCALE
    with np.errstate(invalid="ignore", divide="ignore"):
        step = np.where(d != 0, p / d, 0.0)
    # the eigenvalues are already close; never move a node by more than a sliver
    limit = 1e-6 * np.maximum(np.abs(x), 1e-300)
    return np.clip(step, -limit, limit)


def gauss_laguerre(c: float, n: int) -> QuadratureRule:
    """Gauss rule for x^c e^{-x} on (0, inf)."""
    if not c > -1:
        raise DomainError(f"Gauss-Laguerre needs c > -1, got {c}")
    _check_n(n)
    k = np.arange(n, dtype=float)
    alpha = 2 * k + c + 1
    beta = k * (k + c)
    x, lw = _gauss(alpha, beta, log_gamma(c + 1))
    return QuadratureRule(x, lw, (0.0, math.inf), 2 * n - 1)


def gauss_jacobi01(a: float, b: float, n: int) -> QuadratureRule:
    """Gauss rule for x^a (1-x)^b on (0, 1)."""
    if not (a > -1 and b > -1):
        raise DomainError(f"Gauss-Jacobi needs exponents > -1, got a={a}, b={b}")
    _check_n(n)
    # standard (-1,1) Jacobi with (1-t)^al (1+t)^be, al = b, be = a, then x = (1+t)/2
    al, be = b, a
    k = np.arange(n, dtype=float)
    s = 2 * k + al + be
    with np.errstate(invalid="ignore", divide="ignore"):
        at = (be**2 - al**2) / (s * (s + 2))
        bt = 4 * k * (k + al) * (k + be) * (k + al + be) / (s**2 * (s + 1) * (s - 1))
    at[0] = (be - al) / (al + be + 2)
    bt[0] = 0.0
    if n > 1:
        bt[1] = 4 * (1 + al) * (1 + be) / ((2 + al + be) ** 2 * (3 + al + be))
    x, lw = _gauss((1 + at) / 2, bt / 4, log_beta(a + 1, b + 1))
    x = np.clip(x, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    return QuadratureRule(x, lw, (0.0, 1.0), 2 * n - 1)


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_NODES:
        raise DomainError(f"node count must lie in 1..{MAX_NODES}, got {n}")


def theta_root(theta: float, max_den: int = 16) -> int:
    """Denominator Q of theta when it is a small-denominator rational, else 1."""
    frac = Fraction(theta).limit_denominator(max_den)
    return frac.denominator if abs(float(frac) - theta) < 1e-12 else 1


def make_quadrature(weight: Weight, n: int, root: int = 1, tail: float = 0.0) -> QuadratureRule:
    """Gauss-type rule for ``int w(x) f(x) dx``.

    ``root`` = R makes the rule exact (or nearly so) for f polynomial in
    x^{1/R}.  ``tail`` bounds the growth exponent of f at infinity; it is
    needed only for the Jacobi-prime weight, whose algebraic tail is folded
    into the Gauss weight.
    """
    R = int(root)
    if R < 1:
        raise DomainError("root must be a positive integer")
    if weight.fullline:
        half = make_quadrature(even_part(weight), n, 2 * R, tail / 2.0)
        y = np.sqrt(half.nodes)
        lw = half.log_weights - math.log(2.0)
        nodes = np.concatenate([-y[::-1], y])
        logs = np.concatenate([lw[::-1], lw])
        return QuadratureRule(nodes, logs, weight.support, None)
    if isinstance(weight, Laguerre):
        base = gauss_laguerre(R * (weight.a + 1) - 1, n)
        v = base.nodes
        lw = base.log_weights + math.log(R) + (v - v**R if R > 1 else 0.0)
        return QuadratureRule(v**R, lw, (0.0, math.inf), base.exact_degree if R == 1 else None)
    if isinstance(weight, Jacobi):
        base = gauss_jacobi01(R * (weight.a + 1) - 1, weight.b, n)
        v = base.nodes
        lw = base.log_weights + math.log(R)
        if R > 1:
            lw = lw + weight.b * np.log(sum(v**i for i in range(R)))
        return QuadratureRule(v**R, lw, (0.0, 1.0), base.exact_degree if R == 1 else None)
    if isinstance(weight, JacobiPrime):
        A = R * (weight.alpha + 1) - 1
        B = R * (weight.beta - weight.alpha - 1 - tail) - 1
        if not B > -1:
            raise DomainError(
                f"jacobi_prime quadrature: growth exponent {tail} needs "
                f"beta > alpha + 1 + {tail}, got beta={weight.beta}"
            )
        base = gauss_jacobi01(A, B, n)
        t = base.nodes
        lw = (
            base.log_weights
            + math.log(R)
            - weight.beta * np.log((1 - t) ** R + t**R)
            + R * tail * np.log1p(-t)
        )
        x = (t / (1 - t)) ** R
        return QuadratureRule(x, lw, (0.0, math.inf), None)
    raise DomainError(f"no quadrature for weight family {weight.family}")


# ---------------------------------------------------------------- high precision
#
# The Gram matrices of the biorthogonal pairs cancel massively (entries of
# order h_j built from terms many orders larger), so verification runs the
# rules above through gmpy2 (MPFR) at HP_BITS bits: the double-precision
# eigenvalues are polished by Newton's method on the three-term recurrence
# and the weights follow from 1 / (p_n'(x) p_{n-1}(x)).

HP_BITS = 128


@dataclass(frozen=True)
class HPRule:
    """Nodes and weights as numpy object arrays of gmpy2.mpfr."""

    nodes: np.ndarray
    weights: np.ndarray
    support: tuple[float, float]

    def __len__(self):
        return len(self.nodes)


def _mpfr_array(values) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    out[:] = [gmpy2.mpfr(v) for v in values]
    return out


def _polish(x0: np.ndarray, alpha: list, beta: list, mu0):
    """Newton-polished nodes and weights in MPFR (monic recurrence alpha, beta)."""
    n = len(alpha)
    x = _mpfr_array(x0)
    zero = gmpy2.mpfr(0)
    for _ in range(2):
        p_prev = np.full(n, zero, dtype=object)
        p = np.full(n, gmpy2.mpfr(1), dtype=object)
        d_prev = np.full(n, zero, dtype=object)
        d = np.full(n, zero, dtype=object)
        for k in range(n):
            shift = x - alpha[k]
            p_next = shift * p - beta[k] * p_prev
            d_next = shift * d + p - beta[k] * d_prev
            p_prev, p, d_prev, d = p, p_next, d, d_next
        x = x - p / d
    # p_prev = p_{n-1}, d = p_n' at the pre-update nodes; one more sweep at the final ones
    p_prev = np.full(n, zero, dtype=object)
    p = np.full(n, gmpy2.mpfr(1), dtype=object)
    d_prev = np.full(n, zero, dtype=object)
    d = np.full(n, zero, dtype=object)
    norm = gmpy2.mpfr(1)
    for k in range(n):
        shift = x - alpha[k]
        p_next = shift * p - beta[k] * p_prev
        d_next = shift * d + p - beta[k] * d_prev
        p_prev, p, d_prev, d = p, p_next, d, d_next
        if k < n - 1:
            # ||p_{k+1}||^2 / ||p_k||^2 = beta_{k+1} for monic polynomials
            norm *= beta[k + 1]
    # Christoffel-Darboux for monic polynomials: w_i = mu0 prod beta / (p_n'(x_i) p_{n-1}(x_i))
    w = mu0 * norm / (d * p_prev)
    return x, w


def gauss_laguerre_hp(c, n: int) -> HPRule:
    """``c`` may be an mpfr; the double rule only seeds the Newton polish."""
    base = gauss_laguerre(float(c), n)
    with gmpy2.context(gmpy2.get_context(), precision=HP_BITS):
        cc = gmpy2.mpfr(c)
        alpha = [2 * k + cc + 1 for k in range(n)]
        beta = [gmpy2.mpfr(0)] + [k * (k + cc) for k in range(1, n)]
        x, w = _polish(base.nodes, alpha, beta, gmpy2.gamma(cc + 1))
    return HPRule(x, w, (0.0, math.inf))


def gauss_jacobi01_hp(a, b, n: int) -> HPRule:
    base = gauss_jacobi01(float(a), float(b), n)
    with gmpy2.context(gmpy2.get_context(), precision=HP_BITS):
        al, be = gmpy2.mpfr(b), gmpy2.mpfr(a)
        alpha, beta = [], []
        for k in range(n):
            s = 2 * k + al + be
            if k == 0:
                at = (be - al) / (al + be + 2)
                bt = gmpy2.mpfr(0)
            else:
                at = (be**2 - al**2) / (s * (s + 2))
                if k == 1:
                    bt = 4 * (1 + al) * (1 + be) / ((2 + al + be) ** 2 * (3 + al + be))
                else:
                    bt = 4 * k * (k + al) * (k + be) * (k + al + be) / (s**2 * (s + 1) * (s - 1))
            alpha.append((1 + at) / 2)
            beta.append(bt / 4)
        a1, b1 = be + 1, al + 1
        mu0 = gmpy2.gamma(a1) * gmpy2.gamma(b1) / gmpy2.gamma(a1 + b1)
        x, w = _polish(base.nodes, alpha, beta, mu0)
    return HPRule(x, w, (0.0, 1.0))


def make_quadrature_hp(weight: Weight, n: int, root: int = 1, tail: float = 0.0) -> HPRule:
    """MPFR counterpart of :func:`make_quadrature` (same substitutions)."""
    R = int(root)
    if weight.fullline:
        half = make_quadrature_hp(even_part(weight), n, 2 * R, tail / 2.0)
        with gmpy2.context(gmpy2.get_context(), precision=HP_BITS):
            y = np.array([gmpy2.sqrt(v) for v in half.nodes], dtype=object)
            w = half.weights / 2
        return HPRule(np.concatenate([-y[::-1], y]), np.concatenate([w[::-1], w]), weight.support)
    with gmpy2.context(gmpy2.get_context(), precision=HP_BITS):
        # exponents formed in MPFR: in double, R (a + 1) - 1 != a even for R = 1
        if isinstance(weight, Laguerre):
            base = gauss_laguerre_hp(R * (gmpy2.mpfr(weight.a) + 1) - 1, n)
            v = base.nodes
            w = base.weights * R
            if R > 1:
                w = w * np.array([gmpy2.exp(t - t**R) for t in v], dtype=object)
            return HPRule(v**R, w, (0.0, math.inf))
        if isinstance(weight, Jacobi):
            base = gauss_jacobi01_hp(R * (gmpy2.mpfr(weight.a) + 1) - 1, weight.b, n)
            v = base.nodes
            w = base.weights * R
            if R > 1:
                b = gmpy2.mpfr(weight.b)
                w = w * np.array([sum(t**i for i in range(R)) ** b for t in v], dtype=object)
            return HPRule(v**R, w, (0.0, 1.0))
        if isinstance(weight, JacobiPrime):
            A = R * (gmpy2.mpfr(weight.alpha) + 1) - 1
            B = R * (gmpy2.mpfr(weight.beta) - weight.alpha - 1 - gmpy2.mpfr(tail)) - 1
            if not B > -1:
                raise DomainError(
                    f"jacobi_prime quadrature: growth exponent {tail} needs "
                    f"beta > alpha + 1 + {tail}, got beta={weight.beta}"
                )
            base = gauss_jacobi01_hp(A, B, n)
            beta = gmpy2.mpfr(weight.beta)
            T = gmpy2.mpfr(tail)
            x, w = [], []
            for t, wt in zip(base.nodes, base.weights):
                s = 1 - t
                w.append(wt * R * (s**R + t**R) ** (-beta) * s ** (R * T))
                x.append((t / s) ** R)
            return HPRule(np.array(x, dtype=object), np.array(w, dtype=object), (0.0, math.inf))
    raise DomainError(f"no quadrature for weight family {weight.family}")
