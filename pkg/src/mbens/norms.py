"""Normalisation constants and their moment-determinant oracles.

Closed forms are gamma products evaluated in the log domain.  The oracles
integrate the same densities by a different route: the Andreief identity
turns the N-fold integral into ``N! det[moment_{j,k}]``.
"""

from __future__ import annotations

import math
from typing import Sequence

import mpmath
import numpy as np

from .specfun import (
    EXTENDED_DPS,
    DomainError,
    SignedLogReal,
    gamma_ratio,
    precision,
)
from .symfun import Partition
from .weights import (
    EnsembleSpec,
    Jacobi,
    JacobiPrime,
    Laguerre,
    fullline_moment,
    fullline_moment_mp,
    moment,
    moment_mp,
    even_part,
    odd_part,
)

__all__ = [
    "selberg",
    "laguerre_selberg",
    "norm_lambda",
    "c_gamma",
    "z_mb",
    "z_mb_fullline",
    "z_ensemble",
    "z_oracle_moments",
    "z_oracle_fullline",
    "log_factorial",
    "mpf_to_slr",
]


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1) if n > 20 else math.log(math.factorial(n))


def mpf_to_slr(value) -> SignedLogReal:
    """Convert an mpmath real (possibly outside the double range) to SignedLogReal."""
    if value == 0:
        return SignedLogReal.zero()
    return SignedLogReal(1 if value > 0 else -1, float(mpmath.log(abs(value))))


def _require_positive(args: Sequence[float], what: str) -> None:
    for x in args:
        if not x > 0:
            raise DomainError(f"{what}: Gamma argument {x:.17g} is not positive")


def selberg(n: int, a1: float, a2: float, tau: float) -> SignedLogReal:
    """Selberg integral S_N(a1, a2, tau) over (0,1)^N.

    ``prod_{j<N} G(a1+j tau) G(a2+j tau) G(1+(j+1)tau) / (G(a1+a2+(N+j-1)tau) G(1+tau))``.
    """
    if not (a1 > 0 and a2 > 0):
        raise DomainError(f"selberg: need a1 > 0 and a2 > 0, got a1={a1}, a2={a2}")
    if not tau >= 0:
        raise DomainError(f"selberg: need tau >= 0, got tau={tau}")
    nums, dens = [], []
    for j in range(n):
        nums += [a1 + j * tau, a2 + j * tau, 1 + (j + 1) * tau]
        dens += [a1 + a2 + (n + j - 1) * tau, 1 + tau]
    _require_positive(nums + dens, "selberg")
    return gamma_ratio(nums, dens)


def laguerre_selberg(n: int, a1: float, tau: float) -> SignedLogReal:
    """W_N(a1, tau) = prod_{j<N} G(1+(j+1)tau) G(a1+j tau) / G(1+tau)."""
    if not a1 > 0:
        raise DomainError(f"laguerre_selberg: need a1 > 0, got a1={a1}")
    if not tau >= 0:
        raise DomainError(f"laguerre_selberg: need tau >= 0, got tau={tau}")
    nums, dens = [], []
    for j in range(n):
        nums += [1 + (j + 1) * tau, a1 + j * tau]
        dens.append(1 + tau)
    return gamma_ratio(nums, dens)


def _content_product(parts: Sequence[int]) -> SignedLogReal:
    n = len(parts)
    out = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            out += math.log(parts[i] - parts[j] + j - i)
    return SignedLogReal(1, out)


def norm_lambda(family: str, lam, n: int, **params) -> SignedLogReal:
    """Integral of ``prod w(x_l) * Vandermonde(x) * det[x_j^{N-i+lambda_i}]``.

    family / params:

    * ``"jacobi"``: alpha1, alpha2, weight x^{alpha1-1} (1-x)^{alpha2-1} on (0,1)
    * ``"laguerre"``: alpha1, weight x^{alpha1-1} e^{-x}
    * ``"jacobi_prime"``: a, b, weight x^a (1+x)^{-(a+b+2N)}; needs lambda_1 < b + 1

    The returned value is the full integral over the unordered domain,
    so that lambda = 0 gives the Selberg integral itself.
    """
    lam = lam if isinstance(lam, Partition) else Partition(lam)
    parts = lam.padded(n)
    family = family.lower().replace("-", "_")
    nums, dens = [], []
    if family == "jacobi":
        a1, a2 = float(params["alpha1"]), float(params["alpha2"])
        for k in range(1, n + 1):
            lk = parts[n - k]
            nums += [a1 + k - 1 + lk, a2 + k - 1]
            dens.append(a1 + a2 + n + k - 2 + lk)
    elif family == "laguerre":
        a1 = float(params["alpha1"])
        for k in range(1, n + 1):
            nums.append(a1 + k - 1 + parts[n - k])
    elif family == "jacobi_prime":
        a, b = float(params["a"]), float(params["b"])
        if parts and not parts[0] < b + 1:
            raise DomainError(f"jacobi_prime norm: need lambda_1 < b + 1, got {parts[0]} with b={b}")
        for k in range(1, n + 1):
            nums += [a + n + 1 - k + parts[k - 1], b + k - parts[k - 1]]
            dens.append(a + b + n + k)
    else:
        raise DomainError(f"norm_lambda: unknown family {family!r}")
    _require_positive(nums, f"norm_lambda[{family}]")
    out = gamma_ratio(nums, dens) * _content_product(parts)
    return out * SignedLogReal(1, log_factorial(n))


def c_gamma(family: str, gammas: Sequence[float], **params) -> SignedLogReal:
    """Product constant C_N attached to an exponent vector gamma.

    * ``"jacobi"`` (alpha2): prod G(g_l+1) G(l-1+alpha2) / G(g_l+N+alpha2)
    * ``"laguerre"``: prod G(g_l+1)
    * ``"jacobi_prime"`` (d): prod G(1+g_k) G(d+N-g_k) / G(d+N+k)

    The integral of ``prod w(x_l) Vandermonde(x) det[x_j^{g_i}]`` equals
    ``N! * C_N * prod_{i<j} (g_i - g_j)``.
    """
    g = [float(v) for v in gammas]
    n = len(g)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(g[i] - g[j]) <= 1e-9:
                raise DomainError("c_gamma: exponents must be pairwise distinct")
    family = family.lower().replace("-", "_")
    nums, dens = [], []
    if family == "jacobi":
        a2 = float(params["alpha2"])
        for l, gl in enumerate(g, start=1):
            nums += [gl + 1, l - 1 + a2]
            dens.append(gl + n + a2)
    elif family == "laguerre":
        nums = [gl + 1 for gl in g]
    elif family == "jacobi_prime":
        d = float(params["d"])
        for k, gk in enumerate(g, start=1):
            if not d + n - gk > 0:
                raise DomainError(f"c_gamma[jacobi_prime]: need d + N - gamma_{k} > 0")
            nums += [1 + gk, d + n - gk]
            dens.append(d + n + k)
    else:
        raise DomainError(f"c_gamma: unknown family {family!r}")
    _require_positive(nums, f"c_gamma[{family}]")
    return gamma_ratio(nums, dens)


def z_mb(spec: EnsembleSpec) -> SignedLogReal:
    """Normalisation Z_N of a half-line Muttalib-Borodin ensemble (closed form)."""
    w, n, th = spec.weight, spec.n, spec.theta
    nums, dens = [], []
    if isinstance(w, Jacobi):
        for l in range(1, n + 1):
            nums += [th * (l - 1) + w.a + 1, l + w.b, l + 1]
            dens.append(th * (l - 1) + n + w.a + w.b + 1)
    elif isinstance(w, Laguerre):
        for l in range(1, n + 1):
            nums += [th * (l - 1) + w.a + 1, l + 1]
    elif isinstance(w, JacobiPrime):
        for k in range(1, n + 1):
            nums += [th * (k - 1) + w.alpha + 1, w.beta - w.alpha - n - th * (k - 1), k + 1]
            dens.append(w.beta - n + k)
    else:
        raise DomainError(f"z_mb needs a half-line weight, got {w.family}")
    _require_positive(nums, f"z_mb[{w.family}]")
    scale = SignedLogReal(1, 0.5 * n * (n - 1) * math.log(th))
    return gamma_ratio(nums, dens) * scale


def _halves(n: int) -> tuple[int, int]:
    return (n + 1) // 2, n // 2


def z_mb_fullline(spec: EnsembleSpec) -> SignedLogReal:
    """Z_N for an even full-line weight, factorised over the parity-reduced ensembles."""
    if not spec.weight.fullline:
        raise DomainError(f"z_mb_fullline needs a full-line weight, got {spec.weight.family}")
    n1, n2 = _halves(spec.n)
    out = SignedLogReal(
        1, log_factorial(spec.n) - log_factorial(n1) - log_factorial(n2)
    )
    out = out * z_mb(EnsembleSpec(even_part(spec.weight), n1, spec.theta))
    if n2:
        out = out * z_mb(EnsembleSpec(odd_part(spec.weight, spec.theta), n2, spec.theta))
    return out


def z_ensemble(spec: EnsembleSpec) -> SignedLogReal:
    """Closed-form Z_N for any of the six weights."""
    return z_mb_fullline(spec) if spec.fullline else z_mb(spec)


def _det_extended(entries) -> SignedLogReal:
    with mpmath.workdps(EXTENDED_DPS):
        return mpf_to_slr(mpmath.det(mpmath.matrix(entries)))


def _det_double(logs: np.ndarray, signs: np.ndarray) -> SignedLogReal:
    """Determinant of ``signs * exp(logs)`` with each row scaled by its max."""
    finite = np.where(signs != 0, logs, -np.inf)
    shift = np.max(finite, axis=1)
    if np.any(~np.isfinite(shift)):
        return SignedLogReal.zero()
    mat = signs * np.exp(np.where(signs != 0, logs - shift[:, None], -np.inf))
    sign, logdet = np.linalg.slogdet(mat)
    if sign == 0:
        return SignedLogReal.zero()
    return SignedLogReal(int(sign), float(logdet + shift.sum()))


def _oracle(n: int, entry, entry_mp) -> SignedLogReal:
    if n == 0:
        return SignedLogReal.one()
    fact = SignedLogReal(1, log_factorial(n))
    if precision() == "extended":
        with mpmath.workdps(EXTENDED_DPS):
            rows = [[entry_mp(j, k) for k in range(1, n + 1)] for j in range(1, n + 1)]
            return _det_extended(rows) * fact
    vals = [[entry(j, k) for k in range(1, n + 1)] for j in range(1, n + 1)]
    logs = np.array([[v.logmag for v in row] for row in vals])
    signs = np.array([[v.sign for v in row] for row in vals], dtype=float)
    return _det_double(logs, signs) * fact


def z_oracle_moments(spec: EnsembleSpec) -> SignedLogReal:
    """``N! det[moment(w, j-1+theta(k-1))]``: the Andreief form of Z_N."""
    w, th = spec.weight, spec.theta
    if w.fullline:
        raise DomainError("z_oracle_moments needs a half-line weight")
    return _oracle(
        spec.n,
        lambda j, k: moment(w, j - 1 + th * (k - 1)),
        lambda j, k: moment_mp(w, mpmath.mpf(j - 1) + mpmath.mpf(th) * (k - 1)),
    )


def z_oracle_fullline(spec: EnsembleSpec) -> SignedLogReal:
    """``N! det[fullline_moment(w, j, k, theta)]`` with its chequerboard of zeros."""
    w, th = spec.weight, spec.theta
    if not w.fullline:
        raise DomainError("z_oracle_fullline needs a full-line weight")
    return _oracle(
        spec.n,
        lambda j, k: fullline_moment(w, j, k, th),
        lambda j, k: fullline_moment_mp(w, j, k, th),
    )

