"""Self-checks behind ``mbens verify``.

Each suite compares two independent routes to the same quantity over a
small deterministic sweep and reports the worst relative discrepancy.
Known misprints in published closed forms are evaluated separately: those
checks pass when the printed form stays *discrepant* by the predicted
amount, so an accidental "fix" of a formula is noticed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .biortho import (
    ConditioningError,
    ConsistencyError,
    f_nu_bruteforce,
    f_nu_laguerre,
    h_k,
    h_k_check,
    oracle_char_poly,
    p_poly,
    p_poly_gamma,
    q_poly,
    reference_classical,
)
from .kernel import ConvergenceError, build_kernel, kernel_trace, projection_error, verify_biortho
from .norms import (
    laguerre_selberg,
    log_factorial,
    selberg,
    z_ensemble,
    z_mb,
    z_mb_fullline,
    z_oracle_fullline,
    z_oracle_moments,
)
from .specfun import SignedLogReal
from .weights import (
    EnsembleSpec,
    GenCauchy,
    GenGaussian,
    GenSymJacobi,
    Jacobi,
    JacobiPrime,
    Laguerre,
    Weight,
)

__all__ = [
    "CheckResult",
    "ErratumCheck",
    "SUITES",
    "run_suites",
    "half_line_draw",
    "full_line_draw",
    "rel_coeff_error",
]

THETAS = (0.5, 1.0, 1.5, 2.0, 2.5)


@dataclass(frozen=True)
class CheckResult:
    identity: str
    cases: int
    max_error: float
    tol: float
    seconds: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.max_error < self.tol


@dataclass(frozen=True)
class ErratumCheck:
    """A printed formula that must keep disagreeing with the truth as predicted."""

    name: str
    cases: int
    min_discrepancy: float  # smallest |truth/printed - 1| seen
    factor_error: float  # worst error in the predicted discrepancy
    tol: float

    @property
    def reproduced(self) -> bool:
        return self.cases > 0 and self.min_discrepancy > 10 * self.tol and self.factor_error < self.tol


@dataclass
class _Report:
    results: list[CheckResult] = field(default_factory=list)
    errata: list[ErratumCheck] = field(default_factory=list)


# ---------------------------------------------------------------- draws


def half_line_draw(rng: np.random.Generator, n: int, theta: float) -> list[Weight]:
    """One random valid Laguerre, Jacobi and Jacobi-prime weight for size n."""
    a = rng.uniform(-0.5, 2.0)
    b = rng.uniform(-0.5, 2.0)
    alpha = rng.uniform(-0.5, 2.0)
    beta = alpha + n + theta * (n - 1) + rng.uniform(0.5, 4.0)
    return [Laguerre(a), Jacobi(a, b), JacobiPrime(alpha, beta)]


def _cauchy_floor(c: float, n: int, theta: float) -> float:
    """Smallest alpha making GenCauchy(c, alpha) normalisable at size n."""
    n1, n2 = (n + 1) // 2, n // 2
    floor = max(c + 0.5, c - 0.5 + n1 + theta * (n1 - 1))
    if n2:
        floor = max(floor, c + theta / 2 + n2 + theta * (n2 - 1))
    return floor


def full_line_draw(rng: np.random.Generator, n: int, theta: float) -> list[Weight]:
    """One random valid generalised Gaussian, symmetric Jacobi and Cauchy weight."""
    c = rng.uniform(-0.4, 2.0)
    return [
        GenGaussian(c),
        GenSymJacobi(c, rng.uniform(-0.9, 3.0)),
        GenCauchy(c, _cauchy_floor(c, n, theta) + rng.uniform(0.5, 4.0)),
    ]


def rel_coeff_error(p, q) -> float:
    """Worst coefficientwise relative gap, scaled by the larger coefficient magnitude."""
    if p.degree != q.degree:
        return math.inf
    worst = 0.0
    for x, y in zip(p.coeffs, q.coeffs):
        scale = max(abs(x), abs(y))
        if scale > 0:
            worst = max(worst, abs(x - y) / scale)
    return worst


def _timed(name: str, tol: float, body: Callable[[], Iterable[float]]) -> CheckResult:
    """Collect the errors yielded by ``body``; a numerical breakdown counts as a failure."""
    start = time.perf_counter()
    errors: list[float] = []
    note = ""
    try:
        for err in body():
            errors.append(err)
    except (ConsistencyError, ConditioningError, ConvergenceError) as exc:
        errors.append(math.inf)
        note = f"{type(exc).__name__}: {exc}"
    return CheckResult(name, len(errors), max(errors, default=math.inf), tol,
                       time.perf_counter() - start, note)


# ---------------------------------------------------------------- suites


def suite_z(rep: _Report, n_max: int, draws: int = 2, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)

    def body():
        for n in range(1, n_max + 1):
            for th in THETAS:
                for _ in range(draws):
                    for w in half_line_draw(rng, n, th):
                        s = EnsembleSpec(w, n, th)
                        yield z_mb(s).rel_diff(z_oracle_moments(s))

    rep.results.append(_timed("z_closed_form_vs_moment_determinant", 1e-10, body))

    def selberg_body():
        for n in range(1, max(n_max, 8) + 1):
            for a, b in ((0.3, 0.4), (1.7, 2.2)):
                yield z_mb(EnsembleSpec(Jacobi(a, b), n, 1.0)).rel_diff(selberg(n, a + 1, b + 1, 1.0))
                yield z_mb(EnsembleSpec(Laguerre(a), n, 1.0)).rel_diff(laguerre_selberg(n, a + 1, 1.0))

    rep.results.append(_timed("z_theta1_vs_selberg", 1e-12, selberg_body))


def suite_parity(rep: _Report, n_max: int, draws: int = 2, seed: int = 1) -> None:
    rng = np.random.default_rng(seed)

    def body():
        for n in range(1, n_max + 1):
            for th in THETAS:
                for _ in range(draws):
                    for w in full_line_draw(rng, n, th):
                        s = EnsembleSpec(w, n, th)
                        yield z_mb_fullline(s).rel_diff(z_oracle_fullline(s))

    rep.results.append(_timed("parity_factorisation_vs_fullline_determinant", 1e-10, body))


def _hk_weights(n: int, theta: float) -> list[Weight]:
    rng = np.random.default_rng(17)
    return half_line_draw(rng, n, theta) + full_line_draw(rng, n, theta)


def suite_hk(rep: _Report, n_max: int) -> None:
    kmax = max(n_max, 1)

    def product_body():
        for th in (0.5, 1.0, 2.0):
            for w in _hk_weights(kmax + 1, th):
                logs = SignedLogReal(1, 0.0)
                for n in range(1, kmax + 2):
                    logs = logs * h_k(w, th, n - 1)
                    z = z_ensemble(EnsembleSpec(w, n, th))
                    yield (logs * SignedLogReal(1, log_factorial(n))).rel_diff(z)

    rep.results.append(_timed("z_equals_nfact_prod_h", 1e-11, product_body))

    def printed_body():
        for th in (0.5, 1.0, 2.0):
            for w in _hk_weights(kmax + 1, th)[:3]:
                if isinstance(w, Jacobi):
                    continue
                for k in range(kmax + 1):
                    yield abs(h_k_check(w, th, k).ratio - 1.0)

    rep.results.append(_timed("printed_h_laguerre_jacobi_prime_vs_z_ratio", 1e-11, printed_body))

    ratios = []
    for th in (0.5, 1.0, 2.0):
        w = _hk_weights(kmax + 1, th)[1]
        for k in range(kmax + 1):
            chk = h_k_check(w, th, k)
            ratios.append((chk.ratio, chk.expected_ratio))
    rep.errata.append(
        ErratumCheck(
            "printed_h_jacobi_off_by_factor_z_plus_k",
            len(ratios),
            min(abs(r - 1.0) for r, _ in ratios),
            max(abs(r / e - 1.0) for r, e in ratios),
            1e-9,
        )
    )


def suite_biortho(rep: _Report, n_max: int) -> None:
    kmax = min(max(n_max, 1), 8)

    def body():
        for th in (0.5, 1.0, 2.0):
            for w in _hk_weights(kmax, th):
                if w.fullline and th == 0.5:
                    continue
                yield verify_biortho(w, th, kmax)

    rep.results.append(_timed(f"biorthogonality_gram_kmax{kmax}", 1e-8, body))


def suite_heine(rep: _Report, n_max: int) -> None:
    kmax = min(max(n_max, 1), 5)

    def body():
        for th in (0.5, 1.0, 2.0):
            for w in _hk_weights(kmax + 1, th)[:3]:
                for k in range(1, kmax + 1):
                    yield rel_coeff_error(q_poly(w, k, th), oracle_char_poly("q", w, k, th))
                    yield rel_coeff_error(p_poly(w, k, th), oracle_char_poly("p", w, k, th))

    rep.results.append(_timed("heine_subset_determinants", 1e-9, body))

    def gamma_body():
        for th in (0.5, 1.0, 2.0):
            for w in _hk_weights(kmax + 1, th)[:3]:
                for k in range(1, kmax + 1):
                    if isinstance(w, Laguerre):
                        g = [w.a + th * j for j in range(k)]
                        ref = p_poly_gamma("laguerre", g)
                    elif isinstance(w, Jacobi):
                        g = [w.a + th * j for j in range(k)]
                        ref = p_poly_gamma("jacobi", g, alpha2=w.b + 1)
                    else:
                        g = [w.alpha + th * j for j in range(k)]
                        ref = p_poly_gamma("jacobi_prime", g, beta=w.beta)
                    yield rel_coeff_error(p_poly(w, k, th), ref)

    rep.results.append(_timed("p_closed_form_vs_gamma_specialisation", 1e-12, gamma_body))


def suite_collapse(rep: _Report, n_max: int) -> None:
    def body():
        for w in (Laguerre(0.0), Laguerre(0.7), Jacobi(0.0, 0.0), Jacobi(0.3, 1.2)):
            for k in range(11):
                ref = reference_classical(w, k)
                yield rel_coeff_error(p_poly(w, k, 1.0), ref)
                yield rel_coeff_error(q_poly(w, k, 1.0), ref)

    rep.results.append(_timed("theta1_collapse_to_classical", 1e-10, body))


def _distinct_gammas(rng, n):
    return list(rng.permutation(np.arange(n)) * 0.731 + rng.uniform(-0.4, 0.4, n) - 0.2)


def suite_fnu(rep: _Report, n_max: int, seed: int = 5) -> None:
    rng = np.random.default_rng(seed)
    nmax = min(max(n_max, 2) + 2, 7)

    def body():
        for n in range(1, nmax + 1):
            for _ in range(3):
                g = _distinct_gammas(rng, n)
                for nu in range(n + 1):
                    bf = f_nu_bruteforce(nu, g)
                    yield abs(f_nu_laguerre(nu, g) - bf) / max(abs(bf), 1.0)

    rep.results.append(_timed("f_nu_closed_form_vs_subset_sum", 1e-11, body))

    printed = []

    def rec_body():
        for n in range(2, min(nmax, 6) + 1):
            g = [-1.0] + _distinct_gammas(rng, n - 1)
            rest = [x + 1 for x in g[1:]]
            for nu in range(1, n):
                left = f_nu_laguerre(nu, g)
                yield abs(left - f_nu_laguerre(nu - 1, rest)) / max(abs(left), 1.0)
                printed.append(abs(left - f_nu_laguerre(nu, rest)) / max(abs(left), 1.0))

    rep.results.append(_timed("f_nu_recurrence_at_gamma1_minus1", 1e-12, rec_body))
    rep.errata.append(
        ErratumCheck(
            "printed_f_recurrence_same_nu",
            len(printed),
            min(printed, default=0.0),
            0.0,
            1e-12,
        )
    )


def suite_kernel(rep: _Report, n_max: int) -> None:
    nmax = min(max(n_max, 1), 6)
    rng = np.random.default_rng(11)

    def window(w):
        if w.fullline:
            return (-0.9, 0.9) if isinstance(w, GenSymJacobi) else (-1.5, 1.5)
        return (0.05, 0.95) if isinstance(w, Jacobi) else (0.1, 3.0)

    def trace_body():
        for th in (0.5, 1.0, 2.0):
            for w in _hk_weights(nmax, th):
                for n in range(1, nmax + 1):
                    yield abs(kernel_trace(build_kernel(EnsembleSpec(w, n, th))) / n - 1.0)

    rep.results.append(_timed("kernel_trace_equals_n", 1e-8, trace_body))

    def proj_body():
        for th in (0.5, 1.0, 2.0):
            for w in _hk_weights(nmax, th):
                for n in range(1, min(nmax, 5) + 1):
                    lo, hi = window(w)
                    pairs = list(zip(rng.uniform(lo, hi, 9), rng.uniform(lo, hi, 9)))
                    yield projection_error(build_kernel(EnsembleSpec(w, n, th)), pairs)

    rep.results.append(_timed("kernel_projection_identity", 1e-6, proj_body))


SUITES: dict[str, Callable[[_Report, int], None]] = {
    "z": suite_z,
    "parity": suite_parity,
    "hk": suite_hk,
    "biortho": suite_biortho,
    "heine": suite_heine,
    "collapse": suite_collapse,
    "fnu": suite_fnu,
    "kernel": suite_kernel,
}


def run_suites(names: Iterable[str], n_max: int) -> tuple[list[CheckResult], list[ErratumCheck]]:
    """Run the named suites ("all" expands to every suite)."""
    names = list(names)
    if "all" in names:
        names = list(SUITES)
    rep = _Report()
    for name in names:
        SUITES[name](rep, n_max)
    return rep.results, rep.errata
