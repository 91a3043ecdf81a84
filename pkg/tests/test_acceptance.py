"""Acceptance criteria 1-10, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion
is printed in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import pytest
from scipy import integrate

from mbens.biortho import (
    f_nu_bruteforce,
    f_nu_laguerre,
    h_k,
    h_k_check,
    oracle_char_poly,
    p_poly,
    q_poly,
    reference_classical,
)
from mbens.kernel import build_kernel, expected_linear_statistic, kernel_trace, projection_error, verify_biortho
from mbens.norms import (
    selberg,
    z_ensemble,
    z_mb,
    z_mb_fullline,
    z_oracle_fullline,
    z_oracle_moments,
)
from mbens.sampler import linear_statistic, run_chain
from mbens.specfun import SignedLogReal, gen_pochhammer
from mbens.symfun import elementary_symmetric, mu_partition, schur_at_ones, schur_eval
from mbens.verify import full_line_draw, half_line_draw, rel_coeff_error
from mbens.weights import EnsembleSpec, GenSymJacobi, Jacobi, Laguerre

THETAS = (0.5, 1.0, 1.5, 2.0, 2.5)


@dataclass
class Outcome:
    number: int
    title: str
    passed: bool = True
    details: list[str] = field(default_factory=list)

    def check(self, label: str, value: float, limit: float, below: bool = True) -> None:
        ok = value < limit if below else value > limit
        self.passed &= ok
        op = "<" if below else ">"
        self.details.append(f"{label} {value:.2e} {op} {limit:.0e}{'' if ok else ' (FAILED)'}")

    def line(self) -> str:
        return f"criterion {self.number:>2} {'PASS' if self.passed else 'FAIL'}  {self.title}: " + "; ".join(self.details)


RESULTS: dict[int, Outcome] = {}


def _record(out: Outcome) -> Outcome:
    RESULTS[out.number] = out
    return out


# ---------------------------------------------------------------- 1, 2


def criterion_1() -> Outcome:
    out = Outcome(1, "closed-form Z vs moment determinant")
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, cases = 0.0, 0
    for n in range(1, 7):
        for th in THETAS:
            for _ in range(5):
                for w in half_line_draw(rng, n, th):
                    s = EnsembleSpec(w, n, th)
                    worst = max(worst, z_mb(s).rel_diff(z_oracle_moments(s)))
                    cases += 1
    elapsed = time.perf_counter() - start
    out.check(f"max rel err over {cases} cases", worst, 1e-10)
    out.check("runtime s", elapsed, 5.0)
    return _record(out)


def criterion_2() -> Outcome:
    out = Outcome(2, "parity factorisation vs full-line determinant")
    rng = np.random.default_rng(2025)
    worst, cases = 0.0, 0
    for n in range(1, 7):
        for th in THETAS:
            for _ in range(5):
                for w in full_line_draw(rng, n, th):
                    s = EnsembleSpec(w, n, th)
                    worst = max(worst, z_mb_fullline(s).rel_diff(z_oracle_fullline(s)))
                    cases += 1
    out.check(f"max rel err over {cases} cases", worst, 1e-10)
    return _record(out)


# ---------------------------------------------------------------- 3


def _square_quad(f):
    """Adaptive 2-D quadrature over the unit square, split along the diagonal kink."""
    opts = dict(epsabs=0, epsrel=1e-12)
    below = integrate.dblquad(lambda y, x: f(x, y), 0, 1, 0, lambda x: x, **opts)[0]
    above = integrate.dblquad(lambda y, x: f(x, y), 0, 1, lambda x: x, 1, **opts)[0]
    return below + above


def criterion_3() -> Outcome:
    out = Outcome(3, "Selberg sanity")
    q1 = _square_quad(lambda x, y: (x - y) ** 2)
    q2 = _square_quad(lambda x, y: abs(x - y))
    err = max(
        abs(selberg(2, 1, 1, 1).to_real() / q1 - 1),
        abs(selberg(2, 1, 1, 0.5).to_real() / q2 - 1),
        abs(selberg(2, 1, 1, 1).to_real() * 6 - 1),
        abs(selberg(2, 1, 1, 0.5).to_real() * 3 - 1),
    )
    out.check("S_2 vs quadrature", err, 1e-8)
    worst = 0.0
    rng = np.random.default_rng(3)
    for n in range(1, 9):
        for a, b in [(0.0, 0.0)] + [tuple(rng.uniform(-0.5, 3.0, 2)) for _ in range(4)]:
            worst = max(worst, z_mb(EnsembleSpec(Jacobi(a, b), n, 1.0)).rel_diff(selberg(n, a + 1, b + 1, 1.0)))
    out.check("Z^J(theta=1) vs S_N(a+1,b+1,1), N<=8", worst, 1e-12)
    return _record(out)


# ---------------------------------------------------------------- 4


def _six_weights(rng, n, theta):
    return half_line_draw(rng, n, theta) + full_line_draw(rng, n, theta)


def criterion_4() -> Outcome:
    out = Outcome(4, "norm consistency and printed-norm erratum")
    kmax = 10
    rng = np.random.default_rng(44)
    prod_err = ratio_err = printed_err = 0.0
    factor_err, min_disc = 0.0, math.inf
    for th in (0.5, 1.0, 1.5, 2.0):
        for w in _six_weights(rng, kmax + 1, th):
            zs = [SignedLogReal.one()] + [z_ensemble(EnsembleSpec(w, n, th)) for n in range(1, kmax + 2)]
            acc = SignedLogReal.one()
            for k in range(kmax + 1):
                h = h_k(w, th, k)
                acc = acc * h * (k + 1)  # running N! prod h
                prod_err = max(prod_err, acc.rel_diff(zs[k + 1]))
                ratio_err = max(ratio_err, h.rel_diff(zs[k + 1] / (zs[k] * (k + 1))))
                if w.fullline:
                    continue
                chk = h_k_check(w, th, k)
                if isinstance(w, Jacobi):
                    factor_err = max(factor_err, abs(chk.ratio / chk.expected_ratio - 1))
                    min_disc = min(min_disc, abs(chk.ratio - 1))
                else:
                    printed_err = max(printed_err, abs(chk.ratio - 1))
    out.check("N! prod h_k vs Z_N", prod_err, 1e-11)
    out.check("h_k vs Z-ratio", ratio_err, 1e-11)
    out.check("printed h^L, h^Jp vs Z-ratio", printed_err, 1e-11)
    out.check("printed h^J discrepancy factor error", factor_err, 1e-9)
    out.check("printed h^J smallest discrepancy", min_disc, 1e-3, below=False)
    return _record(out)


# ---------------------------------------------------------------- 5


def criterion_5() -> Outcome:
    out = Outcome(5, "biorthogonality Gram matrix, kmax=8")
    rng = np.random.default_rng(55)
    start = time.perf_counter()
    worst = 0.0
    cases = []
    for th in (0.5, 1.0, 1.5, 2.0):
        cases += [(w, th) for w in half_line_draw(rng, 8, th)]
    for th in (1.0, 2.0):
        cases += [(w, th) for w in full_line_draw(rng, 8, th)]
    for w, th in cases:
        worst = max(worst, verify_biortho(w, th, 8))
    elapsed = time.perf_counter() - start
    out.check(f"max normalised Gram error over {len(cases)} cases", worst, 1e-8)
    out.check("runtime s", elapsed, 60.0)
    return _record(out)


# ---------------------------------------------------------------- 6, 7


def criterion_6() -> Outcome:
    out = Outcome(6, "Heine subset-determinant oracle, k<=5")
    rng = np.random.default_rng(66)
    worst = 0.0
    for th in (0.5, 1.0, 2.0):
        for w in half_line_draw(rng, 6, th):
            for k in range(1, 6):
                worst = max(worst, rel_coeff_error(q_poly(w, k, th), oracle_char_poly("q", w, k, th)))
                worst = max(worst, rel_coeff_error(p_poly(w, k, th), oracle_char_poly("p", w, k, th)))
    out.check("max coefficient rel err", worst, 1e-9)
    return _record(out)


def criterion_7() -> Outcome:
    out = Outcome(7, "theta=1 collapse to classical polynomials, k<=10")
    worst = 0.0
    for w in (Laguerre(0.0), Laguerre(0.65), Laguerre(2.4), Jacobi(0.0, 0.0), Jacobi(0.35, 1.7), Jacobi(-0.5, -0.5)):
        for k in range(11):
            ref = reference_classical(w, k)
            worst = max(worst, rel_coeff_error(p_poly(w, k, 1.0), ref), rel_coeff_error(q_poly(w, k, 1.0), ref))
    out.check("max coefficient rel err", worst, 1e-10)
    return _record(out)


# ---------------------------------------------------------------- 8


def _content_hook(parts, n):
    out = 1.0
    conj = [sum(1 for p in parts if p > j) for j in range(parts[0] if parts else 0)]
    for i, p in enumerate(parts):
        for j in range(p):
            out *= (n + j - i) / ((p - j - 1) + (conj[j] - i - 1) + 1)
    return out


_SCHUR_2 = {
    (1,): lambda x, y: x + y,
    (2,): lambda x, y: x * x + x * y + y * y,
    (1, 1): lambda x, y: x * y,
}


def criterion_8() -> Outcome:
    out = Outcome(8, "symmetric-function layer")
    lams = [(1,), (2,), (1, 1), (2, 1), (3, 1), (2, 2), (2, 1, 1), (3, 2, 1)]
    prod_err = limit_err = 0.0
    eps = 1e-4
    for n in range(1, 5):
        for lam in lams:
            if len(lam) > n:
                continue
            exact = schur_at_ones(lam, n).to_real()
            prod_err = max(prod_err, abs(exact / _content_hook(lam, n) - 1))
            if n == 1:
                continue
            # linear extrapolation to e -> 0 of the bialternant at 1 + i e
            f1 = schur_eval(lam, [1 + (i + 1) * eps for i in range(n)])
            f2 = schur_eval(lam, [1 + 2 * (i + 1) * eps for i in range(n)])
            limit_err = max(limit_err, abs((2 * f1 - f2) / exact - 1))
    out.check("s(1^N) product vs content-hook", prod_err, 1e-12)
    out.check("near-coincident bialternant limit (eps=1e-4, N<=4)", limit_err, 1e-4)

    rng = np.random.default_rng(88)
    pieri, points = 0.0, 0
    while points < 100:
        theta, k = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        x = rng.uniform(0.2, 2.0, k)
        if k > 1 and np.min(np.abs(np.subtract.outer(x, x)) + np.eye(k)) < 0.05:
            continue
        base = schur_eval(mu_partition(theta, k, 0), x)
        for r in range(k + 1):
            rhs = schur_eval(mu_partition(theta, k, r), x)
            pieri = max(pieri, abs(elementary_symmetric(r, x**theta) * base / rhs - 1))
        points += 1
    out.check("dual Pieri at 100 points", pieri, 1e-9)

    kk = 0.0
    n = 2
    for lam, s in _SCHUR_2.items():
        for a1, a2 in ((1.0, 1.0), (2.0, 1.5), (1.3, 3.0)):
            w = lambda x, y: (x * y) ** (a1 - 1) * ((1 - x) * (1 - y)) ** (a2 - 1) * (x - y) ** 2
            quad = _square_quad(lambda x, y: w(x, y) * s(x, y)) / selberg(n, a1, a2, 1.0).to_real()
            closed = (
                schur_at_ones(lam, n)
                * gen_pochhammer(a1 + n - 1, 1.0, lam)
                / gen_pochhammer(a1 + a2 + 2 * (n - 1), 1.0, lam)
            ).to_real()
            kk = max(kk, abs(closed / quad - 1))
    out.check("Kadell-Kaneko tau=1, N=2 vs quadrature", kk, 1e-8)
    return _record(out)


# ---------------------------------------------------------------- 9


def criterion_9() -> Outcome:
    out = Outcome(9, "F_nu closed form and recurrence")
    rng = np.random.default_rng(99)
    worst = 0.0
    for n in range(1, 8):
        for _ in range(4):
            g = list(rng.permutation(n) * 0.77 + rng.uniform(-0.3, 0.3, n) - 0.2)
            for nu in range(n + 1):
                bf = f_nu_bruteforce(nu, g)
                worst = max(worst, abs(f_nu_laguerre(nu, g) - bf) / max(abs(bf), 1.0))
    out.check("closed form vs subset sum, N<=7", worst, 1e-11)
    rec = 0.0
    for n in range(2, 7):
        for _ in range(3):
            g = [-1.0] + list(rng.permutation(n - 1) * 0.9 + rng.uniform(0.0, 0.3, n - 1))
            shifted = [v + 1 for v in g[1:]]
            for nu in range(1, n):
                left = f_nu_laguerre(nu, g)
                rec = max(rec, abs(left - f_nu_laguerre(nu - 1, shifted)) / max(abs(left), 1.0))
    out.check("recurrence at gamma_1 = -1", rec, 1e-12)
    return _record(out)


# ---------------------------------------------------------------- 10


def _window(w):
    if w.fullline:
        return (-0.9, 0.9) if isinstance(w, GenSymJacobi) else (-1.5, 1.5)
    return (0.05, 0.95) if isinstance(w, Jacobi) else (0.1, 3.0)


def criterion_10(seed: int = 1) -> Outcome:
    out = Outcome(10, "kernel trace, projection and sampler")
    rng = np.random.default_rng(1010)
    start = time.perf_counter()
    trace = proj = 0.0
    for th in (0.5, 2.0):
        for w in _six_weights(rng, 6, th):
            for n in range(1, 7):
                K = build_kernel(EnsembleSpec(w, n, th))
                trace = max(trace, abs(kernel_trace(K) / n - 1))
                lo, hi = _window(w)
                proj = max(proj, projection_error(K, zip(rng.uniform(lo, hi, 4), rng.uniform(lo, hi, 4))))
    out.check("trace rel err, N<=6", trace, 1e-8)
    out.check("projection rel err, N<=6", proj, 1e-6)

    spec = EnsembleSpec(Laguerre(1.0), 4, 2.0)
    predicted = expected_linear_statistic(build_kernel(spec), lambda x: x, growth=1.0)
    chain = run_chain(spec, 200_000, seed=seed)
    mean, se = linear_statistic(chain.samples, "sum_x")
    out.check(f"|sampler - kernel| / stderr (mean {mean:.4f}, kernel {predicted:.4f})", abs(mean - predicted) / se, 3.0)
    out.check("runtime s", time.perf_counter() - start, 30.0)
    return _record(out)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(criterion):
    out = criterion()
    print(out.line())
    assert out.passed, out.line()


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        result = crit()
        print(result.line(), flush=True)
        failed += not result.passed
    raise SystemExit(1 if failed else 0)
