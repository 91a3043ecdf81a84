"""Correlation kernel of a Muttalib-Borodin ensemble and quadrature checks.

The bare kernel is

    K(x, y) = sum_{k<N} p_k(x) s(y)^k q_k(|y|^theta) / h_k

with s(y) = sgn(y) for the full-line weights and 1 otherwise.  n-point
correlations are ``det[K(x_i, x_j)]`` times ``prod w(x_i)``; the weighted
kernel ``K(x, y) w(y)`` carries those weight factors and is itself a
projection kernel.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import gmpy2
import numpy as np

from .biortho import MonicPoly, NormSequence, biortho_poly, norm_sequence
from .quadrature import HP_BITS, MAX_NODES, QuadratureRule, make_quadrature, make_quadrature_hp, theta_root
from .specfun import DomainError, precision
from .weights import EnsembleSpec, Weight

__all__ = [
    "KernelSpec",
    "ConvergenceError",
    "build_kernel",
    "kernel_eval",
    "correlation",
    "gram_matrix",
    "verify_biortho",
    "kernel_trace",
    "projection_error",
    "expected_linear_statistic",
    "write_grid_csv",
    "adaptive_integral",
]

START_NODES = 64
# MPFR rules cost O(n^2) object operations; past this the float path is the only option
HP_MAX_NODES = 1024


class ConvergenceError(RuntimeError):
    """Node doubling reached MAX_NODES without meeting the tolerance."""

    def __init__(self, message: str, history: Sequence[tuple[int, float]]):
        super().__init__(message)
        self.history = list(history)


@dataclass(frozen=True)
class KernelSpec:
    spec: EnsembleSpec
    polys_p: tuple[MonicPoly, ...]
    polys_q: tuple[MonicPoly, ...]
    norms: NormSequence

    @property
    def weight(self) -> Weight:
        return self.spec.weight

    @property
    def theta(self) -> float:
        return self.spec.theta

    @property
    def inv_h(self) -> np.ndarray:
        return np.array([1.0 / h.to_real() for h in self.norms.values])

    def p_values(self, x) -> np.ndarray:
        """Rows p_k(x), k < N."""
        x = np.asarray(x, dtype=float)
        return np.array([p(x) for p in self.polys_p])

    def q_values(self, y) -> np.ndarray:
        """Rows s(y)^k q_k(|y|^theta), k < N."""
        return _q_rows(self.polys_q, np.asarray(y, dtype=float), self.theta, self.weight.fullline)

    def weight_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.vectorize(self.weight.density, otypes=[float])(x)


def _q_rows(polys_q, y, theta, fullline) -> np.ndarray:
    u = np.abs(y) ** theta
    rows = [q(u) for q in polys_q]
    if fullline:
        # sgn(y)^k only depends on the parity of k; keeps sgn(0)^even = 1
        s = np.sign(y)
        rows = [r * s ** (k % 2) for k, r in enumerate(rows)]
    return np.array(rows)


def build_kernel(spec: EnsembleSpec) -> KernelSpec:
    """Assemble p_k, q_k and h_k for k < N."""
    w, th, n = spec.weight, spec.theta, spec.n
    ps = tuple(biortho_poly("p", w, k, th) for k in range(n))
    qs = tuple(biortho_poly("q", w, k, th) for k in range(n))
    return KernelSpec(spec, ps, qs, norm_sequence(w, th, n))


def kernel_eval(K: KernelSpec, x, y, weighted: bool = False):
    """K(x, y), or K(x, y) w(y) when ``weighted``; broadcasts over arrays."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    val = np.einsum("k...,k,k...->...", K.p_values(x), K.inv_h, K.q_values(y))
    if weighted:
        val = val * K.weight_values(y)
    return val if np.ndim(val) else float(val)


def correlation(K: KernelSpec, points: Sequence[float], weighted: bool = True) -> float:
    """n-point correlation det[K(x_i, x_j)], times prod w(x_i) when ``weighted``."""
    pts = np.asarray(points, dtype=float)
    if len(pts) > K.spec.n:
        raise DomainError(f"n-point correlation needs n <= N = {K.spec.n}")
    if len(pts) == 0:
        return 1.0
    mat = kernel_eval(K, pts[:, None], pts[None, :])
    val = float(np.linalg.det(np.atleast_2d(mat)))
    if weighted:
        val *= float(np.prod(K.weight_values(pts)))
    return val


# ---------------------------------------------------------------- quadrature


def _usable(rule: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
    keep = rule.log_weights > -740.0
    return rule.nodes[keep], np.exp(rule.log_weights[keep])


def adaptive_integral(
    weight: Weight,
    theta: float,
    tail: float,
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    tol: float,
    scale: Callable[[np.ndarray], np.ndarray] | None = None,
    hp: bool = False,
) -> tuple[np.ndarray, int]:
    """Integrate against w with node doubling until successive results agree.

    ``integrand(nodes, weights)`` returns an array of integrals for the given
    rule; agreement is measured after dividing by ``scale(result)``.  With
    ``hp`` the nodes and weights are gmpy2.mpfr object arrays and the
    integrand runs inside an HP_BITS context; its result is rounded to float.
    """
    root = theta_root(theta)
    history = []
    prev = None
    n = START_NODES
    max_nodes = HP_MAX_NODES if hp else MAX_NODES
    while n <= max_nodes:
        if hp:
            rule = make_quadrature_hp(weight, n, root=root, tail=tail)
            with gmpy2.context(gmpy2.get_context(), precision=HP_BITS):
                raw = integrand(rule.nodes, rule.weights)
            cur = np.vectorize(float, otypes=[float])(np.asarray(raw, dtype=object))
        else:
            x, wts = _usable(make_quadrature(weight, n, root=root, tail=tail))
            cur = np.asarray(integrand(x, wts), dtype=float)
        if prev is not None:
            denom = scale(cur) if scale is not None else np.maximum(np.abs(cur), 1.0)
            change = float(np.max(np.abs(cur - prev) / denom))
            history.append((n, change))
            if change < tol:
                return cur, n
        prev = cur
        n *= 2
    raise ConvergenceError(
        f"quadrature for {weight.family} theta={theta} did not settle below {tol:g} "
        f"by {max_nodes} nodes; last changes {history[-3:]}",
        history,
    )


def _q_rows_hp(polys_q, y, theta, fullline) -> np.ndarray:
    th = gmpy2.mpfr(theta)
    u = np.array([abs(v) ** th for v in y], dtype=object)
    rows = [q.hp_call(u) for q in polys_q]
    if fullline:
        s = np.array([1 if v > 0 else -1 for v in y], dtype=object)
        rows = [r * s ** (k % 2) for k, r in enumerate(rows)]
    return np.array(rows, dtype=object)


def gram_matrix(weight: Weight, theta: float, kmax: int, tol: float = 1e-9, hp: bool | None = None):
    """Gram matrix G_{jl} = int w p_j(x) s(x)^l q_l(|x|^theta) dx, converged to ``tol``.

    Returns (G, h, nodes) with h the Z-ratio norms.  The entries cancel
    heavily (terms up to ~1e12 h_j at kmax = 8), so by default the sums run
    in MPFR with the high-precision coefficients when the extended
    precision mode is active; ``hp`` overrides that choice.
    """
    if hp is None:
        hp = precision() == "extended"
    ps = [biortho_poly("p", weight, k, theta) for k in range(kmax)]
    qs = [biortho_poly("q", weight, k, theta) for k in range(kmax)]
    h = np.array([v.to_real() for v in norm_sequence(weight, theta, kmax).values])
    tail = (kmax - 1) * (1 + theta)

    def integrand(x, wts):
        if hp:
            P = np.array([p.hp_call(x) for p in ps], dtype=object)
            Q = _q_rows_hp(qs, x, theta, weight.fullline)
        else:
            P = np.array([p(x) for p in ps])
            Q = _q_rows(qs, x, theta, weight.fullline)
        return (P * wts) @ Q.T

    G, n = adaptive_integral(weight, theta, tail, integrand, tol, scale=lambda g: h[:, None], hp=hp)
    return G, h, n


def verify_biortho(weight: Weight, theta: float, kmax: int, tol: float = 1e-8) -> float:
    """max_{j,l} |G_{jl} - h_j delta_{jl}| / h_j over the converged Gram matrix."""
    if not 1 <= kmax <= 10:
        raise DomainError("verify_biortho supports 1 <= kmax <= 10")
    G, h, _ = gram_matrix(weight, theta, kmax, tol / 10.0)
    return float(np.max(np.abs(G - np.diag(h)) / h[:, None]))


def _kernel_tail(K: KernelSpec, extra: float = 0.0) -> float:
    return (K.spec.n - 1) * (1 + K.theta) + extra


def kernel_trace(K: KernelSpec, tol: float = 1e-10) -> float:
    """int w(x) K(x, x) dx (equals N)."""

    def integrand(x, wts):
        return np.array([np.sum(wts * kernel_eval(K, x, x))])

    val, _ = adaptive_integral(K.weight, K.theta, _kernel_tail(K), integrand, tol)
    return float(val[0])


def expected_linear_statistic(K: KernelSpec, f: Callable, growth: float = 0.0, tol: float = 1e-10) -> float:
    """E[sum_i f(x_i)] = int f(x) w(x) K(x, x) dx; ``growth`` bounds the degree of f."""

    def integrand(x, wts):
        return np.array([np.sum(wts * f(x) * kernel_eval(K, x, x))])

    val, _ = adaptive_integral(K.weight, K.theta, _kernel_tail(K, growth), integrand, tol)
    return float(val[0])


def projection_error(K: KernelSpec, pairs: Iterable[tuple[float, float]], tol: float = 1e-10) -> float:
    """max relative gap between int w(y) K(x,y) K(y,z) dy and K(x,z) over the pairs."""
    pairs = list(pairs)
    xs = np.array([p[0] for p in pairs])
    zs = np.array([p[1] for p in pairs])

    def integrand(y, wts):
        left = kernel_eval(K, xs[:, None], y[None, :])
        right = kernel_eval(K, y[:, None], zs[None, :])
        return np.einsum("iy,y,yi->i", left, wts, right)

    val, _ = adaptive_integral(K.weight, K.theta, _kernel_tail(K), integrand, tol)
    target = kernel_eval(K, xs, zs)
    return float(np.max(np.abs(val - target) / np.maximum(np.abs(target), 1e-300)))


def write_grid_csv(K: KernelSpec, xs: Sequence[float], ys: Sequence[float], stream) -> int:
    """Write x, y, K_bare, K_weighted rows for the grid xs times ys; returns the row count."""
    stream.write("# " + json.dumps(K.spec.to_json()) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["x", "y", "K_bare", "K_weighted"])
    rows = 0
    for x in xs:
        for y in ys:
            bare = kernel_eval(K, x, y)
            wy = K.weight.density(float(y))
            weighted = bare * wy if math.isfinite(wy) else math.nan
            writer.writerow([format(float(x), ".17g"), format(float(y), ".17g"),
                             format(bare, ".17g"), format(weighted, ".17g")])
            rows += 1
    return rows
