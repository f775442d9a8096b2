"""Gauss-Legendre quadrature from the Jacobi matrix, used as an independent
route to Legendre coefficients.

The truncated multiplication-by-x matrix is diagonally similar to a
symmetric tridiagonal matrix with off-diagonal entries
``sqrt(sup(n) * sub(n+1))`` (``n/sqrt(4n^2-1)`` for Legendre).  Its
eigenvalues are the zeros of ``P_N``; the squared first components of the
normalized eigenvectors, times the measure 2, are the weights.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import DEFAULT_MODE, LEGENDRE, BasisSpec, CoefficientVector, JacobiOperator, ScalarMode, _context

# extra decimal digits carried through the eigen-solve
_GUARD_DIGITS = 10


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple
    weights: tuple

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable):
        return sum(w * f(x) for x, w in zip(self.nodes, self.weights))


def symmetric_jacobi_matrix(N: int) -> np.ndarray:
    """Float64 N x N symmetric Jacobi matrix for the Legendre weight."""
    op = JacobiOperator(LEGENDRE, ScalarMode.rational())
    J = np.zeros((N, N))
    for n in range(N - 1):
        b = float(op.super_diagonal(n) * op.sub_diagonal(n + 1)) ** 0.5
        J[n, n + 1] = J[n + 1, n] = b
    return J


@functools.lru_cache(maxsize=128)
def _rule_float64(N: int) -> QuadratureRule:
    vals, vecs = np.linalg.eigh(symmetric_jacobi_matrix(N))
    weights = 2.0 * vecs[0, :] ** 2
    return QuadratureRule(tuple(float(x) for x in vals), tuple(float(w) for w in weights))


@functools.lru_cache(maxsize=128)
def _rule_mp(N: int, digits: int) -> QuadratureRule:
    ctx = _context(digits + _GUARD_DIGITS)
    op = JacobiOperator(LEGENDRE, ScalarMode.rational())
    J = ctx.zeros(N, N)
    for n in range(N - 1):
        prod = op.super_diagonal(n) * op.sub_diagonal(n + 1)
        b = ctx.sqrt(ctx.mpf(prod.numerator) / prod.denominator)
        J[n, n + 1] = J[n + 1, n] = b
    vals, vecs = ctx.eigsy(J)
    order = sorted(range(N), key=lambda i: vals[i])
    out = _context(digits)
    nodes = tuple(out.mpf(vals[i]) for i in order)
    weights = tuple(out.mpf(2 * vecs[0, i] ** 2) for i in order)
    return QuadratureRule(nodes, weights)


def gauss_legendre_rule(N: int, mode: ScalarMode | None = None) -> QuadratureRule:
    """N-point Gauss-Legendre rule by Golub-Welsch.

    ``mode=None`` solves in float64 (numpy); a float mode solves with mpmath
    at that precision.  Rational mode is served at its digit budget since the
    nodes are irrational.
    """
    if N < 1:
        raise ValueError("a quadrature rule needs N >= 1")
    if mode is None:
        return _rule_float64(N)
    return _rule_mp(N, mode.digits)


def _legendre_values(x, n_max: int) -> list:
    values = [x * 0 + 1, x]
    for n in range(1, n_max):
        values.append(((2 * n + 1) * x * values[n] - n * values[n - 1]) / (n + 1))
    return values[: n_max + 1]


def coefficients_by_quadrature(f: Callable, N_rule: int, n_max: int,
                               basis: BasisSpec = LEGENDRE,
                               mode: ScalarMode = DEFAULT_MODE,
                               degree: int | None = None) -> CoefficientVector:
    """Legendre coefficients a_n = (2n+1)/2 * sum_i w_i f(x_i) P_n(x_i).

    Pass the polynomial ``degree`` of ``f`` to have exactness checked; without
    it a warning notes that the result carries a truncation error.
    """
    if not basis.is_legendre:
        raise ValueError("the quadrature oracle only covers the Legendre basis (d=2)")
    if degree is None:
        warnings.warn("exactness of the quadrature cannot be verified for a non-polynomial f",
                      stacklevel=2)
    elif 2 * N_rule - 1 < degree + n_max:
        raise ValueError(
            f"{N_rule}-point rule is not exact for degree {degree} times P_{n_max}"
        )
    float_mode = mode if not mode.exact else ScalarMode.high_precision(max(mode.digits, 16))
    rule = gauss_legendre_rule(N_rule, float_mode)
    sums = [float_mode.zero] * (n_max + 1)
    for x, w in zip(rule.nodes, rule.weights):
        fx = w * f(x)
        for n, p in enumerate(_legendre_values(x, n_max)):
            sums[n] += fx * p
    coeffs = tuple(sums[n] * (2 * n + 1) / 2 for n in range(n_max + 1))
    return CoefficientVector(basis, coeffs, float_mode)
