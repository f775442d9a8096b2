"""Regge-type amplitude as a sum of products of linear factors.

For integer ``M >= 0`` and slope ``alpha`` the amplitude is

    A(x) = sum_{k | M+1} c_k * (s + t) / q_k! * ((alpha + t)/k)_{q_k}

with ``s = 1 - alpha + M``, ``t = (x - 1) s / 2``, ``q_k = (M+1)/k - 1`` and
``(z)_q`` the rising factorial.  Each term is a product of ``q_k + 1`` linear
polynomials in ``x``, so its basis expansion follows by repeated application
of the multiplication-by-x operator to the constant ``B_0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

from .basis import (
    DEFAULT_MODE,
    LEGENDRE,
    BasisSpec,
    CoefficientVector,
    ScalarMode,
    _context,
    jacobi_operator,
    mpf_to_fraction,
)

# guard digits kept free of cancellation before a precision warning fires
_GUARD_DIGITS = 10


class PrecisionWarning(UserWarning):
    """Cancellation in an expansion may have consumed the working precision."""


def divisors(m: int) -> list[int]:
    """All positive divisors of ``m`` in ascending order."""
    if m < 1:
        raise ValueError("divisors() needs a positive integer")
    small, large = [], []
    k = 1
    while k * k <= m:
        if m % k == 0:
            small.append(k)
            if k * k != m:
                large.append(m // k)
        k += 1
    return small + large[::-1]


@dataclass(frozen=True)
class CoefficientStrategy:
    """How the divisor weights c_k are chosen.

    With no ``table`` the default law ``c_k = k^-(1+beta) (1 + log(k)^-gamma)``
    is used.  ``log(1) = 0`` makes the bracket undefined at ``k = 1``; there it
    is replaced by ``k1_bracket`` (2 by default).  A ``table`` maps every
    divisor to an explicit weight instead.
    """

    table: Mapping[int, object] | None = None
    k1_bracket: object = 2

    @property
    def kind(self) -> str:
        return "default" if self.table is None else "custom"

    def value(self, k: int, beta, gamma, ctx):
        """c_k as an mpf in ``ctx``."""
        if self.table is not None:
            if k not in self.table:
                raise KeyError(f"no weight given for divisor k={k}")
            return _ctx_value(ctx, self.table[k])
        beta = _ctx_value(ctx, beta)
        gamma = _ctx_value(ctx, gamma)
        base = ctx.power(k, -(1 + beta))
        if k == 1:
            return base * _ctx_value(ctx, self.k1_bracket)
        return base * (1 + ctx.power(ctx.log(k), -gamma))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "k1_bracket": str(self.k1_bracket)}
        if self.table is not None:
            out["table"] = {str(k): str(v) for k, v in sorted(self.table.items())}
        return out


def _ctx_value(ctx, value):
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    if isinstance(value, float):
        return ctx.mpf(repr(value))
    return ctx.mpf(value)


def _as_fraction(value) -> Fraction:
    return ScalarMode.rational().convert(value)


@dataclass(frozen=True)
class AmplitudeSpec:
    """Parameters of one amplitude; ``gamma`` defaults to ``beta + 1``."""

    M: int
    alpha: object
    beta: object = 2
    gamma: object = None
    strategy: CoefficientStrategy = field(default_factory=CoefficientStrategy)

    def __post_init__(self):
        if not isinstance(self.M, int) or self.M < 0:
            raise ValueError(f"M must be a non-negative integer, got {self.M!r}")
        if not 0 <= _as_fraction(self.alpha) <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not _as_fraction(self.beta) > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")

    @property
    def gamma_value(self):
        if self.gamma is not None:
            return self.gamma
        if isinstance(self.beta, float):
            return self.beta + 1
        return _as_fraction(self.beta) + 1

    def s(self, mode: ScalarMode = DEFAULT_MODE):
        return 1 - mode.convert(self.alpha) + self.M

    def t(self, x, mode: ScalarMode = DEFAULT_MODE):
        return (mode.convert(x) - 1) * self.s(mode) / 2

    def q(self, k: int) -> int:
        if (self.M + 1) % k:
            raise ValueError(f"{k} does not divide M+1={self.M + 1}")
        return (self.M + 1) // k - 1

    def divisor_weight(self, k: int, mode: ScalarMode = DEFAULT_MODE):
        """c_k / q_k! in ``mode``.

        Rational mode cannot hold the log exactly, so the weight is evaluated
        at twice the digit budget and then turned into an exact fraction.
        """
        q = self.q(k)
        if mode.exact:
            ctx = _context(2 * mode.digits)
            w = self.strategy.value(k, self.beta, self.gamma_value, ctx) / ctx.factorial(q)
            return mpf_to_fraction(w)
        ctx = mode.ctx
        return self.strategy.value(k, self.beta, self.gamma_value, ctx) / ctx.factorial(q)


@dataclass(frozen=True)
class TermFactorization:
    """The divisor-``k`` term as weight * prefactor * prod(factors).

    Every factor is a pair ``(a, b)`` standing for ``a*x + b``.
    """

    k: int
    q: int
    weight: object
    prefactor: tuple
    factors: tuple

    @property
    def linear_factors(self) -> tuple:
        return (self.prefactor,) + self.factors

    @property
    def degree(self) -> int:
        return self.q + 1

    def evaluate(self, x, with_weight: bool = False):
        value = 1
        for a, b in self.linear_factors:
            value = value * (a * x + b)
        return value * self.weight if with_weight else value


def factorize_term(spec: AmplitudeSpec, k: int, mode: ScalarMode = DEFAULT_MODE) -> TermFactorization:
    q = spec.q(k)
    alpha = mode.convert(spec.alpha)
    half_s = spec.s(mode) / 2
    slope = half_s / k
    offset = (alpha - half_s) / k
    factors = tuple((slope, offset + j) for j in range(q))
    return TermFactorization(
        k=k,
        q=q,
        weight=spec.divisor_weight(k, mode),
        prefactor=(half_s, half_s),
        factors=factors,
    )


def _max_abs(values) -> object:
    return max(abs(v) for v in values)


def expand_term(term: TermFactorization, basis: BasisSpec = LEGENDRE,
                mode: ScalarMode = DEFAULT_MODE) -> tuple[list, object]:
    """Unweighted expansion of one term and the largest intermediate entry."""
    op = jacobi_operator(basis, mode)
    coeffs = [mode.one]
    peak = mode.one
    for a, b in term.linear_factors:
        coeffs = op.apply_linear(coeffs, a, b)
        peak = max(peak, _max_abs(coeffs))
    return coeffs, peak


def expand_amplitude(spec: AmplitudeSpec, basis: BasisSpec = LEGENDRE,
                     mode: ScalarMode = DEFAULT_MODE) -> CoefficientVector:
    """Basis coefficients a_0 .. a_{M+1} of the amplitude.

    Terms are accumulated in ascending divisor order so float results are
    reproducible bit for bit.
    """
    size = spec.M + 2
    total = [mode.zero] * size
    peak = mode.zero
    for k in divisors(spec.M + 1):
        term = factorize_term(spec, k, mode)
        coeffs, term_peak = expand_term(term, basis, mode)
        w = term.weight
        peak = max(peak, abs(w) * term_peak)
        for n, c in enumerate(coeffs):
            total[n] += w * c
    if not mode.exact:
        final = _max_abs(total)
        if final and peak:
            lost = float(mode.ctx.log10(peak / final))
            if lost > mode.digits - _GUARD_DIGITS:
                warnings.warn(
                    f"expansion of M={spec.M} may have lost ~{lost:.0f} of {mode.digits} digits",
                    PrecisionWarning,
                    stacklevel=2,
                )
    return CoefficientVector(basis, tuple(total), mode)


def amplitude_value(spec: AmplitudeSpec, x, mode: ScalarMode = DEFAULT_MODE):
    """The amplitude at ``x`` summed straight from its defining formula."""
    x = mode.convert(x)
    alpha = mode.convert(spec.alpha)
    s = spec.s(mode)
    t = (x - 1) * s / 2
    total = mode.zero
    for k in divisors(spec.M + 1):
        q = spec.q(k)
        z = (alpha + t) / k
        rising = mode.one
        for j in range(q):
            rising *= z + j
        total += spec.divisor_weight(k, mode) * (s + t) * rising
    return total


class MinCoefficient(NamedTuple):
    index: int
    value: object
    is_negative: bool


def noise_floor(mode: ScalarMode) -> float:
    """Default relative tolerance below which a negative coefficient is noise."""
    if mode.exact:
        return 0.0
    return 10.0 ** -max(mode.digits - 20, mode.digits // 2)


def min_coefficient(v: CoefficientVector, eta: float = 0.0) -> MinCoefficient:
    """Smallest coefficient and whether it is negative beyond eta * max|a_n|."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    coeffs = list(v.coeffs)
    index = min(range(len(coeffs)), key=lambda n: coeffs[n])
    value = coeffs[index]
    scale = _max_abs(coeffs)
    threshold = v.mode.convert(eta) * scale if eta else 0
    return MinCoefficient(index, value, bool(value < -threshold))


def taylor_coefficients(v: CoefficientVector) -> list:
    """Monomial coefficients of the series (diagnostic only).

    Built by running the three-term recurrence on monomial coefficient lists.
    """
    lam = v.basis.lam
    mode = v.mode
    n_terms = len(v)
    prev = [mode.one]
    result = [mode.zero] * n_terms
    result[0] += v[0]
    if n_terms == 1:
        return result
    cur = [mode.zero, mode.convert(2 * lam)]
    for k in range(1, n_terms):
        for i, c in enumerate(cur):
            result[i] += v[k] * c
        if k + 1 == n_terms:
            break
        a = mode.convert(2 * (k + lam)) / (k + 1)
        b = mode.convert(k - 1 + 2 * lam) / (k + 1)
        nxt = [mode.zero] * (k + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += a * c
        for i, c in enumerate(prev):
            nxt[i] -= b * c
        prev, cur = cur, nxt
    return result
