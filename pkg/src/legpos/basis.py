"""Scalar modes, Gegenbauer/Legendre bases and the multiplication-by-x operator.

Every expansion in this package is a finite list of coefficients
``a_0 .. a_N`` with respect to ``C_n^lam`` on the sphere ``S^d``, where
``lam = (d - 1) / 2``.  For ``d = 2`` this is the Legendre basis since
``C_n^{1/2} = P_n`` in the standard normalization.

Two scalar modes are supported: exact rationals (:class:`fractions.Fraction`)
and fixed-precision mpmath floats.  Each float mode owns a private
``mpmath.MPContext`` so that different precisions never interfere through the
global ``mp.dps``.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import mpmath

RATIONAL = "rational"
FLOAT = "float"


@functools.lru_cache(maxsize=None)
def _context(digits: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


def mpf_to_fraction(x) -> Fraction:
    """Exact rational value of an mpmath float (binary mantissa/exponent)."""
    man, exp = x.man_exp
    if exp >= 0:
        return Fraction(int(man) << int(exp))
    return Fraction(int(man), 1 << int(-exp))


@dataclass(frozen=True)
class ScalarMode:
    """Arithmetic used for coefficient computations.

    ``kind`` is ``"rational"`` or ``"float"``.  For floats ``digits`` is the
    decimal working precision; for rationals it is only the budget used when
    an irrational constant (a log, a square root) has to be approximated.
    """

    kind: str = FLOAT
    digits: int = 50

    def __post_init__(self):
        if self.kind not in (RATIONAL, FLOAT):
            raise ValueError(f"unknown scalar mode {self.kind!r}")
        if self.kind == FLOAT and self.digits < 16:
            raise ValueError("high-precision float mode needs digits >= 16")
        if self.digits < 1:
            raise ValueError("digits must be positive")

    @classmethod
    def rational(cls, digits: int = 50) -> "ScalarMode":
        return cls(RATIONAL, digits)

    @classmethod
    def high_precision(cls, digits: int = 50) -> "ScalarMode":
        return cls(FLOAT, digits)

    @property
    def exact(self) -> bool:
        return self.kind == RATIONAL

    @property
    def ctx(self) -> mpmath.MPContext:
        """mpmath context at this mode's precision (used for transcendentals)."""
        return _context(self.digits)

    @property
    def zero(self):
        return Fraction(0) if self.exact else self.ctx.zero

    @property
    def one(self):
        return Fraction(1) if self.exact else self.ctx.one

    def convert(self, value: Any):
        """Bring ``value`` into this mode.

        Python floats are read through their shortest decimal repr, so ``0.4``
        means four tenths in both modes rather than the nearest binary double.
        """
        if self.exact:
            if isinstance(value, Fraction):
                return value
            if isinstance(value, (int, str)):
                return Fraction(value)
            if isinstance(value, float):
                if not math.isfinite(value):
                    raise ValueError(f"cannot represent {value!r} exactly")
                return Fraction(repr(value))
            if isinstance(value, mpmath.ctx_mp_python.mpf):
                return mpf_to_fraction(value)
            return Fraction(value)
        ctx = self.ctx
        if isinstance(value, Fraction):
            return ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, float):
            return ctx.mpf(repr(value))
        return ctx.mpf(value)

    def to_str(self, value) -> str:
        """Full-precision decimal (or ``p/q``) rendering, never via a double."""
        if self.exact:
            return str(self.convert(value))
        return self.ctx.nstr(self.convert(value), self.digits)

    def to_float(self, value) -> float:
        return float(value)


DEFAULT_MODE = ScalarMode()


@dataclass(frozen=True)
class BasisSpec:
    """Hyperspherical basis on ``S^d`` (``d`` is the manifold dimension)."""

    d: int = 2

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 2:
            raise ValueError(f"sphere dimension must be an integer >= 2, got {self.d!r}")

    @property
    def lam(self) -> Fraction:
        return Fraction(self.d - 1, 2)

    @property
    def is_legendre(self) -> bool:
        return self.d == 2

    @property
    def ambient_dimension(self) -> int:
        return self.d + 1


LEGENDRE = BasisSpec(2)


def legendre_recurrence(n: int) -> tuple[Fraction, Fraction]:
    """(super, sub) coefficients of x*P_n = sup*P_{n+1} + sub*P_{n-1}."""
    return Fraction(n + 1, 2 * n + 1), Fraction(n, 2 * n + 1)


def gegenbauer_recurrence(n: int, lam: Fraction) -> tuple[Fraction, Fraction]:
    """(super, sub) coefficients of x*C_n = sup*C_{n+1} + sub*C_{n-1}."""
    lam = Fraction(lam)
    den = 2 * (n + lam)
    return (n + 1) / den, (n + 2 * lam - 1) / den


class JacobiOperator:
    """Tridiagonal action of multiplication by x on basis coefficients.

    Column ``n`` of the (infinite) matrix holds the expansion of ``x*B_n``:
    the super-coefficient sits in row ``n+1`` and the sub-coefficient in row
    ``n-1``.  Only the recurrence coefficients are kept; the matrix itself is
    never formed.  ``generic=True`` forces the Gegenbauer formulas even for
    the Legendre basis.
    """

    def __init__(self, basis: BasisSpec = LEGENDRE, mode: ScalarMode = DEFAULT_MODE,
                 generic: bool = False):
        self.basis = basis
        self.mode = mode
        self.generic = generic
        self._sup: list = []
        self._sub: list = []
        self._lock = threading.Lock()

    def exact_coefficients(self, n: int) -> tuple[Fraction, Fraction]:
        if self.basis.is_legendre and not self.generic:
            return legendre_recurrence(n)
        return gegenbauer_recurrence(n, self.basis.lam)

    def _grow(self, size: int) -> None:
        if len(self._sup) >= size:
            return
        with self._lock:
            for n in range(len(self._sup), size):
                sup, sub = self.exact_coefficients(n)
                self._sub.append(self.mode.convert(sub))
                self._sup.append(self.mode.convert(sup))

    def super_diagonal(self, n: int):
        self._grow(n + 1)
        return self._sup[n]

    def sub_diagonal(self, n: int):
        self._grow(n + 1)
        return self._sub[n]

    def apply_linear(self, coeffs: Sequence, a, b) -> list:
        """Coefficients of (a*x + b)*f for raw coefficient list ``coeffs``."""
        size = len(coeffs)
        self._grow(size)
        sup, sub = self._sup, self._sub
        out = [self.mode.zero] * (size + 1)
        for n, c in enumerate(coeffs):
            if not c:
                continue
            if b:
                out[n] += b * c
            ac = a * c
            if ac:
                out[n + 1] += ac * sup[n]
                if n:
                    out[n - 1] += ac * sub[n]
        return out

    def apply(self, coeffs: Sequence) -> list:
        return self.apply_linear(coeffs, self.mode.one, self.mode.zero)


@functools.lru_cache(maxsize=64)
def jacobi_operator(basis: BasisSpec, mode: ScalarMode) -> JacobiOperator:
    return JacobiOperator(basis, mode)


@dataclass(frozen=True)
class CoefficientVector:
    """f(x) = sum_n coeffs[n] * B_n(x) in ``basis``; trailing zeros allowed."""

    basis: BasisSpec
    coeffs: tuple
    mode: ScalarMode = DEFAULT_MODE

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("a coefficient vector needs at least one entry")
        object.__setattr__(self, "coeffs", tuple(self.mode.convert(c) for c in self.coeffs))

    @classmethod
    def unit(cls, n: int, basis: BasisSpec = LEGENDRE, mode: ScalarMode = DEFAULT_MODE):
        """Coefficient vector of the single basis polynomial B_n."""
        coeffs = [mode.zero] * (n + 1)
        coeffs[n] = mode.one
        return cls(basis, tuple(coeffs), mode)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    @property
    def degree(self) -> int:
        for n in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[n]:
                return n
        return 0

    def padded(self, size: int) -> tuple:
        return self.coeffs + (self.mode.zero,) * max(0, size - len(self.coeffs))

    def __call__(self, z):
        return eval_basis_series(self.coeffs, z, self.basis)


def apply_x(v: CoefficientVector) -> CoefficientVector:
    """Coefficients of x*f(x); the result is one entry longer than ``v``."""
    op = jacobi_operator(v.basis, v.mode)
    return CoefficientVector(v.basis, tuple(op.apply(v.coeffs)), v.mode)


def apply_linear_factor(v: CoefficientVector, a, b) -> CoefficientVector:
    """Coefficients of (a*x + b)*f(x).

    Working with general linear factors means the roots of a factor never
    have to be computed, which keeps rational inputs rational.
    """
    op = jacobi_operator(v.basis, v.mode)
    out = op.apply_linear(v.coeffs, v.mode.convert(a), v.mode.convert(b))
    return CoefficientVector(v.basis, tuple(out), v.mode)


def _like(z, value: Fraction):
    """Express the rational ``value`` in the scalar type of ``z``."""
    if isinstance(z, Fraction):
        return value
    if isinstance(z, int):
        return value
    if isinstance(z, mpmath.ctx_mp_python.mpf):
        return z.context.mpf(value.numerator) / value.denominator
    return float(value)


def eval_basis_series(coeffs: Sequence, z, basis: BasisSpec = LEGENDRE, tol: float = 1e-12):
    """Sum_k coeffs[k] * C_k^lam(z) by the forward three-term recurrence.

    The recurrence starts from C_0 = 1, C_1 = 2*lam*z; for d = 2 this is
    Bonnet's recursion for P_k.  The result has the scalar type of ``z``
    (Fraction, mpf or float).
    """
    if abs(z) > 1 + tol:
        raise ValueError(f"argument {z} lies outside [-1, 1]")
    if isinstance(z, int):
        z = Fraction(z)
    lam = basis.lam
    two_lam = _like(z, 2 * lam)
    total = coeffs[0] * _like(z, Fraction(1)) if len(coeffs) else _like(z, Fraction(0))
    if len(coeffs) == 1:
        return total
    c_prev = _like(z, Fraction(1))
    c_cur = two_lam * z
    for k in range(1, len(coeffs)):
        total += coeffs[k] * c_cur
        if k + 1 < len(coeffs):
            a = _like(z, 2 * (k + lam))
            b = _like(z, k - 1 + 2 * lam)
            c_prev, c_cur = c_cur, (a * z * c_cur - b * c_prev) / (k + 1)
    return total


def gegenbauer_limit_check(n: int, z, d: int):
    """C_n^{(d-1)/2}(z) / d^n, which tends to z^n / n! as d grows."""
    if n < 0:
        raise ValueError("n must be non-negative")
    coeffs = [0] * n + [1]
    return eval_basis_series(coeffs, z, BasisSpec(d)) / d ** n
