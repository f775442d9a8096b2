"""Bisection for the critical slope and the (M, beta) landscape sweep."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

from .amplitude import AmplitudeSpec, CoefficientStrategy, expand_amplitude, min_coefficient, noise_floor
from .basis import DEFAULT_MODE, LEGENDRE, BasisSpec, ScalarMode

SCHEMA_VERSION = 1


class InvalidBracket(ValueError):
    """The predicate does not change value across the bracket.

    ``side`` is ``"min"`` when the predicate already holds at ``alpha_min``
    and ``"max"`` when it fails at ``alpha_max``.
    """

    def __init__(self, message: str, side: str):
        super().__init__(message)
        self.side = side


@dataclass(frozen=True)
class BisectionConfig:
    alpha_min: float = 0.0
    alpha_max: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.alpha_min < self.alpha_max:
            raise ValueError("alpha_min must be smaller than alpha_max")

    @property
    def iterations(self) -> int:
        """Number of halvings that brings the bracket width down to epsilon."""
        ratio = (self.alpha_max - self.alpha_min) / self.epsilon
        return max(0, math.ceil(math.log2(ratio)))


def bisect(config: BisectionConfig, predicate: Callable[[float], bool],
           check_bracket: bool = True, debug: bool = False) -> float:
    """Threshold of a predicate that is false below it and true above it.

    The endpoints are checked once, up front.  With ``check_bracket=False``
    the loop runs blind, so a predicate that never turns true drives the
    result to ``alpha_max``.  ``debug`` re-evaluates both endpoints after every
    step and asserts the bracket invariant.
    """
    lo, hi = config.alpha_min, config.alpha_max
    if check_bracket:
        if predicate(lo):
            raise InvalidBracket(f"predicate already holds at alpha_min={lo}", "min")
        if not predicate(hi):
            raise InvalidBracket(f"predicate fails at alpha_max={hi}", "max")
    for _ in range(config.iterations):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
        if debug:
            assert predicate(hi) and not predicate(lo), (lo, hi)
    return 0.5 * (lo + hi)


def scan_monotonicity(predicate: Callable[[float], bool], config: BisectionConfig,
                      points: int = 21) -> list[tuple[float, float]]:
    """Pairs (a, b), a < b, on a coarse grid where predicate(a) and not predicate(b).

    An empty list means no violation of monotonicity was seen.
    """
    grid = [config.alpha_min + (config.alpha_max - config.alpha_min) * i / (points - 1)
            for i in range(points)]
    values = [predicate(a) for a in grid]
    return [(grid[i], grid[i + 1]) for i in range(points - 1) if values[i] and not values[i + 1]]


def positivity_predicate(M: int, beta, gamma=None, basis: BasisSpec = LEGENDRE,
                         mode: ScalarMode = DEFAULT_MODE, eta: float | None = None,
                         strategy: CoefficientStrategy | None = None) -> Callable[[float], bool]:
    """alpha -> True when no expansion coefficient is negative beyond the noise floor."""
    eta = noise_floor(mode) if eta is None else eta
    strategy = strategy or CoefficientStrategy()

    def predicate(alpha: float) -> bool:
        spec = AmplitudeSpec(M, alpha, beta, gamma, strategy)
        return not min_coefficient(expand_amplitude(spec, basis, mode), eta).is_negative

    return predicate


@dataclass(frozen=True)
class CriticalAlpha:
    value: float
    status: str = "ok"

    def __float__(self) -> float:
        return self.value


def critical_alpha(M: int, beta, gamma=None, basis: BasisSpec = LEGENDRE,
                   config: BisectionConfig = BisectionConfig(),
                   mode: ScalarMode = DEFAULT_MODE, eta: float | None = None,
                   strategy: CoefficientStrategy | None = None) -> CriticalAlpha:
    """Smallest alpha (to within epsilon) with a non-negative expansion.

    When positivity already holds at ``alpha_min`` the result is
    ``alpha_min`` with status ``"degenerate"``; failure at ``alpha_max``
    raises :class:`InvalidBracket`.
    """
    predicate = positivity_predicate(M, beta, gamma, basis, mode, eta, strategy)
    try:
        return CriticalAlpha(bisect(config, predicate))
    except InvalidBracket as exc:
        if exc.side == "min":
            return CriticalAlpha(config.alpha_min, "degenerate")
        raise InvalidBracket(
            f"positivity fails even at alpha={config.alpha_max} (M={M}, beta={beta})", "max"
        ) from None


def default_gamma_rule(beta):
    return beta + 1


@dataclass(frozen=True)
class LandscapeCell:
    M: int
    beta: float
    gamma: float
    alpha_crit: float
    status: str


@dataclass
class LandscapeResult:
    cells: list[LandscapeCell]
    metadata: dict = field(default_factory=dict)

    @property
    def betas(self) -> list[float]:
        return sorted({c.beta for c in self.cells})

    def grid(self) -> dict[tuple[int, float], float]:
        return {(c.M, c.beta): c.alpha_crit for c in self.cells}

    def profile(self, M_lo: int | None = None, M_hi: int | None = None) -> dict[float, float]:
        """beta -> max over M of alpha_crit, optionally over M_lo <= M <= M_hi.

        Cells whose bisection failed are skipped.
        """
        out: dict[float, float] = {}
        for c in self.cells:
            if math.isnan(c.alpha_crit):
                continue
            if M_lo is not None and c.M < M_lo or M_hi is not None and c.M > M_hi:
                continue
            out[c.beta] = max(out.get(c.beta, -math.inf), c.alpha_crit)
        return out

    def stabilization(self) -> dict[float, dict]:
        """Profile over the first half of the M range against the full range."""
        Ms = sorted({c.M for c in self.cells})
        lo, hi = Ms[0], Ms[-1]
        mid = lo + (hi - lo) // 2
        half, full = self.profile(lo, mid), self.profile(lo, hi)
        return {
            b: {"M_range_half": [lo, mid], "M_range_full": [lo, hi],
                "profile_half": half.get(b), "profile_full": full.get(b),
                "change": None if b not in half or b not in full else full[b] - half[b]}
            for b in self.betas
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["M", "beta", "gamma", "alpha_crit", "status"])
        for c in self.cells:
            writer.writerow([c.M, repr(c.beta), repr(c.gamma), repr(c.alpha_crit), c.status])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata,
            "cells": [{**asdict(c), "alpha_crit": None if math.isnan(c.alpha_crit) else c.alpha_crit}
                      for c in self.cells],
            "profile": [{"beta": b, "alpha_crit": a} for b, a in sorted(self.profile().items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def _cell(args) -> LandscapeCell:
    M, beta, gamma, basis, config, mode = args
    try:
        res = critical_alpha(M, beta, gamma, basis, config, mode)
        return LandscapeCell(M, beta, gamma, res.value, res.status)
    except Exception as exc:  # recorded per cell, the sweep goes on
        return LandscapeCell(M, beta, gamma, math.nan, f"error: {exc}")


def landscape(M_range: Iterable[int], beta_grid: Sequence[float],
              gamma_rule: Callable = default_gamma_rule, basis: BasisSpec = LEGENDRE,
              config: BisectionConfig = BisectionConfig(), mode: ScalarMode = DEFAULT_MODE,
              workers: int = 1) -> LandscapeResult:
    """alpha_crit on the (M, beta) grid plus its max-over-M profile."""
    Ms = list(M_range)
    betas = list(beta_grid)
    if not Ms or not betas:
        raise ValueError("landscape needs non-empty M and beta ranges")
    jobs = [(M, b, gamma_rule(b), basis, config, mode) for b in betas for M in Ms]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_cell, jobs))
    else:
        cells = [_cell(job) for job in jobs]
    metadata = {
        "epsilon": config.epsilon,
        "alpha_min": config.alpha_min,
        "alpha_max": config.alpha_max,
        "M_min": min(Ms),
        "M_max": max(Ms),
        "d": basis.d,
        "mode": mode.kind,
        "digits": mode.digits,
    }
    return LandscapeResult(cells, metadata)
