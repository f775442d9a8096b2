"""Monte-Carlo positive-definiteness test on spheres.

A zonal function f(cos theta) on S^d is positive semi-definite exactly when
all its Gegenbauer coefficients (index lam = (d-1)/2) are non-negative.  The
test below samples n unit vectors, builds F_ij = f(v_i . v_j) and looks for a
negative eigenvalue; bisection on a parameter alpha then locates where
positivity breaks down.  Small n-tuples miss negative components, so the
estimate approaches the true threshold from the positive side as n grows.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import jsonschema
import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .amplitude import AmplitudeSpec, CoefficientStrategy, expand_amplitude
from .basis import DEFAULT_MODE, BasisSpec, ScalarMode
from .search import BisectionConfig, bisect

SCHEMA_VERSION = 1

DENSE_LIMIT = 500
SUBSPACE_SIZE = 40


def harmonic_count_at_degree(l: int, d: int) -> int:
    """Number of linearly independent spherical harmonics of degree l on S^d."""
    if l < 0 or d < 2:
        raise ValueError("need l >= 0 and d >= 2")
    value = Fraction(2 * l + d - 1, l + d - 1) * comb(l + d - 1, d - 1)
    assert value.denominator == 1
    return int(value)


def harmonic_count(l: int, d: int) -> int:
    """Spherical harmonics of degree <= l on S^d, i.e. H(l, d)."""
    return sum(harmonic_count_at_degree(m, d) for m in range(l + 1))


def n_schedule(l_min: int, d: int, points: int = 12) -> list[int]:
    """Increasing tuple sizes from 1 up to 2 * H(l_min, d).

    Short schedules list every size; longer ones are thinned geometrically.
    """
    top = 2 * harmonic_count(l_min, d)
    if top <= points:
        return list(range(1, top + 1))
    grid = np.geomspace(1, top, points)
    return sorted({int(round(n)) for n in grid} | {1, top})


@dataclass
class SchoenbergProblem:
    """Planted test function on S^d.

    f_alpha(z) = sum_k (cf[k] - (alpha/a0) * cf[k] * [k in hits]) * C_k^lam(z)

    so the coefficients listed in ``hits`` vanish at alpha = a0 and turn
    negative beyond it.
    """

    d: int
    cf: np.ndarray
    hits: tuple
    a0: float
    tol: float = 1e-6

    def __post_init__(self):
        BasisSpec(self.d)
        self.cf = np.asarray(self.cf, dtype=float)
        self.hits = tuple(sorted(int(h) for h in self.hits))
        if self.cf.ndim != 1 or len(self.cf) < 1:
            raise ValueError("cf must be a non-empty 1-d sequence")
        if np.any(self.cf < 0):
            raise ValueError("cf must be non-negative")
        if any(h < 0 or h > self.nmax for h in self.hits):
            raise ValueError(f"hits must lie in 0..{self.nmax}")
        if not self.a0 > 0:
            raise ValueError("a0 must be positive")

    @classmethod
    def planted(cls, d: int, l_min: int, a0: float, nmax: int = 20, cf=None,
                tol: float = 1e-6) -> "SchoenbergProblem":
        """Every coefficient from level ``l_min`` up to ``nmax`` depends on alpha."""
        cf = np.ones(nmax + 1) if cf is None else cf
        return cls(d, cf, tuple(range(l_min, nmax + 1)), a0, tol)

    @property
    def nmax(self) -> int:
        return len(self.cf) - 1

    @property
    def lam(self) -> float:
        return (self.d - 1) / 2

    @property
    def l_min(self) -> int | None:
        return self.hits[0] if self.hits else None

    @property
    def hit_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.cf))
        mask[list(self.hits)] = 1.0
        return mask

    def effective_coefficients(self, alpha: float) -> np.ndarray:
        return self.cf - (alpha / self.a0) * self.cf * self.hit_mask

    # negative eigenvalues show up above the threshold
    negative_above = True


@dataclass
class AmplitudeProblem:
    """The amplitude itself as a Schoenberg test function on S^d.

    Coefficients are recomputed for every alpha in high precision and then
    rounded to doubles; negativity sits below the critical alpha.
    """

    M: int
    beta: float
    d: int = 2
    gamma: float | None = None
    mode: ScalarMode = DEFAULT_MODE
    tol: float = 1e-6
    strategy: CoefficientStrategy = field(default_factory=CoefficientStrategy)

    @property
    def nmax(self) -> int:
        return self.M + 1

    @property
    def lam(self) -> float:
        return (self.d - 1) / 2

    def effective_coefficients(self, alpha: float) -> np.ndarray:
        spec = AmplitudeSpec(self.M, alpha, self.beta, self.gamma, self.strategy)
        v = expand_amplitude(spec, BasisSpec(self.d), self.mode)
        return np.array([float(c) for c in v.coeffs])

    negative_above = False


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean_alpha: float
    std_alpha: float
    samples: int
    estimates: tuple = ()


def sample_unit_vectors(n: int, D: int, seed=None) -> np.ndarray:
    """D x n array whose columns are uniform on the unit sphere S^{D-1}.

    ``seed`` may be an int, a SeedSequence or a ready Generator.
    """
    if n < 1 or D < 2:
        raise ValueError("need n >= 1 and ambient dimension D >= 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = rng.standard_normal((D, n))
    norms = np.linalg.norm(v, axis=0)
    bad = norms < 1e-150
    while np.any(bad):
        v[:, bad] = rng.standard_normal((D, int(bad.sum())))
        norms = np.linalg.norm(v, axis=0)
        bad = norms < 1e-150
    return v / norms


def gram_matrix(vectors: np.ndarray) -> np.ndarray:
    """Clipped inner products z_ij = v_i . v_j of the columns.

    Summed one coordinate at a time in a fixed order instead of via BLAS, so
    appending zero coordinates leaves every entry bit-identical.
    """
    z = np.zeros((vectors.shape[1], vectors.shape[1]))
    for row in vectors:
        z += np.multiply.outer(row, row)
    return np.clip(z, -1.0, 1.0)


def kernel_matrix(problem, alpha: float, z: np.ndarray) -> np.ndarray:
    """Entrywise f_alpha(z_ij) by the Gegenbauer forward recurrence, symmetrized."""
    eff = problem.effective_coefficients(alpha)
    lam = problem.lam
    c0 = np.ones_like(z)
    F = eff[0] * c0
    if len(eff) > 1:
        c1 = 2 * lam * z
        for k in range(1, len(eff)):
            F = F + eff[k] * c1
            c2 = (2 * (k + lam) * z * c1 - (k - 1 + 2 * lam) * c0) / (k + 1)
            c0, c1 = c1, c2
    return 0.5 * (F + F.T)


def min_eigenvalue(F: np.ndarray, dense_limit: int = DENSE_LIMIT,
                   subspace: int = SUBSPACE_SIZE) -> float:
    """Smallest algebraic eigenvalue of a symmetric matrix.

    Dense LAPACK below ``dense_limit``, Lanczos (ARPACK) above it with a
    dense retry when ARPACK does not converge.
    """
    n = F.shape[0]
    if n < dense_limit:
        return float(np.linalg.eigvalsh(F)[0])
    try:
        vals = eigsh(F, k=1, which="SA", ncv=min(subspace, n - 1), return_eigenvectors=False)
        return float(vals[0])
    except ArpackNoConvergence:
        return float(np.linalg.eigvalsh(F)[0])


def psd_test(problem, alpha: float, vectors: np.ndarray, tol_eig: float = 0.0) -> bool:
    """True when the kernel matrix on these vectors shows no eigenvalue below -tol_eig."""
    F = kernel_matrix(problem, alpha, gram_matrix(vectors))
    return min_eigenvalue(F) >= -tol_eig


def _estimate_one(problem, z: np.ndarray, tol_eig: float) -> float:
    config = BisectionConfig(0.0, 1.0, problem.tol)

    def negative(alpha: float) -> bool:
        return min_eigenvalue(kernel_matrix(problem, alpha, z)) < -tol_eig

    if problem.negative_above:
        return bisect(config, negative, check_bracket=False)
    return bisect(config, lambda a: not negative(a), check_bracket=False)


def sample_stream(seed: int, n: int, rep: int) -> np.random.Generator:
    """Independent Philox stream for one (n, sample) pair."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(n, rep))))


def estimate_alpha0(problem, n: int, samples: int, seed: int = 0, tol_eig: float = 0.0,
                    ambient: int | None = None) -> SampleStats:
    """Mean and standard deviation of the bisected threshold over random n-tuples.

    ``ambient`` overrides the sampling dimension (default d + 1).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    D = ambient if ambient is not None else problem.d + 1
    estimates = []
    for rep in range(samples):
        v = sample_unit_vectors(n, D, sample_stream(seed, n, rep))
        estimates.append(_estimate_one(problem, gram_matrix(v), tol_eig))
    arr = np.array(estimates)
    std = float(arr.std(ddof=1)) if samples > 1 else 0.0
    return SampleStats(n, float(arr.mean()), std, samples, tuple(estimates))


# JSON configuration mirroring the original interactive setup fields
CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dim", "samples", "tol", "n_list", "a0", "nmax", "hits", "cf"],
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": 2},
        "samples": {"type": "integer", "minimum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "n_list": {"type": "array", "minItems": 1,
                   "items": {"type": "integer", "minimum": 1}},
        "a0": {"type": "number", "exclusiveMinimum": 0},
        "nmax": {"type": "integer", "minimum": 0},
        "hits": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "cf": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
        "seed": {"type": "integer", "minimum": 0},
        "tol_eig": {"type": "number", "minimum": 0},
    },
}


class ConfigError(ValueError):
    def __init__(self, errors: Sequence[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class SchoenbergRun:
    problem: SchoenbergProblem
    samples: int
    n_list: list
    seed: int = 0
    tol_eig: float = 0.0

    @classmethod
    def from_config(cls, config: dict) -> "SchoenbergRun":
        validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
        errors = [f"{'/'.join(map(str, e.path)) or '<root>'}: {e.message}"
                  for e in sorted(validator.iter_errors(config), key=lambda e: list(e.path))]
        if errors:
            raise ConfigError(errors)
        if len(config["cf"]) != config["nmax"] + 1:
            raise ConfigError([f"cf: expected nmax+1={config['nmax'] + 1} entries, "
                               f"got {len(config['cf'])}"])
        bad = [h for h in config["hits"] if h > config["nmax"]]
        if bad:
            raise ConfigError([f"hits: indices {bad} exceed nmax={config['nmax']}"])
        problem = SchoenbergProblem(config["dim"], config["cf"], tuple(config["hits"]),
                                    config["a0"], config["tol"])
        return cls(problem, config["samples"], list(config["n_list"]),
                   config.get("seed", 0), config.get("tol_eig", 0.0))

    def to_config(self) -> dict:
        p = self.problem
        return {
            "dim": p.d, "samples": self.samples, "tol": p.tol, "n_list": list(self.n_list),
            "a0": p.a0, "nmax": p.nmax, "hits": list(p.hits), "cf": [float(c) for c in p.cf],
            "seed": self.seed, "tol_eig": self.tol_eig,
        }

    def run(self) -> list[SampleStats]:
        return [estimate_alpha0(self.problem, n, self.samples, self.seed, self.tol_eig)
                for n in self.n_list]


def stats_rows(stats: Sequence[SampleStats], d: int, a0: float) -> list[dict]:
    """Table rows; ``n_scaled`` = n^(1/d) is the usual plotting abscissa."""
    return [{"n": s.n, "n_scaled": s.n ** (1.0 / d), "mean_alpha": s.mean_alpha,
             "std_alpha": s.std_alpha, "samples": s.samples, "a0": a0} for s in stats]


def stats_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    fields = ["n", "n_scaled", "mean_alpha", "std_alpha", "samples", "a0"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def stats_to_json(rows: Sequence[dict], config: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "config": config, "rows": list(rows)},
                      indent=2)
