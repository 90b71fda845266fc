"""Reproducible Gaussian draws in coefficient space.

Random streams are derived, not advanced: every (master seed, purpose, id)
triple maps to its own Philox generator, so a result never depends on the
order in which tasks run or on how many workers run them.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .spectral_model import (
    CoefficientVector,
    SpaceTag,
    SpectralProblem,
    ValidationError,
    read_coefficients_csv,
)

DEFAULT_EPSILON = 1e-10


def _tag_word(tag: str) -> int:
    return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class RngPolicy:
    master_seed: int = 0

    def __post_init__(self):
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ValidationError(f"master_seed={self.master_seed!r} is not an unsigned 64-bit integer")
        object.__setattr__(self, "master_seed", seed)

    def substream(self, purpose: str, *ids: int) -> np.random.Generator:
        for i in ids:
            if int(i) != i or i < 0:
                raise ValidationError(f"stream ids must be non-negative integers, got {ids!r}")
        entropy = [self.master_seed, _tag_word(purpose), len(ids), *(int(i) for i in ids)]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class FixedCoefficients:
    coeffs: tuple


@dataclass(frozen=True)
class GaussianDraw:
    """u ~ N(0, Sigma) with sigma_j = j^(-2 gamma - 1 - epsilon)."""

    gamma: float
    epsilon: float = DEFAULT_EPSILON
    seed_id: int = 0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValidationError("GaussianDraw needs gamma > 0")
        if not self.epsilon > 0:
            raise ValidationError("GaussianDraw needs epsilon > 0 for a draw in H^gamma")

    def eigenvalues(self, j_max: int) -> np.ndarray:
        j = np.arange(1, j_max + 1, dtype=float)
        return j ** (-2.0 * self.gamma - 1.0 - self.epsilon)


TruthSpec = FixedCoefficients | GaussianDraw


def truth_from_csv(path) -> FixedCoefficients:
    return FixedCoefficients(tuple(read_coefficients_csv(path)))


def draw_truth(spec: TruthSpec, j_max: int, rng: RngPolicy) -> CoefficientVector:
    if isinstance(spec, FixedCoefficients):
        if len(spec.coeffs) != j_max:
            raise ValidationError(f"fixed truth has {len(spec.coeffs)} coefficients, expected {j_max}")
        return CoefficientVector(np.array(spec.coeffs, dtype=float), SpaceTag.TRUTH)
    xi = rng.substream("truth", spec.seed_id).standard_normal(j_max)
    return CoefficientVector(np.sqrt(spec.eigenvalues(j_max)) * xi, SpaceTag.TRUTH)


def _ids(realization_id) -> tuple:
    return tuple(realization_id) if isinstance(realization_id, tuple) else (realization_id,)


def noise_coefficients(problem: SpectralProblem, rng: RngPolicy, realization_id) -> np.ndarray:
    """Standard normal xi_j for one realization; entry j is always the j-th draw of its stream."""
    return rng.substream("noise", *_ids(realization_id)).standard_normal(problem.j_max)


def synthesize_data(problem: SpectralProblem, u_truth, rng: RngPolicy | None = None,
                    realization_id=0, noiseless: bool = False) -> CoefficientVector:
    """d_j = l_j u_j + n^(-1/2) sqrt(c1_j) xi_j."""
    u = np.asarray(u_truth, dtype=float)
    if u.shape != (problem.j_max,):
        raise ValidationError("truth length does not match the problem")
    d = problem.l * u
    if not noiseless:
        if rng is None:
            raise ValidationError("an RngPolicy is required unless noiseless=True")
        xi = noise_coefficients(problem, rng, realization_id)
        d = d + np.sqrt(problem.c1 / problem.params.n) * xi
    return CoefficientVector(d, SpaceTag.DATA)


def expected_squared_norm(spec: GaussianDraw, j_max: int) -> float:
    return math.fsum(spec.eigenvalues(j_max))
