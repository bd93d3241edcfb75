"""
Isotropic alpha-stable sampling by subordination.

X_t = sqrt(2 S_t) Z with Z standard normal in R^d and S_t the one-sided
(alpha/2)-stable subordinator, E exp(-u S_t) = exp(-t u^{alpha/2}). Then
E exp(i xi.X_t) = exp(-t |xi|^alpha).

S_1 uses Kanter's representation for beta = alpha/2 in (0, 1):

    S_1 = (A(U) / E)^{(1 - beta)/beta},
    A(U) = (sin(beta pi U)^beta sin((1 - beta) pi U)^{1 - beta} / sin(pi U))^{1/(1 - beta)}

with U uniform on (0, 1) and E standard exponential.
"""

import math

import numpy as np

from ..kernels.params import Params
from ..utils.errors import DomainError

BLOCK_SIZE = 4096


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block of paths."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def kanter_subordinator(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Samples of S_1 with Laplace exponent u^{alpha/2}."""
    beta = alpha / 2.0
    u = rng.uniform(0.0, 1.0, size)
    e = rng.standard_exponential(size)
    # uniform() may return exactly 0
    u = np.clip(u, 1e-300, 1.0 - 1e-16)
    a = (np.sin(beta * math.pi * u) ** beta * np.sin((1.0 - beta) * math.pi * u) ** (1.0 - beta)
         / np.sin(math.pi * u)) ** (1.0 / (1.0 - beta))
    return (a / e) ** ((1.0 - beta) / beta)


def sample_stable_increment(params: Params, t: float, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """
    Increments distributed as p_t(z) dz.

    Args:
        params: Problem parameters
        t: Time, > 0
        rng: Generator
        size: Number of increments

    Returns:
        Array of shape (size, d)
    """
    if not t > 0:
        raise DomainError(f"Increment time must be positive, got {t}")
    s = t ** (2.0 / params.alpha) * kanter_subordinator(params.alpha, size, rng)
    z = rng.standard_normal((size, params.d))
    return np.sqrt(2.0 * s)[:, None] * z


def sample_stable(params: Params, t: float, n: int, seed: int) -> np.ndarray:
    """n samples of X_t from deterministic per-block streams."""
    blocks = []
    for block, start in enumerate(range(0, n, BLOCK_SIZE)):
        blocks.append(sample_stable_increment(params, t, block_rng(seed, block), min(BLOCK_SIZE, n - start)))
    return np.concatenate(blocks, axis=0) if blocks else np.zeros((0, params.d))


def uniform_directions(d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on the unit sphere S^{d-1} (signs for d = 1)."""
    z = rng.standard_normal((size, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
