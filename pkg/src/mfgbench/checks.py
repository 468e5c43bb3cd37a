"""Structural class checkers: crowd-aversion monotonicity and potential symmetry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DimensionMismatch, Distribution, MFGModel, sample_simplex

# A positive pairing larger than this counts as a monotonicity violation;
# the slack absorbs floating-point noise around exactly-monotone couplings.
MONOTONICITY_ATOL = 1e-10
SYMMETRY_ATOL = 1e-12


class NotSquare(DimensionMismatch):
    pass


@dataclass(frozen=True)
class MonotonicityResult:
    """Outcome of the sampled monotonicity check.

    ``monotone`` is True when no sampled pair violated the condition;
    otherwise mu/nu/value describe the first violation found.
    """

    monotone: bool
    mu: Distribution | None = None
    nu: Distribution | None = None
    value: float | None = None


@dataclass(frozen=True)
class PotentialResult:
    """Outcome of the interaction-matrix symmetry check."""

    potential: bool
    x: int | None = None
    y: int | None = None
    gap: float | None = None


def ll_monotonicity_check(
    model: MFGModel,
    g: Callable[[int, np.ndarray], float],
    trials: int = 100,
    rng_seed: int = 0,
) -> MonotonicityResult:
    """Sampled test of sum_x (g(x,mu) - g(x,nu)) (mu(x) - nu(x)) <= 0.

    Draws ``trials`` pairs (mu, nu) uniformly from the simplex (sorted-uniform
    spacings) and reports the first pair whose pairing exceeds 1e-10, if any.
    A pass is evidence, not proof: the check is sampled, not exhaustive.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed)))
    n = model.n_states
    states = range(n)
    for _ in range(trials):
        mu = sample_simplex(n, rng)
        nu = sample_simplex(n, rng)
        g_mu = np.array([g(x, mu) for x in states])
        g_nu = np.array([g(x, nu) for x in states])
        value = float((g_mu - g_nu) @ (mu - nu))
        if value > MONOTONICITY_ATOL:
            return MonotonicityResult(False, Distribution(mu), Distribution(nu), value)
    return MonotonicityResult(True)


def potential_symmetry_check(A: np.ndarray) -> PotentialResult:
    """Check whether a linear interaction g(x, mu) = [A mu]_x admits a potential.

    The game is potential exactly when the interaction Jacobian (here the
    constant matrix A) is symmetric. Returns the worst asymmetric pair when
    it is not, scanning row-major so ties are deterministic.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSquare(f"interaction matrix must be square, got {A.shape}")
    gaps = np.abs(A - A.T)
    worst = float(gaps.max()) if A.size else 0.0
    if worst <= SYMMETRY_ATOL:
        return PotentialResult(True)
    x, y = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
    return PotentialResult(False, int(x), int(y), worst)
