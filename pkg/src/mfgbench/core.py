"""Core domain types for stationary mean field games on finite spaces.

Everything here is a thin, immutable wrapper around dense numpy arrays:
state spaces in this benchmark are small (at most 121 states), so sparse
representations would be pure overhead.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

# Absolute tolerance for simplex membership checks. Strict enough to catch
# logic errors, loose enough for accumulated floating-point renormalization.
SIMPLEX_ATOL = 1e-9
# Entries above this (tiny) negative floor are treated as zero mass.
NEGATIVE_MASS_ATOL = 1e-12


class MFGError(Exception):
    """Base class for all errors raised by this package."""


class NegativeMass(MFGError):
    pass


class NotNormalized(MFGError):
    pass


class ZeroStates(MFGError):
    pass


class DimensionMismatch(MFGError):
    pass


class InvalidParam(MFGError):
    pass


class GameClass(enum.Enum):
    """Structural class of a game, following the benchmark taxonomy."""

    NO_INTERACTION = "NoInteraction"
    CONTRACTIVE = "Contractive"
    LASRY_LIONS = "LasryLions"
    MULTI_EQUILIBRIA = "MultiEquilibria"
    POTENTIAL = "Potential"
    CYCLIC = "Cyclic"
    DYNAMICS_COUPLED = "DynamicsCoupled"
    GARNET = "Garnet"


def _frozen_array(values, dtype=np.float64, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatch(f"expected {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def validate_distribution(d: "Distribution | np.ndarray | Sequence[float]") -> None:
    """Raise unless ``d`` is a point on the probability simplex.

    Raises:
        NegativeMass: some entry is below -1e-12.
        NotNormalized: the entries do not sum to 1 within 1e-9.
    """
    probs = d.probs if isinstance(d, Distribution) else np.asarray(d, dtype=np.float64)
    if probs.ndim != 1:
        raise DimensionMismatch(f"distribution must be a vector, got shape {probs.shape}")
    m = float(probs.min()) if probs.size else 0.0
    if m < -NEGATIVE_MASS_ATOL:
        raise NegativeMass(f"entry {m} below -{NEGATIVE_MASS_ATOL}")
    s = float(probs.sum())
    if abs(s - 1.0) > SIMPLEX_ATOL:
        raise NotNormalized(f"entries sum to {s}, not 1 within {SIMPLEX_ATOL}")


def validate_policy(p: "Policy | np.ndarray") -> None:
    """Raise unless every row of ``p`` is a point on the action simplex."""
    probs = p.action_probs if isinstance(p, Policy) else np.asarray(p, dtype=np.float64)
    if probs.ndim != 2:
        raise DimensionMismatch(f"policy must be a matrix, got shape {probs.shape}")
    m = float(probs.min()) if probs.size else 0.0
    if m < -NEGATIVE_MASS_ATOL:
        raise NegativeMass(f"entry {m} below -{NEGATIVE_MASS_ATOL}")
    sums = probs.sum(axis=1)
    bad = np.abs(sums - 1.0) > SIMPLEX_ATOL
    if bad.any():
        x = int(np.argmax(bad))
        raise NotNormalized(f"row {x} sums to {sums[x]}, not 1 within {SIMPLEX_ATOL}")


@dataclass(frozen=True)
class Distribution:
    """A point on the state simplex (the mean field)."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen_array(self.probs, ndim=1))
        validate_distribution(self.probs)

    def __len__(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class Policy:
    """A stationary policy: row x holds the action distribution at state x."""

    action_probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "action_probs", _frozen_array(self.action_probs, ndim=2))
        validate_policy(self.action_probs)

    @property
    def n_states(self) -> int:
        return self.action_probs.shape[0]

    @property
    def n_actions(self) -> int:
        return self.action_probs.shape[1]


@dataclass(frozen=True)
class QTable:
    """State-action values for a fixed mean field, in discounted-return units."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, ndim=2))
        if not np.all(np.isfinite(self.values)):
            raise InvalidParam("QTable entries must be finite")


@dataclass(frozen=True)
class ValueTable:
    """State values for a fixed mean field, in discounted-return units."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, ndim=1))
        if not np.all(np.isfinite(self.values)):
            raise InvalidParam("ValueTable entries must be finite")


@dataclass(frozen=True)
class Logits:
    """Unnormalized action preferences, one row per state."""

    raw: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "raw", _frozen_array(self.raw, ndim=2))
        if not np.all(np.isfinite(self.raw)):
            raise InvalidParam("Logits entries must be finite")


@dataclass(frozen=True)
class MFGModel:
    """A stationary mean field game (X, A, p, r, gamma).

    The transition kernel and reward are exposed two ways: the scalar
    interface ``kernel(x, a, mu)`` / ``reward(x, a, mu)`` and the vectorized
    ``transition_tensor(mu)`` / ``reward_matrix(mu)`` used by the solvers.
    Dynamics-coupled games make the tensor depend on mu, so materialized
    tensors are per-mu caches, never part of the model itself. Models whose
    kernel (or reward) ignores mu precompute the corresponding array once at
    construction; observable behavior is identical.

    Models are immutable after construction and safe to share across workers.
    """

    n_states: int
    n_actions: int
    transition_fn: Callable[[np.ndarray], np.ndarray]  # mu (X,) -> (X, A, X)
    reward_fn: Callable[[np.ndarray], np.ndarray]  # mu (X,) -> (X, A)
    discount: float
    class_tag: GameClass
    name: str
    params: Mapping[str, float] = field(default_factory=dict)
    mu_dependent_dynamics: bool = True
    mu_dependent_reward: bool = True
    # Optional separable population term g(x, mu) and, when g is linear in mu,
    # its interaction matrix; consumed by the structural checkers.
    interaction_g: Callable[[int, np.ndarray], float] | None = None
    interaction_matrix: np.ndarray | None = None
    _cached_transitions: np.ndarray | None = field(default=None, repr=False)
    _cached_rewards: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_states < 1 or self.n_actions < 1:
            raise InvalidParam("state and action spaces must be non-empty")
        if not (0.0 <= self.discount < 1.0):
            raise InvalidParam(f"discount must lie in [0, 1), got {self.discount}")
        # Eager caches keep the model free of interior mutation after init.
        u = np.full(self.n_states, 1.0 / self.n_states)
        if not self.mu_dependent_dynamics:
            object.__setattr__(self, "_cached_transitions", _frozen_array(self.transition_fn(u), ndim=3))
        if not self.mu_dependent_reward:
            object.__setattr__(self, "_cached_rewards", _frozen_array(self.reward_fn(u), ndim=2))
        if self.interaction_matrix is not None:
            object.__setattr__(self, "interaction_matrix", _frozen_array(self.interaction_matrix, ndim=2))

    def transition_tensor(self, mu: np.ndarray) -> np.ndarray:
        """Transition probabilities p(x'|x, a, mu) as an (X, A, X) array."""
        if self._cached_transitions is not None:
            return self._cached_transitions
        return self.transition_fn(np.asarray(mu, dtype=np.float64))

    def reward_matrix(self, mu: np.ndarray) -> np.ndarray:
        """Rewards r(x, a, mu) as an (X, A) array."""
        if self._cached_rewards is not None:
            return self._cached_rewards
        return self.reward_fn(np.asarray(mu, dtype=np.float64))

    def kernel(self, x: int, a: int, mu: "Distribution | np.ndarray") -> Distribution:
        """Distribution of the next state given state x, action a and mean field mu."""
        m = mu.probs if isinstance(mu, Distribution) else np.asarray(mu, dtype=np.float64)
        return Distribution(self.transition_tensor(m)[x, a])

    def reward(self, x: int, a: int, mu: "Distribution | np.ndarray") -> float:
        """One-step reward r(x, a, mu)."""
        m = mu.probs if isinstance(mu, Distribution) else np.asarray(mu, dtype=np.float64)
        return float(self.reward_matrix(m)[x, a])


def uniform_distribution(n: int) -> Distribution:
    """The uniform distribution over n states.

    Raises:
        ZeroStates: n is not a positive integer.
    """
    if n < 1:
        raise ZeroStates(f"need at least one state, got n={n}")
    return Distribution(np.full(n, 1.0 / n))


def sample_simplex(n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a point uniformly from the n-simplex via sorted-uniform spacings."""
    if n == 1:
        return np.ones(1)
    cuts = np.sort(rng.random(n - 1))
    return np.diff(np.concatenate(([0.0], cuts, [1.0])))
