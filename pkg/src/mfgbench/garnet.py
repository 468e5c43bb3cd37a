"""Procedural generator of random mean field games with controllable coupling.

An instance couples a sparse base transition tensor and a base reward matrix
to the mean field through either an additive bias or a multiplicative gate,
in the dynamics and in the reward independently. Generation is a pure
function of the spec: tensors are drawn from named counter-based RNG
substreams and are regenerated from (seed, algorithm) rather than stored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Distribution, GameClass, MFGError, MFGModel, sample_simplex

ADDITIVE = "additive"
MULTIPLICATIVE = "multiplicative"
_STRUCTURES = (ADDITIVE, MULTIPLICATIVE)

# Counter-based generator, one substream per sampled tensor, so instances
# reproduce from (algorithm name, seed) alone.
RNG_ALGORITHM = "philox4x64-10/seedseq(entropy=seed, spawn_key=(substream,))"
_STREAM_BASE_P = 0
_STREAM_COUPLING = 1
_STREAM_DYNAMICS_SCALARS = 2
_STREAM_BASE_R = 3
_STREAM_INTERACTION_M = 4
_STREAM_REWARD_SCALARS = 5


class InvalidSpec(MFGError):
    pass


class InvalidBranching(MFGError):
    pass


@dataclass(frozen=True)
class GarnetSpec:
    """Size, sparsity, and coupling structure of a random game."""

    n_states: int
    n_actions: int
    branching: int
    dynamics_structure: str = ADDITIVE
    reward_structure: str = ADDITIVE
    epsilon: float = 1e-8  # normalization degeneracy guard
    seed: int = 0
    discount: float = 0.99

    def __post_init__(self):
        if self.n_states < 1 or self.n_actions < 1:
            raise InvalidSpec("n_states and n_actions must be positive")
        if not (1 <= self.branching <= self.n_states):
            raise InvalidSpec(f"branching must lie in [1, {self.n_states}], got {self.branching}")
        if self.dynamics_structure not in _STRUCTURES or self.reward_structure not in _STRUCTURES:
            raise InvalidSpec(f"structures must be one of {_STRUCTURES}")
        if self.epsilon <= 0:
            raise InvalidSpec("epsilon must be positive")
        if not (0.0 <= self.discount < 1.0):
            raise InvalidSpec(f"discount must lie in [0, 1), got {self.discount}")


@dataclass(frozen=True)
class GarnetInstance:
    """Sampled parameters of one random game."""

    base_P: np.ndarray  # (X, A, X), rows with exactly `branching` nonzeros
    coupling_gamma: np.ndarray  # (X, A, X, X), standard normal
    c_p: float
    rho_p: float
    base_R: np.ndarray  # (X, A), uniform on [0, 1]
    interaction_M: np.ndarray  # (X, X), standard normal
    c_r: float
    rho_r: float
    spec: GarnetSpec


def _stream(seed: int, substream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(substream,))
    return np.random.Generator(np.random.Philox(ss))


def sample_base_tensor(n_states: int, n_actions: int, b: int, rng: np.random.Generator) -> np.ndarray:
    """Sparse base transition tensor: b supported next states per (x, a).

    Support cells are drawn uniformly without replacement; their masses come
    from sorted-uniform spacings, i.e. uniformly from the b-simplex.
    """
    if not (1 <= b <= n_states):
        raise InvalidBranching(f"branching must lie in [1, {n_states}], got {b}")
    tensor = np.zeros((n_states, n_actions, n_states))
    for x in range(n_states):
        for a in range(n_actions):
            support = rng.permutation(n_states)[:b]
            tensor[x, a, support] = sample_simplex(b, rng)
    return tensor


def generate(spec: GarnetSpec) -> tuple[GarnetInstance, MFGModel]:
    """Draw an instance from the spec and wrap it as a model.

    Deterministic in the seed: two calls with equal specs produce
    byte-identical tensors.
    """
    X, A = spec.n_states, spec.n_actions
    base_P = sample_base_tensor(X, A, spec.branching, _stream(spec.seed, _STREAM_BASE_P))
    coupling = _stream(spec.seed, _STREAM_COUPLING).standard_normal((X, A, X, X))
    c_p, rho_p = _stream(spec.seed, _STREAM_DYNAMICS_SCALARS).random(2)
    base_R = _stream(spec.seed, _STREAM_BASE_R).random((X, A))
    interaction_M = _stream(spec.seed, _STREAM_INTERACTION_M).standard_normal((X, X))
    c_r, rho_r = _stream(spec.seed, _STREAM_REWARD_SCALARS).random(2)
    inst = GarnetInstance(
        base_P=base_P,
        coupling_gamma=coupling,
        c_p=float(c_p),
        rho_p=float(rho_p),
        base_R=base_R,
        interaction_M=interaction_M,
        c_r=float(c_r),
        rho_r=float(rho_r),
        spec=spec,
    )
    return inst, model_from_instance(inst)


def _normalize_rows(intensity: np.ndarray, fallback: np.ndarray, epsilon: float) -> np.ndarray:
    """Exact L1 normalization of nonnegative rows, with a degeneracy fallback.

    Rows whose total intensity does not exceed epsilon carry no usable
    information (the rectifier zeroed them out); they are replaced by the
    given fallback rows, keeping every output row a distribution.
    """
    sums = intensity.sum(axis=-1, keepdims=True)
    degenerate = sums <= epsilon
    safe = np.where(degenerate, 1.0, sums)
    out = np.where(degenerate, fallback, intensity / safe)
    return out


def transition_tensor(inst: GarnetInstance, mu: np.ndarray) -> np.ndarray:
    """Materialize p(.|x, a, mu) for all (x, a) under the instance's structure."""
    mu = np.asarray(mu, dtype=np.float64)
    shape = inst.base_P.shape
    coupled = (inst.coupling_gamma.reshape(-1, shape[2]) @ mu).reshape(shape)
    if inst.spec.dynamics_structure == ADDITIVE:
        intensity = np.maximum(0.0, inst.c_p * inst.base_P + inst.rho_p * coupled)
        fallback = np.full_like(inst.base_P, 1.0 / inst.spec.n_states)
    else:
        gate = np.maximum(0.0, inst.c_p + inst.rho_p * coupled)
        intensity = inst.base_P * gate
        fallback = inst.base_P  # base rows already sum to 1
    return _normalize_rows(intensity, fallback, inst.spec.epsilon)


def additive_intensity(inst: GarnetInstance, x: int, a: int, mu: np.ndarray) -> Distribution:
    """Transition row where the mean field adds bias to the base transitions."""
    mu = np.asarray(mu, dtype=np.float64)
    raw = np.maximum(0.0, inst.c_p * inst.base_P[x, a] + inst.rho_p * (inst.coupling_gamma[x, a] @ mu))
    total = raw.sum()
    if total <= inst.spec.epsilon:
        return Distribution(np.full(inst.spec.n_states, 1.0 / inst.spec.n_states))
    return Distribution(raw / total)


def multiplicative_intensity(inst: GarnetInstance, x: int, a: int, mu: np.ndarray) -> Distribution:
    """Transition row where the mean field gates the base transitions.

    Support never exceeds the base row's support: a gate cannot create mass
    where the base tensor has none.
    """
    mu = np.asarray(mu, dtype=np.float64)
    gate = np.maximum(0.0, inst.c_p + inst.rho_p * (inst.coupling_gamma[x, a] @ mu))
    raw = inst.base_P[x, a] * gate
    total = raw.sum()
    if total <= inst.spec.epsilon:
        return Distribution(inst.base_P[x, a])
    return Distribution(raw / total)


def reward_matrix(inst: GarnetInstance, mu: np.ndarray) -> np.ndarray:
    """Materialize r(x, a, mu) for all (x, a) under the instance's structure."""
    mu = np.asarray(mu, dtype=np.float64)
    coupled = inst.interaction_M @ mu
    if inst.spec.reward_structure == ADDITIVE:
        return inst.c_r * inst.base_R + inst.rho_r * coupled[:, None]
    return inst.base_R * (inst.c_r + inst.rho_r * coupled[:, None])


def garnet_reward(inst: GarnetInstance, x: int, a: int, mu: np.ndarray) -> float:
    """One-step reward at (x, a) against mean field mu."""
    mu = np.asarray(mu, dtype=np.float64)
    coupled = float(inst.interaction_M[x] @ mu)
    if inst.spec.reward_structure == ADDITIVE:
        return float(inst.c_r * inst.base_R[x, a] + inst.rho_r * coupled)
    return float(inst.base_R[x, a] * (inst.c_r + inst.rho_r * coupled))


def model_from_instance(inst: GarnetInstance) -> MFGModel:
    """Wrap an instance as an MFGModel (rebuild after replacing fields in tests)."""
    spec = inst.spec
    params = {
        "n_states": float(spec.n_states),
        "n_actions": float(spec.n_actions),
        "branching": float(spec.branching),
        "epsilon": spec.epsilon,
        "seed": float(spec.seed),
        "gamma": spec.discount,
        "c_p": inst.c_p,
        "rho_p": inst.rho_p,
        "c_r": inst.c_r,
        "rho_r": inst.rho_r,
    }
    return MFGModel(
        n_states=spec.n_states,
        n_actions=spec.n_actions,
        transition_fn=lambda mu: transition_tensor(inst, mu),
        reward_fn=lambda mu: reward_matrix(inst, mu),
        discount=spec.discount,
        class_tag=GameClass.GARNET,
        name=f"garnet_{spec.n_states}x{spec.n_actions}x{spec.branching}",
        params=params,
        mu_dependent_dynamics=inst.rho_p != 0.0,
        mu_dependent_reward=inst.rho_r != 0.0,
        interaction_matrix=inst.rho_r * inst.interaction_M
        if spec.reward_structure == ADDITIVE
        else None,
    )


def instance_manifest(inst: GarnetInstance) -> dict:
    """JSON-ready description from which the instance can be regenerated."""
    spec = inst.spec
    return {
        "n_states": spec.n_states,
        "n_actions": spec.n_actions,
        "branching": spec.branching,
        "dynamics_structure": spec.dynamics_structure,
        "reward_structure": spec.reward_structure,
        "epsilon": spec.epsilon,
        "seed": spec.seed,
        "discount": spec.discount,
        "rng_algorithm": RNG_ALGORITHM,
    }


def manifest_json(inst: GarnetInstance) -> str:
    return json.dumps(instance_manifest(inst), sort_keys=True)


def instance_from_manifest(manifest: dict) -> GarnetInstance:
    """Regenerate an instance from its manifest (tensors are never stored)."""
    if manifest.get("rng_algorithm", RNG_ALGORITHM) != RNG_ALGORITHM:
        raise InvalidSpec(f"manifest was produced by a different RNG: {manifest['rng_algorithm']}")
    fields = {k: v for k, v in manifest.items() if k != "rng_algorithm"}
    inst, _ = generate(GarnetSpec(**fields))
    return inst
