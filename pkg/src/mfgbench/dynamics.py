"""Exact dynamic-programming primitives for stationary mean field games.

All operations are pure functions of their inputs and safe to call
concurrently. Non-convergence of the fixed-point iterations is reported
through residuals, never raised: cyclic games can have slowly mixing chains
and the harness must still log a trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DimensionMismatch,
    Distribution,
    Logits,
    MFGError,
    MFGModel,
    Policy,
    QTable,
    ValueTable,
    uniform_distribution,
)


class EmptyList(MFGError):
    pass


class NonPositiveTemperature(MFGError):
    pass


# Occupancy mass below this is treated as "state never visited" when
# averaging policies; such rows are payoff-irrelevant.
OCCUPANCY_FLOOR = 1e-12


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic state-to-state matrix induced by a (mean field, policy) pair."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64, copy=True)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise DimensionMismatch(f"transition matrix must be square, got {rows.shape}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class MeanFieldConfig:
    """Controls the iterated one-step mean-field operator.

    The underlying operator runs a fixed number of forward steps; the L1
    early stop is an addition that loses nothing because contractive
    examples converge in one step.
    """

    max_steps: int = 1000
    tol: float = 1e-12  # L1 units
    init: Distribution | None = None  # None means uniform

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class BRConfig:
    """Controls value-iteration sweeps for best response and policy evaluation."""

    horizon: int = 1000
    tol: float = 1e-12  # sup-norm stopping threshold

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


def _check_model_dims(model: MFGModel, mu: np.ndarray | None = None, pi: np.ndarray | None = None):
    if mu is not None and mu.shape != (model.n_states,):
        raise DimensionMismatch(f"mean field shape {mu.shape} does not match |X|={model.n_states}")
    if pi is not None and pi.shape != (model.n_states, model.n_actions):
        raise DimensionMismatch(
            f"policy shape {pi.shape} does not match ({model.n_states}, {model.n_actions})"
        )


def induced_transition_matrix(model: MFGModel, mu: Distribution, pi: Policy) -> TransitionMatrix:
    """P(x'|x) = sum_a p(x'|x, a, mu) pi(a|x): the chain followed by one agent."""
    m, p = mu.probs, pi.action_probs
    _check_model_dims(model, m, p)
    kernel = model.transition_tensor(m)
    return TransitionMatrix(np.einsum("xay,xa->xy", kernel, p))


def mean_field_step(P: TransitionMatrix, mu: Distribution) -> Distribution:
    """One forward step of the population distribution: mu' = P^T mu."""
    if P.rows.shape[0] != len(mu):
        raise DimensionMismatch(f"matrix {P.rows.shape} vs distribution of length {len(mu)}")
    return Distribution(P.rows.T @ mu.probs)


def stationary_mean_field(
    model: MFGModel, pi: Policy, cfg: MeanFieldConfig = MeanFieldConfig()
) -> tuple[Distribution, int, float]:
    """Approximate the stationary distribution of the chain induced by pi.

    Iterates mu <- P_{mu,pi}^T mu, rebuilding the kernel at the current mu
    each step so dynamics-coupled games are handled exactly. Stops after
    max_steps or when the L1 change drops below tol.

    Returns:
        (mean field, steps used, final L1 change).
    """
    p = pi.action_probs
    _check_model_dims(model, None, p)
    mu = (cfg.init.probs if cfg.init is not None else uniform_distribution(model.n_states).probs).copy()

    P = None
    if not model.mu_dependent_dynamics:
        P = np.einsum("xay,xa->xy", model.transition_tensor(mu), p)

    steps = 0
    residual = np.inf
    for _ in range(cfg.max_steps):
        if model.mu_dependent_dynamics:
            P = np.einsum("xay,xa->xy", model.transition_tensor(mu), p)
        mu_next = P.T @ mu
        steps += 1
        residual = float(np.abs(mu_next - mu).sum())
        mu = mu_next
        if residual < cfg.tol:
            break
    return Distribution(mu), steps, residual


def policy_evaluation(
    model: MFGModel, pi: Policy, mu: Distribution, cfg: BRConfig = BRConfig()
) -> tuple[QTable, ValueTable, float]:
    """Evaluate a policy against a fixed mean field.

    Solves V = r_pi + gamma P_pi V by fixed-point sweeps (sup-norm stop at
    cfg.tol, at most cfg.horizon sweeps), then forms Q(x,a) = r(x,a,mu) +
    gamma sum_x' p(x'|x,a,mu) V(x') and the start-distribution value
    J = sum_x mu(x) V(x).
    """
    m, p = mu.probs, pi.action_probs
    _check_model_dims(model, m, p)
    kernel = model.transition_tensor(m)
    rewards = model.reward_matrix(m)
    P_pi = np.einsum("xay,xa->xy", kernel, p)
    r_pi = np.einsum("xa,xa->x", rewards, p)
    gamma = model.discount

    V = np.zeros(model.n_states)
    for _ in range(cfg.horizon):
        V_next = r_pi + gamma * (P_pi @ V)
        delta = float(np.abs(V_next - V).max())
        V = V_next
        if delta < cfg.tol:
            break
    flat = kernel.reshape(-1, model.n_states)
    Q = rewards + gamma * (flat @ V).reshape(rewards.shape)
    J = float(m @ V)
    return QTable(Q), ValueTable(V), J


def backward_induction_br(
    model: MFGModel, mu: Distribution, cfg: BRConfig = BRConfig()
) -> tuple[QTable, Policy]:
    """Best response against a fixed mean field via value iteration.

    Runs at most cfg.horizon sweeps of V <- max_a [r + gamma P V], stopping
    early when the sup-norm change falls below cfg.tol. The returned policy
    is deterministic and greedy on the final Q, ties broken by the lowest
    action index so solver runs are bit-reproducible.
    """
    m = mu.probs
    _check_model_dims(model, m)
    kernel = model.transition_tensor(m)
    rewards = model.reward_matrix(m)
    gamma = model.discount
    flat = kernel.reshape(-1, model.n_states)

    V = np.zeros(model.n_states)
    for _ in range(cfg.horizon):
        Q = rewards + gamma * (flat @ V).reshape(rewards.shape)
        V_next = Q.max(axis=1)
        delta = float(np.abs(V_next - V).max())
        V = V_next
        if delta < cfg.tol:
            break
    Q = rewards + gamma * (flat @ V).reshape(rewards.shape)
    greedy = np.argmax(Q, axis=1)  # first maximal index
    policy = np.zeros((model.n_states, model.n_actions))
    policy[np.arange(model.n_states), greedy] = 1.0
    return QTable(Q), Policy(policy)


def softmax_policy(q: QTable | Logits | np.ndarray, tau: float) -> Policy:
    """Boltzmann policy: row x proportional to exp(q(x,.)/tau).

    Rows are computed with max-subtraction, so large values cannot overflow
    and adding a per-row constant leaves the output unchanged.
    """
    if tau <= 0:
        raise NonPositiveTemperature(f"temperature must be positive, got {tau}")
    if isinstance(q, QTable):
        raw = q.values
    elif isinstance(q, Logits):
        raw = q.raw
    else:
        raw = np.asarray(q, dtype=np.float64)
    shifted = (raw - raw.max(axis=1, keepdims=True)) / tau
    e = np.exp(shifted)
    return Policy(e / e.sum(axis=1, keepdims=True))


def average_policies(policies: list[Policy], occupancies: list[Distribution]) -> Policy:
    """Occupancy-weighted average of policies.

    Row x of the result is sum_i mu_i(x) pi_i(.|x) / sum_i mu_i(x). States
    whose total occupancy falls below 1e-12 are never visited by any of the
    averaged policies; their rows default to uniform to keep the result a
    valid policy.
    """
    if not policies:
        raise EmptyList("need at least one policy")
    if len(policies) != len(occupancies):
        raise DimensionMismatch(f"{len(policies)} policies vs {len(occupancies)} occupancies")
    n_states, n_actions = policies[0].action_probs.shape
    num = np.zeros((n_states, n_actions))
    den = np.zeros(n_states)
    for pi, occ in zip(policies, occupancies):
        if pi.action_probs.shape != (n_states, n_actions) or len(occ) != n_states:
            raise DimensionMismatch("mismatched shapes in policy averaging")
        num += occ.probs[:, None] * pi.action_probs
        den += occ.probs
    return Policy(_finish_policy_average(num, den))


def _finish_policy_average(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    n_actions = num.shape[1]
    out = np.empty_like(num)
    visited = den > OCCUPANCY_FLOOR
    out[visited] = num[visited] / den[visited, None]
    out[~visited] = 1.0 / n_actions
    return out


def exploitability_at(
    model: MFGModel, pi: Policy, mu_pi: Distribution, br_cfg: BRConfig = BRConfig()
) -> float:
    """Exploitability of pi given its (already computed) stationary mean field.

    Equals sum_x mu^pi(x) [V*(x) - V^pi(x)] with V* from backward induction
    and V^pi from policy evaluation, both at mu^pi. This is the mu-weighted
    form of max_pi' J(pi'; mu^pi) - J(pi; mu^pi) for a start state drawn
    from the population distribution itself.
    """
    q_star, _ = backward_induction_br(model, mu_pi, br_cfg)
    v_star = q_star.values.max(axis=1)
    _, _, j_pi = policy_evaluation(model, pi, mu_pi, br_cfg)
    return float(mu_pi.probs @ v_star) - j_pi


def exploitability(
    model: MFGModel,
    pi: Policy,
    mf_cfg: MeanFieldConfig = MeanFieldConfig(),
    br_cfg: BRConfig = BRConfig(),
) -> tuple[float, Distribution]:
    """Maximal gain achievable by deviating from pi while the population plays pi.

    The raw (unclipped) value is returned; it is nonnegative up to the
    accuracy of the underlying dynamic programming.
    """
    mu_pi, _, _ = stationary_mean_field(model, pi, mf_cfg)
    return exploitability_at(model, pi, mu_pi, br_cfg), mu_pi
