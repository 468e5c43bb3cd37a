"""The eight named benchmark environments, one constructor per game.

Every constructor validates its parameters, builds vectorized transition
and reward functions, and returns an immutable MFGModel carrying the
structural class tag. Games whose kernel or reward ignores the mean field
declare it, so downstream code can cache the materialized arrays.

Boundary conventions: 1-D walks clamp to the grid (preserving "move
toward" semantics on a line); blocked 2-D moves leave the agent in place
(preserving wall semantics).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GameClass, InvalidParam, MFGError, MFGModel

# Reward term -alpha*log(mu(x)) needs a floor: the stationary operator can
# produce exact zeros early in a run.
LOG_MU_FLOOR = 1e-10


class NotSkewSymmetric(MFGError):
    pass


class UnknownEnv(MFGError):
    pass


@dataclass(frozen=True)
class ContractionCertificate:
    """Whether the switching cost dominates the congestion gain.

    holds is True when C > alpha/(1-gamma), in which case the best response
    is the constant always-Stay policy and fixed-point iteration converges
    in one step.
    """

    holds: bool
    threshold: float


def _line_walk_tensor(n: int, action_values: np.ndarray, noise_probs: dict[int, float]) -> np.ndarray:
    """Clamped 1-D walk: next state = clamp(x + a + e, 0, n-1)."""
    tensor = np.zeros((n, len(action_values), n))
    for x in range(n):
        for ai, av in enumerate(action_values):
            for e, pe in noise_probs.items():
                nxt = min(max(x + int(av) + e, 0), n - 1)
                tensor[x, ai, nxt] += pe
    return tensor


def make_move_forward(c: float = 0.1, gamma: float = 0.99) -> MFGModel:
    """One-dimensional grid world where reward grows with the state index.

    Seven states, actions {-1, 0, 1}, uniform noise on {-1, 0, 1}, reward
    -c|a| + x. Neither the kernel nor the reward sees the mean field, so any
    optimal policy of the induced MDP is an equilibrium.
    """
    if c < 0:
        raise InvalidParam(f"move cost must be nonnegative, got {c}")
    n, actions = 7, np.array([-1, 0, 1])
    tensor = _line_walk_tensor(n, actions, {-1: 1 / 3, 0: 1 / 3, 1: 1 / 3})
    rewards = -c * np.abs(actions)[None, :] + np.arange(n, dtype=np.float64)[:, None]
    return MFGModel(
        n_states=n,
        n_actions=3,
        transition_fn=lambda mu: tensor,
        reward_fn=lambda mu: rewards,
        discount=gamma,
        class_tag=GameClass.NO_INTERACTION,
        name="move_forward",
        params={"c": c, "gamma": gamma},
        mu_dependent_dynamics=False,
        mu_dependent_reward=False,
    )


def make_coordination(
    C: float = 80.0, alpha: float = 1.0, gamma: float = 0.9
) -> tuple[MFGModel, ContractionCertificate]:
    """Two-state stay/switch game with switching cost C and congestion weight alpha.

    Returns the model together with a certificate stating whether
    C > alpha/(1-gamma), the regime in which the best response is constant.
    """
    if C <= 0 or alpha <= 0:
        raise InvalidParam(f"C and alpha must be positive, got C={C}, alpha={alpha}")
    tensor = np.zeros((2, 2, 2))
    for x in range(2):
        tensor[x, 0, x] = 1.0  # Stay
        tensor[x, 1, 1 - x] = 1.0  # Switch
    switch_cost = np.array([0.0, -C])

    def reward_fn(mu):
        return switch_cost[None, :] - alpha * mu[:, None]

    threshold = alpha / (1.0 - gamma)
    cert = ContractionCertificate(holds=C > threshold, threshold=threshold)
    model = MFGModel(
        n_states=2,
        n_actions=2,
        transition_fn=lambda mu: tensor,
        reward_fn=reward_fn,
        discount=gamma,
        class_tag=GameClass.CONTRACTIVE,
        name="coordination",
        params={
            "C": C,
            "alpha": alpha,
            "gamma": gamma,
            "contraction_threshold": threshold,
            "contraction_holds": float(cert.holds),
        },
        mu_dependent_dynamics=False,
        mu_dependent_reward=True,
        interaction_g=lambda x, mu: -alpha * mu[x],
        interaction_matrix=-alpha * np.eye(2),
    )
    return model, cert


def _bar_noise(p: float) -> dict[int, float]:
    # Stay-put mass p, symmetric split of the remainder over the two moves.
    return {0: p, -1: (1.0 - p) / 2.0, 1: (1.0 - p) / 2.0}


def make_beach_bar(
    c1: float = 2.0,
    c2: float = 5.0,
    alpha: float = 5.0,
    p: float = 1.0 / 3.0,
    gamma: float = 0.99,
) -> MFGModel:
    """Crowd-averse walk toward a bar at the center of a 7-state beach.

    Reward -c1|a| - c2|x - 3| - alpha*mu(x): agents pay to move, want the
    center, and dislike crowded spots.
    """
    if c1 <= 0 or c2 <= 0 or alpha <= 0:
        raise InvalidParam("c1, c2, alpha must be positive")
    if not (0.0 <= p <= 1.0):
        raise InvalidParam(f"stay probability must lie in [0, 1], got {p}")
    n, actions, center = 7, np.array([-1, 0, 1]), 3
    tensor = _line_walk_tensor(n, actions, _bar_noise(p))
    base = -c1 * np.abs(actions)[None, :] - c2 * np.abs(np.arange(n) - center)[:, None]

    def reward_fn(mu):
        return base - alpha * mu[:, None]

    return MFGModel(
        n_states=n,
        n_actions=3,
        transition_fn=lambda mu: tensor,
        reward_fn=reward_fn,
        discount=gamma,
        class_tag=GameClass.LASRY_LIONS,
        name="beach_bar",
        params={"c1": c1, "c2": c2, "alpha": alpha, "p": p, "center": float(center), "gamma": gamma},
        mu_dependent_dynamics=False,
        mu_dependent_reward=True,
        interaction_g=lambda x, mu: -alpha * mu[x],
        interaction_matrix=-alpha * np.eye(n),
    )


def make_two_beach_bars(
    c1: float = 0.5,
    c2: float = 15.0,
    alpha: float = 60.0,
    p: float = 1.0 / 3.0,
    gamma: float = 0.99,
) -> MFGModel:
    """Crowd-seeking variant with two bars at states 2 and 4.

    Reward -c1|a| - c2*min(|x-2|, |x-4|) + alpha*mu(x). The positive
    interaction rewards crowding, so with alpha >> c2 >> c1 the game has two
    equilibria, each with the population piled on one bar.
    """
    if c1 <= 0 or c2 <= 0 or alpha <= 0:
        raise InvalidParam("c1, c2, alpha must be positive")
    if not (0.0 <= p <= 1.0):
        raise InvalidParam(f"stay probability must lie in [0, 1], got {p}")
    n, actions, x_left, x_right = 7, np.array([-1, 0, 1]), 2, 4
    tensor = _line_walk_tensor(n, actions, _bar_noise(p))
    dist = np.minimum(np.abs(np.arange(n) - x_left), np.abs(np.arange(n) - x_right))
    base = -c1 * np.abs(actions)[None, :] - c2 * dist[:, None]

    def reward_fn(mu):
        return base + alpha * mu[:, None]

    return MFGModel(
        n_states=n,
        n_actions=3,
        transition_fn=lambda mu: tensor,
        reward_fn=reward_fn,
        discount=gamma,
        class_tag=GameClass.MULTI_EQUILIBRIA,
        name="two_beach_bars",
        params={
            "c1": c1,
            "c2": c2,
            "alpha": alpha,
            "p": p,
            "x_left": float(x_left),
            "x_right": float(x_right),
            "gamma": gamma,
        },
        mu_dependent_dynamics=False,
        mu_dependent_reward=True,
        interaction_g=lambda x, mu: alpha * mu[x],
        interaction_matrix=alpha * np.eye(n),
    )


FOUR_ROOMS_SIZE = 11
FOUR_ROOMS_DOORS = frozenset({(2, 5), (7, 5), (5, 7), (5, 2)})
# up, right, down, left, stay as (row, col) displacements
GRID_MOVES_4R = np.array([(-1, 0), (0, 1), (1, 0), (0, -1), (0, 0)])


def four_rooms_cells() -> list[tuple[int, int]]:
    """Navigable cells of the four-rooms grid, in row-major order."""
    cells = []
    for r in range(FOUR_ROOMS_SIZE):
        for c in range(FOUR_ROOMS_SIZE):
            on_wall = r == 5 or c == 5
            if not on_wall or (r, c) in FOUR_ROOMS_DOORS:
                cells.append((r, c))
    return cells


def make_four_rooms(alpha: float = 1.0, gamma: float = 0.99) -> MFGModel:
    """Crowd-averse exploration of an 11x11 grid split into four rooms.

    Walls fill row 5 and column 5 except for four doors. Action and noise
    displacements add before the single legality check: a composite move
    landing on a wall or off the grid leaves the agent in place. Reward is
    -alpha*log(mu(x)), pushing the population to spread out.
    """
    if alpha <= 0:
        raise InvalidParam(f"alpha must be positive, got {alpha}")
    cells = four_rooms_cells()
    index = {cell: i for i, cell in enumerate(cells)}
    n = len(cells)
    n_actions = len(GRID_MOVES_4R)

    tensor = np.zeros((n, n_actions, n))
    for i, (r, c) in enumerate(cells):
        for ai, da in enumerate(GRID_MOVES_4R):
            for de in GRID_MOVES_4R:
                rr, cc = r + da[0] + de[0], c + da[1] + de[1]
                target = index.get((rr, cc), i) if 0 <= rr < 11 and 0 <= cc < 11 else i
                tensor[i, ai, target] += 1.0 / n_actions

    def reward_fn(mu):
        r = -alpha * np.log(np.maximum(mu, LOG_MU_FLOOR))
        return np.repeat(r[:, None], n_actions, axis=1)

    params = {
        "alpha": alpha,
        "gamma": gamma,
        "grid_rows": float(FOUR_ROOMS_SIZE),
        "grid_cols": float(FOUR_ROOMS_SIZE),
    }
    for i, (r, c) in enumerate(cells):
        params[f"navigable_{i}"] = float(r * FOUR_ROOMS_SIZE + c)

    return MFGModel(
        n_states=n,
        n_actions=n_actions,
        transition_fn=lambda mu: tensor,
        reward_fn=reward_fn,
        discount=gamma,
        class_tag=GameClass.POTENTIAL,
        name="four_rooms",
        params=params,
        mu_dependent_dynamics=False,
        mu_dependent_reward=True,
        interaction_g=lambda x, mu: -alpha * float(np.log(max(mu[x], LOG_MU_FLOOR))),
    )


RPS_MATRIX = np.array(
    [
        [0.0, -1.0, 1.0],
        [1.0, 0.0, -1.0],
        [-1.0, 1.0, 0.0],
    ]
)


def make_rps(matrix: np.ndarray | None = None, gamma: float = 0.99) -> MFGModel:
    """Rock-paper-scissors crowd game on three stances.

    The interaction matrix must be skew-symmetric: entry (x, y) = +1 means
    stance x beats stance y. Reward in stance x is mu(prey) - mu(predator).
    An action deterministically selects the next stance at no cost; this is
    the minimal dynamics under which the reward drives a cyclic game.
    """
    A = RPS_MATRIX if matrix is None else np.asarray(matrix, dtype=np.float64)
    if A.shape != (3, 3):
        raise NotSkewSymmetric(f"interaction matrix must be 3x3, got {A.shape}")
    if np.abs(A + A.T).max() > 1e-12:
        raise NotSkewSymmetric("interaction matrix must satisfy A = -A^T")
    tensor = np.zeros((3, 3, 3))
    for a in range(3):
        tensor[:, a, a] = 1.0

    def reward_fn(mu):
        return np.repeat((A @ mu)[:, None], 3, axis=1)

    return MFGModel(
        n_states=3,
        n_actions=3,
        transition_fn=lambda mu: tensor,
        reward_fn=reward_fn,
        discount=gamma,
        class_tag=GameClass.CYCLIC,
        name="rps",
        params={"gamma": gamma},
        mu_dependent_dynamics=False,
        mu_dependent_reward=True,
        interaction_g=lambda x, mu: float(A[x] @ mu),
        interaction_matrix=A,
    )


SIS_N_ACTIONS = 5


def sis_intensity(action: int) -> float:
    """Social-interaction intensity of an action index, evenly spaced on [0, 1]."""
    return action / (SIS_N_ACTIONS - 1)


def make_sis(
    beta: float = 0.5, nu: float = 0.1, C: float = 5.0, gamma: float = 0.99
) -> MFGModel:
    """Susceptible/infected epidemic game with chosen interaction intensity.

    A susceptible agent acting at intensity lam gets infected with
    probability beta*lam*mu(I); an infected agent recovers with probability
    nu regardless of its action. Reward is intensity - C*1(infected): social
    activity pays, sickness costs. The kernel depends on the mean field, so
    the game is dynamics-coupled.
    """
    if not (0.0 <= beta <= 1.0) or not (0.0 <= nu <= 1.0):
        raise InvalidParam(f"beta and nu must lie in [0, 1], got beta={beta}, nu={nu}")
    if C <= 0:
        raise InvalidParam(f"infection cost must be positive, got {C}")
    intensities = np.array([sis_intensity(a) for a in range(SIS_N_ACTIONS)])

    def transition_fn(mu):
        tensor = np.zeros((2, SIS_N_ACTIONS, 2))
        infect = beta * intensities * mu[1]
        tensor[0, :, 1] = infect
        tensor[0, :, 0] = 1.0 - infect
        tensor[1, :, 0] = nu
        tensor[1, :, 1] = 1.0 - nu
        return tensor

    rewards = np.vstack([intensities, intensities - C])
    return MFGModel(
        n_states=2,
        n_actions=SIS_N_ACTIONS,
        transition_fn=transition_fn,
        reward_fn=lambda mu: rewards,
        discount=gamma,
        class_tag=GameClass.DYNAMICS_COUPLED,
        name="sis",
        params={"beta": beta, "nu": nu, "C": C, "gamma": gamma},
        mu_dependent_dynamics=True,
        mu_dependent_reward=False,
    )


KINETIC_SIZE = 5
# up, down, left, right, stay as (row, col) displacements
GRID_MOVES_KC = np.array([(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)])


def make_kinetic_congestion(
    tau: float = 0.18, c_move: float = 0.1, gamma: float = 0.99
) -> MFGModel:
    """Grid world where crowd density at the target cell blocks movement.

    A move toward cell y succeeds with probability 1 - min(1, mu(y)/tau);
    on failure (or when aiming off the grid) the agent stays put. Reward is
    -1 away from the corner target plus a movement cost, so congestion acts
    through the dynamics rather than the reward.
    """
    if tau <= 0:
        raise InvalidParam(f"capacity must be positive, got {tau}")
    if c_move < 0:
        raise InvalidParam(f"movement cost must be nonnegative, got {c_move}")
    n = KINETIC_SIZE * KINETIC_SIZE
    n_actions = len(GRID_MOVES_KC)
    target_state = (KINETIC_SIZE - 1) * KINETIC_SIZE + (KINETIC_SIZE - 1)

    # Precompute move targets; -1 marks off-grid attempts.
    targets = np.full((n, n_actions), -1, dtype=np.int64)
    for x in range(n):
        r, c = divmod(x, KINETIC_SIZE)
        for ai, (dr, dc) in enumerate(GRID_MOVES_KC):
            rr, cc = r + dr, c + dc
            if 0 <= rr < KINETIC_SIZE and 0 <= cc < KINETIC_SIZE:
                targets[x, ai] = rr * KINETIC_SIZE + cc

    def transition_fn(mu):
        tensor = np.zeros((n, n_actions, n))
        for x in range(n):
            for ai in range(n_actions):
                y = targets[x, ai]
                if y < 0:
                    tensor[x, ai, x] = 1.0
                    continue
                success = 1.0 - min(1.0, mu[y] / tau)
                tensor[x, ai, y] += success
                tensor[x, ai, x] += 1.0 - success
        return tensor

    rewards = np.full((n, n_actions), -1.0)
    rewards[target_state, :] = 0.0
    rewards[:, :-1] -= c_move  # last action is stay

    params = {
        "tau": tau,
        "c_move": c_move,
        "gamma": gamma,
        "grid_rows": float(KINETIC_SIZE),
        "grid_cols": float(KINETIC_SIZE),
        "target_row": float(KINETIC_SIZE - 1),
        "target_col": float(KINETIC_SIZE - 1),
    }
    for x in range(n):
        params[f"navigable_{x}"] = float(x)

    return MFGModel(
        n_states=n,
        n_actions=n_actions,
        transition_fn=transition_fn,
        reward_fn=lambda mu: rewards,
        discount=gamma,
        class_tag=GameClass.DYNAMICS_COUPLED,
        name="kinetic_congestion",
        params=params,
        mu_dependent_dynamics=True,
        mu_dependent_reward=False,
    )


def _coordination_model(**params) -> MFGModel:
    model, _ = make_coordination(**params)
    return model


ENV_REGISTRY = {
    "move_forward": make_move_forward,
    "coordination": _coordination_model,
    "beach_bar": make_beach_bar,
    "two_beach_bars": make_two_beach_bars,
    "four_rooms": make_four_rooms,
    "rps": make_rps,
    "sis": make_sis,
    "kinetic_congestion": make_kinetic_congestion,
}


def list_envs() -> list[str]:
    return sorted(ENV_REGISTRY)


def build_env(name: str, params: dict | None = None) -> MFGModel:
    """Construct a registered environment from a parameter map."""
    if name not in ENV_REGISTRY:
        raise UnknownEnv(f"unknown environment {name!r}; known: {', '.join(list_envs())}")
    return ENV_REGISTRY[name](**(params or {}))
