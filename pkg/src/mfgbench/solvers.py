"""Equilibrium-learning solvers for stationary mean field games.

Eight algorithms share one contract: a solver is a pure function of
(model, config) — same inputs give byte-identical traces — and emits a
per-iteration record of exploitability plus mean-field/policy snapshots.

Three families:
  * best-response fixed points: pure, damped, and fictitious play;
  * policy-evaluation loops: policy iteration, smoothed and Boltzmann
    variants, and mirror descent on accumulated Q-values;
  * direct exploitability minimization by a particle swarm over policy logits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import Distribution, MFGError, MFGModel, Policy, QTable
from .dynamics import (
    BRConfig,
    MeanFieldConfig,
    _finish_policy_average,
    backward_induction_br,
    exploitability,
    exploitability_at,
    policy_evaluation,
    softmax_policy,
    stationary_mean_field,
)

SPI_CONSTANT = "constant"
SPI_DECREASING = "decreasing"


class UnknownAlgorithm(MFGError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Shared and per-algorithm solver hyperparameters.

    Unused fields are ignored by algorithms that do not consume them, which
    keeps sweep configs flat. ``mu0`` optionally overrides the initial mean
    field (instead of the stationary distribution of the initial policy);
    multi-equilibria experiments use it to seed distinct basins.
    """

    iterations: int = 100
    mf_cfg: MeanFieldConfig = field(default_factory=MeanFieldConfig)
    br_cfg: BRConfig = field(default_factory=BRConfig)
    init_seed: int = 0
    init_temperature: float = 1.0
    eval_stride: int = 1
    mu0: Distribution | None = None
    damping: float = 0.5  # damped fixed point
    spi_mode: str = SPI_CONSTANT
    spi_damping: float = 0.5
    temperature: float = 0.2  # Boltzmann policies (BPI, OMD, PSO fitness)
    learning_rate: float = 1.0  # OMD
    particles: int = 20  # PSO
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0.0 < self.damping <= 1.0) or not (0.0 < self.spi_damping <= 1.0):
            raise ValueError("damping constants must lie in (0, 1]")
        if self.spi_mode not in (SPI_CONSTANT, SPI_DECREASING):
            raise ValueError(f"spi_mode must be constant or decreasing, got {self.spi_mode}")
        if self.temperature <= 0 or self.learning_rate <= 0 or self.init_temperature <= 0:
            raise ValueError("temperatures and learning rate must be positive")
        if self.particles < 1:
            raise ValueError("particles must be >= 1")
        if self.inertia < 0 or self.cognitive < 0 or self.social < 0:
            raise ValueError("PSO weights must be nonnegative")
        if self.eval_stride < 1:
            raise ValueError("eval_stride must be >= 1")


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    exploitability: float
    wall_time_ms: float
    mean_field: np.ndarray
    policy: np.ndarray


@dataclass(frozen=True)
class SolverTrace:
    """Per-iteration log of a solver run plus the final equilibrium candidate."""

    algorithm: str
    points: tuple[TracePoint, ...]
    final_policy: Policy
    final_mean_field: Distribution

    @property
    def final_exploitability(self) -> float:
        return self.points[-1].exploitability

    @property
    def exploitabilities(self) -> np.ndarray:
        return np.array([p.exploitability for p in self.points])

    def canonical_bytes(self) -> bytes:
        """Deterministic serialization of the numeric payload.

        Wall-clock timings and the algorithm id are excluded: two
        algebraically equivalent runs (for example, full damping versus the
        undamped loop) must serialize identically.
        """
        chunks = [np.int64(len(self.points)).tobytes()]
        for p in self.points:
            chunks.append(np.int64(p.iteration).tobytes())
            chunks.append(np.float64(p.exploitability).tobytes())
            chunks.append(np.ascontiguousarray(p.mean_field).tobytes())
            chunks.append(np.ascontiguousarray(p.policy).tobytes())
        chunks.append(np.ascontiguousarray(self.final_policy.action_probs).tobytes())
        chunks.append(np.ascontiguousarray(self.final_mean_field.probs).tobytes())
        return b"".join(chunks)


class _Recorder:
    """Collects trace points at the configured stride."""

    def __init__(self, model: MFGModel, cfg: SolverConfig, algorithm: str):
        self.model = model
        self.cfg = cfg
        self.algorithm = algorithm
        self.points: list[TracePoint] = []
        self._t0 = time.perf_counter()

    def wants(self, k: int) -> bool:
        return k == 0 or k == self.cfg.iterations or k % self.cfg.eval_stride == 0

    def record(self, k: int, value: float, mu: np.ndarray, pi: np.ndarray) -> None:
        ms = (time.perf_counter() - self._t0) * 1000.0
        self.points.append(TracePoint(k, float(value), ms, np.array(mu), np.array(pi)))

    def log_policy(self, k: int, pi: Policy) -> None:
        """Full evaluation: recompute the stationary mean field of pi."""
        if not self.wants(k):
            return
        value, mu_pi = exploitability(self.model, pi, self.cfg.mf_cfg, self.cfg.br_cfg)
        self.record(k, value, mu_pi.probs, pi.action_probs)

    def log_policy_at(self, k: int, pi: Policy, mu_pi: Distribution) -> None:
        """Fast path when the solver loop already computed mu^pi."""
        if not self.wants(k):
            return
        value = exploitability_at(self.model, pi, mu_pi, self.cfg.br_cfg)
        self.record(k, value, mu_pi.probs, pi.action_probs)

    def finish(self, pi: Policy, mu: Distribution) -> SolverTrace:
        return SolverTrace(self.algorithm, tuple(self.points), pi, mu)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed)))


def init_policy(model: MFGModel, seed: int, tau0: float = 1.0) -> Policy:
    """Random Boltzmann policy: standard-normal logits passed through softmax."""
    logits = _rng(seed).standard_normal((model.n_states, model.n_actions))
    return softmax_policy(logits, tau0)


def _initial_mean_field(model: MFGModel, pi0: Policy, cfg: SolverConfig) -> Distribution:
    if cfg.mu0 is not None:
        return cfg.mu0
    mu0, _, _ = stationary_mean_field(model, pi0, cfg.mf_cfg)
    return mu0


def solve_pure_fp(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Best-respond to the current mean field, then fully adopt its stationary law."""
    rec = _Recorder(model, cfg, "pure_fp")
    pi = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu = _initial_mean_field(model, pi, cfg)
    rec.log_policy(0, pi)
    for k in range(1, cfg.iterations + 1):
        _, pi = backward_induction_br(model, mu, cfg.br_cfg)
        mu, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
        rec.log_policy_at(k, pi, mu)
    return rec.finish(pi, mu)


def solve_damped_fp(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Fixed point with a damped mean-field update mu_k = (1-lam) mu_{k-1} + lam mu^pi."""
    rec = _Recorder(model, cfg, "damped_fp")
    lam = cfg.damping
    pi = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu = _initial_mean_field(model, pi, cfg)
    rec.log_policy(0, pi)
    for k in range(1, cfg.iterations + 1):
        _, pi = backward_induction_br(model, mu, cfg.br_cfg)
        mu_pi, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
        if lam == 1.0:
            # Exact reduction to the undamped loop, bit for bit.
            mu = mu_pi
        else:
            mu = Distribution((1.0 - lam) * mu.probs + lam * mu_pi.probs)
        rec.log_policy_at(k, pi, mu_pi)
    return rec.finish(pi, mu)


def solve_fictitious_play(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Best-respond to the running-average mean field and average the responses.

    The average mean field takes weight 1/(k+1) on the newest stationary law,
    so it stays the running mean of everything seen so far. The output policy
    is the occupancy-weighted average of the best responses, maintained as
    running numerator/denominator sums per state.
    """
    rec = _Recorder(model, cfg, "fictitious_play")
    pi0 = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu_bar = _initial_mean_field(model, pi0, cfg)
    rec.log_policy(0, pi0)

    num = np.zeros((model.n_states, model.n_actions))
    den = np.zeros(model.n_states)
    pi_bar, mu_of_pi_bar = pi0, mu_bar
    for k in range(1, cfg.iterations + 1):
        _, pi_star = backward_induction_br(model, mu_bar, cfg.br_cfg)
        mu_star, _, _ = stationary_mean_field(model, pi_star, cfg.mf_cfg)
        w = 1.0 / (k + 1.0)
        mu_bar = Distribution((1.0 - w) * mu_bar.probs + w * mu_star.probs)
        num += mu_star.probs[:, None] * pi_star.action_probs
        den += mu_star.probs
        pi_bar = Policy(_finish_policy_average(num, den))
        if rec.wants(k):
            value, mu_of_pi_bar = exploitability(model, pi_bar, cfg.mf_cfg, cfg.br_cfg)
            rec.record(k, value, mu_of_pi_bar.probs, pi_bar.action_probs)
    return rec.finish(pi_bar, mu_bar)


def greedy_policy(q: QTable | np.ndarray) -> Policy:
    """Deterministic policy picking argmax_a Q(x, a), lowest index on ties."""
    values = q.values if isinstance(q, QTable) else np.asarray(q, dtype=np.float64)
    n_states, n_actions = values.shape
    out = np.zeros((n_states, n_actions))
    out[np.arange(n_states), np.argmax(values, axis=1)] = 1.0
    return Policy(out)


def solve_policy_iteration(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Greedy improvement against the previous Q, full mean-field adoption."""
    rec = _Recorder(model, cfg, "policy_iteration")
    pi = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu = _initial_mean_field(model, pi, cfg)
    q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
    rec.log_policy(0, pi)
    for k in range(1, cfg.iterations + 1):
        pi = greedy_policy(q)
        mu, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
        q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
        rec.log_policy_at(k, pi, mu)
    return rec.finish(pi, mu)


def solve_smooth_pi(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Policy iteration with a damped mean-field update.

    Constant mode uses a fixed weight on the new stationary law; decreasing
    mode uses 1/1, 1/2, 1/3, ... so the first update replaces the history
    entirely and later ones average it in.
    """
    rec = _Recorder(model, cfg, "smooth_pi")
    pi = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu = _initial_mean_field(model, pi, cfg)
    q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
    rec.log_policy(0, pi)
    for k in range(1, cfg.iterations + 1):
        pi = greedy_policy(q)
        mu_pi, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
        lam = cfg.spi_damping if cfg.spi_mode == SPI_CONSTANT else 1.0 / k
        if lam == 1.0:
            mu = mu_pi
        else:
            mu = Distribution(lam * mu_pi.probs + (1.0 - lam) * mu.probs)
        q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
        rec.log_policy_at(k, pi, mu_pi)
    return rec.finish(pi, mu)


def solve_boltzmann_pi(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Policy iteration with softmax improvement instead of greedy."""
    rec = _Recorder(model, cfg, "boltzmann_pi")
    pi = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu = _initial_mean_field(model, pi, cfg)
    q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
    rec.log_policy(0, pi)
    for k in range(1, cfg.iterations + 1):
        pi = softmax_policy(q, cfg.temperature)
        mu, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
        q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
        rec.log_policy_at(k, pi, mu)
    return rec.finish(pi, mu)


def solve_omd(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Mirror descent: play the softmax of accumulated Q-values.

    The running sum starts from the initial policy's own Q-function and adds
    learning_rate times each subsequent evaluation.
    """
    rec = _Recorder(model, cfg, "omd")
    pi = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu = _initial_mean_field(model, pi, cfg)
    q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
    q_acc = np.array(q.values)
    rec.log_policy(0, pi)
    for k in range(1, cfg.iterations + 1):
        pi = softmax_policy(q_acc, cfg.temperature)
        mu, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
        q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
        q_acc = q_acc + cfg.learning_rate * q.values
        rec.log_policy_at(k, pi, mu)
    return rec.finish(pi, mu)


def pso_move(
    theta: np.ndarray,
    velocity: np.ndarray,
    personal_best: np.ndarray,
    global_best: np.ndarray,
    inertia: float,
    cognitive: float,
    social: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """One particle's velocity and position update.

    The random coefficients are full elementwise matrices, drawn fresh from
    the given generator (two draws per call, in this order).
    """
    r1 = rng.random(theta.shape)
    r2 = rng.random(theta.shape)
    new_velocity = (
        inertia * velocity
        + cognitive * r1 * (personal_best - theta)
        + social * r2 * (global_best - theta)
    )
    return theta + new_velocity, new_velocity


def solve_mf_pso(model: MFGModel, cfg: SolverConfig) -> SolverTrace:
    """Particle swarm over policy logits, minimizing exploitability directly.

    Particles hold logit matrices; fitness is the exploitability of the
    softmax policy at the configured temperature. Personal-best fitness is
    cached rather than re-evaluated. The trace logs the global best, which is
    non-increasing by construction.
    """
    rec = _Recorder(model, cfg, "mf_pso")
    rng = _rng(cfg.init_seed)
    shape = (model.n_states, model.n_actions)
    n = cfg.particles

    def fitness(theta: np.ndarray) -> tuple[float, Distribution]:
        pi = softmax_policy(theta, cfg.temperature)
        value, mu_pi = exploitability(model, pi, cfg.mf_cfg, cfg.br_cfg)
        return value, mu_pi

    positions = rng.standard_normal((n, *shape))
    velocities = np.zeros_like(positions)
    best_pos = positions.copy()
    best_fit = np.empty(n)
    best_mu = [None] * n
    for i in range(n):
        best_fit[i], best_mu[i] = fitness(positions[i])
    g = int(np.argmin(best_fit))
    global_pos, global_fit, global_mu = best_pos[g].copy(), float(best_fit[g]), best_mu[g]

    if rec.wants(0):
        rec.record(0, global_fit, global_mu.probs, softmax_policy(global_pos, cfg.temperature).action_probs)

    for k in range(1, cfg.iterations + 1):
        for i in range(n):
            positions[i], velocities[i] = pso_move(
                positions[i], velocities[i], best_pos[i], global_pos,
                cfg.inertia, cfg.cognitive, cfg.social, rng,
            )
            value, mu_i = fitness(positions[i])
            if value < best_fit[i]:
                best_fit[i] = value
                best_pos[i] = positions[i].copy()
                best_mu[i] = mu_i
            if value < global_fit:
                global_fit = value
                global_pos = positions[i].copy()
                global_mu = mu_i
        if rec.wants(k):
            rec.record(k, global_fit, global_mu.probs, softmax_policy(global_pos, cfg.temperature).action_probs)

    final_pi = softmax_policy(global_pos, cfg.temperature)
    return rec.finish(final_pi, global_mu)


ALGORITHMS = {
    "fictitious_play": solve_fictitious_play,
    "damped_fp": solve_damped_fp,
    "pure_fp": solve_pure_fp,
    "policy_iteration": solve_policy_iteration,
    "smooth_pi": solve_smooth_pi,
    "boltzmann_pi": solve_boltzmann_pi,
    "omd": solve_omd,
    "mf_pso": solve_mf_pso,
}


def list_algorithms() -> list[str]:
    return sorted(ALGORITHMS)


def run_solver(model: MFGModel, algorithm_id: str, cfg: SolverConfig) -> SolverTrace:
    """Dispatch to a solver by id; identical inputs give identical traces."""
    if algorithm_id not in ALGORITHMS:
        raise UnknownAlgorithm(
            f"unknown algorithm {algorithm_id!r}; known: {', '.join(list_algorithms())}"
        )
    return ALGORITHMS[algorithm_id](model, cfg)
