import numpy as np
import pytest

from mfgbench.core import Distribution, GameClass, MFGModel
from mfgbench.dynamics import BRConfig, MeanFieldConfig, backward_induction_br, policy_evaluation, softmax_policy, stationary_mean_field
from mfgbench.envs import make_beach_bar, make_coordination, make_move_forward, make_rps
from mfgbench.solvers import (
    ALGORITHMS,
    SolverConfig,
    UnknownAlgorithm,
    init_policy,
    pso_move,
    run_solver,
    solve_boltzmann_pi,
    solve_damped_fp,
    solve_fictitious_play,
    solve_mf_pso,
    solve_omd,
    solve_policy_iteration,
    solve_pure_fp,
    solve_smooth_pi,
)

TIGHT = dict(br_cfg=BRConfig(horizon=5000, tol=1e-12), mf_cfg=MeanFieldConfig(max_steps=2000, tol=1e-12))


def zero_reward_model():
    tensor = np.full((3, 2, 3), 1.0 / 3)
    return MFGModel(
        n_states=3,
        n_actions=2,
        transition_fn=lambda mu: tensor,
        reward_fn=lambda mu: np.zeros((3, 2)),
        discount=0.9,
        class_tag=GameClass.NO_INTERACTION,
        name="zero",
        mu_dependent_dynamics=False,
        mu_dependent_reward=False,
    )


# -------------------------------------------------------------------- init


def test_init_policy_high_temperature_is_near_uniform():
    model = make_beach_bar()
    pi = init_policy(model, seed=0, tau0=1e6)
    assert np.abs(pi.action_probs - 1 / 3).max() < 1e-5


def test_init_policy_is_seeded():
    model = make_beach_bar()
    a = init_policy(model, seed=3, tau0=1.0)
    b = init_policy(model, seed=3, tau0=1.0)
    c = init_policy(model, seed=4, tau0=1.0)
    assert a.action_probs.tobytes() == b.action_probs.tobytes()
    assert a.action_probs.tobytes() != c.action_probs.tobytes()


# ----------------------------------------------------------- fixed points


def test_pure_fp_solves_no_interaction_game_at_iteration_one():
    model = make_move_forward(c=0.1, gamma=0.99)
    tr = solve_pure_fp(model, SolverConfig(iterations=2, **TIGHT))
    by_iter = {p.iteration: p.exploitability for p in tr.points}
    assert by_iter[1] < 1e-8


def test_pure_fp_coordination_converges_and_freezes():
    model, cert = make_coordination()
    assert cert.holds
    tr = solve_pure_fp(model, SolverConfig(iterations=5, **TIGHT))
    by_iter = {p.iteration: p.exploitability for p in tr.points}
    assert by_iter[1] < 1e-8
    mus = [p.mean_field for p in tr.points if p.iteration >= 1]
    for mu in mus[1:]:
        assert np.array_equal(mu, mus[0])


def test_pure_fp_oscillates_on_cyclic_game():
    model = make_rps()
    cfg = SolverConfig(iterations=200, eval_stride=10)
    tr = solve_pure_fp(model, cfg)
    assert tr.exploitabilities[1:].min() > 0.1


def test_damped_fp_full_damping_matches_pure_fp_bytes():
    model = make_beach_bar()
    pure = solve_pure_fp(model, SolverConfig(iterations=4, **TIGHT))
    damped = solve_damped_fp(model, SolverConfig(iterations=4, damping=1.0, **TIGHT))
    assert pure.canonical_bytes() == damped.canonical_bytes()


def test_damped_fp_averaging_fixed_point():
    # When the incoming stationary law equals the current mean field, the
    # damped update leaves it unchanged.
    model, _ = make_coordination()
    cfg = SolverConfig(iterations=3, damping=0.5, mu0=Distribution([0.5, 0.5]), **TIGHT)
    tr = solve_damped_fp(model, cfg)
    assert np.array_equal(tr.final_mean_field.probs, [0.5, 0.5])


def test_damped_fp_coordination_fast():
    model, _ = make_coordination()
    tr = solve_damped_fp(model, SolverConfig(iterations=2, damping=0.5, **TIGHT))
    assert tr.points[-1].exploitability < 1e-8


# ------------------------------------------------------------ fictitious play


def test_fictitious_play_mean_field_is_running_average():
    # Replay the loop with an explicit sum as the oracle.
    model = make_beach_bar()
    cfg = SolverConfig(iterations=5, **TIGHT)
    tr = solve_fictitious_play(model, cfg)

    pi0 = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu_bar, _, _ = stationary_mean_field(model, pi0, cfg.mf_cfg)
    terms = [mu_bar.probs]
    mu_iter = mu_bar
    for _ in range(5):
        _, pi_star = backward_induction_br(model, mu_iter, cfg.br_cfg)
        mu_star, _, _ = stationary_mean_field(model, pi_star, cfg.mf_cfg)
        terms.append(mu_star.probs)
        k = len(terms) - 1
        w = 1.0 / (k + 1.0)
        mu_iter = Distribution((1 - w) * mu_iter.probs + w * mu_star.probs)
    direct = np.mean(terms, axis=0)
    assert np.abs(tr.final_mean_field.probs - direct).max() < 1e-12


def test_fictitious_play_first_iteration_with_matching_init():
    # mu_bar_0 = mu^{pi*_1} makes the first average a no-op.
    model, _ = make_coordination()
    cfg = SolverConfig(iterations=1, mu0=Distribution([0.5, 0.5]), **TIGHT)
    tr = solve_fictitious_play(model, cfg)
    assert np.array_equal(tr.final_mean_field.probs, [0.5, 0.5])


def test_fictitious_play_converges_on_beach_bar():
    model = make_beach_bar(c1=2.0, c2=5.0, alpha=5.0)
    cfg = SolverConfig(iterations=200, eval_stride=10, br_cfg=BRConfig(horizon=3000, tol=1e-12))
    tr = solve_fictitious_play(model, cfg)
    by_iter = {p.iteration: p.exploitability for p in tr.points}
    assert by_iter[200] < 0.1 * by_iter[10]
    assert tr.exploitabilities.min() >= -1e-9


# ------------------------------------------------------------ policy iteration


def test_policy_iteration_no_interaction():
    model = make_move_forward(c=0.1, gamma=0.99)
    tr = solve_policy_iteration(model, SolverConfig(iterations=5, **TIGHT))
    assert any(p.exploitability < 1e-8 for p in tr.points if p.iteration <= 5)


def test_policy_iteration_policies_are_deterministic():
    model = make_beach_bar()
    tr = solve_policy_iteration(model, SolverConfig(iterations=4, **TIGHT))
    for p in tr.points[1:]:
        assert np.array_equal(np.sort(p.policy, axis=1)[:, -1], np.ones(model.n_states))


def test_policy_iteration_coordination_stays():
    model, _ = make_coordination()
    tr = solve_policy_iteration(model, SolverConfig(iterations=3, **TIGHT))
    for p in tr.points[1:]:
        assert np.array_equal(p.policy[:, 0], np.ones(2))


def test_smooth_pi_constant_one_matches_pi_bytes():
    model = make_beach_bar()
    pi_tr = solve_policy_iteration(model, SolverConfig(iterations=4, **TIGHT))
    spi_tr = solve_smooth_pi(
        model, SolverConfig(iterations=4, spi_mode="constant", spi_damping=1.0, **TIGHT)
    )
    assert pi_tr.canonical_bytes() == spi_tr.canonical_bytes()


def test_smooth_pi_decreasing_first_update_replaces_history():
    model, _ = make_coordination()
    cfg = SolverConfig(
        iterations=1, spi_mode="decreasing", mu0=Distribution([0.9, 0.1]), **TIGHT
    )
    tr = solve_smooth_pi(model, cfg)
    # lambda_1 = 1: the damped mean field equals the fresh stationary law
    assert np.array_equal(tr.final_mean_field.probs, [0.5, 0.5])


def test_smooth_pi_coordination_both_modes():
    model, _ = make_coordination()
    for mode in ("constant", "decreasing"):
        tr = solve_smooth_pi(model, SolverConfig(iterations=2, spi_mode=mode, **TIGHT))
        assert tr.points[-1].exploitability < 1e-8


# ------------------------------------------------------------- boltzmann + omd


def test_boltzmann_pi_low_temperature_tracks_pi():
    model = make_move_forward(c=0.1, gamma=0.99)
    pi_tr = solve_policy_iteration(model, SolverConfig(iterations=5, **TIGHT))
    bpi_tr = solve_boltzmann_pi(model, SolverConfig(iterations=5, temperature=1e-6, **TIGHT))
    assert np.abs(pi_tr.exploitabilities - bpi_tr.exploitabilities).max() < 1e-6


def test_boltzmann_pi_high_temperature_stays_uniform():
    model = make_beach_bar()
    tr = solve_boltzmann_pi(model, SolverConfig(iterations=3, temperature=1e6, init_temperature=1e6, **TIGHT))
    for p in tr.points:
        assert np.abs(p.policy - 1 / 3).max() < 1e-5


def test_boltzmann_pi_policies_strictly_positive():
    model = make_beach_bar()
    tr = solve_boltzmann_pi(model, SolverConfig(iterations=4, temperature=0.5, **TIGHT))
    for p in tr.points[1:]:
        assert p.policy.min() > 0.0


def test_omd_zero_reward_stays_uniform():
    model = zero_reward_model()
    tr = solve_omd(model, SolverConfig(iterations=4, temperature=0.3, init_temperature=1e9, **TIGHT))
    for p in tr.points[1:]:
        assert np.abs(p.policy - 0.5).max() < 1e-12


def test_omd_accumulates_q_values():
    # Unrolled oracle: the final policy is the softmax of Q0 + alpha*sum(Q_i).
    model = make_beach_bar()
    alpha, tau, K = 0.7, 0.4, 3
    cfg = SolverConfig(iterations=K, learning_rate=alpha, temperature=tau, **TIGHT)
    tr = solve_omd(model, cfg)

    pi = init_policy(model, cfg.init_seed, cfg.init_temperature)
    mu, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
    q0, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
    q_acc = np.array(q0.values)
    qs = []
    for _ in range(K):
        pi = softmax_policy(q_acc, tau)
        mu, _, _ = stationary_mean_field(model, pi, cfg.mf_cfg)
        q, _, _ = policy_evaluation(model, pi, mu, cfg.br_cfg)
        qs.append(q.values)
        q_acc = q_acc + alpha * q.values
    direct = q0.values + alpha * np.sum(qs, axis=0)
    assert np.abs(q_acc - direct).max() < 1e-9
    assert np.array_equal(tr.final_policy.action_probs, pi.action_probs)


# --------------------------------------------------------------------- pso


def test_pso_single_particle_never_moves():
    # personal best == global best == position makes the update a fixed point
    model, _ = make_coordination()
    cfg = SolverConfig(iterations=5, particles=1, **TIGHT)
    tr = solve_mf_pso(model, cfg)
    es = tr.exploitabilities
    assert np.all(es == es[0])


def test_pso_global_best_is_monotone():
    model = make_beach_bar()
    cfg = SolverConfig(iterations=8, particles=5, temperature=0.5, **TIGHT)
    tr = solve_mf_pso(model, cfg)
    es = tr.exploitabilities
    assert np.all(np.diff(es) <= 0)
    assert es.min() >= -1e-9


def test_pso_move_is_stationary_at_consensus():
    rng = np.random.Generator(np.random.Philox(0))
    theta = np.ones((2, 3))
    new_theta, new_v = pso_move(theta, np.zeros_like(theta), theta, theta, 0.9, 1.5, 1.5, rng)
    assert np.array_equal(new_theta, theta)
    assert np.array_equal(new_v, np.zeros_like(theta))


def test_pso_move_collapses_toward_global_best():
    # With no inertia and no cognitive pull, positions contract toward the
    # swarm optimum in expectation; check the mean spread over 4 seeds.
    global_best = np.zeros((2, 2))
    spreads = []
    for seed in range(4):
        rng = np.random.Generator(np.random.Philox(seed))
        theta = rng.standard_normal((2, 2)) * 5
        v = np.zeros_like(theta)
        spread = [float(np.abs(theta - global_best).sum())]
        for _ in range(30):
            theta, v = pso_move(theta, v, theta, global_best, 0.0, 0.0, 1.5, rng)
            spread.append(float(np.abs(theta - global_best).sum()))
        spreads.append(spread)
    mean_spread = np.mean(spreads, axis=0)
    assert mean_spread[-1] < 0.05 * mean_spread[0]


# ------------------------------------------------------------------ dispatch


def test_dispatch_matches_direct_call():
    model, _ = make_coordination()
    cfg = SolverConfig(iterations=2, **TIGHT)
    assert run_solver(model, "pure_fp", cfg).canonical_bytes() == solve_pure_fp(model, cfg).canonical_bytes()


def test_dispatch_unknown_algorithm():
    model, _ = make_coordination()
    with pytest.raises(UnknownAlgorithm):
        run_solver(model, "gradient_descent", SolverConfig())


@pytest.mark.parametrize("algo", sorted(ALGORITHMS))
def test_solvers_are_deterministic(algo):
    model = make_beach_bar()
    cfg = SolverConfig(iterations=3, particles=3, init_seed=7, **TIGHT)
    a = run_solver(model, algo, cfg)
    b = run_solver(model, algo, cfg)
    assert a.canonical_bytes() == b.canonical_bytes()
    assert len(a.points) <= cfg.iterations + 1


HYPERPARAM_SAMPLES = [
    ("pure_fp", {}),
    ("damped_fp", {"damping": 0.1}),
    ("damped_fp", {"damping": 1.0}),
    ("fictitious_play", {}),
    ("policy_iteration", {}),
    ("smooth_pi", {"spi_mode": "constant", "spi_damping": 0.3}),
    ("smooth_pi", {"spi_mode": "decreasing"}),
    ("boltzmann_pi", {"temperature": 0.05}),
    ("boltzmann_pi", {"temperature": 0.2}),
    ("omd", {"temperature": 0.1, "learning_rate": 0.3}),
    ("omd", {"temperature": 0.2, "learning_rate": 2.0}),
    ("mf_pso", {"temperature": 0.02, "particles": 25, "inertia": 0.4, "cognitive": 1.0, "social": 2.0}),
]


@pytest.mark.parametrize("algo,extra", HYPERPARAM_SAMPLES)
def test_contractive_game_converges_across_hyperparameters(algo, extra):
    # sampled form of the "any valid hyperparameters with tau <= 0.2" claim
    model, cert = make_coordination(C=80.0, alpha=1.0, gamma=0.9)
    assert cert.holds
    tr = run_solver(model, algo, SolverConfig(iterations=10, **TIGHT, **extra))
    assert any(p.exploitability < 1e-6 for p in tr.points)


def test_trace_exploitabilities_never_meaningfully_negative():
    model = make_beach_bar()
    for algo in sorted(ALGORITHMS):
        tr = run_solver(model, algo, SolverConfig(iterations=3, particles=3, **TIGHT))
        assert tr.exploitabilities.min() >= -1e-9
