#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ftb/devgrad.hpp"
#include "ftb/divergence.hpp"
#include "ftb/error.hpp"
#include "ftb/gfn.hpp"
#include "ftb/hypergrid.hpp"
#include "ftb/loss.hpp"
#include "ftb/rng.hpp"

using namespace ftb;

namespace {

PolicyParams random_params(const HypergridEnv& env, BackwardMode mode,
                           std::uint64_t seed) {
  PolicyParams p = PolicyParams::uniform_init(env, mode);
  Rng rng = Rng::substream(seed, 99, 0);
  for (double& x : p.forward_logits) x = 4.0 * rng.next_double() - 2.0;
  for (double& x : p.backward_logits) x = 4.0 * rng.next_double() - 2.0;
  p.log_z = 2.0 * rng.next_double() - 1.0;
  return p;
}

Trajectory make_traj(std::vector<std::int64_t> states, std::vector<int> actions) {
  Trajectory t;
  t.states = std::move(states);
  t.actions = std::move(actions);
  return t;
}

double batch_objective(const PolicyParams& params, const HypergridEnv& env,
                       const DivergenceSpec& spec, Normalization norm,
                       const std::vector<Trajectory>& batch) {
  // Recomputed from scratch (including the batch normalizer) for FD checks.
  std::vector<double> deltas;
  for (const Trajectory& t : batch) deltas.push_back(trajectory_delta(params, env, t));
  double z = 0.0;
  if (norm == Normalization::devgrad) {
    std::vector<double> devs;
    for (const Trajectory& t : batch) {
      devs.push_back(forward_trajectory_logprob(params, env, t) -
                     std::log(reward(env, env.coords_of(t.states.back()))) -
                     backward_trajectory_logprob(params, env, t));
    }
    z = estimate_log_z(spec, devs);
    double acc = 0.0;
    for (double d : devs) acc += loss_eval(spec, d + z);
    return acc / static_cast<double>(devs.size());
  }
  double acc = 0.0;
  for (double d : deltas) acc += loss_eval(spec, d);
  return acc / static_cast<double>(deltas.size());
}

}  // namespace

TEST_CASE("uniform init makes every allowed action equally likely") {
  const HypergridEnv env(2, 2, 0.01);
  const PolicyParams p = PolicyParams::uniform_init(env, BackwardMode::uniform);
  CHECK(p.forward_logits.size() == 4 * 3);
  CHECK(p.log_z == 0.0);
  CHECK(p.backward_logits.empty());
  // Origin has 3 actions; (1,0) has 2; (1,1) only terminates.
  const Trajectory stop_now = make_traj({0}, {2});
  CHECK(forward_trajectory_logprob(p, env, stop_now) ==
        doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-14));
  const Trajectory corner = make_traj({0, 1, 3}, {0, 1, 2});
  CHECK(forward_trajectory_logprob(p, env, corner) ==
        doctest::Approx(std::log(1.0 / 3.0) + std::log(0.5) + 0.0).epsilon(1e-14));
  const PolicyParams learn = PolicyParams::uniform_init(env, BackwardMode::learnable);
  CHECK(learn.backward_logits.size() == 4 * 2);
}

TEST_CASE("backward logprob is uniform over parents, learnable zero-init matches") {
  const HypergridEnv env(2, 3, 0.01);
  const PolicyParams uni = PolicyParams::uniform_init(env, BackwardMode::uniform);
  const PolicyParams learn = PolicyParams::uniform_init(env, BackwardMode::learnable);
  // Path to (1,1): each backward step from (1,1) has 2 parents, from (1,0) one.
  const Trajectory diag = make_traj({0, 1, 4}, {0, 1, 2});
  CHECK(backward_trajectory_logprob(uni, env, diag) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-14));
  // Identical computation at zero logits, bitwise.
  CHECK(backward_trajectory_logprob(learn, env, diag) ==
        backward_trajectory_logprob(uni, env, diag));
  const Trajectory straight = make_traj({0, 1, 2}, {0, 0, 2});
  CHECK(backward_trajectory_logprob(uni, env, straight) == 0.0);
}

TEST_CASE("trajectory delta combines log_z, policies, and reward") {
  const HypergridEnv env(2, 2, 0.01);
  PolicyParams p = PolicyParams::uniform_init(env, BackwardMode::uniform);
  p.log_z = 0.7;
  const Trajectory stop_now = make_traj({0}, {2});
  const double expected =
      0.7 + std::log(1.0 / 3.0) - std::log(reward(env, env.coords_of(0))) - 0.0;
  CHECK(trajectory_delta(p, env, stop_now) == doctest::Approx(expected).epsilon(1e-13));
  const Trajectory diag = make_traj({0, 1, 3}, {0, 1, 2});
  const double expected_diag = 0.7 + forward_trajectory_logprob(p, env, diag) -
                               std::log(reward(env, env.coords_of(3))) - std::log(0.5);
  CHECK(trajectory_delta(p, env, diag) == doctest::Approx(expected_diag).epsilon(1e-13));
}

TEST_CASE("policy terminal distribution is exact for the uniform policy") {
  const HypergridEnv env(2, 2, 0.01);
  const PolicyParams p = PolicyParams::uniform_init(env, BackwardMode::uniform);
  const std::vector<double> terminal = policy_terminal_distribution(p, env);
  REQUIRE(terminal.size() == 4);
  CHECK(terminal[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));  // (0,0)
  CHECK(terminal[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));  // (1,0)
  CHECK(terminal[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));  // (0,1)
  CHECK(terminal[3] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));  // (1,1)
}

TEST_CASE("policy terminal distribution sums to one for random parameters") {
  for (int h : {2, 3, 5}) {
    const HypergridEnv env(2, h, 0.001);
    const PolicyParams p = random_params(env, BackwardMode::uniform, 7 + h);
    const std::vector<double> terminal = policy_terminal_distribution(p, env);
    double sum = 0.0;
    for (double x : terminal) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("terminal distribution matches enumerated trajectory mass") {
  const HypergridEnv env(2, 3, 0.001);
  const PolicyParams p = random_params(env, BackwardMode::uniform, 17);
  std::vector<double> mass(env.n_states(), 0.0);
  for (const Trajectory& t : enumerate_trajectories(env)) {
    mass[t.states.back()] += std::exp(forward_trajectory_logprob(p, env, t));
  }
  const std::vector<double> terminal = policy_terminal_distribution(p, env);
  for (std::int64_t s = 0; s < env.n_states(); ++s) {
    CHECK(terminal[s] == doctest::Approx(mass[s]).epsilon(1e-11));
  }
}

TEST_CASE("sampled trajectories are valid and reproducible") {
  const HypergridEnv env(2, 4, 0.001);
  const PolicyParams p = random_params(env, BackwardMode::uniform, 23);
  BehaviorPolicy behavior;
  for (int i = 0; i < 50; ++i) {
    Rng rng = Rng::substream(5, 1, static_cast<std::uint64_t>(i));
    const auto [traj, lp] = sample_trajectory(p, env, behavior, rng);
    CHECK_NOTHROW(validate_trajectory(env, traj));
    CHECK(lp <= 0.0);
    CHECK(lp == doctest::Approx(forward_trajectory_logprob(p, env, traj)).epsilon(1e-12));
    Rng rng2 = Rng::substream(5, 1, static_cast<std::uint64_t>(i));
    const auto [traj2, lp2] = sample_trajectory(p, env, behavior, rng2);
    CHECK(traj2.actions == traj.actions);
    CHECK(lp2 == lp);
  }
}

TEST_CASE("behavior variants coincide with on-policy at their neutral settings") {
  const HypergridEnv env(2, 4, 0.001);
  const PolicyParams p = random_params(env, BackwardMode::uniform, 29);
  BehaviorPolicy on;
  BehaviorPolicy eps0{BehaviorPolicy::Mode::eps_uniform, 0.0, 1.0};
  BehaviorPolicy temp1{BehaviorPolicy::Mode::tempered, 0.0, 1.0};
  for (int i = 0; i < 20; ++i) {
    Rng a = Rng::substream(6, 2, static_cast<std::uint64_t>(i));
    Rng b = Rng::substream(6, 2, static_cast<std::uint64_t>(i));
    Rng c = Rng::substream(6, 2, static_cast<std::uint64_t>(i));
    const auto [ta, la] = sample_trajectory(p, env, on, a);
    const auto [tb, lb] = sample_trajectory(p, env, eps0, b);
    const auto [tc, lc] = sample_trajectory(p, env, temp1, c);
    CHECK(ta.actions == tb.actions);
    CHECK(ta.actions == tc.actions);
    // eps = 0 leaves the probabilities bitwise untouched; T = 1 renormalizes
    // through a second softmax, so it only agrees to rounding.
    CHECK(la == lb);
    CHECK(la == doctest::Approx(lc).epsilon(1e-13));
  }
}

TEST_CASE("epsilon-uniform behavior reports its own mixed logprob") {
  const HypergridEnv env(2, 3, 0.001);
  const PolicyParams p = random_params(env, BackwardMode::uniform, 31);
  BehaviorPolicy behavior{BehaviorPolicy::Mode::eps_uniform, 0.5, 1.0};
  Rng rng = Rng::substream(8, 3, 0);
  const auto [traj, lp] = sample_trajectory(p, env, behavior, rng);
  // Recompute the mixture logprob along the drawn trajectory.
  double expect = 0.0;
  GridState s{std::vector<int>(2, 0), false};
  for (std::size_t i = 0; i < traj.actions.size(); ++i) {
    const std::vector<int> acts = allowed_actions(env, s);
    // Forward softmax over allowed actions at this state.
    double zmax = -1e300;
    for (int a : acts) zmax = std::max(zmax, p.forward_logits[traj.states[i] * 3 + a]);
    double denom = 0.0;
    for (int a : acts) denom += std::exp(p.forward_logits[traj.states[i] * 3 + a] - zmax);
    const double pi =
        std::exp(p.forward_logits[traj.states[i] * 3 + traj.actions[i]] - zmax) / denom;
    expect += std::log(0.5 * pi + 0.5 / static_cast<double>(acts.size()));
    s = step(env, s, traj.actions[i]);
  }
  CHECK(lp == doctest::Approx(expect).epsilon(1e-11));
}

TEST_CASE("analytic batch gradients match finite differences, learnable_z") {
  const HypergridEnv env(2, 3, 0.001);
  const std::vector<Trajectory> all = enumerate_trajectories(env);
  const std::vector<Trajectory> batch(all.begin(), all.begin() + 7);
  for (const DivergenceSpec spec : {DivergenceSpec::named(Divergence::reverse_kl),
                                    DivergenceSpec::named(Divergence::jsd),
                                    DivergenceSpec::alpha_family(1.2)}) {
    CAPTURE(divergence_name(spec));
    PolicyParams p = random_params(env, BackwardMode::learnable, 37);
    const BatchGradients g = compute_batch_gradients(p, env, spec,
                                                     Normalization::learnable_z, batch,
                                                     /*want_loss=*/true);
    // Wide enough that the 1e-11 quadrature noise in the JSD loss stays far
    // below the difference quotient.
    const double h = 1e-5;
    // log_z gradient.
    {
      PolicyParams up = p;
      PolicyParams down = p;
      up.log_z += h;
      down.log_z -= h;
      const double fd = (batch_objective(up, env, spec, Normalization::learnable_z, batch) -
                         batch_objective(down, env, spec, Normalization::learnable_z, batch)) /
                        (2 * h);
      CHECK(g.d_log_z == doctest::Approx(fd).epsilon(1e-5));
    }
    // A few forward-logit components, including masked ones.
    for (std::size_t k : {0ul, 4ul, 13ul, 20ul}) {
      PolicyParams up = p;
      PolicyParams down = p;
      up.forward_logits[k] += h;
      down.forward_logits[k] -= h;
      const double fd = (batch_objective(up, env, spec, Normalization::learnable_z, batch) -
                         batch_objective(down, env, spec, Normalization::learnable_z, batch)) /
                        (2 * h);
      CHECK(g.d_forward[k] == doctest::Approx(fd).epsilon(2e-5));
    }
    // Backward logits.
    for (std::size_t k : {1ul, 7ul, 12ul}) {
      PolicyParams up = p;
      PolicyParams down = p;
      up.backward_logits[k] += h;
      down.backward_logits[k] -= h;
      const double fd = (batch_objective(up, env, spec, Normalization::learnable_z, batch) -
                         batch_objective(down, env, spec, Normalization::learnable_z, batch)) /
                        (2 * h);
      CHECK(g.d_backward[k] == doctest::Approx(fd).epsilon(2e-5));
    }
  }
}

TEST_CASE("analytic batch gradients match finite differences, devgrad") {
  const HypergridEnv env(2, 3, 0.001);
  const std::vector<Trajectory> all = enumerate_trajectories(env);
  const std::vector<Trajectory> batch(all.begin() + 3, all.begin() + 11);
  const DivergenceSpec spec = DivergenceSpec::named(Divergence::hellinger);
  PolicyParams p = random_params(env, BackwardMode::uniform, 41);
  const BatchGradients g = compute_batch_gradients(p, env, spec, Normalization::devgrad,
                                                   batch, /*want_loss=*/true);
  CHECK(g.d_log_z == 0.0);  // the batch normalizer replaces the parameter
  const double h = 1e-6;
  for (std::size_t k : {2ul, 9ul, 16ul, 25ul}) {
    PolicyParams up = p;
    PolicyParams down = p;
    up.forward_logits[k] += h;
    down.forward_logits[k] -= h;
    // Envelope theorem: recomputing the inner minimizer leaves the same slope.
    const double fd = (batch_objective(up, env, spec, Normalization::devgrad, batch) -
                       batch_objective(down, env, spec, Normalization::devgrad, batch)) /
                      (2 * h);
    CHECK(g.d_forward[k] == doctest::Approx(fd).epsilon(2e-5));
  }
}

TEST_CASE("batch gradient rows sum to zero over actions") {
  // Each summand is w * (1[a] - softmax); summing over the action axis of any
  // state gives w * (1 - 1) = 0, so stored rows must too.
  const HypergridEnv env(2, 3, 0.001);
  const std::vector<Trajectory> all = enumerate_trajectories(env);
  const PolicyParams p = random_params(env, BackwardMode::uniform, 43);
  const BatchGradients g =
      compute_batch_gradients(p, env, DivergenceSpec::named(Divergence::forward_kl),
                              Normalization::learnable_z, all, /*want_loss=*/false);
  for (std::int64_t s = 0; s < env.n_states(); ++s) {
    double row = 0.0;
    for (int a = 0; a <= 2; ++a) row += g.d_forward[s * 3 + a];
    CHECK(std::fabs(row) <= 1e-12);
  }
}

TEST_CASE("devgrad log_z estimate is the batch normalizer, learnable_z reports the parameter") {
  const HypergridEnv env(2, 3, 0.001);
  const std::vector<Trajectory> all = enumerate_trajectories(env);
  PolicyParams p = random_params(env, BackwardMode::uniform, 47);
  const DivergenceSpec rkl = DivergenceSpec::named(Divergence::reverse_kl);
  const BatchGradients learn = compute_batch_gradients(p, env, rkl,
                                                       Normalization::learnable_z, all,
                                                       /*want_loss=*/true);
  CHECK(learn.log_z_estimate == p.log_z);
  const BatchGradients dev = compute_batch_gradients(p, env, rkl, Normalization::devgrad,
                                                     all, /*want_loss=*/true);
  std::vector<double> devs;
  for (const Trajectory& t : all) {
    devs.push_back(trajectory_delta(p, env, t) - p.log_z);
  }
  CHECK(dev.log_z_estimate == doctest::Approx(estimate_log_z(rkl, devs)).epsilon(1e-12));
}

TEST_CASE("adam training drives the uniform policy toward the target") {
  const HypergridEnv env(2, 4, 0.01);
  const std::vector<double> target = exact_target_distribution(env);
  PolicyParams p = PolicyParams::uniform_init(env, BackwardMode::uniform);
  AdamState adam = AdamState::init(p);
  const AdamParams adam_params;
  const DivergenceSpec rkl = DivergenceSpec::named(Divergence::reverse_kl);
  BehaviorPolicy behavior{BehaviorPolicy::Mode::eps_uniform, 0.3, 1.0};

  const double l1_before =
      distribution_l1(policy_terminal_distribution(p, env), target);
  std::vector<Trajectory> batch(32);
  double final_loss = 0.0;
  for (int step = 1; step <= 300; ++step) {
    for (int i = 0; i < 32; ++i) {
      Rng rng = Rng::substream(1234, static_cast<std::uint64_t>(step),
                               static_cast<std::uint64_t>(i));
      batch[i] = sample_trajectory(p, env, behavior, rng).first;
    }
    const StepStats stats = train_step(p, adam, env, rkl, Normalization::learnable_z,
                                       adam_params, batch, /*want_loss=*/true);
    final_loss = stats.mean_loss;
  }
  const double l1_after = distribution_l1(policy_terminal_distribution(p, env), target);
  CHECK(l1_after < 0.25 * l1_before);
  CHECK(final_loss < 0.1);
  // log Z learned toward log sum R: 16 cells, sum = 12 * 0.01 + 4 * 2.51.
  double z = 0.0;
  for (std::int64_t s = 0; s < env.n_states(); ++s) z += reward(env, env.coords_of(s));
  CHECK(p.log_z == doctest::Approx(std::log(z)).epsilon(0.2));
}

TEST_CASE("devgrad training never touches log_z") {
  const HypergridEnv env(2, 3, 0.01);
  PolicyParams p = PolicyParams::uniform_init(env, BackwardMode::uniform);
  p.log_z = -3.25;
  AdamState adam = AdamState::init(p);
  const AdamParams adam_params;
  BehaviorPolicy behavior;
  std::vector<Trajectory> batch(16);
  for (int step = 1; step <= 30; ++step) {
    for (int i = 0; i < 16; ++i) {
      Rng rng = Rng::substream(77, static_cast<std::uint64_t>(step),
                               static_cast<std::uint64_t>(i));
      batch[i] = sample_trajectory(p, env, behavior, rng).first;
    }
    train_step(p, adam, env, DivergenceSpec::named(Divergence::forward_kl),
               Normalization::devgrad, adam_params, batch, /*want_loss=*/false);
  }
  CHECK(p.log_z == -3.25);
}

TEST_CASE("distribution distances have their textbook values") {
  const std::vector<double> p = {1.0, 0.0};
  const std::vector<double> q = {0.0, 1.0};
  CHECK(distribution_l1(p, q) == 2.0);
  CHECK(distribution_jsd(p, q) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(distribution_l1(p, p) == 0.0);
  CHECK(distribution_jsd(q, q) == doctest::Approx(0.0).epsilon(1e-14));
  const std::vector<double> r = {0.5, 0.5};
  CHECK(distribution_l1(p, r) == 1.0);
  CHECK_THROWS_AS(distribution_l1(p, std::vector<double>{1.0}), domain_error);
}

TEST_CASE("forward gradient match holds at random parameters") {
  for (int h : {2, 3}) {
    const HypergridEnv env(2, h, 0.001);
    for (const DivergenceSpec spec : {DivergenceSpec::named(Divergence::reverse_kl),
                                      DivergenceSpec::named(Divergence::jsd),
                                      DivergenceSpec::named(Divergence::tv),
                                      DivergenceSpec::alpha_family(0.75)}) {
      CAPTURE(h);
      CAPTURE(divergence_name(spec));
      const PolicyParams p = random_params(env, BackwardMode::uniform, 53 + h);
      CHECK(forward_gradient_match_error(p, env, spec) <= 1e-8);
    }
  }
}

TEST_CASE("backward gradient match holds at random parameters") {
  const HypergridEnv env(2, 3, 0.001);
  for (const DivergenceSpec spec : {DivergenceSpec::named(Divergence::reverse_kl),
                                    DivergenceSpec::named(Divergence::hellinger),
                                    DivergenceSpec::named(Divergence::jsd)}) {
    CAPTURE(divergence_name(spec));
    const PolicyParams p = random_params(env, BackwardMode::learnable, 59);
    CHECK(backward_gradient_match_error(p, env, spec) <= 1e-6);
  }
}

TEST_CASE("variance comparison is deterministic and finite") {
  const HypergridEnv env(2, 3, 0.01);
  const PolicyParams p = random_params(env, BackwardMode::uniform, 61);
  const DivergenceSpec rkl = DivergenceSpec::named(Divergence::reverse_kl);
  const VarianceComparison a = gradient_variance_comparison(p, env, rkl, 500, 99);
  const VarianceComparison b = gradient_variance_comparison(p, env, rkl, 500, 99);
  CHECK(a.var_weighted == b.var_weighted);
  CHECK(a.var_score == b.var_score);
  CHECK(std::isfinite(a.var_weighted));
  CHECK(std::isfinite(a.var_score));
  CHECK(a.var_weighted >= 0.0);
  CHECK(a.var_score >= 0.0);
}
