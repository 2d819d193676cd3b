#include <doctest.h>

#include <cmath>
#include <vector>

#include "calf/agent/calf_agent.hpp"
#include "calf/env/environments.hpp"
#include "calf/nominal/policies.hpp"

using namespace calf;
using namespace calf::agent;
using env::AgentMode;
using env::make_env;

namespace {

CalfConfig fallback_config(std::string_view env_name) {
  CalfConfig c = calf_defaults(env_name);
  c.relax_factor = 0.0;
  c.relax_prob_min = c.relax_prob_max = 0.0;
  c.critic.nu_bar = 1e12;
  return c;
}

}  // namespace

TEST_SUITE("calf_agent") {
  TEST_CASE("relax probability decays geometrically") {
    CalfConfig c = calf_defaults("omnibot");
    c.resample_relax_prob = false;
    c.relax_prob_init = 0.5;
    c.relax_factor = 0.5;
    c.nominal_first = false;
    CalfAgent agent(make_env("omnibot"), c, 1);
    agent.begin_episode(0);
    env::StateVec s = agent.spec().initial_state;
    for (long t = 0; t < 3; ++t) {
      const auto out = agent.step(t, s);
      s = env::integrate_step(agent.spec(), s, out.action);
    }
    CHECK(agent.relax_prob() == 0.0625);
  }

  TEST_CASE("fixed relax range pins the initial p") {
    CalfConfig c = calf_defaults("pendulum");
    c.relax_prob_min = c.relax_prob_max = 0.3;
    CalfAgent agent(make_env("pendulum"), c, 4);
    for (long ep = 0; ep < 3; ++ep) {
      agent.begin_episode(ep);
      CHECK(agent.relax_prob() == 0.3);
    }
  }

  TEST_CASE("nominal_first makes episode 0 a pure pi_0 episode") {
    const auto e = make_env("2tank");
    CalfConfig c = calf_defaults("2tank");
    REQUIRE(c.nominal_first);
    CalfAgent agent(e, c, 3);
    const auto log = agent.run_episode(0);
    const auto ref = env::run_episode(e, nominal::make_nominal_agent(e), 3);
    CHECK(log.count_mode(AgentMode::nominal) == e.horizon_steps);
    CHECK(log.total_return() == ref.total_return());
    CHECK(agent.episode_stats().acceptances == 0);
  }

  TEST_CASE("fresh certified weights every episode without propagation") {
    const auto e = make_env("pendulum");
    CalfConfig c = calf_defaults("pendulum");
    REQUIRE_FALSE(c.propagate_certified_weights);
    CalfAgent agent(e, c, 2);
    agent.run_episode(0);
    agent.run_episode(1);
    agent.begin_episode(2);
    CHECK(agent.critic_state().certified == agent.initial_weights());
    const double lam = agent.critic_state().certified_lambda;
    const double r = e.goal_centered(e.initial_state).norm();
    CHECK(lam >= c.critic.bounds.low(r));
    CHECK(lam <= c.critic.bounds.up(r));
  }

  TEST_CASE("greedy_action examples") {
    const auto e = make_env("omnibot");
    // eps_reg = c and zero weights: V(s) = -c |s|^2 exactly.
    const critic::CriticModel m(critic::CriticKind::state_value, 2, 0, 4, 0.7);
    const critic::Weights w(m.num_weights(), 0.0);
    const env::StateVec s{1.0, 0.0};
    const auto cands = make_candidates(e, 64, CounterRng(11));
    CHECK(cands.size() == 1 + 4 + 64);
    const env::ActionVec a = greedy_action(e, m, w, s, cands);
    CHECK(a[0] < 0.0);
    // Brute-force oracle over the same candidate set.
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const double nx = 1.0 + 0.01 * cands[k][0], ny = 0.01 * cands[k][1];
      const double v = -0.7 * (nx * nx + ny * ny);
      if (v > best_v) best_v = v, best = k;
    }
    CHECK(a == cands[best]);

    const std::vector<env::ActionVec> single{{3.0, -4.0}};
    CHECK(greedy_action(e, m, w, s, single) == single[0]);
    // Both candidates map to the same next-state norm: the first wins.
    const std::vector<env::ActionVec> tie{{0.0, 2.0}, {0.0, -2.0}};
    CHECK(greedy_action(e, m, w, env::StateVec{0.0, 0.0}, tie) == tie[0]);
    const critic::CriticModel q(critic::CriticKind::state_action, 2, 2, 4, 0.7);
    const critic::Weights wq(q.num_weights(), 0.0);
    CHECK(greedy_action_q(e, q, wq, s, tie) == tie[0]);
  }

  TEST_CASE("fallback: no acceptance and no relaxation reproduces pi_0 bit for bit") {
    for (auto name : env::kEnvironmentNames) {
      CAPTURE(name);
      const auto e = make_env(name);
      for (Variant v : {Variant::state_critic, Variant::state_action_critic}) {
        CalfConfig c = fallback_config(name);
        c.variant = v;
        CalfAgent agent(e, c, 7);
        const auto log = agent.run_episode(1);
        const auto ref = env::run_episode(e, nominal::make_nominal_agent(e), 7, 1);
        REQUIRE(log.steps.size() == ref.steps.size());
        bool same = log.final_state == ref.final_state;
        for (std::size_t i = 0; i < log.steps.size(); ++i) {
          same = same && log.steps[i].state == ref.steps[i].state &&
                 log.steps[i].action == ref.steps[i].action &&
                 log.steps[i].mode == AgentMode::nominal;
        }
        CHECK(same);
      }
    }
  }

  TEST_CASE("acceptances certify the current state, respect ladder and budget") {
    const auto e = make_env("omnibot");
    CalfConfig c = calf_defaults("omnibot");
    c.critic.init_lambda_ratio = 5.0;
    CalfAgent agent(e, c, 5);
    long total = 0;
    for (long ep = 0; ep < 4; ++ep) {
      agent.begin_episode(ep);
      env::StateVec s = e.initial_state;
      for (long t = 0; t < e.horizon_steps; ++t) {
        const auto out = agent.step(t, s);
        if (out.mode == AgentMode::certified) {
          ++total;
          CHECK(agent.critic_state().anchor_state == s);
        }
        s = env::integrate_step(e, s, env::clip_action(e, out.action), t);
      }
      const auto& st = agent.critic_state();
      CHECK(static_cast<double>(st.acceptances) <= agent.episode_stats().budget);
      for (std::size_t k = 1; k < st.ladder.size(); ++k)
        CHECK(st.ladder[k] - st.ladder[k - 1] >= st.nu_bar);
    }
    MESSAGE("certified steps over 4 episodes: " << total);
    CHECK(total > 0);
  }

  TEST_CASE("logged p follows p0 kappa^t within 4 ulp") {
    const auto e = make_env("pendulum");
    CalfAgent agent(e, calf_defaults("pendulum"), 9);
    agent.run_episode(3);
    const auto& st = agent.episode_stats();
    const long double kappa = agent.config().relax_factor;
    for (std::size_t t = 0; t < st.relax_probs.size(); ++t) {
      const double ref = static_cast<double>(st.p0 * std::pow(kappa, static_cast<long double>(t)));
      const double ulp = std::nextafter(ref, 2.0) - ref;
      CHECK(std::fabs(st.relax_probs[t] - ref) <= 4.0 * ulp);
    }
  }

  TEST_CASE("calf_defaults rejects unknown environments and configs validate") {
    CHECK_THROWS_AS(calf_defaults("cartpole"), ConfigError);
    CalfConfig c;
    c.relax_factor = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = CalfConfig{};
    c.relax_prob_min = 0.6;
    c.relax_prob_max = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}
