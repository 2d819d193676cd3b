#include <doctest.h>

#include <cmath>
#include <numbers>

#include "calf/env/environments.hpp"
#include "calf/error.hpp"
#include "calf/nominal/policies.hpp"

using namespace calf;
using namespace calf::env;
using std::numbers::pi;

TEST_SUITE("env_core") {
  TEST_CASE("integrate_step examples") {
    const auto omni = make_env("omnibot");
    const StateVec s1 = integrate_step(omni, {0.0, 0.0}, {1.0, 0.0});
    CHECK(s1[0] == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(s1[1] == 0.0);
    CHECK(integrate_step(omni, {-10.0, -10.0}, {0.0, 0.0}) == StateVec{-10.0, -10.0});
    const auto pend = make_env("pendulum");
    CHECK(integrate_step(pend, {0.0, 0.0}, {0.0}) == StateVec{0.0, 0.0});
  }

  TEST_CASE("integrate_step is bit-deterministic") {
    for (auto name : kEnvironmentNames) {
      const auto e = make_env(name);
      const ActionVec a = nominal::nominal_action(e, e.initial_state);
      CHECK(integrate_step(e, e.initial_state, a) == integrate_step(e, e.initial_state, a));
    }
  }

  TEST_CASE("non-finite states raise integration-diverged naming env and step") {
    auto e = make_env("omnibot");
    e.dynamics = [](const StateVec&, const ActionVec&) { return StateVec{NAN, 0.0}; };
    try {
      integrate_step(e, {0.0, 0.0}, {0.0, 0.0}, 17);
      FAIL("expected IntegrationDiverged");
    } catch (const IntegrationDiverged& ex) {
      CHECK(ex.env() == "omnibot");
      CHECK(ex.step() == 17);
    }
  }

  TEST_CASE("omnibot is integrated exactly under constant action") {
    const auto e = make_env("omnibot");
    StateVec s{-10.0, 3.0};
    for (int k = 0; k < 100; ++k) s = integrate_step(e, s, {2.5, -1.5});
    CHECK(std::fabs(s[0] - (-10.0 + 2.5)) < 1e-12);
    CHECK(std::fabs(s[1] - (3.0 - 1.5)) < 1e-12);
  }

  TEST_CASE("RK4 error ratio on the pendulum is at least 12") {
    // 0.5 s with constant torque; reference at dt/100.
    auto e = make_env("pendulum");
    const StateVec s0{pi - 0.3, 0.5};
    const ActionVec a{0.05};
    auto run = [&](double dt) {
      auto spec = e;
      spec.dt = dt;
      StateVec s = s0;
      const long n = std::lround(0.5 / dt);
      for (long k = 0; k < n; ++k) s = integrate_step(spec, s, a);
      return s;
    };
    const double dt = 0.01;
    const StateVec ref = run(dt / 100.0);
    auto err = [&](const StateVec& s) {
      return std::max(std::fabs(s[0] - ref[0]), std::fabs(s[1] - ref[1]));
    };
    const double ratio = err(run(dt)) / err(run(dt / 2.0));
    MESSAGE("RK4 halving ratio = " << ratio);
    CHECK(ratio >= 12.0);
  }

  TEST_CASE("clip_action examples") {
    CHECK(clip_action(make_env("pendulum"), {0.5}) == ActionVec{0.1});
    CHECK(clip_action(make_env("omnibot"), {5.0, 5.0}) == ActionVec{5.0, 5.0});
    CHECK(clip_action(make_env("2tank"), {-0.2}) == ActionVec{0.0});
  }

  TEST_CASE("goal_distance examples") {
    const auto omni = make_env("omnibot");
    CHECK(goal_distance(omni, {0.0, 0.0}) == 0.0);
    CHECK(goal_distance(omni, {2.0, 0.0}) == doctest::Approx(1.5));
    CHECK(goal_distance(make_env("2tank"), {0.4, 0.4}) == 0.0);
  }

  TEST_CASE("goal_distance is zero exactly on the goal box and 1-Lipschitz") {
    CounterRng rng(9);
    for (auto name : kEnvironmentNames) {
      const auto e = make_env(name);
      for (int k = 0; k < 2000; ++k) {
        StateVec s(e.state_dim), t(e.state_dim);
        for (std::size_t i = 0; i < e.state_dim; ++i) {
          s[i] = rng.uniform(-4.0, 4.0);
          t[i] = s[i] + rng.uniform(-0.1, 0.1);
        }
        CHECK((goal_distance(e, s) == 0.0) == e.goal.contains(s));
        StateVec diff(e.state_dim);
        for (std::size_t i = 0; i < e.state_dim; ++i) diff[i] = s[i] - t[i];
        CHECK(std::fabs(goal_distance(e, s) - goal_distance(e, t)) <= diff.norm() + 1e-12);
      }
    }
  }

  TEST_CASE("run_episode: zero-action omnibot stays put") {
    const auto e = make_env("omnibot");
    const StepPolicy zero = [](long, const StateVec&, CounterRng&) {
      return StepOutput{ActionVec{0.0, 0.0}, AgentMode::nominal, 0.0, 0.0};
    };
    const auto log = run_episode(e, zero, 0);
    REQUIRE(log.steps.size() == 1000);
    CHECK(log.total_return() == -2'000'000.0);
    CHECK(log.final_state == StateVec{-10.0, -10.0});
  }

  TEST_CASE("run_episode clips, accumulates exactly and is deterministic") {
    const auto e = make_env("pendulum");
    const StepPolicy wild = [](long, const StateVec&, CounterRng& rng) {
      return StepOutput{ActionVec{rng.uniform(-1.0, 1.0)}, AgentMode::explore, 0.0, 0.0};
    };
    const auto a = run_episode(e, wild, 5);
    const auto b = run_episode(e, wild, 5);
    double cum = 0.0;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
      const auto& r = a.steps[i];
      CHECK(std::fabs(r.action[0]) <= 0.1);
      cum += r.reward;
      CHECK(r.cumulative_reward == cum);
      CHECK(r.state == b.steps[i].state);
      CHECK(r.action == b.steps[i].action);
    }
  }

  TEST_CASE("omnibot under the nominal policy ends within 0.5 of the goal") {
    const auto e = make_env("omnibot");
    const auto log = run_episode(e, nominal::make_nominal_agent(e), 0);
    CHECK(goal_distance(e, log.final_state) < 0.5);
    // Zero-order hold gives x_k = -10 (1 - 0.5 dt)^k exactly.
    CHECK(std::fabs(log.final_state[0] + 10.0 * std::pow(0.995, 1000)) < 1e-9);
  }

  TEST_CASE("GoalBox validation") {
    CHECK_THROWS_AS(GoalBox({{0, 0.0, 0.0, false}}, 2), ConfigError);
    CHECK_THROWS_AS(GoalBox({{3, 0.0, 1.0, false}}, 2), ConfigError);
  }
}

TEST_SUITE("environments") {
  TEST_CASE("literal parameter table") {
    struct Row {
      const char* name;
      std::size_t sdim, adim;
      std::vector<double> s0;
      std::vector<ActionBound> bounds;
      double dt;
      long horizon;
      std::vector<GoalConstraint> goal;
    };
    const std::vector<Row> table = {
        {"inverted_pendulum", 4, 1, {pi / 7, 2, 0, 0}, {{-50, 50}}, 0.01, 1500,
         {{0, 0.0, 0.1, true}}},
        {"pendulum", 2, 1, {pi, 1}, {{-0.1, 0.1}}, 0.01, 1000,
         {{0, pi, 0.25, true}, {1, 0.0, 0.25, false}}},
        {"3wrobot_kin", 3, 2, {5, 5, 2 * pi / 3}, {{-25, 25}, {-5, 5}}, 0.01, 500,
         {{0, 0.0, 1.0, false}, {1, 0.0, 1.0, false}, {2, 0.0, 0.7, true}}},
        {"2tank", 2, 1, {2, -2}, {{0, 1}}, 0.1, 800,
         {{0, 0.4, 0.05, false}, {1, 0.4, 0.05, false}}},
        {"omnibot", 2, 2, {-10, -10}, {{-10, 10}, {-10, 10}}, 0.01, 1000,
         {{0, 0.0, 0.5, false}, {1, 0.0, 0.5, false}}},
        {"lunar_lander", 6, 2, {3, 5, 2 * pi / 3, 0, 0, 0}, {{-100, 100}, {-50, 50}}, 0.01, 1000,
         {{1, 1.0, 0.05, false}, {2, 0.0, 0.05, true}}},
    };
    for (const Row& r : table) {
      CAPTURE(r.name);
      const auto e = make_env(r.name);
      CHECK(e.state_dim == r.sdim);
      CHECK(e.action_dim == r.adim);
      CHECK(e.initial_state == StateVec::from(r.s0));
      REQUIRE(e.action_bounds.size() == r.bounds.size());
      for (std::size_t i = 0; i < r.bounds.size(); ++i) {
        CHECK(e.action_bounds[i].lo == r.bounds[i].lo);
        CHECK(e.action_bounds[i].hi == r.bounds[i].hi);
      }
      CHECK(e.dt == r.dt);
      CHECK(e.horizon_steps == r.horizon);
      REQUIRE(e.goal.constraints().size() == r.goal.size());
      for (std::size_t i = 0; i < r.goal.size(); ++i) {
        CHECK(e.goal.constraints()[i].index == r.goal[i].index);
        CHECK(e.goal.constraints()[i].center == r.goal[i].center);
        CHECK(e.goal.constraints()[i].half_width == r.goal[i].half_width);
        CHECK(e.goal.constraints()[i].angle == r.goal[i].angle);
      }
    }
    CHECK_THROWS_AS(make_env("cartpole"), ConfigError);
  }

  TEST_CASE("reward examples") {
    CHECK(make_env("omnibot").reward({-10.0, -10.0}, {3.0, 1.0}) == -2000.0);
    CHECK(make_env("pendulum").reward({0.0, 0.0}, {0.0}) == 0.0);
    CHECK(make_env("lunar_lander").reward({0, 1, 0, 0, 0, 0}, {7.0, 3.0}) == 0.0);
    const double th = 2 * pi / 3;
    CHECK(make_env("3wrobot_kin").reward({5, 5, th}, {1, 1}) ==
          doctest::Approx(-25.0 - 250.0 - th * th));
    CHECK(make_env("pendulum").reward({pi, 0.0}, {0.1}) ==
          doctest::Approx(-pi * pi - 0.001 * 0.01));
  }

  TEST_CASE("rewards are non-positive on random samples") {
    CounterRng rng(77);
    for (auto name : kEnvironmentNames) {
      const auto e = make_env(name);
      for (int k = 0; k < 5000; ++k) {
        StateVec s(e.state_dim);
        for (std::size_t i = 0; i < e.state_dim; ++i) s[i] = rng.uniform(-20.0, 20.0);
        ActionVec a(e.action_dim);
        for (std::size_t i = 0; i < e.action_dim; ++i)
          a[i] = rng.uniform(e.action_bounds[i].lo, e.action_bounds[i].hi);
        CHECK(e.reward(s, a) <= 0.0);
      }
    }
  }

  TEST_CASE("reward peaks at the goal center except for the pendulum") {
    for (auto name : kEnvironmentNames) {
      CAPTURE(name);
      const bool peaks = reward_peaks_at_goal_center(make_env(name));
      // The pendulum reward is maximal at theta = 0 while its goal box sits at theta = pi.
      CHECK(peaks == (name != "pendulum"));
    }
  }

  TEST_CASE("two-tank inflow fixed point") {
    const auto e = make_env("2tank");
    const TwoTankParams p;
    for (double i : {0.0, 0.3, 0.8}) CHECK(e.dynamics({p.K1 * i, 0.2}, {i})[0] == 0.0);
  }

  TEST_CASE("printed robot dynamics flag swaps the right-hand side") {
    EnvOptions o;
    o.robot_printed_dynamics = true;
    const auto printed = make_env("3wrobot_kin", o);
    const auto unicycle = make_env("3wrobot_kin");
    const StateVec s{1.0, 2.0, 0.3};
    const ActionVec a{4.0, 1.0};
    CHECK(printed.dynamics(s, a)[0] == doctest::Approx(std::cos(0.3)));
    CHECK(unicycle.dynamics(s, a)[0] == doctest::Approx(4.0 * std::cos(0.3)));
  }

  TEST_CASE("goal_centered wraps angles and offsets centers") {
    const auto e = make_env("pendulum");
    const StateVec z = e.goal_centered({3.0 * pi, 0.5});
    CHECK(std::fabs(z[0]) < 1e-12);
    CHECK(z[1] == 0.5);
    const StateVec t = make_env("2tank").goal_centered({0.5, 0.3});
    CHECK(t[0] == doctest::Approx(0.1));
    CHECK(t[1] == doctest::Approx(-0.1));
  }
}
