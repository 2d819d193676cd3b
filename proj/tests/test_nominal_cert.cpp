#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "calf/certificates/certificates.hpp"
#include "calf/env/environments.hpp"
#include "calf/error.hpp"
#include "calf/nominal/policies.hpp"

using namespace calf;
using namespace calf::env;

TEST_SUITE("nominal") {
  TEST_CASE("nominal_action examples") {
    CHECK(nominal::nominal_action(make_env("omnibot"), {-10.0, -10.0}) == ActionVec{5.0, 5.0});
    CHECK(nominal::nominal_action(make_env("3wrobot_kin"), {0.0, 0.0, 0.0}) == ActionVec{0.0, 0.0});
    CHECK(nominal::nominal_action(make_env("lunar_lander"), {0, 4, 0, 0, -2, 0}) ==
          ActionVec{0.0, 0.0});
    CHECK(nominal::nominal_action(make_env("inverted_pendulum"), {0, 1.5, 0, -3}) ==
          ActionVec{0.0});
    CHECK_THROWS_AS(nominal::raw_action("cartpole", {0.0}), ConfigError);
  }

  TEST_CASE("pendulum swing branch emits exactly 0.03 in magnitude") {
    const auto e = make_env("pendulum");
    CounterRng rng(3);
    int swing = 0;
    for (int k = 0; k < 20000; ++k) {
      const StateVec s{rng.uniform(-7.0, 7.0), rng.uniform(-3.0, 3.0)};
      if (std::cos(s[0]) <= std::cos(std::numbers::pi / 10.0) || std::fabs(s[1]) > 0.2) {
        ++swing;
        CHECK(std::fabs(nominal::nominal_action(e, s)[0]) == 0.03);
      }
    }
    CHECK(swing > 10000);
  }

  TEST_CASE("outputs respect the action box") {
    CounterRng rng(4);
    for (auto name : kEnvironmentNames) {
      const auto e = make_env(name);
      for (int k = 0; k < 2000; ++k) {
        StateVec s(e.state_dim);
        for (std::size_t i = 0; i < e.state_dim; ++i) s[i] = rng.uniform(-50.0, 50.0);
        const ActionVec a = nominal::nominal_action(e, s);
        for (std::size_t i = 0; i < e.action_dim; ++i) {
          CHECK(a[i] >= e.action_bounds[i].lo);
          CHECK(a[i] <= e.action_bounds[i].hi);
        }
      }
    }
  }

  TEST_CASE("three-wheel robot parking law wraps the heading error") {
    // theta = 2pi/3 at (5,5): wrapped error 2pi/3 - pi/4 = 5pi/12, turn first.
    const ActionVec a = nominal::raw_action("3wrobot_kin", {5.0, 5.0, 2.0 * std::numbers::pi / 3.0});
    CHECK(a[0] == 0.0);
    CHECK(a[1] == doctest::Approx(-3.0 * std::sqrt(5.0 * std::numbers::pi / 12.0)));
    // Aligned with the ray: back up.
    const ActionVec b = nominal::raw_action("3wrobot_kin", {3.0, 4.0, std::atan2(4.0, 3.0)});
    CHECK(b[0] == doctest::Approx(-3.0 * std::sqrt(5.0)));
    CHECK(b[1] == 0.0);
  }

  TEST_CASE("pi_0 reaches the goal box from s_0") {
    for (auto name : kEnvironmentNames) {
      CAPTURE(name);
      const auto e = make_env(name);
      const auto log = run_episode(e, nominal::make_nominal_agent(e), 0);
      const long hit = log.first_goal_step(e);
      MESSAGE(name << ": first goal step " << hit);
      // The printed lander law never commands vertical thrust; it falls through
      // the 0.1-high goal band in a few steps while still rotating.
      if (name == "lunar_lander") CHECK(hit == -1);
      else CHECK(hit >= 0);
    }
  }
}

namespace {

// (c; q)_inf by Euler's series sum_n (-1)^n q^{n(n-1)/2} c^n / (q; q)_n.
double euler_series(double c, double q) {
  long double sum = 0.0L, qq = 1.0L, term_q = 1.0L, cn = 1.0L;
  for (int n = 0; n < 200; ++n) {
    if (n > 0) qq *= 1.0L - std::pow(static_cast<long double>(q), n);
    const long double t = (n % 2 ? -1.0L : 1.0L) * term_q * cn / qq;
    sum += t;
    term_q *= std::pow(static_cast<long double>(q), n);
    cn *= c;
    if (std::fabs(t) < 1e-30L && n > 5) break;
  }
  return static_cast<double>(sum);
}

// (q; q)_inf by the pentagonal number theorem.
double pentagonal(double q) {
  long double sum = 1.0L;
  for (int k = 1; k < 100; ++k) {
    const long double sgn = k % 2 ? -1.0L : 1.0L;
    sum += sgn * (std::pow(static_cast<long double>(q), k * (3 * k - 1) / 2) +
                  std::pow(static_cast<long double>(q), k * (3 * k + 1) / 2));
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_SUITE("certificates") {
  TEST_CASE("update_budget examples") {
    CHECK(cert::update_budget(10.0, 1.0) == 9.0);
    CHECK(cert::update_budget(0.5, 1.0) == 0.0);
    CHECK(cert::update_budget(0.25, 0.25) == 0.0);
    CHECK_THROWS_AS(cert::update_budget(1.0, 0.0), ContractViolation);
  }

  TEST_CASE("hoeffding_lower_bound against a long-double evaluation") {
    const long double oracle = 0.9L - std::sqrt(std::log(20.0L) / 400.0L);
    const double got = cert::hoeffding_lower_bound({200, 180, 0.05});
    CHECK(std::fabs(got - static_cast<double>(oracle)) <= 1e-12);
    CHECK(got == doctest::Approx(0.8135).epsilon(1e-4));
    CHECK(cert::hoeffding_lower_bound({50, 0, 0.05}) == 0.0);
    CHECK(cert::hoeffding_lower_bound({50, 37, 1.0}) == 37.0 / 50.0);
    CounterRng rng(8);
    for (int k = 0; k < 500; ++k) {
      const long n = 1 + static_cast<long>(rng.uniform() * 300);
      const long r = static_cast<long>(rng.uniform() * (n + 1));
      const double d = 0.001 + 0.998 * rng.uniform();
      const double b = cert::hoeffding_lower_bound({n, std::min(r, n), d});
      CHECK(b <= static_cast<double>(std::min(r, n)) / n);
      const long double ref = std::max(
          0.0L, static_cast<long double>(std::min(r, n)) / n -
                    std::sqrt(std::log(1.0L / d) / (2.0L * n)));
      CHECK(std::fabs(b - static_cast<double>(ref)) <= 1e-12);
    }
  }

  TEST_CASE("q_pochhammer exact edges and independent series") {
    for (double q : {0.0, 0.3, 0.9}) CHECK(cert::q_pochhammer(0.0, q) == 1.0);
    for (double c : {0.0, 0.25, 0.99}) CHECK(cert::q_pochhammer(c, 0.0) == 1.0 - c);
    const double v = cert::q_pochhammer(0.5, 0.5);
    CHECK(std::fabs(v - pentagonal(0.5)) < 1e-14);
    CHECK(v == doctest::Approx(0.2888).epsilon(1e-3));
    for (double c : {0.1, 0.5, 0.9})
      for (double q : {0.1, 0.5, 0.8}) CHECK(std::fabs(cert::q_pochhammer(c, q) - euler_series(c, q)) < 1e-13);
  }

  TEST_CASE("q_pochhammer is non-increasing in c and q") {
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 19; ++j) {
        const double a = i / 20.0, b = j / 20.0, b2 = (j + 1) / 20.0;
        CHECK(cert::q_pochhammer(b2, a) <= cert::q_pochhammer(b, a));
        CHECK(cert::q_pochhammer(a, b2) <= cert::q_pochhammer(a, b));
      }
  }

  TEST_CASE("reaching_probability_bound examples") {
    CHECK(cert::reaching_probability_bound(0.0, 0.0, 5) == 1.0);
    CHECK(std::fabs(cert::reaching_probability_bound(0.1, 0.5, 3) - 0.9 * euler_series(0.125, 0.5)) <
          1e-14);
    CHECK(cert::reaching_probability_bound(0.0, 0.5, 0) == 0.0);
    double prev = 1.0;
    for (double k : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
      const double b = cert::reaching_probability_bound(0.0, k, 1);
      CHECK(b < prev);
      prev = b;
    }
    CHECK(prev < 1e-10);
  }

  TEST_CASE("fit_exp_envelope examples") {
    std::vector<double> d(200);
    for (std::size_t t = 0; t < d.size(); ++t) d[t] = std::exp(-static_cast<double>(t));
    const std::vector<std::vector<double>> exact{d};
    const auto e = cert::fit_exp_envelope(exact);
    CHECK(e.lambda == 1.0);
    CHECK(e.C == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cert::envelope_covers(e, exact));

    // Long enough that e^{lambda t} exceeds the C cap at every grid lambda.
    const std::vector<std::vector<double>> flat{std::vector<double>(100000, 2.0)};
    const auto f = cert::fit_exp_envelope(flat);
    CHECK(f.lambda == 1e-4);
    CHECK(f.C >= 1.0);
    CHECK(cert::envelope_covers(f, flat));

    const std::vector<std::vector<double>> with_zero{d, {0.0, 1.0}};
    CHECK(cert::fit_exp_envelope(with_zero).skipped == 1);
  }

  TEST_CASE("envelope covers the seeded omnibot pi_0 trajectories") {
    const auto e = make_env("omnibot");
    std::vector<std::vector<double>> trajs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto spec = e;
      CounterRng rng(seed);
      spec.initial_state = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
      const auto log = run_episode(spec, nominal::make_nominal_agent(spec), seed);
      std::vector<double> d{goal_distance(spec, spec.initial_state)};
      for (const auto& r : log.steps) d.push_back(goal_distance(spec, r.state));
      trajs.push_back(d);
    }
    const auto env = cert::fit_exp_envelope(trajs);
    CHECK(cert::envelope_covers(env, trajs));
    CHECK(env.lambda > 0.0);
  }
}
