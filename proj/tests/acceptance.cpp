// Acceptance suite: one PASS/FAIL line per headline criterion. Exit status is
// the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "calf/agent/calf_agent.hpp"
#include "calf/baselines/policy_gradient.hpp"
#include "calf/certificates/certificates.hpp"
#include "calf/critic/critic.hpp"
#include "calf/env/environments.hpp"
#include "calf/nominal/policies.hpp"
#include "calf/runner/config.hpp"
#include "calf/runner/experiment.hpp"

using namespace calf;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double ulps(double got, long double exact) {
  const double r = static_cast<double>(exact);
  const double ulp = std::nextafter(r, 2.0 * r + 1.0) - r;
  return static_cast<double>(std::fabs(static_cast<long double>(got) - exact)) / ulp;
}

template <class F>
double fd_rel_err(F&& f, const std::vector<double>& x, const std::vector<double>& g) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double d = (f(xp) - f(xm)) / (2.0 * h);
    num += (g[i] - d) * (g[i] - d);
    den += d * d;
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

struct EpisodeResult {
  bool reached = false;
  double ret = 0.0;
  long relaxed = 0;
  long acceptances = 0;
  double budget = 0.0;
  long ladder_bad = 0;
  double worst_ulp = 0.0;
  std::vector<double> distances;
};

std::vector<EpisodeResult> run_calf(const env::EnvironmentSpec& e, agent::CalfConfig c,
                                    std::uint64_t seed, long episodes) {
  agent::CalfAgent ag(e, std::move(c), seed);
  std::vector<EpisodeResult> out;
  for (long ep = 0; ep < episodes; ++ep) {
    const auto log = ag.run_episode(ep);
    const auto& st = ag.episode_stats();
    EpisodeResult r;
    r.reached = log.first_goal_step(e) >= 0;
    r.ret = log.total_return();
    r.relaxed = log.count_mode(env::AgentMode::relaxed);
    r.acceptances = st.acceptances;
    r.budget = st.budget;
    const double nu = ag.critic_state().nu_bar;
    const double sign = ag.config().variant == agent::Variant::state_critic ? 1.0 : -1.0;
    for (std::size_t k = 1; k < st.ladder.size(); ++k)
      if (!(sign * (st.ladder[k] - st.ladder[k - 1]) >= nu)) ++r.ladder_bad;
    const long double kappa = ag.config().relax_factor;
    for (std::size_t t = 0; t < st.relax_probs.size(); ++t) {
      const long double exact = st.p0 * std::pow(kappa, static_cast<long double>(t));
      if (exact > 0.0L) r.worst_ulp = std::max(r.worst_ulp, ulps(st.relax_probs[t], exact));
      else if (st.relax_probs[t] != 0.0) r.worst_ulp = 1e300;
    }
    r.distances.push_back(env::goal_distance(e, e.initial_state));
    for (const auto& rec : log.steps) r.distances.push_back(env::goal_distance(e, rec.state));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const long episodes = 20;

  // Nominal goal reaching.
  std::vector<bool> nominal_reaches;
  std::vector<double> nominal_return;
  {
    const auto t0 = Clock::now();
    std::string missed;
    for (auto name : env::kEnvironmentNames) {
      const auto e = env::make_env(name);
      const auto log = env::run_episode(e, nominal::make_nominal_agent(e), 0);
      nominal_reaches.push_back(log.first_goal_step(e) >= 0);
      nominal_return.push_back(log.total_return());
      if (!nominal_reaches.back()) missed += std::string(missed.empty() ? "" : ",") + std::string(name);
    }
    const double dt = seconds_since(t0);
    report(missed.empty() && dt < 5.0, "nominal_goal_reaching",
           fmt("%zu/6 environments reach the goal box (missed: %s), %.2f s",
               6 - std::count(nominal_reaches.begin(), nominal_reaches.end(), false),
               missed.empty() ? "none" : missed.c_str(), dt));
  }

  // Fallback oracle equivalence.
  {
    long identical = 0, total = 0;
    for (auto name : env::kEnvironmentNames) {
      const auto e = env::make_env(name);
      for (auto v : {agent::Variant::state_critic, agent::Variant::state_action_critic}) {
        agent::CalfConfig c = agent::calf_defaults(name);
        c.variant = v;
        c.relax_factor = 0.0;
        c.relax_prob_min = c.relax_prob_max = 0.0;
        c.critic.nu_bar = 1e12;  // beyond kappa_up of any reachable state
        agent::CalfAgent ag(e, c, 1);
        const auto log = ag.run_episode(1);
        const auto ref = env::run_episode(e, nominal::make_nominal_agent(e), 1, 1);
        bool same = log.final_state == ref.final_state && log.steps.size() == ref.steps.size();
        for (std::size_t i = 0; same && i < log.steps.size(); ++i)
          same = log.steps[i].state == ref.steps[i].state &&
                 log.steps[i].action == ref.steps[i].action &&
                 log.steps[i].mode == env::AgentMode::nominal;
        identical += same;
        ++total;
      }
    }
    report(identical == total, "fallback_equivalence",
           fmt("%ld/%ld (env, variant) trajectories bit-identical to pi_0", identical, total));
  }

  // Default-config CALF sweep shared by the preservation, ladder, relax and benefit checks.
  const auto sweep_t0 = Clock::now();
  std::vector<std::vector<std::vector<EpisodeResult>>> sweep;  // [env][seed][episode]
  double omnibot_seconds = 0.0;
  for (auto name : env::kEnvironmentNames) {
    const auto e = env::make_env(name);
    const auto t0 = Clock::now();
    std::vector<std::vector<EpisodeResult>> per_seed;
    for (auto s : seeds) per_seed.push_back(run_calf(e, agent::calf_defaults(name), s, episodes));
    if (name == "omnibot") omnibot_seconds = seconds_since(t0);
    sweep.push_back(std::move(per_seed));
  }
  const double sweep_seconds = seconds_since(sweep_t0);

  {
    long checked = 0, violations = 0, vacuous = 0;
    std::string where;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      for (const auto& eps : sweep[i])
        for (const auto& r : eps) {
          if (!nominal_reaches[i]) {
            ++vacuous;
            continue;
          }
          ++checked;
          if (!r.reached) {
            ++violations;
            where = std::string(env::kEnvironmentNames[i]);
          }
        }
    }
    report(violations == 0, "goal_reaching_preservation",
           fmt("%ld/%ld episodes reach the goal where pi_0 does (%ld episodes without a pi_0 "
               "reference)%s%s, sweep %.1f s",
               checked - violations, checked, vacuous, violations ? ", last miss in " : "",
               where.c_str(), sweep_seconds));
  }

  // Ladder and budget, including a state-action critic sweep.
  {
    long episodes_checked = 0, ladder_bad = 0, budget_bad = 0, accepted = 0;
    auto account = [&](const EpisodeResult& r) {
      ++episodes_checked;
      ladder_bad += r.ladder_bad;
      budget_bad += static_cast<double>(r.acceptances) > r.budget;
      accepted += r.acceptances;
    };
    for (const auto& env_runs : sweep)
      for (const auto& eps : env_runs)
        for (const auto& r : eps) account(r);
    for (auto name : env::kEnvironmentNames) {
      agent::CalfConfig c = agent::calf_defaults(name);
      c.variant = agent::Variant::state_action_critic;
      for (std::uint64_t s : {1, 2, 3})
        for (const auto& r : run_calf(env::make_env(name), c, s, 5)) account(r);
    }
    report(ladder_bad == 0 && budget_bad == 0, "certified_ladder_and_budget",
           fmt("%ld episodes, %ld acceptances, %ld ladder gaps below nu_bar, %ld epochs over "
               "budget",
               episodes_checked, accepted, ladder_bad, budget_bad));
  }

  // Relax schedule.
  {
    double worst = 0.0;
    bool mean_ok = true;
    std::string detail;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      const double kappa = agent::calf_defaults(env::kEnvironmentNames[i]).relax_factor;
      std::vector<double> counts;
      for (std::size_t s = 0; s < 5; ++s)
        for (const auto& r : sweep[i][s]) {
          worst = std::max(worst, r.worst_ulp);
          counts.push_back(static_cast<double>(r.relaxed));
        }
      for (std::size_t s = 5; s < sweep[i].size(); ++s)
        for (const auto& r : sweep[i][s]) worst = std::max(worst, r.worst_ulp);
      double mean = 0.0, var = 0.0;
      for (double x : counts) mean += x;
      mean /= static_cast<double>(counts.size());
      for (double x : counts) var += (x - mean) * (x - mean);
      var /= static_cast<double>(counts.size() - 1);
      const double bound = 1.0 / (1.0 - kappa) + 3.0 * std::sqrt(var / counts.size());
      mean_ok = mean_ok && mean <= bound;
      detail += fmt("%s%s %.2f<=%.2f", detail.empty() ? "" : ", ",
                    std::string(env::kEnvironmentNames[i]).c_str(), mean, bound);
    }
    report(worst <= 4.0 && mean_ok, "relax_schedule",
           fmt("max |p_t - p0 kappa^t| = %.2f ulp; mean relaxed steps over 100 episodes: %s",
               worst, detail.c_str()));
  }

  // Learning benefit on omnibot.
  {
    const std::size_t i = std::find(env::kEnvironmentNames.begin(), env::kEnvironmentNames.end(),
                                    "omnibot") - env::kEnvironmentNames.begin();
    std::vector<double> last;
    for (const auto& eps : sweep[i]) last.push_back(eps.back().ret);
    std::sort(last.begin(), last.end());
    const double median = 0.5 * (last[4] + last[5]);
    report(median >= nominal_return[i] && omnibot_seconds < 120.0, "omnibot_learning_benefit",
           fmt("median return at episode %ld over 10 seeds %.6g vs pi_0 %.6g (%.1f%% of the "
               "nominal cost), %.1f s",
               episodes, median, nominal_return[i], 100.0 * median / nominal_return[i],
               omnibot_seconds));
  }

  // Numerics.
  {
    CounterRng rng(2024);
    double worst_td = 0.0, worst_pg = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const auto kind = inst % 2 ? critic::CriticKind::state_action : critic::CriticKind::state_value;
      const critic::CriticModel m(kind, 2 + inst % 3, 1 + inst % 2, 3 + inst % 4, 1e-3);
      std::vector<double> w(m.num_weights());
      for (double& v : w) v = rng.uniform(-0.8, 0.8);
      critic::TdBatch b;
      const std::size_t n = 5 + inst % 3;
      for (std::size_t t = 0; t <= n; ++t) {
        critic::ModelInput x(m.input_dim());
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        b.inputs.push_back(x);
      }
      for (std::size_t t = 0; t < n; ++t) b.rewards.push_back(rng.uniform(-3.0, 0.0));
      const std::size_t n_td = 1 + inst % 3;
      std::vector<double> g;
      critic::td_loss_grad(m, w, b, 0.95, n_td, g);
      worst_td = std::max(worst_td, fd_rel_err([&](const std::vector<double>& q) {
        return critic::td_loss(m, q, b, 0.95, n_td);
      }, w, g));

      const auto e = env::make_env(inst % 2 ? "omnibot" : "lunar_lander");
      const baselines::TruncNormalPolicy pol(e, {5, 3}, 0.25);
      const auto theta = pol.net().init(rng.split(inst), 0.7);
      std::vector<baselines::Rollout> batch(2);
      for (auto& r : batch) {
        for (int t = 0; t <= 4; ++t) {
          env::StateVec s(e.state_dim);
          for (double& v : s) v = rng.uniform(-2.0, 2.0);
          r.states.push_back(s);
        }
        for (int t = 0; t < 4; ++t) {
          env::ActionVec a(e.action_dim);
          for (std::size_t k = 0; k < e.action_dim; ++k)
            a[k] = rng.uniform(e.action_bounds[k].lo, e.action_bounds[k].hi);
          r.actions.push_back(a);
          r.rewards.push_back(rng.uniform(-1.0, 0.0));
        }
      }
      std::vector<std::vector<double>> adv(2, std::vector<double>(4));
      for (auto& row : adv)
        for (double& v : row) v = rng.uniform(-1.0, 1.0);
      std::vector<double> gp;
      baselines::vpg_gradient(pol, theta, batch, adv, 0.97, gp);
      worst_pg = std::max(worst_pg, fd_rel_err([&](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
          double disc = 1.0;
          for (std::size_t t = 0; t < 4; ++t, disc *= 0.97)
            s += 0.5 * disc * adv[j][t] * pol.log_prob(q, batch[j].states[t], batch[j].actions[t]);
        }
        return s;
      }, theta, gp));
    }

    const auto pend = env::make_env("pendulum");
    auto run = [&](double dt) {
      auto spec = pend;
      spec.dt = dt;
      env::StateVec s{std::numbers::pi - 0.3, 0.5};
      for (long k = 0, n = std::lround(0.5 / dt); k < n; ++k) s = env::integrate_step(spec, s, {0.05});
      return s;
    };
    const auto ref = run(1e-4);
    auto err = [&](const env::StateVec& s) {
      return std::max(std::fabs(s[0] - ref[0]), std::fabs(s[1] - ref[1]));
    };
    const double ratio = err(run(0.01)) / err(run(0.005));
    report(worst_td <= 1e-5 && worst_pg <= 1e-5 && ratio >= 12.0, "numerics",
           fmt("td_loss gradient rel err %.2e, policy gradient rel err %.2e (20 instances each), "
               "RK4 halving ratio %.2f",
               worst_td, worst_pg, ratio));
  }

  // Certificates.
  {
    bool exact = true;
    for (int i = 0; i < 100; ++i) {
      const double x = i / 100.0;
      exact = exact && cert::q_pochhammer(0.0, x) == 1.0 && cert::q_pochhammer(x, 0.0) == 1.0 - x;
    }
    CounterRng rng(77);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const long n = 1 + static_cast<long>(rng.uniform() * 500);
      const long r = std::min(n, static_cast<long>(rng.uniform() * (n + 1)));
      const double d = 1e-3 + 0.998 * rng.uniform();
      const long double ref = std::max(0.0L, static_cast<long double>(r) / n -
                                                 std::sqrt(std::log(1.0L / d) / (2.0L * n)));
      worst = std::max(worst, static_cast<double>(
                                  std::fabs(cert::hoeffding_lower_bound({n, r, d}) - ref)));
    }
    long points = 0, violations = 0;
    for (const auto& env_runs : sweep) {
      std::vector<std::vector<double>> trajs;
      for (const auto& eps : env_runs)
        for (const auto& r : eps) trajs.push_back(r.distances);
      const auto envl = cert::fit_exp_envelope(trajs);
      for (const auto& d : trajs) {
        if (!(d[0] > 0.0)) continue;
        for (std::size_t t = 0; t < d.size(); ++t, ++points)
          violations += !(d[t] <= envl.C * d[0] * std::exp(-envl.lambda * static_cast<double>(t)));
      }
    }
    report(exact && worst <= 1e-12 && violations == 0, "certificates",
           fmt("q_pochhammer edge identities %s; hoeffding max abs err %.1e; envelope covers "
               "%ld/%ld replayed points",
               exact ? "exact" : "NOT exact", worst, points - violations, points));
  }

  // Reproducibility.
  {
    const fs::path dir = fs::temp_directory_path() / "calf_acceptance_repro";
    long same = 0, total = 0;
    for (const char* agent : {"nominal", "calf", "calfq", "reinforce", "sdpg", "ppo"}) {
      runner::RunConfig c = runner::default_run_config(agent, "omnibot");
      c.seeds = {1, 2, 3};
      c.episodes = 2;
      c.output_dir = dir.string();
      if (c.baseline) c.baseline->critic_epochs = c.baseline->policy_epochs = 3;
      fs::remove_all(dir);
      const auto a = runner::run_experiment(c, 3);
      fs::remove_all(dir);
      const auto b = runner::run_experiment(c, 1);
      same += a.text() == b.text();
      ++total;
    }
    fs::remove_all(dir);
    report(same == total, "reproducibility",
           fmt("%ld/%ld agents produce identical manifests across repeated runs", same, total));
  }

  std::printf("%d criteria failed\n", failures);
  return failures;
}
