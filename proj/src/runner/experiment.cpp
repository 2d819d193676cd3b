#include "calf/runner/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "calf/agent/calf_agent.hpp"
#include "calf/baselines/agents.hpp"
#include "calf/certificates/certificates.hpp"
#include "calf/error.hpp"
#include "calf/nominal/policies.hpp"

namespace fs = std::filesystem;

namespace calf::runner {

std::string Manifest::text() const {
  std::string out;
  for (const ManifestEntry& e : entries) out += e.sha256 + "  " + e.path + "\n";
  return out;
}

SeedResult run_seed(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const env::EnvironmentSpec spec = env::make_env(cfg.env, cfg.env_options);
  SeedResult res;
  res.seed = seed;
  long steps = 0;
  auto record = [&](env::EpisodeLog log, long episode, long env_steps) {
    steps += env_steps;
    res.summary.push_back({episode, log.total_return(), steps});
    log.episode = episode;
    res.episodes.push_back(std::move(log));
  };

  if (cfg.agent == "nominal") {
    const env::StepPolicy pol = nominal::make_nominal_agent(spec);
    for (long ep = 0; ep < cfg.episodes; ++ep)
      record(env::run_episode(spec, pol, seed, ep, "nominal"), ep, spec.horizon_steps);
  } else if (cfg.agent == "calf" || cfg.agent == "calfq") {
    agent::CalfConfig c = *cfg.calf;
    c.variant = cfg.agent == "calf" ? agent::Variant::state_critic
                                    : agent::Variant::state_action_critic;
    agent::CalfAgent ag(spec, c, seed);
    for (long ep = 0; ep < cfg.episodes; ++ep)
      record(ag.run_episode(ep), ep, spec.horizon_steps);
  } else {
    baselines::BaselineAgent ag(spec, baselines::parse_baseline(cfg.agent), *cfg.baseline, seed);
    const long per_iter =
        static_cast<long>(cfg.baseline->episodes_per_iteration) * spec.horizon_steps;
    // One logged episode per training iteration: the first rollout of its batch.
    for (long it = 0; it < cfg.episodes; ++it) {
      auto r = ag.run_iteration(it);
      record(std::move(r.episodes.front()), it, per_iter);
    }
  }
  return res;
}

Manifest run_experiment(const RunConfig& cfg, unsigned jobs) {
  cfg.validate();
  const env::EnvironmentSpec spec = env::make_env(cfg.env, cfg.env_options);
  Manifest m;
  m.run_dir = fs::path(cfg.output_dir) / cfg.agent / cfg.env;
  std::mutex mu;
  auto write = [&](const std::string& rel, const std::string& content) {
    write_file(m.run_dir / rel, content);
    const std::string h = sha256_hex(content);
    std::lock_guard lock(mu);
    m.entries.push_back({rel, h});
  };

  write("config.yaml", to_yaml(cfg));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.seeds.size()) return;
      try {
        const SeedResult r = run_seed(cfg, cfg.seeds[i]);
        const std::string dir = "seed_" + std::to_string(r.seed) + "/";
        for (const env::EpisodeLog& log : r.episodes)
          write(dir + "episode_" + std::to_string(log.episode) + ".csv", episode_csv(spec, log));
        write(dir + "summary.csv", summary_csv(r.summary));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = cfg.seeds.size();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, cfg.seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  write_file(m.run_dir / "manifest.txt", m.text());
  return m;
}

std::vector<double> relative_return(const std::vector<SummaryRow>& agent,
                                    const std::vector<SummaryRow>& nominal,
                                    const std::string& agent_env, const std::string& nominal_env) {
  if (agent_env != nominal_env)
    throw ContractViolation("relative_return: environment mismatch ('" + agent_env + "' vs '" +
                            nominal_env + "')");
  require(!nominal.empty(), "relative_return: nominal summary is empty");
  const double ref = nominal.front().episode_return;
  for (const SummaryRow& r : nominal)
    require(r.episode_return == ref, "relative_return: nominal returns must be constant");
  std::vector<double> out;
  out.reserve(agent.size());
  for (const SummaryRow& r : agent) out.push_back(r.episode_return - ref);
  return out;
}

std::vector<double> rolling_median(const std::vector<double>& series, std::size_t window) {
  if (window % 2 == 0) throw ContractViolation("rolling_median: window must be odd");
  require(window <= std::max<std::size_t>(series.size(), 1),
          "rolling_median: window longer than the series");
  const std::size_t half = window / 2;
  std::vector<double> out(series.size());
  std::vector<double> buf;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(series.size(), i + half + 1);
    buf.assign(series.begin() + static_cast<long>(lo), series.begin() + static_cast<long>(hi));
    std::sort(buf.begin(), buf.end());
    const std::size_t n = buf.size();
    out[i] = n % 2 ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
  }
  return out;
}

namespace {

std::vector<fs::path> sorted_dirs(const fs::path& p) {
  std::vector<fs::path> out;
  if (!fs::is_directory(p)) return out;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

long numeric_suffix(const fs::path& p, std::string_view prefix) {
  const std::string name = p.stem().string();
  if (name.rfind(prefix, 0) != 0) return -1;
  try {
    return std::stol(name.substr(prefix.size()));
  } catch (const std::exception&) {
    return -1;
  }
}

/// (seed, path) pairs for seed_* directories, in seed order.
std::vector<std::pair<long, fs::path>> seed_dirs(const fs::path& run_dir) {
  std::vector<std::pair<long, fs::path>> out;
  for (const auto& d : sorted_dirs(run_dir))
    if (const long s = numeric_suffix(d, "seed_"); s >= 0) out.emplace_back(s, d);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string summarize(const fs::path& in_dir) {
  if (!fs::is_directory(in_dir))
    throw std::runtime_error("summarize: '" + in_dir.string() + "' is not a directory");
  std::ostringstream out;
  out << "agent,env,seed,episode,return,env_steps,relative_return\n";
  std::map<std::string, std::vector<SummaryRow>> nominal;
  for (const auto& env_dir : sorted_dirs(in_dir / "nominal")) {
    const auto seeds = seed_dirs(env_dir);
    if (!seeds.empty())
      nominal[env_dir.filename().string()] = read_summary_csv(seeds.front().second / "summary.csv");
  }
  for (const auto& agent_dir : sorted_dirs(in_dir)) {
    const std::string agent = agent_dir.filename().string();
    for (const auto& env_dir : sorted_dirs(agent_dir)) {
      const std::string env = env_dir.filename().string();
      for (const auto& [seed, dir] : seed_dirs(env_dir)) {
        const fs::path f = dir / "summary.csv";
        if (!fs::exists(f)) continue;
        const auto rows = read_summary_csv(f);
        std::vector<double> rel;
        if (const auto it = nominal.find(env); it != nominal.end())
          rel = relative_return(rows, it->second, env, env);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          out << agent << ',' << env << ',' << seed << ',' << rows[i].episode << ','
              << format_double(rows[i].episode_return) << ',' << rows[i].env_steps << ',';
          if (!rel.empty()) out << format_double(rel[i]);
          out << '\n';
        }
      }
    }
  }
  return out.str();
}

std::vector<CertifyReport> certify(const fs::path& in_dir, double delta) {
  if (!fs::is_directory(in_dir))
    throw std::runtime_error("certify: '" + in_dir.string() + "' is not a directory");
  std::vector<fs::path> run_dirs;
  if (fs::exists(in_dir / "config.yaml")) {
    run_dirs.push_back(in_dir);
  } else {
    for (const auto& a : sorted_dirs(in_dir))
      for (const auto& e : sorted_dirs(a))
        if (fs::exists(e / "config.yaml")) run_dirs.push_back(e);
  }
  std::vector<CertifyReport> reports;
  for (const fs::path& run_dir : run_dirs) {
    const RunConfig cfg = load_run_config((run_dir / "config.yaml").string());
    const env::EnvironmentSpec spec = env::make_env(cfg.env, cfg.env_options);
    CertifyReport rep;
    rep.agent = cfg.agent;
    rep.env = cfg.env;
    double nu = 0.0;
    if (cfg.calf) nu = cfg.calf->critic.nu_bar > 0.0 ? cfg.calf->critic.nu_bar : 1e-3 * spec.dt;
    const double sign = cfg.agent == "calf" ? -1.0 : 1.0;  // cost form of the logged value
    std::vector<std::vector<double>> distances;
    for (const auto& [seed, dir] : seed_dirs(run_dir)) {
      std::vector<std::pair<long, fs::path>> files;
      for (const auto& e : fs::directory_iterator(dir))
        if (const long j = numeric_suffix(e.path(), "episode_");
            j >= 0 && e.path().extension() == ".csv")
          files.emplace_back(j, e.path());
      std::sort(files.begin(), files.end());
      for (const auto& [ep, file] : files) {
        const EpisodeTable t = read_episode_csv(file, spec.state_dim, spec.action_dim);
        ++rep.n_runs;
        std::vector<double> d;
        bool reached = false;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          const env::StepRecord& r = t.rows[i];
          d.push_back(spec.goal.distance(r.state));
          reached = reached || d.back() == 0.0;
          if (cfg.calf && i > 0 && r.mode == env::AgentMode::certified) {
            const double drop = sign * t.rows[i - 1].critic_value - sign * r.critic_value;
            if (!(drop >= nu)) ++rep.ladder_violations;
          }
        }
        rep.n_reached += reached;
        distances.push_back(std::move(d));
      }
    }
    rep.hoeffding = rep.n_runs > 0 ? cert::hoeffding_lower_bound({rep.n_runs, rep.n_reached, delta})
                                   : 0.0;
    const cert::ExpEnvelope envl = cert::fit_exp_envelope(distances);
    rep.envelope_C = envl.C;
    rep.envelope_lambda = envl.lambda;
    rep.envelope_covered = cert::envelope_covers(envl, distances);
    reports.push_back(rep);
  }
  return reports;
}

std::string format_reports(const std::vector<CertifyReport>& reports) {
  std::ostringstream out;
  for (const CertifyReport& r : reports) {
    out << "agent: " << r.agent << '\n'
        << "env: " << r.env << '\n'
        << "runs: " << r.n_runs << '\n'
        << "reached: " << r.n_reached << '\n'
        << "hoeffding_lower_bound: " << format_double(r.hoeffding) << '\n'
        << "envelope_C: " << format_double(r.envelope_C) << '\n'
        << "envelope_lambda: " << format_double(r.envelope_lambda) << '\n'
        << "envelope_covers: " << (r.envelope_covered ? "yes" : "no") << '\n'
        << "ladder_violations: " << r.ladder_violations << "\n\n";
  }
  return out.str();
}

}  // namespace calf::runner
