#pragma once

// Multi-seed execution, summaries and the post-hoc certificate report.
// Layout: output_dir/{agent}/{env}/seed_{k}/episode_{j}.csv plus
// seed_{k}/summary.csv, and config.yaml + manifest.txt per {agent}/{env}.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "calf/runner/config.hpp"
#include "calf/runner/io.hpp"

namespace calf::runner {

struct ManifestEntry {
  std::string path;  // relative to the run directory, '/' separated
  std::string sha256;
};

struct Manifest {
  std::filesystem::path run_dir;
  std::vector<ManifestEntry> entries;  // sorted by path

  std::string text() const;
};

/// Episode results of one seed, handed to an optional observer.
struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<env::EpisodeLog> episodes;
  std::vector<SummaryRow> summary;
};

/// Runs every seed (at most `jobs` concurrently), writes all files and the manifest.
Manifest run_experiment(const RunConfig& cfg, unsigned jobs = 1);

/// Runs one seed in memory without writing anything.
SeedResult run_seed(const RunConfig& cfg, std::uint64_t seed);

/// Per-episode agent return minus the nominal return (nominal summary must be constant).
std::vector<double> relative_return(const std::vector<SummaryRow>& agent,
                                    const std::vector<SummaryRow>& nominal,
                                    const std::string& agent_env, const std::string& nominal_env);

/// Centered rolling median; near the ends the window shrinks to what is available.
std::vector<double> rolling_median(const std::vector<double>& series, std::size_t window);

/// Collects every summary.csv under `in_dir` into one table:
/// agent,env,seed,episode,return,env_steps,relative_return (relative is empty without
/// a nominal run for the same env).
std::string summarize(const std::filesystem::path& in_dir);

struct CertifyReport {
  std::string agent;
  std::string env;
  long n_runs = 0;
  long n_reached = 0;
  double hoeffding = 0.0;
  double envelope_C = 0.0;
  double envelope_lambda = 0.0;
  bool envelope_covered = false;
  long ladder_violations = 0;  // certified value decreases inside an episode
};

/// One report per {agent}/{env} run directory found under `in_dir`.
std::vector<CertifyReport> certify(const std::filesystem::path& in_dir, double delta = 0.05);
std::string format_reports(const std::vector<CertifyReport>& reports);

}  // namespace calf::runner
