#pragma once

// CSV persistence and content hashing.
//
// Episode CSV columns: step,time,s_0..s_{n-1},a_0..a_{m-1},reward,
// cumulative_reward,mode,critic_value,relax_prob,xi. Floats use 17 significant
// digits, lines end in LF.

#include <filesystem>
#include <string>
#include <vector>

#include "calf/env/core.hpp"

namespace calf::runner {

std::vector<std::string> episode_csv_header(const env::EnvironmentSpec& spec);
std::string episode_csv(const env::EnvironmentSpec& spec, const env::EpisodeLog& log);

/// Parsed episode CSV. Rows keep their order; modes are parsed to AgentMode.
struct EpisodeTable {
  std::vector<std::string> header;
  std::vector<env::StepRecord> rows;
};
/// Throws ConfigError naming the file and row on malformed input.
EpisodeTable read_episode_csv(const std::filesystem::path& path, std::size_t state_dim,
                              std::size_t action_dim);

struct SummaryRow {
  long episode = 0;
  double episode_return = 0.0;
  long env_steps = 0;  // cumulative environment steps at the end of the episode
};
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

std::string format_double(double v);

/// Writes bytes exactly; throws std::runtime_error naming the path on failure.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);

}  // namespace calf::runner
