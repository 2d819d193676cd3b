#include "calf/runner/io.hpp"

#include <openssl/evp.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "calf/error.hpp"

namespace calf::runner {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> episode_csv_header(const env::EnvironmentSpec& spec) {
  std::vector<std::string> h{"step", "time"};
  for (std::size_t i = 0; i < spec.state_dim; ++i) h.push_back("s_" + std::to_string(i));
  for (std::size_t i = 0; i < spec.action_dim; ++i) h.push_back("a_" + std::to_string(i));
  for (const char* c :
       {"reward", "cumulative_reward", "mode", "critic_value", "relax_prob", "xi"})
    h.emplace_back(c);
  return h;
}

std::string episode_csv(const env::EnvironmentSpec& spec, const env::EpisodeLog& log) {
  std::string out;
  out.reserve(log.steps.size() * (24 * (spec.state_dim + spec.action_dim + 6)));
  const auto header = episode_csv_header(spec);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const env::StepRecord& r : log.steps) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.time);
    for (std::size_t i = 0; i < spec.state_dim; ++i) (out += ',') += format_double(r.state[i]);
    for (std::size_t i = 0; i < spec.action_dim; ++i) (out += ',') += format_double(r.action[i]);
    (out += ',') += format_double(r.reward);
    (out += ',') += format_double(r.cumulative_reward);
    (out += ',') += env::mode_name(r.mode);
    (out += ',') += format_double(r.critic_value);
    (out += ',') += format_double(r.relax_prob);
    out += r.relax_event ? ",1\n" : ",0\n";
  }
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = line.find(',', pos);
    f.push_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return f;
}

double to_double(std::string_view s, const std::string& ctx) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(ctx + ": bad number '" + std::string(s) + "'");
  return v;
}

long to_long(std::string_view s, const std::string& ctx) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(ctx + ": bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(std::move(l));
  }
  return lines;
}

}  // namespace

EpisodeTable read_episode_csv(const std::filesystem::path& path, std::size_t state_dim,
                              std::size_t action_dim) {
  const auto lines = lines_of(read_file(path));
  const std::string file = path.string();
  if (lines.empty()) throw ConfigError(file + ": empty CSV");
  EpisodeTable t;
  for (auto f : split_fields(lines[0])) t.header.emplace_back(f);
  const std::size_t ncol = 8 + state_dim + action_dim;
  if (t.header.size() != ncol)
    throw ConfigError(file + ": expected " + std::to_string(ncol) + " columns, header has " +
                      std::to_string(t.header.size()));
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const std::string ctx = file + " row " + std::to_string(row + 1);
    const auto f = split_fields(lines[row]);
    if (f.size() != ncol) throw ConfigError(ctx + ": wrong column count");
    env::StepRecord r;
    std::size_t k = 0;
    r.step = to_long(f[k++], ctx);
    r.time = to_double(f[k++], ctx);
    r.state = env::StateVec(state_dim);
    for (std::size_t i = 0; i < state_dim; ++i) r.state[i] = to_double(f[k++], ctx);
    r.action = env::ActionVec(action_dim);
    for (std::size_t i = 0; i < action_dim; ++i) r.action[i] = to_double(f[k++], ctx);
    r.reward = to_double(f[k++], ctx);
    r.cumulative_reward = to_double(f[k++], ctx);
    try {
      r.mode = env::parse_mode(f[k++]);
    } catch (const std::exception&) {
      throw ConfigError(ctx + ": unknown mode '" + std::string(f[k - 1]) + "'");
    }
    r.critic_value = to_double(f[k++], ctx);
    r.relax_prob = to_double(f[k++], ctx);
    r.relax_event = to_long(f[k++], ctx) != 0;
    t.rows.push_back(r);
  }
  return t;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "episode,return,env_steps\n";
  for (const SummaryRow& r : rows)
    out += std::to_string(r.episode) + "," + format_double(r.episode_return) + "," +
           std::to_string(r.env_steps) + "\n";
  return out;
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  const auto lines = lines_of(read_file(path));
  const std::string file = path.string();
  if (lines.empty() || lines[0] != "episode,return,env_steps")
    throw ConfigError(file + ": not a summary CSV");
  std::vector<SummaryRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = file + " row " + std::to_string(i + 1);
    const auto f = split_fields(lines[i]);
    if (f.size() != 3) throw ConfigError(ctx + ": wrong column count");
    rows.push_back({to_long(f[0], ctx), to_double(f[1], ctx), to_long(f[2], ctx)});
  }
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory '" + path.parent_path().string() +
                                   "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace calf::runner
