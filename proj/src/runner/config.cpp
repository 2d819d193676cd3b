#include "calf/runner/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "calf/error.hpp"

namespace calf::runner {

bool is_agent(std::string_view name) noexcept {
  return std::any_of(std::begin(kAgentNames), std::end(kAgentNames),
                     [name](const char* a) { return name == a; });
}

void RunConfig::validate() const {
  if (!is_agent(agent)) throw ConfigError("unknown agent '" + agent + "'");
  if (!env::is_environment(env)) throw ConfigError("unknown environment '" + env + "'");
  if (seeds.empty()) throw ConfigError("seed list is empty");
  std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  if (uniq.size() != seeds.size()) throw ConfigError("seed list has duplicates");
  if (episodes <= 0) throw ConfigError("episodes must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
  if ((agent == "calf" || agent == "calfq") && !calf)
    throw ConfigError("agent '" + agent + "' needs a calf section");
  if (baselines::is_baseline(agent) && !baseline)
    throw ConfigError("agent '" + agent + "' needs a baseline section");
  if (calf) calf->validate();
  if (baseline && baselines::is_baseline(agent))
    baseline->validate(baselines::parse_baseline(agent));
}

RunConfig default_run_config(std::string_view agent, std::string_view env) {
  RunConfig c;
  c.agent = std::string(agent);
  c.env = std::string(env);
  if (!is_agent(agent)) throw ConfigError("unknown agent '" + c.agent + "'");
  if (agent == "calf" || agent == "calfq") {
    c.calf = agent::calf_defaults(env);
    c.calf->variant =
        agent == "calf" ? agent::Variant::state_critic : agent::Variant::state_action_critic;
  } else if (baselines::is_baseline(agent)) {
    c.baseline = baselines::baseline_defaults(baselines::parse_baseline(agent), env);
  }
  return c;
}

namespace {

// Field visitors shared by the emitter and the parser.
template <class F>
void visit_fields(agent::CalfConfig& c, F&& f) {
  f("relax_factor", c.relax_factor);
  f("relax_prob_init", c.relax_prob_init);
  f("resample_relax_prob", c.resample_relax_prob);
  f("relax_prob_min", c.relax_prob_min);
  f("relax_prob_max", c.relax_prob_max);
  f("epsilon_explore", c.epsilon_explore);
  f("nominal_first", c.nominal_first);
  f("propagate_certified_weights", c.propagate_certified_weights);
  f("actor_candidates", c.actor_candidates);
  f("drop_relax_near_goal", c.drop_relax_near_goal);
  f("drop_relax_on_escape", c.drop_relax_on_escape);
}

template <class F>
void visit_fields(critic::CriticConfig& c, F&& f) {
  f("hidden", c.hidden);
  f("eps_reg", c.eps_reg);
  f("weight_bound", c.weight_bound);
  f("nu_bar", c.nu_bar);
  f("c_low", c.bounds.c_low);
  f("c_up", c.bounds.c_up);
  f("grad_steps", c.grad_steps);
  f("learning_rate", c.learning_rate);
  f("max_grad_norm", c.max_grad_norm);
  f("gamma", c.gamma);
  f("n_td", c.n_td);
  f("batch_size", c.batch_size);
  f("output_init_scale", c.output_init_scale);
  f("init_lambda_ratio", c.init_lambda_ratio);
}

template <class F>
void visit_fields(baselines::BaselineConfig& c, F&& f) {
  f("episodes_per_iteration", c.episodes_per_iteration);
  f("gamma", c.gamma);
  f("gae_lambda", c.gae_lambda);
  f("gae_exponent", c.gae_exponent);
  f("n_td", c.n_td);
  f("critic_hidden", c.critic_hidden);
  f("critic_lr", c.critic_lr);
  f("critic_epochs", c.critic_epochs);
  f("policy_hidden", c.policy_hidden);
  f("policy_lr", c.policy_lr);
  f("policy_epochs", c.policy_epochs);
  f("clip_eps", c.clip_eps);
  f("sigma_scale", c.sigma_scale);
  f("momentum", c.momentum);
  f("max_grad_norm", c.max_grad_norm);
  f("policy_init_scale", c.policy_init_scale);
}

void emit_value(YAML::Emitter& e, double v) { e << v; }
void emit_value(YAML::Emitter& e, bool v) { e << v; }
void emit_value(YAML::Emitter& e, std::size_t v) { e << static_cast<unsigned long long>(v); }
void emit_value(YAML::Emitter& e, const std::vector<std::size_t>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (std::size_t x : v) e << static_cast<unsigned long long>(x);
  e << YAML::EndSeq;
}
void emit_value(YAML::Emitter& e, baselines::GaeExponent v) {
  e << (v == baselines::GaeExponent::printed ? "printed" : "shifted");
}

struct Emit {
  YAML::Emitter& e;
  template <class T>
  void operator()(const char* key, T& v) const {
    e << YAML::Key << key << YAML::Value;
    emit_value(e, v);
  }
};

std::string where(const YAML::Node& n) {
  return " (line " + std::to_string(n.Mark().line + 1) + ")";
}

void parse_value(const YAML::Node& n, double& v) { v = n.as<double>(); }
void parse_value(const YAML::Node& n, bool& v) { v = n.as<bool>(); }
void parse_value(const YAML::Node& n, std::size_t& v) {
  const long long x = n.as<long long>();
  if (x < 0) throw ConfigError("expected a non-negative integer" + where(n));
  v = static_cast<std::size_t>(x);
}
void parse_value(const YAML::Node& n, std::vector<std::size_t>& v) {
  if (!n.IsSequence()) throw ConfigError("expected a list" + where(n));
  v.clear();
  for (const auto& x : n) {
    std::size_t s = 0;
    parse_value(x, s);
    v.push_back(s);
  }
}
void parse_value(const YAML::Node& n, baselines::GaeExponent& v) {
  const auto s = n.as<std::string>();
  if (s == "printed") v = baselines::GaeExponent::printed;
  else if (s == "shifted") v = baselines::GaeExponent::shifted;
  else throw ConfigError("gae_exponent must be printed or shifted" + where(n));
}

/// Applies every known key of map `n` to the struct; rejects unknown keys.
template <class S>
void parse_struct(const YAML::Node& n, S& s, const std::string& section,
                  const std::set<std::string>& extra = {}) {
  if (!n.IsMap()) throw ConfigError("section '" + section + "' must be a map" + where(n));
  std::set<std::string> known = extra;
  visit_fields(s, [&](const char* key, auto& v) {
    known.insert(key);
    if (const YAML::Node x = n[key]) {
      try {
        parse_value(x, v);
      } catch (const YAML::Exception& ex) {
        throw ConfigError("bad value for '" + section + "." + key + "'" + where(x));
      }
    }
  });
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key))
      throw ConfigError("unknown key '" + section + "." + key + "'" + where(kv.first));
  }
}

void emit_calf(YAML::Emitter& e, const agent::CalfConfig& cfg) {
  agent::CalfConfig c = cfg;
  e << YAML::BeginMap;
  visit_fields(c, Emit{e});
  e << YAML::Key << "critic" << YAML::Value << YAML::BeginMap;
  visit_fields(c.critic, Emit{e});
  e << YAML::EndMap << YAML::EndMap;
}

void parse_calf(const YAML::Node& n, agent::CalfConfig& c) {
  parse_struct(n, c, "calf", {"critic"});
  if (const YAML::Node cr = n["critic"]) parse_struct(cr, c.critic, "calf.critic");
}

void emit_baseline(YAML::Emitter& e, const baselines::BaselineConfig& cfg) {
  baselines::BaselineConfig c = cfg;
  e << YAML::BeginMap;
  visit_fields(c, Emit{e});
  e << YAML::EndMap;
}

YAML::Node parse_document(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("malformed YAML: ") + ex.what());
  }
}

std::string finish(YAML::Emitter& e) {
  if (!e.good()) throw ContractViolation("YAML emitter error: " + e.GetLastError());
  return std::string(e.c_str()) + "\n";
}

}  // namespace

std::string to_yaml(const agent::CalfConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  emit_calf(e, cfg);
  return finish(e);
}

agent::CalfConfig calf_config_from_yaml(const std::string& text, const agent::CalfConfig& base) {
  agent::CalfConfig c = base;
  parse_calf(parse_document(text), c);
  return c;
}

std::string to_yaml(const baselines::BaselineConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  emit_baseline(e, cfg);
  return finish(e);
}

baselines::BaselineConfig baseline_config_from_yaml(const std::string& text,
                                                    const baselines::BaselineConfig& base) {
  baselines::BaselineConfig c = base;
  parse_struct(parse_document(text), c, "baseline");
  return c;
}

std::string to_yaml(const RunConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "agent" << YAML::Value << cfg.agent;
  e << YAML::Key << "env" << YAML::Value << cfg.env;
  e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto s : cfg.seeds) e << static_cast<unsigned long long>(s);
  e << YAML::EndSeq;
  e << YAML::Key << "episodes" << YAML::Value << cfg.episodes;
  e << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
  e << YAML::Key << "integrator" << YAML::Value
    << (cfg.env_options.integrator == env::Integrator::rk4 ? "rk4" : "euler");
  e << YAML::Key << "robot_printed_dynamics" << YAML::Value
    << cfg.env_options.robot_printed_dynamics;
  if (cfg.calf) {
    e << YAML::Key << "calf" << YAML::Value;
    emit_calf(e, *cfg.calf);
  }
  if (cfg.baseline) {
    e << YAML::Key << "baseline" << YAML::Value;
    emit_baseline(e, *cfg.baseline);
  }
  e << YAML::EndMap;
  return finish(e);
}

RunConfig run_config_from_yaml(const std::string& text) {
  const YAML::Node doc = parse_document(text);
  if (!doc.IsMap()) throw ConfigError("run config must be a map");
  static const std::set<std::string> known = {"agent",      "env",        "seeds",
                                              "episodes",   "output_dir", "integrator",
                                              "robot_printed_dynamics",   "calf",
                                              "baseline"};
  for (const auto& kv : doc) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "'" + where(kv.first));
  }
  if (!doc["agent"] || !doc["env"]) throw ConfigError("run config needs 'agent' and 'env'");
  RunConfig c = default_run_config(doc["agent"].as<std::string>(), doc["env"].as<std::string>());
  try {
    if (const auto n = doc["seeds"]) {
      c.seeds.clear();
      for (const auto& s : n) c.seeds.push_back(s.as<std::uint64_t>());
    }
    if (const auto n = doc["episodes"]) c.episodes = n.as<long>();
    if (const auto n = doc["output_dir"]) c.output_dir = n.as<std::string>();
    if (const auto n = doc["integrator"]) {
      const auto s = n.as<std::string>();
      if (s == "rk4") c.env_options.integrator = env::Integrator::rk4;
      else if (s == "euler") c.env_options.integrator = env::Integrator::euler;
      else throw ConfigError("integrator must be rk4 or euler" + where(n));
    }
    if (const auto n = doc["robot_printed_dynamics"])
      c.env_options.robot_printed_dynamics = n.as<bool>();
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("bad run config value: ") + ex.what());
  }
  if (const auto n = doc["calf"]) {
    if (!c.calf) throw ConfigError("'calf' section given for agent '" + c.agent + "'");
    parse_calf(n, *c.calf);
  }
  if (const auto n = doc["baseline"]) {
    if (!c.baseline) throw ConfigError("'baseline' section given for agent '" + c.agent + "'");
    parse_struct(n, *c.baseline, "baseline");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_yaml(ss.str());
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw ConfigError("bad seed list '" + std::string(text) + "'");
    return v;
  };
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = text.substr(pos, comma - pos);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const std::uint64_t lo = parse_int(item.substr(0, dots));
      const std::uint64_t hi = parse_int(item.substr(dots + 2));
      if (hi < lo) throw ConfigError("bad seed range '" + std::string(item) + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_int(item));
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace calf::runner
