// Command-line front end: run, certify, summarize, config.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

#include "calf/error.hpp"
#include "calf/runner/config.hpp"
#include "calf/runner/experiment.hpp"
#include "calf/runner/io.hpp"
#include "calf/simd/kernels.hpp"

using namespace calf;

int main(int argc, char** argv) {
  CLI::App app{"Goal-reaching agents with certified critics: experiment runner"};
  app.require_subcommand(1);

  std::string agent, env, seeds, config_file, out_dir, integrator;
  long episodes = 0;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "train an agent over a seed list and write CSV logs");
  run->add_option("--agent", agent, "nominal | calf | calfq | reinforce | sdpg | ppo");
  run->add_option("--env", env, "environment name");
  run->add_option("--seeds", seeds, "seed list, e.g. 1..10 or 1,4,7");
  run->add_option("--episodes", episodes, "episodes (training iterations for baselines)");
  run->add_option("--config", config_file, "YAML run config; flags override its values");
  run->add_option("--jobs", jobs, "seeds run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--integrator", integrator, "rk4 | euler")
      ->check(CLI::IsMember({"rk4", "euler"}));

  std::string in_dir;
  double delta = 0.05;
  auto* cert = app.add_subcommand("certify", "goal-reaching certificates for finished runs");
  cert->add_option("--in", in_dir, "run output directory")->required();
  cert->add_option("--delta", delta, "Hoeffding confidence parameter");

  std::string summary_out;
  auto* summ = app.add_subcommand("summarize", "collect every summary.csv into one table");
  summ->add_option("--in", in_dir, "run output directory")->required();
  summ->add_option("--out", summary_out, "output CSV (stdout when omitted)");

  auto* conf = app.add_subcommand("config", "print the default YAML config of an agent/env pair");
  conf->add_option("--agent", agent)->required();
  conf->add_option("--env", env)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      runner::RunConfig cfg;
      if (!config_file.empty()) {
        cfg = runner::load_run_config(config_file);
        if ((!agent.empty() && agent != cfg.agent) || (!env.empty() && env != cfg.env)) {
          // A different agent/env invalidates the file's sub-config.
          runner::RunConfig fresh = runner::default_run_config(agent.empty() ? cfg.agent : agent,
                                                               env.empty() ? cfg.env : env);
          fresh.seeds = cfg.seeds;
          fresh.episodes = cfg.episodes;
          fresh.output_dir = cfg.output_dir;
          fresh.env_options = cfg.env_options;
          cfg = fresh;
        }
      } else {
        if (agent.empty() || env.empty()) {
          std::cerr << "run: --agent and --env are required without --config\n";
          return 2;
        }
        cfg = runner::default_run_config(agent, env);
      }
      if (!seeds.empty()) cfg.seeds = runner::parse_seed_list(seeds);
      if (run->count("--episodes")) cfg.episodes = episodes;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!integrator.empty())
        cfg.env_options.integrator = integrator == "rk4" ? env::Integrator::rk4 : env::Integrator::euler;
      cfg.validate();
      const auto m = runner::run_experiment(cfg, jobs);
      std::cout << "wrote " << m.entries.size() << " files to " << m.run_dir.string()
                << " (kernels: " << simd::backend_name(simd::active_backend()) << ")\n";
    } else if (*cert) {
      std::cout << runner::format_reports(runner::certify(in_dir, delta));
    } else if (*summ) {
      const std::string table = runner::summarize(in_dir);
      if (summary_out.empty())
        std::cout << table;
      else
        runner::write_file(summary_out, table);
    } else if (*conf) {
      std::cout << runner::to_yaml(runner::default_run_config(agent, env));
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
