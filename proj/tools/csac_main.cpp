// csac: train, evaluate and benchmark slicing agents.
//
// Exit codes: 0 ok, 1 run failed (crash or watchdog), 2 invalid configuration
// or checkpoint mismatch, 3 learner halted on non-finite updates, 4 output
// write failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csac/app/commands.hpp"
#include "csac/app/run_config.hpp"
#include "csac/errors.hpp"

using namespace csac;

namespace {

struct CommonFlags {
  std::string config;
  std::string algo;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_steps;
  std::optional<std::size_t> actors, learners, buffers;
  std::optional<std::uint64_t> log_interval;
  bool sequential = false;
  bool paper_scale = false;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "INI configuration file");
  cmd->add_option("--algo", f.algo, "csac, sac6 or ddpg");
  cmd->add_option("--seed", f.seed, "Run seed");
  cmd->add_option("--max-steps", f.max_steps, "Total environment transitions");
  cmd->add_option("--actors", f.actors, "Actor count");
  cmd->add_option("--learners", f.learners, "Learner count");
  cmd->add_option("--buffers", f.buffers, "Replay buffer count");
  cmd->add_option("--log-interval", f.log_interval, "Transitions per metrics row");
  cmd->add_flag("--sequential", f.sequential, "Run every component on one thread (bit-reproducible)");
  cmd->add_flag("--paper-scale", f.paper_scale, "5x128 networks, 250000 steps");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_flag("--quiet", f.quiet, "No heartbeat lines on stderr");
}

// Caps actors + learners at CSAC_THREADS by trimming the larger group first.
void apply_thread_cap(app::RunConfig& c) {
  const char* env = std::getenv("CSAC_THREADS");
  if (!env || c.cls.sequential) return;
  char* end = nullptr;
  const unsigned long cap = std::strtoul(env, &end, 10);
  if (end == env || *end != '\0' || cap < 2) {
    throw ConfigError("CSAC_THREADS must be an integer >= 2, got '" + std::string(env) + "'");
  }
  auto& k = c.cls;
  const std::size_t before_a = k.actors, before_l = k.learners;
  while (k.actors + k.learners > cap) {
    if (k.learners >= k.actors && k.learners > 1) --k.learners;
    else --k.actors;
  }
  if (k.actors != before_a || k.learners != before_l) {
    std::cerr << "CSAC_THREADS=" << cap << ": running " << k.actors << " actors and " << k.learners
              << " learners\n";
  }
}

app::RunConfig resolve(const CommonFlags& f) {
  app::RunConfig c = f.config.empty() ? app::default_run_config(f.paper_scale)
                                      : app::load_run_config(f.config, f.paper_scale);
  if (!f.algo.empty()) {
    const auto a = agents::parse_algo(f.algo);
    if (!a) throw ConfigError("--algo: expected csac, sac6 or ddpg, got '" + f.algo + "'");
    c.algo = *a;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.max_steps) c.hyper.max_timesteps = *f.max_steps;
  if (f.actors) c.cls.actors = *f.actors;
  if (f.learners) c.cls.learners = *f.learners;
  if (f.buffers) c.cls.buffers = *f.buffers;
  if (f.log_interval) c.cls.log_interval = *f.log_interval;
  if (f.sequential) c.cls.sequential = true;
  if (!f.out.empty()) c.out_dir = f.out;
  if (c.hyper.start_timesteps >= c.hyper.max_timesteps) c.hyper.start_timesteps = c.hyper.max_timesteps / 10;
  apply_thread_cap(c);
  c.validate();
  return c;
}

int report_failure(int code, const std::string& message) {
  std::cerr << "csac: " << message << " (exit " << code << ")\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Slicing resource allocation with stochastic actor-critic agents"};
  cli.require_subcommand(1);

  CommonFlags train_flags, eval_flags, bench_flags;
  auto* train = cli.add_subcommand("train", "Train one agent and write metrics, checkpoint and ledger");
  add_common(train, train_flags);

  auto* eval = cli.add_subcommand("eval", "Evaluate a checkpoint against the latency SLAs");
  add_common(eval, eval_flags);
  std::string checkpoint;
  bool random_policy = false;
  std::optional<std::size_t> episodes;
  eval->add_option("--checkpoint", checkpoint, "checkpoint.bin from a train run");
  eval->add_flag("--random", random_policy, "Evaluate a uniform random policy instead");
  eval->add_option("--episodes", episodes, "Evaluation episodes");

  auto* bench = cli.add_subcommand("bench", "Train several algorithms over several seeds and tabulate");
  add_common(bench, bench_flags);
  std::vector<std::string> algo_names{"csac", "sac6", "ddpg"};
  std::size_t trials = 3;
  bench->add_option("--algos", algo_names, "Algorithms to compare")->delimiter(',');
  bench->add_option("--trials", trials, "Seeds per algorithm");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::kExitInvalidConfig;
  }

  try {
    if (*train) {
      const auto c = resolve(train_flags);
      const auto r = app::train(c, train_flags.quiet ? nullptr : &std::cerr);
      if (r.exit_code != app::kExitOk) return report_failure(r.exit_code, r.message);
      std::cout << "wrote " << c.out_dir.string() << " (" << r.rows.size() << " metrics rows, "
                << r.ledger.global_steps << " transitions, " << r.ledger.wall_s << " s)\n";
      return app::kExitOk;
    }
    if (*eval) {
      auto c = resolve(eval_flags);
      if (episodes) c.eval_episodes = *episodes;
      if (checkpoint.empty() != random_policy) {
        return report_failure(app::kExitInvalidConfig, "eval needs exactly one of --checkpoint or --random");
      }
      const auto r = app::eval(c, checkpoint);
      if (r.exit_code != app::kExitOk) return report_failure(r.exit_code, r.message);
      r.report.write(std::cout);
      return app::kExitOk;
    }
    if (*bench) {
      const auto c = resolve(bench_flags);
      std::vector<agents::Algo> algos;
      for (const auto& name : algo_names) {
        const auto a = agents::parse_algo(name);
        if (!a) return report_failure(app::kExitInvalidConfig, "--algos: unknown algorithm '" + name + "'");
        algos.push_back(*a);
      }
      const auto r = app::bench(c, algos, trials, bench_flags.quiet ? nullptr : &std::cerr);
      r.write_csv(std::cout);
      return r.exit_code;
    }
  } catch (const ConfigError& e) {
    return report_failure(app::kExitInvalidConfig, e.what());
  } catch (const IoError& e) {
    return report_failure(app::kExitIoFailure, e.what());
  }
  return app::kExitInvalidConfig;
}
