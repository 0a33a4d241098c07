#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "csac/agents/agent.hpp"
#include "csac/env/config.hpp"
#include "csac/runtime/metrics.hpp"
#include "csac/runtime/workers.hpp"

namespace csac::runtime {

/// Shape of one actor-learner class. Actor a writes to buffer a mod buffers and
/// reads memory a mod memories; learner l publishes to memory l mod memories.
struct ClassConfig {
  std::size_t actors = 3;
  std::size_t learners = 3;
  std::size_t buffers = 2;
  std::size_t memories = 1;
  std::size_t refresh_interval = 50;
  std::size_t publish_interval = 25;
  std::uint64_t log_interval = 100;
  bool sequential = false;

  void validate() const;

  std::size_t buffer_for_actor(std::size_t a) const noexcept { return a % buffers; }
  std::size_t memory_for_actor(std::size_t a) const noexcept { return a % memories; }
  std::size_t memory_for_learner(std::size_t l) const noexcept { return l % memories; }
  /// With at least as many learners as buffers, learner l reads buffer
  /// l mod buffers; otherwise buffers are dealt round-robin over learners.
  std::vector<std::size_t> buffers_for_learner(std::size_t l) const;
};

struct RunLedger {
  std::uint64_t global_steps = 0;
  std::vector<std::uint64_t> actor_transitions;
  std::vector<std::uint64_t> actor_policy_version;
  std::vector<std::uint64_t> actor_max_staleness;
  std::vector<std::uint64_t> learner_updates;
  std::vector<std::uint64_t> learner_publishes;
  std::vector<std::uint64_t> learner_numeric_failures;
  std::vector<double> learner_active_s;  // wall time from first update to exit
  std::vector<double> learner_cpu_s;     // thread CPU time
  std::vector<std::uint64_t> memory_versions;
  std::uint64_t dropped_transitions = 0;  // evicted from full buffers
  std::uint64_t corrupt_fetches = 0;
  StalenessHistogram staleness;
  double wall_s = 0.0;
  double transitions_per_s = 0.0;
  bool sequential = false;
  bool failed = false;
  bool numeric_failure = false;
  bool timed_out = false;
  std::string failure;

  bool reconciles() const;
  /// Updates per second of wall time the learner was active.
  double learner_wall_rate(std::size_t l) const;
  /// Updates per second of learner thread CPU time.
  double learner_cpu_rate(std::size_t l) const;
  void write(std::ostream& out) const;
};

struct RunOptions {
  std::function<void(const MetricsRow&)> on_row;
  std::ostream* log = nullptr;  // heartbeat lines
  double heartbeat_s = 5.0;
  double timeout_s = 0.0;       // 0 disables the watchdog
  bool freeze_memory = false;
  double percentile_q = 95.0;
  /// Called before each actor step with (actor id, local step); test hook for
  /// injecting slow actors.
  std::function<void(std::size_t, std::uint64_t)> before_actor_step;
};

struct RunResult {
  RunLedger ledger;
  std::string checkpoint;  // Agent::save bytes of the learner actors follow
  std::size_t checkpoint_learner = 0;
};

/// Runs one class until `hyper.max_timesteps` transitions have been generated.
/// Actor a's environment is seeded with seed + a; learner l's agent with
/// seed + l. Threaded by default; `config.sequential` interleaves every
/// component on the calling thread (actor g mod actors takes global step g,
/// then each learner runs one update once g >= start_timesteps), which is
/// bit-reproducible.
RunResult run_class(const env::EnvConfig& env_config, agents::Algo algo, const agents::Hyper& hyper,
                    const ClassConfig& config, std::uint64_t seed, const RunOptions& options = {});

}  // namespace csac::runtime
