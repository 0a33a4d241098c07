#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "csac/agents/agent.hpp"
#include "csac/agents/replay_buffer.hpp"
#include "csac/env/slicing_env.hpp"
#include "csac/math/rng.hpp"
#include "csac/runtime/memory.hpp"

namespace csac::runtime {

/// Staleness buckets keyed by lower bound: 0, 1, 2, 4, 8, ...
using StalenessHistogram = std::map<std::uint64_t, std::uint64_t>;
std::uint64_t staleness_bucket(std::uint64_t age) noexcept;

/// Experience generator. Owns its environment and a local policy copy that is
/// refreshed from a memory every `refresh_interval` steps. Never waits on the
/// memory: before the first publish, or while it is unreachable, it keeps
/// acting with whatever it has (uniform random actions if nothing yet).
class ActorWorker {
 public:
  struct Step {
    double reward = 0.0;
    bool random_action = false;
    bool episode_end = false;
    env::StepInfo info;
  };

  ActorWorker(std::size_t id, const env::EnvConfig& config, std::uint64_t env_seed, math::SeededRng rng,
              agents::ReplayBuffer& buffer, const ParameterMemory& memory, std::size_t refresh_interval,
              std::uint64_t start_timesteps);

  /// One environment step. `global_index` is the run-wide transition index;
  /// indices below start_timesteps act uniformly at random.
  Step step(std::uint64_t global_index);

  std::size_t id() const noexcept { return id_; }
  std::uint64_t steps() const noexcept { return steps_; }
  std::uint64_t refreshes() const noexcept { return refreshes_; }
  std::uint64_t policy_version() const noexcept { return version_; }
  /// Steps since the local policy last changed (or since start).
  std::uint64_t staleness() const noexcept { return age_; }
  std::uint64_t max_staleness() const noexcept { return max_age_; }
  const StalenessHistogram& staleness_histogram() const noexcept { return histogram_; }
  bool has_policy() const noexcept { return policy_.has_value(); }

 private:
  void refresh();

  std::size_t id_;
  env::SlicingEnv env_;
  math::SeededRng rng_;
  agents::ReplayBuffer& buffer_;
  const ParameterMemory& memory_;
  std::size_t refresh_interval_;
  std::uint64_t start_timesteps_;
  std::vector<double> state_;
  std::optional<agents::PolicyModel> policy_;
  std::uint64_t version_ = 0;
  std::uint64_t steps_ = 0;
  std::uint64_t refreshes_ = 0;
  std::uint64_t age_ = 0;
  std::uint64_t max_age_ = 0;
  StalenessHistogram histogram_;
};

/// Trainer over one or more buffers, sampled round-robin. Publishes its policy
/// every `publish_interval` updates.
class LearnerWorker {
 public:
  enum class Result { Updated, Idle, Failed };

  /// Consecutive non-finite updates tolerated before the learner halts.
  static constexpr int kMaxNumericFailures = 5;

  LearnerWorker(std::size_t id, std::unique_ptr<agents::Agent> agent, std::vector<agents::ReplayBuffer*> buffers,
                ParameterMemory& memory, std::size_t publish_interval, math::SeededRng rng);

  /// Samples from the next buffer that can fill a batch and runs one update.
  /// Idle when no assigned buffer is ready.
  Result try_update(agents::UpdateStats* stats = nullptr);

  std::size_t id() const noexcept { return id_; }
  std::uint64_t updates() const noexcept { return updates_; }
  std::uint64_t publishes() const noexcept { return publishes_; }
  std::uint64_t numeric_failures() const noexcept { return numeric_failures_; }
  bool failed() const noexcept { return failed_; }
  const agents::Agent& agent() const noexcept { return *agent_; }
  agents::Agent& agent() noexcept { return *agent_; }

 private:
  std::size_t id_;
  std::unique_ptr<agents::Agent> agent_;
  std::vector<agents::ReplayBuffer*> buffers_;
  ParameterMemory& memory_;
  std::size_t publish_interval_;
  math::SeededRng rng_;
  std::size_t next_buffer_ = 0;
  std::uint64_t updates_ = 0;
  std::uint64_t publishes_ = 0;
  std::uint64_t numeric_failures_ = 0;
  int consecutive_failures_ = 0;
  bool failed_ = false;
};

}  // namespace csac::runtime
