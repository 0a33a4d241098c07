#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "csac/agents/replay_buffer.hpp"
#include "csac/math/mlp.hpp"
#include "csac/math/rng.hpp"
#include "csac/math/serialize.hpp"

namespace csac::agents {

enum class Algo : std::uint8_t { Csac = 0, Sac6 = 1, Ddpg = 2 };

std::string_view to_string(Algo a) noexcept;
std::optional<Algo> parse_algo(std::string_view name) noexcept;

struct Hyper {
  std::size_t batch_size = 128;
  std::size_t hidden_layers = 2;
  std::size_t hidden_width = 64;
  /// nullopt picks the algorithm default (GELU for csac, ReLU otherwise).
  std::optional<math::Activation> activation;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;
  double gamma = 0.9;
  double tau = 0.001;
  std::size_t freq = 2;
  double initial_alpha = 0.1;
  /// NaN selects -action_dim.
  double target_entropy = std::numeric_limits<double>::quiet_NaN();
  /// Multiplies rewards before they enter the critic targets.
  double reward_scale = 0.01;
  double ddpg_noise_std = 0.1;
  std::size_t start_timesteps = 1000;
  std::size_t max_timesteps = 20000;
  std::size_t replay_capacity = 100000;
  std::uint64_t seed = 0;

  math::Activation activation_for(Algo algo) const noexcept;
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Desk-scale defaults; `paper_scale` switches to 5 x 128 hidden layers,
/// 250000 steps and 10000 warm-up steps.
Hyper default_hyper(bool paper_scale = false);

enum class ActMode { Explore, Eval };

/// The part of an agent that actors need: enough to pick actions.
struct PolicyModel {
  Algo algo = Algo::Csac;
  math::Mlp net;
  std::size_t action_dim = 0;
  double exploration_std = 0.0;  // DDPG only

  friend bool operator==(const PolicyModel&, const PolicyModel&) = default;
};

/// Stochastic policies: explore = tanh(mean + std * noise), eval = tanh(mean).
/// Deterministic policies: eval = mu(s), explore = clip(mu(s) + N(0, std^2), -1, 1).
std::vector<double> select_action(const PolicyModel& policy, std::span<const double> state, ActMode mode,
                                  math::SeededRng& rng);

/// Uniform random action in [-1, 1]^dim, used before learning starts.
std::vector<double> random_action(std::size_t action_dim, math::SeededRng& rng);

void write_policy(math::BinaryWriter& w, const PolicyModel& p);
PolicyModel read_policy(math::BinaryReader& r);

struct UpdateStats {
  double q_loss = std::numeric_limits<double>::quiet_NaN();
  double pi_loss = std::numeric_limits<double>::quiet_NaN();
  double alpha_loss = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double entropy = std::numeric_limits<double>::quiet_NaN();  // -mean log pi on the batch
  bool delayed = false;  // policy / temperature / targets were updated
};

struct UpdateCounters {
  std::uint64_t learner_steps = 0;
  std::uint64_t q_updates = 0;
  std::uint64_t policy_updates = 0;
  std::uint64_t alpha_updates = 0;
  std::uint64_t target_updates = 0;

  friend bool operator==(const UpdateCounters&, const UpdateCounters&) = default;
};

/// A learner-side replica: all networks, optimisers and counters.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual Algo algo() const noexcept = 0;
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t action_dim() const noexcept { return action_dim_; }
  const Hyper& hyper() const noexcept { return hyper_; }

  /// Every network the agent owns, targets included.
  virtual std::vector<const math::Mlp*> networks() const = 0;
  std::size_t network_count() const { return networks().size(); }
  std::size_t parameter_count() const;

  /// One learner step on `batch`. Throws NumericError when a loss or gradient
  /// is non-finite; in that case no parameter is changed by the failing stage.
  virtual UpdateStats update(const Batch& batch, math::SeededRng& rng) = 0;

  virtual PolicyModel policy_model() const = 0;
  std::vector<double> act(std::span<const double> state, ActMode mode, math::SeededRng& rng) const {
    return select_action(policy_model(), state, mode, rng);
  }

  const UpdateCounters& counters() const noexcept { return counters_; }
  virtual double alpha() const noexcept { return 0.0; }
  bool all_finite() const;

  /// Nets, log alpha and counters after a header identifying algorithm and sizes.
  void save(std::ostream& out) const;
  /// Throws FormatError on a corrupt stream or an algorithm / shape mismatch.
  void load(std::istream& in);

 protected:
  Agent(std::size_t state_dim, std::size_t action_dim, Hyper hyper);

  virtual std::vector<math::Mlp*> mutable_networks() = 0;
  virtual double log_alpha() const noexcept { return 0.0; }
  virtual void set_log_alpha(double) {}

  std::size_t state_dim_, action_dim_;
  Hyper hyper_;
  UpdateCounters counters_;
};

std::unique_ptr<Agent> make_agent(Algo algo, std::size_t state_dim, std::size_t action_dim, const Hyper& hyper);

/// Networks each algorithm maintains: csac 5, sac6 6, ddpg 4.
std::size_t expected_network_count(Algo algo) noexcept;

}  // namespace csac::agents
