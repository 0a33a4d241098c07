#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csac/env/channel.hpp"
#include "csac/env/config.hpp"
#include "csac/env/delay.hpp"
#include "csac/env/sla.hpp"
#include "csac/math/rng.hpp"

namespace csac::env {

/// Spectral efficiency (bit/s/Hz) that maps to 1.0 in the rate block of the state.
inline constexpr double kRateNormBitsPerHz = 64.0;

/// Raw agent output mapped onto physical bounds.
struct MappedAction {
  std::vector<double> slice_power_w;  // in [0, P_max]
  double cpu_scaling = 0.0;           // o in [-demand, Delta_max - demand]
  double cpu_total_cps = 0.0;         // demand + o, in [0, Delta_max]
  std::vector<double> slice_cpu_cps;  // pool split by cpu_share
  std::size_t clipped = 0;            // raw components outside [-1, 1]
};

/// Maps u in [-1, 1]^(L+1): power_l = (u_l + 1)/2 * P_max and the last
/// component onto [-demand, Delta_max - demand]. Out-of-range and non-finite
/// components are clipped (NaN -> -1) and counted.
MappedAction map_action(std::span<const double> raw, const EnvConfig& config, double demand_cycles);

struct StepInfo {
  std::vector<UserTask> tasks;
  std::vector<double> delays_s;               // per task, same order as `tasks`
  std::vector<double> slice_mean_latency_s;   // this slot, 0 for idle slices
  std::vector<double> slice_percentile_s;     // running f_Q, NaN while a window is empty
  std::vector<std::size_t> slice_task_count;
  std::vector<std::size_t> slice_violations;  // tasks penalised this slot
  std::size_t clipped_actions = 0;
  std::size_t capped_delays = 0;
  std::size_t fronthaul_violations = 0;
  double penalty = 0.0;
  MappedAction action;
};

struct StepOutcome {
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

/// Slice-enabled cell-free downlink with per-slot arrivals, MMSE beamforming,
/// CPU vertical scaling and a running Q-th percentile latency SLA.
///
/// State (4L, each entry in [0, 1]): pending arrivals / M_max, last mean rate
/// per slice, last CPU pool per slice / Delta_max, last mean latency / D_cap.
/// The arrivals in the state are the ones served by the next `step`.
class SlicingEnv {
 public:
  explicit SlicingEnv(EnvConfig config);

  /// Starts an episode. With a seed the generator is reseeded; otherwise the
  /// stream continues. SLA windows are kept unless the scope is per-episode.
  std::vector<double> reset(std::optional<std::uint64_t> seed = std::nullopt);
  StepOutcome step(std::span<const double> raw_action);

  const EnvConfig& config() const noexcept { return config_; }
  std::span<const SlaWindow> windows() const noexcept { return windows_; }
  const std::vector<std::uint32_t>& pending_arrivals() const noexcept { return arrivals_; }
  std::size_t episode_step() const noexcept { return t_; }
  bool done() const noexcept { return done_; }
  std::size_t state_dim() const noexcept { return config_.state_dim(); }
  std::size_t action_dim() const noexcept { return config_.action_dim(); }

 private:
  std::vector<double> build_state() const;

  EnvConfig config_;
  math::SeededRng rng_;
  std::vector<SlaWindow> windows_;
  std::vector<std::uint32_t> arrivals_;
  std::vector<double> last_rate_;
  std::vector<double> last_cpu_;
  std::vector<double> last_latency_;
  std::size_t t_ = 0;
  bool started_ = false;
  bool done_ = false;
};

}  // namespace csac::env
