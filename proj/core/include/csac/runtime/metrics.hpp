#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "csac/agents/agent.hpp"
#include "csac/env/slicing_env.hpp"

namespace csac::runtime {

/// One logging interval. NaN marks a value with no samples in the interval
/// (no tasks on a slice, no learner updates yet, or timing in sequential mode).
struct MetricsRow {
  std::uint64_t step = 0;      // global transitions completed
  double mean_return = 0.0;    // mean per-step reward over the interval
  std::vector<double> lat_ms;  // per slice mean task latency
  std::vector<double> p95_ms;  // per slice percentile over the interval's tasks
  double alpha = 0.0;
  double q_loss = 0.0;
  double pi_loss = 0.0;
  double tps = 0.0;            // transitions per second over the interval
  double wall_s = 0.0;
};

/// Folds transitions and learner updates into MetricsRows every
/// `log_interval` transitions, plus a final partial row at `max_steps`.
/// Thread-safe; `on_row` runs under the accumulator's lock, so rows arrive in
/// step order.
class MetricsAccumulator {
 public:
  MetricsAccumulator(std::size_t slices, std::uint64_t log_interval, std::uint64_t max_steps, double percentile_q,
                     bool record_timing, std::function<void(const MetricsRow&)> on_row);

  void record_update(const agents::UpdateStats& stats);
  void record_step(double reward, const env::StepInfo& info);

  std::uint64_t steps() const;
  std::uint64_t rows() const;

 private:
  void emit_locked();

  std::size_t slices_;
  std::uint64_t log_interval_;
  std::uint64_t max_steps_;
  double q_;
  bool timing_;
  std::function<void(const MetricsRow&)> on_row_;

  mutable std::mutex mutex_;
  std::uint64_t steps_ = 0;
  std::uint64_t rows_ = 0;
  std::uint64_t interval_steps_ = 0;
  double reward_sum_ = 0.0;
  std::vector<std::vector<double>> latencies_s_;
  double alpha_sum_ = 0.0, q_sum_ = 0.0, pi_sum_ = 0.0;
  std::uint64_t alpha_n_ = 0, q_n_ = 0, pi_n_ = 0;
  std::chrono::steady_clock::time_point start_, interval_start_;
};

}  // namespace csac::runtime
