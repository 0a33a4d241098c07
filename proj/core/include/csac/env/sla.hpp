#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "csac/env/config.hpp"
#include "csac/env/delay.hpp"

namespace csac::env {

/// 1-based rank j = floor(Q (t + 1) / 100), clamped to [1, t]. Requires t >= 1.
std::size_t percentile_rank(double q, std::size_t t);

/// Order statistic z_j of `samples` for the rank above; nullopt when empty.
std::optional<double> percentile(std::span<const double> samples, double q);

/// Append-only latency store for one slice, with an O(log n) running
/// percentile at a fixed Q (two heaps split at rank j).
class SlaWindow {
 public:
  explicit SlaWindow(double tracked_q = 95.0) : q_(tracked_q) {}

  void append(double delay_s);
  void clear();

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double tracked_q() const noexcept { return q_; }
  /// Samples in insertion order.
  std::span<const double> samples() const noexcept { return samples_; }

  /// f_Q at the tracked Q; nullopt when no samples were recorded.
  std::optional<double> tracked_percentile() const;
  /// f_Q at an arbitrary Q (copies and selects).
  std::optional<double> percentile(double q) const;

 private:
  double q_;
  std::vector<double> samples_;
  std::priority_queue<double> lower_;                                        // j smallest
  std::priority_queue<double, std::vector<double>, std::greater<>> upper_;  // the rest
};

struct PenaltyResult {
  double total = 0.0;                       // sum of Omega over all tasks (<= 0)
  std::vector<std::size_t> violating_tasks;  // per slice
  std::vector<bool> percentile_violated;     // per slice
};

/// Omega_{l,m} = -rho_l when (cycles_m > threshold_l) or (f_Q^l > eta_l).
/// `windows` must already contain the current slot's delays. An empty window
/// is never a percentile violation.
PenaltyResult penalty(std::span<const UserTask> tasks, std::span<const SlaWindow> windows,
                      std::span<const SliceSpec> slices);

/// Latency floor applied before inverting the mean delay.
inline constexpr double kMinDelayS = 1e-6;

/// r = 1 / mean(delays) + penalty; a slot without tasks yields just the penalty.
double reward(std::span<const double> delays_s, double penalty_total);

}  // namespace csac::env
