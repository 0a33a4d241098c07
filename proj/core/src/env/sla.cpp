#include "csac/env/sla.hpp"

#include <algorithm>
#include <cmath>

#include "csac/errors.hpp"

namespace csac::env {

std::size_t percentile_rank(double q, std::size_t t) {
  if (t == 0) throw StateError("percentile_rank: no samples");
  const double j = std::floor(q * static_cast<double>(t + 1) / 100.0);
  if (j < 1.0) return 1;
  return std::min(static_cast<std::size_t>(j), t);
}

std::optional<double> percentile(std::span<const double> samples, double q) {
  if (samples.empty()) return std::nullopt;
  std::vector<double> copy(samples.begin(), samples.end());
  const auto k = percentile_rank(q, copy.size()) - 1;
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k), copy.end());
  return copy[k];
}

void SlaWindow::append(double delay_s) {
  samples_.push_back(delay_s);
  if (!lower_.empty() && delay_s <= lower_.top()) {
    lower_.push(delay_s);
  } else {
    upper_.push(delay_s);
  }
  const std::size_t j = percentile_rank(q_, samples_.size());
  while (lower_.size() > j) {
    upper_.push(lower_.top());
    lower_.pop();
  }
  while (lower_.size() < j) {
    lower_.push(upper_.top());
    upper_.pop();
  }
}

void SlaWindow::clear() {
  samples_.clear();
  lower_ = {};
  upper_ = {};
}

std::optional<double> SlaWindow::tracked_percentile() const {
  if (lower_.empty()) return std::nullopt;
  return lower_.top();
}

std::optional<double> SlaWindow::percentile(double q) const { return env::percentile(samples_, q); }

PenaltyResult penalty(std::span<const UserTask> tasks, std::span<const SlaWindow> windows,
                      std::span<const SliceSpec> slices) {
  if (windows.size() != slices.size()) throw DimensionError("penalty: one window per slice required");
  PenaltyResult r;
  r.violating_tasks.assign(slices.size(), 0);
  r.percentile_violated.assign(slices.size(), false);
  for (std::size_t l = 0; l < slices.size(); ++l) {
    const auto f = windows[l].tracked_percentile();
    r.percentile_violated[l] = f.has_value() && *f > slices[l].latency_bound_s;
  }
  for (const auto& t : tasks) {
    const auto& s = slices[t.slice];
    if (t.cycles > s.cpu_threshold_cycles || r.percentile_violated[t.slice]) {
      r.total -= s.penalty;
      ++r.violating_tasks[t.slice];
    }
  }
  return r;
}

double reward(std::span<const double> delays_s, double penalty_total) {
  if (delays_s.empty()) return penalty_total;
  double sum = 0.0;
  for (double d : delays_s) sum += std::max(d, kMinDelayS);
  return static_cast<double>(delays_s.size()) / sum + penalty_total;
}

}  // namespace csac::env
