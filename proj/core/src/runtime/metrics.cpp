#include "csac/runtime/metrics.hpp"

#include <cmath>
#include <limits>

#include "csac/env/sla.hpp"
#include "csac/errors.hpp"

namespace csac::runtime {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_or_nan(double sum, std::uint64_t n) { return n == 0 ? kNaN : sum / static_cast<double>(n); }
}  // namespace

MetricsAccumulator::MetricsAccumulator(std::size_t slices, std::uint64_t log_interval, std::uint64_t max_steps,
                                       double percentile_q, bool record_timing,
                                       std::function<void(const MetricsRow&)> on_row)
    : slices_(slices),
      log_interval_(log_interval),
      max_steps_(max_steps),
      q_(percentile_q),
      timing_(record_timing),
      on_row_(std::move(on_row)),
      latencies_s_(slices),
      start_(std::chrono::steady_clock::now()),
      interval_start_(start_) {
  if (log_interval == 0) throw ConfigError("run.log_interval must be >= 1");
}

void MetricsAccumulator::record_update(const agents::UpdateStats& st) {
  std::lock_guard lock(mutex_);
  if (std::isfinite(st.alpha)) {
    alpha_sum_ += st.alpha;
    ++alpha_n_;
  }
  if (std::isfinite(st.q_loss)) {
    q_sum_ += st.q_loss;
    ++q_n_;
  }
  if (std::isfinite(st.pi_loss)) {
    pi_sum_ += st.pi_loss;
    ++pi_n_;
  }
}

void MetricsAccumulator::record_step(double reward, const env::StepInfo& info) {
  std::lock_guard lock(mutex_);
  if (steps_ >= max_steps_) return;
  ++steps_;
  ++interval_steps_;
  reward_sum_ += reward;
  for (std::size_t k = 0; k < info.tasks.size(); ++k) {
    const std::size_t l = info.tasks[k].slice;
    if (l < slices_) latencies_s_[l].push_back(info.delays_s[k]);
  }
  if (steps_ % log_interval_ == 0 || steps_ == max_steps_) emit_locked();
}

void MetricsAccumulator::emit_locked() {
  MetricsRow row;
  row.step = steps_;
  row.mean_return = reward_sum_ / static_cast<double>(interval_steps_);
  for (auto& lat : latencies_s_) {
    if (lat.empty()) {
      row.lat_ms.push_back(kNaN);
      row.p95_ms.push_back(kNaN);
    } else {
      double sum = 0.0;
      for (double d : lat) sum += d;
      row.lat_ms.push_back(1e3 * sum / static_cast<double>(lat.size()));
      row.p95_ms.push_back(1e3 * *env::percentile(lat, q_));
    }
    lat.clear();
  }
  row.alpha = mean_or_nan(alpha_sum_, alpha_n_);
  row.q_loss = mean_or_nan(q_sum_, q_n_);
  row.pi_loss = mean_or_nan(pi_sum_, pi_n_);
  const auto now = std::chrono::steady_clock::now();
  if (timing_) {
    const double dt = std::chrono::duration<double>(now - interval_start_).count();
    row.tps = dt > 0.0 ? static_cast<double>(interval_steps_) / dt : kNaN;
    row.wall_s = std::chrono::duration<double>(now - start_).count();
  } else {
    row.tps = kNaN;
    row.wall_s = kNaN;
  }
  interval_start_ = now;
  interval_steps_ = 0;
  reward_sum_ = 0.0;
  alpha_sum_ = q_sum_ = pi_sum_ = 0.0;
  alpha_n_ = q_n_ = pi_n_ = 0;
  ++rows_;
  if (on_row_) on_row_(row);
}

std::uint64_t MetricsAccumulator::steps() const {
  std::lock_guard lock(mutex_);
  return steps_;
}

std::uint64_t MetricsAccumulator::rows() const {
  std::lock_guard lock(mutex_);
  return rows_;
}

}  // namespace csac::runtime
