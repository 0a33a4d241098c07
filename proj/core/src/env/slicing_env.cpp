#include "csac/env/slicing_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csac/env/traffic.hpp"
#include "csac/errors.hpp"

namespace csac::env {

namespace {

double clip_unit(double u, std::size_t& clipped) {
  if (std::isnan(u)) {
    ++clipped;
    return -1.0;
  }
  if (u < -1.0 || u > 1.0) {
    ++clipped;
    return std::clamp(u, -1.0, 1.0);
  }
  return u;
}

}  // namespace

MappedAction map_action(std::span<const double> raw, const EnvConfig& config, double demand_cycles) {
  const std::size_t slices = config.slice_count();
  if (raw.size() != slices + 1) throw DimensionError("map_action: expected L + 1 action components");
  const auto& topo = config.topology;
  MappedAction a;
  a.slice_power_w.resize(slices);
  for (std::size_t l = 0; l < slices; ++l) {
    const double u = clip_unit(raw[l], a.clipped);
    a.slice_power_w[l] = 0.5 * (u + 1.0) * topo.max_power_w;
  }
  const double frac = 0.5 * (clip_unit(raw[slices], a.clipped) + 1.0);
  a.cpu_total_cps = frac * topo.cpu_max_cps;
  a.cpu_scaling = a.cpu_total_cps - demand_cycles;

  double share_sum = 0.0;
  for (const auto& s : config.slices) share_sum += s.cpu_share;
  a.slice_cpu_cps.resize(slices);
  for (std::size_t l = 0; l < slices; ++l) {
    a.slice_cpu_cps[l] = a.cpu_total_cps * config.slices[l].cpu_share / share_sum;
  }
  return a;
}

SlicingEnv::SlicingEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto l = config_.slice_count();
  windows_.assign(l, SlaWindow(config_.sla_percentile));
  last_rate_.assign(l, 0.0);
  last_cpu_.assign(l, 0.0);
  last_latency_.assign(l, 0.0);
}

std::vector<double> SlicingEnv::reset(std::optional<std::uint64_t> seed) {
  if (seed) rng_ = math::SeededRng(*seed);
  if (config_.sla_scope == SlaScope::PerEpisode) {
    for (auto& w : windows_) w.clear();
  }
  std::ranges::fill(last_rate_, 0.0);
  std::ranges::fill(last_cpu_, 0.0);
  std::ranges::fill(last_latency_, 0.0);
  arrivals_ = sample_arrivals(config_.slices, config_.topology.slot_s, config_.topology.max_users, rng_);
  t_ = 0;
  started_ = true;
  done_ = false;
  return build_state();
}

StepOutcome SlicingEnv::step(std::span<const double> raw_action) {
  if (!started_) throw StateError("step called before reset");
  if (done_) throw StateError("step called on a finished episode");
  const auto& topo = config_.topology;
  const std::size_t slices = config_.slice_count();

  StepOutcome out;
  StepInfo& info = out.info;

  for (std::size_t l = 0; l < slices; ++l) {
    for (std::uint32_t k = 0; k < arrivals_[l]; ++k) {
      UserTask task;
      task.user = info.tasks.size();
      task.slice = l;
      task.size_bits = rng_.uniform(config_.task_min_bits, config_.task_max_bits);
      task.cycles = topo.cycles_per_bit * task.size_bits;
      info.tasks.push_back(task);
    }
  }
  const double demand = std::accumulate(info.tasks.begin(), info.tasks.end(), 0.0,
                                        [](double s, const UserTask& t) { return s + t.cycles; });
  info.action = map_action(raw_action, config_, demand);
  info.clipped_actions = info.action.clipped;

  info.slice_task_count.assign(slices, 0);
  info.slice_mean_latency_s.assign(slices, 0.0);
  std::vector<double> slice_rate(slices, 0.0);
  std::vector<bool> ap_overloaded(topo.ap_count, false);

  if (!info.tasks.empty()) {
    const auto channel = draw_channel(topo, info.tasks.size(), rng_);
    std::vector<double> powers(info.tasks.size());
    for (std::size_t m = 0; m < info.tasks.size(); ++m) {
      powers[m] = info.action.slice_power_w[info.tasks[m].slice];
    }
    const auto beams = beamform(channel.gains, powers, topo.bf_noise_w);
    const auto rates = compute_rates(channel.gains, beams, topo.bandwidth_hz, topo.noise_w);
    for (std::size_t m = 0; m < info.tasks.size(); ++m) {
      auto& t = info.tasks[m];
      t.serving_ap = channel.serving_ap[m];
      t.power_w = powers[m];
      t.rate_bps = rates[m];
      t.transmission_s = rates[m] > 0.0 ? t.size_bits / rates[m] : std::numeric_limits<double>::infinity();
    }
    const auto delay = compute_delay(info.tasks, info.action.slice_cpu_cps, topo.ap_count, topo,
                                     config_.delay_cap_s);
    info.delays_s = delay.total_s;
    info.capped_delays = delay.capped;
    ap_overloaded = delay.fronthaul_violation;
    info.fronthaul_violations =
        static_cast<std::size_t>(std::ranges::count(delay.fronthaul_violation, true));
    for (std::size_t m = 0; m < info.tasks.size(); ++m) {
      const auto l = info.tasks[m].slice;
      windows_[l].append(info.delays_s[m]);
      ++info.slice_task_count[l];
      info.slice_mean_latency_s[l] += info.delays_s[m];
      slice_rate[l] += info.tasks[m].rate_bps;
    }
    for (std::size_t l = 0; l < slices; ++l) {
      if (info.slice_task_count[l] > 0) {
        info.slice_mean_latency_s[l] /= static_cast<double>(info.slice_task_count[l]);
        slice_rate[l] /= static_cast<double>(info.slice_task_count[l]);
      }
    }
  }

  const auto pen = penalty(info.tasks, windows_, config_.slices);
  info.penalty = pen.total;
  if (config_.penalize_fronthaul && info.fronthaul_violations > 0) {
    // every task on an overloaded link is charged its slice penalty once more
    for (const auto& t : info.tasks) {
      if (ap_overloaded[t.serving_ap]) info.penalty -= config_.slices[t.slice].penalty;
    }
  }
  info.slice_violations = pen.violating_tasks;
  info.slice_percentile_s.resize(slices);
  for (std::size_t l = 0; l < slices; ++l) {
    info.slice_percentile_s[l] =
        windows_[l].tracked_percentile().value_or(std::numeric_limits<double>::quiet_NaN());
  }
  out.reward = reward(info.delays_s, info.penalty);

  last_rate_ = slice_rate;
  last_cpu_ = info.action.slice_cpu_cps;
  last_latency_ = info.slice_mean_latency_s;
  arrivals_ = sample_arrivals(config_.slices, topo.slot_s, topo.max_users, rng_);
  ++t_;
  done_ = t_ >= config_.episode_len;
  out.done = done_;
  out.state = build_state();
  return out;
}

std::vector<double> SlicingEnv::build_state() const {
  const auto& topo = config_.topology;
  const std::size_t slices = config_.slice_count();
  std::vector<double> s(4 * slices);
  auto unit = [](double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 1.0; };
  for (std::size_t l = 0; l < slices; ++l) {
    s[l] = unit(static_cast<double>(arrivals_[l]) / static_cast<double>(topo.max_users));
    s[slices + l] = unit(last_rate_[l] / (topo.bandwidth_hz * kRateNormBitsPerHz));
    s[2 * slices + l] = unit(last_cpu_[l] / topo.cpu_max_cps);
    s[3 * slices + l] = unit(last_latency_[l] / config_.delay_cap_s);
  }
  return s;
}

}  // namespace csac::env
