#include "csac/env/config.hpp"

#include <cmath>

#include "csac/errors.hpp"

namespace csac::env {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void EnvConfig::validate() const {
  const auto& t = topology;
  require(t.ap_count >= 1, "topology.ap_count must be >= 1");
  require(t.max_users >= 1, "topology.max_users must be >= 1");
  require(positive(t.slot_s), "topology.slot_s must be > 0");
  require(positive(t.bandwidth_hz), "topology.bandwidth_hz must be > 0");
  require(positive(t.noise_w), "topology.noise_w must be > 0");
  require(positive(t.bf_noise_w), "topology.bf_noise_w must be > 0");
  require(std::isfinite(t.antenna_gain_db), "topology.antenna_gain_db must be finite");
  require(non_negative(t.shadowing_db), "topology.shadowing_db must be >= 0");
  require(positive(t.min_distance_km), "topology.min_distance_km must be > 0");
  require(positive(t.max_distance_km) && t.max_distance_km >= t.min_distance_km,
          "topology.max_distance_km must be >= min_distance_km");
  require(positive(t.max_power_w), "topology.max_power_w must be > 0");
  require(positive(t.cpu_max_cps), "topology.cpu_max_cps must be > 0");
  require(positive(t.cycles_per_bit), "topology.cycles_per_bit must be > 0");
  require(positive(t.max_burst_bits), "topology.max_burst_bits must be > 0");
  require(positive(t.fronthaul_capacity_bps), "topology.fronthaul_capacity_bps must be > 0");

  require(!slices.empty(), "at least one slice is required");
  for (const auto& s : slices) {
    const std::string p = "slice '" + s.name + "': ";
    require(non_negative(s.traffic_mean), p + "traffic_mean must be >= 0");
    require(non_negative(s.traffic_std), p + "traffic_std must be >= 0");
    require(positive(s.latency_bound_s), p + "latency_bound_ms must be > 0");
    require(positive(s.cpu_threshold_cycles), p + "cpu_threshold_cycles must be > 0");
    require(non_negative(s.penalty), p + "penalty must be >= 0");
    require(positive(s.cpu_share), p + "cpu_share must be > 0");
  }
  require(sla_percentile > 0.0 && sla_percentile < 100.0, "sla.percentile must be in (0, 100)");
  require(episode_len >= 1, "episode.length must be >= 1");
  require(positive(task_min_bits) && task_max_bits >= task_min_bits,
          "traffic.task_min_bits and traffic.task_max_bits must satisfy 0 < min <= max");
  require(positive(delay_cap_s), "sla.delay_cap_s must be > 0");
}

EnvConfig default_env_config() {
  EnvConfig c;
  const double threshold = 0.3 * c.topology.cpu_max_cps;
  c.slices = {
      {"A", 2.0, 1.0, 0.010, threshold, 0.1, 2.0},
      {"B", 4.0, 1.0, 0.020, threshold, 0.1, 4.0},
      {"C", 4.0, 1.0, 0.015, threshold, 0.1, 4.0},
  };
  return c;
}

}  // namespace csac::env
