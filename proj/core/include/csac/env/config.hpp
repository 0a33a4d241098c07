#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace csac::env {

struct SliceSpec {
  std::string name;
  double traffic_mean = 0.0;          // mu_l, requests per slot
  double traffic_std = 0.0;           // sigma_l
  double latency_bound_s = 0.0;       // eta_l
  double cpu_threshold_cycles = 0.0;  // Delta_th,l, per task
  double penalty = 0.0;               // rho_l
  double cpu_share = 1.0;             // relative weight of the slice in the CPU pool
};

struct Topology {
  std::size_t ap_count = 10;
  std::size_t max_users = 17;
  double slot_s = 1.0;
  double bandwidth_hz = 10e6;
  double noise_w = 6.309573444801943e-14;     // -102 dBm
  double bf_noise_w = 6.309573444801943e-14;  // sigma_v^2, equal to the background noise
  double antenna_gain_db = 9.0;
  double shadowing_db = 8.0;
  bool small_scale_fading = true;
  double max_distance_km = 0.6;
  double min_distance_km = 0.001;
  bool pathloss_log10 = false;
  double max_power_w = 1.0;
  double cpu_max_cps = 8e12;             // Delta_max
  double cycles_per_bit = 100.0;         // zeta
  double max_burst_bits = 1e6;           // psi
  double fronthaul_capacity_bps = 1e9;   // phi_n,th
};

enum class SlaScope { Global, PerEpisode };

struct EnvConfig {
  Topology topology;
  std::vector<SliceSpec> slices;
  double sla_percentile = 95.0;
  std::size_t episode_len = 200;
  double task_min_bits = 2e6;
  double task_max_bits = 2e7;
  double delay_cap_s = 1.0;
  bool penalize_fronthaul = false;
  SlaScope sla_scope = SlaScope::Global;

  std::size_t slice_count() const noexcept { return slices.size(); }
  std::size_t state_dim() const noexcept { return 4 * slices.size(); }
  std::size_t action_dim() const noexcept { return slices.size() + 1; }

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Three slices A/B/C with eta = [10, 20, 15] ms and the desk-scale defaults.
EnvConfig default_env_config();

}  // namespace csac::env
