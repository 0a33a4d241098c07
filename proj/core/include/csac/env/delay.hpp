#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csac/env/config.hpp"

namespace csac::env {

struct UserTask {
  std::size_t user = 0;
  std::size_t slice = 0;
  std::size_t serving_ap = 0;
  double size_bits = 0.0;
  double cycles = 0.0;          // zeta * size_bits
  double power_w = 0.0;
  double rate_bps = 0.0;
  double transmission_s = 0.0;  // size / rate, +inf when the rate is zero
};

struct DelayBreakdown {
  std::vector<double> total_s;           // per task
  std::vector<double> compute_s;         // per task
  std::vector<double> queue_s;           // per task
  std::vector<double> fronthaul_load_bps;  // per AP
  std::vector<bool> fronthaul_violation;   // per AP
  std::size_t capped = 0;                // tasks whose delay hit the ceiling
};

/// Per-task delay for one slot.
///
/// Computing speed is an equal split of the slice's CPU pool among the slice's
/// active tasks; compute delay = cycles / speed. Queuing on the serving
/// fronthaul = burst * (users on the AP - 1) / capacity. Totals are capped at
/// `delay_cap_s`, and a task with zero CPU or zero rate gets the cap outright.
DelayBreakdown compute_delay(std::span<const UserTask> tasks, std::span<const double> slice_cpu_cps,
                             std::size_t ap_count, const Topology& topo, double delay_cap_s);

}  // namespace csac::env
