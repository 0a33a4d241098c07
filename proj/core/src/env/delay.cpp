#include "csac/env/delay.hpp"

#include <algorithm>

#include "csac/errors.hpp"

namespace csac::env {

DelayBreakdown compute_delay(std::span<const UserTask> tasks, std::span<const double> slice_cpu_cps,
                             std::size_t ap_count, const Topology& topo, double delay_cap_s) {
  std::vector<std::size_t> per_slice(slice_cpu_cps.size(), 0);
  std::vector<std::size_t> per_ap(ap_count, 0);
  DelayBreakdown out;
  out.fronthaul_load_bps.assign(ap_count, 0.0);
  out.fronthaul_violation.assign(ap_count, false);

  for (const auto& t : tasks) {
    if (t.slice >= per_slice.size()) throw DimensionError("compute_delay: task slice out of range");
    if (t.serving_ap >= ap_count) throw DimensionError("compute_delay: serving AP out of range");
    ++per_slice[t.slice];
    ++per_ap[t.serving_ap];
    out.fronthaul_load_bps[t.serving_ap] += t.rate_bps;
  }
  for (std::size_t n = 0; n < ap_count; ++n) {
    out.fronthaul_violation[n] = out.fronthaul_load_bps[n] > topo.fronthaul_capacity_bps;
  }

  out.total_s.reserve(tasks.size());
  out.compute_s.reserve(tasks.size());
  out.queue_s.reserve(tasks.size());
  for (const auto& t : tasks) {
    const double pool = slice_cpu_cps[t.slice];
    const std::size_t competing = per_ap[t.serving_ap] - 1;
    const double queue = topo.max_burst_bits * static_cast<double>(competing) / topo.fronthaul_capacity_bps;
    double compute = delay_cap_s;
    bool capped = true;
    if (pool > 0.0 && t.rate_bps > 0.0) {
      const double speed = pool / static_cast<double>(per_slice[t.slice]);
      compute = t.cycles / speed;
      capped = compute + queue > delay_cap_s;
    }
    const double total = capped ? delay_cap_s : compute + queue;
    out.compute_s.push_back(compute);
    out.queue_s.push_back(queue);
    out.total_s.push_back(total);
    if (capped) ++out.capped;
  }
  return out;
}

}  // namespace csac::env
