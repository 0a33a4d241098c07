#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "csac/agents/agent.hpp"
#include "csac/env/config.hpp"

namespace csac::app {

/// Q values of the reported percentile curve: 5, 10, ..., 95, 99.
std::vector<double> eval_quantiles();

struct SliceEval {
  std::string name;
  double bound_ms = 0.0;
  std::size_t tasks = 0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  std::vector<std::pair<double, double>> curve;  // (Q, latency ms)
  double sla_ms = 0.0;                           // f_Q at the SLA percentile
  bool pass = false;
};

struct EvalReport {
  std::string policy;  // "checkpoint" or "random"
  std::size_t episodes = 0;
  double sla_percentile = 95.0;
  double mean_reward = 0.0;
  std::vector<SliceEval> slices;

  std::size_t passes() const;
  void write(std::ostream& out) const;
  /// gnuplot block per slice: Q latency_ms.
  void write_curves(std::ostream& out) const;
};

/// Runs `episodes` episodes with deterministic actions from `policy`, or with
/// uniform random actions when `policy` is null, and reports per-slice
/// latency percentiles. Slices with no tasks fail.
EvalReport evaluate(const env::EnvConfig& config, const agents::PolicyModel* policy, std::size_t episodes,
                    std::uint64_t seed);

}  // namespace csac::app
