#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "csac/app/eval.hpp"
#include "csac/app/run_config.hpp"
#include "csac/runtime/class_runner.hpp"

namespace csac::app {

/// Process exit codes of the csac tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitRunFailed = 1,      // component crash or watchdog timeout
  kExitInvalidConfig = 2,  // bad config, flags, or checkpoint/config mismatch
  kExitNumericHalt = 3,    // a learner halted on repeated non-finite updates
  kExitIoFailure = 4,      // an output file could not be written
};

struct TrainResult {
  int exit_code = kExitOk;
  std::string message;
  runtime::RunLedger ledger;
  std::vector<runtime::MetricsRow> rows;
};

/// Runs one class and writes into config.out_dir:
///   config.ini            resolved configuration (rerunnable with --config)
///   metrics.csv           one row per log interval
///   metrics_smoothed.dat  trailing mean of 10 rows
///   checkpoint.bin        agent followed by the actors at the end
///   ledger.txt            run ledger
TrainResult train(const RunConfig& config, std::ostream* log = nullptr);

struct EvalResult {
  int exit_code = kExitOk;
  std::string message;
  EvalReport report;
};

/// Evaluates `checkpoint` (or a random policy when the path is empty) and
/// writes eval_report.txt and eval_curves.dat into config.out_dir.
EvalResult eval(const RunConfig& config, const std::filesystem::path& checkpoint);

struct BenchTrial {
  agents::Algo algo = agents::Algo::Csac;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  int exit_code = kExitOk;
  std::size_t networks = 0;
  double final_return = 0.0;  // mean per-step reward over the final window
  double best3of5 = 0.0;      // mean of the best 3 of the last 5 logged returns
  double latency_ms = 0.0;    // mean over slices of the final-window mean latency
  double wall_s = 0.0;
  double tps = 0.0;
};

struct BenchAggregate {
  agents::Algo algo = agents::Algo::Csac;
  std::size_t ok_trials = 0;
  std::size_t networks = 0;
  // mean and 95% Student-t half-width over successful trials
  std::pair<double, double> final_return, best3of5, latency_ms, wall_s, tps;
};

struct BenchResult {
  int exit_code = kExitOk;
  std::vector<BenchTrial> trials;
  std::vector<BenchAggregate> aggregates;
  void write_csv(std::ostream& out) const;
};

/// Trains every algorithm `trials` times with seeds config.seed + k, each into
/// out_dir/<algo>_<k>, and writes out_dir/bench.csv. Failed trials are
/// marked and excluded from the aggregates.
BenchResult bench(const RunConfig& config, const std::vector<agents::Algo>& algos, std::size_t trials,
                  std::ostream* log = nullptr);

/// Final window used by bench: the last min(1000, max_steps / 2) steps.
std::uint64_t final_window(std::uint64_t max_steps);

/// Mean and 95% Student-t confidence half-width; half-width is 0 for n < 2.
std::pair<double, double> mean_ci95(const std::vector<double>& xs);

}  // namespace csac::app
