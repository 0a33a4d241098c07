#include "csac/app/commands.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "csac/app/metrics_csv.hpp"
#include "csac/errors.hpp"

namespace csac::app {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed on " + path.string());
}

void make_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

double mean_skipping_nan(const std::vector<double>& xs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    if (!std::isnan(x)) {
      sum += x;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : kNaN;
}

BenchTrial summarize(agents::Algo algo, std::size_t k, const RunConfig& cfg, const TrainResult& tr) {
  BenchTrial t;
  t.algo = algo;
  t.trial = k;
  t.seed = cfg.seed;
  t.exit_code = tr.exit_code;
  t.networks = agents::expected_network_count(algo);
  const std::uint64_t max = cfg.hyper.max_timesteps;
  t.final_return = window_return(tr.rows, max - final_window(max), max);
  std::vector<double> last;
  for (std::size_t i = tr.rows.size() >= 5 ? tr.rows.size() - 5 : 0; i < tr.rows.size(); ++i)
    last.push_back(tr.rows[i].mean_return);
  std::ranges::sort(last, std::greater<>());
  last.resize(std::min<std::size_t>(3, last.size()));
  t.best3of5 = mean_skipping_nan(last);
  std::vector<double> lat;
  for (const auto& r : tr.rows) {
    if (r.step > max - final_window(max)) lat.insert(lat.end(), r.lat_ms.begin(), r.lat_ms.end());
  }
  t.latency_ms = mean_skipping_nan(lat);
  t.wall_s = tr.ledger.wall_s;
  t.tps = tr.ledger.transitions_per_s;
  return t;
}

}  // namespace

std::uint64_t final_window(std::uint64_t max_steps) { return std::min<std::uint64_t>(1000, max_steps / 2); }

std::pair<double, double> mean_ci95(const std::vector<double>& xs) {
  if (xs.empty()) return {kNaN, kNaN};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return {mean, t * sd / std::sqrt(n)};
}

TrainResult train(const RunConfig& config, std::ostream* log) {
  TrainResult res;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    res.exit_code = kExitInvalidConfig;
    res.message = e.what();
    return res;
  }
  bool io_failed = false;
  try {
    make_out_dir(config.out_dir);
    write_file(config.out_dir / "config.ini", to_ini(config));
    MetricsCsvWriter writer(config.out_dir / "metrics.csv", config.env.slice_count());

    runtime::RunOptions opt;
    opt.log = log;
    opt.heartbeat_s = config.heartbeat_s;
    opt.timeout_s = config.timeout_s;
    opt.percentile_q = config.env.sla_percentile;
    opt.on_row = [&](const runtime::MetricsRow& row) {
      res.rows.push_back(row);
      try {
        writer.write(row);
      } catch (const IoError&) {
        io_failed = true;
        throw;
      }
    };
    auto run = runtime::run_class(config.env, config.algo, config.hyper, config.cls, config.seed, opt);
    res.ledger = std::move(run.ledger);

    write_file(config.out_dir / "checkpoint.bin", run.checkpoint);
    std::ostringstream ledger;
    res.ledger.write(ledger);
    ledger << "checkpoint_learner = " << run.checkpoint_learner << '\n';
    ledger << "wall_s = " << res.ledger.wall_s << '\n';
    ledger << "transitions_per_s = " << res.ledger.transitions_per_s << '\n';
    write_file(config.out_dir / "ledger.txt", ledger.str());
    write_smoothed_dat(config.out_dir / "metrics_smoothed.dat", res.rows, config.env.slice_count());
  } catch (const IoError& e) {
    res.exit_code = kExitIoFailure;
    res.message = e.what();
    return res;
  }
  if (io_failed) {
    res.exit_code = kExitIoFailure;
    res.message = res.ledger.failure;
  } else if (res.ledger.numeric_failure) {
    res.exit_code = kExitNumericHalt;
    res.message = res.ledger.failure;
  } else if (res.ledger.failed || res.ledger.timed_out) {
    res.exit_code = kExitRunFailed;
    res.message = res.ledger.timed_out ? "watchdog timeout" : res.ledger.failure;
  }
  return res;
}

EvalResult eval(const RunConfig& config, const std::filesystem::path& checkpoint) {
  EvalResult res;
  std::optional<agents::PolicyModel> policy;
  try {
    config.validate();
    if (!checkpoint.empty()) {
      auto agent = agents::make_agent(config.algo, config.env.state_dim(), config.env.action_dim(), config.hyper);
      std::ifstream in(checkpoint, std::ios::binary);
      if (!in) throw FormatError("cannot open checkpoint " + checkpoint.string());
      agent->load(in);
      policy = agent->policy_model();
    }
    res.report = evaluate(config.env, policy ? &*policy : nullptr, config.eval_episodes, config.seed);
  } catch (const ConfigError& e) {
    res.exit_code = kExitInvalidConfig;
    res.message = e.what();
    return res;
  } catch (const FormatError& e) {
    res.exit_code = kExitInvalidConfig;
    res.message = std::string("checkpoint does not match the configuration: ") + e.what();
    return res;
  }
  try {
    make_out_dir(config.out_dir);
    std::ostringstream report, curves;
    res.report.write(report);
    res.report.write_curves(curves);
    write_file(config.out_dir / "eval_report.txt", report.str());
    write_file(config.out_dir / "eval_curves.dat", curves.str());
  } catch (const IoError& e) {
    res.exit_code = kExitIoFailure;
    res.message = e.what();
  }
  return res;
}

void BenchResult::write_csv(std::ostream& out) const {
  out << "kind,algo,trial,seed,status,networks,final_return,final_return_ci95,best3of5_return,best3of5_ci95,"
         "lat_ms,lat_ms_ci95,wall_s,wall_s_ci95,tps,tps_ci95\r\n";
  for (const auto& t : trials) {
    out << "trial," << agents::to_string(t.algo) << ',' << t.trial << ',' << t.seed << ','
        << (t.exit_code == kExitOk ? "ok" : "failed(" + std::to_string(t.exit_code) + ")") << ',' << t.networks
        << ',' << format_metric(t.final_return) << ",," << format_metric(t.best3of5) << ",,"
        << format_metric(t.latency_ms) << ",," << format_metric(t.wall_s) << ",," << format_metric(t.tps)
        << ",\r\n";
  }
  for (const auto& a : aggregates) {
    out << "aggregate," << agents::to_string(a.algo) << ',' << a.ok_trials << ",,"
        << (a.ok_trials ? "ok" : "no_trials") << ',' << a.networks;
    for (const auto& [m, h] : {a.final_return, a.best3of5, a.latency_ms, a.wall_s, a.tps})
      out << ',' << format_metric(m) << ',' << format_metric(h);
    out << "\r\n";
  }
}

BenchResult bench(const RunConfig& config, const std::vector<agents::Algo>& algos, std::size_t trials,
                  std::ostream* log) {
  BenchResult res;
  if (algos.empty() || trials == 0) {
    res.exit_code = kExitInvalidConfig;
    return res;
  }
  for (auto algo : algos) {
    BenchAggregate agg;
    agg.algo = algo;
    agg.networks = agents::expected_network_count(algo);
    std::vector<double> ret, best, lat, wall, tps;
    for (std::size_t k = 0; k < trials; ++k) {
      RunConfig cfg = config;
      cfg.algo = algo;
      cfg.seed = config.seed + k;
      cfg.out_dir = config.out_dir / (std::string(agents::to_string(algo)) + "_" + std::to_string(k));
      if (log) *log << "bench " << agents::to_string(algo) << " trial " << k << " seed " << cfg.seed << '\n';
      const auto tr = train(cfg, log);
      if (tr.exit_code == kExitInvalidConfig) {
        res.exit_code = kExitInvalidConfig;
        return res;
      }
      const auto t = summarize(algo, k, cfg, tr);
      res.trials.push_back(t);
      if (t.exit_code != kExitOk) {
        res.exit_code = kExitRunFailed;
        continue;
      }
      ++agg.ok_trials;
      ret.push_back(t.final_return);
      best.push_back(t.best3of5);
      lat.push_back(t.latency_ms);
      wall.push_back(t.wall_s);
      tps.push_back(t.tps);
    }
    agg.final_return = mean_ci95(ret);
    agg.best3of5 = mean_ci95(best);
    agg.latency_ms = mean_ci95(lat);
    agg.wall_s = mean_ci95(wall);
    agg.tps = mean_ci95(tps);
    res.aggregates.push_back(agg);
  }
  try {
    make_out_dir(config.out_dir);
    std::ostringstream csv;
    res.write_csv(csv);
    write_file(config.out_dir / "bench.csv", csv.str());
  } catch (const IoError&) {
    res.exit_code = kExitIoFailure;
  }
  return res;
}

}  // namespace csac::app
