// Acceptance suite: one PASS/FAIL line per criterion.
//
//   csac_acceptance [--only N] [--out DIR]
//
// Training runs for criteria 6-8 and 10 are written under DIR (default
// ./acceptance_runs). Exit status is 0 only when every selected criterion
// passes.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "agent_probes.hpp"
#include "csac/agents/sac.hpp"
#include "csac/app/commands.hpp"
#include "csac/app/metrics_csv.hpp"
#include "csac/env/channel.hpp"
#include "csac/env/sla.hpp"
#include "csac/env/traffic.hpp"
#include "csac/runtime/class_runner.hpp"
#include "csac/runtime/memory.hpp"
#include "env_oracles.hpp"

using namespace csac;
using agents::Algo;
using math::SeededRng;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------- 1

Verdict math_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t checked = 0;
  auto take = [&](const oracle::GradCheckResult& r) {
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
  };
  for (Algo a : {Algo::Csac, Algo::Sac6}) {
    take(oracle::fd_check_q(a));
    take(oracle::fd_check_policy(a));
  }
  take(oracle::fd_check_alpha());
  take(oracle::fd_check_ddpg());
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0 && checked > 0,
          "max rel err " + fmt(worst) + " over " + std::to_string(checked) + " partials (J_Q, J_pi, J(alpha), ddpg) in " +
              fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- 2

math::ComplexMatrix random_gains(std::size_t n, std::size_t m, SeededRng& rng) {
  math::ComplexMatrix h(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) h(i, j) = {rng.normal(), rng.normal()};
  return h;
}

Verdict beamforming() {
  const auto t0 = std::chrono::steady_clock::now();
  SeededRng rng(2024);
  env::Topology topo;
  double power_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(16), m = 1 + rng.index(8);
    math::ComplexMatrix h;
    if (trial % 2) {
      h = random_gains(n, m, rng);
    } else {
      topo.ap_count = n;
      h = env::draw_channel(topo, m, rng).gains;
    }
    std::vector<double> p(m);
    for (auto& x : p) x = rng.uniform(0.0, 1.0);
    const auto v = env::beamform(h, p, topo.bf_noise_w);
    for (std::size_t j = 0; j < m; ++j) {
      const double norm = v.col(j).norm();
      power_err = std::max(power_err, std::abs(norm * norm - p[j]));
    }
  }
  double mf_err = 0.0;
  for (std::size_t n : {1u, 3u, 8u, 16u}) {
    const auto h = random_gains(n, 1, rng);
    const double p = rng.uniform(0.1, 1.0);
    const auto v = env::beamform(h, std::vector{p}, 1.0);
    for (std::size_t i = 0; i < n; ++i) mf_err = std::max(mf_err, std::abs(v(i, 0) - std::sqrt(p) * h(i, 0) / h.norm()));
  }
  const double secs = seconds_since(t0);
  return {power_err < 1e-9 && mf_err < 1e-12,
          "max | ||v_m||^2 - p_m | = " + fmt(power_err) + " on 1000 instances, matched-filter err " + fmt(mf_err) +
              ", " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------- 3

Verdict percentile_oracle() {
  std::vector<double> nineteen(19);
  std::iota(nineteen.begin(), nineteen.end(), 1.0);
  const bool worked = *env::percentile(nineteen, 95) == 19.0 && env::percentile_rank(95, 19) == 19;

  SeededRng rng(7);
  std::vector<double> samples;
  std::vector<env::SlaWindow> windows;
  for (int q = 1; q <= 99; ++q) windows.emplace_back(q);
  std::size_t compared = 0, mismatches = 0;
  for (int t = 1; t <= 200; ++t) {
    samples.push_back(t % 5 == 0 ? 0.25 : std::round(rng.uniform(0.0, 60.0)) / 4.0);
    for (int q = 1; q <= 99; ++q) {
      auto& w = windows[q - 1];
      w.append(samples.back());
      const double expected = oracle::naive_percentile(samples, q);
      mismatches += *env::percentile(samples, q) != expected;
      mismatches += *w.tracked_percentile() != expected;
      compared += 2;
    }
  }
  return {worked && mismatches == 0,
          std::to_string(compared) + " comparisons (t <= 200, Q = 1..99), " + std::to_string(mismatches) +
              " mismatches; {1..19} at Q=95 -> " + fmt(*env::percentile(nineteen, 95))};
}

// ---------------------------------------------------------------- 4

Verdict traffic_model() {
  constexpr int kSlots = 100000;
  std::string detail;
  bool ok = true;
  for (auto [mu, sigma] : {std::pair{4.0, 1.0}, {1.0, 1.5}}) {
    SeededRng rng(static_cast<std::uint64_t>(100 * mu + 10 * sigma));
    const std::vector<env::SliceSpec> slices{{"s", mu, sigma, 0.01, 1.0, 0.1, 1.0}};
    std::vector<double> xs(kSlots);
    for (auto& x : xs) x = env::sample_arrivals(slices, 1.0, 1000, rng)[0];
    const auto pmf = oracle::mixed_poisson_pmf(mu, sigma, 1.0, 80);
    double mean = 0.0, var = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) mean += static_cast<double>(k) * pmf[k];
    for (std::size_t k = 0; k < pmf.size(); ++k) var += std::pow(static_cast<double>(k) - mean, 2) * pmf[k];
    double m = 0.0, v = 0.0, m4 = 0.0;
    for (double x : xs) m += x;
    m /= kSlots;
    for (double x : xs) {
      v += (x - m) * (x - m);
      m4 += std::pow(x - m, 4);
    }
    v /= kSlots - 1.0;
    m4 /= kSlots;
    const double z_mean = std::abs(m - mean) / std::sqrt(var / kSlots);
    const double z_var = std::abs(v - var) / std::sqrt((m4 - v * v) / kSlots);
    ok = ok && z_mean < 3.0 && z_var < 3.0;
    detail += "mu=" + fmt(mu, 2) + ",sigma=" + fmt(sigma, 2) + ": z_mean " + fmt(z_mean, 3) + " z_var " +
              fmt(z_var, 3) + "; ";
  }
  SeededRng rng(99);
  const double lambda = 1.5, slot = 1.0;
  int zeros = 0;
  for (int i = 0; i < kSlots; ++i) zeros += env::sample_poisson_count(lambda, slot, rng) == 0;
  const double p = std::exp(-lambda * slot);
  const double z0 = std::abs(static_cast<double>(zeros) / kSlots - p) / std::sqrt(p * (1 - p) / kSlots);
  ok = ok && z0 < 3.0;
  detail += "P(0) z " + fmt(z0, 3) + " over 1e5 slots";
  return {ok, detail};
}

// ---------------------------------------------------------------- 5

Verdict sac_mechanics() {
  std::vector<std::string> problems;
  const auto h = oracle::small_hyper();

  agents::SacAgent cadence(Algo::Csac, 3, 2, h);
  SeededRng rng(3);
  for (int i = 0; i < 100; ++i) cadence.update(oracle::synthetic_batch(rng, 6, 3, 2), rng);
  const auto& c = cadence.counters();
  if (h.freq != 2 || c.q_updates != 100 || c.policy_updates != 50 || c.target_updates != 50)
    problems.push_back("cadence " + std::to_string(c.q_updates) + ":" + std::to_string(c.policy_updates) + ":" +
                       std::to_string(c.target_updates));

  agents::SacAgent polyak(Algo::Csac, 3, 2, h);
  for (auto* p : polyak.q1().parameters()) std::ranges::fill(p->values(), 1.0);
  for (auto* p : polyak.q1_target().parameters()) std::ranges::fill(p->values(), 0.0);
  polyak.update_targets();
  double polyak_err = 0.0;
  for (auto* p : polyak.q1_target().parameters())
    for (double w : p->values()) polyak_err = std::max(polyak_err, std::abs(w - 0.001));
  if (h.tau != 0.001 || polyak_err > 1e-15) problems.push_back("polyak err " + fmt(polyak_err));

  agents::SacAgent done_agent(Algo::Csac, 3, 2, h);
  const auto terminal = oracle::synthetic_batch(rng, 16, 3, 2, 1.0);
  const auto y = done_agent.td_target(terminal, rng);
  for (std::size_t i = 0; i < 16; ++i)
    if (y[i] != h.reward_scale * terminal.rewards[i]) {
      problems.push_back("terminal target != r");
      break;
    }

  std::string census;
  for (Algo a : {Algo::Csac, Algo::Sac6, Algo::Ddpg}) {
    const auto n = agents::make_agent(a, 12, 4, h)->network_count();
    census += std::string(agents::to_string(a)) + "=" + std::to_string(n) + " ";
  }
  if (census != "csac=5 sac6=6 ddpg=4 ") problems.push_back("census " + census);

  std::string detail = "Q:policy:target 100:50:50 at freq 2, polyak tau 0.001, terminal y = r, census " + census;
  for (const auto& p : problems) detail += "| " + p + " ";
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------- 6-8

struct DeskRuns {
  fs::path root;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<app::TrainResult> csac, ddpg;
  bool ran = false;
  std::string error;

  app::RunConfig config(Algo algo, std::uint64_t seed) const {
    auto c = app::default_run_config();
    c.algo = algo;
    c.seed = seed;
    c.heartbeat_s = 600.0;
    c.cls.sequential = true;
    c.cls.actors = 1;
    c.cls.learners = 1;
    c.cls.buffers = 1;
    c.out_dir = root / (std::string(agents::to_string(algo)) + "_seed" + std::to_string(seed));
    return c;
  }

  void ensure() {
    if (ran) return;
    ran = true;
    for (auto s : seeds) {
      for (auto [algo, out] : {std::pair{Algo::Csac, &csac}, {Algo::Ddpg, &ddpg}}) {
        const auto t0 = std::chrono::steady_clock::now();
        out->push_back(app::train(config(algo, s), nullptr));
        std::cerr << "  trained " << agents::to_string(algo) << " seed " << s << " in " << fmt(seconds_since(t0), 3)
                  << " s\n";
        if (out->back().exit_code != app::kExitOk)
          error = std::string(agents::to_string(algo)) + " seed " + std::to_string(s) + ": " + out->back().message;
      }
    }
  }
};

Verdict learning_sanity(DeskRuns& runs) {
  const auto t0 = std::chrono::steady_clock::now();
  runs.ensure();
  if (!runs.error.empty()) return {false, runs.error};
  int improved = 0;
  std::string detail;
  for (std::size_t i = 0; i < runs.seeds.size(); ++i) {
    const auto& rows = runs.csac[i].rows;
    const double first = app::window_return(rows, 0, 1000);
    const double last = app::window_return(rows, 19000, 20000);
    improved += last > first;
    detail += "seed " + std::to_string(runs.seeds[i]) + ": " + fmt(first) + " -> " + fmt(last) + "; ";
  }
  detail += std::to_string(improved) + "/3 improved (first vs final 1000 steps), all runs " +
            fmt(seconds_since(t0), 3) + " s";
  return {improved == 3, detail};
}

Verdict baseline_ordering(DeskRuns& runs) {
  runs.ensure();
  if (!runs.error.empty()) return {false, runs.error};
  int wins = 0;
  std::string detail;
  for (std::size_t i = 0; i < runs.seeds.size(); ++i) {
    const double cs = app::window_return(runs.csac[i].rows, 19000, 20000);
    const double dd = app::window_return(runs.ddpg[i].rows, 19000, 20000);
    wins += cs >= dd;
    detail += "seed " + std::to_string(runs.seeds[i]) + ": csac " + fmt(cs) + " vs ddpg " + fmt(dd) + "; ";
  }
  detail += std::to_string(wins) + "/3 csac >= ddpg";
  return {wins >= 2, detail};
}

Verdict sla_enforcement(DeskRuns& runs) {
  runs.ensure();
  if (!runs.error.empty()) return {false, runs.error};
  auto c = runs.config(Algo::Csac, runs.seeds.front());
  const auto checkpoint = c.out_dir / "checkpoint.bin";
  c.out_dir = runs.root / "eval_csac";
  const auto trained = app::eval(c, checkpoint);
  c.out_dir = runs.root / "eval_random";
  const auto random = app::eval(c, {});
  if (trained.exit_code != app::kExitOk) return {false, trained.message};
  if (random.exit_code != app::kExitOk) return {false, random.message};
  auto describe = [](const app::EvalReport& r) {
    std::string s;
    for (const auto& sl : r.slices) s += sl.name + " " + fmt(sl.sla_ms, 3) + "/" + fmt(sl.bound_ms, 3) + " ";
    return s;
  };
  const auto n = trained.report.slices.size();
  const bool ok = trained.report.passes() >= 2 && n - random.report.passes() >= 2;
  return {ok, "trained f95/eta ms: " + describe(trained.report) + "(" + std::to_string(trained.report.passes()) +
                  "/3 pass); random: " + describe(random.report) + "(" +
                  std::to_string(n - random.report.passes()) + "/3 fail)"};
}

// ---------------------------------------------------------------- 9

std::string stress_payload(unsigned char c) { return std::string(512, static_cast<char>(c)); }

Verdict runtime_properties() {
  std::vector<std::string> parts;
  bool ok = true;

  {
    runtime::ParameterMemory m;
    constexpr std::uint64_t kPerPublisher = 500000;
    std::atomic<bool> done{false};
    std::atomic<std::uint64_t> mixed{0}, regressions{0}, fetches{0};
    std::vector<std::thread> readers, writers;
    for (int r = 0; r < 2; ++r) {
      readers.emplace_back([&] {
        std::uint64_t last = 0;
        while (!done.load(std::memory_order_relaxed)) {
          const auto snap = m.fetch();
          fetches.fetch_add(1, std::memory_order_relaxed);
          if (!snap) continue;
          const char c = snap->payload.front();
          if (std::ranges::any_of(snap->payload, [c](char x) { return x != c; })) ++mixed;
          if (snap->version < last) ++regressions;
          last = snap->version;
        }
      });
    }
    for (int w = 0; w < 2; ++w) {
      writers.emplace_back([&, w] {
        for (std::uint64_t k = 0; k < kPerPublisher; ++k) m.publish(stress_payload(static_cast<unsigned char>(k % 251)), w);
      });
    }
    for (auto& t : writers) t.join();
    done = true;
    for (auto& t : readers) t.join();
    const bool clean = m.corrupt_fetches() == 0 && mixed == 0 && regressions == 0 && m.version() == 2 * kPerPublisher;
    ok = ok && clean;
    parts.push_back(std::string("torn-read ") + (clean ? "clean" : "DIRTY") + " over " + std::to_string(m.version()) +
                    " publishes / " + std::to_string(fetches.load()) + " fetches");
  }

  const auto env_cfg = env::default_env_config();
  auto hyper = agents::default_hyper();
  hyper.start_timesteps = 500;

  {
    hyper.max_timesteps = 3000;
    runtime::ClassConfig c;
    c.actors = 2;
    c.learners = 1;
    c.buffers = 1;
    auto measure = [&](bool slow) {
      runtime::RunOptions opt;
      opt.timeout_s = 600.0;
      if (slow) {
        opt.before_actor_step = [](std::size_t id, std::uint64_t) {
          if (id == 1) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        };
      }
      return runtime::run_class(env_cfg, Algo::Csac, hyper, c, 4, opt).ledger;
    };
    const auto base = measure(false), slowed = measure(true);
    const double change = std::abs(slowed.learner_cpu_rate(0) / base.learner_cpu_rate(0) - 1.0);
    const bool steady = change < 0.10 && !slowed.timed_out;
    ok = ok && steady;
    parts.push_back("slowed actor changes learner updates/s (per CPU-second) by " + fmt(100 * change, 3) + "%");
  }

  {
    hyper.max_timesteps = 4000;
    auto run = [&](std::size_t actors) {
      runtime::ClassConfig c;
      c.actors = actors;
      c.learners = 1;
      c.buffers = 1;
      runtime::RunOptions opt;
      opt.timeout_s = 600.0;
      return runtime::run_class(env_cfg, Algo::Csac, hyper, c, 5, opt).ledger;
    };
    const auto one = run(1), four = run(4);
    const double ratio = four.transitions_per_s / one.transitions_per_s;
    // With fewer hardware threads than actors a higher rate only means the
    // actors took time slices from the learner; it is not parallel speedup.
    const unsigned hw = std::thread::hardware_concurrency();
    const bool scaled = ratio >= 2.0 && hw >= 4;
    ok = ok && scaled;
    parts.push_back("4-actor / 1-actor transitions/s = " + fmt(four.transitions_per_s, 4) + " / " +
                    fmt(one.transitions_per_s, 4) + " = " + fmt(ratio, 3) + "x with learner updates " +
                    std::to_string(four.learner_updates[0]) + " vs " + std::to_string(one.learner_updates[0]) + " on " +
                    std::to_string(hw) + " hardware threads" + (hw < 4 ? " (speedup needs >= 4)" : ""));
  }

  std::string detail;
  for (std::size_t i = 0; i < parts.size(); ++i) detail += (i ? "; " : "") + parts[i];
  return {ok, detail};
}

// ---------------------------------------------------------------- 10

Verdict reproducibility(const fs::path& root) {
  auto c = app::default_run_config();
  c.seed = 7;
  c.heartbeat_s = 600.0;
  c.cls.sequential = true;
  c.hyper.max_timesteps = 2000;
  c.hyper.start_timesteps = 500;
  c.out_dir = root / "repro_a";
  const auto a = app::train(c);
  c.out_dir = root / "repro_b";
  const auto b = app::train(c);
  if (a.exit_code != app::kExitOk || b.exit_code != app::kExitOk) return {false, a.message + " " + b.message};
  const auto x = slurp(root / "repro_a" / "metrics.csv"), y = slurp(root / "repro_b" / "metrics.csv");
  return {!x.empty() && x == y, "two sequential 3-actor/3-learner/2-buffer runs, seed 7, 2000 steps: metrics.csv " +
                                    std::to_string(x.size()) + " bytes, " + (x == y ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  fs::path out = "acceptance_runs";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else if (arg == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else {
      std::cerr << "usage: csac_acceptance [--only N] [--out DIR]\n";
      return 2;
    }
  }
  fs::create_directories(out);

  DeskRuns runs;
  runs.root = out;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"math correctness", math_correctness},
      {"beamforming", beamforming},
      {"percentile oracle", percentile_oracle},
      {"traffic model", traffic_model},
      {"SAC mechanics", sac_mechanics},
      {"learning sanity", [&] { return learning_sanity(runs); }},
      {"baseline ordering", [&] { return baseline_ordering(runs); }},
      {"SLA enforcement", [&] { return sla_enforcement(runs); }},
      {"runtime properties", runtime_properties},
      {"reproducibility", [&] { return reproducibility(out); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only && id != only) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[i].first << "): " << v.detail
              << std::endl;
  }
  return failures ? 1 : 0;
}
