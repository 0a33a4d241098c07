#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "csac/env/channel.hpp"
#include "csac/env/delay.hpp"
#include "csac/env/sla.hpp"
#include "csac/env/slicing_env.hpp"
#include "csac/env/traffic.hpp"
#include "csac/errors.hpp"
#include "env_oracles.hpp"

using namespace csac;
using namespace csac::env;
using math::Complex;
using math::ComplexMatrix;
using math::SeededRng;

namespace {

struct Moments {
  double mean = 0.0, var = 0.0, m4 = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= n;
  for (double x : xs) {
    const double d = x - m.mean;
    m.var += d * d;
    m.m4 += d * d * d * d;
  }
  m.var /= n - 1.0;
  m.m4 /= n;
  return m;
}

double pmf_mean(const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += static_cast<double>(k) * p[k];
  return s;
}

double pmf_var(const std::vector<double>& p) {
  const double mu = pmf_mean(p);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::pow(static_cast<double>(k) - mu, 2) * p[k];
  return s;
}

ComplexMatrix random_gains(std::size_t n, std::size_t m, SeededRng& rng, double scale = 1.0) {
  ComplexMatrix h(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) h(i, j) = scale * Complex{rng.normal(), rng.normal()};
  return h;
}

UserTask task_on(std::size_t slice, std::size_t ap, double cycles, double rate = 1e6) {
  UserTask t;
  t.slice = slice;
  t.serving_ap = ap;
  t.cycles = cycles;
  t.size_bits = cycles / 100.0;
  t.rate_bps = rate;
  return t;
}

}  // namespace

// ---------------------------------------------------------------- traffic

TEST(Traffic, ZeroMeanZeroStdNeverArrives) {
  SeededRng rng(3);
  std::vector<SliceSpec> slices{{"z", 0.0, 0.0, 0.01, 1.0, 0.1, 1.0}};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_arrivals(slices, 1.0, 17, rng)[0], 0u);
}

TEST(Traffic, EmptySlotProbabilityMatchesExponential) {
  SeededRng rng(11);
  const double lambda = 2.0, slot = 1.0;
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_poisson_count(lambda, slot, rng) == 0;
  const double p = std::exp(-lambda * slot);
  EXPECT_NEAR(static_cast<double>(zeros) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Traffic, FixedRateMeanIsLambda) {
  SeededRng rng(12);
  const int n = 100000;
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample_poisson_count(3.0, 1.0, rng);
  const auto m = moments(xs);
  EXPECT_NEAR(m.mean, 3.0, 3.0 * std::sqrt(3.0 / n));
}

TEST(Traffic, MixedPoissonMomentsMatchQuadratureOracle) {
  for (auto [mu, sigma] : {std::pair{4.0, 1.0}, {0.5, 1.0}, {2.0, 1.0}}) {
    SeededRng rng(static_cast<std::uint64_t>(mu * 100 + sigma));
    std::vector<SliceSpec> slices{{"s", mu, sigma, 0.01, 1.0, 0.1, 1.0}};
    const int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_arrivals(slices, 1.0, 1000, rng)[0];
    const auto pmf = oracle::mixed_poisson_pmf(mu, sigma, 1.0, 60);
    EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-9);
    const double mean = pmf_mean(pmf), var = pmf_var(pmf);
    const auto m = moments(xs);
    EXPECT_NEAR(m.mean, mean, 3.0 * std::sqrt(var / n)) << "mu=" << mu;
    EXPECT_NEAR(m.var, var, 3.0 * std::sqrt((m.m4 - m.var * m.var) / n)) << "mu=" << mu;
  }
}

TEST(Traffic, TotalNeverExceedsUserCap) {
  SeededRng rng(5);
  std::vector<SliceSpec> slices{{"a", 10, 1, 1, 1, 0, 1}, {"b", 10, 1, 1, 1, 0, 1}, {"c", 10, 1, 1, 1, 0, 1}};
  std::vector<double> per(3, 0.0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto a = sample_arrivals(slices, 1.0, 17, rng);
    EXPECT_LE(a[0] + a[1] + a[2], 17u);
    for (int l = 0; l < 3; ++l) per[l] += a[l];
  }
  // symmetric slices keep symmetric means after uniform dropping
  EXPECT_NEAR(per[0] / n, per[1] / n, 0.1);
  EXPECT_NEAR(per[1] / n, per[2] / n, 0.1);
}

// ---------------------------------------------------------------- channel

TEST(Channel, PathLossClosedForm) {
  EXPECT_DOUBLE_EQ(path_loss_db(1.0, false), 148.1);
  EXPECT_NEAR(path_loss_db(0.5, false), 148.1 - 37.6, 1e-12);
  EXPECT_NEAR(path_loss_db(0.1, true), 148.1 - 37.6, 1e-12);
  Topology topo;
  for (double d : {0.001, 0.05, 0.3, 0.6}) {
    const double expected =
        std::pow(10.0, -(148.1 + 37.6 * std::log2(d)) / 20.0) * std::sqrt(std::pow(10.0, 0.9));
    EXPECT_NEAR(large_scale_amplitude(topo, d, 0.0) / expected, 1.0, 1e-12);
  }
  const double shadowed = large_scale_amplitude(topo, 0.2, 8.0) / large_scale_amplitude(topo, 0.2, 0.0);
  EXPECT_NEAR(shadowed, std::sqrt(std::pow(10.0, 0.8)), 1e-12);
}

TEST(Channel, AssociationIsStrongestAndUnique) {
  Topology topo;
  SeededRng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ch = draw_channel(topo, 1 + trial % 17, rng);
    const auto per_ap = ch.users_per_ap();
    EXPECT_EQ(std::accumulate(per_ap.begin(), per_ap.end(), std::size_t{0}), ch.user_count());
    for (std::size_t m = 0; m < ch.user_count(); ++m) {
      int count = 0;
      for (std::size_t n = 0; n < ch.ap_count(); ++n) {
        count += ch.associated(n, m);
        EXPECT_LE(std::abs(ch.gains(n, m)), std::abs(ch.gains(ch.serving_ap[m], m)));
      }
      EXPECT_EQ(count, 1);
    }
    for (double d : ch.distances_km) {
      EXPECT_GE(d, topo.min_distance_km);
      EXPECT_LE(d, topo.max_distance_km);
    }
  }
}

TEST(Channel, AssociationTieGoesToLowestIndex) {
  ComplexMatrix h(3, 1);
  h(0, 0) = 0.5;
  h(1, 0) = Complex{0.0, 1.0};
  h(2, 0) = -1.0;
  EXPECT_EQ(strongest_ap_association(h)[0], 1u);
}

// ---------------------------------------------------------------- beamforming

TEST(Beamform, SingleUserIsMatchedFilter) {
  SeededRng rng(2);
  for (std::size_t n : {1, 2, 5, 16}) {
    const auto h = random_gains(n, 1, rng);
    const double p = 0.7;
    const auto v = beamform(h, std::vector{p}, 1.0);
    const double hn = h.norm();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(v(i, 0) - std::sqrt(p) * h(i, 0) / hn), 0.0, 1e-12);
  }
}

TEST(Beamform, PowerNormalisationOnRandomInstances) {
  SeededRng rng(77);
  Topology topo;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(16), m = 1 + rng.index(8);
    ComplexMatrix h = trial % 2 ? random_gains(n, m, rng) : ComplexMatrix{};
    if (trial % 2 == 0) {
      topo.ap_count = n;
      h = draw_channel(topo, m, rng).gains;
    }
    std::vector<double> p(m);
    for (auto& x : p) x = rng.uniform(0.0, 1.0);
    const auto v = beamform(h, p, topo.bf_noise_w);
    for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(v.col(j).norm() * v.col(j).norm() - p[j]));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Beamform, OrthogonalUsersDecouple) {
  ComplexMatrix h(2, 2);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const auto v = beamform(h, std::vector{1.0, 1.0}, 1.0);
  EXPECT_NEAR(std::abs(v(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(v(1, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v(1, 1)), 1.0, 1e-12);
}

TEST(Beamform, MatchesDirectPrimalSolve) {
  SeededRng rng(8);
  for (auto [n, m] : {std::pair{4, 2}, {6, 6}, {3, 7}, {10, 17}}) {
    const auto h = random_gains(n, m, rng);
    const double s = 0.3;
    std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Complex acc = i == j ? 1.0 : 0.0;
        for (int k = 0; k < m; ++k) acc += h(i, k) * std::conj(h(j, k)) / s;
        a[i][j] = acc;
      }
    }
    std::vector<double> p(m, 0.5);
    const auto v = beamform(h, p, s);
    for (int k = 0; k < m; ++k) {
      std::vector<Complex> col(n);
      for (int i = 0; i < n; ++i) col[i] = h(i, k);
      auto w = oracle::gauss_solve(a, col);
      double norm = 0.0;
      for (auto& x : w) norm += std::norm(x);
      for (int i = 0; i < n; ++i) {
        EXPECT_NEAR(std::abs(v(i, k) - std::sqrt(0.5) * w[i] / std::sqrt(norm)), 0.0, 1e-8)
            << n << "x" << m << " user " << k;
      }
    }
  }
}

TEST(Beamform, RejectsInvalidInputs) {
  ComplexMatrix h(2, 1, 1.0);
  EXPECT_THROW(beamform(h, std::vector{1.0, 1.0}, 1.0), DimensionError);
  EXPECT_THROW(beamform(h, std::vector{1.0}, 0.0), NumericError);
  EXPECT_THROW(beamform(h, std::vector{-1.0}, 1.0), NumericError);
}

// ---------------------------------------------------------------- rates

TEST(Rates, SingleUserClosedForm) {
  ComplexMatrix h(2, 1);
  h(0, 0) = 1.0;
  const auto v = beamform(h, std::vector{3.0}, 1.0);
  EXPECT_NEAR(compute_rates(h, v, 1.0, 1.0)[0], 2.0, 1e-12);
}

TEST(Rates, ZeroPowerGivesZeroRate) {
  SeededRng rng(4);
  const auto h = random_gains(3, 2, rng);
  const auto v = beamform(h, std::vector{0.0, 1.0}, 1.0);
  const auto r = compute_rates(h, v, 1e6, 1.0);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_GT(r[1], 0.0);
}

TEST(Rates, TwoUserSinrOracle) {
  SeededRng rng(31);
  const auto h = random_gains(4, 2, rng);
  const auto v = beamform(h, std::vector{0.4, 0.9}, 0.5);
  const auto r = compute_rates(h, v, 2e6, 0.2);
  for (int m = 0; m < 2; ++m) {
    Complex sig{}, intf{};
    for (int n = 0; n < 4; ++n) {
      sig += std::conj(h(n, m)) * v(n, m);
      intf += std::conj(h(n, m)) * v(n, 1 - m);
    }
    const double expected = 2e6 * std::log2(1.0 + std::norm(sig) / (std::norm(intf) + 0.2));
    EXPECT_NEAR(r[m], expected, 1e-10 * expected);
  }
}

TEST(Rates, IncreaseWithOwnPower) {
  SeededRng rng(9);
  const auto h = random_gains(5, 3, rng);
  double prev = -1.0;
  for (double p : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0}) {
    const auto v = beamform(h, std::vector{p, 0.0, 0.0}, 1.0);
    const double r = compute_rates(h, v, 1.0, 1.0)[0];
    EXPECT_GT(r, prev);
    prev = r;
  }
}

// ---------------------------------------------------------------- delay

TEST(Delay, ComputeDelayIsCyclesOverPool) {
  Topology topo;
  const std::vector<UserTask> tasks{task_on(0, 0, 3e9)};
  const auto d = compute_delay(tasks, std::vector{6e10}, 2, topo, 1.0);
  EXPECT_DOUBLE_EQ(d.compute_s[0], 3e9 / 6e10);
  EXPECT_EQ(d.queue_s[0], 0.0);
  EXPECT_DOUBLE_EQ(d.total_s[0], 0.05);
  EXPECT_EQ(d.capped, 0u);
}

TEST(Delay, PoolIsSharedWithinSlice) {
  Topology topo;
  const std::vector<UserTask> tasks{task_on(0, 0, 1e9), task_on(0, 1, 2e9), task_on(1, 2, 1e9)};
  const auto d = compute_delay(tasks, std::vector{1e11, 1e11}, 3, topo, 1.0);
  EXPECT_DOUBLE_EQ(d.compute_s[0], 1e9 / 5e10);
  EXPECT_DOUBLE_EQ(d.compute_s[1], 2e9 / 5e10);
  EXPECT_DOUBLE_EQ(d.compute_s[2], 1e9 / 1e11);
}

TEST(Delay, QueueOnSharedFronthaul) {
  Topology topo;
  topo.max_burst_bits = 1e6;
  topo.fronthaul_capacity_bps = 1e8;
  const std::vector<UserTask> tasks{task_on(0, 1, 1e3), task_on(0, 1, 1e3), task_on(1, 1, 1e3)};
  const auto d = compute_delay(tasks, std::vector{1e12, 1e12}, 2, topo, 1.0);
  for (int m = 0; m < 3; ++m) EXPECT_DOUBLE_EQ(d.queue_s[m], 0.02);
}

TEST(Delay, CapAppliesToZeroPoolZeroRateAndOverflow) {
  Topology topo;
  const std::vector<UserTask> tasks{task_on(0, 0, 1e9), task_on(1, 1, 1e9, 0.0), task_on(2, 2, 1e9)};
  const auto d = compute_delay(tasks, std::vector{0.0, 1e12, 1e8}, 3, topo, 1.0);
  for (int m = 0; m < 3; ++m) EXPECT_EQ(d.total_s[m], 1.0);
  EXPECT_EQ(d.capped, 3u);
}

TEST(Delay, FronthaulViolationFlag) {
  Topology topo;
  topo.fronthaul_capacity_bps = 1e7;
  const std::vector<UserTask> tasks{task_on(0, 0, 1e3, 6e6), task_on(0, 0, 1e3, 6e6), task_on(0, 1, 1e3, 6e6)};
  const auto d = compute_delay(tasks, std::vector{1e12}, 2, topo, 1.0);
  EXPECT_DOUBLE_EQ(d.fronthaul_load_bps[0], 1.2e7);
  EXPECT_TRUE(d.fronthaul_violation[0]);
  EXPECT_FALSE(d.fronthaul_violation[1]);
}

// ---------------------------------------------------------------- percentile

TEST(Percentile, WorkedExamples) {
  std::vector<double> v(19);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(percentile_rank(95, 19), 19u);
  EXPECT_EQ(*percentile(v, 95), 19.0);
  EXPECT_EQ(*percentile(std::vector{3.0, 1.0, 2.0}, 50), 2.0);
  for (double q : {1.0, 50.0, 99.0}) EXPECT_EQ(*percentile(std::vector{4.2}, q), 4.2);
  EXPECT_FALSE(percentile(std::vector<double>{}, 95).has_value());
}

TEST(Percentile, MatchesSortOracleEverywhere) {
  SeededRng rng(100);
  std::vector<double> samples;
  std::vector<SlaWindow> windows;
  for (int q = 1; q <= 99; ++q) windows.emplace_back(q);
  for (int t = 1; t <= 200; ++t) {
    // coarse values force ties
    samples.push_back(t % 7 == 0 ? 0.5 : std::round(rng.uniform(0.0, 40.0)) / 4.0);
    for (int q = 1; q <= 99; ++q) {
      auto& w = windows[q - 1];
      w.append(samples.back());
      const double expected = oracle::naive_percentile(samples, q);
      ASSERT_EQ(*percentile(samples, q), expected) << "t=" << t << " q=" << q;
      ASSERT_EQ(*w.tracked_percentile(), expected) << "t=" << t << " q=" << q;
    }
  }
  const auto& w = windows.front();
  ASSERT_EQ(w.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(w.samples()[i], samples[i]);
}

TEST(Percentile, ClearEmptiesWindow) {
  SlaWindow w(95);
  w.append(1.0);
  w.clear();
  EXPECT_TRUE(w.empty());
  EXPECT_FALSE(w.tracked_percentile().has_value());
}

// ---------------------------------------------------------------- penalty and reward

TEST(Penalty, WorkedExamples) {
  std::vector<SliceSpec> slices{{"a", 1, 1, 0.01, 1e9, 0.1, 1}};
  std::vector<SlaWindow> windows{SlaWindow(95)};
  windows[0].append(0.001);
  std::vector<UserTask> ok{task_on(0, 0, 5e8)};
  EXPECT_EQ(penalty(ok, windows, slices).total, 0.0);
  std::vector<UserTask> heavy{task_on(0, 0, 2e9), task_on(0, 0, 3e9)};
  EXPECT_NEAR(penalty(heavy, windows, slices).total, -0.2, 1e-15);
  windows[0].append(0.5);
  windows[0].append(0.5);
  const auto r = penalty(ok, windows, slices);
  EXPECT_NEAR(r.total, -0.1, 1e-15);
  EXPECT_TRUE(r.percentile_violated[0]);
}

TEST(Penalty, ExhaustiveDisjunction) {
  std::vector<SliceSpec> slices{{"a", 1, 1, 0.01, 1e9, 0.1, 1}, {"b", 1, 1, 0.02, 2e9, 0.3, 1}};
  // enumerate up to 3 tasks, each in one of 2 slices and above/below threshold,
  // and each slice's percentile above/below its bound or empty
  for (int count = 0; count <= 3; ++count) {
    int combos = 1;
    for (int i = 0; i < count; ++i) combos *= 4;
    for (int code = 0; code < combos; ++code) {
      for (int pa = 0; pa < 3; ++pa) {
        for (int pb = 0; pb < 3; ++pb) {
          std::vector<UserTask> tasks;
          int c = code;
          for (int i = 0; i < count; ++i, c /= 4) {
            const std::size_t l = c % 2;
            const bool heavy = (c / 2) % 2;
            tasks.push_back(task_on(l, 0, slices[l].cpu_threshold_cycles * (heavy ? 1.5 : 0.5)));
          }
          std::vector<SlaWindow> windows{SlaWindow(95), SlaWindow(95)};
          const int states[2] = {pa, pb};
          for (int l = 0; l < 2; ++l) {
            if (states[l] == 1) windows[l].append(slices[l].latency_bound_s * 0.5);
            if (states[l] == 2) windows[l].append(slices[l].latency_bound_s * 2.0);
          }
          double expected = 0.0;
          for (const auto& t : tasks) {
            const bool cpu = t.cycles > slices[t.slice].cpu_threshold_cycles;
            const bool pct = states[t.slice] == 2;
            if (cpu || pct) expected -= slices[t.slice].penalty;
          }
          EXPECT_NEAR(penalty(tasks, windows, slices).total, expected, 1e-14);
        }
      }
    }
  }
}

TEST(Reward, WorkedExamples) {
  EXPECT_DOUBLE_EQ(reward(std::vector{0.2, 0.3}, 0.0), 4.0);
  EXPECT_DOUBLE_EQ(reward(std::vector{0.2, 0.3}, -0.2), 3.8);
  EXPECT_DOUBLE_EQ(reward(std::vector{0.1, 0.15}, 0.0), 8.0);
  EXPECT_DOUBLE_EQ(reward(std::vector<double>{}, -0.3), -0.3);
  EXPECT_DOUBLE_EQ(reward(std::vector{0.0, 0.0}, 0.0), 1.0 / kMinDelayS);
}

// ---------------------------------------------------------------- environment

TEST(SlicingEnv, ResetIsSeededAndShaped) {
  SlicingEnv a(default_env_config()), b(default_env_config());
  const auto sa = a.reset(42), sb = b.reset(42);
  EXPECT_EQ(sa.size(), 12u);
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(a.action_dim(), 4u);
}

TEST(SlicingEnv, IdenticalTrajectoriesForSameSeed) {
  SlicingEnv a(default_env_config()), b(default_env_config());
  a.reset(9);
  b.reset(9);
  SeededRng actions(1);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> act(4);
    for (auto& x : act) x = actions.uniform(-1.2, 1.2);
    const auto oa = a.step(act), ob = b.step(act);
    ASSERT_EQ(oa.state, ob.state);
    ASSERT_EQ(oa.reward, ob.reward);
    ASSERT_EQ(oa.info.delays_s, ob.info.delays_s);
    if (oa.done) {
      a.reset();
      b.reset();
    }
  }
}

TEST(SlicingEnv, StateBoundsAndEpisodeLength) {
  auto cfg = default_env_config();
  cfg.episode_len = 25;
  SlicingEnv env(cfg);
  env.reset(3);
  SeededRng actions(2);
  int steps = 0;
  bool done = false;
  while (!done) {
    std::vector<double> act(4);
    for (auto& x : act) x = actions.uniform(-1.0, 1.0);
    const auto out = env.step(act);
    for (double s : out.state) {
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
    EXPECT_TRUE(std::isfinite(out.reward));
    for (double d : out.info.delays_s) EXPECT_GT(d, 0.0);
    done = out.done;
    ++steps;
  }
  EXPECT_EQ(steps, 25);
  EXPECT_THROW(env.step(std::vector<double>(4, 0.0)), StateError);
  SlicingEnv fresh(cfg);
  EXPECT_THROW(fresh.step(std::vector<double>(4, 0.0)), StateError);
}

TEST(SlicingEnv, AllMinusOneEngagesDelayCeiling) {
  SlicingEnv env(default_env_config());
  env.reset(5);
  for (int t = 0; t < 20; ++t) {
    const auto out = env.step(std::vector<double>(4, -1.0));
    for (const auto& task : out.info.tasks) EXPECT_EQ(task.rate_bps, 0.0);
    for (double d : out.info.delays_s) EXPECT_EQ(d, env.config().delay_cap_s);
    EXPECT_EQ(out.info.capped_delays, out.info.tasks.size());
  }
}

TEST(SlicingEnv, CpuUpperBoundAllocatesExactlyMax) {
  const auto cfg = default_env_config();
  const auto a = map_action(std::vector{0.0, 0.0, 0.0, 1.0}, cfg, 3e9);
  EXPECT_EQ(a.cpu_total_cps, cfg.topology.cpu_max_cps);
  EXPECT_DOUBLE_EQ(a.cpu_scaling, cfg.topology.cpu_max_cps - 3e9);
  EXPECT_DOUBLE_EQ(std::accumulate(a.slice_cpu_cps.begin(), a.slice_cpu_cps.end(), 0.0), cfg.topology.cpu_max_cps);
  const auto lo = map_action(std::vector{-1.0, 1.0, 0.0, -1.0}, cfg, 3e9);
  EXPECT_EQ(lo.cpu_total_cps, 0.0);
  EXPECT_DOUBLE_EQ(lo.cpu_scaling, -3e9);
  EXPECT_EQ(lo.slice_power_w[0], 0.0);
  EXPECT_EQ(lo.slice_power_w[1], cfg.topology.max_power_w);
  EXPECT_EQ(lo.slice_power_w[2], 0.5 * cfg.topology.max_power_w);
}

TEST(SlicingEnv, OutOfRangeActionsAreClippedAndCounted) {
  const auto cfg = default_env_config();
  const auto a = map_action(std::vector{2.0, -3.0, std::nan(""), 0.5}, cfg, 0.0);
  EXPECT_EQ(a.clipped, 3u);
  EXPECT_EQ(a.slice_power_w[0], cfg.topology.max_power_w);
  EXPECT_EQ(a.slice_power_w[1], 0.0);
  EXPECT_EQ(a.slice_power_w[2], 0.0);
  EXPECT_THROW(map_action(std::vector{0.0}, cfg, 0.0), DimensionError);
}

TEST(SlicingEnv, ResetArrivalsMatchMixtureOracle) {
  const auto cfg = default_env_config();
  std::vector<double> total_pmf{1.0};
  for (const auto& s : cfg.slices) {
    total_pmf = oracle::convolve(total_pmf, oracle::mixed_poisson_pmf(s.traffic_mean, s.traffic_std, 1.0, 40));
  }
  // arrivals above the user cap are dropped
  std::vector<double> capped(cfg.topology.max_users + 1, 0.0);
  for (std::size_t k = 0; k < total_pmf.size(); ++k) capped[std::min(k, cfg.topology.max_users)] += total_pmf[k];
  const double mean = pmf_mean(capped), var = pmf_var(capped);

  SlicingEnv env(cfg);
  env.reset(1);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto s = env.reset();
    double users = 0.0;
    for (std::size_t l = 0; l < 3; ++l) users += s[l] * static_cast<double>(cfg.topology.max_users);
    sum += std::round(users);
  }
  EXPECT_NEAR(sum / n, mean, 3.0 * std::sqrt(var / n));
}

TEST(SlicingEnv, SlaWindowScope) {
  auto cfg = default_env_config();
  cfg.episode_len = 5;
  SlicingEnv global(cfg);
  global.reset(1);
  for (int t = 0; t < 5; ++t) global.step(std::vector<double>(4, 0.5));
  const auto before = global.windows()[1].size();
  global.reset();
  EXPECT_EQ(global.windows()[1].size(), before);

  cfg.sla_scope = SlaScope::PerEpisode;
  SlicingEnv episodic(cfg);
  episodic.reset(1);
  for (int t = 0; t < 5; ++t) episodic.step(std::vector<double>(4, 0.5));
  episodic.reset();
  EXPECT_EQ(episodic.windows()[1].size(), 0u);
}

TEST(SlicingEnv, WindowSizesCountCompletedTasks) {
  SlicingEnv env(default_env_config());
  env.reset(8);
  std::vector<std::size_t> counts(3, 0);
  for (int t = 0; t < 50; ++t) {
    const auto out = env.step(std::vector<double>(4, 1.0));
    for (std::size_t l = 0; l < 3; ++l) counts[l] += out.info.slice_task_count[l];
  }
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(env.windows()[l].size(), counts[l]);
}

TEST(EnvConfig, ValidationRejectsBadValues) {
  auto cfg = default_env_config();
  cfg.slices[0].latency_bound_s = 0.0;
  EXPECT_THROW(SlicingEnv{cfg}, ConfigError);
  cfg = default_env_config();
  cfg.sla_percentile = 100.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = default_env_config();
  cfg.slices.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
}
