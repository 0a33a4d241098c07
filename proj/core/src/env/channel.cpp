#include "csac/env/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csac/errors.hpp"

namespace csac::env {

using math::Complex;
using math::ComplexMatrix;

std::vector<std::size_t> ChannelRealization::users_per_ap() const {
  std::vector<std::size_t> counts(ap_count(), 0);
  for (auto n : serving_ap) ++counts[n];
  return counts;
}

double path_loss_db(double distance_km, bool log10) {
  const double lg = log10 ? std::log10(distance_km) : std::log2(distance_km);
  return 148.1 + 37.6 * lg;
}

double large_scale_amplitude(const Topology& topo, double distance_km, double shadowing_db_sample) {
  const double d = std::max(distance_km, topo.min_distance_km);
  const double antenna = std::pow(10.0, topo.antenna_gain_db / 10.0);
  const double shadow = std::pow(10.0, shadowing_db_sample / 10.0);
  return std::pow(10.0, -path_loss_db(d, topo.pathloss_log10) / 20.0) * std::sqrt(antenna * shadow);
}

std::vector<std::size_t> strongest_ap_association(const ComplexMatrix& gains) {
  std::vector<std::size_t> serving(gains.cols(), 0);
  for (std::size_t m = 0; m < gains.cols(); ++m) {
    double best = -1.0;
    for (std::size_t n = 0; n < gains.rows(); ++n) {
      const double mag = std::abs(gains(n, m));
      if (mag > best) {
        best = mag;
        serving[m] = n;
      }
    }
  }
  return serving;
}

ChannelRealization draw_channel(const Topology& topo, std::size_t users, math::SeededRng& rng) {
  if (users == 0) throw DimensionError("draw_channel: user count must be >= 1");
  const std::size_t n_ap = topo.ap_count;
  ChannelRealization ch;
  ch.gains = ComplexMatrix(n_ap, users);
  ch.distances_km.resize(n_ap * users);
  for (std::size_t n = 0; n < n_ap; ++n) {
    for (std::size_t m = 0; m < users; ++m) {
      const double d = std::max(rng.uniform(0.0, topo.max_distance_km), topo.min_distance_km);
      const double shadow = topo.shadowing_db > 0.0 ? rng.normal(0.0, topo.shadowing_db) : 0.0;
      Complex g{1.0, 0.0};
      if (topo.small_scale_fading) {
        const double re = rng.normal(0.0, std::sqrt(0.5));
        const double im = rng.normal(0.0, std::sqrt(0.5));
        g = {re, im};
      }
      ch.distances_km[n * users + m] = d;
      ch.gains(n, m) = large_scale_amplitude(topo, d, shadow) * g;
    }
  }
  ch.serving_ap = strongest_ap_association(ch.gains);
  return ch;
}

ComplexMatrix beamform(const ComplexMatrix& gains, std::span<const double> powers, double bf_noise_w) {
  const std::size_t n_ap = gains.rows(), users = gains.cols();
  if (powers.size() != users) throw DimensionError("beamform: one power per user required");
  if (!(bf_noise_w > 0.0)) throw NumericError("beamform: noise variance must be > 0");
  for (std::size_t m = 0; m < users; ++m) {
    if (powers[m] < 0.0 || !std::isfinite(powers[m])) {
      throw NumericError("beamform: power for user " + std::to_string(m) + " is invalid");
    }
  }

  // Unnormalised directions: dual form H (sI_M + H^H H)^-1 when M <= N,
  // primal form (sI_N + H H^H)^-1 H otherwise. Both are solved on the smaller
  // Gram matrix after symmetric diagonal equilibration.
  const bool dual = users <= n_ap;
  const std::size_t k = dual ? users : n_ap;
  ComplexMatrix a(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      Complex s{};
      if (dual) {
        for (std::size_t n = 0; n < n_ap; ++n) s += std::conj(gains(n, i)) * gains(n, j);
      } else {
        for (std::size_t m = 0; m < users; ++m) s += gains(i, m) * std::conj(gains(j, m));
      }
      a(i, j) = s;
      a(j, i) = std::conj(s);
    }
    a(i, i) = a(i, i).real() + bf_noise_w;
  }
  std::vector<double> eq(k);
  for (std::size_t i = 0; i < k; ++i) eq[i] = 1.0 / std::sqrt(a(i, i).real());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a(i, j) *= eq[i] * eq[j];
  // diagonal loading floor: noise terms far below the gain scale vanish in rounding
  for (std::size_t i = 0; i < k; ++i) a(i, i) = 1.0 + kBeamformLoading;

  ComplexMatrix dirs(n_ap, users);
  if (dual) {
    const ComplexMatrix inv = math::solve_hermitian(a, ComplexMatrix::identity(users));
    for (std::size_t m = 0; m < users; ++m)
      for (std::size_t n = 0; n < n_ap; ++n) {
        Complex s{};
        for (std::size_t j = 0; j < users; ++j) s += gains(n, j) * (eq[j] * inv(j, m));
        dirs(n, m) = s;
      }
  } else {
    ComplexMatrix rhs(n_ap, users);
    for (std::size_t n = 0; n < n_ap; ++n)
      for (std::size_t m = 0; m < users; ++m) rhs(n, m) = eq[n] * gains(n, m);
    const ComplexMatrix x = math::solve_hermitian(a, rhs);
    for (std::size_t n = 0; n < n_ap; ++n)
      for (std::size_t m = 0; m < users; ++m) dirs(n, m) = eq[n] * x(n, m);
  }

  ComplexMatrix beams(n_ap, users);
  for (std::size_t m = 0; m < users; ++m) {
    double norm2 = 0.0;
    for (std::size_t n = 0; n < n_ap; ++n) norm2 += std::norm(dirs(n, m));
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      throw NumericError("beamform: degenerate beam direction for user " + std::to_string(m));
    }
    const double scale = std::sqrt(powers[m] / norm2);
    for (std::size_t n = 0; n < n_ap; ++n) beams(n, m) = dirs(n, m) * scale;
  }
  return beams;
}

std::vector<double> compute_rates(const ComplexMatrix& gains, const ComplexMatrix& beams,
                                  double bandwidth_hz, double noise_w) {
  const std::size_t n_ap = gains.rows(), users = gains.cols();
  if (beams.rows() != n_ap || beams.cols() != users) {
    throw DimensionError("compute_rates: beamformers do not match the channel");
  }
  std::vector<double> rates(users);
  for (std::size_t m = 0; m < users; ++m) {
    double signal = 0.0, interference = 0.0;
    for (std::size_t j = 0; j < users; ++j) {
      Complex s{};
      for (std::size_t n = 0; n < n_ap; ++n) s += std::conj(gains(n, m)) * beams(n, j);
      (j == m ? signal : interference) += std::norm(s);
    }
    rates[m] = bandwidth_hz * std::log2(1.0 + signal / (interference + noise_w));
  }
  return rates;
}

}  // namespace csac::env
