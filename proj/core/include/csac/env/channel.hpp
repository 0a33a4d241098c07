#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csac/env/config.hpp"
#include "csac/math/complex_matrix.hpp"
#include "csac/math/rng.hpp"

namespace csac::env {

/// Gains from N APs to M single-antenna users for one slot.
struct ChannelRealization {
  math::ComplexMatrix gains;            // N x M, column m is h_m
  std::vector<double> distances_km;     // N x M row-major
  std::vector<std::size_t> serving_ap;  // n(m) per user

  std::size_t ap_count() const noexcept { return gains.rows(); }
  std::size_t user_count() const noexcept { return gains.cols(); }
  /// Association indicator chi_hat(n, m).
  bool associated(std::size_t n, std::size_t m) const { return serving_ap[m] == n; }
  /// Users served by each AP.
  std::vector<std::size_t> users_per_ap() const;
};

/// 148.1 + 37.6 log_b(d_km) dB, b = 2 by default and 10 with `log10`.
double path_loss_db(double distance_km, bool log10);

/// |h| for unit small-scale fading: 10^(-L(d)/20) * sqrt(antenna_gain * shadowing),
/// with both gains given in dB.
double large_scale_amplitude(const Topology& topo, double distance_km, double shadowing_db_sample);

/// Draws distances U[0, max_distance] (clamped below at min_distance), log-normal
/// shadowing, CN(0, 1) fading, and associates each user with its strongest AP
/// (ties go to the lowest index).
ChannelRealization draw_channel(const Topology& topo, std::size_t users, math::SeededRng& rng);

/// Assigns each user to argmax_n |h_{n,m}|.
std::vector<std::size_t> strongest_ap_association(const math::ComplexMatrix& gains);

/// Relative diagonal loading added to the equilibrated Gram matrix.
inline constexpr double kBeamformLoading = 1e-10;

/// MMSE beamformers, column m = sqrt(p_m) w_m / ||w_m|| with
/// w_m = (I_N + sum_j h_j h_j^H / bf_noise)^-1 h_m.
///
/// For M <= N it uses the push-through identity
/// (I + H H^H / s)^-1 H = s H (s I_M + H^H H)^-1; otherwise the N x N system
/// directly. The Gram matrix is diagonally equilibrated, which keeps it well
/// conditioned when channel gains span many orders of magnitude.
math::ComplexMatrix beamform(const math::ComplexMatrix& gains, std::span<const double> powers,
                             double bf_noise_w);

/// R_m = B log2(1 + |h_m^H v_m|^2 / (sum_{j != m} |h_m^H v_j|^2 + noise)).
std::vector<double> compute_rates(const math::ComplexMatrix& gains, const math::ComplexMatrix& beams,
                                  double bandwidth_hz, double noise_w);

}  // namespace csac::env
