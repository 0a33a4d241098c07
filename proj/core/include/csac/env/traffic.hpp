#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csac/env/config.hpp"
#include "csac/math/rng.hpp"

namespace csac::env {

/// Per-slot arrivals. For each slice: lambda = max(N(mu, sigma), 0), then
/// count ~ Poisson(lambda * slot). When the total exceeds `max_users` the
/// excess users are dropped one at a time, uniformly over the remaining users.
std::vector<std::uint32_t> sample_arrivals(std::span<const SliceSpec> slices, double slot_s,
                                           std::size_t max_users, math::SeededRng& rng);

/// Poisson draw at a fixed rate; exposed for the arrival-model tests.
std::uint32_t sample_poisson_count(double rate, double slot_s, math::SeededRng& rng);

}  // namespace csac::env
