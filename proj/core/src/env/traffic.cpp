#include "csac/env/traffic.hpp"

#include <algorithm>
#include <numeric>

#include "csac/errors.hpp"

namespace csac::env {

std::uint32_t sample_poisson_count(double rate, double slot_s, math::SeededRng& rng) {
  if (!(slot_s > 0.0)) throw ConfigError("slot duration must be > 0");
  return static_cast<std::uint32_t>(rng.poisson(rate * slot_s));
}

std::vector<std::uint32_t> sample_arrivals(std::span<const SliceSpec> slices, double slot_s,
                                           std::size_t max_users, math::SeededRng& rng) {
  std::vector<std::uint32_t> counts(slices.size(), 0);
  for (std::size_t l = 0; l < slices.size(); ++l) {
    const auto& s = slices[l];
    const double lambda = s.traffic_std > 0.0 ? std::max(rng.normal(s.traffic_mean, s.traffic_std), 0.0)
                                              : std::max(s.traffic_mean, 0.0);
    counts[l] = sample_poisson_count(lambda, slot_s, rng);
  }
  std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  while (total > max_users) {
    // Pick a user uniformly among all remaining ones and drop it.
    std::size_t pick = rng.index(total);
    for (auto& c : counts) {
      if (pick < c) {
        --c;
        break;
      }
      pick -= c;
    }
    --total;
  }
  return counts;
}

}  // namespace csac::env
