#pragma once

#include "csac/math/autodiff.hpp"
#include "csac/math/rng.hpp"
#include "csac/math/tensor.hpp"

namespace csac::math {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEpsilon = 1e-6;

struct ReparamSample {
  Var pre_squash;     // mean + exp(log_std) * noise
  RealTensor noise;   // the standard-normal draw, reusable
};

struct SquashedSample {
  Var action;    // tanh(pre_squash), in (-1, 1)
  Var log_prob;  // batch x 1
};

Var clamp_log_std(Var log_std);

/// Draws noise ~ N(0, I) with the shape of `mean` and returns the
/// reparameterised pre-squash sample. `log_std` is clamped first.
ReparamSample gaussian_reparam(Var mean, Var log_std, SeededRng& rng);
/// Same, with caller-supplied noise.
ReparamSample gaussian_reparam(Var mean, Var log_std, RealTensor noise);

/// Squashes with tanh and returns the change-of-variables log density:
/// sum_j [log N(pre_j; mean_j, std_j) - log(1 - tanh(pre_j)^2 + eps)].
SquashedSample tanh_squash_logprob(Var pre_squash, Var mean, Var log_std);

/// Non-recording sampler used by actors: tanh(mean + exp(clamp(log_std)) * noise).
RealTensor sample_squashed(const RealTensor& mean, const RealTensor& log_std, SeededRng& rng);

}  // namespace csac::math
