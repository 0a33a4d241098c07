#include "csac/math/policy_head.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csac/errors.hpp"

namespace csac::math {

Var clamp_log_std(Var log_std) { return ad::clamp(log_std, kLogStdMin, kLogStdMax); }

ReparamSample gaussian_reparam(Var mean, Var log_std, SeededRng& rng) {
  const RealTensor& m = mean.tape->value(mean);
  RealTensor noise({m.rows(), m.cols()});
  for (auto& x : noise.values()) x = rng.normal();
  return gaussian_reparam(mean, log_std, std::move(noise));
}

ReparamSample gaussian_reparam(Var mean, Var log_std, RealTensor noise) {
  Tape& t = *mean.tape;
  const RealTensor& m = t.value(mean);
  if (noise.rows() != m.rows() || noise.cols() != m.cols()) {
    throw DimensionError("gaussian_reparam: noise shape differs from mean");
  }
  Var std_dev = ad::exp(clamp_log_std(log_std));
  Var pre = ad::add(mean, ad::mul(std_dev, t.constant(noise)));
  return {pre, std::move(noise)};
}

SquashedSample tanh_squash_logprob(Var pre_squash, Var mean, Var log_std) {
  Var ls = clamp_log_std(log_std);
  Var z = ad::mul(ad::sub(pre_squash, mean), ad::exp(ad::neg(ls)));
  // log N(pre; mean, std) per element
  Var gauss = ad::add_scalar(ad::sub(ad::scale(ad::square(z), -0.5), ls),
                             -0.5 * std::log(2.0 * std::numbers::pi));
  Var action = ad::tanh(pre_squash);
  Var jacobian = ad::log(ad::add_scalar(ad::neg(ad::square(action)), 1.0 + kSquashEpsilon));
  Var log_prob = ad::row_sum(ad::sub(gauss, jacobian));
  return {action, log_prob};
}

RealTensor sample_squashed(const RealTensor& mean, const RealTensor& log_std, SeededRng& rng) {
  if (!mean.same_shape(log_std)) throw DimensionError("sample_squashed: shape mismatch");
  RealTensor out(mean.shape());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double s = std::exp(std::clamp(log_std[i], kLogStdMin, kLogStdMax));
    out[i] = std::tanh(mean[i] + s * rng.normal());
  }
  return out;
}

}  // namespace csac::math
