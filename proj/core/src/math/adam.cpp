#include "csac/math/adam.hpp"

#include <cmath>
#include <string>

#include "csac/errors.hpp"

namespace csac::math {

AdamState::AdamState(std::span<RealTensor* const> params, AdamConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto* p : params) {
    m_.emplace_back(p->shape());
    v_.emplace_back(p->shape());
  }
}

void AdamState::step(std::span<RealTensor* const> params) {
  if (params.size() != m_.size()) {
    throw DimensionError("Adam: expected " + std::to_string(m_.size()) + " parameters, got " +
                         std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(m_[i])) throw DimensionError("Adam: parameter shape changed");
    for (double g : std::as_const(*params[i]).grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("Adam: non-finite gradient in parameter " + std::to_string(i));
      }
    }
  }

  ++steps_;
  const auto& c = config_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->values();
    auto g = std::as_const(*params[i]).grad();
    auto m = m_[i].values();
    auto v = v_[i].values();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      w[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

void AdamState::restore(AdamConfig config, std::uint64_t steps, std::vector<RealTensor> m,
                        std::vector<RealTensor> v) {
  if (m.size() != v.size()) throw DimensionError("Adam restore: moment lists differ in length");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i].same_shape(v[i])) throw DimensionError("Adam restore: moment shapes differ");
  }
  config_ = config;
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace csac::math
