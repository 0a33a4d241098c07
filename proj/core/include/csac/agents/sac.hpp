#pragma once

#include <utility>

#include "csac/agents/agent.hpp"
#include "csac/math/adam.hpp"

namespace csac::agents {

/// Outcome of a policy step, shared with the temperature step that follows it.
struct PolicyStepResult {
  double loss = 0.0;
  math::RealTensor log_prob;  // B x 1, detached
};

/// Stochastic actor-critic with twin clipped Q, delayed policy / temperature /
/// target updates and a learned temperature.
///
/// Algo::Csac keeps five nets (policy, Q1, Q2, Q1', Q2'). Algo::Sac6 adds a
/// state-value net V trained toward min Q'(s, a~pi) - alpha log pi, and the
/// critics bootstrap from V(s') instead of the target Qs.
class SacAgent final : public Agent {
 public:
  SacAgent(Algo variant, std::size_t state_dim, std::size_t action_dim, const Hyper& hyper);

  Algo algo() const noexcept override { return variant_; }
  std::vector<const math::Mlp*> networks() const override;
  UpdateStats update(const Batch& batch, math::SeededRng& rng) override;
  PolicyModel policy_model() const override;
  double alpha() const noexcept override;

  // Individual stages, exposed for tests and benchmarks.
  /// y = scale r + gamma (1 - done) (min_i Q'_i(s', a') - alpha log pi(a'|s')), a' ~ pi(s').
  /// For sac6 the bracket is V(s').
  math::RealTensor td_target(const Batch& batch, math::SeededRng& rng) const;
  /// One Adam step on each critic toward `targets`; returns both losses.
  std::pair<double, double> update_q(const Batch& batch, const math::RealTensor& targets);
  /// One Adam step on the value net (sac6 only); returns its loss.
  double update_value(const Batch& batch, math::SeededRng& rng);
  PolicyStepResult update_policy(const Batch& batch, math::SeededRng& rng);
  /// One Adam step on log alpha for J = mean(-alpha (log pi + target entropy)).
  double update_alpha(const math::RealTensor& log_prob);
  void update_targets();

  double target_entropy() const noexcept { return target_entropy_; }
  math::Mlp& policy() noexcept { return policy_; }
  math::Mlp& q1() noexcept { return q1_; }
  math::Mlp& q2() noexcept { return q2_; }
  math::Mlp& q1_target() noexcept { return q1_target_; }
  math::Mlp& q2_target() noexcept { return q2_target_; }
  math::Mlp& value() noexcept { return value_; }
  math::RealTensor& log_alpha_param() noexcept { return log_alpha_; }

 protected:
  std::vector<math::Mlp*> mutable_networks() override;
  double log_alpha() const noexcept override { return log_alpha_[0]; }
  void set_log_alpha(double v) override { log_alpha_[0] = v; }

 private:
  Algo variant_;
  double target_entropy_;
  math::Mlp policy_, q1_, q2_, q1_target_, q2_target_, value_;
  math::RealTensor log_alpha_;
  math::AdamState policy_opt_, q1_opt_, q2_opt_, value_opt_, alpha_opt_;
};

/// Deterministic actor-critic baseline: actor, critic and their targets.
class DdpgAgent final : public Agent {
 public:
  DdpgAgent(std::size_t state_dim, std::size_t action_dim, const Hyper& hyper);

  Algo algo() const noexcept override { return Algo::Ddpg; }
  std::vector<const math::Mlp*> networks() const override;
  UpdateStats update(const Batch& batch, math::SeededRng& rng) override;
  PolicyModel policy_model() const override;

  /// y = scale r + gamma (1 - done) Q'(s', mu'(s')).
  math::RealTensor td_target(const Batch& batch) const;
  double update_critic(const Batch& batch, const math::RealTensor& targets);
  /// One Adam step on the actor minimising -mean Q(s, mu(s)).
  double update_actor(const Batch& batch);
  void update_targets();

  math::Mlp& actor() noexcept { return actor_; }
  math::Mlp& critic() noexcept { return critic_; }
  math::Mlp& actor_target() noexcept { return actor_target_; }
  math::Mlp& critic_target() noexcept { return critic_target_; }

 protected:
  std::vector<math::Mlp*> mutable_networks() override;

 private:
  math::Mlp actor_, critic_, actor_target_, critic_target_;
  math::AdamState actor_opt_, critic_opt_;
};

}  // namespace csac::agents
