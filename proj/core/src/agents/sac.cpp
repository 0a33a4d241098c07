#include "csac/agents/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csac/errors.hpp"
#include "csac/math/policy_head.hpp"

namespace csac::agents {

using math::ParamMode;
using math::RealTensor;
using math::Tape;
using math::Var;
namespace ad = math::ad;

namespace {

std::vector<std::size_t> widths(std::size_t in, std::size_t out, const Hyper& h) {
  std::vector<std::size_t> w{in};
  for (std::size_t i = 0; i < h.hidden_layers; ++i) w.push_back(h.hidden_width);
  w.push_back(out);
  return w;
}

RealTensor hcat(const RealTensor& a, const RealTensor& b) {
  RealTensor out({a.rows(), a.cols() + b.cols()});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy_n(a.data() + r * a.cols(), a.cols(), out.data() + r * out.cols());
    std::copy_n(b.data() + r * b.cols(), b.cols(), out.data() + r * out.cols() + a.cols());
  }
  return out;
}

struct InferenceSample {
  RealTensor actions;   // B x A
  RealTensor log_prob;  // B x 1
};

// Non-recording counterpart of gaussian_reparam + tanh_squash_logprob.
InferenceSample sample_policy(const math::Mlp& policy, const RealTensor& states, std::size_t a,
                              math::SeededRng& rng) {
  const RealTensor out = policy.forward(states);
  const std::size_t b = out.rows();
  InferenceSample s{RealTensor({b, a}), RealTensor({b, 1})};
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < b; ++i) {
    double lp = 0.0;
    for (std::size_t j = 0; j < a; ++j) {
      const double mean = out.at(i, j);
      const double ls = std::clamp(out.at(i, a + j), math::kLogStdMin, math::kLogStdMax);
      const double eps = rng.normal();
      const double act = std::tanh(mean + std::exp(ls) * eps);
      s.actions.at(i, j) = act;
      lp += -0.5 * eps * eps - ls + log_norm - std::log(1.0 - act * act + math::kSquashEpsilon);
    }
    s.log_prob[i] = lp;
  }
  return s;
}

RealTensor min_q(const math::Mlp& a, const math::Mlp& b, const RealTensor& input) {
  RealTensor qa = a.forward(input);
  const RealTensor qb = b.forward(input);
  for (std::size_t i = 0; i < qa.size(); ++i) qa[i] = std::min(qa[i], qb[i]);
  return qa;
}

bool grads_finite(const std::vector<RealTensor*>& params) {
  return std::ranges::all_of(params, [](RealTensor* p) {
    return std::ranges::all_of(p->grad(), [](double g) { return std::isfinite(g); });
  });
}

void zero_grads(const std::vector<RealTensor*>& params) {
  for (auto* p : params) p->zero_grad();
}

double checked_loss(Tape& t, Var loss, const char* what) {
  const double v = t.value(loss).item();
  if (!std::isfinite(v)) {
    t.clear();
    throw NumericError(std::string(what) + ": non-finite loss");
  }
  return v;
}

void checked_step(math::AdamState& opt, const std::vector<RealTensor*>& params, const char* what) {
  if (!grads_finite(params)) throw NumericError(std::string(what) + ": non-finite gradient");
  opt.step(params);
}

void validate_batch(const Batch& b, std::size_t s, std::size_t a) {
  if (b.size() == 0 || b.states.cols() != s || b.next_states.cols() != s || b.actions.cols() != a ||
      b.states.rows() != b.size() || b.actions.rows() != b.size() || b.dones.rows() != b.size()) {
    throw DimensionError("update: batch does not match agent dimensions");
  }
}

math::AdamConfig adam(double lr) {
  math::AdamConfig c;
  c.learning_rate = lr;
  return c;
}

}  // namespace

// ---------------------------------------------------------------- SAC

SacAgent::SacAgent(Algo variant, std::size_t state_dim, std::size_t action_dim, const Hyper& hyper)
    : Agent(state_dim, action_dim, hyper), variant_(variant), log_alpha_(RealTensor::matrix(1, 1, {0.0})) {
  if (variant == Algo::Ddpg) throw ConfigError("SacAgent: ddpg is not a SAC variant");
  target_entropy_ = std::isnan(hyper_.target_entropy) ? -static_cast<double>(action_dim) : hyper_.target_entropy;
  log_alpha_[0] = std::log(hyper_.initial_alpha);
  const auto act = hyper_.activation_for(variant);
  math::SeededRng root(hyper_.seed);
  auto r0 = root.derive(0), r1 = root.derive(1), r2 = root.derive(2), r3 = root.derive(3);
  policy_ = math::Mlp(widths(state_dim, 2 * action_dim, hyper_), act, r0);
  q1_ = math::Mlp(widths(state_dim + action_dim, 1, hyper_), act, r1);
  q2_ = math::Mlp(widths(state_dim + action_dim, 1, hyper_), act, r2);
  q1_target_ = q1_;
  q2_target_ = q2_;
  if (variant_ == Algo::Sac6) value_ = math::Mlp(widths(state_dim, 1, hyper_), act, r3);

  policy_opt_ = math::AdamState(policy_.parameters(), adam(hyper_.actor_lr));
  q1_opt_ = math::AdamState(q1_.parameters(), adam(hyper_.critic_lr));
  q2_opt_ = math::AdamState(q2_.parameters(), adam(hyper_.critic_lr));
  if (variant_ == Algo::Sac6) value_opt_ = math::AdamState(value_.parameters(), adam(hyper_.critic_lr));
  std::vector<RealTensor*> la{&log_alpha_};
  alpha_opt_ = math::AdamState(la, adam(hyper_.alpha_lr));
}

std::vector<const math::Mlp*> SacAgent::networks() const {
  std::vector<const math::Mlp*> n{&policy_, &q1_, &q2_, &q1_target_, &q2_target_};
  if (variant_ == Algo::Sac6) n.push_back(&value_);
  return n;
}

std::vector<math::Mlp*> SacAgent::mutable_networks() {
  std::vector<math::Mlp*> n{&policy_, &q1_, &q2_, &q1_target_, &q2_target_};
  if (variant_ == Algo::Sac6) n.push_back(&value_);
  return n;
}

double SacAgent::alpha() const noexcept { return std::exp(log_alpha_[0]); }

PolicyModel SacAgent::policy_model() const { return {variant_, policy_, action_dim_, 0.0}; }

RealTensor SacAgent::td_target(const Batch& batch, math::SeededRng& rng) const {
  validate_batch(batch, state_dim_, action_dim_);
  RealTensor bootstrap;
  if (variant_ == Algo::Sac6) {
    bootstrap = value_.forward(batch.next_states);
  } else {
    const auto next = sample_policy(policy_, batch.next_states, action_dim_, rng);
    bootstrap = min_q(q1_target_, q2_target_, hcat(batch.next_states, next.actions));
    const double a = alpha();
    for (std::size_t i = 0; i < bootstrap.size(); ++i) bootstrap[i] -= a * next.log_prob[i];
  }
  RealTensor y({batch.size(), 1});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = hyper_.reward_scale * batch.rewards[i] + hyper_.gamma * (1.0 - batch.dones[i]) * bootstrap[i];
  }
  return y;
}

std::pair<double, double> SacAgent::update_q(const Batch& batch, const RealTensor& targets) {
  Tape t;
  Var sa = ad::concat_cols(t.constant(batch.states), t.constant(batch.actions));
  Var y = t.constant(targets);
  Var l1 = ad::mean(ad::square(ad::sub(q1_.forward(t, sa), y)));
  Var l2 = ad::mean(ad::square(ad::sub(q2_.forward(t, sa), y)));
  const double v1 = checked_loss(t, l1, "update_q"), v2 = checked_loss(t, l2, "update_q");
  const auto p1 = q1_.parameters(), p2 = q2_.parameters();
  zero_grads(p1);
  zero_grads(p2);
  t.backward(ad::add(l1, l2));
  if (!grads_finite(p1) || !grads_finite(p2)) throw NumericError("update_q: non-finite gradient");
  q1_opt_.step(p1);
  q2_opt_.step(p2);
  return {v1, v2};
}

double SacAgent::update_value(const Batch& batch, math::SeededRng& rng) {
  if (variant_ != Algo::Sac6) throw StateError("update_value: only sac6 keeps a value net");
  const auto cur = sample_policy(policy_, batch.states, action_dim_, rng);
  RealTensor vt = min_q(q1_target_, q2_target_, hcat(batch.states, cur.actions));
  const double a = alpha();
  for (std::size_t i = 0; i < vt.size(); ++i) vt[i] -= a * cur.log_prob[i];
  Tape t;
  Var loss = ad::mean(ad::square(ad::sub(value_.forward(t, t.constant(batch.states)), t.constant(vt))));
  const double v = checked_loss(t, loss, "update_value");
  const auto p = value_.parameters();
  zero_grads(p);
  t.backward(loss);
  checked_step(value_opt_, p, "update_value");
  return v;
}

PolicyStepResult SacAgent::update_policy(const Batch& batch, math::SeededRng& rng) {
  Tape t;
  Var s = t.constant(batch.states);
  Var out = policy_.forward(t, s);
  Var mean = ad::slice_cols(out, 0, action_dim_);
  Var log_std = ad::slice_cols(out, action_dim_, 2 * action_dim_);
  const auto rep = math::gaussian_reparam(mean, log_std, rng);
  const auto sq = math::tanh_squash_logprob(rep.pre_squash, mean, log_std);
  Var sa = ad::concat_cols(s, sq.action);
  Var q = ad::minimum(q1_.forward(t, sa, ParamMode::Frozen), q2_.forward(t, sa, ParamMode::Frozen));
  Var loss = ad::mean(ad::sub(ad::scale(sq.log_prob, alpha()), q));
  PolicyStepResult r;
  r.loss = checked_loss(t, loss, "update_policy");
  r.log_prob = t.value(sq.log_prob);
  const auto p = policy_.parameters();
  zero_grads(p);
  t.backward(loss);
  checked_step(policy_opt_, p, "update_policy");
  return r;
}

double SacAgent::update_alpha(const RealTensor& log_prob) {
  RealTensor c(log_prob.shape());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -(log_prob[i] + target_entropy_);
  Tape t;
  Var a = ad::exp(t.parameter(log_alpha_));
  Var loss = ad::mean(ad::mul_scalar(t.constant(std::move(c)), a));
  const double v = checked_loss(t, loss, "update_alpha");
  std::vector<RealTensor*> p{&log_alpha_};
  zero_grads(p);
  t.backward(loss);
  checked_step(alpha_opt_, p, "update_alpha");
  return v;
}

void SacAgent::update_targets() {
  q1_target_.polyak_from(q1_, hyper_.tau);
  q2_target_.polyak_from(q2_, hyper_.tau);
}

UpdateStats SacAgent::update(const Batch& batch, math::SeededRng& rng) {
  validate_batch(batch, state_dim_, action_dim_);
  UpdateStats st;
  st.alpha = alpha();
  const RealTensor y = td_target(batch, rng);
  const auto [l1, l2] = update_q(batch, y);
  st.q_loss = 0.5 * (l1 + l2);
  if (variant_ == Algo::Sac6) update_value(batch, rng);
  ++counters_.learner_steps;
  ++counters_.q_updates;
  if (counters_.learner_steps % hyper_.freq == 0) {
    const auto pr = update_policy(batch, rng);
    st.pi_loss = pr.loss;
    double mean_lp = 0.0;
    for (double v : pr.log_prob.values()) mean_lp += v;
    st.entropy = -mean_lp / static_cast<double>(pr.log_prob.size());
    st.alpha_loss = update_alpha(pr.log_prob);
    update_targets();
    ++counters_.policy_updates;
    ++counters_.alpha_updates;
    ++counters_.target_updates;
    st.delayed = true;
    st.alpha = alpha();
  }
  return st;
}

// ---------------------------------------------------------------- DDPG

DdpgAgent::DdpgAgent(std::size_t state_dim, std::size_t action_dim, const Hyper& hyper)
    : Agent(state_dim, action_dim, hyper) {
  const auto act = hyper_.activation_for(Algo::Ddpg);
  math::SeededRng root(hyper_.seed);
  auto r0 = root.derive(0), r1 = root.derive(1);
  actor_ = math::Mlp(widths(state_dim, action_dim, hyper_), act, r0);
  critic_ = math::Mlp(widths(state_dim + action_dim, 1, hyper_), act, r1);
  actor_target_ = actor_;
  critic_target_ = critic_;
  actor_opt_ = math::AdamState(actor_.parameters(), adam(hyper_.actor_lr));
  critic_opt_ = math::AdamState(critic_.parameters(), adam(hyper_.critic_lr));
}

std::vector<const math::Mlp*> DdpgAgent::networks() const {
  return {&actor_, &critic_, &actor_target_, &critic_target_};
}

std::vector<math::Mlp*> DdpgAgent::mutable_networks() { return {&actor_, &critic_, &actor_target_, &critic_target_}; }

PolicyModel DdpgAgent::policy_model() const { return {Algo::Ddpg, actor_, action_dim_, hyper_.ddpg_noise_std}; }

RealTensor DdpgAgent::td_target(const Batch& batch) const {
  validate_batch(batch, state_dim_, action_dim_);
  RealTensor a2 = actor_target_.forward(batch.next_states);
  for (auto& v : a2.values()) v = std::tanh(v);
  const RealTensor q = critic_target_.forward(hcat(batch.next_states, a2));
  RealTensor y({batch.size(), 1});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = hyper_.reward_scale * batch.rewards[i] + hyper_.gamma * (1.0 - batch.dones[i]) * q[i];
  }
  return y;
}

double DdpgAgent::update_critic(const Batch& batch, const RealTensor& targets) {
  Tape t;
  Var sa = ad::concat_cols(t.constant(batch.states), t.constant(batch.actions));
  Var loss = ad::mean(ad::square(ad::sub(critic_.forward(t, sa), t.constant(targets))));
  const double v = checked_loss(t, loss, "update_critic");
  const auto p = critic_.parameters();
  zero_grads(p);
  t.backward(loss);
  checked_step(critic_opt_, p, "update_critic");
  return v;
}

double DdpgAgent::update_actor(const Batch& batch) {
  Tape t;
  Var s = t.constant(batch.states);
  Var a = ad::tanh(actor_.forward(t, s));
  Var loss = ad::neg(ad::mean(critic_.forward(t, ad::concat_cols(s, a), ParamMode::Frozen)));
  const double v = checked_loss(t, loss, "update_actor");
  const auto p = actor_.parameters();
  zero_grads(p);
  t.backward(loss);
  checked_step(actor_opt_, p, "update_actor");
  return v;
}

void DdpgAgent::update_targets() {
  actor_target_.polyak_from(actor_, hyper_.tau);
  critic_target_.polyak_from(critic_, hyper_.tau);
}

UpdateStats DdpgAgent::update(const Batch& batch, math::SeededRng&) {
  validate_batch(batch, state_dim_, action_dim_);
  UpdateStats st;
  st.alpha = 0.0;
  st.q_loss = update_critic(batch, td_target(batch));
  st.pi_loss = update_actor(batch);
  update_targets();
  ++counters_.learner_steps;
  ++counters_.q_updates;
  ++counters_.policy_updates;
  ++counters_.target_updates;
  st.delayed = true;
  return st;
}

}  // namespace csac::agents
