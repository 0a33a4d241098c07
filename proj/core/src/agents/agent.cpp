#include "csac/agents/agent.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "csac/agents/sac.hpp"
#include "csac/errors.hpp"
#include "csac/math/policy_head.hpp"

namespace csac::agents {

std::string_view to_string(Algo a) noexcept {
  switch (a) {
    case Algo::Csac: return "csac";
    case Algo::Sac6: return "sac6";
    case Algo::Ddpg: return "ddpg";
  }
  return "unknown";
}

std::optional<Algo> parse_algo(std::string_view name) noexcept {
  for (Algo a : {Algo::Csac, Algo::Sac6, Algo::Ddpg}) {
    if (name == to_string(a)) return a;
  }
  return std::nullopt;
}

math::Activation Hyper::activation_for(Algo algo) const noexcept {
  if (activation) return *activation;
  return algo == Algo::Csac ? math::Activation::Gelu : math::Activation::Relu;
}

void Hyper::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(batch_size >= 1, "agent.batch_size must be >= 1");
  require(hidden_layers >= 1, "agent.hidden_layers must be >= 1");
  require(hidden_width >= 1, "agent.hidden_width must be >= 1");
  require(positive(actor_lr), "agent.actor_lr must be > 0");
  require(positive(critic_lr), "agent.critic_lr must be > 0");
  require(positive(alpha_lr), "agent.alpha_lr must be > 0");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma < 1.0, "agent.gamma must be in [0, 1)");
  require(std::isfinite(tau) && tau > 0.0 && tau <= 1.0, "agent.tau must be in (0, 1]");
  require(freq >= 1, "agent.freq must be >= 1");
  require(positive(initial_alpha), "agent.initial_alpha must be > 0");
  require(std::isnan(target_entropy) || std::isfinite(target_entropy), "agent.target_entropy must be finite");
  require(positive(reward_scale), "agent.reward_scale must be > 0");
  require(std::isfinite(ddpg_noise_std) && ddpg_noise_std >= 0.0, "agent.ddpg_noise_std must be >= 0");
  require(max_timesteps >= 1, "run.max_steps must be >= 1");
  require(replay_capacity >= batch_size, "agent.replay_capacity must be >= batch_size");
}

Hyper default_hyper(bool paper_scale) {
  Hyper h;
  if (paper_scale) {
    h.hidden_layers = 5;
    h.hidden_width = 128;
    h.max_timesteps = 250000;
    h.start_timesteps = 10000;
  }
  return h;
}

std::vector<double> select_action(const PolicyModel& policy, std::span<const double> state, ActMode mode,
                                  math::SeededRng& rng) {
  if (state.size() != policy.net.input_width()) throw DimensionError("select_action: state width mismatch");
  const std::size_t a = policy.action_dim;
  const math::RealTensor out = policy.net.forward(math::RealTensor({1, state.size()}, {state.begin(), state.end()}));
  std::vector<double> act(a);
  if (policy.algo == Algo::Ddpg) {
    for (std::size_t j = 0; j < a; ++j) {
      double v = std::tanh(out[j]);
      if (mode == ActMode::Explore) v = std::clamp(v + rng.normal(0.0, policy.exploration_std), -1.0, 1.0);
      act[j] = v;
    }
    return act;
  }
  if (mode == ActMode::Eval) {
    for (std::size_t j = 0; j < a; ++j) act[j] = std::tanh(out[j]);
    return act;
  }
  math::RealTensor mean({1, a}), log_std({1, a});
  for (std::size_t j = 0; j < a; ++j) {
    mean[j] = out[j];
    log_std[j] = out[a + j];
  }
  const auto sample = math::sample_squashed(mean, log_std, rng);
  std::ranges::copy(sample.values(), act.begin());
  return act;
}

std::vector<double> random_action(std::size_t action_dim, math::SeededRng& rng) {
  std::vector<double> a(action_dim);
  for (auto& x : a) x = rng.uniform(-1.0, 1.0);
  return a;
}

void write_policy(math::BinaryWriter& w, const PolicyModel& p) {
  w.u8(static_cast<std::uint8_t>(p.algo));
  w.u32(static_cast<std::uint32_t>(p.action_dim));
  w.f64(p.exploration_std);
  math::write_mlp(w, p.net);
}

PolicyModel read_policy(math::BinaryReader& r) {
  PolicyModel p;
  const auto algo = r.u8();
  if (algo > static_cast<std::uint8_t>(Algo::Ddpg)) throw FormatError("policy: unknown algorithm tag");
  p.algo = static_cast<Algo>(algo);
  p.action_dim = r.u32();
  p.exploration_std = r.f64();
  p.net = math::read_mlp(r);
  const std::size_t expected = p.algo == Algo::Ddpg ? p.action_dim : 2 * p.action_dim;
  if (p.net.output_width() != expected) throw FormatError("policy: output width does not match action size");
  return p;
}

Agent::Agent(std::size_t state_dim, std::size_t action_dim, Hyper hyper)
    : state_dim_(state_dim), action_dim_(action_dim), hyper_(std::move(hyper)) {
  if (state_dim == 0 || action_dim == 0) throw DimensionError("Agent: state and action sizes must be >= 1");
  hyper_.validate();
}

std::size_t Agent::parameter_count() const {
  std::size_t n = 0;
  for (const auto* net : networks()) n += net->parameter_count();
  return n;
}

bool Agent::all_finite() const {
  return std::isfinite(log_alpha()) &&
         std::ranges::all_of(networks(), [](const math::Mlp* n) { return n->all_finite(); });
}

void Agent::save(std::ostream& out) const {
  math::BinaryWriter w(out);
  math::write_header(w);
  w.u8(static_cast<std::uint8_t>(algo()));
  w.u32(static_cast<std::uint32_t>(state_dim_));
  w.u32(static_cast<std::uint32_t>(action_dim_));
  const auto nets = networks();
  w.u32(static_cast<std::uint32_t>(nets.size()));
  for (const auto* n : nets) math::write_mlp(w, *n);
  w.f64(log_alpha());
  w.u64(counters_.learner_steps);
  w.u64(counters_.q_updates);
  w.u64(counters_.policy_updates);
  w.u64(counters_.alpha_updates);
  w.u64(counters_.target_updates);
  if (!out) throw FormatError("checkpoint: write failed");
}

void Agent::load(std::istream& in) {
  math::BinaryReader r(in);
  math::read_header(r);
  if (r.u8() != static_cast<std::uint8_t>(algo())) throw FormatError("checkpoint: algorithm mismatch");
  if (r.u32() != state_dim_ || r.u32() != action_dim_) throw FormatError("checkpoint: state/action size mismatch");
  auto nets = mutable_networks();
  if (r.u32() != nets.size()) throw FormatError("checkpoint: network count mismatch");
  std::vector<math::Mlp> loaded;
  for (const auto* n : nets) {
    loaded.push_back(math::read_mlp(r));
    if (!loaded.back().same_architecture(*n)) throw FormatError("checkpoint: network architecture mismatch");
  }
  const double la = r.f64();
  UpdateCounters c;
  c.learner_steps = r.u64();
  c.q_updates = r.u64();
  c.policy_updates = r.u64();
  c.alpha_updates = r.u64();
  c.target_updates = r.u64();
  for (std::size_t i = 0; i < nets.size(); ++i) nets[i]->copy_from(loaded[i]);
  set_log_alpha(la);
  counters_ = c;
}

std::unique_ptr<Agent> make_agent(Algo algo, std::size_t state_dim, std::size_t action_dim, const Hyper& hyper) {
  if (algo == Algo::Ddpg) return std::make_unique<DdpgAgent>(state_dim, action_dim, hyper);
  return std::make_unique<SacAgent>(algo, state_dim, action_dim, hyper);
}

std::size_t expected_network_count(Algo algo) noexcept {
  switch (algo) {
    case Algo::Csac: return 5;
    case Algo::Sac6: return 6;
    case Algo::Ddpg: return 4;
  }
  return 0;
}

}  // namespace csac::agents
