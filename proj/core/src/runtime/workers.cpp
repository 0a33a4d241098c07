#include "csac/runtime/workers.hpp"

#include <bit>

#include "csac/errors.hpp"

namespace csac::runtime {

std::uint64_t staleness_bucket(std::uint64_t age) noexcept { return age == 0 ? 0 : std::bit_floor(age); }

ActorWorker::ActorWorker(std::size_t id, const env::EnvConfig& config, std::uint64_t env_seed, math::SeededRng rng,
                         agents::ReplayBuffer& buffer, const ParameterMemory& memory, std::size_t refresh_interval,
                         std::uint64_t start_timesteps)
    : id_(id),
      env_(config),
      rng_(std::move(rng)),
      buffer_(buffer),
      memory_(memory),
      refresh_interval_(refresh_interval),
      start_timesteps_(start_timesteps) {
  if (refresh_interval == 0) throw ConfigError("runtime.refresh_interval must be >= 1");
  state_ = env_.reset(env_seed);
}

void ActorWorker::refresh() {
  ++refreshes_;
  const auto snap = memory_.fetch();
  if (!snap || snap->version <= version_) return;
  policy_ = decode_policy(snap->payload);
  version_ = snap->version;
  age_ = 0;
}

ActorWorker::Step ActorWorker::step(std::uint64_t global_index) {
  if (steps_ % refresh_interval_ == 0) refresh();
  ++histogram_[staleness_bucket(age_)];
  max_age_ = std::max(max_age_, age_);

  Step out;
  std::vector<double> action;
  if (global_index < start_timesteps_ || !policy_) {
    action = agents::random_action(env_.action_dim(), rng_);
    out.random_action = true;
  } else {
    action = agents::select_action(*policy_, state_, agents::ActMode::Explore, rng_);
  }
  auto outcome = env_.step(action);
  // Episodes end only by the time limit, so the last transition still bootstraps.
  buffer_.push({state_, std::move(action), outcome.reward, outcome.state, false});
  out.reward = outcome.reward;
  out.episode_end = outcome.done;
  out.info = std::move(outcome.info);
  state_ = outcome.done ? env_.reset() : std::move(outcome.state);
  ++steps_;
  ++age_;
  return out;
}

LearnerWorker::LearnerWorker(std::size_t id, std::unique_ptr<agents::Agent> agent,
                             std::vector<agents::ReplayBuffer*> buffers, ParameterMemory& memory,
                             std::size_t publish_interval, math::SeededRng rng)
    : id_(id),
      agent_(std::move(agent)),
      buffers_(std::move(buffers)),
      memory_(memory),
      publish_interval_(publish_interval),
      rng_(std::move(rng)) {
  if (buffers_.empty()) throw ConfigError("learner needs at least one buffer");
  if (publish_interval == 0) throw ConfigError("runtime.publish_interval must be >= 1");
}

LearnerWorker::Result LearnerWorker::try_update(agents::UpdateStats* stats) {
  if (failed_) return Result::Failed;
  const std::size_t batch_size = agent_->hyper().batch_size;
  std::optional<agents::Batch> batch;
  for (std::size_t tries = 0; tries < buffers_.size() && !batch; ++tries) {
    batch = buffers_[next_buffer_]->sample(batch_size, rng_);
    next_buffer_ = (next_buffer_ + 1) % buffers_.size();
  }
  if (!batch) return Result::Idle;
  try {
    const auto st = agent_->update(*batch, rng_);
    if (stats) *stats = st;
  } catch (const NumericError&) {
    ++numeric_failures_;
    if (++consecutive_failures_ >= kMaxNumericFailures) {
      failed_ = true;
      return Result::Failed;
    }
    return Result::Idle;
  }
  consecutive_failures_ = 0;
  ++updates_;
  if (updates_ % publish_interval_ == 0 && memory_.publish(encode_policy(agent_->policy_model()), id_) > 0) {
    ++publishes_;
  }
  return Result::Updated;
}

}  // namespace csac::runtime
