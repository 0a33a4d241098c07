#include "csac/agents/replay_buffer.hpp"

#include <algorithm>
#include <cmath>

#include "csac/errors.hpp"

namespace csac::agents {

namespace {

bool finite(const std::vector<double>& v) {
  return std::ranges::all_of(v, [](double x) { return std::isfinite(x); });
}

}  // namespace

Batch make_batch(const std::vector<Transition>& transitions) {
  if (transitions.empty()) throw DimensionError("make_batch: empty batch");
  const std::size_t b = transitions.size();
  const std::size_t s = transitions.front().state.size(), a = transitions.front().action.size();
  Batch out{math::RealTensor({b, s}), math::RealTensor({b, a}), math::RealTensor({b, 1}),
            math::RealTensor({b, s}), math::RealTensor({b, 1})};
  for (std::size_t i = 0; i < b; ++i) {
    const auto& t = transitions[i];
    if (t.state.size() != s || t.next_state.size() != s || t.action.size() != a) {
      throw DimensionError("make_batch: inconsistent transition sizes");
    }
    std::ranges::copy(t.state, out.states.values().begin() + static_cast<std::ptrdiff_t>(i * s));
    std::ranges::copy(t.next_state, out.next_states.values().begin() + static_cast<std::ptrdiff_t>(i * s));
    std::ranges::copy(t.action, out.actions.values().begin() + static_cast<std::ptrdiff_t>(i * a));
    out.rewards[i] = t.reward;
    out.dones[i] = t.done ? 1.0 : 0.0;
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw DimensionError("ReplayBuffer: capacity must be >= 1");
  states_.resize(capacity * state_dim);
  next_states_.resize(capacity * state_dim);
  actions_.resize(capacity * action_dim);
  rewards_.resize(capacity);
  dones_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ || t.action.size() != action_dim_) {
    throw DimensionError("ReplayBuffer::push: transition does not match buffer dimensions");
  }
  if (!finite(t.state) || !finite(t.next_state) || !finite(t.action) || !std::isfinite(t.reward)) {
    throw NumericError("ReplayBuffer::push: non-finite transition");
  }
  std::lock_guard lock(mutex_);
  const std::size_t c = cursor_;
  std::ranges::copy(t.state, states_.begin() + static_cast<std::ptrdiff_t>(c * state_dim_));
  std::ranges::copy(t.next_state, next_states_.begin() + static_cast<std::ptrdiff_t>(c * state_dim_));
  std::ranges::copy(t.action, actions_.begin() + static_cast<std::ptrdiff_t>(c * action_dim_));
  rewards_[c] = t.reward;
  dones_[c] = t.done ? 1.0 : 0.0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++pushed_;
}

std::size_t ReplayBuffer::slot(std::size_t i) const noexcept {
  // oldest entry sits at the cursor once the ring has wrapped
  return size_ < capacity_ ? i : (cursor_ + i) % capacity_;
}

std::optional<std::vector<std::size_t>> ReplayBuffer::sample_indices(std::size_t batch,
                                                                     math::SeededRng& rng) const {
  std::lock_guard lock(mutex_);
  if (batch == 0 || size_ < batch) return std::nullopt;
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.index(size_);
  return idx;
}

std::optional<Batch> ReplayBuffer::sample(std::size_t batch, math::SeededRng& rng) const {
  std::lock_guard lock(mutex_);
  if (batch == 0 || size_ < batch) return std::nullopt;
  Batch out{math::RealTensor({batch, state_dim_}), math::RealTensor({batch, action_dim_}),
            math::RealTensor({batch, 1}), math::RealTensor({batch, state_dim_}), math::RealTensor({batch, 1})};
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t k = slot(rng.index(size_));
    const auto s_off = static_cast<std::ptrdiff_t>(k * state_dim_);
    const auto a_off = static_cast<std::ptrdiff_t>(k * action_dim_);
    std::copy_n(states_.begin() + s_off, state_dim_, out.states.values().begin() + static_cast<std::ptrdiff_t>(b * state_dim_));
    std::copy_n(next_states_.begin() + s_off, state_dim_,
                out.next_states.values().begin() + static_cast<std::ptrdiff_t>(b * state_dim_));
    std::copy_n(actions_.begin() + a_off, action_dim_, out.actions.values().begin() + static_cast<std::ptrdiff_t>(b * action_dim_));
    out.rewards[b] = rewards_[k];
    out.dones[b] = dones_[k];
  }
  return out;
}

Transition ReplayBuffer::at(std::size_t i) const {
  std::lock_guard lock(mutex_);
  if (i >= size_) throw DimensionError("ReplayBuffer::at: index out of range");
  const std::size_t k = slot(i);
  Transition t;
  t.state.assign(states_.begin() + static_cast<std::ptrdiff_t>(k * state_dim_),
                 states_.begin() + static_cast<std::ptrdiff_t>((k + 1) * state_dim_));
  t.next_state.assign(next_states_.begin() + static_cast<std::ptrdiff_t>(k * state_dim_),
                      next_states_.begin() + static_cast<std::ptrdiff_t>((k + 1) * state_dim_));
  t.action.assign(actions_.begin() + static_cast<std::ptrdiff_t>(k * action_dim_),
                  actions_.begin() + static_cast<std::ptrdiff_t>((k + 1) * action_dim_));
  t.reward = rewards_[k];
  t.done = dones_[k] != 0.0;
  return t;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return size_;
}

std::uint64_t ReplayBuffer::pushed() const {
  std::lock_guard lock(mutex_);
  return pushed_;
}

std::uint64_t ReplayBuffer::overwritten() const {
  std::lock_guard lock(mutex_);
  return pushed_ - size_;
}

}  // namespace csac::agents
