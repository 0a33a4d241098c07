#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <vector>

#include "csac/math/rng.hpp"
#include "csac/math/tensor.hpp"

namespace csac::agents {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;  // raw, in [-1, 1]
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Row-stacked minibatch.
struct Batch {
  math::RealTensor states;       // B x S
  math::RealTensor actions;      // B x A
  math::RealTensor rewards;      // B x 1
  math::RealTensor next_states;  // B x S
  math::RealTensor dones;        // B x 1, 0 or 1

  std::size_t size() const noexcept { return rewards.rows(); }
};

Batch make_batch(const std::vector<Transition>& transitions);

/// Fixed-capacity FIFO ring. Push and sample are serialised by an internal
/// mutex, so concurrent producers and consumers never see a torn transition.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);

  /// Throws DimensionError on a size mismatch and NumericError on a
  /// non-finite entry. Overwrites the oldest entry when full.
  void push(const Transition& t);

  /// Uniform with replacement over current contents; nullopt while fewer
  /// than `batch` transitions are stored.
  std::optional<Batch> sample(std::size_t batch, math::SeededRng& rng) const;
  /// Sampled slot indices (oldest = 0) for distribution tests.
  std::optional<std::vector<std::size_t>> sample_indices(std::size_t batch, math::SeededRng& rng) const;

  /// i-th oldest stored transition.
  Transition at(std::size_t i) const;

  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t pushed() const;
  /// Transitions evicted by overwrite.
  std::uint64_t overwritten() const;
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t action_dim() const noexcept { return action_dim_; }

 private:
  std::size_t slot(std::size_t i) const noexcept;

  std::size_t capacity_, state_dim_, action_dim_;
  mutable std::mutex mutex_;
  std::vector<double> states_, actions_, rewards_, next_states_, dones_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::uint64_t pushed_ = 0;
};

}  // namespace csac::agents
