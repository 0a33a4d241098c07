#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "csac/agents/agent.hpp"

namespace csac::runtime {

/// One published set of policy parameters. Immutable once installed.
struct ParameterSnapshot {
  std::uint64_t version = 0;
  std::size_t learner_id = 0;
  std::int64_t stamp_ns = 0;  // system clock
  std::string payload;        // encoded PolicyModel
  std::uint64_t checksum = 0;

  bool valid() const noexcept;
};

/// FNV-1a over the version, learner id and payload bytes.
std::uint64_t snapshot_checksum(std::uint64_t version, std::size_t learner_id, std::string_view payload) noexcept;

std::string encode_policy(const agents::PolicyModel& policy);
agents::PolicyModel decode_policy(std::string_view bytes);

/// Versioned parameter store shared by learners (writers) and actors (readers).
///
/// Publishers build the snapshot outside any lock and serialize only on the
/// version bump and pointer swap. Readers copy a shared_ptr, so a fetch never
/// sees a partially written snapshot and never waits on serialization.
class ParameterMemory {
 public:
  /// Installs `payload` as version previous+1 and returns that version, or 0
  /// while the memory is frozen.
  std::uint64_t publish(std::string payload, std::size_t learner_id);
  /// Latest complete snapshot; null before the first publish.
  std::shared_ptr<const ParameterSnapshot> fetch() const;

  std::uint64_t version() const noexcept { return version_.load(std::memory_order_acquire); }
  std::uint64_t rejected() const noexcept { return rejected_.load(std::memory_order_relaxed); }
  std::uint64_t corrupt_fetches() const noexcept { return corrupt_.load(std::memory_order_relaxed); }

  /// While frozen, publishes are dropped, as if the memory were unreachable.
  void set_frozen(bool frozen) noexcept { frozen_.store(frozen, std::memory_order_release); }

 private:
  std::mutex publish_mutex_;
  mutable std::mutex slot_mutex_;
  std::shared_ptr<const ParameterSnapshot> latest_;
  std::atomic<std::uint64_t> version_{0};
  std::atomic<std::uint64_t> rejected_{0};
  mutable std::atomic<std::uint64_t> corrupt_{0};
  std::atomic<bool> frozen_{false};
};

}  // namespace csac::runtime
