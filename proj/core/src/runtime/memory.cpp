#include "csac/runtime/memory.hpp"

#include <chrono>
#include <sstream>

#include "csac/errors.hpp"
#include "csac/math/serialize.hpp"

namespace csac::runtime {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t word) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::uint64_t snapshot_checksum(std::uint64_t version, std::size_t learner_id, std::string_view payload) noexcept {
  std::uint64_t h = fnv_mix(kFnvOffset, version);
  h = fnv_mix(h, learner_id);
  for (unsigned char c : payload) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

bool ParameterSnapshot::valid() const noexcept {
  return version > 0 && checksum == snapshot_checksum(version, learner_id, payload);
}

std::string encode_policy(const agents::PolicyModel& policy) {
  std::ostringstream out(std::ios::binary);
  math::BinaryWriter w(out);
  agents::write_policy(w, policy);
  return std::move(out).str();
}

agents::PolicyModel decode_policy(std::string_view bytes) {
  std::istringstream in(std::string(bytes), std::ios::binary);
  math::BinaryReader r(in);
  return agents::read_policy(r);
}

std::uint64_t ParameterMemory::publish(std::string payload, std::size_t learner_id) {
  if (frozen_.load(std::memory_order_acquire)) {
    rejected_.fetch_add(1, std::memory_order_relaxed);
    return 0;
  }
  std::lock_guard writer(publish_mutex_);
  auto snap = std::make_shared<ParameterSnapshot>();
  snap->version = version_.load(std::memory_order_relaxed) + 1;
  snap->learner_id = learner_id;
  snap->stamp_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  snap->payload = std::move(payload);
  snap->checksum = snapshot_checksum(snap->version, learner_id, snap->payload);
  const std::uint64_t v = snap->version;
  {
    std::lock_guard slot(slot_mutex_);
    latest_ = std::move(snap);
  }
  version_.store(v, std::memory_order_release);
  return v;
}

std::shared_ptr<const ParameterSnapshot> ParameterMemory::fetch() const {
  std::shared_ptr<const ParameterSnapshot> snap;
  {
    std::lock_guard slot(slot_mutex_);
    snap = latest_;
  }
  if (snap && !snap->valid()) {
    corrupt_.fetch_add(1, std::memory_order_relaxed);
    return nullptr;
  }
  return snap;
}

}  // namespace csac::runtime
