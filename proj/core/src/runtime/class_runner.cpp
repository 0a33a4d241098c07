#include "csac/runtime/class_runner.hpp"

#include <time.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "csac/errors.hpp"

namespace csac::runtime {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

template <class T>
void write_list(std::ostream& out, const char* key, const std::vector<T>& v) {
  out << key << " =";
  for (const auto& x : v) out << ' ' << x;
  out << '\n';
}

class Heartbeat {
 public:
  Heartbeat(std::ostream* out, std::mutex& mutex, double period_s)
      : out_(out), mutex_(mutex), period_(period_s), last_(Clock::now()) {}

  template <class F>
  void tick(F&& describe) {
    if (!out_ || seconds_since(last_) < period_) return;
    last_ = Clock::now();
    std::lock_guard lock(mutex_);
    *out_ << "heartbeat " << describe() << '\n' << std::flush;
  }

 private:
  std::ostream* out_;
  std::mutex& mutex_;
  double period_;
  Clock::time_point last_;
};

struct Fabric {
  std::vector<std::unique_ptr<agents::ReplayBuffer>> buffers;
  std::vector<std::unique_ptr<ParameterMemory>> memories;
  std::vector<ActorWorker> actors;
  std::vector<LearnerWorker> learners;
};

Fabric build_fabric(const env::EnvConfig& env_config, agents::Algo algo, const agents::Hyper& hyper,
                    const ClassConfig& config, std::uint64_t seed, bool freeze) {
  Fabric f;
  const std::size_t s = env_config.state_dim(), a = env_config.action_dim();
  for (std::size_t b = 0; b < config.buffers; ++b)
    f.buffers.push_back(std::make_unique<agents::ReplayBuffer>(hyper.replay_capacity, s, a));
  for (std::size_t m = 0; m < config.memories; ++m) {
    f.memories.push_back(std::make_unique<ParameterMemory>());
    f.memories.back()->set_frozen(freeze);
  }
  const math::SeededRng root(seed);
  f.actors.reserve(config.actors);
  for (std::size_t i = 0; i < config.actors; ++i) {
    f.actors.emplace_back(i, env_config, seed + i, root.derive(100 + i), *f.buffers[config.buffer_for_actor(i)],
                          *f.memories[config.memory_for_actor(i)], config.refresh_interval, hyper.start_timesteps);
  }
  f.learners.reserve(config.learners);
  for (std::size_t l = 0; l < config.learners; ++l) {
    agents::Hyper h = hyper;
    h.seed = seed + l;
    std::vector<agents::ReplayBuffer*> mine;
    for (auto b : config.buffers_for_learner(l)) mine.push_back(f.buffers[b].get());
    f.learners.emplace_back(l, agents::make_agent(algo, s, a, h), std::move(mine),
                            *f.memories[config.memory_for_learner(l)], config.publish_interval,
                            root.derive(200 + l));
  }
  return f;
}

void fill_ledger(RunLedger& ledger, const Fabric& f, const MetricsAccumulator& acc) {
  ledger.global_steps = acc.steps();
  for (const auto& a : f.actors) {
    ledger.actor_transitions.push_back(a.steps());
    ledger.actor_policy_version.push_back(a.policy_version());
    ledger.actor_max_staleness.push_back(a.max_staleness());
    for (const auto& [bucket, n] : a.staleness_histogram()) ledger.staleness[bucket] += n;
  }
  for (const auto& l : f.learners) {
    ledger.learner_updates.push_back(l.updates());
    ledger.learner_publishes.push_back(l.publishes());
    ledger.learner_numeric_failures.push_back(l.numeric_failures());
  }
  for (const auto& m : f.memories) {
    ledger.memory_versions.push_back(m->version());
    ledger.corrupt_fetches += m->corrupt_fetches();
  }
  for (const auto& b : f.buffers) ledger.dropped_transitions += b->overwritten();
}

void attach_checkpoint(RunResult& result, const Fabric& f) {
  const auto snap = f.memories.front()->fetch();
  result.checkpoint_learner = snap ? std::min(snap->learner_id, f.learners.size() - 1) : 0;
  std::ostringstream out(std::ios::binary);
  f.learners[result.checkpoint_learner].agent().save(out);
  result.checkpoint = std::move(out).str();
}

void run_sequential(Fabric& f, const agents::Hyper& hyper, const RunOptions& options, MetricsAccumulator& acc,
                    RunLedger& ledger) {
  const auto t0 = Clock::now();
  std::vector<double> busy(f.learners.size(), 0.0);
  for (std::uint64_t g = 0; g < hyper.max_timesteps; ++g) {
    if (options.timeout_s > 0.0 && seconds_since(t0) > options.timeout_s) {
      ledger.timed_out = true;
      break;
    }
    auto& actor = f.actors[g % f.actors.size()];
    if (options.before_actor_step) options.before_actor_step(actor.id(), actor.steps());
    const auto step = actor.step(g);
    if (g >= hyper.start_timesteps) {
      for (std::size_t l = 0; l < f.learners.size(); ++l) {
        agents::UpdateStats st;
        const auto u0 = Clock::now();
        const auto r = f.learners[l].try_update(&st);
        busy[l] += seconds_since(u0);
        if (r == LearnerWorker::Result::Updated) acc.record_update(st);
        if (r == LearnerWorker::Result::Failed) {
          ledger.failed = ledger.numeric_failure = true;
          ledger.failure = "learner " + std::to_string(l) + " halted on repeated non-finite updates";
        }
      }
    }
    acc.record_step(step.reward, step.info);
    if (ledger.failed) break;
  }
  ledger.wall_s = seconds_since(t0);
  ledger.learner_active_s = busy;
  ledger.learner_cpu_s = busy;
}

void run_threaded(Fabric& f, const agents::Hyper& hyper, const RunOptions& options, MetricsAccumulator& acc,
                  RunLedger& ledger) {
  std::atomic<std::uint64_t> claimed{0};
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> actors_live{f.actors.size()};
  std::mutex state_mutex, log_mutex;
  std::condition_variable done_cv;
  auto fail = [&](const std::string& what, bool numeric) {
    {
      std::lock_guard lock(state_mutex);
      if (!ledger.failed) ledger.failure = what;
      ledger.failed = true;
      ledger.numeric_failure = ledger.numeric_failure || numeric;
    }
    stop = true;
    done_cv.notify_all();
  };

  const auto t0 = Clock::now();
  std::vector<double> active(f.learners.size(), 0.0), cpu(f.learners.size(), 0.0);
  std::vector<std::thread> threads;
  for (auto& actor : f.actors) {
    threads.emplace_back([&, &actor = actor] {
      Heartbeat hb(options.log, log_mutex, options.heartbeat_s);
      try {
        while (!stop.load(std::memory_order_relaxed)) {
          const std::uint64_t g = claimed.fetch_add(1);
          if (g >= hyper.max_timesteps) break;
          if (options.before_actor_step) options.before_actor_step(actor.id(), actor.steps());
          const auto step = actor.step(g);
          acc.record_step(step.reward, step.info);
          hb.tick([&] {
            return "actor=" + std::to_string(actor.id()) + " steps=" + std::to_string(actor.steps()) +
                   " version=" + std::to_string(actor.policy_version());
          });
        }
      } catch (const std::exception& e) {
        fail("actor " + std::to_string(actor.id()) + ": " + e.what(), false);
      }
      if (--actors_live == 0) done_cv.notify_all();
    });
  }
  for (auto& learner : f.learners) {
    threads.emplace_back([&, &learner = learner] {
      const double cpu0 = thread_cpu_seconds();
      std::optional<Clock::time_point> first;
      Heartbeat hb(options.log, log_mutex, options.heartbeat_s);
      try {
        while (!stop.load(std::memory_order_relaxed) && actors_live.load() > 0) {
          if (claimed.load(std::memory_order_relaxed) < hyper.start_timesteps) {
            std::this_thread::sleep_for(std::chrono::microseconds(500));
            continue;
          }
          agents::UpdateStats st;
          const auto r = learner.try_update(&st);
          if (r == LearnerWorker::Result::Updated) {
            if (!first) first = Clock::now();
            acc.record_update(st);
          } else if (r == LearnerWorker::Result::Idle) {
            std::this_thread::sleep_for(std::chrono::microseconds(200));
          } else {
            fail("learner " + std::to_string(learner.id()) + " halted on repeated non-finite updates", true);
            break;
          }
          hb.tick([&] {
            return "learner=" + std::to_string(learner.id()) + " updates=" + std::to_string(learner.updates()) +
                   " publishes=" + std::to_string(learner.publishes());
          });
        }
      } catch (const std::exception& e) {
        fail("learner " + std::to_string(learner.id()) + ": " + e.what(), false);
      }
      if (first) active[learner.id()] = seconds_since(*first);
      cpu[learner.id()] = thread_cpu_seconds() - cpu0;
    });
  }

  {
    std::unique_lock lock(state_mutex);
    auto finished = [&] { return stop.load() || actors_live.load() == 0; };
    if (options.timeout_s > 0.0) {
      if (!done_cv.wait_for(lock, std::chrono::duration<double>(options.timeout_s), finished)) {
        ledger.timed_out = true;
      }
    } else {
      done_cv.wait(lock, finished);
    }
  }
  stop = true;
  for (auto& t : threads) t.join();
  ledger.wall_s = seconds_since(t0);
  ledger.learner_active_s = active;
  ledger.learner_cpu_s = cpu;
}

}  // namespace

void ClassConfig::validate() const {
  if (actors == 0) throw ConfigError("class.actors must be >= 1");
  if (learners == 0) throw ConfigError("class.learners must be >= 1");
  if (buffers == 0) throw ConfigError("class.buffers must be >= 1");
  if (memories == 0) throw ConfigError("class.memories must be >= 1");
  if (refresh_interval == 0) throw ConfigError("class.refresh_interval must be >= 1");
  if (publish_interval == 0) throw ConfigError("class.publish_interval must be >= 1");
  if (log_interval == 0) throw ConfigError("run.log_interval must be >= 1");
}

std::vector<std::size_t> ClassConfig::buffers_for_learner(std::size_t l) const {
  if (learners >= buffers) return {l % buffers};
  std::vector<std::size_t> out;
  for (std::size_t b = l; b < buffers; b += learners) out.push_back(b);
  return out;
}

bool RunLedger::reconciles() const {
  std::uint64_t sum = 0;
  for (auto n : actor_transitions) sum += n;
  return sum == global_steps;
}

double RunLedger::learner_wall_rate(std::size_t l) const {
  return learner_active_s.at(l) > 0.0 ? static_cast<double>(learner_updates.at(l)) / learner_active_s[l] : 0.0;
}

double RunLedger::learner_cpu_rate(std::size_t l) const {
  return learner_cpu_s.at(l) > 0.0 ? static_cast<double>(learner_updates.at(l)) / learner_cpu_s[l] : 0.0;
}

void RunLedger::write(std::ostream& out) const {
  out << "mode = " << (sequential ? "sequential" : "threaded") << '\n';
  out << "global_steps = " << global_steps << '\n';
  write_list(out, "actor_transitions", actor_transitions);
  write_list(out, "actor_policy_version", actor_policy_version);
  write_list(out, "actor_max_staleness", actor_max_staleness);
  write_list(out, "learner_updates", learner_updates);
  write_list(out, "learner_publishes", learner_publishes);
  write_list(out, "learner_numeric_failures", learner_numeric_failures);
  write_list(out, "memory_versions", memory_versions);
  out << "dropped_transitions = " << dropped_transitions << '\n';
  out << "corrupt_fetches = " << corrupt_fetches << '\n';
  out << "staleness_histogram =";
  for (const auto& [bucket, n] : staleness) out << ' ' << bucket << ':' << n;
  out << '\n';
  out << "reconciles = " << (reconciles() ? "true" : "false") << '\n';
  out << "status = " << (failed ? "failed" : timed_out ? "timed_out" : "ok") << '\n';
  if (!failure.empty()) out << "failure = " << failure << '\n';
}

RunResult run_class(const env::EnvConfig& env_config, agents::Algo algo, const agents::Hyper& hyper,
                    const ClassConfig& config, std::uint64_t seed, const RunOptions& options) {
  config.validate();
  hyper.validate();
  env_config.validate();
  Fabric f = build_fabric(env_config, algo, hyper, config, seed, options.freeze_memory);
  MetricsAccumulator acc(env_config.slice_count(), config.log_interval, hyper.max_timesteps, options.percentile_q,
                         !config.sequential, options.on_row);

  RunResult result;
  RunLedger& ledger = result.ledger;
  ledger.sequential = config.sequential;
  if (config.sequential) {
    try {
      run_sequential(f, hyper, options, acc, ledger);
    } catch (const std::exception& e) {
      ledger.failed = true;
      ledger.failure = e.what();
    }
  } else {
    run_threaded(f, hyper, options, acc, ledger);
  }
  fill_ledger(ledger, f, acc);
  ledger.transitions_per_s = ledger.wall_s > 0.0 ? static_cast<double>(ledger.global_steps) / ledger.wall_s : 0.0;
  attach_checkpoint(result, f);
  return result;
}

}  // namespace csac::runtime
