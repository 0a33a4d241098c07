#include "csac/app/eval.hpp"

#include <algorithm>
#include <ostream>

#include "csac/env/sla.hpp"
#include "csac/env/slicing_env.hpp"
#include "csac/errors.hpp"

namespace csac::app {

namespace {
// Keeps evaluation traffic away from the training streams of the same seed.
constexpr std::uint64_t kEvalSeedOffset = 1000003;
}  // namespace

std::vector<double> eval_quantiles() {
  std::vector<double> q;
  for (int v = 5; v <= 95; v += 5) q.push_back(v);
  q.push_back(99);
  return q;
}

std::size_t EvalReport::passes() const {
  return static_cast<std::size_t>(std::ranges::count_if(slices, &SliceEval::pass));
}

void EvalReport::write(std::ostream& out) const {
  out << "policy = " << policy << '\n';
  out << "episodes = " << episodes << '\n';
  out << "mean_reward = " << mean_reward << '\n';
  out << "sla_percentile = " << sla_percentile << '\n';
  out << "slice,tasks,mean_ms,min_ms,max_ms,f" << sla_percentile << "_ms,bound_ms,verdict\n";
  for (const auto& s : slices) {
    out << s.name << ',' << s.tasks << ',' << s.mean_ms << ',' << s.min_ms << ',' << s.max_ms << ',' << s.sla_ms
        << ',' << s.bound_ms << ',' << (s.pass ? "pass" : "fail") << '\n';
  }
  out << "passed = " << passes() << '/' << slices.size() << '\n';
}

void EvalReport::write_curves(std::ostream& out) const {
  for (const auto& s : slices) {
    out << "# slice " << s.name << " bound_ms " << s.bound_ms << "\n# Q latency_ms\n";
    for (const auto& [q, ms] : s.curve) out << q << ' ' << ms << '\n';
    out << "\n\n";
  }
}

EvalReport evaluate(const env::EnvConfig& config, const agents::PolicyModel* policy, std::size_t episodes,
                    std::uint64_t seed) {
  if (episodes == 0) throw ConfigError("run.eval_episodes must be >= 1");
  env::SlicingEnv e(config);
  if (policy && policy->net.input_width() != e.state_dim())
    throw FormatError("checkpoint policy does not match the configured state size");
  math::SeededRng rng = math::SeededRng(seed).derive(kEvalSeedOffset);
  std::vector<std::vector<double>> latencies(config.slice_count());
  double reward = 0.0;
  std::size_t steps = 0;
  auto state = e.reset(seed + kEvalSeedOffset);
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    if (ep > 0) state = e.reset();
    while (!e.done()) {
      const auto action = policy ? agents::select_action(*policy, state, agents::ActMode::Eval, rng)
                                 : agents::random_action(e.action_dim(), rng);
      auto out = e.step(action);
      reward += out.reward;
      ++steps;
      for (std::size_t k = 0; k < out.info.tasks.size(); ++k)
        latencies[out.info.tasks[k].slice].push_back(out.info.delays_s[k]);
      state = std::move(out.state);
    }
  }

  EvalReport r;
  r.policy = policy ? "checkpoint" : "random";
  r.episodes = episodes;
  r.sla_percentile = config.sla_percentile;
  r.mean_reward = reward / static_cast<double>(steps);
  for (std::size_t l = 0; l < config.slice_count(); ++l) {
    SliceEval s;
    s.name = config.slices[l].name;
    s.bound_ms = 1e3 * config.slices[l].latency_bound_s;
    auto& lat = latencies[l];
    s.tasks = lat.size();
    if (!lat.empty()) {
      std::ranges::sort(lat);
      double sum = 0.0;
      for (double d : lat) sum += d;
      s.mean_ms = 1e3 * sum / static_cast<double>(lat.size());
      s.min_ms = 1e3 * lat.front();
      s.max_ms = 1e3 * lat.back();
      for (double q : eval_quantiles()) s.curve.emplace_back(q, 1e3 * *env::percentile(lat, q));
      s.sla_ms = 1e3 * *env::percentile(lat, config.sla_percentile);
      s.pass = s.sla_ms <= s.bound_ms;
    }
    r.slices.push_back(std::move(s));
  }
  return r;
}

}  // namespace csac::app
