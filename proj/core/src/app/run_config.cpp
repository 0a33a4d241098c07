#include "csac/app/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "csac/errors.hpp"

namespace csac::app {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& s, int line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError(key + ": expected a number, got '" + s + "'", line);
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& s, int line) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'", line);
  return v;
}

bool parse_bool(const std::string& key, const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'", line);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Binding {
  std::string key;
  std::function<void(const std::string&, int)> set;
  std::function<std::string()> get;
};

Binding real(std::string key, double& ref) {
  return {key, [&ref, key](const std::string& s, int line) { ref = parse_double(key, s, line); },
          [&ref] { return format_double(ref); }};
}

template <class T>
Binding count(std::string key, T& ref) {
  return {key,
          [&ref, key](const std::string& s, int line) { ref = static_cast<T>(parse_unsigned(key, s, line)); },
          [&ref] { return std::to_string(ref); }};
}

Binding flag(std::string key, bool& ref) {
  return {key, [&ref, key](const std::string& s, int line) { ref = parse_bool(key, s, line); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

std::vector<Binding> bindings(RunConfig& c) {
  auto& h = c.hyper;
  auto& t = c.env.topology;
  std::vector<Binding> b = {
      {"run.algo",
       [&c](const std::string& s, int line) {
         const auto a = agents::parse_algo(s);
         if (!a) throw ConfigError("run.algo: expected csac, sac6 or ddpg, got '" + s + "'", line);
         c.algo = *a;
       },
       [&c] { return std::string(agents::to_string(c.algo)); }},
      count("run.seed", c.seed),
      flag("run.paper_scale", c.paper_scale),
      count("run.max_steps", h.max_timesteps),
      count("run.start_steps", h.start_timesteps),
      count("run.log_interval", c.cls.log_interval),
      {"run.out", [&c](const std::string& s, int) { c.out_dir = s; }, [&c] { return c.out_dir.string(); }},
      count("run.eval_episodes", c.eval_episodes),
      real("run.timeout_s", c.timeout_s),
      real("run.heartbeat_s", c.heartbeat_s),
      flag("run.sequential", c.cls.sequential),

      count("class.actors", c.cls.actors),
      count("class.learners", c.cls.learners),
      count("class.buffers", c.cls.buffers),
      count("class.memories", c.cls.memories),
      count("class.refresh_interval", c.cls.refresh_interval),
      count("class.publish_interval", c.cls.publish_interval),

      count("agent.batch_size", h.batch_size),
      count("agent.hidden_layers", h.hidden_layers),
      count("agent.hidden_width", h.hidden_width),
      {"agent.activation",
       [&h](const std::string& s, int line) {
         if (s == "auto") h.activation.reset();
         else if (s == "gelu") h.activation = math::Activation::Gelu;
         else if (s == "relu") h.activation = math::Activation::Relu;
         else throw ConfigError("agent.activation: expected auto, gelu or relu, got '" + s + "'", line);
       },
       [&h] { return h.activation ? std::string(math::to_string(*h.activation)) : std::string("auto"); }},
      real("agent.actor_lr", h.actor_lr),
      real("agent.critic_lr", h.critic_lr),
      real("agent.alpha_lr", h.alpha_lr),
      real("agent.gamma", h.gamma),
      real("agent.tau", h.tau),
      count("agent.freq", h.freq),
      real("agent.initial_alpha", h.initial_alpha),
      {"agent.target_entropy",
       [&h](const std::string& s, int line) {
         h.target_entropy = s == "auto" ? std::numeric_limits<double>::quiet_NaN()
                                        : parse_double("agent.target_entropy", s, line);
       },
       [&h] { return std::isnan(h.target_entropy) ? std::string("auto") : format_double(h.target_entropy); }},
      real("agent.reward_scale", h.reward_scale),
      real("agent.ddpg_noise_std", h.ddpg_noise_std),
      count("agent.replay_capacity", h.replay_capacity),

      count("topology.ap_count", t.ap_count),
      count("topology.max_users", t.max_users),
      real("topology.slot_s", t.slot_s),
      real("topology.bandwidth_hz", t.bandwidth_hz),
      real("topology.noise_w", t.noise_w),
      real("topology.bf_noise_w", t.bf_noise_w),
      real("topology.antenna_gain_db", t.antenna_gain_db),
      real("topology.shadowing_db", t.shadowing_db),
      flag("topology.small_scale_fading", t.small_scale_fading),
      real("topology.max_distance_km", t.max_distance_km),
      real("topology.min_distance_km", t.min_distance_km),
      flag("topology.pathloss_log10", t.pathloss_log10),
      real("topology.max_power_w", t.max_power_w),
      real("topology.cpu_max_cps", t.cpu_max_cps),
      real("topology.cycles_per_bit", t.cycles_per_bit),
      real("topology.max_burst_bits", t.max_burst_bits),
      real("topology.fronthaul_capacity_bps", t.fronthaul_capacity_bps),

      real("sla.percentile", c.env.sla_percentile),
      real("sla.delay_cap_s", c.env.delay_cap_s),
      {"sla.scope",
       [&c](const std::string& s, int line) {
         if (s == "global") c.env.sla_scope = env::SlaScope::Global;
         else if (s == "episode") c.env.sla_scope = env::SlaScope::PerEpisode;
         else throw ConfigError("sla.scope: expected global or episode, got '" + s + "'", line);
       },
       [&c] { return std::string(c.env.sla_scope == env::SlaScope::Global ? "global" : "episode"); }},
      flag("sla.penalize_fronthaul", c.env.penalize_fronthaul),
      count("episode.length", c.env.episode_len),
      real("traffic.task_min_bits", c.env.task_min_bits),
      real("traffic.task_max_bits", c.env.task_max_bits),
  };
  return b;
}

env::SliceSpec* find_slice(RunConfig& c, const std::string& name) {
  const auto it = std::ranges::find(c.env.slices, name, &env::SliceSpec::name);
  return it == c.env.slices.end() ? nullptr : &*it;
}

void set_slice_field(env::SliceSpec& s, const std::string& field, const std::string& key, const std::string& v,
                     int line) {
  if (field == "traffic_mean") s.traffic_mean = parse_double(key, v, line);
  else if (field == "traffic_std") s.traffic_std = parse_double(key, v, line);
  else if (field == "latency_bound_s") s.latency_bound_s = parse_double(key, v, line);
  else if (field == "latency_bound_ms") s.latency_bound_s = 1e-3 * parse_double(key, v, line);
  else if (field == "cpu_threshold_cycles") s.cpu_threshold_cycles = parse_double(key, v, line);
  else if (field == "penalty") s.penalty = parse_double(key, v, line);
  else if (field == "cpu_share") s.cpu_share = parse_double(key, v, line);
  else throw ConfigError("unknown key '" + key + "'", line);
}

// Best-effort line for a validation message that names a key.
int line_for_message(const IniDocument& doc, const std::string& message) {
  for (const auto& [key, entry] : doc.entries()) {
    if (message.find(key) != std::string::npos) return entry.line;
    if (key.rfind("slice.", 0) == 0) {
      const auto dot = key.find('.', 6);
      const std::string name = key.substr(6, dot - 6), field = key.substr(dot + 1);
      const std::string stem = field.substr(0, field.rfind('_'));
      if (message.find("slice '" + name + "'") != std::string::npos && message.find(stem) != std::string::npos)
        return entry.line;
    }
  }
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  hyper.validate();
  cls.validate();
  if (eval_episodes == 0) throw ConfigError("run.eval_episodes must be >= 1");
  if (!(timeout_s >= 0.0)) throw ConfigError("run.timeout_s must be >= 0");
  if (!(heartbeat_s > 0.0)) throw ConfigError("run.heartbeat_s must be > 0");
}

RunConfig default_run_config(bool paper_scale) {
  RunConfig c;
  c.paper_scale = paper_scale;
  c.env = env::default_env_config();
  c.hyper = agents::default_hyper(paper_scale);
  return c;
}

void apply_ini(RunConfig& config, const IniDocument& doc) {
  if (const auto* e = doc.find("env.slices")) {
    std::vector<env::SliceSpec> slices;
    for (const auto& name : split_list(e->value)) {
      if (const auto* s = find_slice(config, name)) slices.push_back(*s);
      else slices.push_back({name});
    }
    if (slices.empty()) throw ConfigError("env.slices: expected a comma-separated list of names", e->line);
    config.env.slices = std::move(slices);
  }
  auto table = bindings(config);
  for (const auto& [key, entry] : doc.entries()) {
    if (key == "env.slices") continue;
    if (key.rfind("slice.", 0) == 0) {
      const auto dot = key.find('.', 6);
      if (dot == std::string::npos) throw ConfigError("unknown key '" + key + "'", entry.line);
      const std::string name = key.substr(6, dot - 6);
      auto* s = find_slice(config, name);
      if (!s) throw ConfigError("slice '" + name + "' is not listed in env.slices", entry.line);
      set_slice_field(*s, key.substr(dot + 1), key, entry.value, entry.line);
      continue;
    }
    const auto it = std::ranges::find(table, key, &Binding::key);
    if (it == table.end()) throw ConfigError("unknown key '" + key + "'", entry.line);
    it->set(entry.value, entry.line);
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    throw ConfigError(e.what(), line_for_message(doc, e.what()));
  }
}

RunConfig run_config_from_string(const std::string& text, bool force_paper_scale) {
  const auto doc = IniDocument::parse_string(text);
  bool paper = force_paper_scale;
  if (const auto* e = doc.find("run.paper_scale")) paper = paper || parse_bool("run.paper_scale", e->value, e->line);
  RunConfig c = default_run_config(paper);
  apply_ini(c, doc);
  c.paper_scale = paper;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, bool force_paper_scale) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return run_config_from_string(text.str(), force_paper_scale);
}

std::string to_ini(const RunConfig& config) {
  RunConfig copy = config;
  const auto table = bindings(copy);
  std::ostringstream out;
  std::string section;
  for (const auto& b : table) {
    const auto dot = b.key.find('.');
    const std::string sec = b.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << b.key.substr(dot + 1) << " = " << b.get() << '\n';
  }
  out << "\n[env]\nslices = ";
  for (std::size_t i = 0; i < config.env.slices.size(); ++i) out << (i ? "," : "") << config.env.slices[i].name;
  out << '\n';
  for (const auto& s : config.env.slices) {
    out << "\n[slice." << s.name << "]\n";
    out << "traffic_mean = " << format_double(s.traffic_mean) << '\n';
    out << "traffic_std = " << format_double(s.traffic_std) << '\n';
    out << "latency_bound_s = " << format_double(s.latency_bound_s) << '\n';
    out << "cpu_threshold_cycles = " << format_double(s.cpu_threshold_cycles) << '\n';
    out << "penalty = " << format_double(s.penalty) << '\n';
    out << "cpu_share = " << format_double(s.cpu_share) << '\n';
  }
  return out.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_ini(a) == to_ini(b); }

}  // namespace csac::app
