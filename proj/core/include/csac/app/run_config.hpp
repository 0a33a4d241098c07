#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "csac/agents/agent.hpp"
#include "csac/app/ini.hpp"
#include "csac/env/config.hpp"
#include "csac/runtime/class_runner.hpp"

namespace csac::app {

/// Everything a run needs, merged from defaults, an INI file and flags.
struct RunConfig {
  agents::Algo algo = agents::Algo::Csac;
  std::uint64_t seed = 1;
  bool paper_scale = false;
  std::filesystem::path out_dir = "runs/latest";
  std::size_t eval_episodes = 5;
  double timeout_s = 0.0;
  double heartbeat_s = 5.0;
  env::EnvConfig env;
  agents::Hyper hyper;
  runtime::ClassConfig cls;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

RunConfig default_run_config(bool paper_scale = false);

/// Applies every key of `doc` on top of `config`. Unknown keys, malformed
/// values and (after applying) out-of-range values throw ConfigError carrying
/// the line of the offending key.
void apply_ini(RunConfig& config, const IniDocument& doc);

/// Defaults, then the file. `run.paper_scale` in the file, or
/// `force_paper_scale`, selects the paper-scale defaults before the rest of the
/// file is applied.
RunConfig load_run_config(const std::filesystem::path& path, bool force_paper_scale = false);
RunConfig run_config_from_string(const std::string& text, bool force_paper_scale = false);

/// The fully resolved configuration as INI text. Parsing it back with
/// run_config_from_string yields an identical configuration.
std::string to_ini(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace csac::app
