#pragma once

#include "quadwalk/config.hpp"

namespace quadwalk {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunResult {
  bool pass = false;
  std::string manifest_path;
};

/// Subcommand drivers. Each writes its CSV artifacts plus a JSON manifest
/// into out_dir and returns the overall verdict. `config_echo` is stored in
/// the manifest verbatim.
RunResult run_validate(const RunConfig& cfg, const std::string& out_dir,
                       const std::string& config_echo);
RunResult run_geometry(const RunConfig& cfg, const std::string& out_dir,
                       const std::string& config_echo);
RunResult run_mc(const RunConfig& cfg, const std::string& out_dir, const std::string& config_echo);
RunResult run_green(const RunConfig& cfg, const std::string& out_dir,
                    const std::string& config_echo);
RunResult run_harmonic(const RunConfig& cfg, const std::string& out_dir,
                       const std::string& config_echo);
RunResult run_limits(const RunConfig& cfg, const std::string& which, const std::string& out_dir,
                     const std::string& config_echo);
RunResult run_verify(const RunConfig& cfg, const std::string& out_dir,
                     const std::string& config_echo);

int log_level();  // from MQ_LOG (0 = warnings only, 1 = info, 2 = debug)
void log_info(const std::string& msg);

}  // namespace quadwalk
