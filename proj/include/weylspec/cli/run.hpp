#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace weylspec::cli {

/// Malformed or inconsistent configuration; the message carries the byte
/// position for JSON syntax errors and the key path otherwise.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;  ///< hypotheses, weyl, weyl-zero, eigen, appendix or horoball
  nlohmann::json doc;   ///< command parameters
  std::filesystem::path out_dir = ".";
  bool plots = false;
  int threads = 1;
};

/// Parses `text` as the configuration of `command`.
RunConfig parse_config(const std::string& command, const std::string& text);

/// Reads and parses a configuration file.
RunConfig load_config(const std::string& command, const std::filesystem::path& file);

/// Thread count from WEYLSPEC_THREADS, or 1 when unset.
int threads_from_environment();

/// Runs one command and writes its reports into out_dir.
/// Returns 0 when every verdict passes and 2 when a check fails or is
/// inconclusive; errors are thrown (the executable maps them to exit 1).
int run(const RunConfig& config, std::ostream& log);

}  // namespace weylspec::cli
