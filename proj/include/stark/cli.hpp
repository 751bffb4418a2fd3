#pragma once

// Experiment orchestration behind the command-line front end: a JSON run
// configuration, the subcommands and their CSV/JSON artifacts.

#include <string>
#include <vector>

#include <json.hpp>

#include "stark/potentials.hpp"

namespace stark::cli {

/// Run configuration. Starts from defaults(); a loaded document is merged over
/// them key by key. Keys that do not exist in the defaults and values whose JSON
/// type differs from the default's are ConfigErrors.
class RunConfig {
 public:
  RunConfig();

  static const nlohmann::json& defaults();
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);

  /// Dotted-path override, e.g. set("potential.kappa", "0.5"). The value is
  /// parsed as JSON and otherwise taken as a string.
  void set(const std::string& path, const std::string& value);

  /// Checks every invariant; throws ConfigError.
  void validate() const;

  const nlohmann::json& document() const { return doc_; }
  std::string dump() const { return doc_.dump(2); }

  int dimension() const;
  potentials::PotentialSpec potential() const;

 private:
  void merge(const nlohmann::json& patch, const std::string& prefix);
  nlohmann::json doc_;
};

const std::vector<std::string>& subcommands();

struct RunOutcome {
  int exit_code = 0;    ///< 0 ok, 1 a verification check failed, 2 config, 3 budget, 4 domain
  std::string summary;  ///< one-line JSON
};

/// Runs a subcommand and writes its artifacts to output_dir. Never throws:
/// library errors become the exit code and an error object in the summary.
RunOutcome run(const RunConfig& config, const std::string& subcommand);

}  // namespace stark::cli
