// Command-line front end. Links only the C interface.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "stark/stark.h"

namespace {

constexpr const char* kConfigEnv = "STARK_CONFIG";

std::string describe_subcommand(const std::string& name) {
  if (name == "orbit") return "integrate one classical orbit";
  if (name == "momenta") return "asymptotic transverse momenta of random scattering orbits";
  if (name == "eikonal") return "eikonal residual of theta1 at random points";
  if (name == "transport") return "transport symbols b_k, q_k, stencil residuals and decay along a ray";
  if (name == "born") return "Born principal symbol against its homogeneous asymptote";
  if (name == "kernel") return "FFT of the Born symbol and its diagonal power law";
  if (name == "airy-compare") return "Airy-reduced eigenfunction against the stationary-phase asymptote";
  if (name == "verify-all") return "run every invariant suite";
  return "";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out += c;
    }
  }
  return out + '"';
}

// Summary line for failures before a run starts (loading or overriding the configuration).
int fail(stark_status status, const std::string& subcommand) {
  const char* kind = status == STARK_CONFIG_ERROR ? "config" : status == STARK_BUDGET_ERROR ? "budget" : "domain";
  std::string line = "{\"subcommand\":" + quoted(subcommand) + ",\"status\":\"error\",\"error\":{\"kind\":" +
                     quoted(kind) + ",\"module\":" + quoted(stark_last_error_module()) +
                     ",\"operation\":" + quoted(stark_last_error_operation());
  if (*stark_last_error_budget()) line += ",\"budget\":" + quoted(stark_last_error_budget());
  line += ",\"message\":" + quoted(stark_last_error()) + "}}";
  std::printf("%s\n", line.c_str());
  return static_cast<int>(status);
}

bool known_subcommand(const std::string& name) {
  for (std::size_t i = 0; i < stark_subcommand_count(); ++i)
    if (name == stark_subcommand_name(i)) return true;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stark scattering experiments. Overrides: --<dotted.key>=<json value>, e.g. --potential.kappa=0.5"};
  app.require_subcommand(1);
  std::string config_path;
  std::string selected;
  std::vector<std::string> overrides;
  bool print_config = false;
  for (std::size_t i = 0; i < stark_subcommand_count(); ++i) {
    const std::string name = stark_subcommand_name(i);
    auto* sub = app.add_subcommand(name, describe_subcommand(name));
    sub->add_option("--config", config_path, std::string("JSON run configuration (default: $") + kConfigEnv + ")");
    sub->add_flag("--print-config", print_config, "print the merged configuration and exit");
    sub->allow_extras();
    sub->callback([&selected, name] { selected = name; });
  }

  if (argc > 1 && argv[1][0] != '-' && !known_subcommand(argv[1])) {
    std::cerr << "unknown subcommand '" << argv[1] << "'\n\n" << app.help();
    return STARK_CONFIG_ERROR;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return STARK_CONFIG_ERROR;
  }

  auto* sub = app.get_subcommand(selected);
  const auto extras = sub->remaining();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() <= 2) {
      std::cerr << "unexpected argument '" << arg << "'\n\n" << app.help();
      return STARK_CONFIG_ERROR;
    }
    arg = arg.substr(2);
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      overrides.push_back(arg.substr(0, eq));
      overrides.push_back(arg.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      overrides.push_back(arg);
      overrides.push_back(extras[++i]);
    } else {
      std::cerr << "override --" << arg << " needs a value\n";
      return STARK_CONFIG_ERROR;
    }
  }

  if (config_path.empty())
    if (const char* env = std::getenv(kConfigEnv)) config_path = env;

  stark_config* config = nullptr;
  stark_status status = config_path.empty() ? stark_config_new(&config) : stark_config_load(config_path.c_str(), &config);
  if (status != STARK_OK) return fail(status, selected);
  for (std::size_t i = 0; i < overrides.size(); i += 2) {
    status = stark_config_set(config, overrides[i].c_str(), overrides[i + 1].c_str());
    if (status != STARK_OK) {
      stark_config_free(config);
      return fail(status, selected);
    }
  }

  if (print_config) {
    char* text = nullptr;
    status = stark_config_dump(config, &text);
    if (status == STARK_OK) std::printf("%s\n", text);
    stark_string_free(text);
    stark_config_free(config);
    return status;
  }

  char* summary = nullptr;
  status = stark_run(config, selected.c_str(), &summary);
  if (summary) std::printf("%s\n", summary);
  stark_string_free(summary);
  stark_config_free(config);
  return static_cast<int>(status);
}
