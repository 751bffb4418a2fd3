#include "stark/stark.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "stark/cli.hpp"
#include "stark/error.hpp"
#include "stark/special.hpp"

struct stark_config {
  stark::cli::RunConfig config;
};

namespace {

struct LastError {
  std::string message, module, operation, budget;
};

thread_local LastError last_error;

stark_status record(stark_status status, const std::string& message, const std::string& module = "",
                    const std::string& operation = "", const std::string& budget = "") {
  last_error = {message, module, operation, budget};
  return status;
}

// Runs fn, translating exceptions into status codes and the last-error slot.
template <class Fn>
stark_status guarded(Fn&& fn) {
  try {
    last_error = {};
    fn();
    return STARK_OK;
  } catch (const stark::BudgetError& e) {
    return record(STARK_BUDGET_ERROR, e.what(), e.module(), e.operation(), e.budget());
  } catch (const stark::Error& e) {
    return record(static_cast<stark_status>(e.kind()), e.what(), e.module(), e.operation());
  } catch (const std::bad_alloc&) {
    return record(STARK_DOMAIN_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return record(STARK_DOMAIN_ERROR, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

stark_status null_argument(const char* op) { return record(STARK_CONFIG_ERROR, "null argument", "c_api", op); }

}  // namespace

extern "C" {

const char* stark_version(void) { return "0.1.0"; }

const char* stark_last_error(void) { return last_error.message.c_str(); }
const char* stark_last_error_module(void) { return last_error.module.c_str(); }
const char* stark_last_error_operation(void) { return last_error.operation.c_str(); }
const char* stark_last_error_budget(void) { return last_error.budget.c_str(); }

stark_status stark_config_new(stark_config** out) {
  if (!out) return null_argument("stark_config_new");
  return guarded([&] { *out = new stark_config{}; });
}

stark_status stark_config_load(const char* path, stark_config** out) {
  if (!path || !out) return null_argument("stark_config_load");
  return guarded([&] { *out = new stark_config{stark::cli::RunConfig::load(path)}; });
}

stark_status stark_config_from_json(const char* text, stark_config** out) {
  if (!text || !out) return null_argument("stark_config_from_json");
  return guarded([&] { *out = new stark_config{stark::cli::RunConfig::from_json(text)}; });
}

stark_status stark_config_set(stark_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return null_argument("stark_config_set");
  return guarded([&] { config->config.set(key, value); });
}

stark_status stark_config_dump(const stark_config* config, char** out) {
  if (!config || !out) return null_argument("stark_config_dump");
  return guarded([&] { *out = copy_string(config->config.dump()); });
}

void stark_config_free(stark_config* config) { delete config; }

size_t stark_subcommand_count(void) { return stark::cli::subcommands().size(); }

const char* stark_subcommand_name(size_t index) {
  const auto& names = stark::cli::subcommands();
  return index < names.size() ? names[index].c_str() : nullptr;
}

stark_status stark_run(const stark_config* config, const char* subcommand, char** summary) {
  if (!config || !subcommand || !summary) return null_argument("stark_run");
  stark_status status = STARK_OK;
  const stark_status alloc = guarded([&] {
    const auto outcome = stark::cli::run(config->config, subcommand);
    *summary = copy_string(outcome.summary);
    status = static_cast<stark_status>(outcome.exit_code);
    if (status != STARK_OK) {
      // mirror the summary's error object into the last-error slot
      const auto doc = nlohmann::json::parse(outcome.summary);
      if (doc.contains("error")) {
        const auto& e = doc["error"];
        record(status, e["message"], e["module"], e["operation"], e.value("budget", ""));
      } else {
        record(status, "verification checks failed", "cli", "verify-all");
      }
    }
  });
  return alloc != STARK_OK ? alloc : status;
}

void stark_string_free(char* s) { std::free(s); }

stark_status stark_airy_ai(double u, double* out) {
  if (!out) return null_argument("stark_airy_ai");
  return guarded([&] { *out = stark::special::airy_ai(u); });
}

stark_status stark_c1_constant(double alpha, double* out) {
  if (!out) return null_argument("stark_c1_constant");
  return guarded([&] { *out = stark::special::c1_constant(alpha); });
}

stark_status stark_c2_constant(int d, double alpha, double* re, double* im) {
  if (!re || !im) return null_argument("stark_c2_constant");
  return guarded([&] {
    const auto c = stark::special::c2_constant(d, alpha);
    *re = c.real();
    *im = c.imag();
  });
}

}  // extern "C"
