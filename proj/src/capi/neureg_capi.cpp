#include "neureg/neureg.h"

#include <string>

#include "core/pipeline.hpp"
#include "core/types.hpp"

using neureg::ErrKind;
using neureg::Error;

struct neureg_run {
  neureg::cli::json config;
  std::string config_text;
  std::string report_text;
  std::string error_text;
  int outcome = 0;
  bool executed = false;
};

namespace {

thread_local std::string g_last_error;

neureg_status status_of(ErrKind k) {
  switch (k) {
    case ErrKind::invalid_argument: return NEUREG_ERR_ARGUMENT;
    case ErrKind::config: return NEUREG_ERR_CONFIG;
    case ErrKind::evaluation: return NEUREG_ERR_EVALUATION;
    case ErrKind::numeric: return NEUREG_ERR_NUMERIC;
    case ErrKind::hypothesis: return NEUREG_ERR_HYPOTHESIS;
    case ErrKind::io: return NEUREG_ERR_IO;
    default: return NEUREG_ERR_INTERNAL;
  }
}

template <typename Fn>
neureg_status guarded(std::string* sink, Fn&& fn) {
  try {
    fn();
    if (sink) sink->clear();
    return NEUREG_OK;
  } catch (const Error& e) {
    if (sink) *sink = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    if (sink) *sink = e.what();
    return NEUREG_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* neureg_version(void) { return neureg::cli::kVersion; }

neureg_status neureg_run_create(const char* config_json, neureg_run** out_run) {
  if (!out_run) return NEUREG_ERR_ARGUMENT;
  *out_run = nullptr;
  auto run = std::make_unique<neureg_run>();
  const neureg_status st = guarded(&g_last_error, [&] {
    run->config = neureg::cli::parse_config(config_json ? config_json : "{}");
    run->config_text = run->config.dump(2);
  });
  if (st != NEUREG_OK) return st;
  *out_run = run.release();
  return NEUREG_OK;
}

void neureg_run_destroy(neureg_run* run) { delete run; }

const char* neureg_run_config(const neureg_run* run) {
  return run ? run->config_text.c_str() : nullptr;
}

neureg_status neureg_run_set_output_dir(neureg_run* run, const char* dir) {
  if (!run || !dir) return NEUREG_ERR_ARGUMENT;
  return guarded(&run->error_text, [&] {
    run->config["output"]["dir"] = std::string(dir);
    run->config_text = run->config.dump(2);
  });
}

neureg_status neureg_run_execute(neureg_run* run, const char* command) {
  if (!run || !command) return NEUREG_ERR_ARGUMENT;
  return guarded(&run->error_text, [&] {
    const std::string out_dir = run->config.at("output").at("dir").get<std::string>();
    const auto result = neureg::cli::run_command(run->config, command, out_dir);
    run->report_text = result.report.dump(2);
    run->outcome = result.outcome;
    run->executed = true;
  });
}

const char* neureg_run_report(const neureg_run* run) {
  return (run && run->executed) ? run->report_text.c_str() : nullptr;
}

int neureg_run_outcome(const neureg_run* run) { return run ? run->outcome : -1; }

const char* neureg_run_error(const neureg_run* run) {
  return run ? run->error_text.c_str() : "";
}

const char* neureg_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"
