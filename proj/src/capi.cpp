#include "cpfym/cpfym.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "cpfym/parallel.hpp"
#include "cpfym/suite.hpp"

struct cpfym_config {
  cpfym::SuiteConfig config;
};

struct cpfym_report {
  cpfym::SuiteConfig config;
  std::vector<cpfym::CheckResult> results;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_field;

cpfym_status fail(cpfym_status s, std::string message, std::string field = {}) {
  last_error = std::move(message);
  last_field = std::move(field);
  return s;
}

template <class Fn>
cpfym_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    last_field.clear();
    return fn();
  } catch (const cpfym::ConfigError& e) {
    return fail(CPFYM_ERR_CONFIG, e.what(), e.field());
  } catch (const std::exception& e) {
    return fail(CPFYM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CPFYM_ERR_INTERNAL, "unknown error");
  }
}

cpfym_check_status to_c(cpfym::CheckStatus s) {
  switch (s) {
    case cpfym::CheckStatus::pass: return CPFYM_CHECK_PASS;
    case cpfym::CheckStatus::fail: return CPFYM_CHECK_FAIL;
    case cpfym::CheckStatus::skip: return CPFYM_CHECK_SKIP;
    case cpfym::CheckStatus::info: return CPFYM_CHECK_INFO;
  }
  return CPFYM_CHECK_FAIL;
}

void fill(const cpfym::CheckResult& r, cpfym_check* out) {
  out->id = r.id.c_str();
  out->suite = r.suite.c_str();
  out->tag = r.tag.c_str();
  out->description = r.description.c_str();
  out->comparison = cpfym::comparison_name(r.comparison);
  out->detail = r.detail.c_str();
  out->value = r.value;
  out->expected = r.expected;
  out->tolerance = r.tolerance;
  out->seconds = r.seconds;
  out->status = to_c(r.status);
}

}  // namespace

extern "C" {

const char* cpfym_version(void) { return "1.0.0"; }
const char* cpfym_last_error(void) { return last_error.c_str(); }
const char* cpfym_last_error_field(void) { return last_field.c_str(); }
int cpfym_thread_count(void) { return cpfym::thread_count(); }

cpfym_status cpfym_config_new(cpfym_config** out) {
  if (!out) return fail(CPFYM_ERR_ARGUMENT, "null output pointer");
  return guarded([&] {
    *out = new cpfym_config();
    return CPFYM_OK;
  });
}

void cpfym_config_free(cpfym_config* config) { delete config; }

cpfym_status cpfym_config_load_file(cpfym_config* config, const char* path) {
  if (!config || !path) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  std::ifstream f(path);
  if (!f) return fail(CPFYM_ERR_IO, std::string("cannot read '") + path + "'", "config");
  return guarded([&] {
    config->config = cpfym::load_config(path, config->config);
    return CPFYM_OK;
  });
}

cpfym_status cpfym_config_parse(cpfym_config* config, const char* text) {
  if (!config || !text) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    config->config = cpfym::parse_config(text, config->config);
    return CPFYM_OK;
  });
}

cpfym_status cpfym_config_set(cpfym_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    cpfym::SuiteConfig next = config->config;
    cpfym::apply_setting(next, key, value);
    config->config = std::move(next);
    return CPFYM_OK;
  });
}

cpfym_status cpfym_config_validate(const cpfym_config* config) {
  if (!config) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    config->config.validate();
    return CPFYM_OK;
  });
}

cpfym_status cpfym_run(const cpfym_config* config, cpfym_report** out) {
  if (!config || !out) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto* r = new cpfym_report{config->config, {}};
    try {
      r->results = cpfym::run_suites(r->config);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
    return CPFYM_OK;
  });
}

void cpfym_report_free(cpfym_report* report) { delete report; }

size_t cpfym_report_size(const cpfym_report* report) { return report ? report->results.size() : 0; }

cpfym_status cpfym_report_check(const cpfym_report* report, size_t index, cpfym_check* out) {
  if (!report || !out) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  if (index >= report->results.size()) return fail(CPFYM_ERR_ARGUMENT, "check index out of range");
  fill(report->results[index], out);
  return CPFYM_OK;
}

cpfym_status cpfym_report_find(const cpfym_report* report, const char* id, cpfym_check* out) {
  if (!report || !id || !out) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  for (const auto& r : report->results)
    if (r.id == id) {
      fill(r, out);
      return CPFYM_OK;
    }
  return fail(CPFYM_ERR_ARGUMENT, std::string("no check '") + id + "'");
}

cpfym_status cpfym_report_counts(const cpfym_report* report, cpfym_counts* out) {
  if (!report || !out) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  const cpfym::ReportCounts c = cpfym::count_results(report->results);
  *out = {c.pass, c.fail, c.skip, c.info};
  return CPFYM_OK;
}

cpfym_status cpfym_report_render(const cpfym_report* report, cpfym_format format, int timings, char** out) {
  if (!report || !out) return fail(CPFYM_ERR_ARGUMENT, "null argument");
  if (format != CPFYM_FORMAT_JSON && format != CPFYM_FORMAT_TEXT) return fail(CPFYM_ERR_ARGUMENT, "unknown format");
  return guarded([&] {
    const std::string s = format == CPFYM_FORMAT_JSON ? cpfym::report_json(report->config, report->results, timings != 0)
                                                      : cpfym::report_text(report->config, report->results, timings != 0);
    char* buf = static_cast<char*>(std::malloc(s.size() + 1));
    if (!buf) return fail(CPFYM_ERR_INTERNAL, "out of memory");
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
    return CPFYM_OK;
  });
}

void cpfym_string_free(char* s) { std::free(s); }

}  // extern "C"
