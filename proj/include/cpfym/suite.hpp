#ifndef CPFYM_SUITE_HPP
#define CPFYM_SUITE_HPP

// Configuration-driven verification suites and their reports.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpfym/bundle.hpp"
#include "cpfym/fym.hpp"
#include "cpfym/quadrature.hpp"

namespace cpfym {

/// Malformed configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

const std::vector<std::string>& suite_names();

struct SuiteConfig {
  int n = 1;
  int rank = 2;
  ConnectionKind connection = ConnectionKind::kahler_abelian;
  double strength = 2.0;
  double amplitude = 0.5;
  ProfileKind profile = ProfileKind::linear;
  double alpha = 1.0;
  double epsilon = 1e-6;
  QuadratureScheme quadrature = QuadratureScheme::spherical_gauss;
  int resolution = 0;  // 0: per-scheme default
  std::uint64_t seed = 1;
  bool quick = false;
  std::vector<std::string> suites = suite_names();
  std::map<std::string, double> tolerances;  // check id -> tolerance override

  void validate() const;
  int effective_resolution() const;
};

/// Applies one `key = value` setting; throws ConfigError.
void apply_setting(SuiteConfig& config, const std::string& key, const std::string& value);
/// Parses the text format: `key = value` lines, `#` comments, blank lines.
SuiteConfig parse_config(const std::string& text, SuiteConfig base = SuiteConfig());
SuiteConfig load_config(const std::string& path, SuiteConfig base = SuiteConfig());

enum class CheckStatus { pass, fail, skip, info };
const char* status_name(CheckStatus s);

/// How `value` is judged: abs/rel compare against `expected` within
/// `tolerance`; max bounds value <= expected; min bounds value >= expected.
enum class Comparison { abs, rel, max, min, none };
const char* comparison_name(Comparison c);

struct CheckResult {
  std::string id;
  std::string suite;
  std::string tag;  // identity or estimate the check instantiates
  std::string description;
  Comparison comparison = Comparison::abs;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::info;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CheckResult> run_suites(const SuiteConfig& config);

struct ReportCounts {
  std::size_t pass = 0, fail = 0, skip = 0, info = 0;
};
ReportCounts count_results(const std::vector<CheckResult>& results);

std::string report_json(const SuiteConfig& config, const std::vector<CheckResult>& results, bool timings);
std::string report_text(const SuiteConfig& config, const std::vector<CheckResult>& results, bool timings);

}  // namespace cpfym

#endif  // CPFYM_SUITE_HPP
