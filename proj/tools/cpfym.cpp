// Command-line front end; talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cpfym/cpfym.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct ConfigDeleter {
  void operator()(cpfym_config* c) const { cpfym_config_free(c); }
};
struct ReportDeleter {
  void operator()(cpfym_report* r) const { cpfym_report_free(r); }
};

int usage_error(const std::string& message) {
  std::cerr << "cpfym: " << message << "\n";
  return kExitUsage;
}

std::string error_text() {
  std::string field = cpfym_last_error_field();
  std::string msg = cpfym_last_error();
  // the library message already leads with the field name
  return field.empty() || msg.rfind(field, 0) == 0 ? msg : field + ": " + msg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of F-Yang-Mills stability on complex projective space"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<long long> seed;
  std::optional<int> resolution;
  std::string format = "json";
  bool quick = false;
  bool timings = false;

  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed (nonnegative)");
  app.add_option("--resolution", resolution, "quadrature resolution (0: default for the scheme)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "text"}));
  app.add_flag("--quick", quick, "reduced sample counts");
  app.add_flag("--timings", timings, "include per-check wall time in the report");

  // subcommand -> suites ("" keeps the configured list)
  const std::map<std::string, std::pair<std::string, std::string>> commands = {
      {"verify-geometry", {"geometry", "Fubini-Study geometry: metric, curvature, volume"}},
      {"verify-killing", {"killing", "Killing fields of su(n+1)"}},
      {"verify-bochner", {"bochner", "Bochner-Weitzenbock formula and bundle identities"}},
      {"verify-variation", {"variation", "first and second variation, Killing contractions"}},
      {"stability", {"stability", "pointwise estimates and the Killing-summed second variation"}},
      {"gap", {"gap", "identities and bounds behind the curvature gap (n >= 2)"}},
      {"all", {"", "every suite in the configuration (default: all)"}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  cpfym_config* raw = nullptr;
  if (cpfym_config_new(&raw) != CPFYM_OK) return usage_error(error_text());
  std::unique_ptr<cpfym_config, ConfigDeleter> config(raw);

  if (!config_path.empty() && cpfym_config_load_file(config.get(), config_path.c_str()) != CPFYM_OK)
    return usage_error(error_text());

  auto set = [&](const std::string& key, const std::string& value) {
    return cpfym_config_set(config.get(), key.c_str(), value.c_str()) == CPFYM_OK;
  };
  const std::string command = app.get_subcommands().front()->get_name();
  const std::string& suites = commands.at(command).first;
  if (!suites.empty() && !set("suites", suites)) return usage_error(error_text());
  if (seed && !set("seed", std::to_string(*seed))) return usage_error(error_text());
  if (resolution && !set("resolution", std::to_string(*resolution))) return usage_error(error_text());
  if (quick && !set("quick", "true")) return usage_error(error_text());
  if (cpfym_config_validate(config.get()) != CPFYM_OK) return usage_error(error_text());

  cpfym_report* rep = nullptr;
  if (cpfym_run(config.get(), &rep) != CPFYM_OK) return usage_error(error_text());
  std::unique_ptr<cpfym_report, ReportDeleter> report(rep);

  char* text = nullptr;
  const cpfym_format fmt = format == "text" ? CPFYM_FORMAT_TEXT : CPFYM_FORMAT_JSON;
  if (cpfym_report_render(report.get(), fmt, timings ? 1 : 0, &text) != CPFYM_OK) return usage_error(error_text());
  std::fputs(text, stdout);
  cpfym_string_free(text);

  cpfym_counts counts{};
  cpfym_report_counts(report.get(), &counts);
  return counts.fail == 0 ? kExitPass : kExitFail;
}
