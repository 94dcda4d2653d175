#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "cpfym/suite.hpp"

using namespace cpfym;

namespace {

std::string error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

const CheckResult* find(const std::vector<CheckResult>& rs, const std::string& id) {
  for (const auto& r : rs)
    if (r.id == id) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("config parsing") {
  SuiteConfig c = parse_config("# comment\n n = 2 \nrank=3 # trailing\n\nprofile = power\nalpha = 0.5\n"
                               "suites = gap, geometry\ntol.gap.lap_f = 1e-3\nquick = true\nseed = 42\n");
  CHECK(c.n == 2);
  CHECK(c.rank == 3);
  CHECK(c.profile == ProfileKind::power);
  CHECK(c.alpha == 0.5);
  CHECK(c.quick);
  CHECK(c.seed == 42);
  // canonical order regardless of listing order
  CHECK(c.suites == std::vector<std::string>{"geometry", "gap"});
  CHECK(c.tolerances.at("gap.lap_f") == 1e-3);
  CHECK(c.effective_resolution() == default_resolution(2, QuadratureScheme::spherical_gauss));
  CHECK(parse_config("suites = all").suites == suite_names());
}

TEST_CASE("config errors name the offending field") {
  CHECK(error_field("n = 0") == "n");
  CHECK(error_field("n = 5") == "n");
  CHECK(error_field("n = two") == "n");
  CHECK(error_field("rank = 1") == "rank");
  CHECK(error_field("alpha = -1") == "alpha");
  CHECK(error_field("epsilon = 0") == "epsilon");
  CHECK(error_field("resolution = 1") == "resolution");
  CHECK(error_field("seed = -4") == "seed");
  CHECK(error_field("connection = twisted") == "connection");
  CHECK(error_field("profile = cubic") == "profile");
  CHECK(error_field("quadrature = simpson") == "quadrature");
  CHECK(error_field("suites = geometry, bogus") == "suites");
  CHECK(error_field("suites = ,") == "suites");
  CHECK(error_field("tol.nothing.x = 1") == "tol.nothing.x");
  CHECK(error_field("tol.gap.lap_f = -1") == "tol.gap.lap_f");
  CHECK(error_field("colour = red") == "colour");
  CHECK(error_field("quick = maybe") == "quick");
  CHECK(error_field("just text") == "line 1");
  CHECK(error_field("n =") == "n");
  CHECK_THROWS_AS(load_config("/nonexistent/cpfym.cfg"), ConfigError);
}

TEST_CASE("checks are independent of suite selection and reproducible") {
  SuiteConfig a = parse_config("suites = geometry\n");
  SuiteConfig b = parse_config("suites = geometry, killing\n");
  auto ra = run_suites(a), rb = run_suites(b);
  for (const auto& r : ra) {
    const CheckResult* o = find(rb, r.id);
    REQUIRE(o != nullptr);
    CHECK(o->value == r.value);
    CHECK(o->status == r.status);
  }
  CHECK(report_json(a, ra, false) == report_json(a, run_suites(a), false));
  // a different seed moves the sampled checks
  auto g1 = run_suites(parse_config("n = 2\nsuites = gap\nquick = true\n"));
  auto g2 = run_suites(parse_config("n = 2\nsuites = gap\nquick = true\nseed = 2\n"));
  CHECK(find(g1, "gap.two_r_bound")->detail != find(g2, "gap.two_r_bound")->detail);
}

TEST_CASE("tolerance overrides change the verdict") {
  auto rs = run_suites(parse_config("suites = killing\ntol.killing.gram = 0\ntol.killing.equation = 1e-30\n"));
  const CheckResult* eq = find(rs, "killing.equation");
  REQUIRE(eq != nullptr);
  CHECK(eq->tolerance == 1e-30);
  CHECK(eq->status == (eq->value <= 1e-30 ? CheckStatus::pass : CheckStatus::fail));
  CHECK(find(rs, "killing.basis_size")->status == CheckStatus::pass);
}

TEST_CASE("gap suite: skipped for n = 1, present for n = 2") {
  auto r1 = run_suites(parse_config("suites = gap\n"));
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].status == CheckStatus::skip);
  CHECK(count_results(r1).fail == 0);
  auto r2 = run_suites(parse_config("n = 2\nsuites = gap\nquick = true\n"));
  const CheckResult* t = find(r2, "gap.threshold");
  REQUIRE(t != nullptr);
  CHECK(t->value == doctest::Approx(3.0 * std::sqrt(3.0) / 4.0).epsilon(1e-14));
  // the nominal -3|R|^2 bound is violated by random samples; the sharp bound holds
  CHECK(find(r2, "gap.two_r_bound")->status == CheckStatus::fail);
  CHECK(find(r2, "gap.two_r_sharp")->status == CheckStatus::pass);
}

TEST_CASE("JSON report layout") {
  SuiteConfig c = parse_config("suites = killing\n");
  auto rs = run_suites(c);
  CheckResult broken;
  broken.id = "killing.synthetic";
  broken.suite = "killing";
  broken.value = std::nan("");
  broken.status = CheckStatus::fail;
  rs.push_back(broken);
  auto j = nlohmann::json::parse(report_json(c, rs, false));
  CHECK(j["schema"] == "cpfym-report/1");
  CHECK(j["config"]["n"] == 1);
  CHECK(j["config"]["suites"].size() == 1);
  CHECK(j["checks"].size() == rs.size());
  CHECK(j["checks"].back()["value"].is_null());
  CHECK_FALSE(j["checks"][0].contains("seconds"));
  CHECK(j["summary"]["fail"] == 1);
  CHECK(j["summary"]["ok"] == false);
  auto timed = nlohmann::json::parse(report_json(c, rs, true));
  CHECK(timed["checks"][0].contains("seconds"));
  const std::string text = report_text(c, rs, false);
  CHECK(text.find("killing.gram") != std::string::npos);
  CHECK(text.find("1 fail") != std::string::npos);
}
