#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "cpfym/cpfym.h"

TEST_CASE("config handle and errors") {
  cpfym_config* c = nullptr;
  REQUIRE(cpfym_config_new(&c) == CPFYM_OK);
  CHECK(cpfym_config_set(c, "n", "2") == CPFYM_OK);
  CHECK(cpfym_config_set(c, "rank", "99") == CPFYM_OK);  // range checked on validate
  CHECK(cpfym_config_validate(c) == CPFYM_ERR_CONFIG);
  CHECK(std::string(cpfym_last_error_field()) == "rank");
  CHECK(cpfym_config_set(c, "rank", "3") == CPFYM_OK);
  CHECK(cpfym_config_validate(c) == CPFYM_OK);
  CHECK(cpfym_config_set(c, "n", "x") == CPFYM_ERR_CONFIG);
  CHECK(std::string(cpfym_last_error_field()) == "n");
  CHECK(cpfym_config_parse(c, "suites = nope\n") == CPFYM_ERR_CONFIG);
  CHECK(cpfym_config_load_file(c, "/nonexistent/file.cfg") == CPFYM_ERR_IO);
  CHECK(cpfym_config_set(nullptr, "n", "1") == CPFYM_ERR_ARGUMENT);
  CHECK(cpfym_config_new(nullptr) == CPFYM_ERR_ARGUMENT);
  cpfym_config_free(c);
  cpfym_config_free(nullptr);
}

TEST_CASE("run, inspect and render a report") {
  cpfym_config* c = nullptr;
  REQUIRE(cpfym_config_new(&c) == CPFYM_OK);
  REQUIRE(cpfym_config_parse(c, "suites = killing\nseed = 3\n") == CPFYM_OK);
  cpfym_report* r = nullptr;
  REQUIRE(cpfym_run(c, &r) == CPFYM_OK);
  const size_t n = cpfym_report_size(r);
  CHECK(n > 0);
  cpfym_counts counts{};
  REQUIRE(cpfym_report_counts(r, &counts) == CPFYM_OK);
  CHECK(counts.pass + counts.fail + counts.skip + counts.info == n);
  CHECK(counts.fail == 0);
  cpfym_check chk{};
  REQUIRE(cpfym_report_check(r, 0, &chk) == CPFYM_OK);
  CHECK(std::strncmp(chk.id, "killing.", 8) == 0);
  CHECK(cpfym_report_check(r, n, &chk) == CPFYM_ERR_ARGUMENT);
  REQUIRE(cpfym_report_find(r, "killing.basis_size", &chk) == CPFYM_OK);
  CHECK(chk.value == 3.0);
  CHECK(chk.status == CPFYM_CHECK_PASS);
  CHECK(std::string(chk.comparison) == "abs");
  CHECK(cpfym_report_find(r, "killing.none", &chk) == CPFYM_ERR_ARGUMENT);

  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(cpfym_report_render(r, CPFYM_FORMAT_JSON, 0, &a) == CPFYM_OK);
  cpfym_report* r2 = nullptr;
  REQUIRE(cpfym_run(c, &r2) == CPFYM_OK);
  REQUIRE(cpfym_report_render(r2, CPFYM_FORMAT_JSON, 0, &b) == CPFYM_OK);
  CHECK(std::string(a) == std::string(b));
  cpfym_string_free(a);
  cpfym_string_free(b);
  REQUIRE(cpfym_report_render(r, CPFYM_FORMAT_TEXT, 1, &a) == CPFYM_OK);
  CHECK(std::string(a).find("killing.gram") != std::string::npos);
  cpfym_string_free(a);
  CHECK(cpfym_report_render(r, static_cast<cpfym_format>(7), 0, &a) == CPFYM_ERR_ARGUMENT);
  cpfym_report_free(r);
  cpfym_report_free(r2);
  cpfym_config_free(c);
  CHECK(cpfym_thread_count() >= 1);
  CHECK(std::strlen(cpfym_version()) > 0);
}
