#include "neureg/neureg.h"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("neureg_capi_" + tag);
  fs::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("version string is exposed") {
  CHECK(neureg_version() != nullptr);
  CHECK(std::strlen(neureg_version()) > 0);
}

TEST_CASE("creation validates the config and reports errors") {
  neureg_run* run = nullptr;
  CHECK(neureg_run_create("not json", &run) == NEUREG_ERR_CONFIG);
  CHECK(run == nullptr);
  CHECK(std::strlen(neureg_last_error()) > 0);

  CHECK(neureg_run_create(R"({"problem": {"dimension": 9}})", &run) == NEUREG_ERR_CONFIG);
  CHECK(neureg_run_create("{}", nullptr) == NEUREG_ERR_ARGUMENT);
}

TEST_CASE("classify through the C surface") {
  neureg_run* run = nullptr;
  const char* cfg = R"({
    "problem": {"dimension": 2, "field": {"family": "identity"}},
    "stability": {"t_max": 20.0}
  })";
  REQUIRE(neureg_run_create(cfg, &run) == NEUREG_OK);
  CHECK(neureg_run_report(run) == nullptr);
  CHECK(std::string(neureg_run_config(run)).find("\"dimension\": 2") != std::string::npos);

  const std::string dir = fresh_dir("classify");
  REQUIRE(neureg_run_set_output_dir(run, dir.c_str()) == NEUREG_OK);
  REQUIRE(neureg_run_execute(run, "classify") == NEUREG_OK);
  CHECK(neureg_run_outcome(run) == 0);
  const std::string report = neureg_run_report(run);
  CHECK(report.find("DifferentiableAtZero") != std::string::npos);
  CHECK(fs::exists(fs::path(dir) / "report.json"));

  CHECK(neureg_run_execute(run, "no-such-command") == NEUREG_ERR_ARGUMENT);
  CHECK(std::string(neureg_run_error(run)).find("UnknownCommand") != std::string::npos);
  neureg_run_destroy(run);
}

TEST_CASE("verify surfaces config preconditions as errors") {
  neureg_run* run = nullptr;
  const char* cfg = R"({"problem": {"dimension": 3, "field": {"family": "identity"}}})";
  REQUIRE(neureg_run_create(cfg, &run) == NEUREG_OK);
  REQUIRE(neureg_run_set_output_dir(run, fresh_dir("verify3").c_str()) == NEUREG_OK);
  CHECK(neureg_run_execute(run, "verify") == NEUREG_ERR_CONFIG);
  CHECK(std::string(neureg_run_error(run)).find("n = 2") != std::string::npos);
  neureg_run_destroy(run);
}
