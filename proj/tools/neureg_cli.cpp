// Command-line front end; links the shared C API only.
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "neureg/neureg.h"

namespace {

int fail_op(const std::string& msg) {
  std::fprintf(stderr, "neureg: error: %s\n", msg.c_str());
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-point regularity analysis for co-normal elliptic problems"};
  app.set_version_flag("--version", std::string(neureg_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  double t_max = -1.0;
  int order = -1;
  long seed = -1;
  bool decisive = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--t-max", t_max, "horizon override (stability and oracle)");
    sub->add_option("--order", order, "quadrature order override");
    sub->add_option("--seed", seed, "seed override");
    sub->add_flag("--decisive", decisive, "exit 3 when the verdict is inconclusive");
  };

  CLI::App* classify = app.add_subcommand("classify", "Lipschitz/differentiability verdict");
  CLI::App* verify = app.add_subcommand("verify", "classify plus the 2D oracle adjudication");
  CLI::App* kernel = app.add_subcommand("kernel-check", "Neumann-kernel fidelity checks");
  CLI::App* sweep = app.add_subcommand("sweep", "grid over a family parameter");
  for (CLI::App* sub : {classify, verify, kernel, sweep}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  std::string config_text;
  try {
    nlohmann::json cfg = nlohmann::json::parse(read_file(config_path));
    if (t_max > 0.0) {
      cfg["stability"]["t_max"] = t_max;
      cfg["oracle"]["t_max"] = t_max;
    }
    if (order > 0) cfg["quadrature"]["order"] = order;
    if (seed >= 0) cfg["seed"] = seed;
    if (decisive) cfg["decisive"] = true;
    config_text = cfg.dump();
  } catch (const std::exception& e) {
    return fail_op(e.what());
  }

  neureg_run* run = nullptr;
  if (neureg_run_create(config_text.c_str(), &run) != NEUREG_OK)
    return fail_op(neureg_last_error());
  if (!out_dir.empty() && neureg_run_set_output_dir(run, out_dir.c_str()) != NEUREG_OK) {
    const int rc = fail_op(neureg_run_error(run));
    neureg_run_destroy(run);
    return rc;
  }

  const neureg_status st = neureg_run_execute(run, command.c_str());
  if (st != NEUREG_OK) {
    const int rc = fail_op(neureg_run_error(run));
    neureg_run_destroy(run);
    return rc;
  }

  const nlohmann::json report = nlohmann::json::parse(neureg_run_report(run));
  if (report.contains("verdict")) {
    const auto& v = report["verdict"];
    std::printf("regularity: %s (stability %s, asymptotic %s)\n",
                v["regularity"].get<std::string>().c_str(),
                v["stability"].get<std::string>().c_str(),
                v["asymptotic"].get<std::string>().c_str());
    if (!v["gradient_claim"].is_null())
      std::printf("gradient: %s\n", v["gradient_claim"].get<std::string>().c_str());
  }
  if (report.contains("adjudication")) {
    const auto& a = report["adjudication"];
    std::printf("adjudication: %s (%s)\n",
                a["consistent"].get<bool>() ? "CONSISTENT" : "CONTRADICTION",
                a["explanation"].get<std::string>().c_str());
  }
  if (report.contains("kernel_checks")) {
    const auto& k = report["kernel_checks"];
    std::printf("series vs direct: %.3e, PN projection: %.3e, boundary dN/dx_n: %.3e\n",
                k["series_vs_direct_rel_err"].get<double>(),
                k["pn_projection_abs_err"].get<double>(),
                k["boundary_normal_derivative"].get<double>());
    std::printf("potential bound: c = %.3g (refined %.3g)\n",
                k["prop1"]["c_fit"].get<double>(), k["prop1"]["c_fit_refined"].get<double>());
  }
  if (report.contains("sweep_runs"))
    std::printf("sweep: %zu runs\n", report["sweep_runs"].size());

  const int outcome = neureg_run_outcome(run);
  neureg_run_destroy(run);
  return outcome;
}
