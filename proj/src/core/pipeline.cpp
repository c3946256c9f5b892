#include "core/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "core/kernel.hpp"
#include "core/numerics.hpp"
#include "core/reduction.hpp"

namespace neureg::cli {

namespace fs = std::filesystem;
using coefficients::RadialProfile;

namespace {

RadialProfile profile_from_json(const json& p) {
  const std::string fam = p.at("family").get<std::string>();
  if (fam == "zero" || fam == "none" || fam == "auto") return coefficients::zero_profile();
  if (fam == "power")
    return coefficients::power_profile(p.at("c").get<double>(), p.at("gamma").get<double>());
  if (fam == "logpow")
    return coefficients::logpow_profile(p.at("c").get<double>(), p.at("alpha").get<double>(),
                                        p.at("sign").get<int>());
  return coefficients::sinlog_profile(p.at("c").get<double>(), p.at("alpha").get<double>());
}

std::ofstream open_artifact(const std::string& out_dir, const std::string& name,
                            std::vector<std::string>& manifest) {
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / name;
  std::ofstream os(path);
  if (!os) fail(ErrKind::io, "IoFailure", "cannot open " + path.string());
  manifest.push_back(name);
  return os;
}

json base_report(const json& cfg, const std::string& command) {
  json rep;
  rep["version"] = kVersion;
  rep["command"] = command;
  rep["config"] = cfg;
  rep["generated_at_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  return rep;
}

}  // namespace

Problem build_problem(const json& cfg) {
  Problem pr;
  const json& p = cfg.at("problem");
  const int n = p.at("dimension").get<int>();
  pr.quadrature = geometry::build_quadrature(n, cfg.at("quadrature").at("order").get<int>());

  const json& st = cfg.at("stability");
  pr.stability.t_max = st.at("t_max").get<double>();
  pr.stability.ode_tol = st.at("ode_tol").get<double>();
  pr.stability.K_threshold = st.at("k_threshold").get<double>();
  pr.stability.growth_margin = st.at("growth_margin").get<double>();
  pr.stability.drift_margin = st.at("drift_margin").get<double>();
  pr.stability.samples_per_unit = st.at("samples_per_unit").get<int>();
  pr.stability.delta_alpha = st.at("delta_alpha").get<double>();

  const std::string fam = p.at("field").at("family").get<std::string>();
  pr.g_profile = coefficients::zero_profile();
  if (fam == "gs") pr.g_profile = profile_from_json(p.at("field").at("g"));

  std::optional<coefficients::Modulus> modulus;
  try {
    const std::string mfam = p.at("modulus").at("family").get<std::string>();
    if (mfam != "auto") {
      modulus = profile_from_json(p.at("modulus")).envelope_modulus();
    } else if (fam == "gs") {
      modulus = pr.g_profile.envelope_modulus();
    }
    const double kappa = p.at("kappa").get<double>();
    if (modulus && kappa > 0.0)
      modulus = coefficients::certify_modulus(modulus->omega, modulus->eps, kappa);
  } catch (const Error& e) {
    if (e.name() != "NotSquareDini" && e.name() != "VanishingConditionFailed") throw;
    pr.outside_theory = true;
    pr.outside_theory_reason = e.what();
  }

  if (fam == "identity" || fam == "curved") {
    pr.field = coefficients::identity_field(n);
  } else if (!pr.outside_theory) {
    pr.field = coefficients::gs_field(n, pr.g_profile, modulus,
                                      p.at("field").at("compactified").get<bool>());
  } else {
    // Outside-theory runs still carry the evaluator so the oracle can use it.
    pr.field = coefficients::gs_field(n, pr.g_profile, coefficients::zero_profile().envelope_modulus());
    pr.field.validated = true;  // skip the (necessarily failing) oscillation check
  }

  if (p.at("boundary").at("family").get<std::string>() != "none")
    pr.boundary = coefficients::boundary_graph(n, profile_from_json(p.at("boundary")));
  return pr;
}

json verdict_to_json(const stability::RegularityVerdict& v) {
  json j;
  j["stability"] = stability::to_string(v.stability);
  j["asymptotic"] = stability::to_string(v.asymptotic);
  j["regularity"] = stability::to_string(v.regularity);
  j["gradient_claim"] = v.gradient_claim ? json(*v.gradient_claim) : json(nullptr);
  j["mu_criteria"] = {{"cond1", stability::to_string(v.mu.cond1)},
                      {"cond2", stability::to_string(v.mu.cond2)}};
  if (v.scalar2d)
    j["scalar_criteria_2d"] = {{"lipschitz", stability::to_string(v.scalar2d->lipschitz)},
                               {"differentiable", stability::to_string(v.scalar2d->differentiable)}};
  j["evidence"] = {{"K_stat", v.evidence.K_stat},
                   {"mu_integral_sup", v.evidence.mu_integral_sup},
                   {"mu_integral_tail", v.evidence.mu_integral_tail},
                   {"T_max", v.evidence.t_max},
                   {"tolerances",
                    {{"ode_tol", v.evidence.ode_tol},
                     {"K_threshold", v.evidence.K_threshold},
                     {"growth_margin", v.evidence.growth_margin},
                     {"drift_margin", v.evidence.drift_margin}}},
                   {"K_trend", {{"last", v.evidence.K_trend.last}, {"prev", v.evidence.K_trend.prev}}},
                   {"drift_trend",
                    {{"last", v.evidence.drift_trend.last}, {"prev", v.evidence.drift_trend.prev}}},
                   {"notes", v.evidence.notes}};
  return j;
}

namespace {

struct ClassifyPieces {
  stability::RegularityVerdict verdict;
  std::optional<stability::ClassifyDetail> detail;
};

ClassifyPieces classify_pieces(const Problem& pr) {
  ClassifyPieces out;
  if (pr.outside_theory) {
    out.verdict.regularity = stability::Regularity::inconclusive;
    out.verdict.evidence.notes = "outside theory: " + pr.outside_theory_reason;
    return out;
  }
  out.detail = stability::classify_detailed(
      pr.field, pr.boundary ? &*pr.boundary : nullptr, pr.quadrature, pr.stability);
  out.verdict = out.detail->verdict;
  return out;
}

void write_trajectory_csv(std::ofstream& os, const stability::FundamentalTrajectory& traj,
                          const reduction::ReducedSystem& sys) {
  os << "t,phi_norm,K_stat,mu\n";
  const int stride = std::max<std::size_t>(1, traj.t_grid.size() / 400);
  for (std::size_t i = 0; i < traj.t_grid.size(); i += stride) {
    const double t = traj.t_grid[i];
    const double mu = reduction::mu_max(reduction::S_of(sys.R_of_r(std::exp(-t))));
    os << t << "," << op_norm(traj.Phi[i]) << "," << traj.K_running[i] << "," << mu << "\n";
  }
}

void write_reduced_csv(std::ofstream& os, const reduction::AssembledSystem& asys) {
  os << "t,r,mu,R_norm,S1_norm,S2_over_eps2\n";
  for (const auto& s : asys.samples) {
    const double ratio = s.eps > 1e-7 ? s.S2_norm / (s.eps * s.eps) : 0.0;
    os << s.t << "," << s.r << "," << s.mu << "," << s.R_norm << "," << s.S1_norm << "," << ratio
       << "\n";
  }
}

json classify_with_artifacts(const json& cfg, const std::string& out_dir,
                             std::vector<std::string>& manifest,
                             stability::RegularityVerdict& verdict_out) {
  const Problem pr = build_problem(cfg);
  ClassifyPieces pieces = classify_pieces(pr);
  verdict_out = pieces.verdict;
  json j = verdict_to_json(pieces.verdict);

  if (pieces.detail) {
    auto os = open_artifact(out_dir, "trajectory.csv", manifest);
    write_trajectory_csv(os, pieces.detail->trajectory, pieces.detail->system);

    // The reduced-system CSV is computed from the half-space moments of the
    // (flattened, when curved) coefficients on the effective window.
    coefficients::CoefficientField half = pr.field;
    if (pr.boundary) half = coefficients::flatten(pr.field, *pr.boundary);
    const auto eps = coefficients::epsilon_of_t(half.modulus);
    const auto asys = reduction::assemble_system(
        half, pr.quadrature,
        linspace(pieces.detail->effective.t_start + 1e-9, pr.stability.t_max, 160), eps);
    auto os2 = open_artifact(out_dir, "reduced.csv", manifest);
    write_reduced_csv(os2, asys);
    j["fitted_constants"] = {{"c_S2", asys.c_S2}, {"c_R1", asys.c_R1}};
  }
  return j;
}

void finalize(json& rep, const std::string& out_dir, std::vector<std::string>& manifest) {
  rep["artifacts"] = manifest;
  std::ofstream os(fs::path(out_dir) / "report.json");
  if (!os) fail(ErrKind::io, "IoFailure", "cannot write report.json under " + out_dir);
  os << rep.dump(2) << "\n";
}

}  // namespace

CommandResult cmd_classify(const json& cfg, const std::string& out_dir) {
  CommandResult res;
  res.report = base_report(cfg, "classify");
  std::vector<std::string> manifest;
  stability::RegularityVerdict verdict;
  res.report["verdict"] = classify_with_artifacts(cfg, out_dir, manifest, verdict);
  if (cfg.at("decisive").get<bool>() &&
      verdict.regularity == stability::Regularity::inconclusive)
    res.outcome = 3;
  res.report["outcome"] = res.outcome;
  finalize(res.report, out_dir, manifest);
  return res;
}

CommandResult cmd_verify(const json& cfg, const std::string& out_dir) {
  const json& p = cfg.at("problem");
  if (p.at("dimension").get<int>() != 2)
    fail(ErrKind::config, "ConfigInvalid", "verify needs an n = 2 GS-family problem");
  const std::string fam = p.at("field").at("family").get<std::string>();
  if (fam != "gs" && fam != "identity")
    fail(ErrKind::config, "ConfigInvalid", "verify supports gs or identity fields only");

  CommandResult res;
  res.report = base_report(cfg, "verify");
  std::vector<std::string> manifest;

  stability::RegularityVerdict verdict;
  res.report["verdict"] = classify_with_artifacts(cfg, out_dir, manifest, verdict);

  const Problem pr = build_problem(cfg);
  const auto g = oracle::gspec_from_profile(pr.g_profile);
  const auto run = oracle::solve_gs_ode(g, cfg.at("oracle").at("t_max").get<double>(),
                                        cfg.at("oracle").at("tol").get<double>());
  const auto emp = oracle::measure_regularity(run);
  const auto rep = oracle::adjudicate(verdict, emp);

  {
    auto os = open_artifact(out_dir, "oracle.csv", manifest);
    os << "t,r,U,U_t,rho,rho_asym\n";
    const int stride = std::max<std::size_t>(1, run.t.size() / 800);
    for (std::size_t i = 0; i < run.t.size(); i += stride)
      os << run.t[i] << "," << std::exp(-run.t[i]) << "," << run.U[i] << "," << run.Ut[i] << ","
         << run.rho[i] << "," << run.rho_asym[i] << "\n";
  }

  res.report["adjudication"] = {
      {"consistent", rep.consistent},
      {"verdict_regularity", rep.verdict_regularity},
      {"empirical_trend", rep.empirical_trend},
      {"explanation", rep.explanation},
      {"oracle",
       {{"g", run.g_desc},
        {"residual", run.residual},
        {"lipschitz_quotient", emp.lipschitz_quotient},
        {"derivative_estimate",
         emp.derivative_estimate ? json(*emp.derivative_estimate) : json(nullptr)},
        {"slope_late", emp.slope_late},
        {"slope_mid", emp.slope_mid}}}};

  if (!rep.consistent)
    res.outcome = 2;
  else if (cfg.at("decisive").get<bool>() &&
           verdict.regularity == stability::Regularity::inconclusive)
    res.outcome = 3;
  res.report["outcome"] = res.outcome;
  finalize(res.report, out_dir, manifest);
  return res;
}

CommandResult cmd_kernel_check(const json& cfg, const std::string& out_dir) {
  const json& kc = cfg.at("kernel");
  const int n = kc.at("dimension").get<int>();
  const int K = kc.at("truncation").get<int>();
  const double p = kc.at("p").get<double>();
  const double ratio = kc.at("series_ratio").get<double>();
  const kernel::VolumeRule rule{kc.at("radial").get<int>(), kc.at("sphere_order").get<int>()};

  CommandResult res;
  res.report = base_report(cfg, "kernel-check");
  std::vector<std::string> manifest;

  const kernel::NeumannSeries& series = kernel::shared_series(n, K);
  const auto& kcfg = series.config();
  const auto q = geometry::build_quadrature(n, 16);

  // Series against the reflection formula at the configured radius ratio.
  double series_err = 0.0;
  {
    const double rho_y = 1.0;
    for (int i = 0; i < q.size(); i += 3) {
      for (int j = 0; j < q.size(); j += 5) {
        const Vec x = ratio * rho_y * q.nodes.row(i).transpose();
        const Vec y = rho_y * q.nodes.row(j).transpose();
        const double direct = kernel::neumann_N(n, x, y);
        const double viaseries = series.evaluate(x, y);
        series_err = std::max(series_err, std::abs(direct - viaseries) / std::abs(direct));
      }
    }
  }

  // Closed-form PN against the quadrature projection of y -> N(x, y).
  double pn_err = 0.0;
  {
    const double rho = 1.0;
    const Vec x0 = 0.3 * q.nodes.row(q.size() / 3).transpose();
    geometry::SphericalFunction ny;
    ny.dim = n;
    ny.eval = [n, x0](const Vec& y) { return kernel::neumann_N(n, x0, y); };
    const auto proj = geometry::project_P(q, ny, rho);
    for (int i = 0; i < q.size(); ++i) {
      const Vec y = rho * q.nodes.row(i).transpose();
      pn_err = std::max(pn_err, std::abs(proj.eval(y) - kernel::PN(n, x0, y)));
    }
  }

  // Boundary condition dN/dx_n = 0 at x_n = 0 (analytic derivative).
  double bc_err = 0.0;
  for (int i = 0; i < q.size(); i += 2) {
    Vec x = 0.7 * q.nodes.row(i).transpose();
    x(n - 1) = 0.0;
    if (x.norm() < 1e-8) continue;
    const Vec y = 1.3 * q.nodes.row((i * 7 + 1) % q.size()).transpose();
    bc_err = std::max(bc_err, std::abs(kernel::grad_x_neumann_N(n, x, y)(n - 1)));
  }

  // Proposition-style potential bound on the configured source.
  const auto src = kernel::bump_source(n, kc.at("source").at("lo").get<double>(),
                                       kc.at("source").at("hi").get<double>(), p,
                                       kc.at("source").at("angular_a").get<double>(),
                                       kc.at("source").at("angular_b").get<double>());
  std::vector<double> r_grid;
  {
    const double r0 = kc.at("r0").get<double>();
    const double decades = kc.at("r_decades").get<double>();
    const int steps = static_cast<int>(std::ceil(decades * std::log2(10.0)));
    r_grid = dyadic_radii(r0, steps + 1);
  }
  const auto prop1 = kernel::prop1_check(kcfg, src, p, r_grid, rule);

  {
    auto os = open_artifact(out_dir, "series_coefficients.csv", manifest);
    series.save_csv(os);
  }

  res.report["kernel_checks"] = {
      {"series_vs_direct_rel_err", series_err},
      {"pn_projection_abs_err", pn_err},
      {"boundary_normal_derivative", bc_err},
      {"prop1",
       {{"c_fit", prop1.c_fit},
        {"c_fit_refined", prop1.c_fit_refined},
        {"variation", prop1.variation},
        {"pass", prop1.pass}}},
      {"truncation", K},
      {"radius_ratio", ratio}};
  res.report["outcome"] = res.outcome;
  finalize(res.report, out_dir, manifest);
  return res;
}

CommandResult cmd_sweep(const json& cfg, const std::string& out_dir) {
  const json& sw = cfg.at("sweep");
  const std::string param = sw.at("parameter").get<std::string>();
  const json values = sw.at("values");
  if (param.empty() || values.empty())
    fail(ErrKind::config, "ConfigInvalid", "sweep needs parameter and values");
  const std::string subcmd = sw.at("command").get<std::string>();

  CommandResult res;
  res.report = base_report(cfg, "sweep");
  std::vector<std::string> manifest;

  const json::json_pointer ptr(param.front() == '/' ? param : "/" + param);
  std::vector<json> runs(values.size());
  std::vector<std::string> errors(values.size());

  int workers = sw.at("workers").get<int>();
  if (workers <= 0)
    workers = static_cast<int>(std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                     values.size()));
  workers = std::max(workers, 1);

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      try {
        json sub = cfg;
        sub[ptr] = values[i];
        sub["sweep"]["values"] = json::array();
        sub = validate_config(sub);
        const std::string sub_dir = out_dir + "/run_" + std::to_string(i);
        const CommandResult r = subcmd == "verify" ? cmd_verify(sub, sub_dir)
                                                   : cmd_classify(sub, sub_dir);
        runs[i] = {{"value", values[i]}, {"outcome", r.outcome}};
        runs[i]["verdict"] = r.report["verdict"];
        if (r.report.contains("adjudication"))
          runs[i]["consistent"] = r.report["adjudication"]["consistent"];
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int wi = 0; wi < workers; ++wi) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < values.size(); ++i)
    if (!errors[i].empty())
      fail(ErrKind::internal, "SweepRunFailed",
           "value " + values[i].dump() + ": " + errors[i]);

  {
    auto os = open_artifact(out_dir, "sweep.csv", manifest);
    os << "value,regularity,stability,asymptotic,outcome\n";
    for (const auto& r : runs)
      os << r["value"].dump() << "," << r["verdict"]["regularity"].get<std::string>() << ","
         << r["verdict"]["stability"].get<std::string>() << ","
         << r["verdict"]["asymptotic"].get<std::string>() << "," << r["outcome"].get<int>()
         << "\n";
  }

  res.report["sweep_runs"] = runs;
  for (const auto& r : runs) res.outcome = std::max(res.outcome, r["outcome"].get<int>());
  res.report["outcome"] = res.outcome;
  finalize(res.report, out_dir, manifest);
  return res;
}

CommandResult run_command(const json& cfg, const std::string& command,
                          const std::string& out_dir) {
  if (command == "classify") return cmd_classify(cfg, out_dir);
  if (command == "verify") return cmd_verify(cfg, out_dir);
  if (command == "kernel-check") return cmd_kernel_check(cfg, out_dir);
  if (command == "sweep") return cmd_sweep(cfg, out_dir);
  fail(ErrKind::invalid_argument, "UnknownCommand", command);
}

}  // namespace neureg::cli
