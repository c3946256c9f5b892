#include "core/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "core/numerics.hpp"

namespace neureg::oracle {

double GSpec::g_tilde(double t) const {
  if (custom_g_tilde) return custom_g_tilde(t);
  return profile.g_tilde(t);
}

double GSpec::dg_tilde(double t) const {
  if (custom_dg_tilde) return custom_dg_tilde(t);
  if (custom_g_tilde) {
    const double h = 1e-5;
    return (custom_g_tilde(t + h) - custom_g_tilde(t - h)) / (2.0 * h);
  }
  return profile.dg_tilde(t);
}

std::string GSpec::describe() const {
  if (custom_g_tilde) return "custom";
  return profile.describe();
}

GSpec gspec_from_profile(const coefficients::RadialProfile& p) {
  GSpec g;
  g.profile = p;
  return g;
}

namespace {

void check_decay(const GSpec& g, double t_max) {
  double head = 0.0, tail = 0.0, dhead = 0.0, dtail = 0.0;
  const int m = 64;
  for (int i = 0; i <= m; ++i) {
    const double th = 0.25 * t_max * i / m;
    const double tt = t_max * (0.75 + 0.25 * i / m);
    head = std::max(head, std::abs(g.g_tilde(th)));
    tail = std::max(tail, std::abs(g.g_tilde(tt)));
    dhead = std::max(dhead, std::abs(g.dg_tilde(th)));
    dtail = std::max(dtail, std::abs(g.dg_tilde(tt)));
  }
  if (tail > 0.8 * head + 1e-12 || dtail > 0.8 * dhead + 1e-12)
    fail(ErrKind::hypothesis, "HypothesisViolated",
         "g~ (or its derivative) does not decay on the grid");
}

double amplitude_integral(const GSpec& g, double t) {
  return integrate_adaptive([&](double s) { return g.g_tilde(s); }, 1.0, t, 1e-12);
}

}  // namespace

double asymptotic_amplitude(const GSpec& g, double t) {
  check_decay(g, std::max(t, 8.0));
  return std::exp(-t + 0.5 * amplitude_integral(g, t));
}

GsOracleRun solve_gs_ode(const GSpec& g, double t_max, double tol) {
  GsOracleRun run;
  run.g_desc = g.describe();
  run.t_max = t_max;
  run.tol = tol;

  const double pad = 4.0;
  const double t_ext = t_max + pad;

  // The analysis window starts where 1 + g~ is comfortably elliptic; the
  // built-in families may degenerate exactly at unit scale (t = 0) while the
  // behavior of interest is t -> infinity.
  double t0 = 0.0;
  {
    auto window_ok = [&](double lo) {
      for (double t = lo; t <= t_ext; t += 0.125)
        if (1.0 + g.g_tilde(t) < 0.55) return false;
      return true;
    };
    while (t0 < 5.0 && !window_ok(t0)) t0 += 0.25;
    if (!window_ok(t0))
      fail(ErrKind::hypothesis, "EllipticityLost", "1 + g~ stays below 1/2 on the range");
  }

  const int per_unit = 200;
  const int npts = static_cast<int>((t_ext - t0) * per_unit);
  std::vector<double> t_desc = linspace(t0, t_ext, npts);
  std::reverse(t_desc.begin(), t_desc.end());

  auto p_of = [&](double t) {
    const double p = 1.0 + g.g_tilde(t);
    if (p < 0.5) fail(ErrKind::hypothesis, "EllipticityLost", "1 + g~ dropped below 1/2");
    return p;
  };

  // State (U, V) with V = (1+g~) U_t; the decaying branch is unstable forward
  // in t, so integrate backward from asymptotic data at t_max + pad.
  OdeRhs rhs = [&](double t, const Vec& y, Vec& dy) {
    dy.resize(2);
    dy(0) = y(1) / p_of(t);
    dy(1) = y(0);
  };
  const double A_end = std::exp(-t_ext + 0.5 * amplitude_integral(g, t_ext));
  Vec y0(2);
  y0 << A_end, -std::sqrt(p_of(t_ext)) * A_end;

  std::vector<double> U_desc(npts + 1), V_desc(npts + 1);
  ode_path(rhs, y0, t_desc, tol, tol * 1e-4, [&](std::size_t i, double, const Vec& y) {
    U_desc[i] = y(0);
    V_desc[i] = y(1);
  });

  // Ascending arrays, trimmed to [t0, t_max], normalized to the asymptotic
  // amplitude at the window start.
  const double A0 = std::exp(-t0 + 0.5 * amplitude_integral(g, t0));
  const double scale = A0 / U_desc.back();
  for (int i = npts; i >= 0; --i) {
    const double t = t_desc[i];
    if (t > t_max + 1e-12) break;
    run.t.push_back(t);
    const double U = U_desc[i] * scale;
    const double V = V_desc[i] * scale;
    run.U.push_back(U);
    run.Ut.push_back(V / p_of(t));
    run.rho.push_back(U * std::exp(t));
    run.rho_asym.push_back(std::exp(0.5 * amplitude_integral(g, t)));
  }

  // Collocation residual of d/dt[(1+g~)U_t] = U via a 4th-order stencil on V.
  const double h = run.t[1] - run.t[0];
  double res = 0.0;
  const std::size_t m = run.t.size();
  for (std::size_t i = 2; i + 2 < m; i += 16) {
    const double V2p = run.Ut[i + 2] * p_of(run.t[i + 2]);
    const double V1p = run.Ut[i + 1] * p_of(run.t[i + 1]);
    const double V1m = run.Ut[i - 1] * p_of(run.t[i - 1]);
    const double V2m = run.Ut[i - 2] * p_of(run.t[i - 2]);
    const double dV = (-V2p + 8.0 * V1p - 8.0 * V1m + V2m) / (12.0 * h);
    const double sc = std::abs(run.U[i]) + std::abs(run.Ut[i]) + 1e-300;
    res = std::max(res, std::abs(dV - run.U[i]) / sc);
  }
  run.residual = res;

  // Recessive-selection check: forward re-integration must reproduce the
  // backward trajectory on an initial window.  The comparison horizon is
  // capped where double-precision growth contamination alone would breach
  // the threshold.
  const double t_chk =
      t0 + std::min((t_max - t0) / 2.0, 0.5 * std::log(1e-4 / (100.0 * tol)));
  if (t_chk > t0 + 1.0) {
    std::vector<double> t_fwd;
    for (double t : run.t) {
      if (t > t_chk) break;
      t_fwd.push_back(t);
    }
    Vec yf(2);
    yf << run.U[0], run.Ut[0] * p_of(t0);
    double worst = 0.0;
    ode_path(rhs, yf, t_fwd, tol, tol * 1e-4, [&](std::size_t i, double, const Vec& y) {
      const double sc = std::abs(run.U[i]) + 1e-300;
      worst = std::max(worst, std::abs(y(0) - run.U[i]) / sc);
    });
    if (worst > 1e-4)
      fail(ErrKind::numeric, "RecessiveSelectionFailed",
           "forward re-integration deviates by " + std::to_string(worst));
  }
  return run;
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::bounded: return "bounded";
    case Trend::diverging: return "diverging";
    default: return "vanishing";
  }
}

EmpiricalRegularity measure_regularity(const GsOracleRun& run) {
  constexpr double kLn10 = 2.302585092994046;
  if (run.t.back() - run.t.front() < 4.0 * kLn10)
    fail(ErrKind::invalid_argument, "RangeTooShort", "need at least 4 decades in r");

  EmpiricalRegularity out;
  for (std::size_t i = 0; i < run.t.size(); ++i)
    out.lipschitz_quotient = std::max(out.lipschitz_quotient, std::abs(run.rho[i]));

  // Log-log slope of rho against t over the last two decades of r, split in
  // two windows to require a sustained sign.
  auto slope = [&](double t_lo, double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < run.t.size(); ++i) {
      if (run.t[i] < t_lo || run.t[i] > t_hi || run.t[i] <= 0.0) continue;
      const double X = std::log(run.t[i]);
      const double Y = std::log(std::max(std::abs(run.rho[i]), 1e-300));
      sx += X;
      sy += Y;
      sxx += X * X;
      sxy += X * Y;
      ++cnt;
    }
    return (cnt * sxy - sx * sy) / std::max(cnt * sxx - sx * sx, 1e-300);
  };
  const double T = run.t.back();
  out.slope_mid = slope(T - 2.0 * kLn10, T - kLn10);
  out.slope_late = slope(T - kLn10, T);

  const double thr = 0.01;
  if (out.slope_late >= thr && out.slope_mid >= thr)
    out.trend = Trend::diverging;
  else if (out.slope_late <= -thr && out.slope_mid <= -thr)
    out.trend = Trend::vanishing;
  else
    out.trend = Trend::bounded;

  if (out.trend == Trend::vanishing) {
    out.derivative_estimate = 0.0;
  } else if (out.trend == Trend::bounded) {
    // Derivative exists when rho converges (Cauchy over the last decades).
    double rho_T = run.rho.back(), rho_prev = rho_T;
    for (std::size_t i = 0; i < run.t.size(); ++i)
      if (run.t[i] >= T - 2.0 * kLn10) {
        rho_prev = run.rho[i];
        break;
      }
    if (std::abs(rho_T - rho_prev) < 0.02 * std::max(1.0, std::abs(rho_T)))
      out.derivative_estimate = rho_T;
  }
  return out;
}

AgreementReport adjudicate(const stability::RegularityVerdict& verdict,
                           const EmpiricalRegularity& emp) {
  using stability::Regularity;
  AgreementReport rep;
  rep.verdict_regularity = stability::to_string(verdict.regularity);
  rep.empirical_trend = to_string(emp.trend);

  const bool diverging = emp.trend == Trend::diverging;
  switch (verdict.regularity) {
    case Regularity::differentiable:
      rep.consistent = !diverging;
      rep.explanation = rep.consistent
                            ? "differentiability guarantee met by a bounded/vanishing quotient"
                            : "differentiability guarantee contradicted by a diverging quotient";
      break;
    case Regularity::lipschitz:
      rep.consistent = !diverging;
      rep.explanation = rep.consistent
                            ? "Lipschitz guarantee met by a bounded quotient"
                            : "Lipschitz guarantee contradicted by a diverging quotient";
      break;
    case Regularity::no_guarantee:
      rep.consistent = true;
      rep.explanation = diverging ? "no guarantee given and the counterexample is realized"
                                  : "no guarantee given; the instance happens to stay bounded";
      break;
    default:
      rep.consistent = true;
      rep.explanation = "inconclusive verdict is compatible with any empirical outcome";
  }
  return rep;
}

}  // namespace neureg::oracle
