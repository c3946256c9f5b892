#ifndef NEUREG_ORACLE_HPP
#define NEUREG_ORACLE_HPP

#include <optional>
#include <string>
#include <vector>

#include "core/families.hpp"
#include "core/stability.hpp"
#include "core/types.hpp"

namespace neureg::oracle {

// Radial coefficient profile in t = log(1/r); backed by a built-in family or
// by explicit callables in tests.
struct GSpec {
  coefficients::RadialProfile profile;
  std::function<double(double)> custom_g_tilde;   // overrides profile if set
  std::function<double(double)> custom_dg_tilde;

  double g_tilde(double t) const;
  double dg_tilde(double t) const;
  std::string describe() const;
};

GSpec gspec_from_profile(const coefficients::RadialProfile& p);

// Separated solution u = U(r) cos(phi) of the GS-class equation in n = 2;
// the recessive branch of d/dt[(1+g~) U_t] - U = 0 selected by backward
// integration, normalized so U(0) matches the asymptotic amplitude.
struct GsOracleRun {
  std::string g_desc;
  double t_max = 0.0;
  double tol = 0.0;
  std::vector<double> t, U, Ut, rho, rho_asym;  // rho = U e^t
  double residual = 0.0;  // max relative collocation residual
};

GsOracleRun solve_gs_ode(const GSpec& g, double t_max, double tol);

// e^{-t} exp(0.5 int_1^t g~(s) ds); throws HypothesisViolated when g~ or its
// derivative fails to decay on the grid.
double asymptotic_amplitude(const GSpec& g, double t);

enum class Trend { bounded, diverging, vanishing };
std::string to_string(Trend t);

struct EmpiricalRegularity {
  double lipschitz_quotient = 0.0;  // sup over the run of |U(r)|/r
  Trend trend = Trend::bounded;
  std::optional<double> derivative_estimate;
  double slope_late = 0.0, slope_mid = 0.0;  // log-log slopes of rho
};

EmpiricalRegularity measure_regularity(const GsOracleRun& run);

struct AgreementReport {
  bool consistent = true;
  std::string verdict_regularity;
  std::string empirical_trend;
  std::string explanation;
};

AgreementReport adjudicate(const stability::RegularityVerdict& verdict,
                           const EmpiricalRegularity& emp);

}  // namespace neureg::oracle

#endif
