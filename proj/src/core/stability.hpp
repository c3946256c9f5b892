#ifndef NEUREG_STABILITY_HPP
#define NEUREG_STABILITY_HPP

#include <optional>
#include <string>
#include <vector>

#include "core/reduction.hpp"
#include "core/types.hpp"

namespace neureg::stability {

using coefficients::BoundaryGraph;
using coefficients::CoefficientField;
using geometry::HalfSphereQuadrature;
using reduction::AssembledSystem;
using reduction::ReducedSystem;

struct StabilityConfig {
  double t_max = 40.0;          // horizon, r down to e^{-t_max}
  double t_start = 0.0;         // analysis window start; verdicts are
                                // start-invariant (cocycle), so classify may
                                // move it inward when ellipticity degenerates
                                // at unit scale
  double ode_tol = 1e-10;
  double K_threshold = 1e6;
  double growth_margin = 0.01;  // tolerated K_stat growth per decade of r
  double drift_margin = 0.02;   // tolerated ||Phi|| drift per decade of r
  int samples_per_unit = 50;    // trajectory grid density in t
  double delta_alpha = 0.5;     // alpha = n - delta in the forced-system tail weight
};

// Phi solves Phi' = -R(e^{-t}) Phi, Phi(0) = I.
struct FundamentalTrajectory {
  int k = 0;  // matrix size n-1
  std::vector<double> t_grid;
  std::vector<Mat> Phi;
  double tol = 0.0;
  double K_stat = 1.0;  // max ||Phi(t) Phi(s)^{-1}|| over the sampled pairs
  std::vector<double> decade_t;   // decade boundaries used by the trend tests
  std::vector<double> K_decade;   // running K_stat at each boundary
  std::vector<double> drift_decade;  // ||Phi(T_d) - Phi(T_{d-1})|| / scale
  std::vector<double> K_running;  // running K_stat per grid point (sampled pairs)
  double phi_scale = 1.0;         // max ||Phi|| over the run

  const Mat& at(double t) const;  // nearest grid sample
};

FundamentalTrajectory fundamental_matrix(const ReducedSystem& sys, double t_max, double tol,
                                         int samples_per_unit = 50, double t_start = 0.0);

enum class StabilityVerdict { uniformly_stable, not_uniformly_stable, inconclusive };
enum class AsymptoticVerdict { asymptotically_constant, not_asymptotically_constant, inconclusive };
enum class Regularity { differentiable, lipschitz, no_guarantee, inconclusive };
enum class TriState { yes, no, inconclusive };

std::string to_string(StabilityVerdict v);
std::string to_string(AsymptoticVerdict v);
std::string to_string(Regularity v);
std::string to_string(TriState v);

struct TrendInfo {
  double last = 0.0;  // growth/drift over the final decade
  double prev = 0.0;  // over the penultimate decade
};

StabilityVerdict uniform_stability(const FundamentalTrajectory& traj, double K_threshold,
                                   double margin, TrendInfo* info = nullptr);

AsymptoticVerdict asymptotically_constant(const FundamentalTrajectory& traj, double margin,
                                          TrendInfo* info = nullptr);

// Conditions on the largest eigenvalue mu(r) of S(r) = -(R+R^t)/2:
//   cond1: sup over r1 < r2 of int_{r1}^{r2} mu(rho) drho/rho stays bounded,
//   cond2: int_r^{eps} mu(rho) drho/rho -> -inf as r -> 0.
struct MuCriteria {
  TriState cond1 = TriState::inconclusive;
  TriState cond2 = TriState::inconclusive;
  double sup_integral = 0.0;   // sup over grid pairs
  double tail_integral = 0.0;  // int over the whole computed range
};

MuCriteria mu_criteria(const ReducedSystem& sys, double eps_low, double margin = 0.01,
                       double sup_threshold = 13.8,  // ~ log(1e6)
                       double t_start = 0.0);

struct ScalarCriteria {
  TriState lipschitz = TriState::inconclusive;
  TriState differentiable = TriState::inconclusive;
};

ScalarCriteria scalar_criteria_2d(const ReducedSystem& sys, double eps_low, double margin = 0.01,
                                  double t_start = 0.0);

struct Evidence {
  double K_stat = 0.0;
  double mu_integral_sup = 0.0;
  double mu_integral_tail = 0.0;
  double t_max = 0.0;
  double t_start = 0.0;
  double ode_tol = 0.0;
  double K_threshold = 0.0;
  double growth_margin = 0.0, drift_margin = 0.0;
  TrendInfo K_trend, drift_trend;
  std::string notes;
};

struct RegularityVerdict {
  StabilityVerdict stability = StabilityVerdict::inconclusive;
  AsymptoticVerdict asymptotic = AsymptoticVerdict::inconclusive;
  Regularity regularity = Regularity::inconclusive;
  std::optional<std::string> gradient_claim;  // "all derivatives zero"
  Evidence evidence;
  MuCriteria mu;
  std::optional<ScalarCriteria> scalar2d;
};

// Theorem-path pipeline; mu-criteria (and scalar criteria when n = 2) are
// recorded as corroborating evidence, and a contradiction between the paths
// downgrades the verdict to inconclusive.
RegularityVerdict classify(const CoefficientField& a, const BoundaryGraph* h,
                           const HalfSphereQuadrature& q, const StabilityConfig& cfg);

// Same pipeline keeping the intermediate objects (for reports and plots).
struct ClassifyDetail {
  RegularityVerdict verdict;
  FundamentalTrajectory trajectory;
  ReducedSystem system;
  StabilityConfig effective;  // t_start may have moved inward
};
ClassifyDetail classify_detailed(const CoefficientField& a, const BoundaryGraph* h,
                                 const HalfSphereQuadrature& q, const StabilityConfig& cfg);

// Assemble the verdict from precomputed pieces (used by classify and tests).
RegularityVerdict assemble_verdict(const FundamentalTrajectory& traj, const ReducedSystem& mu_sys,
                                   const StabilityConfig& cfg);

// Forced (phi, psi) system d/dt (phi,psi) + diag(0,-nI)(phi,psi) + calR (phi,psi) = g.
struct ForcingSpec {
  std::function<Vec(double)> g1;  // k-vector
  std::function<Vec(double)> g2;
};

struct ForcedSystem {
  int k = 0;       // block size
  double n = 0.0;  // ambient dimension in the -nI block
  std::function<Mat(double)> calR;  // 2k x 2k
  std::function<double(double)> eps;
};

ForcedSystem forced_from_assembled(const AssembledSystem& sys);

struct ForcedState {
  std::vector<double> t_grid;
  std::vector<Vec> phi, psi;
  Vec phi0, psi0;
  bool finite_energy_selected = false;
  double sup_phi = 0.0;
  double g1_l1 = 0.0;
  double c_alpha = 0.0;  // sup_t e^{alpha t} int_t^inf |g2| e^{-alpha tau} dtau / eps(t)
  double alpha = 0.0;
  double fitted_c_phi = 0.0;  // sup_phi / (c_alpha + |phi0| + ||g1||_1)
  double fitted_c_psi = 0.0;  // sup_t |psi| / (eps (c_alpha + sup_{tau>t} |phi|))
};

// With psi0 given, integrates the initial-value problem as stated (the -nI
// block makes generic data grow like e^{nt}).  Without psi0, selects the
// bounded solution (finite-energy branch) by alternating a forward phi sweep
// with a backward psi sweep until the coupling fixed point converges.
ForcedState integrate_forced(const ForcedSystem& sys, const ForcingSpec& g, const Vec& phi0,
                             std::optional<Vec> psi0, double t_max, double tol,
                             double delta_alpha = 0.5);

}  // namespace neureg::stability

#endif
