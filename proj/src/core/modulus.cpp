#include "core/modulus.hpp"

#include <algorithm>
#include <cmath>

namespace neureg::coefficients {

namespace {

void check_monotone(const std::function<double(double)>& omega, const LogGridSpec& grid) {
  std::vector<double> radii;
  for (int j = grid.log_octaves; j >= 1; --j) radii.push_back(std::pow(2.0, -j));
  for (int i = 0; i <= grid.dense_points; ++i)
    radii.push_back(grid.r_min_dense + (1.0 - grid.r_min_dense) * i / grid.dense_points);
  std::sort(radii.begin(), radii.end());

  double prev = 0.0;
  bool first = true;
  for (double r : radii) {
    const double w = omega(r);
    if (!std::isfinite(w) || w < 0.0)
      fail(ErrKind::evaluation, "EvaluationFailure", "omega not finite/nonnegative at r");
    if (!first && w + 1e-12 * (1.0 + std::abs(w)) < prev)
      fail(ErrKind::hypothesis, "NotMonotone", "omega decreases at r = " + std::to_string(r));
    prev = w;
    first = false;
  }
}

void check_vanishing(const std::function<double(double)>& omega, double kappa,
                     const LogGridSpec& grid) {
  if (kappa <= 0.0)
    fail(ErrKind::invalid_argument, "VanishingConditionFailed", "kappa must be positive");
  // omega(r) r^{-1+kappa} nonincreasing for r near 0, on the dyadic grid.
  double prev = -1.0;
  for (int j = grid.log_octaves; j >= 3; --j) {
    const double r = std::pow(2.0, -j);
    const double val = omega(r) * std::pow(r, kappa - 1.0);
    if (prev >= 0.0 && val > prev * (1.0 + 1e-10) + 1e-300)
      fail(ErrKind::hypothesis, "VanishingConditionFailed",
           "omega(r) r^{kappa-1} increases near 0 (kappa = " + std::to_string(kappa) + ")");
    prev = val;
  }
}

}  // namespace

Modulus certify_modulus(const std::function<double(double)>& omega_r,
                        const std::function<double(double)>& eps_t, double kappa,
                        const LogGridSpec& grid) {
  check_monotone(omega_r, grid);
  check_vanishing(omega_r, kappa, grid);

  auto eps_sq = [&](double t) { return sq(eps_t(t)); };
  TailIntegral full = integrate_dyadic_tail(eps_sq, 0.0, 1e-12, grid.t_cap);

  if (!full.converged && full.tail_estimate == 0.0) {
    // Unresolved at the cap: apply the refinement comparison on the partial
    // integrals over [2^{-m}, 1], m = 20, 30, 40.
    const double ln2 = std::log(2.0);
    const double i20 = integrate_adaptive(eps_sq, 0.0, 20 * ln2, 1e-12);
    const double i30 = i20 + integrate_adaptive(eps_sq, 20 * ln2, 30 * ln2, 1e-12);
    const double i40 = i30 + integrate_adaptive(eps_sq, 30 * ln2, 40 * ln2, 1e-12);
    const double g1 = i30 - i20, g2 = i40 - i30;
    if (g2 > 0.01 * i40 && g2 >= 0.6 * g1)
      fail(ErrKind::hypothesis, "NotSquareDini",
           "partial integrals keep growing: I20 = " + std::to_string(i20) +
               ", I30 = " + std::to_string(i30) + ", I40 = " + std::to_string(i40));
  }

  Modulus m;
  m.omega = omega_r;
  m.eps = eps_t;
  m.kappa = kappa;
  m.delta = omega_r(1.0);
  m.sq_dini_integral = full.value;
  m.integral_tail = full.tail_estimate;
  m.integral_converged = full.converged;
  m.certified = true;
  return m;
}

Modulus certify_modulus(const std::function<double(double)>& omega_r, double kappa,
                        const LogGridSpec& grid) {
  auto eps = [omega_r](double t) { return omega_r(std::exp(-t)); };
  // A black-box omega is only visible through e^{-t}, so stop the tail sweep
  // before that underflows; the refinement comparison takes over from there.
  LogGridSpec g = grid;
  g.t_cap = std::min(g.t_cap, 690.0);
  return certify_modulus(omega_r, eps, kappa, g);
}

EpsilonOfT epsilon_of_t(const Modulus& m) {
  if (!m.certified)
    fail(ErrKind::hypothesis, "NotCertified", "epsilon_of_t needs a certified modulus");
  EpsilonOfT e;
  e.eval = m.eps;
  e.integral = m.sq_dini_integral;
  return e;
}

}  // namespace neureg::coefficients
