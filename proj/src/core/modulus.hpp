#ifndef NEUREG_MODULUS_HPP
#define NEUREG_MODULUS_HPP

#include <functional>
#include <string>
#include <vector>

#include "core/numerics.hpp"
#include "core/types.hpp"

namespace neureg::coefficients {

// Modulus of continuity omega on (0,1], extended by omega(r) = delta for
// r > 1, together with its t-side form eps(t) = omega(e^{-t}).  Built-in
// families supply eps analytically so the square-Dini tail can be integrated
// far beyond the range where e^{-t} underflows.
struct Modulus {
  std::function<double(double)> omega;  // r > 0
  std::function<double(double)> eps;    // all t; equals omega(e^{-t})
  double kappa = 0.0;                   // vanishing exponent of the omega(r) r^{-1+kappa} test
  double delta = 0.0;                   // omega(1)
  double sq_dini_integral = 0.0;        // int_0^1 omega^2(r)/r dr
  double integral_tail = 0.0;           // extrapolated part of the integral, if any
  bool integral_converged = false;
  bool certified = false;
  std::string describe;
};

struct LogGridSpec {
  int dense_points = 256;   // uniform grid on [r_min_dense, 1] for monotonicity
  double r_min_dense = 1e-3;
  int log_octaves = 40;     // dyadic grid 2^{-1}..2^{-log_octaves} for the vanishing test
  double t_cap = 1.1e12;    // horizon for the square-Dini tail integration
};

// Verifies monotonicity, the vanishing condition on omega(r) r^{-1+kappa},
// and square-Dini summability; fills the integral value.  Throws NotMonotone,
// VanishingConditionFailed or NotSquareDini.
Modulus certify_modulus(const std::function<double(double)>& omega_r,
                        const std::function<double(double)>& eps_t, double kappa,
                        const LogGridSpec& grid = {});

// Same, with eps derived from omega (valid while e^{-t} does not underflow).
Modulus certify_modulus(const std::function<double(double)>& omega_r, double kappa,
                        const LogGridSpec& grid = {});

struct EpsilonOfT {
  std::function<double(double)> eval;
  double integral = 0.0;  // int_0^inf eps^2 dt, same as the square-Dini integral
};

EpsilonOfT epsilon_of_t(const Modulus& m);

}  // namespace neureg::coefficients

#endif
