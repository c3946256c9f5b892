#ifndef NEUREG_FAMILIES_HPP
#define NEUREG_FAMILIES_HPP

#include <string>

#include "core/modulus.hpp"
#include "core/types.hpp"

namespace neureg::coefficients {

// Built-in radial profiles addressable from configs, used both as the g of a
// GS-class field and as the boundary graph profile h(|x~|):
//   zero                       0
//   power   c * r^gamma
//   logpow  sign * c * (1 - log r)^{-alpha}
//   sinlog  c * sin(log(1/r)) * (1 - log r)^{-alpha}
// Profiles are defined on (0,1] and held constant for r > 1.
struct RadialProfile {
  std::string family = "zero";
  double c = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  int sign = 1;

  double value(double r) const;     // g(r)
  double deriv(double r) const;     // dg/dr
  double g_tilde(double t) const;   // g(e^{-t}), analytic in t for t >= 0
  double dg_tilde(double t) const;  // d/dt of g~
  // Certified modulus with |g(r)| <= omega(r); power exponents are capped at
  // 0.9 so the vanishing condition admits a positive kappa.
  Modulus envelope_modulus() const;
  std::string describe() const;
};

RadialProfile zero_profile();
RadialProfile power_profile(double c, double gamma);
RadialProfile logpow_profile(double c, double alpha, int sign);
RadialProfile sinlog_profile(double c, double alpha);

}  // namespace neureg::coefficients

#endif
