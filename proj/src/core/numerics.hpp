#ifndef NEUREG_NUMERICS_HPP
#define NEUREG_NUMERICS_HPP

#include <functional>
#include <utility>
#include <vector>

#include "core/types.hpp"

namespace neureg {

// Gauss-Legendre nodes/weights on (-1,1), by Newton iteration on P_m.
std::pair<Vec, Vec> gauss_legendre(int m);
// Same rule mapped to (a,b).
std::pair<Vec, Vec> gauss_legendre_on(int m, double a, double b);

// Fixed-order GL quadrature of f on [a,b].
double integrate_gl(const std::function<double(double)>& f, double a, double b, int m = 16);

// Adaptive quadrature: bisects until GL16 on the interval matches the sum of
// the two half-interval rules within tol (absolute + relative).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-12, int max_depth = 30);

// Integral of a nonnegative decaying integrand over [t0, inf), by dyadic
// windows.  Stops when a window adds a negligible relative amount; if the cap
// is reached while window sums still shrink geometrically, the remaining tail
// is extrapolated from the window ratio.  `converged` reports whether the
// truncation error estimate is below tol.
struct TailIntegral {
  double value = 0.0;
  double tail_estimate = 0.0;
  bool converged = false;
  std::vector<double> window_sums;    // per dyadic window, for diagnostics
  std::vector<double> window_bounds;  // t-values delimiting the windows
};
TailIntegral integrate_dyadic_tail(const std::function<double(double)>& f, double t0,
                                   double rel_tol = 1e-12, double t_cap = 1.1e12);

// Dormand-Prince 5(4) adaptive integration of y' = f(t,y), reporting y at
// every point of t_pts (strictly monotone, increasing or decreasing).  The
// step size adapts between grid points and is clamped to land on them.
using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
void ode_path(const OdeRhs& rhs, const Vec& y0, const std::vector<double>& t_pts,
              double rtol, double atol,
              const std::function<void(std::size_t idx, double t, const Vec& y)>& on_point);

// Central difference gradient of f at x with step h per coordinate.
Vec central_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h);

// Uniform grid helper: m+1 points from a to b inclusive.
std::vector<double> linspace(double a, double b, int m);
// Geometric radius grid r_j = r_max * 2^{-j}, j = 0..m-1 (dyadic annuli convention).
std::vector<double> dyadic_radii(double r_max, int m);

}  // namespace neureg

#endif
