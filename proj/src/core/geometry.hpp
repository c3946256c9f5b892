#ifndef NEUREG_GEOMETRY_HPP
#define NEUREG_GEOMETRY_HPP

#include <functional>
#include <optional>
#include <vector>

#include "core/types.hpp"

namespace neureg::geometry {

// Surface measures |S^{n-1}| and |S^{n-1}_+|.
double sphere_area(int n);
double half_sphere_area(int n);

// Exact integral of the monomial theta^alpha over the full sphere S^{n-1}
// (zero unless every alpha_i is even) and over the upper half sphere
// (zero unless alpha_1..alpha_{n-1} are all even; alpha_n may be odd).
double monomial_sphere_integral(const std::vector<int>& alpha);
double monomial_half_sphere_integral(const std::vector<int>& alpha);

struct HalfSphereQuadrature {
  int dim = 0;    // ambient dimension n
  int order = 0;  // requested polynomial exactness degree
  Mat nodes;      // num_nodes x n, unit vectors with theta_n > 0
  Vec weights;    // positive, sum to |S^{n-1}_+|
  double area = 0.0;

  int size() const { return static_cast<int>(weights.size()); }
  // Mean value over S^{n-1}_+ of f evaluated at the scaled nodes r*theta_i.
  double mean(const std::function<double(const Vec&)>& f, double r) const;
};

// n = 2: Gauss-Legendre in the angle on (0,pi).
// n = 3: exact product rule, Gauss-Legendre in the polar cosine on (0,1)
//        times a uniform (trapezoid) azimuthal rule.
// n = 4: Gauss-Legendre in the polar angle on (0,pi/2) with the sin^2 surface
//        factor (spectrally accurate) times an exact product rule on S^2.
HalfSphereQuadrature build_quadrature(int n, int order);

enum class Smoothness { continuous, c1 };

// Carrier for g(r theta): a pure evaluator on the punctured closed half-space,
// with an optional analytic gradient.
struct SphericalFunction {
  int dim = 0;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;  // optional
  Smoothness smoothness = Smoothness::continuous;

  double at(double r, const Vec& theta) const { return eval(r * theta); }
};

SphericalFunction constant_function(int n, double value);

double mean_integral(const HalfSphereQuadrature& q, const SphericalFunction& f, double r);

// Projection onto span{1, theta_1, ..., theta_{n-1}} in the mean-value inner
// product: Pg = mean(g) + n sum_m theta_m mean(theta_m g), frozen at radius r.
SphericalFunction project_P(const HalfSphereQuadrature& q, const SphericalFunction& g, double r);

// u = u0(r) + vtilde(r).xtilde + w with w of zero mean and zero first moments.
struct Decomposition {
  int dim = 0;
  std::vector<double> r_grid;
  Vec u0;               // per grid radius
  Mat v;                // r_grid.size() x (n-1)
  SphericalFunction w;  // remainder, evaluable at any radius
};

Decomposition decompose(const HalfSphereQuadrature& q, const SphericalFunction& u,
                        const std::vector<double>& r_grid);

// The three mean integrals of the orthogonality lemma:
//   r1 = mean(theta_i d_i f)             (vanishes when mean f = 0)
//   r2 = max_j |mean(d_j f)|             (vanishes when mean theta_j f = 0)
//   r3 = max_j |mean(theta_j theta_i d_i f)|   (same hypothesis as r2)
// Signed value of the j=1 entry is kept alongside the maxima.
struct OrthogonalityResiduals {
  double radial = 0.0;
  double flat_max = 0.0;
  double mixed_max = 0.0;
  double flat_first = 0.0;
};

OrthogonalityResiduals orthogonality_residuals(const HalfSphereQuadrature& q,
                                               const SphericalFunction& f, double r, double step);

}  // namespace neureg::geometry

#endif
