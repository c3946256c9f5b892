#ifndef NEUREG_COEFFICIENTS_HPP
#define NEUREG_COEFFICIENTS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/families.hpp"
#include "core/geometry.hpp"
#include "core/modulus.hpp"
#include "core/types.hpp"

namespace neureg::coefficients {

// a_ij(x) on the closed half-space, normalized to a(0) = I, together with the
// modulus bounding its oscillation on spheres.
struct CoefficientField {
  int dim = 0;
  std::function<Mat(const Vec&)> a;
  Modulus modulus;
  double lambda = 0.0;  // ellipticity bounds, filled by validate_field
  double Lambda = 0.0;
  bool normalized = false;
  bool compactified = false;  // a = I for |x| >= 1
  bool validated = false;
  std::string describe;
};

// Boundary graph x_n = h(x~) with h(0) = 0 and grad h(0) = 0.
struct BoundaryGraph {
  int dim = 0;  // ambient dimension n; h takes the (n-1)-vector x~
  std::function<double(const Vec&)> h;
  std::function<Vec(const Vec&)> grad_h;
  Modulus modulus;
  bool validated = false;
  std::string describe;
};

CoefficientField identity_field(int n);

// GS class a_ij = delta_ij + g(r) theta_i theta_j.  The modulus defaults to
// the profile envelope; pass one explicitly to exercise oscillation failures.
CoefficientField gs_field(int n, const RadialProfile& g, std::optional<Modulus> omega = {},
                          bool compactified = false);

// Radial boundary graph h(x~) = p(|x~|) from a profile (p(0+) must vanish).
BoundaryGraph boundary_graph(int n, const RadialProfile& p, std::optional<Modulus> omega = {});

// Verifies ellipticity, per-sphere oscillation against omega, and the origin
// normalization; fills lambda/Lambda.  Throws EllipticityViolation,
// OscillationViolation (reporting the worst (r, theta)) or NotNormalized.
CoefficientField validate_field(CoefficientField field, const geometry::HalfSphereQuadrature& q,
                                const std::vector<double>& r_grid);

// Verifies h(0) = 0, grad h(0) = 0 and sup_{|x|=r} |grad h| <= omega(r).
BoundaryGraph validate_graph(BoundaryGraph graph, const geometry::HalfSphereQuadrature& q,
                             const std::vector<double>& r_grid);

// The boundary-flattening change of variables: coefficients for the half-space
// problem in y with x~ = y~, x_n = y_n + h(y~).  The composite modulus is
// (1 + Lambda) (omega_a + omega_h).
CoefficientField flatten(const CoefficientField& a, const BoundaryGraph& h);

}  // namespace neureg::coefficients

#endif
