#ifndef NEUREG_REDUCTION_HPP
#define NEUREG_REDUCTION_HPP

#include <functional>
#include <vector>

#include "core/coefficients.hpp"
#include "core/geometry.hpp"
#include "core/types.hpp"

namespace neureg::reduction {

using coefficients::BoundaryGraph;
using coefficients::CoefficientField;
using coefficients::EpsilonOfT;
using geometry::HalfSphereQuadrature;

// Half-sphere moments of the coefficients at radius r; identity coefficients
// give alpha = 1, beta = gamma = 0, A = B = I/n, C = I.
struct SphericalMoments {
  double r = 0.0;
  double alpha = 0.0;
  Vec beta;   // (n-1)
  Vec gamma;  // (n-1)
  Mat A, B, C;  // (n-1) x (n-1)
};

SphericalMoments moments(const CoefficientField& a, const HalfSphereQuadrature& q, double r);

enum class Provenance { halfspace, curved, curved_laplace };

struct ReducedSystem {
  int dim = 0;  // ambient n; R is (n-1) x (n-1)
  Provenance provenance = Provenance::halfspace;
  std::function<Mat(double)> R_of_r;  // pure quadrature evaluator
  std::vector<double> r_grid;
  std::vector<Mat> R;   // samples on r_grid
  std::vector<Mat> S;   // -(R + R^t)/2, filled by mu_of
  std::vector<double> mu;
  bool mu_filled = false;
};

ReducedSystem compute_R_halfspace(const CoefficientField& a, const HalfSphereQuadrature& q,
                                  const std::vector<double>& r_grid);

ReducedSystem compute_R_curved(const CoefficientField& a, const BoundaryGraph& h,
                               const HalfSphereQuadrature& q, const std::vector<double>& r_grid);

// Independent specializations used as cross-check code paths.
double R_dim2_direct(const CoefficientField& a, double r, int phi_nodes);
Mat R_curved_identity(const BoundaryGraph& h, const HalfSphereQuadrature& q, double r);

Mat S_of(const Mat& R);
double mu_max(const Mat& S);
ReducedSystem& mu_of(ReducedSystem& sys);

Mat M_infinity(int n);
Mat J_matrix(int n);
Mat J_inverse(int n);

struct AssembledSample {
  double t = 0.0, r = 0.0, mu = 0.0;
  double R_norm = 0.0, S1_norm = 0.0, S2_norm = 0.0, eps = 0.0;
};

// Exact first-order system for V = (V1, V2): the coefficient relation is
// assembled from the moments and the (I + D(t)) mass matrix solved
// numerically; its asymptotic normal form M_inf + S1(t) and the (phi,psi)
// block system calR(t) = J^{-1} (M(t) - M_inf) J come with fitted constants
// for the eps^2 remainder bounds.
struct AssembledSystem {
  int dim = 0;  // ambient n; blocks are (n-1) x (n-1)
  std::vector<double> t_grid;
  std::function<Mat(double)> M_of_t;
  std::function<Mat(double)> S1_of_t;
  std::function<Mat(double)> calR_of_t;
  std::function<Mat(double)> R_of_t;  // R(e^{-t}) from the same moments (C - nB)
  Mat M_inf, J, J_inv;
  std::function<double(double)> eps;
  std::vector<AssembledSample> samples;
  double c_S2 = 0.0;  // fitted sup ||M - M_inf - S1|| / eps^2
  double c_R1 = 0.0;  // fitted sup ||R_1 - R|| / eps^2
};

AssembledSystem assemble_system(const CoefficientField& a, const HalfSphereQuadrature& q,
                                const std::vector<double>& t_grid, const EpsilonOfT& eps);

}  // namespace neureg::reduction

#endif
