#ifndef NEUREG_KERNEL_HPP
#define NEUREG_KERNEL_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "core/geometry.hpp"
#include "core/types.hpp"

namespace neureg::kernel {

using geometry::HalfSphereQuadrature;

struct KernelConfig {
  int dim = 3;         // n >= 3
  int truncation = 12; // series degree cap K
  double omega_n = 0.0;  // |S^{n-1}|
  double a0 = 0.0;       // (2-n)^{-1} omega_n^{-1}, negative for n >= 3
  double c_n = 0.0;      // 1/n
  double series_tol = 1e-6;  // acceptable relative truncation tail
};

KernelConfig make_config(int n, int K, double series_tol = 1e-6);

// Fundamental solution of the Laplacian, a0 |x|^{2-n}, and its derivatives.
double gamma_fundamental(int n, const Vec& x);
Vec grad_gamma(int n, const Vec& x);

// Half-space Neumann function N(x,y) = Gamma(x-y) + Gamma(x-y*).
double neumann_N(int n, const Vec& x, const Vec& y);
Vec grad_x_neumann_N(int n, const Vec& x, const Vec& y);
Vec grad_y_neumann_N(int n, const Vec& x, const Vec& y);
Mat grad_xy_neumann_N(int n, const Vec& x, const Vec& y);  // d^2/dx_i dy_j

// n = 2 log-kernel variant, for desk oracles only.
double neumann_N2(const Vec& x, const Vec& y);

// Projection part of N in y (or equivalently x), in closed form:
//   PN = 2 a0 / max^{n-2} + 2 a0 (n-2) (sum_{m<n} x_m y_m) / max^n,
// with max = max(|x|, |y|).
double PN(int n, const Vec& x, const Vec& y);
Vec grad_x_PN(int n, const Vec& x, const Vec& y);
Vec grad_y_PN(int n, const Vec& x, const Vec& y);
Mat grad_xy_PN(int n, const Vec& x, const Vec& y);

double N_perp(int n, const Vec& x, const Vec& y);  // N - PN
Vec grad_y_N_perp(int n, const Vec& x, const Vec& y);
Mat grad_xy_N_perp(int n, const Vec& x, const Vec& y);
Vec grad_x_N_perp(int n, const Vec& x, const Vec& y);

// Homogeneous harmonic polynomial, stored as monomial terms.
struct HarmonicPoly {
  int degree = 0;
  std::vector<std::pair<double, std::vector<int>>> terms;
  double eval(const Vec& xhat) const;
};

// Orthonormal basis (spherical-mean inner product on S^{n-1}_+) of the
// harmonics that are even in x_n, per degree, built by Gram-Schmidt on
// monomial harmonic polynomials with exact sphere integrals.
class EvenHarmonicBasis {
public:
  EvenHarmonicBasis(int n, int K);
  int dim_at(int k) const { return static_cast<int>(per_degree_[k].size()); }
  const std::vector<HarmonicPoly>& degree(int k) const { return per_degree_[k]; }
  int max_degree() const { return static_cast<int>(per_degree_.size()) - 1; }
  int ambient_dim() const { return n_; }

private:
  int n_;
  std::vector<std::vector<HarmonicPoly>> per_degree_;
};

// Even-harmonic expansion of N with numerically projected coefficients,
// frozen at construction.  Instances are memoized per (n, K).
class NeumannSeries {
public:
  explicit NeumannSeries(const KernelConfig& cfg);

  const KernelConfig& config() const { return cfg_; }
  const EvenHarmonicBasis& basis() const { return basis_; }
  const std::vector<std::vector<double>>& coefficients() const { return coeff_; }

  // Full series value; throws RadiiEqual / TruncationInsufficient.
  double evaluate(const Vec& x, const Vec& y) const;
  // Partial sum over degrees kmin..kmax (no truncation check).
  double partial(const Vec& x, const Vec& y, int kmin, int kmax) const;

  void save_csv(std::ostream& os) const;
  // Round-trips the coefficient table (basis is rebuilt deterministically).
  static std::vector<std::vector<double>> load_csv(std::istream& is);

private:
  KernelConfig cfg_;
  EvenHarmonicBasis basis_;
  std::vector<std::vector<double>> coeff_;  // [k][m]
};

const NeumannSeries& shared_series(int n, int K);

// Tensor-product volume rule on the half annulus r < |x| < s: radial
// Gauss-Legendre times a half-sphere rule.
struct VolumeRule {
  int radial = 16;
  int sphere_order = 12;
};

struct AnnulusNorm {
  double p = 0.0, r = 0.0;
  double Mp = 0.0;
  double M1p = 0.0;  // r Mp(grad w) + Mp(w); NaN when no gradient given
};

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;

double annulus_Mp(int n, const ScalarField& w, double p, double r, const VolumeRule& rule);
AnnulusNorm annulus_norm(int n, const ScalarField& w, const std::optional<VectorField>& grad_w,
                         double p, double r, const VolumeRule& rule);

struct SourceData {
  int dim = 3;
  ScalarField f0;
  std::optional<VectorField> fvec;
  double support_lo = 1.0, support_hi = 2.0;
  double p = 4.0;
};

// Smooth radial bump on [lo,hi] modulated by a mild angular factor.
SourceData bump_source(int n, double lo, double hi, double p, double angular_a = 0.0,
                       double angular_b = 0.0);

// Proposition-hypothesis weighted integrals; throws HypothesisViolated when
// they fail to be finite on the sampled range.
void check_source_hypothesis(const SourceData& src, const VolumeRule& rule);

// w(x) = int (N_perp f0 - grad_y N_perp . fvec) dy over the support shell,
// with the source tabulated on the volume rule once.
class PerpPotential {
public:
  PerpPotential(const KernelConfig& cfg, const SourceData& src, const VolumeRule& rule);
  double operator()(const Vec& x) const;
  Vec grad(const Vec& x) const;

private:
  int n_;
  bool has_fvec_;
  Mat nodes_;     // volume nodes (rows)
  Vec weights_;   // shell-weighted quadrature weights
  Vec f0_;        // source samples
  Mat fvec_;      // vector source samples (rows), if present
};

double perp_potential(const KernelConfig& cfg, const SourceData& src, const Vec& x,
                      const VolumeRule& rule);
Vec grad_perp_potential(const KernelConfig& cfg, const SourceData& src, const Vec& x,
                        const VolumeRule& rule);

struct Prop1Result {
  std::vector<double> r_grid, lhs, rhs;
  double c_fit = 0.0;         // sup lhs/rhs
  double c_fit_refined = 0.0; // same on a refined quadrature
  double variation = 0.0;     // max(c,c')/min(c,c')
  bool pass = false;
};

Prop1Result prop1_check(const KernelConfig& cfg, const SourceData& src, double p,
                        const std::vector<double>& r_grid, const VolumeRule& rule);

bool uniqueness_exponent_ok(double alpha, int n, double p);

}  // namespace neureg::kernel

#endif
