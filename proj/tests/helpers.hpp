#ifndef NEUREG_TEST_HELPERS_HPP
#define NEUREG_TEST_HELPERS_HPP

#include <random>
#include <vector>

#include "core/geometry.hpp"
#include "core/types.hpp"

namespace neureg::testing {

// Random polynomial in x up to the given total degree, with its analytic
// gradient; coefficients are uniform in [-1, 1] from the seeded generator.
struct Polynomial {
  int dim = 0;
  std::vector<std::pair<double, std::vector<int>>> terms;

  double eval(const Vec& x) const {
    double s = 0.0;
    for (const auto& [c, a] : terms) {
      double m = c;
      for (int i = 0; i < dim; ++i)
        for (int k = 0; k < a[i]; ++k) m *= x(i);
      s += m;
    }
    return s;
  }

  Vec grad(const Vec& x) const {
    Vec g = Vec::Zero(dim);
    for (const auto& [c, a] : terms) {
      for (int i = 0; i < dim; ++i) {
        if (a[i] == 0) continue;
        double m = c * a[i];
        for (int j = 0; j < dim; ++j) {
          const int p = (j == i) ? a[j] - 1 : a[j];
          for (int k = 0; k < p; ++k) m *= x(j);
        }
        g(i) += m;
      }
    }
    return g;
  }
};

inline void enumerate_upto(int n, int deg, std::vector<int>& cur,
                           std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int a = 0; a <= deg; ++a) {
    cur.push_back(a);
    enumerate_upto(n, deg - a, cur, out);
    cur.pop_back();
  }
}

inline Polynomial random_polynomial(int n, int deg, std::mt19937_64& rng) {
  std::vector<std::vector<int>> monos;
  std::vector<int> cur;
  enumerate_upto(n, deg, cur, monos);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Polynomial p;
  p.dim = n;
  for (auto& a : monos) p.terms.push_back({unif(rng), a});
  return p;
}

inline geometry::SphericalFunction as_spherical(const Polynomial& p) {
  geometry::SphericalFunction f;
  f.dim = p.dim;
  f.eval = [p](const Vec& x) { return p.eval(x); };
  f.grad = [p](const Vec& x) { return p.grad(x); };
  f.smoothness = geometry::Smoothness::c1;
  return f;
}

// Exact half-sphere mean of a polynomial via the closed-form monomial
// integrals; the independent oracle for quadrature checks.
inline double exact_half_sphere_mean(const Polynomial& p) {
  double s = 0.0;
  for (const auto& [c, a] : p.terms) s += c * geometry::monomial_half_sphere_integral(a);
  return s / geometry::half_sphere_area(p.dim);
}

}  // namespace neureg::testing

#endif
