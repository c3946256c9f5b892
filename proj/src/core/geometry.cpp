#include "core/geometry.hpp"

#include <cmath>

#include "core/numerics.hpp"

namespace neureg::geometry {

double sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

double half_sphere_area(int n) { return 0.5 * sphere_area(n); }

namespace {

inline double gamma_half(int a) { return std::tgamma(0.5 * (a + 1)); }

}  // namespace

double monomial_sphere_integral(const std::vector<int>& alpha) {
  int total = 0;
  double num = 1.0;
  for (int ai : alpha) {
    if (ai % 2 != 0) return 0.0;
    num *= gamma_half(ai);
    total += ai;
  }
  const int n = static_cast<int>(alpha.size());
  return 2.0 * num / std::tgamma(0.5 * (total + n));
}

double monomial_half_sphere_integral(const std::vector<int>& alpha) {
  const int n = static_cast<int>(alpha.size());
  int total = 0;
  double num = 1.0;
  for (int i = 0; i < n - 1; ++i) {
    if (alpha[i] % 2 != 0) return 0.0;
    num *= gamma_half(alpha[i]);
    total += alpha[i];
  }
  num *= gamma_half(alpha[n - 1]);
  total += alpha[n - 1];
  return num / std::tgamma(0.5 * (total + n));
}

double HalfSphereQuadrature::mean(const std::function<double(const Vec&)>& f, double r) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) {
    const double fi = f(r * nodes.row(i).transpose());
    if (!std::isfinite(fi))
      fail(ErrKind::evaluation, "EvaluationFailure", "integrand not finite at a quadrature node");
    s += weights(i) * fi;
  }
  return s / area;
}

HalfSphereQuadrature build_quadrature(int n, int order) {
  if (n < 2 || n > 4)
    fail(ErrKind::invalid_argument, "UnsupportedDimension", "n must be 2, 3 or 4");
  if (order < 4) fail(ErrKind::invalid_argument, "InvalidOrder", "order must be >= 4");

  HalfSphereQuadrature q;
  q.dim = n;
  q.order = order;
  q.area = half_sphere_area(n);

  if (n == 2) {
    // Gauss-Legendre in the angle is spectral, not algebraically exact, for
    // polynomials in theta; the padding keeps degree <= order below 1e-12.
    const int m = order + 12;
    auto [phi, w] = gauss_legendre_on(m, 0.0, M_PI);
    q.nodes.resize(m, 2);
    q.weights = w;
    for (int i = 0; i < m; ++i) {
      q.nodes(i, 0) = std::cos(phi(i));
      q.nodes(i, 1) = std::sin(phi(i));
    }
    return q;
  }

  if (n == 3) {
    const int mc = (order + 2) / 2;    // polar cosine, exact up to degree order
    const int ma = order + 1;          // azimuth, exact for trig degree <= order
    auto [c, wc] = gauss_legendre_on(mc, 0.0, 1.0);
    q.nodes.resize(mc * ma, 3);
    q.weights.resize(mc * ma);
    int k = 0;
    for (int i = 0; i < mc; ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - c(i) * c(i)));
      for (int j = 0; j < ma; ++j, ++k) {
        const double lam = 2.0 * M_PI * j / ma;
        q.nodes(k, 0) = s * std::cos(lam);
        q.nodes(k, 1) = s * std::sin(lam);
        q.nodes(k, 2) = c(i);
        q.weights(k) = wc(i) * (2.0 * M_PI / ma);
      }
    }
    return q;
  }

  // n == 4: polar angle in (0, pi/2) with surface factor sin^2; the GL rule is
  // spectrally accurate here (the integrand is analytic in the angle), padded
  // to keep monomials up to `order` below 1e-12.
  const int mp = order + 10;
  const int mc = (order + 2) / 2;
  const int ma = order + 1;
  auto [varth, wv] = gauss_legendre_on(mp, 0.0, 0.5 * M_PI);
  auto [c2, wc2] = gauss_legendre_on(mc, -1.0, 1.0);
  q.nodes.resize(mp * mc * ma, 4);
  q.weights.resize(mp * mc * ma);
  int k = 0;
  for (int i = 0; i < mp; ++i) {
    const double c4 = std::cos(varth(i));
    const double s4 = std::sin(varth(i));
    const double wpolar = wv(i) * s4 * s4;
    for (int j = 0; j < mc; ++j) {
      const double s2 = std::sqrt(std::max(0.0, 1.0 - c2(j) * c2(j)));
      for (int l = 0; l < ma; ++l, ++k) {
        const double lam = 2.0 * M_PI * l / ma;
        q.nodes(k, 0) = s4 * s2 * std::cos(lam);
        q.nodes(k, 1) = s4 * s2 * std::sin(lam);
        q.nodes(k, 2) = s4 * c2(j);
        q.nodes(k, 3) = c4;
        q.weights(k) = wpolar * wc2(j) * (2.0 * M_PI / ma);
      }
    }
  }
  return q;
}

SphericalFunction constant_function(int n, double value) {
  SphericalFunction f;
  f.dim = n;
  f.eval = [value](const Vec&) { return value; };
  f.grad = [n](const Vec&) { return Vec::Zero(n); };
  f.smoothness = Smoothness::c1;
  return f;
}

double mean_integral(const HalfSphereQuadrature& q, const SphericalFunction& f, double r) {
  if (r <= 0.0) fail(ErrKind::invalid_argument, "InvalidRadius", "radius must be positive");
  return q.mean(f.eval, r);
}

SphericalFunction project_P(const HalfSphereQuadrature& q, const SphericalFunction& g, double r) {
  const int n = q.dim;
  const double m0 = mean_integral(q, g, r);
  Vec m1(n - 1);
  for (int k = 0; k < n - 1; ++k)
    m1(k) = q.mean([&](const Vec& x) { return g.eval(x) * x(k) / x.norm(); }, r);

  SphericalFunction p;
  p.dim = n;
  p.smoothness = Smoothness::c1;
  p.eval = [n, m0, m1](const Vec& x) {
    const Vec theta = x / x.norm();
    double v = m0;
    for (int k = 0; k < n - 1; ++k) v += n * theta(k) * m1(k);
    return v;
  };
  return p;
}

Decomposition decompose(const HalfSphereQuadrature& q, const SphericalFunction& u,
                        const std::vector<double>& r_grid) {
  const int n = q.dim;
  for (std::size_t i = 0; i + 1 < r_grid.size(); ++i)
    if (!(r_grid[i] < r_grid[i + 1] || r_grid[i] > r_grid[i + 1]))
      fail(ErrKind::invalid_argument, "InvalidGrid", "r_grid must be strictly monotone");

  Decomposition d;
  d.dim = n;
  d.r_grid = r_grid;
  d.u0.resize(r_grid.size());
  d.v.resize(r_grid.size(), n - 1);
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double r = r_grid[i];
    if (r <= 0.0) fail(ErrKind::invalid_argument, "InvalidGrid", "radii must be positive");
    d.u0(i) = mean_integral(q, u, r);
    for (int k = 0; k < n - 1; ++k)
      d.v(i, k) = (n / r) * q.mean([&](const Vec& x) { return u.eval(x) * x(k) / x.norm(); }, r);
  }

  // Remainder is evaluable at any radius by recomputing the projections there;
  // all ingredients are pure.
  auto ueval = u.eval;
  HalfSphereQuadrature qcopy = q;
  d.w.dim = n;
  d.w.smoothness = u.smoothness;
  d.w.eval = [n, qcopy, ueval](const Vec& x) {
    const double r = x.norm();
    const double u0 = qcopy.mean(ueval, r);
    double val = ueval(x) - u0;
    for (int k = 0; k < n - 1; ++k) {
      const double vk =
          (n / r) * qcopy.mean([&](const Vec& y) { return ueval(y) * y(k) / y.norm(); }, r);
      val -= vk * x(k);
    }
    return val;
  };
  return d;
}

namespace {

OrthogonalityResiduals residuals_at_step(const HalfSphereQuadrature& q, const SphericalFunction& f,
                                         double r, double h) {
  const int n = q.dim;
  auto grad_at = [&](const Vec& x) -> Vec {
    if (f.grad) return f.grad(x);
    return central_gradient(f.eval, x, h);
  };

  OrthogonalityResiduals out;
  Vec flat = Vec::Zero(n - 1), mixed = Vec::Zero(n - 1);
  double radial = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const Vec theta = q.nodes.row(i).transpose();
    const Vec g = grad_at(r * theta);
    const double w = q.weights(i) / q.area;
    radial += w * theta.dot(g);
    for (int j = 0; j < n - 1; ++j) {
      flat(j) += w * g(j);
      mixed(j) += w * theta(j) * theta.dot(g);
    }
  }
  out.radial = radial;
  out.flat_first = flat(0);
  out.flat_max = flat.cwiseAbs().maxCoeff();
  out.mixed_max = mixed.cwiseAbs().maxCoeff();
  return out;
}

}  // namespace

OrthogonalityResiduals orthogonality_residuals(const HalfSphereQuadrature& q,
                                               const SphericalFunction& f, double r, double step) {
  if (step <= 0.0 || step >= r)
    fail(ErrKind::invalid_argument, "InvalidStep", "need 0 < step < r");
  const auto full = residuals_at_step(q, f, r, step);
  if (f.grad) return full;  // analytic gradient, no step-control needed
  const auto half = residuals_at_step(q, f, r, 0.5 * step);
  const double floor = 1e-7;
  auto unstable = [floor](double a, double b) {
    return std::abs(a - b) > 10.0 * (std::min(std::abs(a), std::abs(b)) + floor);
  };
  if (unstable(full.radial, half.radial) || unstable(full.flat_max, half.flat_max) ||
      unstable(full.mixed_max, half.mixed_max))
    fail(ErrKind::numeric, "StepTooLarge", "finite-difference residuals unstable under step halving");
  return half;
}

}  // namespace neureg::geometry
