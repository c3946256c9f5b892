#include "core/geometry.hpp"

#include <doctest.h>

#include <cmath>

#include "core/numerics.hpp"
#include "helpers.hpp"

using namespace neureg;
using namespace neureg::geometry;
using neureg::testing::as_spherical;
using neureg::testing::exact_half_sphere_mean;
using neureg::testing::random_polynomial;

namespace {

SphericalFunction coordinate(int n, int i) {
  SphericalFunction f;
  f.dim = n;
  f.eval = [i](const Vec& x) { return x(i); };
  f.grad = [n, i](const Vec& x) {
    Vec g = Vec::Zero(n);
    g(i) = 1.0;
    return g;
  };
  f.smoothness = Smoothness::c1;
  return f;
}

}  // namespace

TEST_CASE("quadrature construction invariants") {
  for (int n : {2, 3, 4}) {
    const auto q = build_quadrature(n, n == 4 ? 12 : 16);
    for (int i = 0; i < q.size(); ++i) {
      CHECK(std::abs(q.nodes.row(i).norm() - 1.0) < 1e-14);
      CHECK(q.nodes(i, n - 1) > 0.0);
      CHECK(q.weights(i) > 0.0);
    }
    CHECK(std::abs(q.weights.sum() - half_sphere_area(n)) < 1e-12 * half_sphere_area(n));
    for (int m = 0; m < n; ++m) {
      const double mean_sq = q.mean([m](const Vec& x) { return x(m) * x(m); }, 1.0);
      CHECK(std::abs(mean_sq - 1.0 / n) < 1e-10);
    }
  }
}

TEST_CASE("n=2 rule: first-coordinate second moment exact") {
  const auto q = build_quadrature(2, 16);
  CHECK(q.size() >= 16);
  const double m = q.mean([](const Vec& x) { return sq(x(0) / x.norm()); }, 2.7);
  CHECK(std::abs(m - 0.5) < 1e-14);
}

TEST_CASE("n=3 rule: measure and polar second moment") {
  const auto q = build_quadrature(3, 8);
  CHECK(std::abs(q.weights.sum() - 2.0 * M_PI) < 1e-12 * 2.0 * M_PI);
  // Analytic hemisphere integral of theta_3^2 is 2 pi / 3.
  const double m = q.mean([](const Vec& x) { return x(2) * x(2); }, 1.0);
  CHECK(std::abs(m - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("quadrature rejects bad parameters") {
  CHECK_THROWS_WITH_AS(build_quadrature(5, 8), doctest::Contains("UnsupportedDimension"), Error);
  CHECK_THROWS_WITH_AS(build_quadrature(3, 3), doctest::Contains("InvalidOrder"), Error);
}

TEST_CASE("quadrature is exact against closed-form monomial integrals") {
  std::mt19937_64 rng(2024);
  for (int n : {2, 3, 4}) {
    const int order = 10;
    const auto q = build_quadrature(n, order);
    for (int trial = 0; trial < 12; ++trial) {
      const auto p = random_polynomial(n, order, rng);
      const double exact = exact_half_sphere_mean(p);
      const double viaq = q.mean([&](const Vec& x) { return p.eval(x); }, 1.0);
      CHECK(std::abs(viaq - exact) < 1e-10 * (1.0 + std::abs(exact)));
    }
  }
}

TEST_CASE("mean integral basics") {
  const auto q = build_quadrature(2, 16);
  CHECK(mean_integral(q, constant_function(2, 1.0), 0.37) == doctest::Approx(1.0).epsilon(1e-14));
  const double m_sin = mean_integral(q, coordinate(2, 1), 1.0);
  CHECK(std::abs(m_sin - 2.0 / M_PI) < 1e-10);
  const double m_cos = mean_integral(q, coordinate(2, 0), 1.0);
  CHECK(std::abs(m_cos) < 1e-12);
}

TEST_CASE("projection P fixes its range and is idempotent") {
  for (int n : {2, 3}) {
    const auto q = build_quadrature(n, 16);
    const auto ones = project_P(q, constant_function(n, 1.0), 1.0);
    for (int i = 0; i < q.size(); ++i)
      CHECK(ones.eval(q.nodes.row(i).transpose()) == doctest::Approx(1.0).epsilon(1e-12));

    for (int m = 0; m + 1 < n; ++m) {
      const auto pm = project_P(q, coordinate(n, m), 1.0);
      for (int i = 0; i < q.size(); ++i) {
        const Vec theta = q.nodes.row(i).transpose();
        CHECK(std::abs(pm.eval(theta) - theta(m)) < 1e-12);
      }
    }

    std::mt19937_64 rng(7 + n);
    const auto gpoly = random_polynomial(n, 4, rng);
    const auto g = as_spherical(gpoly);
    const auto pg = project_P(q, g, 1.0);
    const auto ppg = project_P(q, pg, 1.0);
    for (int i = 0; i < q.size(); ++i) {
      const Vec theta = q.nodes.row(i).transpose();
      CHECK(std::abs(ppg.eval(theta) - pg.eval(theta)) < 1e-10);
    }
  }
}

TEST_CASE("projection of cos^2 in n=2 is the constant 1/2") {
  const auto q = build_quadrature(2, 16);
  SphericalFunction g;
  g.dim = 2;
  g.eval = [](const Vec& x) {
    const double c = x(0) / x.norm();
    return c * c;
  };
  const auto pg = project_P(q, g, 1.0);
  for (int i = 0; i < q.size(); i += 3)
    CHECK(std::abs(pg.eval(q.nodes.row(i).transpose()) - 0.5) < 1e-10);
}

TEST_CASE("projection is linear") {
  const auto q = build_quadrature(3, 12);
  std::mt19937_64 rng(99);
  const auto ga = random_polynomial(3, 3, rng);
  const auto gb = random_polynomial(3, 3, rng);
  SphericalFunction combo;
  combo.dim = 3;
  combo.eval = [&](const Vec& x) { return 2.5 * ga.eval(x) - 1.25 * gb.eval(x); };
  const auto pc = project_P(q, combo, 1.0);
  const auto pa = project_P(q, as_spherical(ga), 1.0);
  const auto pb = project_P(q, as_spherical(gb), 1.0);
  for (int i = 0; i < q.size(); i += 7) {
    const Vec theta = q.nodes.row(i).transpose();
    CHECK(pc.eval(theta) ==
          doctest::Approx(2.5 * pa.eval(theta) - 1.25 * pb.eval(theta)).epsilon(1e-12));
  }
}

TEST_CASE("decompose recovers linear and constant fields") {
  const std::vector<double> radii = dyadic_radii(1.0, 6);

  for (int n : {2, 3}) {
    const auto q = build_quadrature(n, 16);
    const auto d = decompose(q, coordinate(n, 0), radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      CHECK(std::abs(d.u0(i)) < 1e-10);
      CHECK(std::abs(d.v(i, 0) - 1.0) < 1e-10);
      for (int k = 1; k + 1 < n; ++k) CHECK(std::abs(d.v(i, k)) < 1e-10);
    }
    for (double r : radii)
      for (int i = 0; i < q.size(); i += 5)
        CHECK(std::abs(d.w.eval(r * q.nodes.row(i).transpose())) < 1e-10);

    const auto dc = decompose(q, constant_function(n, 1.0), radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      CHECK(dc.u0(i) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(dc.v.row(i).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("decompose of x_2 in n=2 matches the analytic projections") {
  const auto q = build_quadrature(2, 16);
  const std::vector<double> radii = dyadic_radii(1.0, 5);
  const auto d = decompose(q, coordinate(2, 1), radii);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    CHECK(d.u0(i) == doctest::Approx(2.0 * radii[i] / M_PI).epsilon(1e-12));
    CHECK(std::abs(d.v(i, 0)) < 1e-12);
  }
  // Remainder has zero mean and zero first moment at every sampled radius.
  for (double r : radii) {
    const double mw = q.mean(d.w.eval, r);
    const double mw1 = q.mean([&](const Vec& x) { return d.w.eval(x) * x(0) / x.norm(); }, r);
    CHECK(std::abs(mw) < 1e-10);
    CHECK(std::abs(mw1) < 1e-10);
  }
}

TEST_CASE("decomposition reconstructs u at the nodes") {
  std::mt19937_64 rng(31);
  for (int n : {2, 3}) {
    const auto q = build_quadrature(n, 14);
    const auto poly = random_polynomial(n, 4, rng);
    const auto u = as_spherical(poly);
    const std::vector<double> radii = dyadic_radii(0.9, 4);
    const auto d = decompose(q, u, radii);
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double r = radii[j];
      for (int i = 0; i < q.size(); i += 3) {
        const Vec x = r * q.nodes.row(i).transpose();
        double rec = d.u0(j);
        for (int k = 0; k + 1 < n; ++k) rec += d.v(j, k) * x(k);
        rec += d.w.eval(x);
        CHECK(rec == doctest::Approx(u.eval(x)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("orthogonality residuals under and against the moment hypotheses") {
  const auto q = build_quadrature(2, 24);

  // Remainder of x_2: zero mean, so the radial residual must vanish.
  const auto d = decompose(q, coordinate(2, 1), {1.0});
  auto w = d.w;
  w.grad = {};  // exercise the finite-difference path
  const auto res = orthogonality_residuals(q, w, 1.0, 1e-3);
  CHECK(std::abs(res.radial) < 1e-6);

  // Constants: flat residual exactly zero.
  const auto rc = orthogonality_residuals(q, constant_function(2, 3.0), 1.0, 1e-3);
  CHECK(rc.flat_max == doctest::Approx(0.0));

  // x_1 violates the first-moment hypothesis: mean d_1 x_1 = 1.
  const auto rx = orthogonality_residuals(q, coordinate(2, 0), 1.0, 1e-3);
  CHECK(rx.flat_first == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("finite-difference step control flags instability") {
  const auto q = build_quadrature(2, 16);
  SphericalFunction f;
  f.dim = 2;
  // Smooth inside a shell around r = 1; a large jump only the full step
  // reaches, so halving the step changes the residuals drastically.
  f.eval = [](const Vec& x) { return x(0) + (x.norm() > 1.15 ? 50.0 : 0.0); };
  CHECK_THROWS_WITH_AS(orthogonality_residuals(q, f, 1.0, 0.2),
                       doctest::Contains("StepTooLarge"), Error);
}

TEST_CASE("energy inequality with the explicit constants") {
  std::mt19937_64 rng(4242);
  for (int n : {2, 3}) {
    const auto q = build_quadrature(n, 16);
    const double area = half_sphere_area(n);
    const double cv = 1.0 / n - std::pow(double(n), -4.0 / 3.0);
    const double cb = 1.0 - std::pow(double(n), -2.0 / 3.0);
    auto [rg, wg] = gauss_legendre_on(24, 1e-4, 1.0);

    for (int trial = 0; trial < 10; ++trial) {
      const auto poly = random_polynomial(n, 3, rng);
      const auto u = as_spherical(poly);

      double lhs = 0.0, rhs_radial = 0.0, grad_w_sq = 0.0;
      const double h = 1e-5;
      for (int ir = 0; ir < rg.size(); ++ir) {
        const double r = rg(ir);
        const double shell = wg(ir) * std::pow(r, n - 1.0) * area;

        const auto mean_at = [&](double rr) {
          Vec out = Vec::Zero(n);  // (u0, v_1..v_{n-1}) packed
          out(0) = q.mean(u.eval, rr);
          for (int k = 0; k + 1 < n; ++k)
            out(k + 1) = (n / rr) * q.mean([&](const Vec& x) { return u.eval(x) * x(k) / x.norm(); }, rr);
          return out;
        };
        const Vec mid = mean_at(r), up = mean_at(r + h), dn = mean_at(r - h);
        const double u0p = (up(0) - dn(0)) / (2.0 * h);
        const Vec v = mid.tail(n - 1);
        const Vec vp = (up.tail(n - 1) - dn.tail(n - 1)) / (2.0 * h);

        double mean_grad2 = 0.0, mean_gradw2 = 0.0;
        for (int i = 0; i < q.size(); ++i) {
          const Vec theta = q.nodes.row(i).transpose();
          const Vec g = u.grad(r * theta);
          mean_grad2 += q.weights(i) / area * g.squaredNorm();
          Vec gw = g - u0p * theta - (vp.dot(r * theta.head(n - 1))) * theta;
          gw.head(n - 1) -= v;
          mean_gradw2 += q.weights(i) / area * gw.squaredNorm();
        }
        lhs += shell * mean_grad2;
        grad_w_sq += shell * mean_gradw2;
        rhs_radial += shell * (u0p * u0p + cv * r * r * vp.squaredNorm() + cb * v.squaredNorm());
      }
      const double rhs = rhs_radial + grad_w_sq;
      CHECK(lhs >= rhs - 1e-7 * std::max(1.0, std::abs(lhs)));
      const double fitted_c = lhs / std::max(rhs, 1e-300);
      CHECK(fitted_c >= 1.0 - 1e-7);
    }
  }
}
