#include "core/coefficients.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "core/numerics.hpp"

using namespace neureg;
using namespace neureg::coefficients;

TEST_CASE("square-Dini certification on the closed-form families") {
  // omega = r^{1/2}: integral of omega^2/r over (0,1) is exactly 1.
  const auto m = certify_modulus([](double r) { return std::sqrt(std::min(r, 1.0)); }, 0.25);
  CHECK(m.certified);
  CHECK(m.delta == doctest::Approx(1.0));
  CHECK(std::abs(m.sq_dini_integral - 1.0) < 1e-8);

  // omega = (1 - log r)^{-1}: substitution s = 1 - log r gives 1 as well.
  const auto ml = logpow_profile(1.0, 1.0, 1).envelope_modulus();
  CHECK(ml.certified);
  CHECK(std::abs(ml.sq_dini_integral - 1.0) < 1e-6);

  // omega = (1 - log r)^{-1/2} diverges (harmonic tail).
  CHECK_THROWS_WITH_AS(logpow_profile(1.0, 0.5, 1).envelope_modulus(),
                       doctest::Contains("NotSquareDini"), Error);
}

TEST_CASE("certification rejects non-monotone and fast-vanishing moduli") {
  CHECK_THROWS_WITH_AS(certify_modulus([](double r) { return 1.0 - 0.5 * std::min(r, 1.0); }, 0.25),
                       doctest::Contains("NotMonotone"), Error);
  // omega = r^{1/2} with kappa = 0.75 makes omega r^{kappa-1} = r^{1/4} increase.
  CHECK_THROWS_WITH_AS(certify_modulus([](double r) { return std::sqrt(std::min(r, 1.0)); }, 0.75),
                       doctest::Contains("VanishingConditionFailed"), Error);
}

TEST_CASE("certification is monotone in kappa") {
  auto omega = [](double r) { return std::sqrt(std::min(r, 1.0)); };
  for (double kappa : {0.5, 0.3, 0.1}) CHECK(certify_modulus(omega, kappa).certified);
}

TEST_CASE("epsilon of t agrees with the substitution and the integral identity") {
  const auto m = certify_modulus([](double r) { return std::sqrt(std::min(r, 1.0)); }, 0.25);
  const auto eps = epsilon_of_t(m);
  CHECK(eps.eval(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  for (double t : {0.0, 0.5, 3.0, 11.0})
    CHECK(eps.eval(t) == doctest::Approx(m.omega(std::exp(-t))).epsilon(1e-12));
  // int_0^inf eps^2 dt = int_0^1 omega^2 / r dr (= 1 here, both ways).
  CHECK(std::abs(eps.integral - 1.0) < 1e-8);

  const auto ml = logpow_profile(1.0, 1.0, 1).envelope_modulus();
  CHECK(epsilon_of_t(ml).eval(0.0) == doctest::Approx(1.0));
  // eps is nonincreasing for t >= 0.
  double prev = 1e300;
  for (double t = 0.0; t < 60.0; t += 0.7) {
    CHECK(ml.eps(t) <= prev + 1e-15);
    prev = ml.eps(t);
  }
}

TEST_CASE("identity field validates with unit ellipticity") {
  const auto q = geometry::build_quadrature(3, 12);
  auto f = validate_field(identity_field(3), q, dyadic_radii(1.0, 20));
  CHECK(f.lambda == doctest::Approx(1.0));
  CHECK(f.Lambda == doctest::Approx(1.0));
}

TEST_CASE("GS field certifies against its envelope and fails a tighter one") {
  const auto q = geometry::build_quadrature(2, 16);
  const auto grid = dyadic_radii(1.0, 20);
  const auto g = logpow_profile(0.1, 1.0, 1);

  auto ok = validate_field(gs_field(2, g), q, grid);
  CHECK(ok.validated);
  CHECK(ok.lambda > 0.9);

  const auto tight = logpow_profile(0.08, 1.0, 1).envelope_modulus();
  CHECK_THROWS_WITH_AS(validate_field(gs_field(2, g, tight), q, grid),
                       doctest::Contains("OscillationViolation"), Error);
}

TEST_CASE("validation flags non-normalized and non-elliptic fields") {
  const auto q = geometry::build_quadrature(2, 16);
  const auto grid = dyadic_radii(1.0, 10);

  CoefficientField bad;
  bad.dim = 2;
  bad.a = [](const Vec&) {
    Mat a = Mat::Identity(2, 2);
    a(0, 0) = 2.0;
    return a;
  };
  bad.modulus = logpow_profile(2.0, 1.0, 1).envelope_modulus();
  CHECK_THROWS_WITH_AS(validate_field(bad, q, grid), doctest::Contains("NotNormalized"), Error);

  const auto neg = logpow_profile(1.2, 0.6, -1);
  CHECK_THROWS_WITH_AS(validate_field(gs_field(2, neg), q, grid),
                       doctest::Contains("EllipticityViolation"), Error);
}

TEST_CASE("flatten with a trivial graph reproduces the field") {
  const auto a = gs_field(3, logpow_profile(0.1, 1.0, 1));
  const auto h = boundary_graph(3, zero_profile());
  const auto flat = flatten(a, h);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.05, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    Vec y(3);
    y << unif(rng) - 0.4, unif(rng) - 0.4, unif(rng);
    CHECK((flat.a(y) - a.a(y)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("flatten matches the hand change of variables for h = x^2") {
  const auto a = identity_field(2);
  const auto h = boundary_graph(2, power_profile(1.0, 2.0));
  const auto flat = flatten(a, h);
  Vec y(2);
  y << 0.1, 0.3;
  const Mat at = flat.a(y);
  CHECK(at(0, 1) == doctest::Approx(-0.2).epsilon(1e-13));
  CHECK(at(1, 0) == doctest::Approx(-0.2).epsilon(1e-13));
  CHECK(at(1, 1) == doctest::Approx(1.04).epsilon(1e-13));
  CHECK(at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("flatten of the identity deviates only in the last row and column") {
  const auto a = identity_field(3);
  const auto h = boundary_graph(3, power_profile(0.5, 2.0));
  const auto flat = flatten(a, h);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    Vec y(3);
    y << unif(rng), unif(rng), std::abs(unif(rng));
    const Mat at = flat.a(y);
    const Vec gh = h.grad_h(y.head(2));
    CHECK((at.topLeftCorner(2, 2) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < 2; ++i) {
      CHECK(at(i, 2) == doctest::Approx(-gh(i)).epsilon(1e-12));
      CHECK(at(2, i) == doctest::Approx(-gh(i)).epsilon(1e-12));
    }
    CHECK(at(2, 2) == doctest::Approx(1.0 + gh.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("flattened elliptic fields stay elliptic") {
  const auto q = geometry::build_quadrature(2, 16);
  auto a = validate_field(gs_field(2, logpow_profile(0.3, 1.0, 1)), q, dyadic_radii(1.0, 16));
  const auto h = boundary_graph(2, power_profile(0.8, 1.5));
  const auto flat = flatten(a, h);
  for (double r : dyadic_radii(1.0, 16)) {
    for (int i = 0; i < q.size(); i += 3) {
      const Mat at = flat.a(r * q.nodes.row(i).transpose());
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (at + at.transpose()));
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("boundary graph validation bounds the gradient by the modulus") {
  const auto q = geometry::build_quadrature(2, 16);
  auto h = boundary_graph(2, power_profile(1.0, 2.0));
  CHECK_NOTHROW(validate_graph(h, q, dyadic_radii(1.0, 16)));

  // A modulus deliberately below |h'| must be rejected.
  auto tight = boundary_graph(2, power_profile(1.0, 2.0),
                              power_profile(1.0, 1.0).envelope_modulus());
  CHECK_THROWS_WITH_AS(validate_graph(tight, q, dyadic_radii(1.0, 16)),
                       doctest::Contains("OscillationViolation"), Error);
}
