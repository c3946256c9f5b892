#include "core/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "core/numerics.hpp"

using namespace neureg;
using namespace neureg::stability;
using reduction::ReducedSystem;

namespace {

ReducedSystem scalar_system(std::function<double(double)> R_of_r) {
  ReducedSystem sys;
  sys.dim = 2;
  sys.R_of_r = [R_of_r](double r) { return Mat::Constant(1, 1, R_of_r(r)); };
  return sys;
}

ReducedSystem gs_system(const coefficients::RadialProfile& g) {
  return scalar_system([g](double r) { return -0.5 * g.value(r); });
}

ForcedSystem trivial_forced(int k, double n, double eps_value) {
  ForcedSystem f;
  f.k = k;
  f.n = n;
  f.calR = [k](double) { return Mat::Zero(2 * k, 2 * k); };
  f.eps = [eps_value](double) { return eps_value; };
  return f;
}

ForcingSpec zero_forcing(int k) {
  ForcingSpec g;
  g.g1 = [k](double) { return Vec::Zero(k); };
  g.g2 = [k](double) { return Vec::Zero(k); };
  return g;
}

}  // namespace

TEST_CASE("fundamental matrix of the zero system is the identity") {
  auto sys = scalar_system([](double) { return 0.0; });
  const auto traj = fundamental_matrix(sys, 30.0, 1e-10);
  CHECK(traj.K_stat == doctest::Approx(1.0));
  for (std::size_t i = 0; i < traj.Phi.size(); i += 100)
    CHECK(traj.Phi[i](0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant-coefficient scalar growth matches the closed form") {
  // g = 0.2 so R = -0.1 and Phi(t) = e^{0.1 t}.
  auto sys = scalar_system([](double) { return -0.1; });
  const auto traj = fundamental_matrix(sys, 12.0, 1e-10);
  CHECK(traj.at(10.0)(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
}

TEST_CASE("slow log-power growth matches the analytic antiderivative") {
  // R(e^{-t}) = -(1/2)(1+t)^{-3/4}; the antiderivative gives
  // Phi(t) = exp(2((1+t)^{1/4} - 1)), so Phi(15) = e^2.
  auto sys = scalar_system([](double r) { return -0.5 * std::pow(1.0 - std::log(r), -0.75); });
  const auto traj = fundamental_matrix(sys, 15.0, 1e-11);
  CHECK(traj.at(15.0)(0, 0) == doctest::Approx(std::exp(2.0)).epsilon(1e-6));
}

TEST_CASE("Liouville determinant identity on a matrix system") {
  ReducedSystem sys;
  sys.dim = 3;
  sys.R_of_r = [](double r) {
    const double g = 0.3 * std::pow(1.0 - std::log(r), -1.0);
    Mat R(2, 2);
    R << 0.5 * g, g, -g / 3.0, 0.25 * g;
    return R;
  };
  const double T = 25.0;
  const auto traj = fundamental_matrix(sys, T, 1e-11);
  const double int_tr = integrate_adaptive(
      [&](double t) { return sys.R_of_r(std::exp(-t)).trace(); }, 0.0, T, 1e-12);
  const double det = traj.Phi.back().determinant();
  CHECK(det == doctest::Approx(std::exp(-int_tr)).epsilon(1e-6));
}

TEST_CASE("cocycle property under restart") {
  ReducedSystem sys;
  sys.dim = 3;
  sys.R_of_r = [](double r) {
    const double g = 0.2 * std::pow(1.0 - std::log(r), -0.8);
    Mat R(2, 2);
    R << g, 0.5 * g, -0.25 * g, 0.75 * g;
    return R;
  };
  const double s = 7.0, T = 18.0;
  const auto traj = fundamental_matrix(sys, T, 1e-11);

  ReducedSystem shifted;
  shifted.dim = 3;
  auto base = sys.R_of_r;
  shifted.R_of_r = [base, s](double r) { return base(r * std::exp(-s)); };
  const auto tail = fundamental_matrix(shifted, T - s, 1e-11);

  const Mat lhs = traj.at(T);
  const Mat rhs = tail.at(T - s) * traj.at(s);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10 * 10.0 * std::max(1.0, op_norm(lhs)));
}

TEST_CASE("uniform stability verdicts across the built-in families") {
  SUBCASE("zero") {
    auto sys = scalar_system([](double) { return 0.0; });
    const auto traj = fundamental_matrix(sys, 40.0, 1e-10);
    CHECK(uniform_stability(traj, 1e6, 0.01) == StabilityVerdict::uniformly_stable);
    CHECK(traj.K_stat == doctest::Approx(1.0));
  }
  SUBCASE("divergent log-power") {
    auto sys = gs_system(coefficients::logpow_profile(1.0, 0.75, 1));
    const auto traj = fundamental_matrix(sys, 40.0, 1e-10);
    CHECK(uniform_stability(traj, 1e6, 0.01) == StabilityVerdict::not_uniformly_stable);
  }
  SUBCASE("integrable power") {
    auto sys = gs_system(coefficients::power_profile(1.0, 0.5));
    const auto traj = fundamental_matrix(sys, 40.0, 1e-10);
    CHECK(uniform_stability(traj, 1e6, 0.01) == StabilityVerdict::uniformly_stable);
  }
}

TEST_CASE("asymptotic constancy verdicts and the limit value") {
  SUBCASE("zero system is constant") {
    auto sys = scalar_system([](double) { return 0.0; });
    const auto traj = fundamental_matrix(sys, 40.0, 1e-10);
    CHECK(asymptotically_constant(traj, 0.02) == AsymptoticVerdict::asymptotically_constant);
  }
  SUBCASE("convergent integral, explicit limit") {
    // g = r^{1/2}: Phi(inf) = exp(+1/2 int_0^inf e^{-tau/2} dtau) = e.
    auto sys = gs_system(coefficients::power_profile(1.0, 0.5));
    const auto traj = fundamental_matrix(sys, 40.0, 1e-11);
    CHECK(asymptotically_constant(traj, 0.02) == AsymptoticVerdict::asymptotically_constant);
    CHECK(traj.Phi.back()(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
  }
  SUBCASE("borderline square-root drift") {
    // g = (1-log r)^{-1} gives Phi(t) = (1+t)^{1/2}: sustained drift.
    auto sys = gs_system(coefficients::logpow_profile(1.0, 1.0, 1));
    const auto traj = fundamental_matrix(sys, 40.0, 1e-10);
    CHECK(asymptotically_constant(traj, 0.02) == AsymptoticVerdict::not_asymptotically_constant);
  }
}

TEST_CASE("mu criteria on the scalar families") {
  const double eps_low = std::exp(-40.0);
  SUBCASE("zero") {
    auto sys = scalar_system([](double) { return 0.0; });
    const auto mu = mu_criteria(sys, eps_low);
    CHECK(mu.cond1 == TriState::yes);
    CHECK(mu.cond2 == TriState::no);
  }
  SUBCASE("positive divergent mu") {
    auto sys = gs_system(coefficients::logpow_profile(1.0, 0.75, 1));
    const auto mu = mu_criteria(sys, eps_low);
    CHECK(mu.cond1 == TriState::no);
  }
  SUBCASE("negative mu fires condition 2") {
    auto sys = gs_system(coefficients::logpow_profile(1.0, 0.75, -1));
    const auto mu = mu_criteria(sys, eps_low);
    CHECK(mu.cond1 == TriState::yes);
    CHECK(mu.cond2 == TriState::yes);
  }
  SUBCASE("shallow grids are rejected") {
    auto sys = scalar_system([](double) { return 0.0; });
    CHECK_THROWS_WITH_AS(mu_criteria(sys, std::exp(-5.0)), doctest::Contains("GridTooShallow"),
                         Error);
  }
}

TEST_CASE("scalar 2D criteria") {
  const double eps_low = std::exp(-40.0);
  SUBCASE("zero") {
    auto sys = scalar_system([](double) { return 0.0; });
    const auto sc = scalar_criteria_2d(sys, eps_low);
    CHECK(sc.lipschitz == TriState::yes);
    CHECK(sc.differentiable == TriState::yes);
  }
  SUBCASE("counterexample family") {
    auto sys = gs_system(coefficients::logpow_profile(1.0, 0.75, 1));
    const auto sc = scalar_criteria_2d(sys, eps_low);
    CHECK(sc.lipschitz == TriState::no);
  }
  SUBCASE("integrable power") {
    auto sys = gs_system(coefficients::power_profile(1.0, 0.5));
    const auto sc = scalar_criteria_2d(sys, eps_low);
    CHECK(sc.lipschitz == TriState::yes);
    CHECK(sc.differentiable == TriState::yes);
  }
}

TEST_CASE("classification pipeline end to end") {
  StabilityConfig cfg;
  SUBCASE("identity coefficients are differentiable") {
    const auto q = geometry::build_quadrature(3, 12);
    const auto v = classify(coefficients::identity_field(3), nullptr, q, cfg);
    CHECK(v.regularity == Regularity::differentiable);
    CHECK(v.stability == StabilityVerdict::uniformly_stable);
    CHECK(!v.gradient_claim);
  }
  SUBCASE("GS counterexample yields no guarantee") {
    const auto q = geometry::build_quadrature(2, 16);
    const auto f = coefficients::gs_field(2, coefficients::logpow_profile(1.0, 0.75, 1));
    const auto v = classify(f, nullptr, q, cfg);
    CHECK(v.regularity == Regularity::no_guarantee);
    CHECK(v.stability == StabilityVerdict::not_uniformly_stable);
    CHECK(v.scalar2d);
    CHECK(v.scalar2d->lipschitz == TriState::no);
  }
  SUBCASE("negative log-power gives the zero-gradient differentiability") {
    const auto q = geometry::build_quadrature(2, 16);
    const auto f = coefficients::gs_field(2, coefficients::logpow_profile(1.0, 0.75, -1));
    const auto v = classify(f, nullptr, q, cfg);
    CHECK(v.regularity == Regularity::differentiable);
    REQUIRE(v.gradient_claim);
    CHECK(*v.gradient_claim == "all derivatives zero");
  }
  SUBCASE("curved parabola over the Laplacian is differentiable") {
    const auto q = geometry::build_quadrature(2, 16);
    const auto h = coefficients::boundary_graph(2, coefficients::power_profile(1.0, 2.0));
    const auto v = classify(coefficients::identity_field(2), &h, q, cfg);
    CHECK(v.regularity == Regularity::differentiable);
    CHECK(!v.gradient_claim);  // mu integral stays finite here
  }
}

TEST_CASE("verdicts never flip directly under horizon extension") {
  using VPair = std::pair<StabilityVerdict, AsymptoticVerdict>;
  StabilityConfig cfg;
  const std::vector<coefficients::RadialProfile> family = {
      coefficients::zero_profile(),
      coefficients::logpow_profile(1.0, 0.75, 1),
      coefficients::logpow_profile(1.0, 0.75, -1),
      coefficients::logpow_profile(1.0, 1.0, 1),
      coefficients::power_profile(1.0, 0.5),
      coefficients::sinlog_profile(0.5, 0.75),
  };
  for (const auto& g : family) {
    std::vector<VPair> history;
    for (double T : {15.0, 25.0, 40.0}) {
      auto sys = gs_system(g);
      const auto traj = fundamental_matrix(sys, T, 1e-10);
      history.push_back({uniform_stability(traj, cfg.K_threshold, cfg.growth_margin),
                         asymptotically_constant(traj, cfg.drift_margin)});
    }
    for (std::size_t i = 1; i < history.size(); ++i) {
      const bool flip_stab =
          (history[i - 1].first == StabilityVerdict::uniformly_stable &&
           history[i].first == StabilityVerdict::not_uniformly_stable) ||
          (history[i - 1].first == StabilityVerdict::not_uniformly_stable &&
           history[i].first == StabilityVerdict::uniformly_stable);
      CHECK(!flip_stab);
    }
  }
}

TEST_CASE("scalar criteria corroborate the trajectory verdict on built-ins") {
  StabilityConfig cfg;
  const auto q = geometry::build_quadrature(2, 16);
  const std::vector<coefficients::RadialProfile> family = {
      coefficients::logpow_profile(1.0, 0.75, 1),
      coefficients::logpow_profile(0.5, 1.0, -1),
      coefficients::power_profile(0.8, 0.5),
      coefficients::sinlog_profile(0.4, 0.75),
  };
  for (const auto& g : family) {
    auto sys = gs_system(g);
    const auto traj = fundamental_matrix(sys, cfg.t_max, cfg.ode_tol);
    const auto stab = uniform_stability(traj, cfg.K_threshold, cfg.growth_margin);
    const auto sc = scalar_criteria_2d(sys, std::exp(-cfg.t_max), cfg.growth_margin);
    if (stab == StabilityVerdict::uniformly_stable) CHECK(sc.lipschitz != TriState::no);
    if (stab == StabilityVerdict::not_uniformly_stable) CHECK(sc.lipschitz != TriState::yes);
  }
}

TEST_CASE("forced system: explicit solution when everything vanishes") {
  const auto sys = trivial_forced(1, 2.0, 1e-3);
  Vec phi0 = Vec::Constant(1, 1.0);
  Vec psi0 = Vec::Constant(1, 0.3);
  const auto st = integrate_forced(sys, zero_forcing(1), phi0, psi0, 10.0, 1e-10);
  for (std::size_t i = 0; i < st.t_grid.size(); i += 37) {
    CHECK(st.phi[i](0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(st.psi[i](0) ==
          doctest::Approx(0.3 * std::exp(2.0 * st.t_grid[i])).epsilon(1e-6));
  }
  // The finite-energy branch of the same data selects psi = 0.
  const auto fe = integrate_forced(sys, zero_forcing(1), phi0, std::nullopt, 10.0, 1e-10);
  for (std::size_t i = 0; i < fe.t_grid.size(); i += 53) {
    CHECK(fe.phi[i](0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(fe.psi[i](0)) < 1e-12);
  }
}

TEST_CASE("forced system on a GS-derived block matrix satisfies the bounds") {
  const auto q = geometry::build_quadrature(2, 16);
  const auto f = coefficients::gs_field(2, coefficients::logpow_profile(0.05, 1.0, 1));
  const auto eps = coefficients::epsilon_of_t(f.modulus);
  const auto asys = reduction::assemble_system(f, q, linspace(0.0, 30.0, 60), eps);
  const auto fsys = forced_from_assembled(asys);

  ForcingSpec g;
  g.g1 = [](double t) { return (Vec(1) << std::exp(-t)).finished(); };
  g.g2 = [](double) { return Vec::Zero(1); };
  const Vec phi0 = Vec::Constant(1, 0.7);
  const auto st = integrate_forced(fsys, g, phi0, std::nullopt, 30.0, 1e-10);
  CHECK(st.finite_energy_selected);
  CHECK(std::isfinite(st.sup_phi));
  CHECK(st.g1_l1 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(st.fitted_c_phi < 20.0);
  CHECK(st.fitted_c_psi < 100.0);
}

TEST_CASE("alpha-weighted tail of a slowly decaying g2") {
  const auto sys = [&] {
    ForcedSystem s = trivial_forced(1, 2.0, 1.0);
    s.eps = [](double t) { return 1.0 / (1.0 + t); };
    return s;
  }();
  ForcingSpec g;
  g.g1 = [](double) { return Vec::Zero(1); };
  g.g2 = [](double t) { return (Vec(1) << 1.0 / (1.0 + t)).finished(); };
  const auto st = integrate_forced(sys, g, Vec::Zero(1), std::nullopt, 30.0, 1e-10, 0.5);
  // c_alpha <= 1/alpha for g2 = eps with this weight (alpha = n - 1/2 = 1.5).
  CHECK(st.c_alpha <= 1.0 / 1.5 + 0.05);
  CHECK(st.fitted_c_psi < 100.0);
}

TEST_CASE("forced response scales linearly with the forcing") {
  const auto q = geometry::build_quadrature(2, 16);
  const auto f = coefficients::gs_field(2, coefficients::logpow_profile(0.1, 1.0, 1));
  const auto eps = coefficients::epsilon_of_t(f.modulus);
  const auto asys = reduction::assemble_system(f, q, linspace(0.0, 20.0, 40), eps);
  const auto fsys = forced_from_assembled(asys);
  double sup1 = 0.0;
  for (double s : {1.0, 2.0, 4.0}) {
    ForcingSpec g;
    g.g1 = [s](double t) { return (Vec(1) << s * std::exp(-0.8 * t)).finished(); };
    g.g2 = [s](double t) { return (Vec(1) << 0.3 * s * std::exp(-t)).finished(); };
    const auto st = integrate_forced(fsys, g, Vec::Zero(1), std::nullopt, 20.0, 1e-10);
    if (s == 1.0)
      sup1 = st.sup_phi;
    else
      CHECK(st.sup_phi == doctest::Approx(s * sup1).epsilon(1e-8));
  }
}

TEST_CASE("non-integrable forcing is rejected") {
  const auto sys = trivial_forced(1, 2.0, 0.1);
  ForcingSpec g;
  g.g1 = [](double t) { return (Vec(1) << 1.0e7 * (1.0 + t)).finished(); };
  g.g2 = [](double) { return Vec::Zero(1); };
  CHECK_THROWS_WITH_AS(integrate_forced(sys, g, Vec::Zero(1), std::nullopt, 40.0, 1e-10),
                       doctest::Contains("ForcingRejected"), Error);
}
