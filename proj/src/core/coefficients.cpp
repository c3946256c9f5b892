#include "core/coefficients.hpp"

#include <cmath>

namespace neureg::coefficients {

CoefficientField identity_field(int n) {
  CoefficientField f;
  f.dim = n;
  f.a = [n](const Vec&) { return Mat::Identity(n, n); };
  f.modulus = zero_profile().envelope_modulus();
  f.lambda = f.Lambda = 1.0;
  f.normalized = true;
  f.compactified = true;
  f.validated = true;
  f.describe = "identity";
  return f;
}

CoefficientField gs_field(int n, const RadialProfile& g, std::optional<Modulus> omega,
                          bool compactified) {
  CoefficientField f;
  f.dim = n;
  f.compactified = compactified;
  f.a = [n, g, compactified](const Vec& x) {
    const double r = x.norm();
    Mat a = Mat::Identity(n, n);
    if (r == 0.0) return a;
    if (compactified && r >= 1.0) return a;
    const Vec theta = x / r;
    a += g.value(r) * theta * theta.transpose();
    return a;
  };
  f.modulus = omega ? *omega : g.envelope_modulus();
  f.describe = "gs(" + g.describe() + ")";
  return f;
}

BoundaryGraph boundary_graph(int n, const RadialProfile& p, std::optional<Modulus> omega) {
  BoundaryGraph b;
  b.dim = n;
  b.h = [p](const Vec& xt) {
    const double rho = xt.norm();
    return rho == 0.0 ? 0.0 : p.value(rho);
  };
  b.grad_h = [p, n](const Vec& xt) {
    const double rho = xt.norm();
    if (rho == 0.0) return Vec::Zero(n - 1).eval();
    return (p.deriv(rho) / rho * xt).eval();
  };
  if (omega) {
    b.modulus = *omega;
  } else {
    // |grad h| = |p'(rho)|; bound it by the envelope of the derivative profile.
    if (p.family == "power") {
      b.modulus = power_profile(std::abs(p.c) * p.gamma * 1.0000001, p.gamma - 1.0).envelope_modulus();
    } else if (p.family == "zero") {
      b.modulus = zero_profile().envelope_modulus();
    } else {
      fail(ErrKind::invalid_argument, "InvalidParams",
           "boundary profile " + p.family + " needs an explicit modulus for grad h");
    }
  }
  b.describe = "graph(" + p.describe() + ")";
  return b;
}

CoefficientField validate_field(CoefficientField field, const geometry::HalfSphereQuadrature& q,
                                const std::vector<double>& r_grid) {
  const int n = field.dim;
  if (q.dim != n) fail(ErrKind::invalid_argument, "DimensionMismatch", "quadrature/field dimension");

  const Mat a0 = field.a(Vec::Zero(n));
  if ((a0 - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrKind::hypothesis, "NotNormalized", "a(0) != I");

  double lam = std::numeric_limits<double>::infinity();
  double Lam = 0.0;
  double worst_excess = 0.0, worst_r = 0.0;
  int worst_node = -1;
  for (double r : r_grid) {
    const double w = field.modulus.omega(r);
    for (int i = 0; i < q.size(); ++i) {
      const Vec x = r * q.nodes.row(i).transpose();
      const Mat a = field.a(x);
      if (!a.allFinite())
        fail(ErrKind::evaluation, "EvaluationFailure", "coefficients not finite");
      const double dev = (a - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
      if (dev > w + 1e-12 && dev - w > worst_excess) {
        worst_excess = dev - w;
        worst_r = r;
        worst_node = i;
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
      lam = std::min(lam, es.eigenvalues().minCoeff());
      Lam = std::max(Lam, es.eigenvalues().maxCoeff());
    }
  }
  if (worst_node >= 0)
    fail(ErrKind::hypothesis, "OscillationViolation",
         "sup |a - I| exceeds omega by " + std::to_string(worst_excess) + " at r = " +
             std::to_string(worst_r) + ", node " + std::to_string(worst_node));
  if (!(lam > 0.0))
    fail(ErrKind::hypothesis, "EllipticityViolation",
         "nonpositive Rayleigh quotient, lambda = " + std::to_string(lam));
  field.lambda = lam;
  field.Lambda = Lam;
  field.normalized = true;
  field.validated = true;
  return field;
}

BoundaryGraph validate_graph(BoundaryGraph graph, const geometry::HalfSphereQuadrature& q,
                             const std::vector<double>& r_grid) {
  const int n = graph.dim;
  if (q.dim != n) fail(ErrKind::invalid_argument, "DimensionMismatch", "quadrature/graph dimension");
  const Vec zero = Vec::Zero(n - 1);
  if (std::abs(graph.h(zero)) > 1e-14)
    fail(ErrKind::hypothesis, "NotNormalized", "h(0) != 0");
  if (graph.grad_h(zero).norm() > 1e-12)
    fail(ErrKind::hypothesis, "NotNormalized", "grad h(0) != 0");
  for (double r : r_grid) {
    const double w = graph.modulus.omega(r);
    for (int i = 0; i < q.size(); ++i) {
      const Vec xt = r * q.nodes.row(i).head(n - 1).transpose();
      const double gh = graph.grad_h(xt).norm();
      if (gh > w + 1e-12)
        fail(ErrKind::hypothesis, "OscillationViolation",
             "|grad h| = " + std::to_string(gh) + " exceeds omega(r) = " + std::to_string(w) +
                 " at r = " + std::to_string(r));
    }
  }
  graph.validated = true;
  return graph;
}

CoefficientField flatten(const CoefficientField& a, const BoundaryGraph& h) {
  const int n = a.dim;
  if (h.dim != n) fail(ErrKind::invalid_argument, "DimensionMismatch", "field/graph dimension");

  auto aeval = a.a;
  auto heval = h.h;
  auto geval = h.grad_h;
  CoefficientField out;
  out.dim = n;
  out.a = [n, aeval, heval, geval](const Vec& y) {
    Vec x(n);
    const Vec yt = y.head(n - 1);
    x.head(n - 1) = yt;
    x(n - 1) = y(n - 1) + heval(yt);
    const Mat A = aeval(x);
    const Vec G = geval(yt);
    Mat At = A;
    for (int i = 0; i < n - 1; ++i) {
      double s = 0.0;
      for (int j = 0; j < n - 1; ++j) s += A(i, j) * G(j);
      At(i, n - 1) = A(i, n - 1) - s;
    }
    for (int j = 0; j < n - 1; ++j) {
      double s = 0.0;
      for (int i = 0; i < n - 1; ++i) s += A(i, j) * G(i);
      At(n - 1, j) = A(n - 1, j) - s;
    }
    double s = A(n - 1, n - 1);
    for (int i = 0; i < n - 1; ++i) s -= A(i, n - 1) * G(i);
    for (int j = 0; j < n - 1; ++j) s -= A(n - 1, j) * G(j);
    for (int i = 0; i < n - 1; ++i)
      for (int j = 0; j < n - 1; ++j) s += A(i, j) * G(i) * G(j);
    At(n - 1, n - 1) = s;
    return At;
  };

  const double big_lambda = a.validated ? a.Lambda : 1.0 + a.modulus.delta;
  const double cfac = 1.0 + big_lambda;
  auto oma = a.modulus.omega;
  auto omh = h.modulus.omega;
  auto epa = a.modulus.eps;
  auto eph = h.modulus.eps;
  auto om = [cfac, oma, omh](double r) { return cfac * (oma(r) + omh(r)); };
  auto ep = [cfac, epa, eph](double t) { return cfac * (epa(t) + eph(t)); };
  out.modulus = certify_modulus(om, ep, std::min(a.modulus.kappa, h.modulus.kappa));
  out.describe = "flatten(" + a.describe + ", " + h.describe + ")";
  return out;
}

}  // namespace neureg::coefficients
