#include "core/reduction.hpp"

#include <cmath>

#include "core/numerics.hpp"

namespace neureg::reduction {

SphericalMoments moments(const CoefficientField& a, const HalfSphereQuadrature& q, double r) {
  const int n = a.dim;
  if (q.dim != n) fail(ErrKind::invalid_argument, "DimensionMismatch", "quadrature/field dimension");
  if (r <= 0.0) fail(ErrKind::invalid_argument, "InvalidRadius", "moments need r > 0");

  SphericalMoments m;
  m.r = r;
  m.alpha = 0.0;
  m.beta = Vec::Zero(n - 1);
  m.gamma = Vec::Zero(n - 1);
  m.A = Mat::Zero(n - 1, n - 1);
  m.B = Mat::Zero(n - 1, n - 1);
  m.C = Mat::Zero(n - 1, n - 1);

  for (int i = 0; i < q.size(); ++i) {
    const Vec theta = q.nodes.row(i).transpose();
    const Mat av = a.a(r * theta);
    if (!av.allFinite()) fail(ErrKind::evaluation, "EvaluationFailure", "coefficients not finite");
    const double w = q.weights(i) / q.area;
    const double quad = theta.dot(av * theta);  // a_ij theta_i theta_j
    const Vec atheta = av.transpose() * theta;  // (a_ij theta_i)_j
    m.alpha += w * quad;
    for (int k = 0; k < n - 1; ++k) {
      m.beta(k) += w * quad * theta(k);
      m.gamma(k) += w * atheta(k);
      for (int l = 0; l < n - 1; ++l) {
        m.A(l, k) += w * quad * theta(l) * theta(k);
        m.B(l, k) += w * av.row(l).dot(theta) * theta(k);
        m.C(l, k) += w * av(l, k);
      }
    }
  }
  return m;
}

namespace {

Mat R_halfspace_at(const CoefficientField& a, const HalfSphereQuadrature& q, double r) {
  const int n = a.dim;
  Mat R = Mat::Zero(n - 1, n - 1);
  for (int i = 0; i < q.size(); ++i) {
    const Vec theta = q.nodes.row(i).transpose();
    const Mat av = a.a(r * theta);
    const double w = q.weights(i) / q.area;
    for (int l = 0; l < n - 1; ++l) {
      const double row_theta = av.row(l).dot(theta);
      for (int k = 0; k < n - 1; ++k) R(l, k) += w * (av(l, k) - n * row_theta * theta(k));
    }
  }
  return R;
}

Mat R_curved_at(const CoefficientField& a, const BoundaryGraph& h, const HalfSphereQuadrature& q,
                double r) {
  const int n = a.dim;
  Mat R = Mat::Zero(n - 1, n - 1);
  Vec x(n);
  for (int i = 0; i < q.size(); ++i) {
    const Vec theta = q.nodes.row(i).transpose();
    const Vec yt = r * theta.head(n - 1);
    x.head(n - 1) = yt;
    x(n - 1) = r * theta(n - 1) + h.h(yt);
    const Mat av = a.a(x);
    const Vec gh = h.grad_h(yt);
    const double w = q.weights(i) / q.area;
    for (int l = 0; l < n - 1; ++l) {
      const double row_theta = av.row(l).dot(theta);
      const double row_gh = av.row(l).head(n - 1).dot(gh);
      for (int k = 0; k < n - 1; ++k)
        R(l, k) += w * (av(l, k) - n * row_theta * theta(k) + n * row_gh * theta(n - 1) * theta(k));
    }
  }
  return R;
}

}  // namespace

ReducedSystem compute_R_halfspace(const CoefficientField& a, const HalfSphereQuadrature& q,
                                  const std::vector<double>& r_grid) {
  ReducedSystem sys;
  sys.dim = a.dim;
  sys.provenance = Provenance::halfspace;
  CoefficientField ac = a;
  HalfSphereQuadrature qc = q;
  sys.R_of_r = [ac, qc](double r) { return R_halfspace_at(ac, qc, r); };
  sys.r_grid = r_grid;
  for (double r : r_grid) sys.R.push_back(sys.R_of_r(r));
  return sys;
}

ReducedSystem compute_R_curved(const CoefficientField& a, const BoundaryGraph& h,
                               const HalfSphereQuadrature& q, const std::vector<double>& r_grid) {
  if (a.dim != h.dim) fail(ErrKind::invalid_argument, "DimensionMismatch", "field/graph dimension");
  ReducedSystem sys;
  sys.dim = a.dim;
  sys.provenance = Provenance::curved;
  CoefficientField ac = a;
  BoundaryGraph hc = h;
  HalfSphereQuadrature qc = q;
  sys.R_of_r = [ac, hc, qc](double r) { return R_curved_at(ac, hc, qc, r); };
  sys.r_grid = r_grid;
  for (double r : r_grid) sys.R.push_back(sys.R_of_r(r));
  return sys;
}

double R_dim2_direct(const CoefficientField& a, double r, int phi_nodes) {
  if (a.dim != 2) fail(ErrKind::invalid_argument, "WrongDimension", "R_dim2_direct needs n = 2");
  auto [phi, w] = gauss_legendre_on(phi_nodes, 0.0, M_PI);
  double acc = 0.0;
  for (int i = 0; i < phi.size(); ++i) {
    const double cp = std::cos(phi(i)), sp = std::sin(phi(i));
    Vec x(2);
    x << r * cp, r * sp;
    const Mat av = a.a(x);
    acc += w(i) * (av(0, 0) - 2.0 * av(0, 0) * cp * cp - 2.0 * av(0, 1) * cp * sp);
  }
  return acc / M_PI;
}

Mat R_curved_identity(const BoundaryGraph& h, const HalfSphereQuadrature& q, double r) {
  const int n = h.dim;
  Mat R = Mat::Zero(n - 1, n - 1);
  for (int i = 0; i < q.size(); ++i) {
    const Vec theta = q.nodes.row(i).transpose();
    const Vec gh = h.grad_h(r * theta.head(n - 1));
    const double w = q.weights(i) / q.area;
    for (int l = 0; l < n - 1; ++l)
      for (int k = 0; k < n - 1; ++k) R(l, k) += w * n * gh(l) * theta(n - 1) * theta(k);
  }
  return R;
}

Mat S_of(const Mat& R) { return -0.5 * (R + R.transpose()); }

double mu_max(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  return es.eigenvalues().maxCoeff();
}

ReducedSystem& mu_of(ReducedSystem& sys) {
  sys.S.clear();
  sys.mu.clear();
  for (const Mat& R : sys.R) {
    sys.S.push_back(S_of(R));
    sys.mu.push_back(mu_max(sys.S.back()));
  }
  sys.mu_filled = true;
  return sys;
}

Mat M_infinity(int n) {
  const int k = n - 1;
  Mat M = Mat::Zero(2 * k, 2 * k);
  M.topLeftCorner(k, k) = -Mat::Identity(k, k);
  M.topRightCorner(k, k) = double(n) * Mat::Identity(k, k);
  M.bottomLeftCorner(k, k) = (double(n - 1) / n) * Mat::Identity(k, k);
  M.bottomRightCorner(k, k) = double(1 - n) * Mat::Identity(k, k);
  return M;
}

Mat J_matrix(int n) {
  const int k = n - 1;
  Mat J = Mat::Zero(2 * k, 2 * k);
  J.topLeftCorner(k, k) = double(n) * Mat::Identity(k, k);
  J.topRightCorner(k, k) = double(n) * Mat::Identity(k, k);
  J.bottomLeftCorner(k, k) = Mat::Identity(k, k);
  J.bottomRightCorner(k, k) = double(1 - n) * Mat::Identity(k, k);
  return J;
}

Mat J_inverse(int n) {
  const int k = n - 1;
  Mat Ji = Mat::Zero(2 * k, 2 * k);
  Ji.topLeftCorner(k, k) = (double(n - 1) / (n * double(n))) * Mat::Identity(k, k);
  Ji.topRightCorner(k, k) = (1.0 / n) * Mat::Identity(k, k);
  Ji.bottomLeftCorner(k, k) = (1.0 / (n * double(n))) * Mat::Identity(k, k);
  Ji.bottomRightCorner(k, k) = (-1.0 / n) * Mat::Identity(k, k);
  return Ji;
}

namespace {

struct ExactPieces {
  Mat M, S1, E;
};

ExactPieces exact_system_at(const CoefficientField& a, const HalfSphereQuadrature& q, double r,
                            int n) {
  const int k = n - 1;
  const SphericalMoments m = moments(a, q, r);

  const Vec a_sv = Eigen::JacobiSVD<Mat>(m.A).singularValues();
  if (a_sv(k - 1) <= 1e-12 * std::max(a_sv(0), 1.0))
    fail(ErrKind::numeric, "NonInvertibleA", "moment matrix A is numerically singular");
  const Mat Ainv = Eigen::PartialPivLU<Mat>(m.A).solve(Mat::Identity(k, k));

  const Mat AinvB = Ainv * m.B;
  const Mat BAinv = m.B * Ainv;
  const Vec Ainv_beta = Ainv * m.beta;

  // Mass matrix I + D from the alpha-rescaled beta/gamma couplings.
  Mat D = Mat::Zero(2 * k, 2 * k);
  D.topLeftCorner(k, k) = -(Ainv_beta * m.beta.transpose()) / m.alpha;
  D.bottomLeftCorner(k, k) =
      ((m.gamma - double(n) * m.beta - Ainv_beta) * m.beta.transpose()) / m.alpha;

  Mat E = Mat::Zero(2 * k, 2 * k);
  E.topLeftCorner(k, k) = -AinvB + (Ainv_beta * m.gamma.transpose()) / m.alpha;
  E.topRightCorner(k, k) = Ainv;
  E.bottomLeftCorner(k, k) =
      (m.C - BAinv * m.B) +
      ((double(n) * m.beta + Ainv_beta - m.gamma) * m.gamma.transpose()) / m.alpha;
  E.bottomRightCorner(k, k) = BAinv - double(n) * Mat::Identity(k, k);

  const Mat mass = Mat::Identity(2 * k, 2 * k) + D;
  const Vec m_sv = Eigen::JacobiSVD<Mat>(mass).singularValues();
  if (m_sv(2 * k - 1) <= 1e-12 * std::max(m_sv(0), 1.0))
    fail(ErrKind::numeric, "SingularMass",
         "(I + D) numerically singular; the oscillation scale is too large");

  ExactPieces out;
  out.E = E;
  out.M = Eigen::PartialPivLU<Mat>(mass).solve(E);
  out.S1 = Mat::Zero(2 * k, 2 * k);
  out.S1.topLeftCorner(k, k) = Mat::Identity(k, k) - AinvB;
  out.S1.topRightCorner(k, k) = Ainv - double(n) * Mat::Identity(k, k);
  out.S1.bottomLeftCorner(k, k) =
      m.C - BAinv * m.B + (double(1 - n) / n) * Mat::Identity(k, k);
  out.S1.bottomRightCorner(k, k) = BAinv - Mat::Identity(k, k);
  return out;
}

}  // namespace

AssembledSystem assemble_system(const CoefficientField& a, const HalfSphereQuadrature& q,
                                const std::vector<double>& t_grid, const EpsilonOfT& eps) {
  const int n = a.dim;
  const int k = n - 1;
  AssembledSystem sys;
  sys.dim = n;
  sys.t_grid = t_grid;
  sys.M_inf = M_infinity(n);
  sys.J = J_matrix(n);
  sys.J_inv = J_inverse(n);
  sys.eps = eps.eval;

  CoefficientField ac = a;
  HalfSphereQuadrature qc = q;
  const Mat Minf = sys.M_inf;
  const Mat J = sys.J, Jinv = sys.J_inv;
  sys.M_of_t = [ac, qc, n](double t) { return exact_system_at(ac, qc, std::exp(-t), n).M; };
  sys.S1_of_t = [ac, qc, n](double t) { return exact_system_at(ac, qc, std::exp(-t), n).S1; };
  sys.calR_of_t = [ac, qc, n, Minf, J, Jinv](double t) {
    return (Jinv * (exact_system_at(ac, qc, std::exp(-t), n).M - Minf) * J).eval();
  };
  sys.R_of_t = [ac, qc, n, k](double t) {
    const SphericalMoments m = moments(ac, qc, std::exp(-t));
    return (m.C - double(n) * m.B).eval();
  };

  for (double t : t_grid) {
    const double r = std::exp(-t);
    const ExactPieces p = exact_system_at(a, q, r, n);
    const SphericalMoments m = moments(a, q, r);
    const Mat R = m.C - double(n) * m.B;
    const Mat S2 = p.M - sys.M_inf - p.S1;
    const Mat calR = sys.J_inv * (p.M - sys.M_inf) * sys.J;
    const Mat R1 = calR.topLeftCorner(k, k);

    AssembledSample s;
    s.t = t;
    s.r = r;
    s.mu = mu_max(S_of(R));
    s.R_norm = op_norm(R);
    s.S1_norm = op_norm(p.S1);
    s.S2_norm = op_norm(S2);
    s.eps = eps.eval(t);
    sys.samples.push_back(s);

    // eps^2 remainder constants, fitted where eps is resolvable.
    if (s.eps > 1e-7) {
      sys.c_S2 = std::max(sys.c_S2, s.S2_norm / sq(s.eps));
      sys.c_R1 = std::max(sys.c_R1, op_norm(R1 - R) / sq(s.eps));
    }
  }
  return sys;
}

}  // namespace neureg::reduction
