#include "core/stability.hpp"

#include <algorithm>
#include <cmath>

#include "core/numerics.hpp"

namespace neureg::stability {

namespace {

constexpr double kLn10 = 2.302585092994046;

std::vector<int> sample_indices(int grid_size, int target) {
  std::vector<int> idx;
  const int stride = std::max(1, grid_size / target);
  for (int i = 0; i < grid_size; i += stride) idx.push_back(i);
  if (idx.back() != grid_size - 1) idx.push_back(grid_size - 1);
  return idx;
}

}  // namespace

const Mat& FundamentalTrajectory::at(double t) const {
  const auto it = std::lower_bound(t_grid.begin(), t_grid.end(), t);
  std::size_t i = static_cast<std::size_t>(it - t_grid.begin());
  if (i >= t_grid.size()) i = t_grid.size() - 1;
  if (i > 0 && std::abs(t_grid[i - 1] - t) < std::abs(t_grid[i] - t)) --i;
  return Phi[i];
}

FundamentalTrajectory fundamental_matrix(const ReducedSystem& sys, double t_max, double tol,
                                         int samples_per_unit, double t_start) {
  const int k = sys.dim - 1;
  FundamentalTrajectory traj;
  traj.k = k;
  traj.tol = tol;
  const int segments =
      std::max(2, static_cast<int>(std::ceil((t_max - t_start) * samples_per_unit)));
  traj.t_grid = linspace(t_start, t_max, segments);
  const int npts = static_cast<int>(traj.t_grid.size());
  traj.Phi.reserve(npts);

  auto R_of_r = sys.R_of_r;
  OdeRhs rhs = [k, R_of_r](double t, const Vec& y, Vec& dy) {
    const Mat Phi = Eigen::Map<const Mat>(y.data(), k, k);
    const Mat R = R_of_r(std::exp(-t));
    Mat d = -(R * Phi);
    dy = Eigen::Map<const Vec>(d.data(), k * k);
  };
  Vec y0 = Eigen::Map<const Vec>(Mat::Identity(k, k).eval().data(), k * k);
  ode_path(rhs, y0, traj.t_grid, tol, tol * 1e-2,
           [&](std::size_t, double, const Vec& y) {
             traj.Phi.push_back(Eigen::Map<const Mat>(y.data(), k, k));
           });

  for (const Mat& m : traj.Phi) traj.phi_scale = std::max(traj.phi_scale, op_norm(m));

  // Decade boundaries descending from t_max; K_stat on a sampled (s,t) pair
  // subgrid (inverses by LU once per s).
  const int n_dec = static_cast<int>(std::floor((t_max - t_start) / kLn10));
  for (int j = n_dec; j >= 0; --j) traj.decade_t.push_back(t_max - j * kLn10);

  std::vector<int> samples = sample_indices(npts, 120);
  for (double b : traj.decade_t) {
    const auto it = std::lower_bound(traj.t_grid.begin(), traj.t_grid.end(), b);
    int bi = static_cast<int>(it - traj.t_grid.begin());
    if (bi >= npts) bi = npts - 1;
    samples.push_back(bi);
  }
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

  std::vector<Mat> inv(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    inv[i] = Eigen::PartialPivLU<Mat>(traj.Phi[samples[i]]).solve(Mat::Identity(k, k));

  std::vector<double> K_at_sample(samples.size(), 1.0);
  double K_run = 1.0;
  for (std::size_t it_ = 0; it_ < samples.size(); ++it_) {
    for (std::size_t is = 0; is < it_; ++is)
      K_run = std::max(K_run, op_norm(traj.Phi[samples[it_]] * inv[is]));
    K_at_sample[it_] = K_run;
  }
  traj.K_stat = K_run;

  traj.K_running.assign(npts, 1.0);
  for (std::size_t i = 0, si = 0; i < static_cast<std::size_t>(npts); ++i) {
    while (si + 1 < samples.size() && samples[si + 1] <= static_cast<int>(i)) ++si;
    traj.K_running[i] = K_at_sample[si];
  }

  for (std::size_t d = 0; d < traj.decade_t.size(); ++d) {
    const double b = traj.decade_t[d];
    const auto it = std::lower_bound(traj.t_grid.begin(), traj.t_grid.end(), b - 1e-12);
    int bi = std::min<int>(static_cast<int>(it - traj.t_grid.begin()), npts - 1);
    traj.K_decade.push_back(traj.K_running[bi]);
    if (d > 0) {
      const Mat& cur = traj.at(b);
      const Mat& prv = traj.at(traj.decade_t[d - 1]);
      traj.drift_decade.push_back(op_norm(cur - prv) / traj.phi_scale);
    }
  }
  return traj;
}

StabilityVerdict uniform_stability(const FundamentalTrajectory& traj, double K_threshold,
                                   double margin, TrendInfo* info) {
  const auto& K = traj.K_decade;
  if (K.size() < 3) return StabilityVerdict::inconclusive;
  const double last = K[K.size() - 1] / K[K.size() - 2] - 1.0;
  const double prev = K[K.size() - 2] / K[K.size() - 3] - 1.0;
  if (info) {
    info->last = last;
    info->prev = prev;
  }
  if (traj.K_stat <= K_threshold && last < margin) return StabilityVerdict::uniformly_stable;
  // Divergence shows up as sustained growth long before any fixed threshold
  // is crossed on a finite horizon, so the trend alone decides the negative.
  const bool sustained = last >= margin && prev >= margin && last >= 0.5 * prev;
  if (sustained) return StabilityVerdict::not_uniformly_stable;
  return StabilityVerdict::inconclusive;
}

AsymptoticVerdict asymptotically_constant(const FundamentalTrajectory& traj, double margin,
                                          TrendInfo* info) {
  const auto& d = traj.drift_decade;
  if (d.size() < 2) return AsymptoticVerdict::inconclusive;
  const double last = d[d.size() - 1];
  const double prev = d[d.size() - 2];
  if (info) {
    info->last = last;
    info->prev = prev;
  }
  if (last < margin && last <= prev + 1e-12) return AsymptoticVerdict::asymptotically_constant;
  if (last >= margin && last >= 0.5 * prev) return AsymptoticVerdict::not_asymptotically_constant;
  return AsymptoticVerdict::inconclusive;
}

namespace {

// Cumulative integral I(t) = int_0^t mu(e^{-tau}) dtau on a dense grid,
// and its per-decade statistics.
struct MuCurve {
  std::vector<double> t, I;
  double t_max = 0.0;
  double sup_pair = 0.0;  // sup over s < t of I(t) - I(s)

  double I_at(double tq) const {
    const auto it = std::lower_bound(t.begin(), t.end(), tq);
    std::size_t i = std::min<std::size_t>(it - t.begin(), t.size() - 1);
    return I[i];
  }
};

MuCurve mu_curve(const ReducedSystem& sys, double t_max, double t_start) {
  MuCurve c;
  c.t_max = t_max;
  const int npts = std::max(16, static_cast<int>((t_max - t_start) * 20));
  c.t = linspace(t_start, t_max, npts);
  c.I.resize(c.t.size());
  double acc = 0.0, prev_mu = reduction::mu_max(reduction::S_of(sys.R_of_r(std::exp(-t_start))));
  c.I[0] = 0.0;
  double run_min = 0.0;
  for (std::size_t i = 1; i < c.t.size(); ++i) {
    const double mu = reduction::mu_max(reduction::S_of(sys.R_of_r(std::exp(-c.t[i]))));
    acc += 0.5 * (mu + prev_mu) * (c.t[i] - c.t[i - 1]);
    prev_mu = mu;
    c.I[i] = acc;
    c.sup_pair = std::max(c.sup_pair, acc - run_min);
    run_min = std::min(run_min, acc);
  }
  return c;
}

}  // namespace

MuCriteria mu_criteria(const ReducedSystem& sys, double eps_low, double margin,
                       double sup_threshold, double t_start) {
  const double t_max = -std::log(eps_low);
  if (t_max - t_start < 4.0 * kLn10)
    fail(ErrKind::invalid_argument, "GridTooShallow", "mu criteria need at least 4 decades");
  const MuCurve c = mu_curve(sys, t_max, t_start);

  MuCriteria out;
  out.sup_integral = c.sup_pair;
  out.tail_integral = c.I.back();

  // cond1 trend on G(T) = sup over pairs up to T.
  double G2 = 0.0, G1 = 0.0, G0 = 0.0;
  {
    double run_min = 0.0, G = 0.0;
    for (std::size_t i = 1; i < c.t.size(); ++i) {
      G = std::max(G, c.I[i] - run_min);
      run_min = std::min(run_min, c.I[i]);
      if (c.t[i] <= c.t_max - 2 * kLn10) G2 = G;
      if (c.t[i] <= c.t_max - kLn10) G1 = G;
      G0 = G;
    }
  }
  const double g_last = G0 - G1, g_prev = G1 - G2;
  if (G0 <= sup_threshold && g_last < margin)
    out.cond1 = TriState::yes;
  else if (g_last >= margin && g_prev >= margin && g_last >= 0.5 * g_prev)
    out.cond1 = TriState::no;

  // cond2: monotone divergence of the tail integral to -inf.
  const double I0 = c.I.back();
  const double I1 = c.I_at(c.t_max - kLn10);
  const double I2 = c.I_at(c.t_max - 2 * kLn10);
  const double drop_last = I1 - I0, drop_prev = I2 - I1;
  if (drop_last >= margin && drop_prev >= margin && drop_last >= 0.5 * drop_prev)
    out.cond2 = TriState::yes;
  else if (std::abs(drop_last) < margin || drop_last < 0.0)
    out.cond2 = TriState::no;
  return out;
}

ScalarCriteria scalar_criteria_2d(const ReducedSystem& sys, double eps_low, double margin,
                                  double t_start) {
  if (sys.dim != 2) fail(ErrKind::invalid_argument, "WrongDimension", "scalar criteria need n = 2");
  const MuCriteria mu = mu_criteria(sys, eps_low, margin, 13.8, t_start);
  ScalarCriteria out;
  out.lipschitz = mu.cond1;
  if (mu.cond1 != TriState::yes) {
    out.differentiable = mu.cond1 == TriState::no ? TriState::no : TriState::inconclusive;
    return out;
  }
  // int R/rho drho converges (Cauchy tail) or diverges to +inf (mu integral -> -inf).
  const double t_max = -std::log(eps_low);
  const MuCurve c = mu_curve(sys, t_max, t_start);
  const double cauchy = std::abs(c.I.back() - c.I_at(t_max - 2 * kLn10));
  if (cauchy < margin || mu.cond2 == TriState::yes)
    out.differentiable = TriState::yes;
  else if (mu.cond2 == TriState::inconclusive)
    out.differentiable = TriState::inconclusive;
  else
    out.differentiable = TriState::no;
  return out;
}

std::string to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::uniformly_stable: return "UniformlyStable";
    case StabilityVerdict::not_uniformly_stable: return "NotUniformlyStable";
    default: return "Inconclusive";
  }
}
std::string to_string(AsymptoticVerdict v) {
  switch (v) {
    case AsymptoticVerdict::asymptotically_constant: return "AsymptoticallyConstant";
    case AsymptoticVerdict::not_asymptotically_constant: return "NotAsymptoticallyConstant";
    default: return "Inconclusive";
  }
}
std::string to_string(Regularity v) {
  switch (v) {
    case Regularity::differentiable: return "DifferentiableAtZero";
    case Regularity::lipschitz: return "LipschitzAtZero";
    case Regularity::no_guarantee: return "NoGuarantee";
    default: return "Inconclusive";
  }
}
std::string to_string(TriState v) {
  switch (v) {
    case TriState::yes: return "true";
    case TriState::no: return "false";
    default: return "Inconclusive";
  }
}

RegularityVerdict assemble_verdict(const FundamentalTrajectory& traj, const ReducedSystem& mu_sys,
                                   const StabilityConfig& cfg) {
  RegularityVerdict v;
  v.stability = uniform_stability(traj, cfg.K_threshold, cfg.growth_margin, &v.evidence.K_trend);
  v.asymptotic = asymptotically_constant(traj, cfg.drift_margin, &v.evidence.drift_trend);
  v.mu = mu_criteria(mu_sys, std::exp(-cfg.t_max), cfg.growth_margin, 13.8, cfg.t_start);
  if (mu_sys.dim == 2)
    v.scalar2d = scalar_criteria_2d(mu_sys, std::exp(-cfg.t_max), cfg.growth_margin, cfg.t_start);

  v.evidence.K_stat = traj.K_stat;
  v.evidence.mu_integral_sup = v.mu.sup_integral;
  v.evidence.mu_integral_tail = v.mu.tail_integral;
  v.evidence.t_max = cfg.t_max;
  v.evidence.t_start = cfg.t_start;
  v.evidence.ode_tol = cfg.ode_tol;
  v.evidence.K_threshold = cfg.K_threshold;
  v.evidence.growth_margin = cfg.growth_margin;
  v.evidence.drift_margin = cfg.drift_margin;

  // Cross-path contradictions downgrade to inconclusive instead of overriding.
  std::string conflict;
  if (v.stability == StabilityVerdict::not_uniformly_stable &&
      (v.mu.cond1 == TriState::yes || v.mu.cond2 == TriState::yes))
    conflict = "mu-criteria assert stability while the fundamental matrix diverges";
  if (v.asymptotic == AsymptoticVerdict::not_asymptotically_constant && v.mu.cond2 == TriState::yes)
    conflict = "mu-condition 2 asserts convergence while Phi drifts";
  if (v.scalar2d) {
    if (v.scalar2d->lipschitz == TriState::yes &&
        v.stability == StabilityVerdict::not_uniformly_stable)
      conflict = "scalar criterion asserts uniform stability against the trajectory";
    if (v.scalar2d->lipschitz == TriState::no &&
        v.stability == StabilityVerdict::uniformly_stable)
      conflict = "scalar criterion denies uniform stability against the trajectory";
    if (v.scalar2d->differentiable == TriState::no &&
        v.stability == StabilityVerdict::uniformly_stable &&
        v.asymptotic == AsymptoticVerdict::asymptotically_constant)
      conflict = "scalar criterion denies asymptotic constancy against the trajectory";
  }
  if (!conflict.empty()) {
    v.regularity = Regularity::inconclusive;
    v.evidence.notes = "criterion disagreement: " + conflict;
    return v;
  }

  if (v.stability == StabilityVerdict::uniformly_stable) {
    if (v.asymptotic == AsymptoticVerdict::asymptotically_constant)
      v.regularity = Regularity::differentiable;
    else {
      v.regularity = Regularity::lipschitz;
      if (v.asymptotic == AsymptoticVerdict::inconclusive)
        v.evidence.notes = "asymptotic constancy numerically borderline; reporting the weaker "
                           "Lipschitz guarantee";
    }
  } else if (v.stability == StabilityVerdict::not_uniformly_stable) {
    v.regularity = Regularity::no_guarantee;
  } else {
    v.regularity = Regularity::inconclusive;
  }

  if (v.regularity == Regularity::differentiable && v.mu.cond2 == TriState::yes)
    v.gradient_claim = "all derivatives zero";
  return v;
}

double ellipticity_start(const CoefficientField& a, const HalfSphereQuadrature& q,
                         double floor_lambda) {
  // Smallest dyadic t such that the field stays uniformly elliptic from
  // there inward.  The families in scope degenerate, if at all, only near
  // unit scale (the verdicts concern r -> 0, and the cocycle property makes
  // them independent of the window start).
  const double ln2 = std::log(2.0);
  int bad = -1;
  for (int j = 8; j >= 0; --j) {
    const double r = std::exp(-j * ln2 / 2.0);
    double lam = std::numeric_limits<double>::infinity();
    for (int i = 0; i < q.size(); ++i) {
      const Mat av = a.a(r * q.nodes.row(i).transpose());
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (av + av.transpose()));
      lam = std::min(lam, es.eigenvalues().minCoeff());
    }
    if (lam < floor_lambda) bad = std::max(bad, j);
  }
  if (bad < 0) return 0.0;
  if (bad >= 8)
    fail(ErrKind::hypothesis, "EllipticityViolation",
         "field is degenerate well inside the unit ball");
  return (bad + 1) * ln2 / 2.0;
}

ClassifyDetail classify_detailed(const CoefficientField& a, const BoundaryGraph* h,
                                 const HalfSphereQuadrature& q, const StabilityConfig& cfg) {
  ClassifyDetail out;
  out.effective = cfg;
  out.effective.t_start = std::max(cfg.t_start, ellipticity_start(a, q, 0.05));
  const double r_hi = std::exp(-out.effective.t_start);

  CoefficientField field = a;
  if (!field.validated) {
    std::vector<double> vgrid;
    for (double r : dyadic_radii(1.0, 30))
      if (r <= r_hi * (1.0 + 1e-12)) vgrid.push_back(r);
    field = coefficients::validate_field(field, q, vgrid);
  }

  const int n_r = static_cast<int>(std::ceil(cfg.t_max / std::log(2.0))) + 1;
  std::vector<double> r_grid;
  for (double r : dyadic_radii(1.0, n_r))
    if (r <= r_hi * (1.0 + 1e-12)) r_grid.push_back(r);

  if (h) {
    BoundaryGraph graph = *h;
    if (!graph.validated) graph = coefficients::validate_graph(graph, q, r_grid);
    out.system = reduction::compute_R_curved(field, graph, q, r_grid);
  } else {
    out.system = reduction::compute_R_halfspace(field, q, r_grid);
  }
  reduction::mu_of(out.system);

  out.trajectory = fundamental_matrix(out.system, out.effective.t_max, out.effective.ode_tol,
                                      out.effective.samples_per_unit, out.effective.t_start);
  out.verdict = assemble_verdict(out.trajectory, out.system, out.effective);
  return out;
}

RegularityVerdict classify(const CoefficientField& a, const BoundaryGraph* h,
                           const HalfSphereQuadrature& q, const StabilityConfig& cfg) {
  return classify_detailed(a, h, q, cfg).verdict;
}

ForcedSystem forced_from_assembled(const AssembledSystem& sys) {
  ForcedSystem f;
  f.k = sys.dim - 1;
  f.n = sys.dim;
  f.calR = sys.calR_of_t;
  f.eps = sys.eps;
  return f;
}

namespace {

// One RK4 pass of the phi equation phi' = g1 - R1 phi - R2 psi_fixed, with the
// lagged psi interpolated linearly between grid points.
void sweep_phi_forward(const ForcedSystem& sys, const ForcingSpec& g,
                       const std::vector<double>& t, const std::vector<Vec>& psi,
                       std::vector<Vec>& phi) {
  const int k = sys.k;
  auto psi_at = [&](double tq) -> Vec {
    if (tq <= t.front()) return psi.front();
    if (tq >= t.back()) return psi.back();
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    const std::size_t i = it - t.begin();
    const double w = (tq - t[i - 1]) / (t[i] - t[i - 1]);
    return ((1.0 - w) * psi[i - 1] + w * psi[i]).eval();
  };
  auto rhs = [&](double tq, const Vec& p) -> Vec {
    const Mat R = sys.calR(tq);
    return (g.g1(tq) - R.topLeftCorner(k, k) * p - R.topRightCorner(k, k) * psi_at(tq)).eval();
  };
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double h = t[i] - t[i - 1];
    const Vec& y = phi[i - 1];
    const Vec k1 = rhs(t[i - 1], y);
    const Vec k2 = rhs(t[i - 1] + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = rhs(t[i - 1] + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = rhs(t[i], y + h * k3);
    phi[i] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

// Backward RK4 pass of psi' = n psi - R3 phi - R4 psi + g2 from the
// quasi-static terminal value; stable in this direction.
void sweep_psi_backward(const ForcedSystem& sys, const ForcingSpec& g,
                        const std::vector<double>& t, const std::vector<Vec>& phi,
                        std::vector<Vec>& psi) {
  const int k = sys.k;
  auto phi_at = [&](double tq) -> Vec {
    if (tq <= t.front()) return phi.front();
    if (tq >= t.back()) return phi.back();
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    const std::size_t i = it - t.begin();
    const double w = (tq - t[i - 1]) / (t[i] - t[i - 1]);
    return ((1.0 - w) * phi[i - 1] + w * phi[i]).eval();
  };
  auto rhs = [&](double tq, const Vec& p) -> Vec {
    const Mat R = sys.calR(tq);
    return (sys.n * p - R.bottomLeftCorner(k, k) * phi_at(tq) - R.bottomRightCorner(k, k) * p +
            g.g2(tq))
        .eval();
  };
  {
    const double T = t.back();
    const Mat R = sys.calR(T);
    const Mat lhs = sys.n * Mat::Identity(k, k) - R.bottomRightCorner(k, k);
    psi.back() = Eigen::PartialPivLU<Mat>(lhs).solve(
        (R.bottomLeftCorner(k, k) * phi.back() - g.g2(T)).eval());
  }
  for (std::size_t i = t.size() - 1; i > 0; --i) {
    const double h = t[i - 1] - t[i];  // negative
    const Vec& y = psi[i];
    const Vec k1 = rhs(t[i], y);
    const Vec k2 = rhs(t[i] + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = rhs(t[i] + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = rhs(t[i - 1], y + h * k3);
    psi[i - 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

}  // namespace

ForcedState integrate_forced(const ForcedSystem& sys, const ForcingSpec& g, const Vec& phi0,
                             std::optional<Vec> psi0, double t_max, double tol,
                             double delta_alpha) {
  const int k = sys.k;
  ForcedState st;
  st.phi0 = phi0;
  st.alpha = sys.n - delta_alpha;
  const int npts = std::max(64, static_cast<int>(t_max * 40));
  st.t_grid = linspace(0.0, t_max, npts);
  const std::size_t m = st.t_grid.size();
  st.phi.assign(m, Vec::Zero(k));
  st.psi.assign(m, Vec::Zero(k));
  st.phi[0] = phi0;

  // ||g1||_1 and the alpha-weighted g2 tail statistics.
  st.g1_l1 = 0.0;
  for (std::size_t i = 1; i < m; ++i)
    st.g1_l1 += 0.5 * (g.g1(st.t_grid[i]).norm() + g.g1(st.t_grid[i - 1]).norm()) *
                (st.t_grid[i] - st.t_grid[i - 1]);
  if (!std::isfinite(st.g1_l1) || st.g1_l1 > 1e8)
    fail(ErrKind::hypothesis, "ForcingRejected", "g1 is not integrable");

  {
    // W(t) = int_t^inf |g2| e^{-alpha(tau - t)} dtau by backward recursion,
    // extended one horizon beyond t_max for the tail.
    const double h = st.t_grid[1] - st.t_grid[0];
    const int ext = static_cast<int>(20.0 / (st.alpha * h)) + npts;
    std::vector<double> W(ext, 0.0), tt(ext);
    for (int i = 0; i < ext; ++i) tt[i] = i * h;
    for (int i = ext - 2; i >= 0; --i) {
      const double decay = std::exp(-st.alpha * h);
      W[i] = decay * W[i + 1] +
             0.5 * h * (g.g2(tt[i]).norm() + decay * g.g2(tt[i + 1]).norm());
    }
    double calpha = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = std::max(sys.eps(st.t_grid[i]), 1e-12);
      calpha = std::max(calpha, W[i] / e);
    }
    st.c_alpha = calpha;
    if (!std::isfinite(calpha) || calpha > 1e8)
      fail(ErrKind::hypothesis, "ForcingRejected", "alpha-weighted g2 tail is unbounded");
  }

  if (psi0) {
    // Faithful initial-value integration of the full 2k system.
    st.psi0 = *psi0;
    st.finite_energy_selected = false;
    Vec y0(2 * k);
    y0.head(k) = phi0;
    y0.tail(k) = *psi0;
    Mat D = Mat::Zero(2 * k, 2 * k);
    D.bottomRightCorner(k, k) = -sys.n * Mat::Identity(k, k);
    OdeRhs rhs = [&](double t, const Vec& y, Vec& dy) {
      Vec gv(2 * k);
      gv.head(k) = g.g1(t);
      gv.tail(k) = g.g2(t);
      dy = gv - (D + sys.calR(t)) * y;
    };
    ode_path(rhs, y0, st.t_grid, tol, tol * 1e-2, [&](std::size_t i, double, const Vec& y) {
      st.phi[i] = y.head(k);
      st.psi[i] = y.tail(k);
    });
  } else {
    // Finite-energy branch: alternate forward phi and backward psi sweeps;
    // the cross coupling is O(eps^2), so the iteration contracts quickly.
    st.finite_energy_selected = true;
    for (int iter = 0; iter < 80; ++iter) {
      std::vector<Vec> phi_prev = st.phi, psi_prev = st.psi;
      sweep_phi_forward(sys, g, st.t_grid, st.psi, st.phi);
      sweep_psi_backward(sys, g, st.t_grid, st.phi, st.psi);
      double delta = 0.0, scale = 1e-300;
      for (std::size_t i = 0; i < m; ++i) {
        delta = std::max(delta, (st.phi[i] - phi_prev[i]).norm() + (st.psi[i] - psi_prev[i]).norm());
        scale = std::max(scale, st.phi[i].norm() + st.psi[i].norm());
      }
      if (delta <= std::max(tol, 1e-13) * std::max(scale, 1.0)) break;
      if (iter == 79)
        fail(ErrKind::numeric, "IntegrationFailure",
             "finite-energy selection did not converge; coupling too strong");
    }
    st.psi0 = st.psi.front();
  }

  for (const Vec& p : st.phi) st.sup_phi = std::max(st.sup_phi, p.norm());

  // Fitted constants of the bound shapes.
  const double denom_phi = st.c_alpha + phi0.norm() + st.g1_l1;
  st.fitted_c_phi = st.sup_phi / std::max(denom_phi, 1e-12);
  std::vector<double> suffix(m, 0.0);
  double run = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    run = std::max(run, st.phi[i].norm());
    suffix[i] = run;
  }
  double cpsi = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = std::max(sys.eps(st.t_grid[i]), 1e-12);
    cpsi = std::max(cpsi, st.psi[i].norm() / (e * std::max(st.c_alpha + suffix[i], 1e-12)));
  }
  st.fitted_c_psi = cpsi;
  return st;
}

}  // namespace neureg::stability
