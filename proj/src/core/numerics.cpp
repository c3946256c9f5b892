#include "core/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace neureg {

std::pair<Vec, Vec> gauss_legendre(int m) {
  if (m < 1) fail(ErrKind::invalid_argument, "InvalidOrder", "Gauss-Legendre needs m >= 1");
  Vec x(m), w(m);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_m.
    double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x(i) = -z;
    x(m - 1 - i) = z;
    double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    w(i) = wi;
    w(m - 1 - i) = wi;
  }
  return {x, w};
}

std::pair<Vec, Vec> gauss_legendre_on(int m, double a, double b) {
  auto [x, w] = gauss_legendre(m);
  const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
  Vec xs = (rad * x.array() + mid).matrix();
  Vec ws = (rad * w.array()).matrix();
  return {xs, ws};
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int m) {
  auto [x, w] = gauss_legendre_on(m, a, b);
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += w(i) * f(x(i));
  return s;
}

namespace {

double adapt_rec(const std::function<double(double)>& f, double a, double b, double whole,
                 double tol, int depth, int max_depth) {
  const double mid = 0.5 * (a + b);
  const double left = integrate_gl(f, a, mid);
  const double right = integrate_gl(f, mid, b);
  const double err = std::abs(left + right - whole);
  if (err < tol || depth >= max_depth) return left + right;
  return adapt_rec(f, a, mid, left, 0.5 * tol, depth + 1, max_depth) +
         adapt_rec(f, mid, b, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth) {
  if (a == b) return 0.0;
  const double whole = integrate_gl(f, a, b);
  const double scale = std::max(std::abs(whole), 1.0);
  return adapt_rec(f, a, b, whole, tol * scale, 0, max_depth);
}

TailIntegral integrate_dyadic_tail(const std::function<double(double)>& f, double t0,
                                   double rel_tol, double t_cap) {
  TailIntegral out;
  double lo = t0, hi = std::max(t0 + 1.0, 1.0);
  out.window_bounds.push_back(lo);
  while (true) {
    const double win = integrate_adaptive(f, lo, hi, 1e-13);
    out.window_sums.push_back(win);
    out.window_bounds.push_back(hi);
    out.value += win;
    const double scale = std::max(out.value, 1e-300);
    if (win < rel_tol * scale && out.window_sums.size() >= 3) {
      out.converged = true;
      return out;
    }
    if (hi >= t_cap) break;
    lo = hi;
    hi = std::min(2.0 * hi, t_cap * 1.0000001);
  }
  // Hit the cap: extrapolate the tail geometrically from the last window
  // ratios if they shrink, otherwise leave the integral flagged unresolved.
  const auto& ws = out.window_sums;
  if (ws.size() >= 4) {
    double rho = 0.0;
    for (std::size_t i = ws.size() - 3; i < ws.size(); ++i)
      if (ws[i - 1] > 0.0) rho = std::max(rho, ws[i] / ws[i - 1]);
    if (rho > 0.0 && rho < 0.995) {
      out.tail_estimate = ws.back() * rho / (1.0 - rho);
      out.value += out.tail_estimate;
      out.converged = out.tail_estimate < 1e-6 * std::max(out.value, 1e-300);
      return out;
    }
  }
  out.converged = false;
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;

}  // namespace

void ode_path(const OdeRhs& rhs, const Vec& y0, const std::vector<double>& t_pts, double rtol,
              double atol,
              const std::function<void(std::size_t, double, const Vec&)>& on_point) {
  if (t_pts.size() < 1) return;
  const double dir = (t_pts.size() >= 2 && t_pts.back() < t_pts.front()) ? -1.0 : 1.0;
  Vec y = y0;
  double t = t_pts.front();
  on_point(0, t, y);

  const int n = static_cast<int>(y.size());
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  rhs(t, y, k1);
  double h = dir * 1e-4;

  for (std::size_t ip = 1; ip < t_pts.size(); ++ip) {
    const double t_target = t_pts[ip];
    while (dir * (t_target - t) > 1e-14 * std::max(1.0, std::abs(t))) {
      bool clipped = false;
      if (dir * (t + h - t_target) > 0.0) {
        h = t_target - t;
        clipped = true;
      }
      ytmp = y + h * A21 * k1;
      rhs(t + C2 * h, ytmp, k2);
      ytmp = y + h * (A31 * k1 + A32 * k2);
      rhs(t + C3 * h, ytmp, k3);
      ytmp = y + h * (A41 * k1 + A42 * k2 + A43 * k3);
      rhs(t + C4 * h, ytmp, k4);
      ytmp = y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
      rhs(t + C5 * h, ytmp, k5);
      ytmp = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
      rhs(t + h, ytmp, k6);
      ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
      rhs(t + h, ynew, k7);  // FSAL
      err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

      double err_norm = 0.0;
      for (int i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
        err_norm += sq(err(i) / sc);
      }
      err_norm = std::sqrt(err_norm / n);

      if (err_norm <= 1.0) {
        t += h;
        y.swap(ynew);
        k1.swap(k7);
        double fac = (err_norm == 0.0) ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        if (clipped) fac = std::min(fac, 5.0);
        h *= fac;
      } else {
        h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
          fail(ErrKind::numeric, "IntegrationFailure", "step size underflow in ode_path");
      }
    }
    on_point(ip, t_target, y);
  }
}

Vec central_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

std::vector<double> linspace(double a, double b, int m) {
  std::vector<double> v(m + 1);
  for (int i = 0; i <= m; ++i) v[i] = a + (b - a) * i / m;
  return v;
}

std::vector<double> dyadic_radii(double r_max, int m) {
  std::vector<double> v(m);
  double r = r_max;
  for (int i = 0; i < m; ++i, r *= 0.5) v[i] = r;
  return v;
}

}  // namespace neureg
