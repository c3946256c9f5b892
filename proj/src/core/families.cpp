#include "core/families.hpp"

#include <cmath>

namespace neureg::coefficients {

namespace {

double clamp_r(double r) { return std::min(r, 1.0); }

}  // namespace

double RadialProfile::value(double r) const {
  if (r <= 0.0) fail(ErrKind::invalid_argument, "InvalidRadius", "profile needs r > 0");
  r = clamp_r(r);
  if (family == "zero") return 0.0;
  if (family == "power") return c * std::pow(r, gamma);
  if (family == "logpow") return sign * c * std::pow(1.0 - std::log(r), -alpha);
  if (family == "sinlog")
    return c * std::sin(std::log(1.0 / r)) * std::pow(1.0 - std::log(r), -alpha);
  fail(ErrKind::invalid_argument, "UnknownFamily", family);
}

double RadialProfile::deriv(double r) const {
  if (r <= 0.0) fail(ErrKind::invalid_argument, "InvalidRadius", "profile needs r > 0");
  if (r > 1.0) return 0.0;
  if (family == "zero") return 0.0;
  if (family == "power") return c * gamma * std::pow(r, gamma - 1.0);
  const double L = 1.0 - std::log(r);
  if (family == "logpow") return sign * c * alpha * std::pow(L, -alpha - 1.0) / r;
  if (family == "sinlog") {
    const double t = -std::log(r);
    // d/dr [sin(t) L^{-alpha}] with dt/dr = dL/dr = -1/r
    return c * (-std::cos(t) * std::pow(L, -alpha) + alpha * std::sin(t) * std::pow(L, -alpha - 1.0)) /
           r;
  }
  fail(ErrKind::invalid_argument, "UnknownFamily", family);
}

double RadialProfile::g_tilde(double t) const {
  if (t < 0.0) return value(1.0);
  if (family == "zero") return 0.0;
  if (family == "power") return c * std::exp(-gamma * t);
  if (family == "logpow") return sign * c * std::pow(1.0 + t, -alpha);
  if (family == "sinlog") return c * std::sin(t) * std::pow(1.0 + t, -alpha);
  fail(ErrKind::invalid_argument, "UnknownFamily", family);
}

double RadialProfile::dg_tilde(double t) const {
  if (t < 0.0) return 0.0;
  if (family == "zero") return 0.0;
  if (family == "power") return -c * gamma * std::exp(-gamma * t);
  if (family == "logpow") return -sign * c * alpha * std::pow(1.0 + t, -alpha - 1.0);
  if (family == "sinlog")
    return c * (std::cos(t) * std::pow(1.0 + t, -alpha) -
                alpha * std::sin(t) * std::pow(1.0 + t, -alpha - 1.0));
  fail(ErrKind::invalid_argument, "UnknownFamily", family);
}

Modulus RadialProfile::envelope_modulus() const {
  const double amp = std::abs(c);
  if (family == "zero" || amp == 0.0) {
    // Degenerate but convenient: a tiny certified power modulus.
    auto om = [](double r) { return 1e-30 * std::pow(clamp_r(r), 0.5); };
    auto ep = [](double t) { return t < 0.0 ? 1e-30 : 1e-30 * std::exp(-0.5 * t); };
    return certify_modulus(om, ep, 0.25);
  }
  if (family == "power") {
    const double p = std::min(gamma, 0.9);
    auto om = [amp, p](double r) { return amp * std::pow(clamp_r(r), p); };
    auto ep = [amp, p](double t) { return t < 0.0 ? amp : amp * std::exp(-p * t); };
    return certify_modulus(om, ep, std::min(0.5, 1.0 - p));
  }
  if (family == "logpow" || family == "sinlog") {
    const double a = alpha;
    auto om = [amp, a](double r) { return amp * std::pow(1.0 - std::log(clamp_r(r)), -a); };
    auto ep = [amp, a](double t) { return t < 0.0 ? amp : amp * std::pow(1.0 + t, -a); };
    return certify_modulus(om, ep, 0.5);
  }
  fail(ErrKind::invalid_argument, "UnknownFamily", family);
}

std::string RadialProfile::describe() const {
  char buf[128];
  if (family == "zero") return "zero";
  if (family == "power") {
    std::snprintf(buf, sizeof buf, "power(c=%g, gamma=%g)", c, gamma);
  } else if (family == "logpow") {
    std::snprintf(buf, sizeof buf, "logpow(c=%g, alpha=%g, sign=%+d)", c, alpha, sign);
  } else {
    std::snprintf(buf, sizeof buf, "sinlog(c=%g, alpha=%g)", c, alpha);
  }
  return buf;
}

RadialProfile zero_profile() { return RadialProfile{}; }

RadialProfile power_profile(double c, double gamma) {
  if (gamma <= 0.0) fail(ErrKind::invalid_argument, "InvalidParams", "power profile needs gamma > 0");
  RadialProfile p;
  p.family = "power";
  p.c = c;
  p.gamma = gamma;
  return p;
}

RadialProfile logpow_profile(double c, double alpha, int sign) {
  if (alpha <= 0.0) fail(ErrKind::invalid_argument, "InvalidParams", "logpow profile needs alpha > 0");
  RadialProfile p;
  p.family = "logpow";
  p.c = c;
  p.alpha = alpha;
  p.sign = sign >= 0 ? 1 : -1;
  return p;
}

RadialProfile sinlog_profile(double c, double alpha) {
  if (alpha <= 0.0) fail(ErrKind::invalid_argument, "InvalidParams", "sinlog profile needs alpha > 0");
  RadialProfile p;
  p.family = "sinlog";
  p.c = c;
  p.alpha = alpha;
  return p;
}

}  // namespace neureg::coefficients
