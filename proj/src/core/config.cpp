#include "core/config.hpp"

#include "core/types.hpp"

namespace neureg::cli {

json default_config() {
  return json{
      {"problem",
       {{"dimension", 2},
        {"field",
         {{"family", "identity"},
          {"g", {{"family", "zero"}, {"c", 0.0}, {"alpha", 0.0}, {"gamma", 0.0}, {"sign", 1}}},
          {"compactified", false}}},
        {"boundary",
         {{"family", "none"}, {"c", 0.0}, {"alpha", 0.0}, {"gamma", 0.0}, {"sign", 1}}},
        {"modulus",
         {{"family", "auto"}, {"c", 0.0}, {"alpha", 0.0}, {"gamma", 0.0}, {"sign", 1}}},
        {"kappa", 0.0}}},
      {"quadrature", {{"order", 16}}},
      {"stability",
       {{"t_max", 40.0},
        {"ode_tol", 1e-10},
        {"k_threshold", 1e6},
        {"growth_margin", 0.01},
        {"drift_margin", 0.02},
        {"samples_per_unit", 50},
        {"delta_alpha", 0.5}}},
      {"oracle", {{"t_max", 40.0}, {"tol", 1e-10}}},
      {"kernel",
       {{"dimension", 3},
        {"truncation", 12},
        {"p", 4.0},
        {"radial", 16},
        {"sphere_order", 10},
        {"series_ratio", 0.3},
        {"r0", 0.4},
        {"r_decades", 3.2},
        {"source", {{"lo", 1.0}, {"hi", 2.0}, {"angular_a", 0.3}, {"angular_b", 0.2}}}}},
      {"output", {{"dir", "neureg-out"}}},
      {"seed", 0},
      {"decisive", false},
      {"sweep",
       {{"parameter", ""}, {"values", json::array()}, {"command", "classify"}, {"workers", 0}}}};
}

namespace {

[[noreturn]] void bad(const std::string& what) {
  fail(ErrKind::config, "ConfigInvalid", what);
}

void merge_checked(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) bad(path + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key_path = path + "/" + it.key();
    if (!base.contains(it.key())) bad("unknown key " + key_path);
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key_path);
    } else {
      if (slot.is_number() && !it.value().is_number())
        bad(key_path + " must be a number");
      if (slot.is_string() && !it.value().is_string())
        bad(key_path + " must be a string");
      if (slot.is_boolean() && !it.value().is_boolean())
        bad(key_path + " must be a boolean");
      if (slot.is_array() && !it.value().is_array())
        bad(key_path + " must be an array");
      slot = it.value();
    }
  }
}

void require_range(const json& cfg, const std::string& ptr, double lo, double hi) {
  const double v = cfg.at(json::json_pointer(ptr)).get<double>();
  if (!(v >= lo && v <= hi))
    bad(ptr + " = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
        std::to_string(hi) + "]");
}

void check_profile(const json& p, const std::string& path, bool allow_none) {
  const std::string fam = p.at("family").get<std::string>();
  if (fam == "zero" || fam == "auto") return;
  if (fam == "none") {
    if (allow_none) return;
    bad(path + ".family may not be none here");
  }
  if (fam == "power") {
    if (!(p.at("gamma").get<double>() > 0.0)) bad(path + ": power profile needs gamma > 0");
  } else if (fam == "logpow" || fam == "sinlog") {
    if (!(p.at("alpha").get<double>() > 0.0)) bad(path + ": profile needs alpha > 0");
  } else {
    bad(path + ": unknown family " + fam);
  }
}

}  // namespace

json validate_config(json user) {
  json cfg = default_config();
  merge_checked(cfg, user, "");

  const int n = cfg["problem"]["dimension"].get<int>();
  if (n < 2 || n > 4) bad("problem/dimension must be 2, 3 or 4");
  const std::string fam = cfg["problem"]["field"]["family"].get<std::string>();
  if (fam != "identity" && fam != "gs" && fam != "curved")
    bad("problem/field/family must be identity, gs or curved");
  check_profile(cfg["problem"]["field"]["g"], "problem.field.g", false);
  check_profile(cfg["problem"]["boundary"], "problem.boundary", true);
  check_profile(cfg["problem"]["modulus"], "problem.modulus", false);
  if (fam == "curved" && cfg["problem"]["boundary"]["family"].get<std::string>() == "none")
    bad("curved problems need problem/boundary");

  require_range(cfg, "/problem/kappa", 0.0, 0.99);
  {
    const int order = cfg["quadrature"]["order"].get<int>();
    if (order < 4 || order > 64) bad("quadrature/order must be in [4, 64]");
  }
  require_range(cfg, "/stability/t_max", 10.0, 120.0);
  require_range(cfg, "/stability/ode_tol", 1e-13, 1e-6);
  require_range(cfg, "/stability/k_threshold", 10.0, 1e12);
  require_range(cfg, "/stability/growth_margin", 1e-4, 0.5);
  require_range(cfg, "/stability/drift_margin", 1e-4, 0.5);
  require_range(cfg, "/stability/delta_alpha", 0.05, 1.0);
  {
    const int spu = cfg["stability"]["samples_per_unit"].get<int>();
    if (spu < 10 || spu > 400) bad("stability/samples_per_unit must be in [10, 400]");
  }
  require_range(cfg, "/oracle/t_max", 10.0, 120.0);
  require_range(cfg, "/oracle/tol", 1e-13, 1e-6);
  {
    const int kn = cfg["kernel"]["dimension"].get<int>();
    if (kn != 3 && kn != 4) bad("kernel/dimension must be 3 or 4");
    const int K = cfg["kernel"]["truncation"].get<int>();
    if (K < 2 || K > 12 || (kn == 4 && K > 8)) bad("kernel/truncation out of range");
    if (!(cfg["kernel"]["p"].get<double>() > kn)) bad("kernel/p must exceed kernel/dimension");
    require_range(cfg, "/kernel/series_ratio", 0.01, 0.99);
    const double lo = cfg["kernel"]["source"]["lo"].get<double>();
    const double hi = cfg["kernel"]["source"]["hi"].get<double>();
    if (!(lo > 0.0 && hi > lo)) bad("kernel/source needs 0 < lo < hi");
  }
  {
    const std::string cmd = cfg["sweep"]["command"].get<std::string>();
    if (cmd != "classify" && cmd != "verify") bad("sweep/command must be classify or verify");
  }
  return cfg;
}

json parse_config(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const std::exception& e) {
    bad(std::string("JSON parse failure: ") + e.what());
  }
  return validate_config(std::move(user));
}

}  // namespace neureg::cli
