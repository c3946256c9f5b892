#ifndef NEUREG_PIPELINE_HPP
#define NEUREG_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/oracle.hpp"
#include "core/stability.hpp"

namespace neureg::cli {

inline constexpr const char* kVersion = "0.1.0";

struct CommandResult {
  json report;
  int outcome = 0;  // 0 ok/consistent, 2 contradiction, 3 inconclusive when decisive
};

// Problem pieces resolved from a validated config.
struct Problem {
  coefficients::CoefficientField field;
  std::optional<coefficients::BoundaryGraph> boundary;
  geometry::HalfSphereQuadrature quadrature;
  stability::StabilityConfig stability;
  coefficients::RadialProfile g_profile;  // zero for identity fields
  bool outside_theory = false;            // modulus failed square-Dini certification
  std::string outside_theory_reason;
};

Problem build_problem(const json& cfg);

json verdict_to_json(const stability::RegularityVerdict& v);

// Commands; artifacts (CSV files plus report.json) are written under out_dir.
CommandResult cmd_classify(const json& cfg, const std::string& out_dir);
CommandResult cmd_verify(const json& cfg, const std::string& out_dir);
CommandResult cmd_kernel_check(const json& cfg, const std::string& out_dir);
CommandResult cmd_sweep(const json& cfg, const std::string& out_dir);

CommandResult run_command(const json& cfg, const std::string& command,
                          const std::string& out_dir);

}  // namespace neureg::cli

#endif
