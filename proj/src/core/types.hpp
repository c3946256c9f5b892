#ifndef NEUREG_TYPES_HPP
#define NEUREG_TYPES_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace neureg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error categories; mirrored by the C API status codes.
enum class ErrKind {
  invalid_argument,   // bad parameters, unsupported dimension, wrong dimension
  config,             // config parse/validation failures
  evaluation,         // an evaluator failed or returned non-finite values
  numeric,            // integration/quadrature/step-control breakdown
  hypothesis,         // a certified property or a precondition of the theory fails
  io,                 // filesystem
  internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrKind kind, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}
  ErrKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

private:
  ErrKind kind_;
  std::string name_;  // spec-level error name, e.g. "NotSquareDini"
};

[[noreturn]] inline void fail(ErrKind kind, const std::string& name, const std::string& what) {
  throw Error(kind, name, what);
}

inline double sq(double x) { return x * x; }

// Operator 2-norm of a small dense matrix.
inline double op_norm(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

}  // namespace neureg

#endif
