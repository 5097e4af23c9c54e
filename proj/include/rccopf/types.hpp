#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>
#include <stdexcept>
#include <string>

namespace rccopf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseVector = Eigen::SparseVector<double>;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when input data violates a model invariant (bad case file,
/// inconsistent dimensions, out-of-range probability, ...).
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

inline const char* version() { return "0.1.0"; }

}  // namespace rccopf
