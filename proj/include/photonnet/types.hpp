#pragma once
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace photonnet {

using Complex = std::complex<double>;
using VecXd = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatXd = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;

namespace constants {
// 2019 SI exact value, J s.
inline constexpr double hbar = 1.054571817e-34;
}  // namespace constants

/// Violation of a numerical contract: unitarity residual, normalization,
/// probability budget, or an engine size cap. CLI maps this to exit code 2.
class ContractError : public std::runtime_error {
public:
  explicit ContractError(const std::string &what) : std::runtime_error(what) {}
};

/// Invalid user input: malformed files, schema violations, bad parameters.
/// CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string &what)
      : std::runtime_error(what) {}
};

}  // namespace photonnet
