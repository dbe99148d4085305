#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace iirpl {

/// ||A u + a||_2 <= c' u + c0
struct SocBlock {
  Eigen::MatrixXd A;
  Eigen::VectorXd a;
  Eigen::VectorXd c;
  double c0 = 0.0;
};

/// minimize objective' u
/// subject to  u_i = 0             for i in pinned
///             lin_A u <= lin_b
///             every SocBlock
struct ConeProgram {
  Eigen::VectorXd objective;
  std::vector<Eigen::Index> pinned;
  Eigen::MatrixXd lin_A;
  Eigen::VectorXd lin_b;
  std::vector<SocBlock> soc;

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_linear() const { return lin_A.rows(); }

  /// Throws DimensionMismatch on inconsistent shapes.
  void validate() const;

  /// Largest violation of any constraint at u (0 when feasible).
  double max_violation(const Eigen::VectorXd& u) const;
};

/// Text dump used for cross-checking solvers; values use 17 significant digits.
void write_program(std::ostream& os, const ConeProgram& program);
ConeProgram read_program(std::istream& is);

}  // namespace iirpl
