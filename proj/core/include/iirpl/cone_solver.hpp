#pragma once

#include <iosfwd>

#include <Eigen/Dense>

#include "iirpl/cone_program.hpp"

namespace iirpl {

enum class SolveStatus { Optimal, NearOptimal, Infeasible, Unbounded, MaxIters };

const char* to_string(SolveStatus status) noexcept;

struct SolverOptions {
  int max_iters = 200;
  double tol = 1e-8;
  // Residual level at which a stalled or iteration-capped solve still counts
  // as near optimal.
  double near_tol = 1e-5;
  bool verbose = false;
  std::ostream* log = nullptr;  // defaults to std::clog when verbose
};

struct KktResiduals {
  double primal = 0.0;  // ||G u + s - h|| / max(1, ||h||)
  double dual = 0.0;    // ||G' z + c|| / max(1, ||c||)
  double gap = 0.0;     // s'z / max(1, |primal_obj|)
};

struct Solution {
  Eigen::VectorXd u;
  SolveStatus status = SolveStatus::MaxIters;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  KktResiduals kkt_residuals;
  int iterations = 0;
};

/// Anything that can solve a ConeProgram; lets other solvers be swapped in
/// for cross-validation.
class ConeSolver {
 public:
  virtual ~ConeSolver() = default;
  virtual Solution solve(const ConeProgram& program, const SolverOptions& opts) const = 0;
};

/// Primal-dual path-following method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling and Mehrotra correction. Dense linear algebra;
/// meant for programs with tens of variables and hundreds of rows.
class InteriorPointSolver final : public ConeSolver {
 public:
  Solution solve(const ConeProgram& program, const SolverOptions& opts) const override;
};

/// Convenience wrapper around InteriorPointSolver.
Solution solve(const ConeProgram& program, const SolverOptions& opts = {});

}  // namespace iirpl
