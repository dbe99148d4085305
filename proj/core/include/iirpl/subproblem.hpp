#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "iirpl/cone_program.hpp"
#include "iirpl/sampling.hpp"
#include "iirpl/sos.hpp"

namespace iirpl {

/// First-order model of every error function around the current iterate.
/// Columns index the update delta of x = [c; tau] (4J + 2 entries).
struct LinearizedSystem {
  Eigen::MatrixXd C;  // group-delay deviation rows
  Eigen::VectorXd d;
  Eigen::MatrixXd Dpb;  // passband |H|^2 - 1 rows
  Eigen::VectorXd fpb;
  Eigen::MatrixXcd Dsb;  // stopband response rows
  Eigen::VectorXcd fsb;
  Eigen::MatrixXcd Dtb;  // transition-band response rows
  Eigen::VectorXcd ftb;
  Eigen::MatrixXd B;  // 3J x (4J + 2) stability rows
  Eigen::VectorXd b;
  double gamma = 0.0;
  double kappa_g = 1.0;
  double kappa_pb = 1.0;
  double kappa_sb = 1.0;
  double kappa_tb = 1.0;
  std::vector<Eigen::Index> pinned;  // coefficient pins of the cascade

  Eigen::Index num_updates() const { return B.cols(); }
};

/// Builds the linearized rows at `state` on `grid`. The stability rows use
/// gamma = 1 - (1 - eps_s)^2. Throws InfeasibleStart when the iterate lies
/// outside the shrunk triangle.
LinearizedSystem assemble(const DesignState& state, const FrequencyGrid& grid, double eps_s);

enum class DelayMode { Free, Fixed };

struct SubproblemCaps {
  double gamma_pb = 0.0;
  double gamma_sb = 0.0;
  std::optional<double> gamma_tb;  // no transition rows when empty
  double gamma_small = 0.01;
  double w_relax = 1000.0;
  // Subtracted from every stability bound so accepted steps stay strictly
  // inside the triangle despite solver tolerance.
  double stability_backoff = 0.0;
  // Lets delta_rlx loosen the stopband and transition caps too; used only
  // to recover from starts that violate them.
  bool relax_stopband = false;
};

/// Index of delta_rlx and of the epigraph variable t in the lowered program.
struct SubproblemLayout {
  Eigen::Index n = 0;  // update length 4J + 2
  Eigen::Index rlx() const { return n; }
  Eigen::Index t() const { return n + 1; }
  Eigen::Index vars() const { return n + 2; }
};

/// Lowers one iteration to u = [delta; delta_rlx; t]:
///   minimize t + W delta_rlx
///   s.t. |C delta + d| <= t, |Dpb delta + fpb| <= Gamma_pb + delta_rlx,
///        |row delta + f| <= Gamma_sb (Gamma_tb) per stopband (transition) frequency,
///        ||delta|| <= Gamma_small + delta_rlx, delta_rlx >= 0, B delta <= b.
/// Fixed mode pins the tau update; `pins` holds further update indices fixed at zero.
ConeProgram lower(const LinearizedSystem& sys, DelayMode mode, const SubproblemCaps& caps,
                  std::span<const Eigen::Index> pins = {});

}  // namespace iirpl
