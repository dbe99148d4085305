#pragma once

#include <complex>

#include <Eigen/Dense>

#include "iirpl/sos.hpp"

namespace iirpl {

/// Single-input single-output discrete state space model.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  /// D + C (e^{jw} I - A)^{-1} B
  Complex response(double omega) const;
};

/// Shift-register realization of an FIR: A shifts, B = e1, C = taps[1..], D = taps[0].
StateSpace fir_state_space(const Eigen::VectorXd& taps);

struct BalancedModel {
  StateSpace model;             // balanced and truncated
  Eigen::VectorXd hankel_sv;    // all Hankel singular values, descending
};

/// Balanced realization of an FIR truncated to `order` states. The
/// controllability Gramian of the shift register is the identity, so the
/// observability Gramian alone is diagonalized. Throws IllConditioned when
/// sigma_1 / sigma_order exceeds 1e12.
BalancedModel balanced_truncation(const Eigen::VectorXd& taps, int order);

struct BmtSeed {
  SosCascade cascade;
  Eigen::VectorXd hankel_sv;
  int relocated_zeros = 0;
};

/// Reduces an FIR to an IIR cascade of order `order` (even): balanced
/// truncation, poles from the reduced A, zeros from the system pencil, zeros
/// with modulus above `zero_cap` moved to the origin, and the gain set by
/// normalize_passband_gain over [pass_lo, pass_hi].
BmtSeed bmt_reduce(const Eigen::VectorXd& taps, int order, double pass_lo, double pass_hi, double zero_cap = 2.5);

/// Replaces every zero with modulus above `cap` by a zero at the origin.
/// Returns the number of relocated zeros.
int relocate_zeros(std::vector<Complex>& zeros, double cap);

}  // namespace iirpl
