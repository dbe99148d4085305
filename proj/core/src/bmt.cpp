#include "iirpl/bmt.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "iirpl/errors.hpp"
#include "iirpl/seeding.hpp"
#include "roots.hpp"

namespace iirpl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Complex StateSpace::response(double omega) const {
  const Index n = A.rows();
  if (n == 0) return D;
  const Complex z = std::polar(1.0, omega);
  const Eigen::MatrixXcd M = z * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
  const Eigen::VectorXcd x = M.partialPivLu().solve(B.cast<Complex>());
  return D + (C.cast<Complex>() * x)(0);
}

StateSpace fir_state_space(const VectorXd& taps) {
  if (taps.size() < 1) throw Error(ErrorCode::InvalidArgument, "empty FIR");
  const Index n = taps.size() - 1;
  StateSpace ss;
  ss.A = MatrixXd::Zero(n, n);
  for (Index i = 1; i < n; ++i) ss.A(i, i - 1) = 1.0;
  ss.B = VectorXd::Zero(n);
  if (n > 0) ss.B[0] = 1.0;
  ss.C = taps.tail(n).transpose();
  ss.D = taps[0];
  return ss;
}

BalancedModel balanced_truncation(const VectorXd& taps, int order) {
  const StateSpace full = fir_state_space(taps);
  const Index n = full.A.rows();
  if (order < 1 || order > n) throw Error(ErrorCode::InvalidArgument, "truncation order out of range");
  // Observability Gramian Q(i, j) = sum_k h[i+1+k] h[j+1+k]; finite because A is nilpotent.
  MatrixXd Q = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      double s = 0.0;
      for (Index k = 0; j + 1 + k < taps.size(); ++k) s += taps[i + 1 + k] * taps[j + 1 + k];
      Q(i, j) = Q(j, i) = s;
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NumericalBreakdown, "Gramian eigensolve failed");
  // Descending order.
  const VectorXd lam = es.eigenvalues().reverse().cwiseMax(0.0);
  const MatrixXd V = es.eigenvectors().rowwise().reverse();
  BalancedModel out;
  out.hankel_sv = lam.cwiseSqrt();
  const double smax = out.hankel_sv[0];
  const double starget = out.hankel_sv[order - 1];
  if (!(starget > 0.0) || smax / starget > 1e12) {
    throw Error(ErrorCode::IllConditioned, "Hankel singular value spread exceeds 1e12");
  }
  const VectorXd s = out.hankel_sv.head(order);
  const MatrixXd Vr = V.leftCols(order);
  // x = T xb with T = V diag(sigma^{-1/2}); T^{-1} = diag(sigma^{1/2}) V'.
  const VectorXd sq = s.cwiseSqrt();
  const MatrixXd Tinv = sq.asDiagonal() * Vr.transpose();
  const MatrixXd T = Vr * sq.cwiseInverse().asDiagonal();
  out.model.A = Tinv * full.A * T;
  out.model.B = Tinv * full.B;
  out.model.C = full.C * T;
  out.model.D = full.D;
  return out;
}

int relocate_zeros(std::vector<Complex>& zeros, double cap) {
  int moved = 0;
  for (Complex& z : zeros) {
    if (std::abs(z) > cap) {
      z = 0.0;
      ++moved;
    }
  }
  return moved;
}

BmtSeed bmt_reduce(const VectorXd& taps, int order, double pass_lo, double pass_hi, double zero_cap) {
  if (order < 2 || order % 2 != 0) throw Error(ErrorCode::InvalidArgument, "BMT order must be even and positive");
  if (order >= taps.size() - 1) throw Error(ErrorCode::InvalidArgument, "BMT order must be below the FIR order");
  const BalancedModel bm = balanced_truncation(taps, order);
  const StateSpace& ss = bm.model;
  const Index r = ss.A.rows();

  Eigen::EigenSolver<MatrixXd> pe(ss.A, false);
  if (pe.info() != Eigen::Success) throw Error(ErrorCode::NumericalBreakdown, "pole eigensolve failed");
  std::vector<Complex> poles;
  for (Index i = 0; i < r; ++i) poles.push_back(pe.eigenvalues()[i]);

  // Invariant zeros: finite generalized eigenvalues of ([A B; C D], [I 0; 0 0]).
  MatrixXd S = MatrixXd::Zero(r + 1, r + 1), E = MatrixXd::Zero(r + 1, r + 1);
  S.topLeftCorner(r, r) = ss.A;
  S.topRightCorner(r, 1) = ss.B;
  S.bottomLeftCorner(1, r) = ss.C;
  S(r, r) = ss.D;
  E.topLeftCorner(r, r).setIdentity();
  Eigen::GeneralizedEigenSolver<MatrixXd> ge(S, E);
  if (ge.info() != Eigen::Success) throw Error(ErrorCode::NumericalBreakdown, "zero eigensolve failed");
  std::vector<Complex> zeros;
  const double scale = std::max(1.0, S.norm());
  for (Index i = 0; i < r + 1; ++i) {
    const Complex a = ge.alphas()[i];
    const double b = ge.betas()[i];
    if (std::abs(b) > 1e-12 * scale) zeros.push_back(a / b);
  }
  // Missing finite zeros sit at infinity; the cap moves them to the origin too.
  while (static_cast<Index>(zeros.size()) < r) zeros.push_back(0.0);
  while (static_cast<Index>(zeros.size()) > r) {
    // Keep the r zeros of smallest modulus; extras come from round-off.
    auto it = std::max_element(zeros.begin(), zeros.end(),
                               [](const Complex& x, const Complex& y) { return std::abs(x) < std::abs(y); });
    zeros.erase(it);
  }
  BmtSeed seed;
  seed.hankel_sv = bm.hankel_sv;
  seed.relocated_zeros = relocate_zeros(zeros, zero_cap);

  // Even order leaves an even number of real roots, so every quadratic is full.
  const std::vector<Biquad> sections = detail::match_sections(detail::pair_roots(poles), detail::pair_roots(zeros));
  seed.cascade = normalize_passband_gain(SosCascade(1.0, sections), pass_lo, pass_hi);
  return seed;
}

}  // namespace iirpl
