#include "iirpl/subproblem.hpp"

#include <algorithm>
#include <string>

#include "iirpl/errors.hpp"

namespace iirpl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LinearizedSystem assemble(const DesignState& state, const FrequencyGrid& grid, double eps_s) {
  const ErrorSamples es = error_functions(state, grid);
  const SosCascade& cas = state.cascade;
  const Index J = static_cast<Index>(cas.size());
  const Index n = 4 * J + 2;

  LinearizedSystem sys;
  sys.gamma = stability_gamma(eps_s);
  sys.C = sys.kappa_g * es.grad_e_g;
  sys.d = sys.kappa_g * es.e_g;
  sys.Dpb = sys.kappa_pb * es.grad_e_pb;
  sys.fpb = sys.kappa_pb * es.e_pb;
  sys.Dsb = sys.kappa_sb * es.grad_h_sb;
  sys.fsb = sys.kappa_sb * es.h_sb;
  sys.Dtb = sys.kappa_tb * es.grad_h_tb;
  sys.ftb = sys.kappa_tb * es.h_tb;

  sys.B = MatrixXd::Zero(3 * J, n);
  sys.b.resize(3 * J);
  const double lim = 1.0 - sys.gamma;
  for (Index m = 0; m < J; ++m) {
    const Biquad& s = cas.sections()[static_cast<std::size_t>(m)];
    const Index r = 3 * m, c0 = 4 * m + 2, c1 = 4 * m + 3;
    sys.B(r, c0) = 1.0;
    sys.B(r + 1, c0) = -1.0;
    sys.B(r + 1, c1) = 1.0;
    sys.B(r + 2, c0) = -1.0;
    sys.B(r + 2, c1) = -1.0;
    sys.b[r] = lim - s.b0;
    sys.b[r + 1] = lim - s.b1 + s.b0;
    sys.b[r + 2] = lim + s.b1 + s.b0;
  }
  for (Index i = 0; i < sys.b.size(); ++i) {
    if (!(sys.b[i] > 0.0)) {
      throw Error(ErrorCode::InfeasibleStart,
                  "section " + std::to_string(i / 3 + 1) + " lies outside the stability triangle");
    }
  }
  for (std::size_t i : cas.pinned_indices()) sys.pinned.push_back(static_cast<Index>(i));
  return sys;
}

ConeProgram lower(const LinearizedSystem& sys, DelayMode mode, const SubproblemCaps& caps,
                  std::span<const Index> pins) {
  const SubproblemLayout L{sys.num_updates()};
  const Index n = L.n;
  auto check_cols = [&](Index cols, Index rows, const char* what) {
    if (rows > 0 && cols != n) {
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has the wrong column count");
    }
  };
  check_cols(sys.C.cols(), sys.C.rows(), "group-delay block");
  check_cols(sys.Dpb.cols(), sys.Dpb.rows(), "passband block");
  check_cols(sys.Dsb.cols(), sys.Dsb.rows(), "stopband block");
  check_cols(sys.Dtb.cols(), sys.Dtb.rows(), "transition block");
  if (sys.C.rows() != sys.d.size() || sys.Dpb.rows() != sys.fpb.size() || sys.Dsb.rows() != sys.fsb.size() ||
      sys.Dtb.rows() != sys.ftb.size() || sys.B.rows() != sys.b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row count does not match right-hand side");
  }

  ConeProgram p;
  p.objective = VectorXd::Zero(L.vars());
  p.objective[L.t()] = 1.0;
  p.objective[L.rlx()] = caps.w_relax;

  const Index np = sys.C.rows(), npb = sys.Dpb.rows(), nb = sys.B.rows();
  const Index rows = 2 * np + 2 * npb + nb + 1;
  p.lin_A = MatrixXd::Zero(rows, L.vars());
  p.lin_b = VectorXd::Zero(rows);
  Index r = 0;
  // +-(C delta + d) <= t
  for (Index i = 0; i < np; ++i) {
    p.lin_A.row(r).head(n) = sys.C.row(i);
    p.lin_A(r, L.t()) = -1.0;
    p.lin_b[r++] = -sys.d[i];
    p.lin_A.row(r).head(n) = -sys.C.row(i);
    p.lin_A(r, L.t()) = -1.0;
    p.lin_b[r++] = sys.d[i];
  }
  // +-(Dpb delta + fpb) <= Gamma_pb + delta_rlx
  for (Index i = 0; i < npb; ++i) {
    p.lin_A.row(r).head(n) = sys.Dpb.row(i);
    p.lin_A(r, L.rlx()) = -1.0;
    p.lin_b[r++] = caps.gamma_pb - sys.fpb[i];
    p.lin_A.row(r).head(n) = -sys.Dpb.row(i);
    p.lin_A(r, L.rlx()) = -1.0;
    p.lin_b[r++] = caps.gamma_pb + sys.fpb[i];
  }
  // B delta <= b
  for (Index i = 0; i < nb; ++i) {
    p.lin_A.row(r).head(n) = sys.B.row(i);
    p.lin_b[r++] = sys.b[i] - caps.stability_backoff;
  }
  // delta_rlx >= 0
  p.lin_A(r, L.rlx()) = -1.0;
  p.lin_b[r++] = 0.0;

  auto add_response_cones = [&](const Eigen::MatrixXcd& D, const Eigen::VectorXcd& f, double cap) {
    for (Index i = 0; i < D.rows(); ++i) {
      SocBlock blk;
      blk.A = MatrixXd::Zero(2, L.vars());
      blk.A.row(0).head(n) = D.row(i).real();
      blk.A.row(1).head(n) = D.row(i).imag();
      blk.a = VectorXd(2);
      blk.a << f[i].real(), f[i].imag();
      blk.c = VectorXd::Zero(L.vars());
      if (caps.relax_stopband) blk.c[L.rlx()] = 1.0;
      blk.c0 = cap;
      p.soc.push_back(std::move(blk));
    }
  };
  add_response_cones(sys.Dsb, sys.fsb, caps.gamma_sb);
  if (caps.gamma_tb) add_response_cones(sys.Dtb, sys.ftb, *caps.gamma_tb);

  // ||delta|| <= Gamma_small + delta_rlx
  SocBlock trust;
  trust.A = MatrixXd::Zero(n, L.vars());
  trust.A.leftCols(n).setIdentity();
  trust.a = VectorXd::Zero(n);
  trust.c = VectorXd::Zero(L.vars());
  trust.c[L.rlx()] = 1.0;
  trust.c0 = caps.gamma_small;
  p.soc.push_back(std::move(trust));

  std::vector<Index> pinned(sys.pinned.begin(), sys.pinned.end());
  pinned.insert(pinned.end(), pins.begin(), pins.end());
  if (mode == DelayMode::Fixed) pinned.push_back(n - 1);
  std::sort(pinned.begin(), pinned.end());
  pinned.erase(std::unique(pinned.begin(), pinned.end()), pinned.end());
  for (Index i : pinned) {
    if (i < 0 || i >= n) throw Error(ErrorCode::DimensionMismatch, "pinned index outside the update vector");
  }
  p.pinned = std::move(pinned);
  p.validate();
  return p;
}

}  // namespace iirpl
