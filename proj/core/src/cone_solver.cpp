#include "iirpl/cone_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <vector>

#include "iirpl/errors.hpp"

namespace iirpl {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Product cone R_+^linear x Q^{d_1} x ... x Q^{d_k}.
struct Cones {
  Index linear = 0;
  std::vector<Index> offset;  // start of each SOC block
  std::vector<Index> dim;     // dimension of each SOC block (>= 2)
  Index total = 0;

  Index degree() const { return linear + static_cast<Index>(dim.size()); }

  VectorXd identity() const {
    VectorXd e = VectorXd::Zero(total);
    e.head(linear).setOnes();
    for (Index off : offset) e[off] = 1.0;
    return e;
  }

  // Smallest t with x + t e in the cone (negative when x is interior).
  double depth(const VectorXd& x) const {
    double t = -kInf;
    for (Index i = 0; i < linear; ++i) t = std::max(t, -x[i]);
    for (std::size_t k = 0; k < dim.size(); ++k) {
      const auto b = x.segment(offset[k], dim[k]);
      t = std::max(t, b.tail(dim[k] - 1).norm() - b[0]);
    }
    return t;
  }

  // Largest alpha with x + alpha dx in the cone.
  double max_step(const VectorXd& x, const VectorXd& dx) const {
    double a = kInf;
    for (Index i = 0; i < linear; ++i) {
      if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
    }
    for (std::size_t k = 0; k < dim.size(); ++k) {
      const auto xs = x.segment(offset[k], dim[k]);
      const auto ds = dx.segment(offset[k], dim[k]);
      const double qa = ds[0] * ds[0] - ds.tail(dim[k] - 1).squaredNorm();
      const double qb = xs[0] * ds[0] - xs.tail(dim[k] - 1).dot(ds.tail(dim[k] - 1));
      const double qc = std::max(0.0, xs[0] * xs[0] - xs.tail(dim[k] - 1).squaredNorm());
      // f(alpha) = qa alpha^2 + 2 qb alpha + qc; first positive root.
      double root = kInf;
      if (std::abs(qa) < 1e-300) {
        if (qb < 0.0) root = -qc / (2.0 * qb);
      } else {
        const double disc = qb * qb - qa * qc;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double q = -(qb + std::copysign(sq, qb));
          for (double r : {q / qa, q != 0.0 ? qc / q : kInf}) {
            if (r > 0.0) root = std::min(root, r);
          }
        }
      }
      // Guard against leaving through the apex into the negative cone.
      if (ds[0] < 0.0) root = std::min(root, -xs[0] / ds[0]);
      a = std::min(a, root);
    }
    return a;
  }

  // u o v (Jordan product).
  VectorXd product(const VectorXd& u, const VectorXd& v) const {
    VectorXd w(total);
    w.head(linear) = u.head(linear).cwiseProduct(v.head(linear));
    for (std::size_t k = 0; k < dim.size(); ++k) {
      const Index o = offset[k], d = dim[k];
      w[o] = u.segment(o, d).dot(v.segment(o, d));
      w.segment(o + 1, d - 1) = u[o] * v.segment(o + 1, d - 1) + v[o] * u.segment(o + 1, d - 1);
    }
    return w;
  }

  // Solves lambda o x = v for x.
  VectorXd divide(const VectorXd& lambda, const VectorXd& v) const {
    VectorXd x(total);
    x.head(linear) = v.head(linear).cwiseQuotient(lambda.head(linear));
    for (std::size_t k = 0; k < dim.size(); ++k) {
      const Index o = offset[k], d = dim[k];
      const auto l1 = lambda.segment(o + 1, d - 1);
      const auto v1 = v.segment(o + 1, d - 1);
      const double l0 = lambda[o];
      const double det = l0 * l0 - l1.squaredNorm();
      const double x0 = (l0 * v[o] - l1.dot(v1)) / det;
      x[o] = x0;
      x.segment(o + 1, d - 1) = (v1 - x0 * l1) / l0;
    }
    return x;
  }

  double inner(const VectorXd& u, const VectorXd& v) const { return u.dot(v); }
};

// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
struct Scaling {
  VectorXd lin;  // diagonal part
  std::vector<double> eta;
  std::vector<VectorXd> w;  // normalized scaling point per SOC block, w' J w = 1
};

Scaling nt_scaling(const Cones& K, const VectorXd& s, const VectorXd& z) {
  Scaling W;
  W.lin = (s.head(K.linear).array() / z.head(K.linear).array()).sqrt();
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const Index o = K.offset[k], d = K.dim[k];
    const auto sb = s.segment(o, d);
    const auto zb = z.segment(o, d);
    const double sn = std::sqrt(std::max(1e-300, sb[0] * sb[0] - sb.tail(d - 1).squaredNorm()));
    const double zn = std::sqrt(std::max(1e-300, zb[0] * zb[0] - zb.tail(d - 1).squaredNorm()));
    const VectorXd sbar = sb / sn;
    const VectorXd zbar = zb / zn;
    const double gamma = std::sqrt(std::max(1e-300, (1.0 + sbar.dot(zbar)) / 2.0));
    VectorXd wb(d);
    wb[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
    wb.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2.0 * gamma);
    W.eta.push_back(std::sqrt(sn / zn));
    W.w.push_back(std::move(wb));
  }
  return W;
}

// W x (inverse = false) or W^{-1} x (inverse = true), applied to every column of X.
MatrixXd apply_scaling(const Cones& K, const Scaling& W, const MatrixXd& X, bool inverse) {
  MatrixXd Y(X.rows(), X.cols());
  if (K.linear > 0) {
    if (inverse) {
      Y.topRows(K.linear) = W.lin.cwiseInverse().asDiagonal() * X.topRows(K.linear);
    } else {
      Y.topRows(K.linear) = W.lin.asDiagonal() * X.topRows(K.linear);
    }
  }
  for (std::size_t k = 0; k < K.dim.size(); ++k) {
    const Index o = K.offset[k], d = K.dim[k];
    const VectorXd& w = W.w[k];
    const double sign = inverse ? -1.0 : 1.0;
    const double scale = inverse ? 1.0 / W.eta[k] : W.eta[k];
    const auto w1 = w.tail(d - 1);
    const auto x0 = X.row(o);
    const auto x1 = X.middleRows(o + 1, d - 1);
    const Eigen::RowVectorXd w1x1 = w1.transpose() * x1;
    Y.row(o) = scale * (w[0] * x0 + sign * w1x1);
    Y.middleRows(o + 1, d - 1) =
        scale * (sign * w1 * x0 + x1 + w1 * (w1x1 / (1.0 + w[0])));
  }
  return Y;
}

VectorXd apply_scaling(const Cones& K, const Scaling& W, const VectorXd& x, bool inverse) {
  return apply_scaling(K, W, MatrixXd(x), inverse).col(0);
}

// Factorization of G' W^{-2} G for the reduced KKT system
//   [0  G'  ] [dx]   [rx]
//   [G -W^2 ] [dz] = [rz]
class KktSolver {
 public:
  KktSolver(const Cones& K, const Scaling& W, const MatrixXd& G) : K_(K), W_(W) {
    Gs_ = apply_scaling(K, W, G, /*inverse=*/true);
    H_ = Gs_.transpose() * Gs_;
    const Index n = H_.rows();
    double reg = 0.0;
    const double base = std::max(1.0, H_.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 6; ++attempt) {
      llt_.compute(H_ + reg * MatrixXd::Identity(n, n));
      if (llt_.info() == Eigen::Success) return;
      reg = reg == 0.0 ? 1e-14 * base : reg * 100.0;
    }
    throw Error(ErrorCode::NumericalBreakdown, "normal-equation matrix is not positive definite");
  }

  void solve(const VectorXd& rx, const VectorXd& rz, VectorXd& dx, VectorXd& dz) const {
    // Work with v = W dz, so the system reads Gs' v = rx, Gs dx - v = W^{-1} rz.
    const VectorXd rs = apply_scaling(K_, W_, rz, true);
    dx = llt_.solve(rx + Gs_.transpose() * rs);
    VectorXd v = Gs_ * dx - rs;
    // Refinement against the unreduced system.
    for (int it = 0; it < 3; ++it) {
      const VectorXd ex = rx - Gs_.transpose() * v;
      const VectorXd ez = rs - (Gs_ * dx - v);
      if (ex.lpNorm<Eigen::Infinity>() + ez.lpNorm<Eigen::Infinity>() == 0.0) break;
      const VectorXd cx = llt_.solve(ex + Gs_.transpose() * ez);
      dx += cx;
      v += Gs_ * cx - ez;
    }
    dz = apply_scaling(K_, W_, v, true);
  }

 private:
  const Cones& K_;
  const Scaling& W_;
  MatrixXd Gs_;
  MatrixXd H_;
  Eigen::LLT<MatrixXd> llt_;
};

struct StandardForm {
  Cones cones;
  MatrixXd G;
  VectorXd h;
  VectorXd c;
  std::vector<Index> free_cols;  // original index of each reduced column
};

StandardForm lower_to_standard(const ConeProgram& p) {
  StandardForm f;
  const Index n = p.num_vars();
  std::vector<char> pinned(static_cast<std::size_t>(n), 0);
  for (Index i : p.pinned) pinned[static_cast<std::size_t>(i)] = 1;
  for (Index j = 0; j < n; ++j) {
    if (!pinned[static_cast<std::size_t>(j)]) f.free_cols.push_back(j);
  }
  const Index nf = static_cast<Index>(f.free_cols.size());
  Index rows = p.num_linear();
  for (const SocBlock& b : p.soc) rows += b.A.rows() + 1;
  f.G = MatrixXd::Zero(rows, nf);
  f.h.resize(rows);
  f.c.resize(nf);
  for (Index j = 0; j < nf; ++j) f.c[j] = p.objective[f.free_cols[static_cast<std::size_t>(j)]];

  f.cones.linear = p.num_linear();
  for (Index i = 0; i < p.num_linear(); ++i) {
    for (Index j = 0; j < nf; ++j) f.G(i, j) = p.lin_A(i, f.free_cols[static_cast<std::size_t>(j)]);
    f.h[i] = p.lin_b[i];
  }
  Index r = p.num_linear();
  for (const SocBlock& b : p.soc) {
    f.cones.offset.push_back(r);
    f.cones.dim.push_back(b.A.rows() + 1);
    // s = [c'u + c0; A u + a] = h - G u
    for (Index j = 0; j < nf; ++j) f.G(r, j) = -b.c[f.free_cols[static_cast<std::size_t>(j)]];
    f.h[r] = b.c0;
    for (Index i = 0; i < b.A.rows(); ++i) {
      for (Index j = 0; j < nf; ++j) f.G(r + 1 + i, j) = -b.A(i, f.free_cols[static_cast<std::size_t>(j)]);
      f.h[r + 1 + i] = b.a[i];
    }
    r += b.A.rows() + 1;
  }
  f.cones.total = rows;
  return f;
}

}  // namespace

const char* to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NearOptimal: return "near_optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIters: return "max_iters";
  }
  return "unknown";
}

Solution InteriorPointSolver::solve(const ConeProgram& program, const SolverOptions& opts) const {
  program.validate();
  const StandardForm f = lower_to_standard(program);
  const Cones& K = f.cones;
  const MatrixXd& G = f.G;
  const VectorXd& h = f.h;
  const VectorXd& c = f.c;
  const Index n = G.cols();
  const Index m = G.rows();
  std::ostream& log = opts.log ? *opts.log : std::clog;

  Solution sol;
  sol.u = VectorXd::Zero(program.num_vars());
  auto expand = [&](const VectorXd& x) {
    VectorXd u = VectorXd::Zero(program.num_vars());
    for (Index j = 0; j < n; ++j) u[f.free_cols[static_cast<std::size_t>(j)]] = x[j];
    return u;
  };

  if (m == 0) {
    // Only pins: bounded iff the free objective is zero.
    sol.status = c.isZero() ? SolveStatus::Optimal : SolveStatus::Unbounded;
    return sol;
  }

  const double resx0 = std::max(1.0, c.norm());
  const double resz0 = std::max(1.0, h.norm());
  const VectorXd e = K.identity();

  // Starting point from the identity-scaled KKT system.
  Scaling W;
  W.lin = VectorXd::Ones(K.linear);
  for (Index d : K.dim) {
    VectorXd w = VectorXd::Zero(d);
    w[0] = 1.0;
    W.eta.push_back(1.0);
    W.w.push_back(std::move(w));
  }
  VectorXd x, z, s;
  {
    KktSolver kkt(K, W, G);
    VectorXd tmp;
    kkt.solve(VectorXd::Zero(n), h, x, tmp);
    s = -tmp;
    VectorXd xd;
    kkt.solve(-c, VectorXd::Zero(m), xd, z);
  }
  const double ts = K.depth(s);
  if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
  const double tz = K.depth(z);
  if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
  double tau = 1.0;
  double kappa = 1.0;

  const double deg = static_cast<double>(K.degree());
  int stalls = 0;

  for (int iter = 0;; ++iter) {
    const VectorXd hrx = -(G.transpose() * z);
    const VectorXd rx = -hrx + c * tau;
    const VectorXd hrz = G * x + s;
    const VectorXd rz = hrz - h * tau;
    const double cx = c.dot(x);
    const double hz = h.dot(z);
    const double rt = kappa + cx + hz;
    const double sz = s.dot(z);
    const double mu = (sz + tau * kappa) / (deg + 1.0);

    const double pcost = cx / tau;
    const double dcost = -hz / tau;
    const double pres = rz.norm() / tau / resz0;
    const double dres = rx.norm() / tau / resx0;
    const double gap = sz / (tau * tau);
    const double relgap = gap / std::max(1.0, std::abs(pcost));
    const double pinfres = hz < 0.0 ? hrx.norm() / resx0 / (-hz) : kInf;
    const double dinfres = cx < 0.0 ? hrz.norm() / resz0 / (-cx) : kInf;

    if (opts.verbose) {
      log << std::setw(3) << iter << std::scientific << std::setprecision(3) << "  pcost " << pcost << "  dcost "
          << dcost << "  gap " << gap << "  pres " << pres << "  dres " << dres << "  mu " << mu << "  k/t "
          << kappa / tau << '\n'
          << std::defaultfloat;
    }

    sol.iterations = iter;
    auto finish_optimal = [&](SolveStatus status) {
      sol.status = status;
      sol.u = expand(x / tau);
      sol.primal_obj = pcost;
      sol.dual_obj = dcost;
      sol.kkt_residuals = {pres, dres, relgap};
      return sol;
    };

    if (pres <= opts.tol && dres <= opts.tol && relgap <= opts.tol) return finish_optimal(SolveStatus::Optimal);
    if (pinfres <= opts.tol) {
      sol.status = SolveStatus::Infeasible;
      sol.u = expand(x / tau);
      sol.primal_obj = kInf;
      sol.dual_obj = kInf;
      sol.kkt_residuals = {pres, pinfres, relgap};
      return sol;
    }
    if (dinfres <= opts.tol) {
      sol.status = SolveStatus::Unbounded;
      sol.u = expand(x / (-cx));
      sol.primal_obj = -kInf;
      sol.dual_obj = -kInf;
      sol.kkt_residuals = {dinfres, dres, relgap};
      return sol;
    }
    const bool near = pres <= opts.near_tol && dres <= opts.near_tol && relgap <= opts.near_tol;
    if (iter >= opts.max_iters || stalls >= 3) {
      if (near) return finish_optimal(SolveStatus::NearOptimal);
      sol.status = SolveStatus::MaxIters;
      sol.u = expand(x / tau);
      sol.primal_obj = pcost;
      sol.dual_obj = dcost;
      sol.kkt_residuals = {pres, dres, relgap};
      return sol;
    }

    W = nt_scaling(K, s, z);
    const VectorXd lambda = apply_scaling(K, W, z, false);
    const VectorXd lambda_sq = K.product(lambda, lambda);
    const KktSolver kkt(K, W, G);

    // Direction for the tau column: K [qx; qz] = [-c; h].
    VectorXd qx, qz;
    kkt.solve(-c, h, qx, qz);
    const double qden = c.dot(qx) + h.dot(qz) - kappa / tau;

    struct Step {
      VectorXd dx, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](double sigma, const VectorXd& comp_rhs, double tk_rhs) {
      // comp_rhs = lambda o (W dz + W^{-1} ds); tk_rhs = kappa dtau + tau dkappa.
      const double eta = 1.0 - sigma;
      const VectorXd xi = K.divide(lambda, comp_rhs);
      const VectorXd wxi = apply_scaling(K, W, xi, false);
      const VectorXd bx = -eta * rx;
      const VectorXd bz = -eta * rz - wxi;
      const double bt = -eta * rt - tk_rhs / tau;
      VectorXd px, pz;
      kkt.solve(bx, bz, px, pz);
      Step d;
      d.dtau = (bt - c.dot(px) - h.dot(pz)) / qden;
      d.dx = px + d.dtau * qx;
      d.dz = pz + d.dtau * qz;
      // Taken from the primal equation so that its residual shrinks exactly;
      // equals W (xi - W dz) up to solve error.
      d.ds = -eta * rz + d.dtau * h - G * d.dx;
      d.dkappa = (tk_rhs - kappa * d.dtau) / tau;
      return d;
    };
    auto step_length = [&](const Step& d) {
      double a = std::min(K.max_step(s, d.ds), K.max_step(z, d.dz));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const Step aff = direction(0.0, -lambda_sq, -tau * kappa);
    const double a_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(std::max(0.0, 1.0 - a_aff), 3);

    const VectorXd ds_scaled = apply_scaling(K, W, aff.ds, true);
    const VectorXd dz_scaled = apply_scaling(K, W, aff.dz, false);
    const VectorXd comp = -lambda_sq - K.product(ds_scaled, dz_scaled) + sigma * mu * e;
    const double tk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Step d = direction(sigma, comp, tk);

    const double alpha = std::min(1.0, 0.99 * step_length(d));
    if (!std::isfinite(alpha)) throw Error(ErrorCode::NumericalBreakdown, "non-finite step length");
    stalls = alpha < 1e-8 ? stalls + 1 : 0;

    const VectorXd xn = x + alpha * d.dx;
    const VectorXd zn = z + alpha * d.dz;
    const VectorXd sn = s + alpha * d.ds;
    const double taun = tau + alpha * d.dtau;
    const double kappan = kappa + alpha * d.dkappa;
    if (!xn.allFinite() || !zn.allFinite() || !sn.allFinite() || !std::isfinite(taun) || !(taun > 0.0)) {
      // Keep the last good iterate and let the exit checks classify it.
      if (near) {
        stalls = 3;
        continue;
      }
      throw Error(ErrorCode::NumericalBreakdown, "iterate became non-finite");
    }
    x = xn;
    z = zn;
    s = sn;
    tau = taun;
    kappa = kappan;
  }
}

Solution solve(const ConeProgram& program, const SolverOptions& opts) {
  return InteriorPointSolver{}.solve(program, opts);
}

}  // namespace iirpl
