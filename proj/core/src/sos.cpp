#include "iirpl/sos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iirpl/errors.hpp"
#include "iirpl/sampling.hpp"

namespace iirpl {

namespace {

constexpr double kDegenerate = 1e-14;

// Partials of alpha/beta for one quadratic q0 + q1 z + z^2, in the cos(omega)
// parametrization. Returns alpha/beta and fills d/dq0, d/dq1.
double delay_ratio(double q0, double q1, double c, double& d_q0, double& d_q1) {
  const double alpha = 1.0 - q0 * q0 + q1 * (1.0 - q0) * c;
  const double beta = q0 * q0 + q1 * q1 + 1.0 + 2.0 * q0 * (2.0 * c * c - 1.0) + 2.0 * q1 * (q0 + 1.0) * c;
  if (std::abs(beta) < kDegenerate) {
    throw Error(ErrorCode::DegenerateSection,
                "quadratic with coefficients (" + std::to_string(q0) + ", " + std::to_string(q1) +
                    ") vanishes on the unit circle");
  }
  const double dalpha_q0 = -2.0 * q0 - q1 * c;
  const double dalpha_q1 = (1.0 - q0) * c;
  const double dbeta_q0 = 2.0 * q0 + 2.0 * (2.0 * c * c - 1.0) + 2.0 * q1 * c;
  const double dbeta_q1 = 2.0 * q1 + 2.0 * (q0 + 1.0) * c;
  const double inv = 1.0 / beta;
  d_q0 = (dalpha_q0 * beta - alpha * dbeta_q0) * inv * inv;
  d_q1 = (dalpha_q1 * beta - alpha * dbeta_q1) * inv * inv;
  return alpha * inv;
}

double delay_ratio(double q0, double q1, double c) {
  double unused0 = 0.0;
  double unused1 = 0.0;
  return delay_ratio(q0, q1, c, unused0, unused1);
}

void check_omega(double omega) {
  if (!std::isfinite(omega)) {
    throw Error(ErrorCode::InvalidArgument, "frequency must be finite");
  }
}

struct SectionValues {
  std::vector<Complex> num;
  std::vector<Complex> den;
};

SectionValues section_values(const SosCascade& cascade, Complex z) {
  SectionValues v;
  v.num.reserve(cascade.size());
  v.den.reserve(cascade.size());
  const Complex z2 = z * z;
  for (std::size_t m = 0; m < cascade.size(); ++m) {
    const Biquad& s = cascade.sections()[m];
    const Complex d = s.b0 + s.b1 * z + z2;
    if (std::abs(d) < kDegenerate) {
      throw Error(ErrorCode::PoleOnGrid, "section " + std::to_string(m) + " has a pole on the unit circle");
    }
    v.num.push_back(s.a0 + s.a1 * z + z2);
    v.den.push_back(d);
  }
  return v;
}

Eigen::VectorXcd response_gradient(const SosCascade& cascade, Complex z, const SectionValues& v, Complex h) {
  const std::size_t J = cascade.size();
  Eigen::VectorXcd g(4 * J + 1);
  // prefix[m] = prod_{i<m} r_i, suffix[m] = prod_{i>=m} r_i; avoids dividing by N_m,
  // which vanishes at stopband zeros on the unit circle.
  std::vector<Complex> prefix(J + 1, Complex(1.0, 0.0));
  std::vector<Complex> suffix(J + 1, Complex(1.0, 0.0));
  for (std::size_t m = 0; m < J; ++m) prefix[m + 1] = prefix[m] * (v.num[m] / v.den[m]);
  for (std::size_t m = J; m-- > 0;) suffix[m] = suffix[m + 1] * (v.num[m] / v.den[m]);
  for (std::size_t m = 0; m < J; ++m) {
    const Complex others = cascade.h0() * prefix[m] * suffix[m + 1];
    const Complex inv_d = 1.0 / v.den[m];
    g[4 * m + 0] = others * inv_d;
    g[4 * m + 1] = others * z * inv_d;
    g[4 * m + 2] = -h * inv_d;
    g[4 * m + 3] = -h * z * inv_d;
  }
  g[4 * J] = prefix[J];
  return g;
}

}  // namespace

double stability_gamma(double eps_s) {
  const double r = 1.0 - eps_s;
  return 1.0 - r * r;
}

bool in_stability_triangle(const Biquad& s, double gamma, double slack) {
  const double lim = 1.0 - gamma + slack;
  return s.b0 <= lim && s.b1 - s.b0 <= lim && -s.b1 - s.b0 <= lim;
}

double max_pole_radius(const Biquad& s) {
  const double disc = s.b1 * s.b1 - 4.0 * s.b0;
  if (disc < 0.0) return std::sqrt(s.b0);
  const double sq = std::sqrt(disc);
  // Stable form of the quadratic roots.
  const double q = -0.5 * (s.b1 + std::copysign(sq, s.b1));
  if (q == 0.0) return 0.0;
  const double r1 = std::abs(q);
  const double r2 = std::abs(s.b0 / q);
  return std::max(r1, r2);
}

SosCascade::SosCascade(double h0, std::vector<Biquad> sections)
    : SosCascade(h0, std::move(sections), {}) {}

SosCascade::SosCascade(double h0, std::vector<Biquad> sections, std::vector<PinMask> pins)
    : h0_(h0), sections_(std::move(sections)), pins_(std::move(pins)) {
  if (!(h0_ > 0.0) || !std::isfinite(h0_)) {
    throw Error(ErrorCode::InvalidArgument, "cascade gain must be positive and finite");
  }
  if (pins_.empty()) pins_.resize(sections_.size());
  if (pins_.size() != sections_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "pin mask count differs from section count");
  }
  for (const Biquad& s : sections_) {
    if (!std::isfinite(s.a0) || !std::isfinite(s.a1) || !std::isfinite(s.b0) || !std::isfinite(s.b1)) {
      throw Error(ErrorCode::InvalidArgument, "section coefficients must be finite");
    }
  }
}

int SosCascade::order() const noexcept {
  int n = 0;
  for (const PinMask& p : pins_) n += p.b0 ? 1 : 2;
  return n;
}

Eigen::VectorXd SosCascade::flatten() const {
  Eigen::VectorXd c(coefficient_count());
  for (std::size_t m = 0; m < sections_.size(); ++m) {
    c[4 * m + 0] = sections_[m].a0;
    c[4 * m + 1] = sections_[m].a1;
    c[4 * m + 2] = sections_[m].b0;
    c[4 * m + 3] = sections_[m].b1;
  }
  c[4 * sections_.size()] = h0_;
  return c;
}

SosCascade SosCascade::unflatten(const Eigen::VectorXd& c, std::vector<PinMask> pins) {
  if (c.size() < 1 || (c.size() - 1) % 4 != 0) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient vector length must be 4J + 1");
  }
  const std::size_t J = static_cast<std::size_t>(c.size() - 1) / 4;
  std::vector<Biquad> sections(J);
  for (std::size_t m = 0; m < J; ++m) {
    sections[m] = {c[4 * m + 0], c[4 * m + 1], c[4 * m + 2], c[4 * m + 3]};
  }
  return SosCascade(c[4 * J], std::move(sections), std::move(pins));
}

std::vector<std::size_t> SosCascade::pinned_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < pins_.size(); ++m) {
    if (pins_[m].a0) out.push_back(4 * m + 0);
    if (pins_[m].a1) out.push_back(4 * m + 1);
    if (pins_[m].b0) out.push_back(4 * m + 2);
    if (pins_[m].b1) out.push_back(4 * m + 3);
  }
  return out;
}

SosCascade SosCascade::with_gain(double h0) const { return SosCascade(h0, sections_, pins_); }

SosCascade SosCascade::appended(const SosCascade& other) const {
  std::vector<Biquad> s = sections_;
  std::vector<PinMask> p = pins_;
  s.insert(s.end(), other.sections_.begin(), other.sections_.end());
  p.insert(p.end(), other.pins_.begin(), other.pins_.end());
  return SosCascade(h0_ * other.h0_, std::move(s), std::move(p));
}

double SosCascade::max_pole_radius() const {
  double r = 0.0;
  for (const Biquad& s : sections_) r = std::max(r, iirpl::max_pole_radius(s));
  return r;
}

bool SosCascade::is_stable(double gamma) const {
  return std::all_of(sections_.begin(), sections_.end(),
                     [gamma](const Biquad& s) { return in_stability_triangle(s, gamma); });
}

Eigen::VectorXd DesignState::to_vector() const {
  const Eigen::VectorXd c = cascade.flatten();
  Eigen::VectorXd x(c.size() + 1);
  x.head(c.size()) = c;
  x[c.size()] = tau;
  return x;
}

DesignState DesignState::from_vector(const Eigen::VectorXd& x, std::vector<PinMask> pins, int iteration) {
  if (x.size() < 2) throw Error(ErrorCode::DimensionMismatch, "state vector too short");
  DesignState s;
  s.cascade = SosCascade::unflatten(x.head(x.size() - 1), std::move(pins));
  s.tau = x[x.size() - 1];
  s.iteration = iteration;
  return s;
}

Complex eval_response(const SosCascade& cascade, double omega) {
  check_omega(omega);
  const Complex z = std::polar(1.0, omega);
  const SectionValues v = section_values(cascade, z);
  Complex h(cascade.h0(), 0.0);
  for (std::size_t m = 0; m < cascade.size(); ++m) h *= v.num[m] / v.den[m];
  return h;
}

double eval_group_delay(const SosCascade& cascade, double omega) {
  check_omega(omega);
  const double c = std::cos(omega);
  double gd = 0.0;
  for (const Biquad& s : cascade.sections()) {
    gd += -delay_ratio(s.a0, s.a1, c) + delay_ratio(s.b0, s.b1, c);
  }
  return gd;
}

Gradients gradients(const SosCascade& cascade, double omega) {
  const ResponseSample r = sample(cascade, omega);
  return {r.grad_h, r.grad_gd};
}

ResponseSample sample(const SosCascade& cascade, double omega) {
  check_omega(omega);
  const std::size_t J = cascade.size();
  const Complex z = std::polar(1.0, omega);
  const SectionValues v = section_values(cascade, z);

  ResponseSample out;
  out.omega = omega;
  out.h = Complex(cascade.h0(), 0.0);
  for (std::size_t m = 0; m < J; ++m) out.h *= v.num[m] / v.den[m];
  out.grad_h = response_gradient(cascade, z, v, out.h);

  const double c = std::cos(omega);
  out.grad_gd = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(4 * J + 1));
  for (std::size_t m = 0; m < J; ++m) {
    const Biquad& s = cascade.sections()[m];
    double dn0 = 0.0, dn1 = 0.0, dd0 = 0.0, dd1 = 0.0;
    out.gd += -delay_ratio(s.a0, s.a1, c, dn0, dn1) + delay_ratio(s.b0, s.b1, c, dd0, dd1);
    out.grad_gd[4 * m + 0] = -dn0;
    out.grad_gd[4 * m + 1] = -dn1;
    out.grad_gd[4 * m + 2] = dd0;
    out.grad_gd[4 * m + 3] = dd1;
  }
  return out;
}

ErrorSamples error_functions(const DesignState& state, const FrequencyGrid& grid) {
  const SosCascade& cascade = state.cascade;
  const Eigen::Index n = static_cast<Eigen::Index>(cascade.coefficient_count()) + 1;
  if (grid.passband.empty() && grid.stopband.empty() && grid.transition.empty()) {
    throw Error(ErrorCode::InvalidArgument, "frequency grid is empty");
  }

  ErrorSamples e;
  const Eigen::Index np = static_cast<Eigen::Index>(grid.passband.size());
  e.pass_omega = grid.passband;
  e.e_g.resize(np);
  e.grad_e_g.resize(np, n);
  e.e_pb.resize(np);
  e.grad_e_pb.resize(np, n);
  for (Eigen::Index i = 0; i < np; ++i) {
    const ResponseSample r = sample(cascade, grid.passband[static_cast<std::size_t>(i)]);
    e.e_g[i] = r.gd - state.tau;
    e.grad_e_g.row(i).head(n - 1) = r.grad_gd.transpose();
    e.grad_e_g(i, n - 1) = -1.0;
    e.e_pb[i] = std::norm(r.h) - 1.0;
    e.grad_e_pb.row(i).head(n - 1) = (2.0 * (std::conj(r.h) * r.grad_h.array()).real()).matrix().transpose();
    e.grad_e_pb(i, n - 1) = 0.0;
  }

  auto fill_complex = [&](const std::vector<double>& omegas, Eigen::VectorXcd& h, Eigen::MatrixXcd& g) {
    const Eigen::Index k = static_cast<Eigen::Index>(omegas.size());
    h.resize(k);
    g = Eigen::MatrixXcd::Zero(k, n);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double w = omegas[static_cast<std::size_t>(i)];
      const Complex z = std::polar(1.0, w);
      const SectionValues v = section_values(cascade, z);
      Complex hv(cascade.h0(), 0.0);
      for (std::size_t m = 0; m < cascade.size(); ++m) hv *= v.num[m] / v.den[m];
      h[i] = hv;
      g.row(i).head(n - 1) = response_gradient(cascade, z, v, hv).transpose();
    }
  };
  e.stop_omega = grid.stopband;
  fill_complex(grid.stopband, e.h_sb, e.grad_h_sb);
  e.trans_omega = grid.transition;
  fill_complex(grid.transition, e.h_tb, e.grad_h_tb);
  return e;
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::PoleOnGrid: return "PoleOnGrid";
    case ErrorCode::DegenerateSection: return "DegenerateSection";
    case ErrorCode::BandTooNarrow: return "BandTooNarrow";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::SubproblemFailed: return "SubproblemFailed";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace iirpl
