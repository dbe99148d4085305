#include "iirpl/elliptic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "iirpl/errors.hpp"
#include "roots.hpp"

namespace iirpl {

using std::complex;

namespace elliptic {

namespace {

constexpr double kPi = std::numbers::pi;

// Descending Landen moduli of k, stopped once they underflow the precision.
std::vector<double> landen(double k) {
  std::vector<double> v;
  for (int n = 0; n < 64 && k > 1e-17; ++n) {
    const double kp = std::sqrt((1.0 - k) * (1.0 + k));
    k = std::pow(k / (1.0 + kp), 2);
    v.push_back(k);
  }
  return v;
}

complex<double> ascend(complex<double> w, const std::vector<double>& v) {
  for (auto it = v.rbegin(); it != v.rend(); ++it) w = (1.0 + *it) * w / (1.0 + *it * w * w);
  return w;
}

}  // namespace

double ellipk(double k) {
  if (k >= 1.0) return std::numeric_limits<double>::infinity();
  double K = kPi / 2.0;
  for (double vn : landen(k)) K *= 1.0 + vn;
  return K;
}

double ellipk_complement(double k) { return ellipk(std::sqrt((1.0 - k) * (1.0 + k))); }

complex<double> cde(complex<double> u, double k) { return ascend(std::cos(u * kPi / 2.0), landen(k)); }

complex<double> sne(complex<double> u, double k) { return ascend(std::sin(u * kPi / 2.0), landen(k)); }

complex<double> acde(complex<double> w, double k) {
  const std::vector<double> v = landen(k);
  double prev = k;
  for (double vn : v) {
    w = w / (1.0 + std::sqrt(1.0 - w * w * prev * prev)) * 2.0 / (1.0 + vn);
    prev = vn;
  }
  return 2.0 / kPi * std::acos(w);
}

complex<double> asne(complex<double> w, double k) { return 1.0 - acde(w, k); }

}  // namespace elliptic

const char* to_string(FilterKind kind) noexcept {
  switch (kind) {
    case FilterKind::Lowpass: return "lowpass";
    case FilterKind::Highpass: return "highpass";
    case FilterKind::Bandpass: return "bandpass";
  }
  return "unknown";
}

namespace {

constexpr double kPi = std::numbers::pi;

struct Prewarp {
  double wp = 0.0;  // analog passband edge
  double ws = 0.0;  // analog stopband edge
  double c = 0.0;   // bandpass centre parameter
};

Prewarp prewarp(const EllipticSpec& s) {
  auto bad = [](const std::string& m) { return Error(ErrorCode::InfeasibleSpec, m); };
  for (double e : s.edges) {
    if (!(e > 0.0 && e < kPi)) throw bad("band edges must lie strictly inside (0, pi)");
  }
  Prewarp p;
  switch (s.kind) {
    case FilterKind::Lowpass:
      if (s.edges.size() != 2 || !(s.edges[0] < s.edges[1])) throw bad("lowpass needs passband edge < stopband edge");
      p.wp = std::tan(s.edges[0] / 2.0);
      p.ws = std::tan(s.edges[1] / 2.0);
      break;
    case FilterKind::Highpass:
      if (s.edges.size() != 2 || !(s.edges[1] < s.edges[0])) throw bad("highpass needs stopband edge < passband edge");
      p.wp = 1.0 / std::tan(s.edges[0] / 2.0);
      p.ws = 1.0 / std::tan(s.edges[1] / 2.0);
      break;
    case FilterKind::Bandpass: {
      const auto& e = s.edges;
      if (e.size() != 4 || !(e[0] < e[1] && e[1] < e[2] && e[2] < e[3])) {
        throw bad("bandpass needs four increasing edges");
      }
      p.c = std::sin(e[1] + e[2]) / (std::sin(e[1]) + std::sin(e[2]));
      auto omega = [&](double w) { return (p.c - std::cos(w)) / std::sin(w); };
      p.wp = std::abs(omega(e[1]));
      p.ws = std::min(std::abs(omega(e[0])), std::abs(omega(e[3])));
      break;
    }
  }
  if (!(s.ripple_db > 0.0 && s.atten_db > 0.0)) throw bad("ripple and attenuation must be positive");
  return p;
}

// Maps a root of the actual-scale analog prototype to digital roots.
std::vector<complex<double>> to_digital(FilterKind kind, const Prewarp& pw, complex<double> P) {
  switch (kind) {
    case FilterKind::Lowpass: return {(1.0 + P) / (1.0 - P)};
    case FilterKind::Highpass: return {(P + 1.0) / (P - 1.0)};
    case FilterKind::Bandpass: {
      const complex<double> sq = std::sqrt(pw.c * pw.c - 1.0 + P * P);
      return {(pw.c + sq) / (1.0 - P), (pw.c - sq) / (1.0 - P)};
    }
  }
  return {};
}

std::vector<complex<double>> zeros_at_infinity(FilterKind kind) {
  switch (kind) {
    case FilterKind::Lowpass: return {-1.0};
    case FilterKind::Highpass: return {1.0};
    case FilterKind::Bandpass: return {1.0, -1.0};
  }
  return {};
}

}  // namespace

EllipticDesign design_elliptic_full(const EllipticSpec& spec) {
  using elliptic::ellipk;
  using elliptic::ellipk_complement;
  using elliptic::sne;
  using elliptic::cde;
  using elliptic::asne;
  const Prewarp pw = prewarp(spec);
  const double k = pw.wp / pw.ws;
  if (!(k > 0.0 && k < 1.0)) throw Error(ErrorCode::InfeasibleSpec, "transition band has no width");
  const double ep = std::sqrt(std::pow(10.0, spec.ripple_db / 10.0) - 1.0);
  const double es = std::sqrt(std::pow(10.0, spec.atten_db / 10.0) - 1.0);
  const double k1 = ep / es;

  const double exact = ellipk(k) * ellipk_complement(k1) / (ellipk_complement(k) * ellipk(k1));
  int N = static_cast<int>(std::ceil(exact - 1e-9));
  if (N < 1) N = 1;
  if (spec.kind != FilterKind::Bandpass && N % 2 == 1) ++N;
  const int total = spec.kind == FilterKind::Bandpass ? 2 * N : N;
  if (total > spec.max_order) {
    throw Error(ErrorCode::InfeasibleSpec, "elliptic order " + std::to_string(total) + " exceeds the cap of " +
                                               std::to_string(spec.max_order));
  }

  // Keep the edges and let the stopband attenuation absorb the rounding.
  const int L = N / 2;
  const bool odd = N % 2 == 1;
  double k1_new = std::pow(k, N);
  for (int i = 1; i <= L; ++i) k1_new *= std::pow(sne((2.0 * i - 1.0) / N, k).real(), 4);

  std::vector<complex<double>> poles, zeros;
  auto add = [&](std::vector<complex<double>>& dst, complex<double> s_norm) {
    for (const complex<double>& z : to_digital(spec.kind, pw, pw.wp * s_norm)) dst.push_back(z);
  };
  const complex<double> j(0.0, 1.0);
  const double v0 = (-j * asne(j / ep, k1_new) / static_cast<double>(N)).real();
  for (int i = 1; i <= L; ++i) {
    const double u = (2.0 * i - 1.0) / N;
    const complex<double> zero = j / (k * cde(u, k));
    const complex<double> pole = j * cde(complex<double>(u, -v0), k);
    add(zeros, zero);
    add(zeros, std::conj(zero));
    add(poles, pole);
    add(poles, std::conj(pole));
  }
  if (odd) {
    add(poles, complex<double>((j * sne(j * v0, k)).real(), 0.0));
    for (const complex<double>& z : zeros_at_infinity(spec.kind)) zeros.push_back(z);
  }

  const std::vector<Biquad> sections = detail::match_sections(detail::pair_roots(poles), detail::pair_roots(zeros));
  double ref = 0.0;
  switch (spec.kind) {
    case FilterKind::Lowpass: ref = 0.0; break;
    case FilterKind::Highpass: ref = kPi; break;
    case FilterKind::Bandpass: ref = std::acos(pw.c); break;
  }
  const double target = odd ? 1.0 : 1.0 / std::sqrt(1.0 + ep * ep);
  const double unit = std::abs(eval_response(SosCascade(1.0, sections), ref));

  EllipticDesign d;
  d.cascade = SosCascade(target / unit, sections);
  d.order = total;
  d.prototype_order = N;
  d.achieved_atten_db = 10.0 * std::log10(1.0 + std::pow(ep / k1_new, 2));
  return d;
}

SosCascade design_elliptic(const EllipticSpec& spec) { return design_elliptic_full(spec).cascade; }

}  // namespace iirpl
