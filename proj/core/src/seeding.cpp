#include "iirpl/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "iirpl/errors.hpp"

namespace iirpl {

namespace {
constexpr double kPi = std::numbers::pi;
}

SosCascade normalize_passband_gain(const SosCascade& cascade, double lo, double hi) {
  constexpr int kPoints = 1024;
  double gmax = 0.0, gmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kPoints; ++i) {
    const double w = lo + (hi - lo) * i / (kPoints - 1);
    const double g = std::norm(eval_response(cascade, w));
    gmax = std::max(gmax, g);
    gmin = std::min(gmin, g);
  }
  if (!(gmax + gmin > 0.0)) throw Error(ErrorCode::InvalidArgument, "passband gain vanishes");
  return cascade.with_gain(cascade.h0() * std::sqrt(2.0 / (gmax + gmin)));
}

std::vector<double> allpass_centres(int M, double lo, double hi) {
  std::vector<double> w;
  for (int k = 0; k < M; ++k) w.push_back(lo + (hi - lo) * (k + 0.5) / M);
  return w;
}

SosCascade augment_allpass(const SosCascade& base, int M, double lo, double hi, double r) {
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "allpass radius must lie in (0, 1)");
  if (M < 0) throw Error(ErrorCode::InvalidArgument, "section count must be non-negative");
  std::vector<Biquad> extra;
  for (double w : allpass_centres(M, lo, hi)) {
    extra.push_back(Biquad{1.0 / (r * r), -2.0 * std::cos(w) / r, r * r, -2.0 * r * std::cos(w)});
  }
  return normalize_passband_gain(base.appended(SosCascade(1.0, extra)), lo, hi);
}

StartDelays start_delays(const SosCascade& init, std::span<const double> passband) {
  if (passband.empty()) throw Error(ErrorCode::InvalidArgument, "empty passband grid");
  StartDelays d;
  std::vector<double> gd;
  for (double w : passband) gd.push_back(eval_group_delay(init, w));
  d.tau_max = *std::max_element(gd.begin(), gd.end());
  d.tau_min = *std::min_element(gd.begin(), gd.end());
  if (passband.size() == 1) {
    d.tau_init = gd[0];
    return d;
  }
  double area = 0.0;
  for (std::size_t i = 1; i < gd.size(); ++i) area += 0.5 * (gd[i] + gd[i - 1]) * (passband[i] - passband[i - 1]);
  d.tau_init = area / (passband.back() - passband.front());
  return d;
}

Eigen::VectorXd design_fir_linear_phase(double tau_pr, FilterKind kind, std::span<const double> edges) {
  if (!(tau_pr > 0.0)) throw Error(ErrorCode::InvalidArgument, "prescribed delay must be positive");
  const int m = static_cast<int>(std::ceil(tau_pr));
  const int L = 2 * m + 1;
  // Ideal lowpass with cutoff wc, centred on m.
  auto lowpass = [&](double wc, int n) { return n == m ? wc / kPi : std::sin(wc * (n - m)) / (kPi * (n - m)); };
  std::vector<double> cut;
  switch (kind) {
    case FilterKind::Lowpass:
    case FilterKind::Highpass:
      if (edges.size() != 2) throw Error(ErrorCode::InvalidArgument, "two edges expected");
      cut = {0.5 * (edges[0] + edges[1])};
      break;
    case FilterKind::Bandpass:
      if (edges.size() != 4) throw Error(ErrorCode::InvalidArgument, "four edges expected");
      cut = {0.5 * (edges[0] + edges[1]), 0.5 * (edges[2] + edges[3])};
      break;
  }
  Eigen::VectorXd h(L);
  for (int n = 0; n <= m; ++n) {
    double ideal = 0.0;
    switch (kind) {
      case FilterKind::Lowpass: ideal = lowpass(cut[0], n); break;
      case FilterKind::Highpass: ideal = (n == m ? 1.0 : 0.0) - lowpass(cut[0], n); break;
      case FilterKind::Bandpass: ideal = lowpass(cut[1], n) - lowpass(cut[0], n); break;
    }
    const double window = 0.54 - 0.46 * std::cos(2.0 * kPi * n / (L - 1));
    h[n] = ideal * window;
    h[L - 1 - n] = h[n];
  }
  return h;
}

}  // namespace iirpl
