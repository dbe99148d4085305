#include "roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iirpl/errors.hpp"

namespace iirpl::detail {

std::vector<Quadratic> pair_roots(std::vector<Complex> roots, double imag_tol) {
  std::vector<Complex> upper;
  std::vector<double> reals;
  for (const Complex& r : roots) {
    if (std::abs(r.imag()) <= imag_tol * std::max(1.0, std::abs(r))) {
      reals.push_back(r.real());
    } else if (r.imag() > 0.0) {
      upper.push_back(r);
    }
  }
  std::vector<Quadratic> out;
  for (const Complex& r : upper) out.push_back({std::norm(r), -2.0 * r.real()});
  // Largest-modulus reals paired together keeps sections well scaled.
  std::sort(reals.begin(), reals.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    out.push_back({reals[i] * reals[i + 1], -(reals[i] + reals[i + 1])});
  }
  if (reals.size() % 2 == 1) out.push_back({0.0, -reals.back()});
  return out;
}

std::vector<Complex> polynomial_roots(const Eigen::VectorXd& coeffs) {
  Eigen::Index lead = 0;
  while (lead < coeffs.size() && coeffs[lead] == 0.0) ++lead;
  const Eigen::Index n = coeffs.size() - lead - 1;
  if (n <= 0) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) comp(0, j) = -coeffs[lead + 1 + j] / coeffs[lead];
  for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NumericalBreakdown, "polynomial root finding failed");
  std::vector<Complex> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

std::vector<Biquad> match_sections(const std::vector<Quadratic>& poles, const std::vector<Quadratic>& zeros) {
  if (poles.size() != zeros.size()) {
    throw Error(ErrorCode::DimensionMismatch, "pole and zero quadratic counts differ");
  }
  // Poles nearest the unit circle pick their zeros first.
  std::vector<std::size_t> order(poles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return poles[a].c0 > poles[b].c0; });
  std::vector<char> used(zeros.size(), 0);
  std::vector<Biquad> out(poles.size());
  for (std::size_t i : order) {
    std::size_t best = zeros.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < zeros.size(); ++j) {
      if (used[j]) continue;
      const double d = std::hypot(zeros[j].c0 - poles[i].c0, zeros[j].c1 - poles[i].c1);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = 1;
    out[i] = Biquad{zeros[best].c0, zeros[best].c1, poles[i].c0, poles[i].c1};
  }
  return out;
}

}  // namespace iirpl::detail
