#pragma once

// Root utilities shared by the seed designers.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "iirpl/sos.hpp"

namespace iirpl::detail {

/// Monic quadratic z^2 + c1 z + c0.
struct Quadratic {
  double c0 = 0.0;
  double c1 = 0.0;
};

/// Groups roots into real quadratics: conjugate pairs first, then real roots
/// two at a time. A leftover real root r yields (c0, c1) = (0, -r).
std::vector<Quadratic> pair_roots(std::vector<Complex> roots, double imag_tol = 1e-9);

/// Roots of sum_i coeffs[i] z^(n-i), leading coefficient first.
std::vector<Complex> polynomial_roots(const Eigen::VectorXd& coeffs);

/// Builds monic sections from pole and zero quadratics (equal counts),
/// matching each pole pair to the nearest remaining zero pair.
std::vector<Biquad> match_sections(const std::vector<Quadratic>& poles, const std::vector<Quadratic>& zeros);

}  // namespace iirpl::detail
