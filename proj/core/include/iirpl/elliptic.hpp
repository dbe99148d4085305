#pragma once

#include <complex>
#include <vector>

#include "iirpl/sos.hpp"

namespace iirpl {

enum class FilterKind { Lowpass, Highpass, Bandpass };

const char* to_string(FilterKind kind) noexcept;

/// Edges in radians/sample. Lowpass and highpass: {passband edge, stopband
/// edge}. Bandpass: {low stopband, low passband, high passband, high stopband}.
struct EllipticSpec {
  FilterKind kind = FilterKind::Lowpass;
  std::vector<double> edges;
  double ripple_db = 0.0;
  double atten_db = 0.0;
  int max_order = 50;
};

struct EllipticDesign {
  SosCascade cascade;
  int order = 0;                 // digital filter order
  int prototype_order = 0;       // analog lowpass prototype order
  double achieved_atten_db = 0;  // stopband attenuation after keeping the edges fixed
};

/// Minimum order elliptic filter meeting the spec. Lowpass and highpass
/// orders are rounded up to even; bandpass order is twice the prototype
/// order. The passband peak gain is 1 (equiripple between 1 and
/// 10^(-ripple/20)). Throws InfeasibleSpec when the order would exceed
/// max_order or the edges are inconsistent.
EllipticDesign design_elliptic_full(const EllipticSpec& spec);
SosCascade design_elliptic(const EllipticSpec& spec);

namespace elliptic {

/// Complete elliptic integral K(k) and its complement K'(k) = K(sqrt(1-k^2)).
double ellipk(double k);
double ellipk_complement(double k);
/// Jacobi cd(uK, k) and sn(uK, k) for complex normalized argument u.
std::complex<double> cde(std::complex<double> u, double k);
std::complex<double> sne(std::complex<double> u, double k);
/// Inverses: u with cd(uK, k) = w, resp. sn(uK, k) = w.
std::complex<double> acde(std::complex<double> w, double k);
std::complex<double> asne(std::complex<double> w, double k);

}  // namespace elliptic

}  // namespace iirpl
