#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "iirpl/elliptic.hpp"
#include "iirpl/sos.hpp"

namespace iirpl {

/// Scales h0 so the squared passband magnitude over [lo, hi] is centred on
/// one: max|H|^2 + min|H|^2 = 2 on a 1024-point uniform grid.
SosCascade normalize_passband_gain(const SosCascade& cascade, double lo, double hi);

/// Appends M allpass-shaped sections with poles r e^{+-j w_k} and zeros
/// r^{-1} e^{+-j w_k}; w_k are the midpoints of M equal subintervals of
/// [lo, hi]. The gain is then renormalized with normalize_passband_gain.
SosCascade augment_allpass(const SosCascade& base, int M, double lo, double hi, double r = 0.8);

/// Midpoint frequencies used by augment_allpass.
std::vector<double> allpass_centres(int M, double lo, double hi);

struct StartDelays {
  double tau_init = 0.0;  // passband average of the group delay
  double tau_max = 0.0;
  double tau_min = 0.0;
};

/// Trapezoidal average and extrema of the group delay over sorted passband
/// frequencies.
StartDelays start_delays(const SosCascade& init, std::span<const double> passband);

/// Odd-length Hamming-windowed linear-phase FIR with 2 ceil(tau_pr) + 1
/// taps. The ideal response switches at the midpoint of each transition band.
Eigen::VectorXd design_fir_linear_phase(double tau_pr, FilterKind kind, std::span<const double> edges);

}  // namespace iirpl
