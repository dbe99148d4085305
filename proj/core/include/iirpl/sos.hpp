#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace iirpl {

using Complex = std::complex<double>;

/// One second-order section (a0 + a1 z + z^2) / (b0 + b1 z + z^2).
struct Biquad {
  double a0 = 0.0;
  double a1 = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;

  bool operator==(const Biquad&) const = default;
};

/// Flags for coefficients held at zero (odd-order designs pin a0 and b0).
struct PinMask {
  bool a0 = false;
  bool a1 = false;
  bool b0 = false;
  bool b1 = false;

  bool operator==(const PinMask&) const = default;
};

/// Maps the pole radius margin eps_s onto the triangle margin 1 - (1 - eps_s)^2.
double stability_gamma(double eps_s);

/// True when (b0, b1) lies inside the stability triangle shrunk by gamma.
bool in_stability_triangle(const Biquad& section, double gamma, double slack = 0.0);

/// Largest root modulus of z^2 + b1 z + b0.
double max_pole_radius(const Biquad& section);

/// H(z) = h0 * prod (a0m + a1m z + z^2) / (b0m + b1m z + z^2).
///
/// The flattened coefficient vector is laid out as
/// [a01 a11 b01 b11 ... a0J a1J b0J b1J h0], length 4J + 1.
class SosCascade {
 public:
  SosCascade() = default;
  explicit SosCascade(double h0, std::vector<Biquad> sections = {});
  SosCascade(double h0, std::vector<Biquad> sections, std::vector<PinMask> pins);

  double h0() const noexcept { return h0_; }
  const std::vector<Biquad>& sections() const noexcept { return sections_; }
  const std::vector<PinMask>& pins() const noexcept { return pins_; }
  std::size_t size() const noexcept { return sections_.size(); }

  /// Denominator degree: 2J minus sections whose b0 is pinned.
  int order() const noexcept;

  std::size_t coefficient_count() const noexcept { return 4 * sections_.size() + 1; }

  Eigen::VectorXd flatten() const;
  static SosCascade unflatten(const Eigen::VectorXd& c, std::vector<PinMask> pins);

  /// Indices into the flattened vector that are held at zero.
  std::vector<std::size_t> pinned_indices() const;

  SosCascade with_gain(double h0) const;
  SosCascade appended(const SosCascade& other) const;

  double max_pole_radius() const;
  bool is_stable(double gamma) const;

  bool operator==(const SosCascade&) const = default;

 private:
  double h0_ = 1.0;
  std::vector<Biquad> sections_;
  std::vector<PinMask> pins_;
};

/// Cascade plus the desired group delay; x = [c; tau] has length 4J + 2.
struct DesignState {
  SosCascade cascade;
  double tau = 0.0;
  int iteration = 0;

  Eigen::VectorXd to_vector() const;
  static DesignState from_vector(const Eigen::VectorXd& x, std::vector<PinMask> pins, int iteration);
};

struct ResponseSample {
  double omega = 0.0;
  Complex h;
  double gd = 0.0;
  Eigen::VectorXcd grad_h;  // length 4J + 1
  Eigen::VectorXd grad_gd;  // length 4J + 1
};

Complex eval_response(const SosCascade& cascade, double omega);
double eval_group_delay(const SosCascade& cascade, double omega);

struct Gradients {
  Eigen::VectorXcd grad_h;
  Eigen::VectorXd grad_gd;
};
Gradients gradients(const SosCascade& cascade, double omega);

/// Response, group delay and both gradients in one pass.
ResponseSample sample(const SosCascade& cascade, double omega);

struct FrequencyGrid;

/// Per-band error samples and their gradients with respect to x = [c; tau].
struct ErrorSamples {
  std::vector<double> pass_omega;
  Eigen::VectorXd e_g;   // tau_h - tau on the passband grid
  Eigen::MatrixXd grad_e_g;  // rows: omega, cols: 4J + 2
  Eigen::VectorXd e_pb;  // |H|^2 - 1 on the passband grid
  Eigen::MatrixXd grad_e_pb;

  std::vector<double> stop_omega;
  Eigen::VectorXcd h_sb;
  Eigen::MatrixXcd grad_h_sb;  // cols: 4J + 2, last column zero

  std::vector<double> trans_omega;
  Eigen::VectorXcd h_tb;
  Eigen::MatrixXcd grad_h_tb;
};

ErrorSamples error_functions(const DesignState& state, const FrequencyGrid& grid);

}  // namespace iirpl
