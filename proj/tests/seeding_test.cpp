#include "iirpl/seeding.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "iirpl/bmt.hpp"
#include "iirpl/errors.hpp"

namespace iirpl {
namespace {

constexpr double kPi = std::numbers::pi;

SosCascade example1_elliptic() {
  return design_elliptic({FilterKind::Lowpass, {0.36 * kPi, 0.44 * kPi}, 0.2, 50.0});
}

TEST(AugmentAllpass, ZeroSectionsOnlyRenormalizes) {
  const SosCascade base = example1_elliptic();
  const SosCascade out = augment_allpass(base, 0, 0.0, 0.36 * kPi);
  EXPECT_EQ(out.sections(), base.sections());
  double gmax = 0, gmin = 1e9;
  for (int i = 0; i < 1024; ++i) {
    const double g = std::norm(eval_response(out, 0.36 * kPi * i / 1023));
    gmax = std::max(gmax, g);
    gmin = std::min(gmin, g);
  }
  EXPECT_NEAR(gmax + gmin, 2.0, 1e-12);
}

TEST(AugmentAllpass, AppendedSectionIsAllpass) {
  const SosCascade one = augment_allpass(SosCascade(1.0), 1, 0.4, 0.6, 0.8);
  ASSERT_EQ(one.size(), 1u);
  const Biquad& s = one.sections()[0];
  EXPECT_NEAR(s.b0, 0.64, 1e-15);
  EXPECT_NEAR(s.b1, -1.6 * std::cos(0.5), 1e-15);
  double mmax = 0, mmin = 1e9;
  for (int i = 0; i < 1000; ++i) {
    const double m = std::abs(eval_response(SosCascade(1.0, {s}), kPi * i / 999));
    mmax = std::max(mmax, m);
    mmin = std::min(mmin, m);
  }
  EXPECT_LE(mmax / mmin, 1.0 + 1e-10);
}

TEST(AugmentAllpass, CentresAreBandMidpoints) {
  const std::vector<double> w = allpass_centres(5, 0.0, 0.36 * kPi);
  ASSERT_EQ(w.size(), 5u);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(w[k], 0.36 * kPi * (k + 0.5) / 5, 1e-15);
    EXPECT_GT(w[k], 0.0);
    EXPECT_LT(w[k], 0.36 * kPi);
  }
}

TEST(AugmentAllpass, PreservesMagnitudeShape) {
  const SosCascade base = example1_elliptic();
  const SosCascade init = augment_allpass(base, 5, 0.0, 0.36 * kPi);
  const double ref = std::abs(eval_response(init, 0.1)) / std::abs(eval_response(base, 0.1));
  for (int i = 0; i <= 200; ++i) {
    const double w = kPi * i / 200;
    const double ratio = std::abs(eval_response(init, w)) / std::abs(eval_response(base, w));
    EXPECT_NEAR(ratio / ref, 1.0, 1e-9);
  }
  EXPECT_LT(init.max_pole_radius(), 0.98);
}

TEST(StartDelays, ConstantDelayGivesEqualValues) {
  // (z + 1)^2 / z^2 has a symmetric numerator: delay is -1 everywhere.
  const SosCascade c(1.0, {Biquad{1.0, 2.0, 0.0, 0.0}});
  const std::vector<double> w{0.1, 0.5, 1.0, 2.0};
  const StartDelays d = start_delays(c, w);
  EXPECT_NEAR(d.tau_init, d.tau_max, 1e-12);
  EXPECT_NEAR(d.tau_init, d.tau_min, 1e-12);
}

TEST(StartDelays, AverageMatchesPhaseSlope) {
  const SosCascade init = augment_allpass(example1_elliptic(), 5, 0.0, 0.36 * kPi);
  std::vector<double> w;
  for (int i = 0; i < 4000; ++i) w.push_back(0.36 * kPi * i / 3999);
  const StartDelays d = start_delays(init, w);
  EXPECT_LE(d.tau_min, d.tau_init);
  EXPECT_LE(d.tau_init, d.tau_max);
  // Oracle: unwrapped phase difference across the band.
  double phase = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    phase += std::arg(eval_response(init, w[i]) / eval_response(init, w[i - 1]));
  }
  const double slope = -phase / (w.back() - w.front());
  EXPECT_NEAR(d.tau_init, slope, 1e-4 * slope);
}

TEST(FirSeed, LengthAndSymmetry) {
  const std::vector<double> e{0.5 * kPi, 0.6 * kPi};
  EXPECT_EQ(design_fir_linear_phase(15.9, FilterKind::Lowpass, e).size(), 33);
  const Eigen::VectorXd h = design_fir_linear_phase(15.0, FilterKind::Lowpass, e);
  ASSERT_EQ(h.size(), 31);
  for (Eigen::Index i = 0; i < h.size(); ++i) EXPECT_EQ(h[i], h[h.size() - 1 - i]);
  // Linear phase: H(w) e^{j 15 w} is real.
  for (double w : {0.2, 1.0, 2.5}) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index n = 0; n < h.size(); ++n) acc += h[n] * std::polar(1.0, -w * (n - 15.0));
    EXPECT_NEAR(acc.imag(), 0.0, 1e-14);
  }
}

TEST(FirSeed, HighpassAndBandpassShapes) {
  const std::vector<double> hp{0.6 * kPi, 0.4 * kPi};
  const Eigen::VectorXd h = design_fir_linear_phase(20.0, FilterKind::Highpass, hp);
  auto mag = [&](const Eigen::VectorXd& t, double w) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index n = 0; n < t.size(); ++n) acc += t[n] * std::polar(1.0, -w * n);
    return std::abs(acc);
  };
  EXPECT_LT(mag(h, 0.1), 0.01);
  EXPECT_NEAR(mag(h, 0.9 * kPi), 1.0, 0.01);
  const std::vector<double> bp{0.2 * kPi, 0.3 * kPi, 0.5 * kPi, 0.7 * kPi};
  const Eigen::VectorXd b = design_fir_linear_phase(25.0, FilterKind::Bandpass, bp);
  EXPECT_LT(mag(b, 0.05 * kPi), 0.01);
  EXPECT_NEAR(mag(b, 0.4 * kPi), 1.0, 0.02);
  EXPECT_LT(mag(b, 0.9 * kPi), 0.01);
}

}  // namespace
}  // namespace iirpl
