#include "iirpl/design_spec.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include "iirpl/errors.hpp"

namespace iirpl {
namespace {

constexpr double kPi = std::numbers::pi;

const char* kMinimal = R"({
  "version": 1,
  "kind": "lowpass",
  "edges": [0.36, 0.44],
  "ripple_db": 0.2,
  "atten_db": 50,
  "delay": {"mode": "optimized", "q_tau_cap": 0.1, "M_start": 5}
})";

std::string parse_error(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.what();
  }
  ADD_FAILURE() << "no error";
  return {};
}

TEST(DesignSpec, DefaultsAndConversions) {
  const DesignSpec s = parse_spec(kMinimal);
  EXPECT_EQ(s.units, EdgeUnits::Pi);
  EXPECT_EQ(s.max_pole_radius, 0.98);
  EXPECT_NEAR(s.eps_s(), 0.02, 1e-15);
  EXPECT_FALSE(s.tb_cap_db.has_value());
  EXPECT_TRUE(std::get<OptimizedDelay>(s.delay).three_starts);
  const double r = std::pow(10.0, 0.02);
  EXPECT_DOUBLE_EQ(s.gamma_pb(), (r - 1.0) / (r + 1.0));
  EXPECT_NEAR(s.gamma_sb(), 0.0031622776601683794, 1e-16);
  // The ripple cap on |H|^2 reproduces the dB ripple ratio exactly.
  EXPECT_NEAR(10.0 * std::log10((1 + s.gamma_pb()) / (1 - s.gamma_pb())), 0.2, 1e-12);
  DesignSpec t = s;
  t.tb_cap_db = 0.0;
  EXPECT_EQ(t.gamma_tb().value(), 1.0);
}

TEST(DesignSpec, BandsPerKind) {
  DesignSpec s = parse_spec(kMinimal);
  auto b = s.bands(true);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].kind, BandKind::Passband);
  EXPECT_DOUBLE_EQ(b[0].hi, 0.36 * kPi);
  EXPECT_EQ(b[1].kind, BandKind::Transition);
  EXPECT_EQ(b[2].kind, BandKind::Stopband);
  EXPECT_EQ(s.bands(false).size(), 2u);

  s.kind = FilterKind::Highpass;
  s.edges = {0.6, 0.4};
  b = s.bands(true);
  EXPECT_EQ(b.front().kind, BandKind::Stopband);
  EXPECT_DOUBLE_EQ(b.front().hi, 0.4 * kPi);
  EXPECT_EQ(b.back().kind, BandKind::Passband);
  EXPECT_EQ(s.passband().second, kPi);

  s.kind = FilterKind::Bandpass;
  s.units = EdgeUnits::Radians;
  s.edges = {1.0, 1.1, 1.9, 2.0};
  b = s.bands(true);
  ASSERT_EQ(b.size(), 5u);
  EXPECT_EQ(b[2].kind, BandKind::Passband);
  EXPECT_EQ(b[2].lo, 1.1);
  EXPECT_EQ(b[2].hi, 1.9);
  EXPECT_EQ(s.bands(false).size(), 3u);
}

TEST(DesignSpec, RejectsReversedLowpassEdges) {
  std::string t = kMinimal;
  t.replace(t.find("[0.36, 0.44]"), 12, "[0.44, 0.36]");
  EXPECT_NE(parse_error(t).find("edges"), std::string::npos);
}

TEST(DesignSpec, ErrorsNameTheField) {
  std::string t = kMinimal;
  t.replace(t.find("\"atten_db\": 50,"), 15, "");
  EXPECT_NE(parse_error(t).find("atten_db"), std::string::npos);
  t = kMinimal;
  t.replace(t.find("\"M_start\": 5"), 12, "\"M_start\": \"five\"");
  EXPECT_NE(parse_error(t).find("delay.M_start"), std::string::npos);
  t = kMinimal;
  t.replace(t.find("optimized"), 9, "sometimes");
  EXPECT_NE(parse_error(t).find("delay.mode"), std::string::npos);
  EXPECT_NE(parse_error("{\"version\": 1,").find("byte"), std::string::npos);
  t = kMinimal;
  t.replace(t.find("\"version\": 1"), 12, "\"version\": 2");
  EXPECT_NE(parse_error(t).find("version"), std::string::npos);
  t = kMinimal;
  t.replace(t.find("\"ripple_db\": 0.2"), 16, "\"ripple_db\": -1");
  EXPECT_NE(parse_error(t).find("ripple_db"), std::string::npos);
}

TEST(DesignSpec, FixturesRoundTrip) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(IIRPL_SPEC_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const DesignSpec a = load_spec(entry.path().string());
    const DesignSpec b = parse_spec(serialize_spec(a));
    EXPECT_EQ(a, b) << entry.path();
    EXPECT_EQ(serialize_spec(a), serialize_spec(b));
  }
  EXPECT_GE(seen, 9);
}

TEST(DesignSpec, PrescribedDelayFields) {
  const DesignSpec s = load_spec(std::string(IIRPL_SPEC_DIR) + "/example5.json");
  const auto& p = std::get<PrescribedDelay>(s.delay);
  EXPECT_EQ(p.tau_pr, 15.9);
  EXPECT_EQ(p.M_tot_start, 6);
  EXPECT_EQ(p.q_tau_cap, 4.54);
}

}  // namespace
}  // namespace iirpl
