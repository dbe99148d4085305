#include "iirpl/design_loop.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "iirpl/elliptic.hpp"
#include "iirpl/errors.hpp"

namespace iirpl {
namespace {

constexpr double kPi = std::numbers::pi;

DesignSpec lowpass_spec(double wp, double ws, double ap, double as) {
  DesignSpec s;
  s.kind = FilterKind::Lowpass;
  s.edges = {wp, ws};
  s.ripple_db = ap;
  s.atten_db = as;
  s.delay = OptimizedDelay{1.0, 0, true};
  return s;
}

std::vector<IterationRecord> main_phase(const DesignResult& r) {
  std::vector<IterationRecord> out;
  for (const IterationRecord& h : r.history) {
    if (!h.polish) out.push_back(h);
  }
  return out;
}

TEST(LoopConfig, FromSpecAndWarnings) {
  DesignSpec s = lowpass_spec(0.36, 0.44, 0.2, 50.0);
  s.loop.l_o = 7;
  const LoopConfig c = loop_config(s);
  EXPECT_EQ(c.gamma_small, 0.01);
  EXPECT_EQ(c.w_relax, 1000.0);
  EXPECT_EQ(c.l_o, 7);
  EXPECT_NEAR(c.eps_s, 0.02, 1e-15);
  EXPECT_FALSE(check_config(c).has_value());
  LoopConfig w = c;
  w.w_relax = 100.0;
  EXPECT_TRUE(check_config(w).has_value());
}

TEST(ClampIntoTriangle, PullsPolesInside) {
  const double gamma = stability_gamma(0.02);
  SosCascade c(1.0, {Biquad{1.0, 0.0, 0.9801, -1.0}, Biquad{1.0, 0.0, 0.25, 0.0}});
  EXPECT_EQ(clamp_into_triangle(c, gamma), 1);
  EXPECT_TRUE(c.is_stable(gamma));
  EXPECT_EQ(c.sections()[1].b0, 0.25);
  EXPECT_LE(c.max_pole_radius(), 0.98);
}

TEST(Iterate, RejectsStartOutsideTriangle) {
  const DesignSpec s = lowpass_spec(0.36, 0.44, 0.2, 50.0);
  const SosCascade c(1.0, {Biquad{1.0, 0.0, 0.99, 0.0}});
  const DesignState st{c, 1.0, 0};
  const auto bands = s.bands(false);
  try {
    iterate(st, build_grid(bands), loop_config(s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleStart);
  }
}

TEST(Iterate, OptimalStartStopsAfterWindow) {
  // FIR numerator 1 + 0.5 z^-1 + z^-2 has delay 1 everywhere, so tau = 1 is
  // already optimal. a1 and h0 leave the delay unchanged, so the optimal
  // face is not a point and steps may drift along it without leaving it.
  const std::vector<BandSpec> bands{BandSpec::standard(BandKind::Passband, 0.0, 0.3 * kPi),
                                    BandSpec::standard(BandKind::Stopband, 0.8 * kPi, kPi)};
  SosCascade c(1.0, {Biquad{1.0, 0.5, 0.0, 0.0}});
  DesignState st{c, 1.0, 0};
  const FrequencyGrid g = build_grid(bands, st);
  double gmax = 0, gmin = 1e9;
  for (double w : g.passband) {
    gmax = std::max(gmax, std::norm(eval_response(c, w)));
    gmin = std::min(gmin, std::norm(eval_response(c, w)));
  }
  st.cascade = c.with_gain(std::sqrt(2.0 / (gmax + gmin)));
  LoopConfig cfg;
  cfg.l_o = 5;
  cfg.gamma_pb = 5;
  cfg.gamma_sb = 5;
  cfg.polish_radii.clear();
  const DesignResult r = iterate(st, g, cfg, DelayMode::Fixed);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.history.size(), static_cast<std::size_t>(cfg.l_o + 1));
  for (const IterationRecord& h : r.history) {
    EXPECT_LE(h.step_norm, cfg.gamma_small + 1e-9);
    EXPECT_LE(h.objective, 1e-8);
    EXPECT_EQ(h.tau, 1.0);
  }
  const Biquad& s = r.state.cascade.sections()[0];
  EXPECT_NEAR(s.a0, 1.0, 1e-6);
  EXPECT_NEAR(s.b0, 0.0, 1e-6);
  EXPECT_NEAR(s.b1, 0.0, 1e-6);
}

TEST(Iterate, DetunedStartRecoversFeasibility) {
  // Elliptic start with the gain raised 50%; undoing it takes a step longer
  // than the trust radius, so the first subproblem needs relaxation.
  const DesignSpec s = lowpass_spec(0.4, 0.6, 0.2, 40.0);
  const SosCascade e = design_elliptic(s.elliptic());
  const SosCascade detuned = e.with_gain(1.5 * e.h0());
  LoopConfig cfg = loop_config(s);
  cfg.l_o = 5;
  cfg.max_outer_iters = 400;
  const DesignState st{detuned, 5.0, 0};
  const DesignResult r = iterate(st, build_grid(s.bands(false), st), cfg);
  ASSERT_FALSE(r.history.empty());
  EXPECT_GT(r.history.front().delta_rlx, 0.0);
  const auto main = main_phase(r);
  EXPECT_LE(main.back().delta_rlx, 1e-9);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.metrics.pb_ripple_db, 0.2);
}

TEST(Iterate, StoppingRuleAndInvariants) {
  const DesignSpec s = lowpass_spec(0.4, 0.6, 0.2, 40.0);
  LoopConfig cfg = loop_config(s);
  cfg.l_o = 8;
  cfg.max_outer_iters = 400;
  const SosCascade init = design_elliptic(s.elliptic());
  const DesignState st{init, 5.0, 0};
  const DesignResult r = iterate(st, build_grid(s.bands(false), st), cfg);
  ASSERT_TRUE(r.converged);
  const auto main = main_phase(r);
  ASSERT_GT(main.size(), static_cast<std::size_t>(cfg.l_o));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + cfg.l_o < main.size(); ++i) best = std::min(best, main[i].objective);
  for (std::size_t i = main.size() - cfg.l_o; i < main.size(); ++i) {
    EXPECT_GE(main[i].objective, best - std::max(cfg.improve_tol * best, cfg.improve_abs));
  }
  for (const IterationRecord& h : r.history) {
    EXPECT_LE(h.max_pole_radius, 1.0 - cfg.eps_s + 1e-9);
    const double radius = h.polish ? 1e-3 : cfg.gamma_small;
    EXPECT_LE(h.step_norm, radius + h.delta_rlx + 1e-6);
  }
}

TEST(Iterate, SolverFailureIsReported) {
  const DesignSpec s = lowpass_spec(0.4, 0.6, 0.2, 40.0);
  LoopConfig cfg = loop_config(s);
  cfg.solver.max_iters = 1;
  cfg.solver.near_tol = 0.0;
  const DesignState st{design_elliptic(s.elliptic()), 5.0, 0};
  try {
    iterate(st, build_grid(s.bands(false), st), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SubproblemFailed);
  }
}

TEST(DesignB, DelayStaysPinnedAndRunsRepeat) {
  DesignSpec s = lowpass_spec(0.5, 0.6, 0.266, 36.146);
  s.delay = PrescribedDelay{15.9, 6, 4.54};
  LoopConfig cfg = loop_config(s);
  cfg.max_outer_iters = 40;
  const DesignResult a = design_B(s, 6, 15.9, cfg);
  const DesignResult b = design_B(s, 6, 15.9, cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].tau, 15.9);
    EXPECT_EQ(a.history[i].objective, b.history[i].objective);
    EXPECT_LE(a.history[i].max_pole_radius, 0.98 + 1e-9);
  }
  EXPECT_EQ(a.state.cascade, b.state.cascade);
  EXPECT_EQ(a.initializer_tag, "bmt");
  EXPECT_EQ(a.metrics.order, 12);
}

TEST(DesignA, ThreeStartsNeverWorseThanOne) {
  DesignSpec s = lowpass_spec(0.4, 0.6, 0.2, 40.0);
  LoopConfig cfg = loop_config(s);
  cfg.max_outer_iters = 30;
  const DesignResult one = design_A(s, 1, cfg, false);
  const DesignResult three = design_A(s, 1, cfg, true);
  EXPECT_EQ(one.initializer_tag, "tau_init");
  EXPECT_LE(three.metrics.q_tau, one.metrics.q_tau);
  EXPECT_EQ(three.metrics.order, one.metrics.order);
}

TEST(DesignA, NoExtraSectionsLeavesLargeDelayVariation) {
  const DesignSpec s = lowpass_spec(0.36, 0.44, 0.2, 50.0);
  LoopConfig cfg = loop_config(s);
  cfg.l_o = 10;
  cfg.max_outer_iters = 200;
  const DesignResult r = design_A(s, 0, cfg, false);
  EXPECT_EQ(r.metrics.order, 6);
  EXPECT_GT(r.metrics.q_tau, 10.0);
  EXPECT_LE(r.metrics.pb_ripple_db, 0.2);
  EXPECT_GE(r.metrics.sb_atten_db, 50.0);
}

TEST(History, CsvLayout) {
  std::ostringstream os;
  write_history_csv(os, {IterationRecord{1, 2.5, 0.0, 0.9, 0.01, 3.0, 0.0, false}});
  EXPECT_EQ(os.str(), "iter,objective,delta_rlx,max_pole_radius\n1,2.5,0,0.9\n");
}

}  // namespace
}  // namespace iirpl
