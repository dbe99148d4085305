#include "iirpl/design_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include "iirpl/bmt.hpp"
#include "iirpl/errors.hpp"
#include "iirpl/seeding.hpp"

namespace iirpl {

using Eigen::Index;
using Eigen::VectorXd;

LoopConfig loop_config(const DesignSpec& spec) {
  LoopConfig c;
  c.eps_s = spec.eps_s();
  c.gamma_pb = spec.gamma_pb();
  c.gamma_sb = spec.gamma_sb();
  c.tb_cap = spec.gamma_tb();
  if (spec.loop.gamma_small) c.gamma_small = *spec.loop.gamma_small;
  if (spec.loop.w_relax) c.w_relax = *spec.loop.w_relax;
  if (spec.loop.l_o) c.l_o = *spec.loop.l_o;
  if (spec.loop.max_outer_iters) c.max_outer_iters = *spec.loop.max_outer_iters;
  return c;
}

std::optional<std::string> check_config(const LoopConfig& c) {
  if (c.w_relax < 500.0 || c.w_relax > 5000.0) {
    return "relaxation weight " + std::to_string(c.w_relax) + " is outside the recommended range [500, 5000]";
  }
  return std::nullopt;
}

int clamp_into_triangle(SosCascade& cascade, double gamma) {
  std::vector<Biquad> secs = cascade.sections();
  int touched = 0;
  for (Biquad& s : secs) {
    if (in_stability_triangle(s, gamma, -1e-6)) continue;
    ++touched;
    // Scaling z by rho shrinks both roots; the triangle is reached for small enough rho.
    constexpr double rho = 0.999;
    while (!in_stability_triangle(s, gamma, -1e-6)) {
      s.b0 *= rho * rho;
      s.b1 *= rho;
    }
  }
  cascade = SosCascade(cascade.h0(), std::move(secs), cascade.pins());
  return touched;
}

namespace {

double dense_delay_error(const DesignState& s, const std::vector<double>& pass) {
  double e = 0.0;
  for (double w : pass) e = std::max(e, std::abs(eval_group_delay(s.cascade, w) - s.tau));
  return e;
}

double band_violation(const DesignState& s, const FrequencyGrid& g, const LoopConfig& c) {
  double v = 0.0;
  for (double w : g.passband) v = std::max(v, std::abs(std::norm(eval_response(s.cascade, w)) - 1.0) - c.gamma_pb);
  for (double w : g.stopband) v = std::max(v, std::abs(eval_response(s.cascade, w)) - c.gamma_sb);
  if (c.tb_cap) {
    for (double w : g.transition) v = std::max(v, std::abs(eval_response(s.cascade, w)) - *c.tb_cap);
  }
  return v;
}

bool usable(const Solution& sol) {
  return (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::NearOptimal) && sol.u.allFinite();
}

}  // namespace

DesignResult iterate(const DesignState& start, const FrequencyGrid& grid0, const LoopConfig& cfg, DelayMode mode) {
  if (cfg.l_o < 1) throw Error(ErrorCode::InvalidArgument, "l_o must be at least 1");
  const double gamma = stability_gamma(cfg.eps_s);
  if (!start.cascade.is_stable(gamma)) {
    throw Error(ErrorCode::InfeasibleStart, "start cascade lies outside the shrunk stability triangle");
  }

  std::vector<double> dense_pass;
  std::vector<BandSpec> metric_bands;
  for (const BandSamples& b : grid0.bands) {
    metric_bands.push_back(b.spec);
    if (b.spec.kind != BandKind::Passband) continue;
    const std::vector<double> v = virtual_points(b.spec);
    dense_pass.insert(dense_pass.end(), v.begin(), v.end());
  }

  const double shrink = 1.0 - cfg.cap_margin;
  SubproblemCaps caps;
  caps.gamma_pb = cfg.gamma_pb * shrink;
  caps.gamma_sb = cfg.gamma_sb * shrink;
  if (cfg.tb_cap) caps.gamma_tb = *cfg.tb_cap * shrink;
  caps.w_relax = cfg.w_relax;
  caps.stability_backoff = cfg.stability_backoff;

  const InteriorPointSolver solver;
  const std::vector<PinMask> pins = start.cascade.pins();
  DesignState state = start;
  FrequencyGrid grid = refresh_grid(grid0, state);
  DesignResult res;

  // One assemble -> lower -> solve -> apply -> refresh pass.
  auto step = [&](int k, double radius, bool polish) {
    const LinearizedSystem sys = assemble(state, grid, cfg.eps_s);
    const SubproblemLayout L{sys.num_updates()};

    // Fallback ladder: nominal caps, then relaxed stopband, then a smaller trust region.
    Solution sol;
    bool ok = false;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
      SubproblemCaps c = caps;
      c.gamma_small = radius;
      if (attempt >= 1) c.relax_stopband = true;
      if (attempt == 2) c.gamma_small *= 0.1;
      try {
        sol = solver.solve(lower(sys, mode, c), cfg.solver);
        ok = usable(sol);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NumericalBreakdown) throw;
      }
    }
    if (!ok) {
      throw Error(ErrorCode::SubproblemFailed, "3 consecutive solver breakdowns at iteration " + std::to_string(k));
    }

    VectorXd delta = sol.u.head(L.n);
    const double rlx = std::max(0.0, sol.u[L.rlx()]);
    if (mode == DelayMode::Fixed) delta[L.n - 1] = 0.0;
    const VectorXd x = state.to_vector();
    DesignState next = DesignState::from_vector(x + delta, pins, k);
    // Solver tolerance can leave a step a hair outside the triangle; the
    // region is convex, so shrinking toward the current iterate fixes it.
    for (int h = 0; h < 60 && !next.cascade.is_stable(gamma); ++h) {
      delta *= 0.5;
      next = DesignState::from_vector(x + delta, pins, k);
    }
    if (!next.cascade.is_stable(gamma)) {
      delta.setZero();
      next = DesignState::from_vector(x, pins, k);
    }
    state = next;
    grid = refresh_grid(grid, state);

    IterationRecord rec;
    rec.iter = k;
    rec.delta_rlx = rlx;
    rec.objective = dense_delay_error(state, dense_pass) + cfg.w_relax * rlx;
    rec.max_pole_radius = state.cascade.max_pole_radius();
    rec.step_norm = delta.norm();
    rec.tau = state.tau;
    rec.violation = band_violation(state, grid, cfg);
    rec.polish = polish;
    res.history.push_back(rec);
    if (cfg.log) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "iter %4d  obj %.6e  rlx %.3e  |d| %.3e  tau %.5f  r %.5f  viol %.2e (%d ipm)%s\n",
                    k, rec.objective, rlx, rec.step_norm, state.tau, rec.max_pole_radius, rec.violation,
                    sol.iterations, polish ? " polish" : "");
      *cfg.log << buf;
    }
    return rec;
  };

  res.state = state;
  double best = std::numeric_limits<double>::infinity();
  double best_violation = band_violation(state, grid, cfg);
  int since_best = 0;
  int k = 0;
  while (k < cfg.max_outer_iters) {
    const IterationRecord rec = step(++k, cfg.gamma_small, false);
    if (!std::isfinite(best) || rec.objective < best - std::max(cfg.improve_tol * best, cfg.improve_abs)) {
      best = rec.objective;
      best_violation = rec.violation;
      res.state = state;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (rec.delta_rlx <= 1e-9 && since_best >= cfg.l_o) {
      res.converged = true;
      break;
    }
  }

  // Full-radius steps overshoot active band caps by O(radius^2); a few
  // steps with shrinking radius from the best iterate remove that excess.
  if (!cfg.polish_radii.empty()) {
    state = res.state;
    grid = refresh_grid(grid, state);
    IterationRecord last;
    for (double radius : cfg.polish_radii) {
      for (int i = 0; i < cfg.polish_steps; ++i) last = step(++k, radius, true);
    }
    if (last.delta_rlx <= 1e-9 && last.violation <= std::max(best_violation, 0.0)) res.state = state;
  }

  res.metrics = quality(res.state, dense_grid(metric_bands));
  return res;
}

FrequencyGrid verification_grid(const DesignSpec& spec) {
  const std::vector<BandSpec> b = spec.bands(true);
  return dense_grid(b);
}

namespace {

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IIRPL_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

FrequencyGrid start_grid(const DesignSpec& spec, const LoopConfig& cfg, const DesignState& state) {
  const std::vector<BandSpec> b = spec.bands(cfg.tb_cap.has_value());
  return build_grid(b, state);
}

}  // namespace

DesignResult design_A(const DesignSpec& spec, int M, const LoopConfig& cfg, bool three_starts,
                      const std::optional<SosCascade>& seed) {
  if (M < 0) throw Error(ErrorCode::InvalidArgument, "M must be non-negative");
  const auto [lo, hi] = spec.passband();
  const SosCascade base = seed ? *seed : design_elliptic(spec.elliptic());
  SosCascade init = augment_allpass(base, M, lo, hi);
  clamp_into_triangle(init, stability_gamma(cfg.eps_s));

  std::vector<double> pass;
  for (const BandSpec& b : spec.bands(false)) {
    if (b.kind != BandKind::Passband) continue;
    const std::vector<double> v = virtual_points(b);
    pass.insert(pass.end(), v.begin(), v.end());
  }
  const StartDelays d = start_delays(init, pass);

  struct Start {
    const char* tag;
    double tau;
  };
  std::vector<Start> starts{{"tau_init", d.tau_init}};
  if (three_starts) {
    starts.push_back({"tau_max", d.tau_max});
    starts.push_back({"tau_min", d.tau_min});
  }

  std::vector<std::optional<DesignResult>> out(starts.size());
  std::vector<std::exception_ptr> errs(starts.size());
  auto run = [&](std::size_t i) {
    try {
      DesignState s{init, starts[i].tau, 0};
      LoopConfig c = cfg;
      if (starts.size() > 1) c.log = nullptr;
      DesignResult r = iterate(s, start_grid(spec, c, s), c, DelayMode::Free);
      r.initializer_tag = starts[i].tag;
      r.metrics = quality(r.state, verification_grid(spec));
      out[i] = std::move(r);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  };
  const unsigned cap = thread_cap();
  for (std::size_t first = 0; first < starts.size(); first += cap) {
    std::vector<std::thread> pool;
    const std::size_t last = std::min(starts.size(), first + cap);
    for (std::size_t i = first; i < last; ++i) {
      if (last - first == 1) {
        run(i);
      } else {
        pool.emplace_back(run, i);
      }
    }
    for (std::thread& t : pool) t.join();
  }

  std::optional<std::size_t> win;
  std::vector<std::vector<IterationRecord>> histories;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i]) continue;
    histories.push_back(out[i]->history);
    if (!win || out[i]->metrics.q_tau < out[*win]->metrics.q_tau) win = i;
  }
  if (!win) std::rethrow_exception(errs.front());
  DesignResult best = std::move(*out[*win]);
  best.start_histories = std::move(histories);
  return best;
}

DesignResult design_B(const DesignSpec& spec, int M_tot, double tau_pr, const LoopConfig& cfg,
                      const std::optional<SosCascade>& seed) {
  if (!(tau_pr > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau_pr must be positive");
  const auto [lo, hi] = spec.passband();
  SosCascade init;
  if (seed) {
    init = *seed;
  } else {
    const VectorXd taps = design_fir_linear_phase(tau_pr, spec.kind, spec.edges_rad());
    init = bmt_reduce(taps, 2 * M_tot, lo, hi).cascade;
  }
  clamp_into_triangle(init, stability_gamma(cfg.eps_s));
  const DesignState s{init, tau_pr, 0};
  DesignResult r = iterate(s, start_grid(spec, cfg, s), cfg, DelayMode::Fixed);
  r.initializer_tag = seed ? "seed_file" : "bmt";
  r.start_histories = {r.history};
  r.metrics = quality(r.state, verification_grid(spec));
  return r;
}

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "iter,objective,delta_rlx,max_pole_radius\n";
  char buf[128];
  for (const IterationRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", r.iter, r.objective, r.delta_rlx, r.max_pole_radius);
    os << buf;
  }
}

}  // namespace iirpl
