#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iirpl/cone_solver.hpp"
#include "iirpl/design_spec.hpp"
#include "iirpl/metrics.hpp"
#include "iirpl/sampling.hpp"
#include "iirpl/sos.hpp"
#include "iirpl/subproblem.hpp"

namespace iirpl {

struct LoopConfig {
  double gamma_small = 0.01;
  double w_relax = 1000.0;  // 500..5000 recommended; outside only warns
  int l_o = 40;
  double eps_s = 0.02;
  double gamma_pb = 0.0;
  double gamma_sb = 0.0;
  std::optional<double> tb_cap;  // linear Gamma_tb
  int max_outer_iters = 1000;
  // Decrease needed for a new best objective to count as progress in the
  // stagnation rule: relative, with an absolute floor.
  double improve_tol = 1e-9;
  double improve_abs = 1e-9;
  double stability_backoff = 1e-9;
  // Relative shrink of the band caps handed to the subproblem; covers
  // dense-grid maxima that fall between virtual samples.
  double cap_margin = 1e-3;
  // Trust radii of the closing polish pass, polish_steps iterations each.
  std::vector<double> polish_radii{1e-3, 1e-4, 1e-5};
  int polish_steps = 5;
  SolverOptions solver;
  std::ostream* log = nullptr;  // per-iteration trace when set
};

/// Builds a LoopConfig from spec tolerances and loop overrides.
LoopConfig loop_config(const DesignSpec& spec);

/// Empty when w_relax is in the recommended range, otherwise a warning.
std::optional<std::string> check_config(const LoopConfig& config);

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;  // max |e_g| on the dense passband plus W delta_rlx
  double delta_rlx = 0.0;
  double max_pole_radius = 0.0;
  double step_norm = 0.0;
  double tau = 0.0;
  // Largest excess of the true band errors over their caps on the current grid.
  double violation = 0.0;
  bool polish = false;
};

struct DesignResult {
  DesignState state;
  std::vector<IterationRecord> history;
  QualityReport metrics;
  bool converged = false;
  std::string initializer_tag;
  // Histories of every start design_A ran, the winner included.
  std::vector<std::vector<IterationRecord>> start_histories;
};

/// Sequential SOCP from `state` (must lie in the shrunk stability triangle).
/// Stops when delta_rlx <= 1e-9 and the best objective has not improved
/// over the last l_o iterations, or after max_outer_iters. Returns the best
/// iterate seen. Throws SubproblemFailed after 3 consecutive solver
/// breakdowns.
DesignResult iterate(const DesignState& state, const FrequencyGrid& grid, const LoopConfig& config,
                     DelayMode mode = DelayMode::Free);

/// Moves every section's poles radially inward until it satisfies the
/// triangle shrunk by gamma. Returns the number of sections touched.
int clamp_into_triangle(SosCascade& cascade, double gamma);

/// Optimized delay: elliptic (or `seed`) plus M allpass sections, run from
/// tau_init and, with three_starts, also from tau_max and tau_min; the
/// smallest Q_tau wins. Starts run in parallel, capped by IIRPL_THREADS.
DesignResult design_A(const DesignSpec& spec, int M, const LoopConfig& config, bool three_starts = true,
                      const std::optional<SosCascade>& seed = std::nullopt);

/// Prescribed delay tau_pr with M_tot sections seeded by a reduced FIR
/// (or `seed`); the delay coordinate stays pinned.
DesignResult design_B(const DesignSpec& spec, int M_tot, double tau_pr, const LoopConfig& config,
                      const std::optional<SosCascade>& seed = std::nullopt);

/// Dense verification grid of a spec, transition bands included.
FrequencyGrid verification_grid(const DesignSpec& spec);

/// CSV with header `iter,objective,delta_rlx,max_pole_radius`.
void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history);

}  // namespace iirpl
