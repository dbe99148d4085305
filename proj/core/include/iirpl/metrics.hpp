#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iirpl/sampling.hpp"
#include "iirpl/sos.hpp"

namespace iirpl {

struct QualityReport {
  double q_tau = 0.0;  // percent
  double tau_avg = 0.0;
  double tau_max = 0.0;
  double tau_min = 0.0;
  double pb_ripple_db = 0.0;
  double sb_atten_db = 0.0;
  std::optional<double> tb_gain_db;  // empty when the grid has no transition band
  int order = 0;
  int mult_count = 0;
  int add_count = 0;
  int delay_count = 0;
};

/// 100 (tau_max - tau_min) / (tau_max + tau_min).
double q_tau(double tau_max, double tau_min);

/// Figures of merit of `cascade` sampled on `grid`; pass a dense_grid for
/// reporting.
QualityReport quality(const SosCascade& cascade, const FrequencyGrid& grid);
QualityReport quality(const DesignState& state, const FrequencyGrid& grid);

/// h0 <- 2 h0 / (g_max + g_min) with the gains taken over `passband`.
SosCascade renormalize_gain(const SosCascade& cascade, std::span<const double> passband);

/// Rows: order, PB ripple, SB atten, TB gain, tau_avg, Q_tau; one column per
/// report. Empty labels become "design-N" (1-based).
struct CompareTable {
  std::vector<std::string> labels;
  std::vector<QualityReport> reports;
};

CompareTable compare_table(std::vector<QualityReport> reports, std::vector<std::string> labels = {});
void write_table_text(std::ostream& os, const CompareTable& table);
std::string table_json(const CompareTable& table);
std::string report_json(const QualityReport& report);

/// CSV `omega,abs_h_db,group_delay` over `count` uniform points on [0, pi].
void write_response_csv(std::ostream& os, const SosCascade& cascade, int count = 4096);

}  // namespace iirpl
