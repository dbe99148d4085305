#include "iirpl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "iirpl/errors.hpp"

namespace iirpl {

double q_tau(double tau_max, double tau_min) { return 100.0 * (tau_max - tau_min) / (tau_max + tau_min); }

QualityReport quality(const SosCascade& cascade, const FrequencyGrid& grid) {
  if (grid.passband.empty()) throw Error(ErrorCode::InvalidArgument, "quality needs passband samples");
  QualityReport r;
  double tmax = -std::numeric_limits<double>::infinity();
  double tmin = std::numeric_limits<double>::infinity();
  double gmax = 0.0;
  double gmin = std::numeric_limits<double>::infinity();
  for (double w : grid.passband) {
    const double tau = eval_group_delay(cascade, w);
    tmax = std::max(tmax, tau);
    tmin = std::min(tmin, tau);
    const double g = std::abs(eval_response(cascade, w));
    gmax = std::max(gmax, g);
    gmin = std::min(gmin, g);
  }
  r.tau_max = tmax;
  r.tau_min = tmin;
  r.tau_avg = 0.5 * (tmax + tmin);
  r.q_tau = q_tau(tmax, tmin);
  r.pb_ripple_db = 20.0 * std::log10(gmax / gmin);
  double smax = 0.0;
  for (double w : grid.stopband) smax = std::max(smax, std::abs(eval_response(cascade, w)));
  r.sb_atten_db = grid.stopband.empty() ? std::numeric_limits<double>::infinity() : -20.0 * std::log10(smax);
  if (!grid.transition.empty()) {
    double tb = 0.0;
    for (double w : grid.transition) tb = std::max(tb, std::abs(eval_response(cascade, w)));
    r.tb_gain_db = 20.0 * std::log10(tb);
  }
  const int J = static_cast<int>(cascade.size());
  r.order = cascade.order();
  r.mult_count = 4 * J + 1;
  r.add_count = 4 * J;
  r.delay_count = 2 * J;
  return r;
}

QualityReport quality(const DesignState& state, const FrequencyGrid& grid) { return quality(state.cascade, grid); }

SosCascade renormalize_gain(const SosCascade& cascade, std::span<const double> passband) {
  double gmax = 0.0;
  double gmin = std::numeric_limits<double>::infinity();
  for (double w : passband) {
    const double g = std::abs(eval_response(cascade, w));
    gmax = std::max(gmax, g);
    gmin = std::min(gmin, g);
  }
  if (!(gmax + gmin > 0.0)) throw Error(ErrorCode::InvalidArgument, "passband gain is zero");
  return cascade.with_gain(2.0 * cascade.h0() / (gmax + gmin));
}

CompareTable compare_table(std::vector<QualityReport> reports, std::vector<std::string> labels) {
  if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "compare_table needs at least one report");
  labels.resize(reports.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) labels[i] = "design-" + std::to_string(i + 1);
  }
  return {std::move(labels), std::move(reports)};
}

namespace {

std::string fmt(double v, int prec) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

nlohmann::json to_json(const QualityReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j{{"order", r.order},           {"pb_ripple_db", num(r.pb_ripple_db)},
                   {"sb_atten_db", num(r.sb_atten_db)}, {"tb_gain_db", nullptr},
                   {"tau_avg", r.tau_avg},       {"tau_max", r.tau_max},
                   {"tau_min", r.tau_min},       {"q_tau", r.q_tau},
                   {"mult_count", r.mult_count}, {"add_count", r.add_count},
                   {"delay_count", r.delay_count}};
  if (r.tb_gain_db) j["tb_gain_db"] = num(*r.tb_gain_db);
  return j;
}

}  // namespace

void write_table_text(std::ostream& os, const CompareTable& t) {
  struct Row {
    const char* name;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows{{"Total filter order", {}}, {"Max PB ripple, dB", {}}, {"Min SB atten., dB", {}},
                        {"Max TB gain, dB", {}},    {"tau_avg", {}},           {"Q_tau", {}}};
  for (const QualityReport& r : t.reports) {
    rows[0].cells.push_back(std::to_string(r.order));
    rows[1].cells.push_back(fmt(r.pb_ripple_db, 4));
    rows[2].cells.push_back(fmt(r.sb_atten_db, 2));
    rows[3].cells.push_back(r.tb_gain_db ? fmt(*r.tb_gain_db, 3) : "NA");
    rows[4].cells.push_back(fmt(r.tau_avg, 2));
    rows[5].cells.push_back(fmt(r.q_tau, 4));
  }
  std::size_t w0 = std::string("Parameters").size();
  for (const Row& r : rows) w0 = std::max(w0, std::string(r.name).size());
  std::vector<std::size_t> w(t.labels.size());
  for (std::size_t c = 0; c < w.size(); ++c) {
    w[c] = t.labels[c].size();
    for (const Row& r : rows) w[c] = std::max(w[c], r.cells[c].size());
  }
  auto line = [&](const std::string& head, const std::vector<std::string>& cells) {
    os << head << std::string(w0 - head.size(), ' ');
    for (std::size_t c = 0; c < cells.size(); ++c) os << " | " << std::string(w[c] - cells[c].size(), ' ') << cells[c];
    os << '\n';
  };
  line("Parameters", t.labels);
  std::size_t total = w0;
  for (std::size_t c : w) total += c + 3;
  os << std::string(total, '-') << '\n';
  for (const Row& r : rows) line(r.name, r.cells);
}

std::string table_json(const CompareTable& t) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t i = 0; i < t.reports.size(); ++i) {
    nlohmann::json c = to_json(t.reports[i]);
    c["label"] = t.labels[i];
    cols.push_back(std::move(c));
  }
  return nlohmann::json{{"columns", cols}}.dump(2);
}

std::string report_json(const QualityReport& report) { return to_json(report).dump(2); }

void write_response_csv(std::ostream& os, const SosCascade& cascade, int count) {
  os << "omega,abs_h_db,group_delay\n";
  char buf[128];
  for (int i = 0; i < count; ++i) {
    const double w = std::numbers::pi * i / (count - 1);
    const double db = 20.0 * std::log10(std::abs(eval_response(cascade, w)));
    // Zeros on the unit circle leave the delay undefined there.
    double gd = std::numeric_limits<double>::quiet_NaN();
    try {
      gd = eval_group_delay(cascade, w);
    } catch (const Error&) {
    }
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", w, db, gd);
    os << buf;
  }
}

}  // namespace iirpl
