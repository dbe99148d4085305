// Command-line front end: design, compare, seed and solve.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iirpl/bmt.hpp"
#include "iirpl/coeff_io.hpp"
#include "iirpl/cone_solver.hpp"
#include "iirpl/design_loop.hpp"
#include "iirpl/design_spec.hpp"
#include "iirpl/elliptic.hpp"
#include "iirpl/errors.hpp"
#include "iirpl/metrics.hpp"
#include "iirpl/seeding.hpp"

namespace fs = std::filesystem;
using namespace iirpl;

namespace {

enum Exit { kOk = 0, kParse = 1, kInfeasible = 2, kOrderCap = 3, kFailure = 4 };

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError: return kParse;
    case ErrorCode::InfeasibleSpec:
    case ErrorCode::InfeasibleStart: return kInfeasible;
    default: return kFailure;
  }
}

struct DesignOpts {
  std::string spec_path;
  std::string out_dir = ".";
  bool dry_run = false;
  bool single_start = false;
  int max_order = 0;
  bool verbose = false;
  std::string seed_file;
};

void print_config(std::ostream& os, const DesignSpec& spec, const LoopConfig& cfg) {
  nlohmann::json j = nlohmann::json::parse(serialize_spec(spec));
  nlohmann::json r;
  r["gamma_pb"] = cfg.gamma_pb;
  r["gamma_sb"] = cfg.gamma_sb;
  r["gamma_tb"] = cfg.tb_cap ? nlohmann::json(*cfg.tb_cap) : nlohmann::json(nullptr);
  r["eps_s"] = cfg.eps_s;
  r["stability_gamma"] = stability_gamma(cfg.eps_s);
  r["gamma_small"] = cfg.gamma_small;
  r["w_relax"] = cfg.w_relax;
  r["l_o"] = cfg.l_o;
  r["max_outer_iters"] = cfg.max_outer_iters;
  nlohmann::json bands = nlohmann::json::array();
  for (const BandSpec& b : spec.bands(true)) bands.push_back({{"kind", to_string(b.kind)}, {"lo", b.lo}, {"hi", b.hi}});
  r["bands"] = bands;
  os << nlohmann::json{{"spec", j}, {"resolved", r}}.dump(2) << '\n';
}

void write_outputs(const fs::path& dir, const DesignSpec& spec, const DesignResult& res, int sections_param) {
  fs::create_directories(dir);
  save_coefficients(dir / "coefficients.txt", res.state.cascade);
  {
    std::ofstream os(dir / "response.csv");
    write_response_csv(os, res.state.cascade);
  }
  {
    std::ofstream os(dir / "history.csv");
    write_history_csv(os, res.history);
  }
  nlohmann::json j;
  j["name"] = spec.name;
  j["metrics"] = nlohmann::json::parse(report_json(res.metrics));
  j["tau"] = res.state.tau;
  j["converged"] = res.converged;
  j["initializer"] = res.initializer_tag;
  j["iterations"] = res.history.size();
  j["sections_parameter"] = sections_param;
  j["max_pole_radius"] = res.state.cascade.max_pole_radius();
  std::ofstream os(dir / "report.json");
  os << j.dump(2) << '\n';
}

int run_design(const DesignOpts& o) {
  DesignSpec spec = load_spec(o.spec_path);
  if (o.max_order > 0) spec.max_order = o.max_order;
  if (!o.seed_file.empty()) spec.seed_file = o.seed_file;
  LoopConfig cfg = loop_config(spec);
  if (auto warn = check_config(cfg)) std::cerr << "warning: " << *warn << '\n';
  if (o.verbose) cfg.log = &std::cerr;

  if (o.dry_run) {
    print_config(std::cout, spec, cfg);
    return kOk;
  }

  std::optional<SosCascade> seed;
  if (spec.seed_file) {
    fs::path p = *spec.seed_file;
    if (p.is_relative() && !fs::exists(p)) p = fs::path(o.spec_path).parent_path() / p;
    seed = load_coefficients(p);
  }

  const fs::path out = o.out_dir;
  std::optional<DesignResult> last;
  if (const auto* opt = std::get_if<OptimizedDelay>(&spec.delay)) {
    const int base_order = seed ? seed->order() : design_elliptic_full(spec.elliptic()).order;
    for (int M = opt->M_start;; ++M) {
      if (base_order + 2 * M > spec.max_order) break;
      DesignResult r = design_A(spec, M, cfg, opt->three_starts && !o.single_start, seed);
      std::cerr << "M = " << M << ": order " << r.metrics.order << ", Q_tau " << r.metrics.q_tau << '\n';
      const bool ok = r.metrics.q_tau <= opt->q_tau_cap;
      last = std::move(r);
      if (ok) {
        write_outputs(out, spec, *last, M);
        return kOk;
      }
    }
  } else {
    const auto& pre = std::get<PrescribedDelay>(spec.delay);
    for (int M = pre.M_tot_start;; ++M) {
      if (2 * M > spec.max_order) break;
      DesignResult r = design_B(spec, M, pre.tau_pr, cfg, seed);
      std::cerr << "M_tot = " << M << ": order " << r.metrics.order << ", Q_tau " << r.metrics.q_tau << '\n';
      const bool ok = r.metrics.q_tau <= pre.q_tau_cap;
      last = std::move(r);
      if (ok) {
        write_outputs(out, spec, *last, M);
        return kOk;
      }
      // An external seed fixes the order, so escalation cannot help.
      if (seed) break;
    }
  }
  if (last) write_outputs(out, spec, *last, -1);
  std::cerr << "error: Q_tau cap not met within order " << spec.max_order << '\n';
  return kOrderCap;
}

int run_compare(const std::string& spec_path, const std::vector<std::string>& files, std::vector<std::string> labels,
                bool json) {
  const DesignSpec spec = load_spec(spec_path);
  const FrequencyGrid grid = verification_grid(spec);
  std::vector<QualityReport> reports;
  for (const std::string& f : files) reports.push_back(quality(load_coefficients(f), grid));
  const CompareTable t = compare_table(std::move(reports), std::move(labels));
  if (json) {
    std::cout << table_json(t) << '\n';
  } else {
    write_table_text(std::cout, t);
  }
  return kOk;
}

int run_seed(const std::string& spec_path, int sections, const std::string& out) {
  const DesignSpec spec = load_spec(spec_path);
  const auto [lo, hi] = spec.passband();
  SosCascade c;
  if (std::get_if<OptimizedDelay>(&spec.delay)) {
    c = augment_allpass(design_elliptic(spec.elliptic()), sections, lo, hi);
  } else {
    const double tau = std::get<PrescribedDelay>(spec.delay).tau_pr;
    c = bmt_reduce(design_fir_linear_phase(tau, spec.kind, spec.edges_rad()), 2 * sections, lo, hi).cascade;
  }
  if (out.empty()) {
    write_coefficients(std::cout, c);
  } else {
    save_coefficients(out, c);
  }
  return kOk;
}

int run_solve(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ParseError, "cannot open " + path);
  const Solution s = solve(read_program(is));
  std::cout << "status " << to_string(s.status) << "\nobjective " << s.primal_obj << "\niterations " << s.iterations
            << "\nkkt " << s.kkt_residuals.primal << ' ' << s.kkt_residuals.dual << ' ' << s.kkt_residuals.gap << '\n';
  return s.status == SolveStatus::Optimal || s.status == SolveStatus::NearOptimal ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearly linear-phase IIR filter design by sequential cone programming"};
  app.require_subcommand(1);

  DesignOpts d;
  CLI::App* design = app.add_subcommand("design", "Design a filter from a JSON spec");
  design->add_option("spec", d.spec_path, "Spec file")->required();
  design->add_option("--out", d.out_dir, "Output directory");
  design->add_flag("--dry-run", d.dry_run, "Validate and print the resolved configuration");
  design->add_flag("--single-start", d.single_start, "Only start from the average delay");
  design->add_option("--max-order", d.max_order, "Override the order cap");
  design->add_flag("--verbose", d.verbose, "Trace iterations on stderr");
  design->add_option("--seed-file", d.seed_file, "Initial cascade in coefficient format");

  std::string cmp_spec;
  std::vector<std::string> cmp_files, cmp_labels;
  bool cmp_json = false;
  CLI::App* compare = app.add_subcommand("compare", "Tabulate quality figures of coefficient files");
  compare->add_option("spec", cmp_spec, "Spec file")->required();
  compare->add_option("files", cmp_files, "Coefficient files")->required();
  compare->add_option("--label", cmp_labels, "Column labels in file order");
  compare->add_flag("--json", cmp_json, "Emit JSON instead of text");

  std::string seed_spec, seed_out;
  int seed_sections = 0;
  CLI::App* seed = app.add_subcommand("seed", "Export the initial cascade of a spec");
  seed->add_option("spec", seed_spec, "Spec file")->required();
  seed->add_option("--sections", seed_sections, "Allpass sections (optimized) or total sections (prescribed)")
      ->required();
  seed->add_option("--out", seed_out, "Output file (stdout when omitted)");

  std::string dump;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a cone program dump");
  solve_cmd->add_option("program", dump, "Program dump")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*design) return run_design(d);
    if (*compare) return run_compare(cmp_spec, cmp_files, cmp_labels, cmp_json);
    if (*seed) return run_seed(seed_spec, seed_sections, seed_out);
    if (*solve_cmd) return run_solve(dump);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
