// Command-line front end: run | sweep-eps | refine | check-compat.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>

#include "rigidflow/errors.hpp"
#include "rigidflow/parallel.hpp"
#include "rigidflow/runner.hpp"

using namespace rigidflow;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kParse = 2, kValidation = 3, kRuntime = 4 };

struct Common {
  std::string scenario;
  std::string out = "out";
  int threads = 0;
  double eps = -1.0;
  std::string resolution;
};

void add_common(CLI::App* sub, Common& c, bool with_out) {
  sub->add_option("--scenario", c.scenario, "scenario file")->required();
  if (with_out) sub->add_option("--out", c.out, "output directory");
  sub->add_option("--threads", c.threads, "worker threads (0: available parallelism)");
  sub->add_option("--eps", c.eps, "override fluid.eps");
  sub->add_option("--resolution", c.resolution, "override mesh size, NRxNT or NRxNTxNP");
}

Scenario load(const Common& c) {
  Scenario sc = parse_scenario(c.scenario);
  if (c.eps >= 0.0) sc.fluid.eps = c.eps;
  if (!c.resolution.empty()) {
    static const std::regex re(R"((\d+)x(\d+)(?:x(\d+))?)");
    std::smatch m;
    if (!std::regex_match(c.resolution, m, re))
      throw ValidationError("--resolution must look like NRxNT or NRxNTxNP, got '" + c.resolution + "'");
    sc.geometry.n_r = std::stoi(m[1]);
    sc.geometry.n_theta = std::stoi(m[2]);
    if (m[3].matched) sc.geometry.n_phi = std::stoi(m[3]);
  }
  sc.validate();
  set_thread_count(c.threads);
  return sc;
}

int cmd_run(const Common& c) {
  const Scenario sc = load(c);
  const Simulation sim(sc);
  std::filesystem::create_directories(c.out);
  {
    std::ofstream f(std::filesystem::path(c.out) / "scenario.ini");
    f << serialize_scenario(sc);
  }
  RunOptions o;
  o.out_dir = c.out;
  const Trajectory tr = run_simulation(sim, o);
  const SeriesRow& last = tr.rows.back();
  std::cout << std::setprecision(10) << "steps " << tr.steps << "  dt " << tr.dt << "  t " << last.t
            << "\nE0 " << tr.rows.front().E0 << " -> " << last.E0 << "\nmax bc_mismatch "
            << last.bc_mismatch << "\nseries written to " << (std::filesystem::path(c.out) / "series.csv").string()
            << '\n';
  return kOk;
}

int cmd_sweep(const Common& c) {
  const Scenario sc = load(c);
  const SweepResult r = sweep_eps(sc, c.out);
  std::cout << std::setprecision(6) << std::left << std::setw(12) << "eps" << std::setw(16) << "final_E0"
            << std::setw(16) << "bc_mismatch" << "distance_to_eps0\n";
  for (const SweepEntry& e : r.entries)
    std::cout << std::setw(12) << e.eps << std::setw(16) << e.final_E0 << std::setw(16)
              << e.max_bc_mismatch << e.distance_to_zero << '\n';
  std::cout << "fitted exponent " << r.fitted_exponent << "  (dt " << r.dt << ")\n";
  return kOk;
}

int cmd_refine(const Common& c) {
  const Scenario sc = load(c);
  const auto rows = refine_study(sc, c.out);
  std::cout << std::setprecision(6) << std::left << std::setw(16) << "resolution" << std::setw(14) << "dt"
            << std::setw(16) << "error" << "order\n";
  for (const RefineEntry& e : rows) {
    std::ostringstream res;
    res << e.n_r << 'x' << e.n_theta;
    if (e.n_phi > 0) res << 'x' << e.n_phi;
    std::cout << std::setw(16) << res.str() << std::setw(14) << e.dt << std::setw(16) << e.error
              << e.order << '\n';
  }
  return kOk;
}

int cmd_check(const Common& c) {
  const Scenario sc = load(c);
  const CompatReport r = check_compat(sc);
  std::cout << std::setprecision(6);
  for (std::size_t k = 0; k < r.residuals.size(); ++k)
    std::cout << "order " << k << "  residual " << r.residuals[k] << '\n';
  std::cout << "threshold " << r.threshold << "  " << (r.pass ? "PASS" : "FAIL") << '\n';
  return r.pass ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigid body in a compressible fluid, fixed-domain solver"};
  app.require_subcommand(1);
  Common c;
  auto* run = app.add_subcommand("run", "time-integrate a scenario, writing series.csv and snapshots");
  add_common(run, c, true);
  auto* sweep = app.add_subcommand("sweep-eps", "repeat the run for each sweep.eps and eps = 0");
  add_common(sweep, c, true);
  auto* refine = app.add_subcommand("refine", "run at refine.levels resolutions, compare with the finest");
  add_common(refine, c, true);
  auto* check = app.add_subcommand("check-compat", "report compatibility residuals at t = 0");
  add_common(check, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*run) return cmd_run(c);
    if (*sweep) return cmd_sweep(c);
    if (*refine) return cmd_refine(c);
    return cmd_check(c);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kValidation;
  } catch (const ConstructionError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
