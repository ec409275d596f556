#include "rigidflow/runner.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rigidflow/errors.hpp"

namespace rigidflow {

namespace fs = std::filesystem;

namespace {

TimeLevel as_level(const CoupledState& s) { return TimeLevel{s.t, s.U, s.theta, s.conf}; }

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(fs::path(dir) / name);
  if (!f) throw Error("cannot write '" + (fs::path(dir) / name).string() + "'");
  f << std::setprecision(17);
  return f;
}

void put_f64(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  os.write(buf, 8);
}

std::string eps_tag(double e) {
  std::ostringstream os;
  os << std::setprecision(6) << e;
  return os.str();
}

}  // namespace

// ----------------------------------------------------------------- Simulation

Simulation::Simulation(const Scenario& sc) : sc_(sc) {
  sc_.validate();
  mesh_ = std::make_unique<Mesh>(sc_.domain(), sc_.resolution());
  props_ = mass_properties(sc_.solid.rho_S, sc_.domain());
  U0_ = initial_field(sc_, *mesh_);
  const SolidVelocity th0 = sc_.initial_theta();
  const FluidSolver bare(*mesh_, sc_.eos_params(), sc_.box(), no_regularization(*mesh_, U0_),
                         sc_.fluid_options());
  bare.check_state(U0_);
  compat_ = bare.compatibility_derivatives(U0_, th0, props_, std::max(1, sc_.fluid.compat_order));
  CompatibilityDerivatives used;
  used.U.assign(compat_.U.begin(), compat_.U.begin() + sc_.fluid.compat_order + 1);
  used.theta.assign(compat_.theta.begin(), compat_.theta.begin() + sc_.fluid.compat_order + 1);
  solver_ = std::make_unique<FluidSolver>(*mesh_, sc_.eos_params(), sc_.box(),
                                          make_regularization(*mesh_, sc_.fluid.eps, used),
                                          sc_.fluid_options());
  coupler_ = std::make_unique<CoupledSolver>(*solver_, props_, sc_.coupling_config());
}

CoupledState Simulation::initial_state() const {
  return CoupledState{0.0, U0_, sc_.initial_theta(), Configuration::identity(*mesh_)};
}

double Simulation::default_dt() const {
  if (sc_.run.dt > 0.0) return sc_.run.dt;
  const CoupledState s = initial_state();
  return 0.8 * solver_->max_stable_dt(s.U, node_kinematics(*mesh_, s.theta, s.conf));
}

// ----------------------------------------------------------------- output

void write_series_header(std::ostream& os, int dim) {
  os << "t,E0,E1,bc_mismatch,vort_res,ent_res";
  for (int i = 1; i <= dim; ++i) os << ",l_" << i;
  if (dim == 2)
    os << ",omega";
  else
    os << ",omega_1,omega_2,omega_3";
  for (int i = 1; i <= dim; ++i) os << ",h_" << i;
  os << ",picard_iters\n";
}

void write_series_row(std::ostream& os, const SeriesRow& r, int dim) {
  os << r.t << ',' << r.E0 << ',' << r.E1 << ',' << r.bc_mismatch << ',' << r.vort_res << ','
     << r.ent_res;
  for (int i = 0; i < dim; ++i) os << ',' << r.theta.l(i);
  if (dim == 2)
    os << ',' << r.theta.omega.z();
  else
    for (int i = 0; i < 3; ++i) os << ',' << r.theta.omega(i);
  for (int i = 0; i < dim; ++i) os << ',' << r.h(i);
  os << ',' << r.picard_iters << '\n';
}

std::string write_snapshot(const std::string& dir, long index, const Mesh& mesh,
                           const CoupledState& s) {
  fs::create_directories(dir);
  std::ostringstream stem;
  stem << "snap_" << std::setw(6) << std::setfill('0') << index;
  const int dim = mesh.dim();
  {
    std::ofstream bin(fs::path(dir) / (stem.str() + ".bin"), std::ios::binary);
    if (!bin) throw Error("cannot write snapshot in '" + dir + "'");
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      put_f64(bin, s.U.p[i]);
      for (int c = 0; c < dim; ++c) put_f64(bin, s.U.u[i](c));
      put_f64(bin, s.U.s[i]);
    }
  }
  std::ofstream txt(fs::path(dir) / (stem.str() + ".txt"));
  txt << std::setprecision(17);
  const Resolution& r = mesh.resolution();
  txt << "time = " << s.t << "\n"
      << "dim = " << dim << "\n"
      << "radial_nodes = " << r.n_r + 1 << "\n"
      << "angular_nodes = " << r.n_theta << "\n"
      << "azimuth_nodes = " << (dim == 3 ? r.n_phi : 1) << "\n"
      << "node_count = " << mesh.node_count() << "\n"
      << "node_index = i + radial_nodes * (j + angular_nodes * k)\n"
      << "variables = p," << (dim == 2 ? "u_1,u_2" : "u_1,u_2,u_3") << ",s\n"
      << "layout = node-major, variables interleaved per node\n"
      << "dtype = float64 little-endian\n"
      << "velocity = Cartesian components in the reference frame\n";
  return stem.str();
}

double field_distance(const Mesh& mesh, const FluidField& a, const FluidField& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const double d = std::pow(a.p[i] - b.p[i], 2) + (a.u[i] - b.u[i]).squaredNorm() +
                     std::pow(a.s[i] - b.s[i], 2);
    sum += mesh.volume_weight(i) * d;
  }
  return std::sqrt(sum);
}

// ----------------------------------------------------------------- run

Trajectory run_simulation(const Simulation& sim, const RunOptions& opts) {
  const Scenario& sc = sim.scenario();
  const Mesh& mesh = sim.mesh();
  const FluidSolver& solver = sim.solver();
  const int dim = mesh.dim();
  Trajectory tr;
  tr.compat_res = compatibility_residual(mesh, sim.compat());

  const double t_end = sc.run.t_end;
  double dt = opts.dt > 0.0 ? opts.dt : sim.default_dt();
  long n_steps = 0;
  if (t_end > 0.0) {
    n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
    dt = t_end / static_cast<double>(n_steps);
  }
  tr.dt = dt;

  std::ofstream series;
  const bool files = !opts.out_dir.empty();
  if (files) {
    series = open_out(opts.out_dir, "series.csv");
    write_series_header(series, dim);
  }
  const auto emit = [&](const SeriesRow& row) {
    tr.rows.push_back(row);
    if (files) {
      write_series_row(series, row, dim);
      series.flush();
    }
  };

  CoupledState state = sim.initial_state();
  {
    const TimeLevel lv = as_level(state);
    const FluidField& dUdt = sim.compat().U[1];
    const NodeKinematics kin = node_kinematics(mesh, state.theta, state.conf);
    SeriesRow row;
    row.t = 0.0;
    row.E0 = conormal_energy0(solver, sim.props(), lv);
    row.E1 = conormal_energy1(solver, sim.props(), lv, dUdt);
    row.bc_mismatch = solver.boundary_mismatch(state.U, kin);
    row.vort_res = vorticity_residual(solver, lv, dUdt);
    row.ent_res = entropy_residual(solver, lv, dUdt);
    row.theta = state.theta;
    row.h = state.conf.h;
    emit(row);
  }
  long snap = 0;
  if (files && sc.run.snapshot_every > 0) write_snapshot(opts.out_dir, snap++, mesh, state);

  long step = 0, next_output = sc.run.output_every, next_snap = sc.run.snapshot_every;
  while (step < n_steps) {
    const CoupledState prev = state;
    AdvanceResult ar;
    try {
      const double t_stop = static_cast<double>(n_steps - step) * dt + state.t;
      ar = sim.coupler().advance(state, dt, t_stop);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "simulation failed at t=" << state.t << " (step " << step << "): " << e.what();
      throw SimulationError(os.str(), state.t, step);
    }
    step += ar.steps;
    state = std::move(ar.state);
    // pin the clock to the step grid so rounding does not accumulate
    state.t = static_cast<double>(step) * dt;
    if (step >= next_output || step == n_steps) {
      while (next_output <= step) next_output += sc.run.output_every;
      const TimeLevel a = as_level(prev), b = as_level(state);
      const NodeKinematics kin = node_kinematics(mesh, state.theta, state.conf);
      SeriesRow row;
      row.t = state.t;
      row.E0 = conormal_energy0(solver, sim.props(), b);
      row.E1 = conormal_energy1(solver, sim.props(), b, &a);
      row.bc_mismatch = solver.boundary_mismatch(state.U, kin);
      row.vort_res = vorticity_residual(solver, &a, b);
      row.ent_res = entropy_residual(solver, &a, b);
      row.theta = state.theta;
      row.h = state.conf.h;
      row.picard_iters = ar.picard_iters;
      emit(row);
    }
    if (files && sc.run.snapshot_every > 0 && (step >= next_snap || step == n_steps)) {
      while (next_snap <= step) next_snap += sc.run.snapshot_every;
      write_snapshot(opts.out_dir, snap++, mesh, state);
    }
  }
  tr.steps = step;
  tr.final_state = std::move(state);
  return tr;
}

// ----------------------------------------------------------------- sweeps

SweepResult sweep_eps(const Scenario& sc, const std::string& out_dir) {
  std::vector<double> values = sc.sweep.eps;
  values.push_back(0.0);
  std::vector<std::unique_ptr<Simulation>> sims;
  double dt = 0.0;
  for (double e : values) {
    Scenario s = sc;
    s.fluid.eps = e;
    sims.push_back(std::make_unique<Simulation>(s));
    const double d = sims.back()->default_dt();
    dt = dt == 0.0 ? d : std::min(dt, d);
  }
  SweepResult res;
  std::vector<Trajectory> runs;
  for (std::size_t k = 0; k < sims.size(); ++k) {
    RunOptions o;
    o.dt = dt;
    if (!out_dir.empty()) o.out_dir = (fs::path(out_dir) / ("eps_" + eps_tag(values[k]))).string();
    runs.push_back(run_simulation(*sims[k], o));
  }
  res.dt = runs.back().dt;
  const Trajectory& ref = runs.back();
  const Mesh& mesh = sims.back()->mesh();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    SweepEntry e;
    e.eps = values[k];
    e.final_E0 = runs[k].rows.back().E0;
    for (const SeriesRow& r : runs[k].rows) e.max_bc_mismatch = std::max(e.max_bc_mismatch, r.bc_mismatch);
    e.distance_to_zero = field_distance(mesh, runs[k].final_state.U, ref.final_state.U);
    res.entries.push_back(e);
  }
  // least-squares slope over the positive eps values
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const SweepEntry& e : res.entries) {
    if (e.eps <= 0.0 || e.distance_to_zero <= 0.0) continue;
    const double x = std::log(e.eps), y = std::log(e.distance_to_zero);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) res.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!out_dir.empty()) {
    std::ofstream f = open_out(out_dir, "sweep.csv");
    f << "eps,final_E0,max_bc_mismatch,distance_to_eps0\n";
    for (const SweepEntry& e : res.entries)
      f << e.eps << ',' << e.final_E0 << ',' << e.max_bc_mismatch << ',' << e.distance_to_zero << '\n';
    f << "# fitted exponent " << res.fitted_exponent << ", dt " << res.dt << '\n';
  }
  return res;
}

FluidField restrict_field(const Mesh& fine, const FluidField& f, const Mesh& coarse) {
  const int ratio = fine.resolution().n_r / coarse.resolution().n_r;
  FluidField out(coarse.node_count());
  for (std::size_t n = 0; n < coarse.node_count(); ++n) {
    const int i = coarse.radial_index(n) * ratio;
    const int k = coarse.azimuth_index(n) * ratio;
    const int j = coarse.angular_index(n);
    std::size_t a, b;
    double w = 0.0;
    if (coarse.dim() == 2) {
      a = b = fine.index(i, j * ratio, k);
    } else {
      // colatitudes sit at cell centres and do not nest
      const double jf = (j + 0.5) * ratio - 0.5;
      const int j0 = static_cast<int>(std::floor(jf));
      w = jf - j0;
      a = fine.index(i, j0, k);
      b = fine.index(i, std::min(j0 + 1, fine.n1() - 1), k);
    }
    out.p[n] = (1 - w) * f.p[a] + w * f.p[b];
    out.u[n] = (1 - w) * f.u[a] + w * f.u[b];
    out.s[n] = (1 - w) * f.s[a] + w * f.s[b];
  }
  return out;
}

std::vector<RefineEntry> refine_study(const Scenario& sc, const std::string& out_dir) {
  const int L = sc.refine.levels;
  std::vector<Scenario> levels;
  for (int k = 0; k < L; ++k) {
    Scenario s = sc;
    s.geometry.n_r <<= k;
    s.geometry.n_theta <<= k;
    if (s.geometry.dim == 3) s.geometry.n_phi <<= k;
    levels.push_back(s);
  }
  // steps shrink with the spacing: the finest level sets the CFL number
  const Simulation finest(levels.back());
  const double dt_fine = finest.default_dt();
  std::vector<std::unique_ptr<Simulation>> sims;
  std::vector<Trajectory> runs;
  for (int k = 0; k < L; ++k) {
    sims.push_back(std::make_unique<Simulation>(levels[k]));
    RunOptions o;
    o.dt = dt_fine * std::ldexp(1.0, L - 1 - k);
    runs.push_back(run_simulation(*sims.back(), o));
  }
  std::vector<RefineEntry> out;
  for (int k = 0; k < L; ++k) {
    RefineEntry e;
    e.n_r = levels[k].geometry.n_r;
    e.n_theta = levels[k].geometry.n_theta;
    e.n_phi = levels[k].geometry.dim == 3 ? levels[k].geometry.n_phi : 0;
    e.dt = runs[k].dt;
    if (k < L - 1) {
      const FluidField ref = restrict_field(sims.back()->mesh(), runs.back().final_state.U, sims[k]->mesh());
      e.error = field_distance(sims[k]->mesh(), runs[k].final_state.U, ref);
    }
    out.push_back(e);
  }
  for (int k = 0; k + 2 < L; ++k)
    if (out[k + 1].error > 0.0) out[k].order = std::log2(out[k].error / out[k + 1].error);
  if (!out_dir.empty()) {
    std::ofstream f = open_out(out_dir, "refine.csv");
    f << "n_r,n_theta,n_phi,dt,error_vs_finest,observed_order\n";
    for (const RefineEntry& e : out)
      f << e.n_r << ',' << e.n_theta << ',' << e.n_phi << ',' << e.dt << ',' << e.error << ','
        << e.order << '\n';
  }
  return out;
}

CompatReport check_compat(const Scenario& sc) {
  const Simulation sim(sc);
  CompatibilityDerivatives cd = sim.compat();
  const auto K = static_cast<std::size_t>(std::max(1, sc.fluid.compat_order));
  cd.U.resize(K + 1);
  cd.theta.resize(K + 1);
  CompatReport r;
  r.residuals = compatibility_residual(sim.mesh(), cd);
  r.threshold = sc.check.threshold;
  r.pass = true;
  for (double v : r.residuals) r.pass = r.pass && v <= r.threshold;
  return r;
}

}  // namespace rigidflow
