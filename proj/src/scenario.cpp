#include "rigidflow/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "rigidflow/errors.hpp"

namespace rigidflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v, const char* want, int line) {
  std::ostringstream os;
  os << "line " << line << ": key '" << key << "' expects " << want << ", got '" << v << "'";
  throw ParseError(os.str(), line);
}

double to_double(const std::string& key, const std::string& v, int line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) bad_value(key, v, "a number", line);
  return x;
}

int to_int(const std::string& key, const std::string& v, int line) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) bad_value(key, v, "an integer", line);
  return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item), line));
  if (out.empty()) bad_value(key, v, "a comma-separated list of numbers", line);
  return out;
}

Triple to_triple(const std::string& key, const std::string& v, int line) {
  const std::vector<double> l = to_list(key, v, line);
  if (l.size() < 2 || l.size() > 3) bad_value(key, v, "2 or 3 comma-separated numbers", line);
  return {l[0], l[1], l.size() == 3 ? l[2] : 0.0};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string fmt(const Triple& t) { return fmt(t[0]) + ", " + fmt(t[1]) + ", " + fmt(t[2]); }

std::string fmt(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

struct Key {
  std::function<void(Scenario&, const std::string&, const std::string&, int)> set;
  std::function<std::string(const Scenario&)> get;
  bool required = false;
};

template <class T>
Key number(T Scenario::*sec, double T::*field, bool required = false) {
  return {[=](Scenario& s, const std::string& k, const std::string& v, int line) {
            (s.*sec).*field = to_double(k, v, line);
          },
          [=](const Scenario& s) { return fmt((s.*sec).*field); }, required};
}

template <class T>
Key integer(T Scenario::*sec, int T::*field) {
  return {[=](Scenario& s, const std::string& k, const std::string& v, int line) {
            (s.*sec).*field = to_int(k, v, line);
          },
          [=](const Scenario& s) { return std::to_string((s.*sec).*field); }};
}

template <class T>
Key triple(T Scenario::*sec, Triple T::*field) {
  return {[=](Scenario& s, const std::string& k, const std::string& v, int line) {
            (s.*sec).*field = to_triple(k, v, line);
          },
          [=](const Scenario& s) { return fmt((s.*sec).*field); }};
}

template <class T>
Key text(T Scenario::*sec, std::string T::*field, bool required = false) {
  return {[=](Scenario& s, const std::string&, const std::string& v, int) { (s.*sec).*field = v; },
          [=](const Scenario& s) { return (s.*sec).*field; }, required};
}

// Ordered so that serialization groups keys by section.
const std::vector<std::pair<std::string, Key>>& schema() {
  using S = Scenario;
  static const std::vector<std::pair<std::string, Key>> keys = {
      {"geometry.dim", integer(&S::geometry, &S::Geometry::dim)},
      {"geometry.r_s", number(&S::geometry, &S::Geometry::r_s, true)},
      {"geometry.R_o", number(&S::geometry, &S::Geometry::R_o, true)},
      {"geometry.R0", number(&S::geometry, &S::Geometry::R0)},
      {"geometry.offset", triple(&S::geometry, &S::Geometry::offset)},
      {"mesh.N_r", integer(&S::geometry, &S::Geometry::n_r)},
      {"mesh.N_theta", integer(&S::geometry, &S::Geometry::n_theta)},
      {"mesh.N_phi", integer(&S::geometry, &S::Geometry::n_phi)},
      {"eos.gamma", number(&S::eos, &S::Eos::gamma, true)},
      {"eos.kappa", number(&S::eos, &S::Eos::kappa)},
      {"eos.c_v", number(&S::eos, &S::Eos::c_v)},
      {"eos.p_min", number(&S::eos, &S::Eos::p_min)},
      {"eos.p_max", number(&S::eos, &S::Eos::p_max)},
      {"eos.s_min", number(&S::eos, &S::Eos::s_min)},
      {"eos.s_max", number(&S::eos, &S::Eos::s_max)},
      {"initial.preset", text(&S::initial, &S::Initial::preset, true)},
      {"initial.p0", number(&S::initial, &S::Initial::p0)},
      {"initial.s0", number(&S::initial, &S::Initial::s0)},
      {"initial.amplitude", number(&S::initial, &S::Initial::amplitude)},
      {"initial.width", number(&S::initial, &S::Initial::width)},
      {"initial.center", number(&S::initial, &S::Initial::center)},
      {"initial.direction", triple(&S::initial, &S::Initial::direction)},
      {"initial.spin_rate", number(&S::initial, &S::Initial::spin_rate)},
      {"solid.rho_S", number(&S::solid, &S::Solid::rho_S)},
      {"solid.l0", triple(&S::solid, &S::Solid::l0)},
      {"solid.omega0", triple(&S::solid, &S::Solid::omega0)},
      {"fluid.cfl", number(&S::fluid, &S::Fluid::cfl)},
      {"fluid.eps", number(&S::fluid, &S::Fluid::eps)},
      {"fluid.compat_order", integer(&S::fluid, &S::Fluid::compat_order)},
      {"fluid.limiter", text(&S::fluid, &S::Fluid::limiter)},
      {"coupling.mode", text(&S::coupling, &S::Coupling::mode)},
      {"coupling.window", number(&S::coupling, &S::Coupling::window)},
      {"coupling.picard_tol", number(&S::coupling, &S::Coupling::picard_tol)},
      {"coupling.picard_max", integer(&S::coupling, &S::Coupling::picard_max)},
      {"run.t_end", number(&S::run, &S::Run::t_end)},
      {"run.dt", number(&S::run, &S::Run::dt)},
      {"run.output_every", integer(&S::run, &S::Run::output_every)},
      {"run.snapshot_every", integer(&S::run, &S::Run::snapshot_every)},
      {"check.threshold", number(&S::check, &S::Check::threshold)},
      {"sweep.eps",
       Key{[](S& s, const std::string& k, const std::string& v, int line) { s.sweep.eps = to_list(k, v, line); },
           [](const S& s) { return fmt(s.sweep.eps); }}},
      {"refine.levels", integer(&S::refine, &S::Refine::levels)},
  };
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const auto& [k, key] : schema())
    if (k == name) return &key;
  return nullptr;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"rest", "acoustic-pulse", "push", "spin"};
  return names;
}

Scenario parse_scenario_text(const std::string& src) {
  Scenario s;
  std::istringstream in(src);
  std::string raw, section;
  std::map<std::string, int> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = raw;
    const auto hash = l.find_first_of("#;");
    if (hash != std::string::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') throw ParseError("line " + std::to_string(line) + ": malformed section header", line);
      section = trim(l.substr(1, l.size() - 2));
      bool known = false;
      for (const auto& [k, key] : schema()) known |= k.rfind(section + ".", 0) == 0;
      if (!known) throw ParseError("line " + std::to_string(line) + ": unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line) + ": expected 'key = value'", line);
    if (section.empty())
      throw ParseError("line " + std::to_string(line) + ": key outside of any section", line);
    const std::string name = section + "." + trim(l.substr(0, eq));
    const std::string value = trim(l.substr(eq + 1));
    const Key* key = find_key(name);
    if (!key) throw ParseError("line " + std::to_string(line) + ": unknown key '" + name + "'", line);
    if (auto it = seen.find(name); it != seen.end()) {
      std::ostringstream os;
      os << "line " << line << ": duplicate key '" << name << "' (first set on line " << it->second << ")";
      throw ParseError(os.str(), line);
    }
    seen[name] = line;
    key->set(s, name, value, line);
  }
  for (const auto& [k, key] : schema()) {
    if (key.required && !seen.count(k)) {
      std::ostringstream os;
      os << "line " << line << ": missing required key '" << k << "'";
      throw ParseError(os.str(), line);
    }
  }
  s.validate();
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open scenario file '" + path + "'", 0);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario_text(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  std::string section;
  for (const auto& [k, key] : schema()) {
    const std::string sec = k.substr(0, k.find('.'));
    if (sec != section) {
      if (!section.empty()) os << "\n";
      os << "[" << sec << "]\n";
      section = sec;
    }
    os << k.substr(k.find('.') + 1) << " = " << key.get(s) << "\n";
  }
  return os.str();
}

void Scenario::validate() const {
  try {
    domain().validate();
  } catch (const ConstructionError& e) {
    throw ValidationError(std::string("geometry: ") + e.what());
  }
  require(geometry.dim == 2 || geometry.dim == 3, "geometry.dim must be 2 or 3");
  require(geometry.n_r >= 8 && geometry.n_theta >= 8, "mesh.N_r and mesh.N_theta must be at least 8");
  if (geometry.dim == 3)
    require(geometry.n_phi >= 8 && geometry.n_phi % 2 == 0, "mesh.N_phi must be even and at least 8 in 3D");
  else
    require(geometry.offset[2] == 0.0, "geometry.offset must lie in the plane for dim = 2");
  eos_params().validate();
  box().validate();
  bool known = false;
  for (const auto& p : preset_names()) known |= p == initial.preset;
  require(known, "initial.preset '" + initial.preset + "' is not one of rest, acoustic-pulse, push, spin");
  require(box().contains({initial.p0, initial.s0}), "initial.p0/s0 must lie inside the hyperbolicity box");
  require(initial.width > 0.0, "initial.width must be positive");
  require(std::hypot(initial.direction[0], initial.direction[1], initial.direction[2]) > 0.0,
          "initial.direction must be nonzero");
  require(solid.rho_S > 0.0, "solid.rho_S must be positive");
  require(fluid.cfl > 0.0, "fluid.cfl must be positive");
  require(fluid.eps >= 0.0 && fluid.eps <= 1.0, "fluid.eps must lie in [0, 1]");
  require(fluid.compat_order >= 0 && fluid.compat_order <= 2, "fluid.compat_order must be 0, 1 or 2");
  require(fluid.limiter == "llf" || fluid.limiter == "none", "fluid.limiter must be llf or none");
  require(coupling.mode == "subiterated" || coupling.mode == "window",
          "coupling.mode must be subiterated or window");
  coupling_config().validate();
  require(run.t_end >= 0.0, "run.t_end must be non-negative");
  require(run.dt >= 0.0, "run.dt must be non-negative");
  require(run.output_every >= 1, "run.output_every must be at least 1");
  require(run.snapshot_every >= 0, "run.snapshot_every must be non-negative");
  require(check.threshold > 0.0, "check.threshold must be positive");
  for (double e : sweep.eps) require(e > 0.0 && e <= 1.0, "sweep.eps entries must lie in (0, 1]");
  require(refine.levels >= 2, "refine.levels must be at least 2");
}

DomainSpec Scenario::domain() const {
  return DomainSpec{geometry.dim, geometry.r_s, geometry.R_o, geometry.R0,
                    Vec3(geometry.offset[0], geometry.offset[1], geometry.offset[2])};
}

Resolution Scenario::resolution() const {
  return Resolution{geometry.n_r, geometry.n_theta, geometry.dim == 3 ? geometry.n_phi : 0};
}

EosParams Scenario::eos_params() const { return EosParams{eos.gamma, eos.kappa, eos.c_v}; }

HyperbolicityBox Scenario::box() const {
  return HyperbolicityBox{eos.p_min, eos.p_max, eos.s_min, eos.s_max};
}

FluidOptions Scenario::fluid_options() const {
  FluidOptions o;
  o.cfl = fluid.cfl;
  o.limiter = fluid.limiter == "none" ? Limiter::none : Limiter::llf;
  return o;
}

CouplingConfig Scenario::coupling_config() const {
  CouplingConfig c;
  c.mode = coupling.mode == "window" ? CouplingMode::partitioned_window : CouplingMode::subiterated_step;
  c.window = coupling.window;
  c.picard_tol = coupling.picard_tol;
  c.picard_max = coupling.picard_max;
  return c;
}

SolidVelocity Scenario::initial_theta() const {
  SolidVelocity th{Vec3(solid.l0[0], solid.l0[1], solid.l0[2]),
                   Vec3(solid.omega0[0], solid.omega0[1], solid.omega0[2])};
  if (initial.preset == "spin" && th.omega.isZero(0.0)) th.omega = Vec3(0.0, 0.0, initial.spin_rate);
  return planar_restrict(th, geometry.dim);
}

FluidField initial_field(const Scenario& s, const Mesh& mesh) {
  const std::size_t n = mesh.node_count();
  FluidField U = FluidField::uniform(n, s.initial.p0, Vec3::Zero(), s.initial.s0);
  const auto& in = s.initial;
  if (in.preset == "acoustic-pulse") {
    const double rc = in.center > 0.0 ? in.center : 0.5 * (s.geometry.r_s + s.geometry.R_o);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = mesh.position(i).norm();
      U.p[i] += in.amplitude * std::exp(-std::pow((r - rc) / in.width, 2));
    }
  } else if (in.preset == "push") {
    // pressure high on the side opposite to `direction`, so the net load
    // pushes the body along it
    const Vec3 d = Vec3(in.direction[0], in.direction[1], in.direction[2]).normalized();
    for (std::size_t i = 0; i < n; ++i) {
      const double x = mesh.position(i).dot(d);
      U.p[i] += in.amplitude * 0.5 * (1.0 - std::tanh(x / in.width));
    }
  }
  return U;
}

}  // namespace rigidflow
