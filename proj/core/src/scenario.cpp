#include <kplateau/scenario.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace kp {

LinkConfig ScenarioConfig::link() const {
  LinkConfig l;
  for (const auto& r : rods) l.rods.push_back(r.model);
  l.gravity = gravity;
  return l;
}

SolveOptions ScenarioConfig::solve_options() const {
  SolveOptions o = solver;
  for (std::size_t r = 0; r < rods.size() && r < 2; ++r) o.shape_free[r] = rods[r].shape_free;
  return o;
}

const ElasticDensity& ScenarioConfig::stiffness(int rod) const {
  static const ElasticDensity unused;
  return rod < static_cast<int>(rods.size()) ? rods[rod].stiffness : unused;
}

void ScenarioConfig::validate() const {
  link().validate();
  for (const auto& r : rods) r.stiffness.validate();
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::InvalidInput, "sigma must be finite and >= 0");
  solve_options().validate();
  if (relax_steps < 0) throw Error(ErrorKind::InvalidInput, "relax_steps must be >= 0");
  if (solver.film.boundary_points < 8) throw Error(ErrorKind::InvalidInput, "boundary_points must be >= 8");
  if (solver.film.phases < 1) throw Error(ErrorKind::InvalidInput, "phases must be >= 1");
  const ProbeOptions& p = solver.film.probes;
  if (p.stations < 1 || p.d_class < 0 || p.loop_points < 3) {
    throw Error(ErrorKind::InvalidInput, "probe counts must be positive (loop points >= 3)");
  }
  const ConstraintOptions& c = solver.constraints;
  if (!(c.voxel_fraction > 0.0) || !(c.closure_tolerance > 0.0) || !(c.self_link_offset > 0.0 && c.self_link_offset < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "constraint options out of range");
  }
  if (output.dir.empty() || output.mesh.empty() || output.trace.empty()) {
    throw Error(ErrorKind::InvalidInput, "output paths must not be empty");
  }
}

namespace {

// Rod as it appears in the file: constant densities may be given as one value.
struct RodDraft {
  double length = kTwoPi;
  int nodes = 257;
  std::vector<double> k1{1.0}, k2{0.0}, omega{0.0};
  double radius = 0.05;
  double max_thickness = -1.0;  // defaults to the radius
  double rho = 1.0;
  std::vector<double> rho_nodes;
  Vec3 origin = Vec3(1, 0, 0);
  Vec3 u = Vec3(-1, 0, 0);
  Vec3 v = Vec3(0, 0, 1);
  Vec3 stiffness = Vec3(1, 1, 1);
  double barrier = 0.0;
  bool shape_free = true;
};

std::vector<double> compress(const std::vector<double>& xs) {
  if (!xs.empty() && std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return {xs.front()};
  return xs;
}

RodDraft to_draft(const RodConfig& r) {
  RodDraft d;
  d.length = r.model.density.length;
  d.nodes = r.model.density.size();
  d.k1 = compress(r.model.density.k1);
  d.k2 = compress(r.model.density.k2);
  d.omega = compress(r.model.density.omega);
  d.radius = r.model.section.radius;
  d.max_thickness = r.model.section.max_thickness;
  d.rho = r.model.rho;
  d.rho_nodes = r.model.rho_nodes;
  d.origin = r.model.placement.origin;
  d.u = r.model.placement.frame.u;
  d.v = r.model.placement.frame.v;
  d.stiffness = Vec3(r.stiffness.a1, r.stiffness.a2, r.stiffness.a3);
  d.barrier = r.stiffness.barrier_eps;
  d.shape_free = r.shape_free;
  return d;
}

struct ConfigFailure {
  int line;
  std::string message;
};

RodConfig from_draft(const RodDraft& d, const std::map<std::string, int>& lines) {
  auto line_of = [&](const char* key) {
    const auto it = lines.find(key);
    return it == lines.end() ? lines.at("") : it->second;
  };
  auto expand = [&](const std::vector<double>& xs, const char* key) {
    if (xs.size() == 1) return std::vector<double>(d.nodes, xs.front());
    if (static_cast<int>(xs.size()) != d.nodes) {
      throw ConfigFailure{line_of(key), std::string("key '") + key + "': expected 1 or " + std::to_string(d.nodes) +
                                            " values (nodes), got " + std::to_string(xs.size())};
    }
    return xs;
  };
  RodConfig r;
  r.model.density.length = d.length;
  r.model.density.k1 = expand(d.k1, "k1");
  r.model.density.k2 = expand(d.k2, "k2");
  r.model.density.omega = expand(d.omega, "omega");
  r.model.section.radius = d.radius;
  r.model.section.max_thickness = d.max_thickness < 0 ? d.radius : d.max_thickness;
  r.model.rho = d.rho;
  r.model.rho_nodes = d.rho_nodes;
  r.model.placement.origin = d.origin;
  r.model.placement.frame = Frame::from_uv(d.u, d.v);
  r.stiffness = ElasticDensity{d.stiffness.x(), d.stiffness.y(), d.stiffness.z(), d.barrier};
  r.shape_free = d.shape_free;
  return r;
}

using Target = std::variant<double*, int*, bool*, Vec3*, std::vector<double>*, std::string*, std::uint64_t*>;

struct Key {
  std::string name;
  Target target;
  std::function<std::string()> check = {};  // non-empty result: the value is rejected
};

std::function<std::string()> positive(const double* x, std::string what) {
  return [x, what] { return *x > 0.0 && std::isfinite(*x) ? std::string() : what + " must be positive"; };
}

std::function<std::string()> at_least(const int* x, int lo, std::string what) {
  return [x, lo, what] { return *x >= lo ? std::string() : what + " must be >= " + std::to_string(lo); };
}

std::function<std::string()> non_negative(const double* x, std::string what) {
  return [x, what] { return *x >= 0.0 ? std::string() : what + " must be >= 0"; };
}

std::vector<Key> scene_keys(ScenarioConfig& c) {
  return {{"name", &c.name},
          {"sigma", &c.sigma, non_negative(&c.sigma, "sigma")},
          {"gravity", &c.gravity}};
}

std::vector<Key> rod_keys(RodDraft& d) {
  return {{"length", &d.length, positive(&d.length, "length")},
          {"nodes", &d.nodes, at_least(&d.nodes, 8, "nodes")},
          {"k1", &d.k1},
          {"k2", &d.k2},
          {"omega", &d.omega},
          {"radius", &d.radius, positive(&d.radius, "radius")},
          {"max_thickness", &d.max_thickness, positive(&d.max_thickness, "max_thickness")},
          {"rho", &d.rho, positive(&d.rho, "rho")},
          {"rho_nodes", &d.rho_nodes},
          {"origin", &d.origin},
          {"u", &d.u},
          {"v", &d.v},
          {"stiffness", &d.stiffness,
           [&d] { return (d.stiffness.array() > 0.0).all() ? std::string() : std::string("stiffness must be positive"); }},
          {"barrier", &d.barrier},
          {"shape_free", &d.shape_free}};
}

std::vector<Key> solver_keys(SolveOptions& o) {
  return {{"outer_iters", &o.outer_iters, at_least(&o.outer_iters, 0, "outer_iters")},
          {"film_steps_per_outer", &o.film_steps_per_outer, at_least(&o.film_steps_per_outer, 0, "film_steps_per_outer")},
          {"final_film_steps", &o.final_film_steps, at_least(&o.final_film_steps, 0, "final_film_steps")},
          {"penalty_closure", &o.weights.closure, non_negative(&o.weights.closure, "penalty_closure")},
          {"penalty_margin", &o.weights.margin, non_negative(&o.weights.margin, "penalty_margin")},
          {"penalty_overlap", &o.weights.overlap, non_negative(&o.weights.overlap, "penalty_overlap")},
          {"penalty_gap", &o.weights.gap, non_negative(&o.weights.gap, "penalty_gap")},
          {"margin_slack", &o.weights.margin_slack},
          {"penalty_growth", &o.penalty_growth,
           [&o] { return o.penalty_growth >= 1.0 ? std::string() : std::string("penalty_growth must be >= 1"); }},
          {"growth_rounds", &o.growth_rounds, at_least(&o.growth_rounds, 0, "growth_rounds")},
          {"step_clamp", &o.step_clamp,
           [&o] { return o.step_clamp != 0.0 ? std::string() : std::string("step_clamp must be positive (or < 0 for automatic)"); }},
          {"tolerance", &o.tolerance, non_negative(&o.tolerance, "tolerance")},
          {"stall_iters", &o.stall_iters, at_least(&o.stall_iters, 1, "stall_iters")},
          {"gradient_tolerance", &o.gradient_tolerance, non_negative(&o.gradient_tolerance, "gradient_tolerance")},
          {"closure_tolerance", &o.closure_tolerance, positive(&o.closure_tolerance, "closure_tolerance")},
          {"harmonics", &o.harmonics, at_least(&o.harmonics, 0, "harmonics")},
          {"placement_free", &o.placement_free},
          {"energy_bound", &o.energy_bound,
           [&o] { return o.energy_bound > 0.0 ? std::string() : std::string("energy_bound must be positive (inf: none)"); }},
          {"lk12", &o.lk12},
          {"seed", &o.seed}};
}

std::vector<Key> film_keys(ScenarioConfig& c) {
  FilmOptions& f = c.solver.film;
  return {{"boundary_points", &f.boundary_points, at_least(&f.boundary_points, 8, "boundary_points")},
          {"target_edge", &f.target_edge},
          {"phases", &f.phases, at_least(&f.phases, 1, "phases")},
          {"relax_steps", &c.relax_steps, at_least(&c.relax_steps, 0, "relax_steps")},
          {"probe_stations", &f.probes.stations, at_least(&f.probes.stations, 1, "probe_stations")},
          {"probe_d_class", &f.probes.d_class, at_least(&f.probes.d_class, 0, "probe_d_class")},
          {"probe_loop_points", &f.probes.loop_points, at_least(&f.probes.loop_points, 3, "probe_loop_points")},
          {"probe_max_bridge", &f.probes.max_bridge}};
}

std::vector<Key> constraint_keys(ConstraintOptions& o) {
  return {{"voxel_fraction", &o.voxel_fraction, positive(&o.voxel_fraction, "voxel_fraction")},
          {"closure_tolerance", &o.closure_tolerance, positive(&o.closure_tolerance, "closure_tolerance")},
          {"self_link_offset", &o.self_link_offset, positive(&o.self_link_offset, "self_link_offset")}};
}

std::vector<Key> output_keys(OutputConfig& o) { return {{"dir", &o.dir}, {"mesh", &o.mesh}, {"trace", &o.trace}}; }

// ---- value text ----

std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format(const Target& t) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_real(*p);
        } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, Vec3>) {
          return format_real(p->x()) + " " + format_real(p->y()) + " " + format_real(p->z());
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string s;
          for (std::size_t i = 0; i < p->size(); ++i) s += (i ? " " : "") + format_real((*p)[i]);
          return s;
        } else {
          return *p;
        }
      },
      t);
}

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool read_real(const std::string& tok, double& x) {
  const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  return ec == std::errc() && end == tok.data() + tok.size() && !std::isnan(x);
}

template <class Int>
bool read_int(const std::string& tok, Int& x) {
  const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  return ec == std::errc() && end == tok.data() + tok.size();
}

// Empty result on success, otherwise what was expected.
std::string assign(const Target& t, std::string_view text) {
  const auto toks = tokens(text);
  return std::visit(
      [&](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          return toks.size() == 1 && read_real(toks[0], *p) ? "" : "a real number";
        } else if constexpr (std::is_same_v<T, int>) {
          return toks.size() == 1 && read_int(toks[0], *p) ? "" : "an integer";
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          return toks.size() == 1 && read_int(toks[0], *p) ? "" : "a non-negative integer";
        } else if constexpr (std::is_same_v<T, bool>) {
          if (toks.size() == 1 && (toks[0] == "true" || toks[0] == "false")) {
            *p = toks[0] == "true";
            return "";
          }
          return "true or false";
        } else if constexpr (std::is_same_v<T, Vec3>) {
          Vec3 v;
          if (toks.size() == 3 && read_real(toks[0], v.x()) && read_real(toks[1], v.y()) && read_real(toks[2], v.z())) {
            *p = v;
            return "";
          }
          return "three real numbers";
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::vector<double> xs(toks.size());
          for (std::size_t i = 0; i < toks.size(); ++i) {
            if (!read_real(toks[i], xs[i])) return "a list of real numbers";
          }
          *p = std::move(xs);
          return "";
        } else {
          *p = std::string(text);
          return "";
        }
      },
      t);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Message of a library error without its kind prefix.
std::string reason(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw Error(ErrorKind::Config, "line " + std::to_string(line) + ": " + message);
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig c;
  RodDraft drafts[2];
  std::map<std::string, int> rod_lines[2];  // key -> line; "" -> section header
  std::map<std::string, std::set<std::string>> seen;
  std::map<std::string, int> section_line;
  std::string section;
  std::vector<Key> keys;

  auto keys_for = [&](const std::string& name) -> std::vector<Key> {
    if (name == "scene") return scene_keys(c);
    if (name == "rod1") return rod_keys(drafts[0]);
    if (name == "rod2") return rod_keys(drafts[1]);
    if (name == "solver") return solver_keys(c.solver);
    if (name == "film") return film_keys(c);
    if (name == "constraints") return constraint_keys(c.solver.constraints);
    if (name == "output") return output_keys(c.output);
    return {};
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      keys = keys_for(section);
      if (keys.empty()) fail(line_no, "unknown section [" + section + "]");
      if (section_line.count(section)) fail(line_no, "section [" + section + "] appears twice");
      section_line[section] = line_no;
      if (section == "rod1") rod_lines[0][""] = line_no;
      if (section == "rod2") rod_lines[1][""] = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) fail(line_no, "key '" + key + "' outside of any section");
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
    if (it == keys.end()) fail(line_no, "unknown key '" + key + "' in [" + section + "]");
    if (!seen[section].insert(key).second) fail(line_no, "key '" + key + "' given twice in [" + section + "]");
    if (const std::string expected = assign(it->target, value); !expected.empty()) {
      fail(line_no, "key '" + key + "' expects " + expected + ", got '" + value + "'");
    }
    if (it->check) {
      if (const std::string why = it->check(); !why.empty()) fail(line_no, "key '" + key + "': " + why);
    }
    if (section == "rod1") rod_lines[0][key] = line_no;
    if (section == "rod2") rod_lines[1][key] = line_no;
  }

  if (!section_line.count("rod1")) throw Error(ErrorKind::Config, "missing section [rod1]");
  for (int r = 0; r < 2; ++r) {
    if (!rod_lines[r].count("")) continue;
    try {
      c.rods.push_back(from_draft(drafts[r], rod_lines[r]));
      c.rods.back().model.validate();
      c.rods.back().stiffness.validate();
    } catch (const ConfigFailure& f) {
      fail(f.line, f.message);
    } catch (const Error& e) {
      fail(rod_lines[r][""], "[rod" + std::to_string(r + 1) + "] " + reason(e));
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    fail(line_no, reason(e));
  }
  return c;
}

std::string serialize_config(const ScenarioConfig& config) {
  ScenarioConfig c = config;  // key tables need mutable targets
  std::string out;
  auto write = [&](const std::string& header, const std::vector<Key>& keys) {
    out += "[" + header + "]\n";
    for (const Key& k : keys) out += k.name + " = " + format(k.target) + "\n";
    out += "\n";
  };
  write("scene", scene_keys(c));
  for (std::size_t r = 0; r < c.rods.size(); ++r) {
    RodDraft d = to_draft(c.rods[r]);
    auto keys = rod_keys(d);
    if (d.rho_nodes.empty()) std::erase_if(keys, [](const Key& k) { return k.name == "rho_nodes"; });
    write("rod" + std::to_string(r + 1), keys);
  }
  write("solver", solver_keys(c.solver));
  write("film", film_keys(c));
  write("constraints", constraint_keys(c.solver.constraints));
  write("output", output_keys(c.output));
  out.pop_back();
  return out;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + reason(e));
  }
}

}  // namespace kp
