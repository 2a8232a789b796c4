#include "cli.hpp"

#include <kplateau/export.hpp>
#include <kplateau/scenario.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>

namespace kp {

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

struct UsageError {
  std::string message;
};

ScenarioConfig load_scenario(const CommonFlags& flags) {
  if (flags.config.empty() == flags.preset.empty()) {
    throw UsageError{"exactly one of --config PATH or --preset NAME is required"};
  }
  ScenarioConfig c;
  try {
    c = flags.preset.empty() ? load_config(flags.config) : preset(flags.preset);
  } catch (const Error& e) {
    throw UsageError{e.what()};  // unreadable or invalid scenario
  }
  if (!flags.out_dir.empty()) c.output.dir = flags.out_dir;
  if (flags.seed) c.solver.seed = *flags.seed;
  return c;
}

std::string output_path(const ScenarioConfig& c, const std::string& file) {
  return (std::filesystem::path(c.output.dir) / file).string();
}

int cmd_check(const ScenarioConfig& c, std::ostream& out) {
  const LinkConfig link = c.link();
  InvariantTargets targets;
  targets.lk12 = c.solver.lk12;
  const ConstraintReport rep =
      admissibility(link, c.stiffness(0), c.stiffness(1), targets, c.solver.energy_bound, c.solver.constraints);
  out << "scenario: " << (c.name.empty() ? "(unnamed)" : c.name) << "\n";
  out << "rods: " << link.rod_count() << "\n";
  for (std::size_t r = 0; r < rep.closure.size(); ++r) {
    out << "rod" << r + 1 << " closure: position " << num(rep.closure[r].position) << ", tangent "
        << num(rep.closure[r].tangent) << "\n";
    out << "rod" << r + 1 << " ciarlet-necas residual: " << num(rep.cn_residual[r]) << " (tolerance "
        << num(rep.cn_tolerance[r]) << ")\n";
  }
  out << "local injectivity margin: " << num(rep.local_margin) << "\n";
  if (link.rod_count() == 2) out << "min tube gap: " << num(rep.min_tube_gap) << "\n";
  out << "Lk12 = " << rep.invariants.lk12 << ", n1 = " << rep.invariants.n1 << ", n2 = " << rep.invariants.n2 << "\n";
  out << "loop energy: " << num(rep.e_loop) << "\n";
  for (const auto& v : rep.violations) out << "violation: " << v << "\n";
  out << "admissible: " << (rep.admissible ? "yes" : "no") << "\n";
  return rep.admissible ? kExitOk : kExitConstraint;
}

int cmd_invariants(const ScenarioConfig& c, std::ostream& out) {
  const LinkConfig link = c.link();
  const auto curves = link.realize();
  const InvariantRecord inv = compute_invariants(link, curves, c.solver.constraints.self_link_offset);
  if (link.rod_count() == 2) {
    const double gauss = gauss_linking_number(midline_polyline(curves[0]), midline_polyline(curves[1]));
    out << "Lk12 = " << inv.lk12 << " (Gauss integral " << num(gauss) << ")\n";
  }
  for (int r = 0; r < link.rod_count(); ++r) {
    const double wr = writhe(midline_polyline(curves[r]));
    const double tw = total_twist(link.rods[r].density) / kTwoPi;
    out << "rod" << r + 1 << ": writhe " << num(wr) << ", twist " << num(tw) << ", self-linking "
        << (r == 0 ? inv.n1 : inv.n2) << "\n";
  }
  return kExitOk;
}

int cmd_relax_film(const ScenarioConfig& c, std::ostream& out) {
  const TubeSet tubes = c.link().tubes();
  FilmOptions fo = c.solver.film;
  fo.probes.seed = c.solver.seed;
  const TriMesh seed = init_spanning_mesh(tubes, fo);
  const ProbeFamily probes = make_probe_family(tubes, fo.probes);
  RelaxOptions ro;
  ro.steps = c.relax_steps;
  ro.probes = &probes;
  ro.target_edge = fo.target_edge;
  RelaxReport rep;
  const TriMesh film = relax_area(seed, tubes, ro, &rep);
  const std::string path = output_path(c, c.output.mesh);
  export_mesh(film, path);
  out << "seed area: " << num(area(seed)) << "\n";
  out << "relaxed area: " << num(area(film)) << "\n";
  out << "accepted steps: " << rep.accepted << ", remeshes: " << rep.remeshes
      << (rep.converged ? ", converged" : "") << (rep.blocked ? ", blocked by the certificate" : "") << "\n";
  out << "vertices: " << film.vertex_count() << ", triangles: " << film.triangle_count() << "\n";
  out << "certificate: " << (rep.certified ? "PASS" : "FAIL") << "\n";
  out << "wrote " << path << "\n";
  return rep.certified ? kExitOk : kExitConstraint;
}

int cmd_solve(const ScenarioConfig& c, std::ostream& out, std::ostream& err) {
  const std::string mesh_path = output_path(c, c.output.mesh);
  const std::string trace_path = output_path(c, c.output.trace);
  SolveTrace partial;
  SolveResult result;
  try {
    result = solve_kirchhoff_plateau(c.link(), c.stiffness(0), c.stiffness(1), c.sigma, c.solve_options(), &partial);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InitInadmissible && e.kind() != ErrorKind::InvariantBroken) throw;
    err << e.what() << "\n";
    if (!partial.rows.empty()) {
      export_trace(partial, trace_path);
      out << "wrote partial trace " << trace_path << "\n";
    }
    return kExitConstraint;
  }
  export_mesh(result.film, mesh_path);
  export_trace(result.trace, trace_path);
  const TraceRow& last = result.trace.rows.back();
  out << "stop: " << result.trace.stop_reason << " after " << result.trace.rows.size() << " trace rows\n";
  out << "energy: total " << num(last.energy.e_total) << ", loop " << num(last.energy.loop()) << ", film "
      << num(last.energy.e_film) << "\n";
  out << "penalties: " << num(last.penalties.total()) << "\n";
  out << "film area: " << num(last.area) << "\n";
  out << "Lk12 = " << last.invariants.lk12 << ", n1 = " << last.invariants.n1 << ", n2 = " << last.invariants.n2 << "\n";
  out << "admissible: " << (last.constraints.admissible ? "yes" : "no") << "\n";
  for (const auto& v : last.constraints.violations) out << "violation: " << v << "\n";
  out << "certificate: " << (last.certified ? "PASS" : "FAIL") << "\n";
  out << "wrote " << mesh_path << "\n" << "wrote " << trace_path << "\n";
  return last.constraints.admissible && last.certified ? kExitOk : kExitConstraint;
}

int cmd_export(const ScenarioConfig& c, std::ostream& out) {
  const std::string cfg_path = output_path(c, "scenario.cfg");
  write_text_file(cfg_path, serialize_config(c));
  out << "wrote " << cfg_path << "\n";
  const LinkConfig link = c.link();
  const auto curves = link.realize();
  for (int r = 0; r < link.rod_count(); ++r) {
    const std::string path = output_path(c, "rod" + std::to_string(r + 1) + ".obj");
    export_mesh(tube_mesh(curves[r], link.rods[r].section, 16), path);
    out << "wrote " << path << "\n";
  }
  FilmOptions fo = c.solver.film;
  fo.probes.seed = c.solver.seed;
  const std::string seed_path = output_path(c, "seed_film.obj");
  export_mesh(init_spanning_mesh(link.tubes(), fo), seed_path);
  out << "wrote " << seed_path << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kirchhoff-Plateau solver: elastic closed rods spanned by a soap film", "kplateau"};
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("--config", flags.config, "scenario file (see docs/config-schema.md)");
  app.add_option("--preset", flags.preset, "built-in scenario")->check(CLI::IsMember(preset_names()));
  app.add_option("--out", flags.out_dir, "output directory (overrides [output] dir)");
  app.add_option("--seed", flags.seed, "RNG seed for probe construction (overrides [solver] seed)");

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"check", "admissibility report of the initial configuration"},
      {"invariants", "linking number, writhe, twist and self-linking numbers"},
      {"relax-film", "relax the film with the rods held fixed; writes the mesh"},
      {"solve", "full minimization; writes the film mesh and the trace"},
      {"export", "write the resolved scenario, tube meshes and seed film"},
  };
  for (const auto& cmd : commands) app.add_subcommand(cmd.name, cmd.help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 consumes from the back
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const ScenarioConfig c = load_scenario(flags);
    if (name == "check") return cmd_check(c, out);
    if (name == "invariants") return cmd_invariants(c, out);
    if (name == "relax-film") return cmd_relax_film(c, out);
    if (name == "solve") return cmd_solve(c, out, err);
    return cmd_export(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.message << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConstraint;
  }
}

}  // namespace kp
