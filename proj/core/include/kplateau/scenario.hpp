#pragma once

#include <kplateau/solver.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace kp {

struct RodConfig {
  RodSpec model;
  ElasticDensity stiffness;
  bool shape_free = true;
};

struct OutputConfig {
  std::string dir = "out";
  std::string mesh = "film.obj";
  std::string trace = "trace.csv";
};

/// Everything a run needs. The solver's shape_free flags are taken from the rods.
struct ScenarioConfig {
  std::string name;
  std::vector<RodConfig> rods;
  Vec3 gravity = Vec3::Zero();
  double sigma = 1.0;
  SolveOptions solver;
  int relax_steps = 2000;  ///< budget of the fixed-rod film relaxation (relax-film)
  OutputConfig output;

  LinkConfig link() const;
  SolveOptions solve_options() const;
  const ElasticDensity& stiffness(int rod) const;
  /// Throws InvalidInput naming the first violated invariant.
  void validate() const;
};

/// Plain-text key = value config, sections [scene], [rod1], [rod2], [solver], [film],
/// [constraints], [output]; see docs/config-schema.md. Throws Config errors that carry the
/// line number of the offending key.
ScenarioConfig parse_config(std::string_view text);

/// Inverse of parse_config; reals are written with 17 significant digits so that
/// parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ScenarioConfig& config);

/// Reads and parses a file; Io error if it cannot be read.
ScenarioConfig load_config(const std::string& path);

/// Names accepted by preset().
std::vector<std::string> preset_names();

/// Built-in scenarios: "ring", "hopf" and "clamped-plus-free" (rigid first loop, light free
/// second loop, gravity on). Throws Config for an unknown name.
ScenarioConfig preset(std::string_view name);

}  // namespace kp
