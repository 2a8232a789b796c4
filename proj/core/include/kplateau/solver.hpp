#pragma once

#include <kplateau/constraints.hpp>
#include <kplateau/energy.hpp>
#include <kplateau/film_mesh.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace kp {

struct PenaltyWeights {
  double closure = 1e6;
  double margin = 1e4;   ///< local injectivity margin above 1 - margin_slack
  double overlap = 1e4;  ///< self-overlap volume beyond the voxel tolerance, relative to pi a^2 L
  double gap = 1e4;      ///< tube interpenetration depth
  double margin_slack = 0.05;

  void validate() const;
  PenaltyWeights scaled(double factor) const;
};

struct PenaltyTerms {
  double closure = 0.0;
  double margin = 0.0;
  double overlap = 0.0;
  double gap = 0.0;

  double total() const { return closure + margin + overlap + gap; }
};

/// Quadratic penalties on the constraint residuals of the realized link: closure mismatch beyond
/// half its admissibility tolerance, max(0, margin - 1 + slack)^2, overlap beyond tolerance and
/// negative tube gap. Zero iff every constraint holds with its margin. The overlap term needs the voxel
/// estimate and can be skipped.
PenaltyTerms penalty_terms(const LinkConfig& link, const PenaltyWeights& weights,
                           const ConstraintOptions& copts = {}, bool with_overlap = true);

double penalty_energy(const LinkConfig& link, const PenaltyWeights& weights, const ConstraintOptions& copts = {});

struct SolveOptions {
  int outer_iters = 60;
  int film_steps_per_outer = 25;
  int final_film_steps = 2000;   ///< film relaxation at the final rods
  PenaltyWeights weights;
  double penalty_growth = 1.0;   ///< weights grow by this factor when descent stalls with a violation
  int growth_rounds = 3;
  double step_clamp = -1.0;      ///< max midline displacement per outer step; < 0: automatic
  double tolerance = 1e-9;       ///< relative objective decrease counted as a stall
  int stall_iters = 3;
  double gradient_tolerance = 1e-8;
  double closure_tolerance = 1e-10;
  int harmonics = 4;
  bool shape_free[2] = {true, true};
  bool placement_free = true;
  double energy_bound = kInfiniteEnergy;
  int lk12 = 1;                  ///< required linking number of a two-rod link
  FilmOptions film;
  ConstraintOptions constraints;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  EnergyReport energy;
  PenaltyTerms penalties;
  double penalty_scale = 1.0;   ///< weights multiplier in force for this row
  double objective = 0.0;       ///< e_total + penalties
  ConstraintReport constraints;
  InvariantRecord invariants;
  double area = 0.0;
  double hausdorff_step = 0.0;  ///< film vertex sets, previous row to this one
  bool certified = true;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  std::string stop_reason;
  bool converged = false;
};

struct SolveResult {
  LinkConfig link;
  TriMesh film;
  SolveTrace trace;
  VecX parameters;
};

/// Alternates film relaxation at fixed rods with one projected-gradient step on the rod
/// parameters (Fourier perturbations of the densities, rod 2 placement). Closure is kept by
/// projecting onto the closure constraints and a Gauss-Newton restoration; trial steps that
/// move a midline farther than the clamp, change an invariant, break the spanning certificate or
/// fail the descent test are halved. Throws InitInadmissible, or InvariantBroken when no step
/// keeps the invariants (the trace so far goes to *partial).
SolveResult solve_kirchhoff_plateau(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                                    double sigma, const SolveOptions& opts = {}, SolveTrace* partial = nullptr);

/// The same outer loop without a film.
SolveResult minimize_loop_only(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                               const SolveOptions& opts = {}, SolveTrace* partial = nullptr);

}  // namespace kp
