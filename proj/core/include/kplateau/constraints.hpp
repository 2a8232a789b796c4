#pragma once

#include <kplateau/energy.hpp>
#include <kplateau/rod_model.hpp>
#include <kplateau/topology.hpp>

#include <optional>
#include <string>
#include <vector>

namespace kp {

/// max over nodes of a * |(k', k'')|; the section map stays orientation-preserving iff < 1.
double local_injectivity_margin(const DensityField& df, const CrossSection& cs);

/// Volume of the tube image (voxel centres within distance a of the midline polygon; for an
/// open curve, points beyond the end planes are excluded) minus pi a^2 L.
/// Throws ResolutionError if voxel > a / 4.
double ciarlet_necas_residual(const FramedCurve& fc, const DensityField& df, const CrossSection& cs,
                              double voxel);

/// Three voxel-thick layers of the tube surface: 3 voxel 2 pi a L.
double ciarlet_necas_tolerance(const DensityField& df, const CrossSection& cs, double voxel);

/// Minimum midline segment distance minus (a1 + a2).
double tube_disjointness(const FramedCurve& fc1, const FramedCurve& fc2, double a1, double a2);

struct InvariantTargets {
  int lk12 = 1;
  std::optional<int> n1;
  std::optional<int> n2;
};

struct ConstraintOptions {
  double voxel_fraction = 0.2;         ///< voxel = fraction * a
  double closure_tolerance = 1e-6;     ///< positions relative to L; tangents absolute
  double self_link_offset = 0.5;       ///< push-off distance relative to a
};

struct ConstraintReport {
  double local_margin = 0.0;
  std::vector<double> cn_residual;
  std::vector<double> cn_tolerance;
  double min_tube_gap = kInfiniteEnergy;
  std::vector<ClosureResidual> closure;
  InvariantRecord invariants;
  double e_loop = 0.0;
  double energy_bound = kInfiniteEnergy;
  bool admissible = false;
  std::vector<std::string> violations;
};

/// Invariants of the realized link: Lk of the midlines (0 for a single rod) and self-links
/// computed with push-off offset_fraction * a.
InvariantRecord compute_invariants(const LinkConfig& link, const std::vector<FramedCurve>& curves,
                                   double offset_fraction = 0.5);

ConstraintReport admissibility(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                               const InvariantTargets& targets, double energy_bound,
                               const ConstraintOptions& opts = {});

}  // namespace kp
