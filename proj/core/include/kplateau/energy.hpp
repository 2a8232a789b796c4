#pragma once

#include <kplateau/mesh.hpp>
#include <kplateau/rod_model.hpp>

#include <functional>
#include <limits>

namespace kp {

inline constexpr double kInfiniteEnergy = std::numeric_limits<double>::infinity();

/// Quadratic bending/twisting density with a rational compression barrier.
struct ElasticDensity {
  double a1 = 1.0;  ///< stiffness for k'^2
  double a2 = 1.0;  ///< stiffness for k''^2
  double a3 = 1.0;  ///< stiffness for omega^2
  double barrier_eps = 0.0;

  void validate() const;
  /// Pointwise energy density; +inf once a * |(k', k'')| reaches 1.
  double operator()(double k1, double k2, double omega, double radius) const;
  /// Coercivity constant min(a1, a2, a3) / 2.
  double coercivity() const;
};

struct EnergyReport {
  double e_el1 = 0.0;
  double e_el2 = 0.0;
  double e_g1 = 0.0;
  double e_g2 = 0.0;
  double e_film = 0.0;
  double e_total = 0.0;
  double sigma = 0.0;
  bool barrier_active = false;

  double loop() const { return e_el1 + e_el2 + e_g1 + e_g2; }
};

double elastic_energy(const DensityField& df, const ElasticDensity& ed, const CrossSection& cs);
/// -sum rho g . r h over nodes with trapezoid weights.
double gravity_energy(const FramedCurve& fc, double rho, const Vec3& g);
double gravity_energy(const FramedCurve& fc, const RodSpec& rod, const Vec3& g);
/// 2 sigma area: both faces of the film.
double film_energy(const TriMesh& mesh, double sigma);

/// ed2 is ignored for a single-rod link.
EnergyReport total_energy(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                          const TriMesh& mesh, double sigma);

/// Elastic plus gravitational energy of all rods.
double loop_energy(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2);

/// Maps a parameter vector onto a LinkConfig: per free rod, Fourier perturbations
/// c0 + sum_k (a_k cos(2 pi k s / L) + b_k sin(2 pi k s / L)) added to the base samples of
/// k', k'' and omega, followed (if enabled) by rod 2's translation and rotation vector.
struct ParameterMap {
  LinkConfig base;
  int harmonics = 4;
  bool shape_free[2] = {true, true};
  bool placement_free = true;

  ParameterMap() = default;
  ParameterMap(LinkConfig base_link, int k) : base(std::move(base_link)), harmonics(k) {}

  int coefficients_per_field() const { return 2 * harmonics + 1; }
  int shape_size(int rod) const;
  bool has_placement() const { return placement_free && base.rod_count() == 2; }
  int size() const;
  /// Offset of rod's first shape coefficient (k' block, then k'', then omega).
  int shape_offset(int rod) const;
  int placement_offset() const;
  /// Basis function j (0 = constant, odd = cos, even = sin) at arc length s of length L.
  double basis(int j, double s, double length) const;

  LinkConfig apply(const VecX& x) const;
  VecX zero() const { return VecX::Zero(size()); }
};

/// Central differences with step rel_step * max(1, |x_i|), evaluated in parallel with results
/// stored per index. Throws GradientUndefined if any stencil value is not finite.
VecX finite_difference_gradient(const std::function<double(const VecX&)>& f, const VecX& x,
                                double rel_step = 1e-5);

/// Gradient of loop_energy (+ extra(link), if given) with respect to the map's parameters at x.
VecX loop_energy_gradient(const ParameterMap& map, const ElasticDensity& ed1, const ElasticDensity& ed2,
                          const VecX& x, const std::function<double(const LinkConfig&)>& extra = {});

}  // namespace kp
