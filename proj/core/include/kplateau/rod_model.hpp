#pragma once

#include <kplateau/types.hpp>

#include <vector>

namespace kp {

/// Disk cross-section of radius `radius`, bounded by the maximum thickness.
struct CrossSection {
  double radius = 0.05;
  double max_thickness = 0.05;

  /// Throws InvalidInput unless 0 < radius <= max_thickness and
  /// max_thickness <= slender_ratio * rod_length.
  void validate(double rod_length, double slender_ratio = 0.1) const;
};

/// Strain densities sampled on the uniform grid s_i = i L / (n - 1).
struct DensityField {
  double length = 1.0;
  std::vector<double> k1;     ///< flexural density k'
  std::vector<double> k2;     ///< flexural density k''
  std::vector<double> omega;  ///< twist density

  static DensityField constant(double length, int n, double k1, double k2, double omega);

  int size() const { return static_cast<int>(k1.size()); }
  double spacing() const { return length / (size() - 1); }
  double station(int i) const { return i * spacing(); }

  /// (k', k'', omega) linearly interpolated at arc length s (clamped to [0, L]).
  Vec3 at(double s) const;

  void validate() const;
};

DensityField resample(const DensityField& df, int n2);

struct Frame {
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();
  Vec3 w = Vec3::UnitZ();

  static Frame from_uv(const Vec3& u, const Vec3& v);

  /// Largest entry of |G - I| where G is the Gram matrix of (u, v, w).
  double orthonormality_defect() const;
  Mat3 matrix() const;
  static Frame from_matrix(const Mat3& m);
};

struct Placement {
  Vec3 origin = Vec3::Zero();
  Frame frame;

  void validate() const;
};

/// Realized rod: midline nodes and director frames on a uniform arc-length grid.
struct FramedCurve {
  std::vector<Vec3> r;
  std::vector<Frame> frames;
  double h = 0.0;
  /// Nodal (k', k'', omega). When present, points between nodes come from a partial
  /// integration step; otherwise Hermite midline and slerp frames are used.
  std::vector<Vec3> densities;

  int size() const { return static_cast<int>(r.size()); }
  double length() const { return h * (size() - 1); }

  /// Exact at nodes.
  Vec3 midline_at(double s) const;
  Frame frame_at(double s) const;
  void evaluate(double s, Vec3& point, Frame& frame) const;
};

FramedCurve integrate_frame(const DensityField& df, const Placement& pl);

struct ClosureResidual {
  double position = 0.0;  ///< |r(L) - r(0)|
  double tangent = 0.0;   ///< |w(L) - w(0)|
};

ClosureResidual closure_residual(const FramedCurve& fc);

/// r(s) + z1 u(s) + z2 v(s). Throws OutOfSection if (z1, z2) is outside the disk.
Vec3 tube_point(const FramedCurve& fc, const CrossSection& cs, double s, double z1, double z2);

/// Solid tube around a closed framed curve; a rod's contribution to the link Lambda[z].
struct Tube {
  FramedCurve curve;
  CrossSection section;

  double length() const { return curve.length(); }
  /// Wraps s periodically into [0, L).
  double wrap(double s) const;
  /// Rewrites (s, theta) with s in [0, L) and theta in (-pi, pi], naming the same surface point.
  void normalize(double& s, double& theta) const;
  /// Angle added to theta when s advances by one period.
  double seam_angle() const;
  /// Surface point at station s and polar angle theta in the (u, v) plane.
  Vec3 surface_point(double s, double theta) const;
  /// Partial derivatives of surface_point with respect to (s, theta).
  void surface_tangents(double s, double theta, Vec3& ds, Vec3& dtheta) const;
  /// Polar angle in the (u, v) frame at s of the direction d projected into the normal plane.
  double angle_towards(double s, const Vec3& d) const;
};

using TubeSet = std::vector<Tube>;

struct TriMesh;

/// Torus-topology triangulation of the tube surface: one ring of `m` vertices per
/// distinct node (nodes 0..n-2; node n-1 coincides with node 0).
TriMesh tube_mesh(const FramedCurve& fc, const CrossSection& cs, int m,
                  double closure_tolerance = -1.0);

/// Nodes 0..n-2 of a closed curve, in order.
std::vector<Vec3> closed_midline(const FramedCurve& fc);

struct RodSpec {
  DensityField density;
  Placement placement;
  CrossSection section;
  double rho = 1.0;                ///< mass per unit length
  std::vector<double> rho_nodes;   ///< optional per-node override of rho

  double mass() const;
  double rho_at(int node) const { return rho_nodes.empty() ? rho : rho_nodes[node]; }
  void validate() const;
};

/// One or two rods. Rod 0 is clamped; the placement of rod 1 is a solver unknown.
struct LinkConfig {
  std::vector<RodSpec> rods;
  Vec3 gravity = Vec3::Zero();

  int rod_count() const { return static_cast<int>(rods.size()); }
  void validate() const;
  std::vector<FramedCurve> realize() const;
  TubeSet tubes() const;
};

}  // namespace kp
