#pragma once

#include <kplateau/mesh.hpp>
#include <kplateau/rod_model.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kp {

/// Implicitly closed polyline (last point connects back to the first).
struct ClosedPolyline {
  std::vector<Vec3> pts;
  int orientation = 1;  ///< -1 traverses pts in reverse

  ClosedPolyline() = default;
  explicit ClosedPolyline(std::vector<Vec3> p, int orient = 1) : pts(std::move(p)), orientation(orient) {}

  int size() const { return static_cast<int>(pts.size()); }
  /// Points in traversal order.
  std::vector<Vec3> oriented() const;
  ClosedPolyline reversed() const { return ClosedPolyline(pts, -orientation); }
  void validate() const;
};

ClosedPolyline midline_polyline(const FramedCurve& fc);

/// Minimum distance between the segments of two closed polylines.
double polyline_distance(const ClosedPolyline& a, const ClosedPolyline& b);

/// Exact Gauss double integral of two closed polygons, summed per segment pair from the
/// signed solid angle of the quadrilateral they span. Throws CurvesTouch.
double gauss_linking_number(const ClosedPolyline& c1, const ClosedPolyline& c2);

/// Half-sum of signed crossings in the projection along dir. Non-generic projections are
/// retried with seeded perturbations of dir; throws DegenerateProjection after 16 retries.
int crossing_linking_number(const ClosedPolyline& c1, const ClosedPolyline& c2, const Vec3& dir,
                            std::uint64_t seed = 1);

/// Sum of signed self-crossings (not halved) in the projection along dir, or nullopt-like
/// failure signalled by returning false when the projection is not generic.
bool directional_writhe(const ClosedPolyline& c, const Vec3& dir, int& out);

/// Gauss self-integral of c with the diagonal excluded.
double writhe(const ClosedPolyline& c);

/// Linking number of the push-off r(s) + offset u(s) (closed by the shortest rotation about the
/// tangent at s = 0) with the midline. Throws OffsetTooLarge if the push-off nears the midline.
int self_linking(const FramedCurve& fc, double offset);

/// Total twist (1/2pi) * integral of omega, trapezoid rule.
double total_twist(const DensityField& df);

double hausdorff_distance(std::span<const Vec3> a, std::span<const Vec3> b);

struct InvariantRecord {
  int lk12 = 0;
  int n1 = 0;
  int n2 = 0;

  friend bool operator==(const InvariantRecord&, const InvariantRecord&) = default;
};

enum class ProbeTag { AroundRod1, AroundRod2, DClass };

std::string_view to_string(ProbeTag tag);

struct ProbeFamily {
  std::vector<ClosedPolyline> loops;
  std::vector<ProbeTag> tags;

  int size() const { return static_cast<int>(loops.size()); }
  int count(ProbeTag tag) const;
};

struct ProbeOptions {
  int stations = 8;        ///< simple links per rod
  int d_class = 2;         ///< requested loops linking both rods (ignored with one rod)
  int loop_points = 24;    ///< polygon vertices per meridian loop
  double max_bridge = -1;  ///< longest allowed bridge for d_class loops; < 0 = 1.5 * smaller L / 2pi
  std::uint64_t seed = 1;
};

/// Simple links around each rod plus, for two rods, loops with linking number +1 with both
/// midlines. Every loop is verified with crossing_linking_number before inclusion.
ProbeFamily make_probe_family(const TubeSet& tubes, const ProbeOptions& opts = {});

struct ProbeResult {
  ProbeTag tag;
  int hits = 0;
};

struct SpanningReport {
  bool pass = false;
  std::vector<ProbeResult> loops;
  int failures() const;
};

/// Counts segment-triangle intersections per probe loop; PASS iff every loop hits the mesh.
SpanningReport spanning_certificate(const TriMesh& mesh, const ProbeFamily& probes);

bool segment_intersects_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                                 const Vec3& c);

/// Distance between segments [p0, p1] and [q0, q1]; symmetric in its two arguments.
double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);

}  // namespace kp
