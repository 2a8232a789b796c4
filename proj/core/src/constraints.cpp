#include <kplateau/constraints.hpp>
#include <kplateau/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace kp {

double local_injectivity_margin(const DensityField& df, const CrossSection& cs) {
  double worst = 0.0;
  for (int i = 0; i < df.size(); ++i) worst = std::max(worst, cs.radius * std::hypot(df.k1[i], df.k2[i]));
  return worst;
}

namespace {

// Squared distance from p to segment [a, b] and the unclamped projection parameter.
double segment_distance2(const Vec3& p, const Vec3& a, const Vec3& b, double& t) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  const double tc = std::clamp(t, 0.0, 1.0);
  return (p - (a + tc * ab)).squaredNorm();
}

}  // namespace

double ciarlet_necas_residual(const FramedCurve& fc, const DensityField& df, const CrossSection& cs,
                              double voxel) {
  const double a = cs.radius;
  if (!(voxel > 0.0) || voxel > 0.25 * a * (1 + 1e-12)) {
    throw Error(ErrorKind::ResolutionError, "voxel must not exceed a quarter of the section radius");
  }
  const bool closed = closure_residual(fc).position < voxel;
  // Chords of length <= a/2 keep the polygon within a^2/(8 rho) of the curve while bounding the
  // number of voxel scans per unit length.
  const int stride = std::max(1, static_cast<int>(0.5 * a / fc.h));
  const int last = closed ? fc.size() - 1 : fc.size();
  std::vector<Vec3> pts;
  for (int i = 0; i < last; i += stride) pts.push_back(fc.r[i]);
  if (!closed && (last - 1) % stride != 0) pts.push_back(fc.r.back());
  const int nseg = closed ? static_cast<int>(pts.size()) : static_cast<int>(pts.size()) - 1;

  Vec3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo.array() -= a + voxel;
  hi.array() += a + voxel;
  const Eigen::Vector3i dims = ((hi - lo) / voxel).array().ceil().cast<int>();
  const std::int64_t nx = dims.x(), ny = dims.y(), nz = dims.z();

  // Marks are written per x-slab; slabs are independent, so the count is thread-count invariant.
  std::vector<std::uint8_t> mark(static_cast<std::size_t>(nx * ny * nz), 0);
  std::vector<std::vector<int>> slab_segments(nx);
  for (int j = 0; j < nseg; ++j) {
    const Vec3& p = pts[j];
    const Vec3& q = pts[(j + 1) % pts.size()];
    const int x0 = std::max<int>(0, static_cast<int>(std::floor((std::min(p.x(), q.x()) - a - lo.x()) / voxel)));
    const int x1 = std::min<int>(nx - 1, static_cast<int>(std::ceil((std::max(p.x(), q.x()) + a - lo.x()) / voxel)));
    for (int x = x0; x <= x1; ++x) slab_segments[x].push_back(j);
  }
  const double a2 = a * a;
  parallel_for(static_cast<std::size_t>(nx), [&](std::size_t xi) {
    const std::int64_t x = static_cast<std::int64_t>(xi);
    for (int j : slab_segments[x]) {
      const Vec3& p = pts[j];
      const Vec3& q = pts[(j + 1) % pts.size()];
      const Vec3 bl = p.cwiseMin(q).array() - a;
      const Vec3 bh = p.cwiseMax(q).array() + a;
      const int y0 = std::max<int>(0, static_cast<int>(std::floor((bl.y() - lo.y()) / voxel)));
      const int y1 = std::min<int>(ny - 1, static_cast<int>(std::ceil((bh.y() - lo.y()) / voxel)));
      const int z0 = std::max<int>(0, static_cast<int>(std::floor((bl.z() - lo.z()) / voxel)));
      const int z1 = std::min<int>(nz - 1, static_cast<int>(std::ceil((bh.z() - lo.z()) / voxel)));
      for (int y = y0; y <= y1; ++y) {
        for (int z = z0; z <= z1; ++z) {
          std::uint8_t& m = mark[static_cast<std::size_t>((x * ny + y) * nz + z)];
          if (m) continue;
          const Vec3 c = lo + voxel * Vec3(x + 0.5, y + 0.5, z + 0.5);
          double t = 0.0;
          if (segment_distance2(c, p, q, t) >= a2) continue;
          if (!closed && ((j == 0 && t < 0.0) || (j == nseg - 1 && t > 1.0))) continue;
          m = 1;
        }
      }
    }
  });
  std::int64_t count = 0;
  for (auto m : mark) count += m;
  const double rhs = static_cast<double>(count) * voxel * voxel * voxel;
  const double lhs = kPi * a * a * df.length;
  return rhs - lhs;
}

double ciarlet_necas_tolerance(const DensityField& df, const CrossSection& cs, double voxel) {
  return 3.0 * voxel * kTwoPi * cs.radius * df.length;
}

double tube_disjointness(const FramedCurve& fc1, const FramedCurve& fc2, double a1, double a2) {
  return polyline_distance(midline_polyline(fc1), midline_polyline(fc2)) - (a1 + a2);
}

InvariantRecord compute_invariants(const LinkConfig& link, const std::vector<FramedCurve>& curves,
                                   double offset_fraction) {
  InvariantRecord rec;
  rec.n1 = self_linking(curves[0], offset_fraction * link.rods[0].section.radius);
  if (link.rod_count() == 2) {
    rec.n2 = self_linking(curves[1], offset_fraction * link.rods[1].section.radius);
    rec.lk12 = static_cast<int>(
        std::lround(gauss_linking_number(midline_polyline(curves[0]), midline_polyline(curves[1]))));
  }
  return rec;
}

ConstraintReport admissibility(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                               const InvariantTargets& targets, double energy_bound,
                               const ConstraintOptions& opts) {
  link.validate();
  ConstraintReport rep;
  rep.energy_bound = energy_bound;
  auto fail = [&](const std::string& what) { rep.violations.push_back(what); };

  const auto curves = link.realize();
  for (int r = 0; r < link.rod_count(); ++r) {
    const RodSpec& rod = link.rods[r];
    const std::string name = "rod" + std::to_string(r + 1);
    rep.local_margin = std::max(rep.local_margin, local_injectivity_margin(rod.density, rod.section));

    const ClosureResidual cr = closure_residual(curves[r]);
    rep.closure.push_back(cr);
    if (cr.position > opts.closure_tolerance * rod.density.length || cr.tangent > opts.closure_tolerance) {
      std::ostringstream os;
      os << name << " not closed (position " << cr.position << ", tangent " << cr.tangent << ")";
      fail(os.str());
    }
    const double voxel = opts.voxel_fraction * rod.section.radius;
    rep.cn_residual.push_back(ciarlet_necas_residual(curves[r], rod.density, rod.section, voxel));
    rep.cn_tolerance.push_back(ciarlet_necas_tolerance(rod.density, rod.section, voxel));
    if (rep.cn_residual.back() < -rep.cn_tolerance.back()) fail(name + " self-overlap (Ciarlet-Necas)");
  }
  if (!(rep.local_margin < 1.0)) fail("local injectivity margin reached 1");

  if (link.rod_count() == 2) {
    rep.min_tube_gap = tube_disjointness(curves[0], curves[1], link.rods[0].section.radius,
                                         link.rods[1].section.radius);
    if (!(rep.min_tube_gap > 0.0)) fail("tubes intersect");
  }

  // Linking numbers only need disjoint midlines, so they are reported for touching tubes too.
  const double midline_distance =
      link.rod_count() == 2 ? rep.min_tube_gap + link.rods[0].section.radius + link.rods[1].section.radius : 1.0;
  if (midline_distance > 0.0) {
    try {
      rep.invariants = compute_invariants(link, curves, opts.self_link_offset);
      if (link.rod_count() == 2 && rep.invariants.lk12 != targets.lk12) fail("linking number mismatch");
      if (targets.n1 && rep.invariants.n1 != *targets.n1) fail("rod1 self-linking mismatch");
      if (link.rod_count() == 2 && targets.n2 && rep.invariants.n2 != *targets.n2) fail("rod2 self-linking mismatch");
    } catch (const Error& e) {
      fail(std::string("invariants undefined: ") + e.what());
    }
  }

  rep.e_loop = loop_energy(link, ed1, ed2);
  if (!(rep.e_loop < energy_bound)) fail("loop energy exceeds bound");
  rep.admissible = rep.violations.empty();
  return rep;
}

}  // namespace kp
