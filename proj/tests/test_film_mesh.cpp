#include <gtest/gtest.h>

#include <kplateau/film_mesh.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

using namespace kp;
using namespace kp::testing;

namespace {

TriMesh unit_square() {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

// Icosahedron refined by midpoint subdivision, vertices pushed to the unit sphere.
TriMesh icosphere(int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {Vec3(-1, t, 0), Vec3(1, t, 0),  Vec3(-1, -t, 0), Vec3(1, -t, 0), Vec3(0, -1, t), Vec3(0, 1, t),
                Vec3(0, -1, -t), Vec3(0, 1, -t), Vec3(t, 0, -1),  Vec3(t, 0, 1),   Vec3(-t, 0, -1), Vec3(-t, 0, 1)};
  for (auto& v : m.vertices) v.normalize();
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto k = std::minmax(a, b);
      auto it = mid.find(k);
      if (it != mid.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      return mid[k] = m.vertex_count() - 1;
    };
    std::vector<Triangle> next;
    for (const auto& tri : m.triangles) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    m.triangles = std::move(next);
  }
  return m;
}

double max_attachment_error(const TriMesh& m, const TubeSet& tubes) {
  double worst = 0.0;
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (!m.is_attached(v)) continue;
    const Attachment& at = m.attach[v];
    worst = std::max(worst, (m.vertices[v] - tubes[at.rod].surface_point(at.s, at.theta)).norm());
  }
  return worst;
}

// Distance of every attached vertex to its rod's midline minus the section radius.
double max_surface_offset(const TriMesh& m, const TubeSet& tubes) {
  double worst = 0.0;
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (!m.is_attached(v)) continue;
    const Attachment& at = m.attach[v];
    Vec3 c;
    Frame f;
    tubes[at.rod].curve.evaluate(tubes[at.rod].wrap(at.s), c, f);
    worst = std::max(worst, std::abs((m.vertices[v] - c).norm() - tubes[at.rod].section.radius));
  }
  return worst;
}

void expect_monotone_between_remeshes(const RelaxReport& rep) {
  for (std::size_t i = 1; i < rep.areas.size(); ++i) {
    if (std::count(rep.remeshed_at.begin(), rep.remeshed_at.end(), i)) continue;
    EXPECT_LE(rep.areas[i], rep.areas[i - 1]) << "accepted step " << i;
  }
}

}  // namespace

TEST(MeshArea, UnitSquareAndEmpty) {
  EXPECT_DOUBLE_EQ(area(unit_square()), 1.0);
  EXPECT_EQ(area(TriMesh{}), 0.0);
}

TEST(MeshArea, IcosphereApproachesSphere) {
  const TriMesh s = icosphere(4);
  EXPECT_EQ(s.triangle_count(), 20 * 256);
  EXPECT_NEAR(area(s) / (4 * kPi), 1.0, 5e-3);
  const MeshCounts c = count_elements(s);
  EXPECT_EQ(c.euler(), 2);
  EXPECT_EQ(c.boundary_edges, 0);
}

TEST(AreaGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.05);
  TriMesh m = icosphere(1);
  for (auto& v : m.vertices) v += Vec3(noise(rng), noise(rng), noise(rng));
  const auto g = area_gradient(m);
  const double h = 1e-6;
  for (int v = 0; v < m.vertex_count(); ++v) {
    for (int k = 0; k < 3; ++k) {
      TriMesh p = m, q = m;
      p.vertices[v][k] += h;
      q.vertices[v][k] -= h;
      EXPECT_NEAR(g[v][k], (area(p) - area(q)) / (2 * h), 1e-7);
    }
  }
}

TEST(Embedding, SeparatesCrossingFromDisjoint) {
  EXPECT_TRUE(is_embedded(icosphere(2)));
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.2, 0.2, -1), Vec3(0.3, 0.2, 1), Vec3(0.2, 0.3, 1)};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  EXPECT_FALSE(is_embedded(m));
  m.vertices[3].z() = 0.5;
  EXPECT_TRUE(is_embedded(m));
}

TEST(DiskSeed, IsTheInscribedPolygon) {
  const double a = 0.01;
  const TubeSet tubes = unit_disk_tube(a);
  for (int m : {64, 96, 200}) {
    const TriMesh d = disk_mesh(tubes[0], 0, m, kTwoPi / m);
    EXPECT_NEAR(area(d), inscribed_polygon_area(m, 1.0), 1e-9);
    EXPECT_EQ(count_elements(d).euler(), 1);
    EXPECT_LT(max_attachment_error(d, tubes), 1e-12);
    EXPECT_LT(max_surface_offset(d, tubes), 1e-8 * a);
    EXPECT_GT(min_quality(d), 0.3);
  }
}

TEST(DiskFilm, RelaxesToTheUnitDisk) {
  const double a = 0.01;
  const TubeSet tubes = unit_disk_tube(a);
  const auto t0 = std::chrono::steady_clock::now();
  const TriMesh seed = init_spanning_mesh(tubes);
  const ProbeFamily probes = make_probe_family(tubes);
  RelaxOptions opts;
  opts.probes = &probes;
  RelaxReport rep;
  const TriMesh film = relax_area(seed, tubes, opts, &rep);
  EXPECT_NEAR(area(film) / kPi, 1.0, 5e-3);
  EXPECT_TRUE(rep.certified);
  EXPECT_TRUE(spanning_certificate(film, probes).pass);
  EXPECT_LT(max_surface_offset(film, tubes), 1e-8 * a);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 60.0);
}

TEST(DiskFilm, BumpFlattensMonotonically) {
  const double a = 0.01;
  const TubeSet tubes = unit_disk_tube(a);
  TriMesh d = disk_mesh(tubes[0], 0, 64, kTwoPi / 64);
  const double flat = area(d);
  for (int v = 0; v < d.vertex_count(); ++v) {
    if (d.is_attached(v)) continue;
    const double r2 = d.vertices[v].head<2>().squaredNorm();
    d.vertices[v].z() += 0.3 * (1 - r2);
  }
  ASSERT_GT(area(d), flat * 1.05);
  RelaxReport rep;
  const TriMesh film = relax_area(d, tubes, {}, &rep);
  EXPECT_TRUE(rep.converged);
  expect_monotone_between_remeshes(rep);
  EXPECT_NEAR(area(film) / flat, 1.0, 1e-4);
  double height = 0.0;
  for (const auto& p : film.vertices) height = std::max(height, std::abs(p.z()));
  EXPECT_LT(height, 2 * a);
}

TEST(CatenoidFilm, MatchesTheAnalyticArea) {
  const double R = 1.0, h = 1.0, a = 1e-3;
  const TubeSet tubes = coaxial_rings(R, h, a);
  const double exact = catenoid_area(R, h);
  ASSERT_NEAR(exact, 5.9918, 1e-3);
  const auto t0 = std::chrono::steady_clock::now();
  const TriMesh seed = loft_mesh(tubes, 0, 1, 1, 0.0, 96, 16);
  EXPECT_NEAR(area(seed), kTwoPi * h, 0.02);
  RelaxReport rep;
  const TriMesh film = relax_area(seed, tubes, {}, &rep);
  EXPECT_NEAR(area(film) / exact, 1.0, 0.01);
  EXPECT_NEAR(area(film) / catenoid_area(R, h, a), 1.0, 1e-3);
  EXPECT_TRUE(rep.converged);
  expect_monotone_between_remeshes(rep);
  EXPECT_LT(max_surface_offset(film, tubes), 1e-8 * a);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 60.0);

  // The waist of the relaxed film sits at the catenary's neck radius c.
  double waist = R;
  for (const auto& p : film.vertices) {
    if (std::abs(p.z()) < 0.05) waist = std::min(waist, p.head<2>().norm());
  }
  EXPECT_NEAR(waist, catenoid_neck(R, h), 0.01);
}

TEST(CatenoidFilm, ErrorShrinksUnderRefinement) {
  const double R = 1.0, h = 1.0, a = 1e-3;
  const TubeSet tubes = coaxial_rings(R, h, a);
  const double exact = catenoid_area(R, h, a);
  double previous = 1.0;
  for (int rulings : {24, 48, 96}) {
    const TriMesh film = relax_area(loft_mesh(tubes, 0, 1, 1, 0.0, rulings, rulings / 6), tubes);
    const double err = std::abs(area(film) / exact - 1.0);
    EXPECT_LT(err, 0.35 * previous) << rulings;  // second order: a quarter per halving
    previous = err;
  }
}

TEST(LoftMesh, CountsAndAttachments) {
  const TubeSet tubes = coaxial_rings(1.0, 1.0, 0.01);
  const TriMesh m = loft_mesh(tubes, 0, 1, 1, 0.3, 40, 5);
  EXPECT_EQ(m.vertex_count(), 40 * 6);
  EXPECT_EQ(m.triangle_count(), 2 * 40 * 5);
  const MeshCounts c = count_elements(m);
  EXPECT_EQ(c.euler(), 0);
  EXPECT_EQ(c.boundary_edges, 80);
  int attached = 0;
  for (int v = 0; v < m.vertex_count(); ++v) attached += m.is_attached(v);
  EXPECT_EQ(attached, 80);
  EXPECT_LT(max_attachment_error(m, tubes), 1e-12);
}

TEST(SpanningInit, HopfLinkIsCertified) {
  const TubeSet tubes = hopf_link(0.05, 257).tubes();
  const TriMesh seed = init_spanning_mesh(tubes);
  const ProbeFamily probes = make_probe_family(tubes);
  ASSERT_GT(probes.count(ProbeTag::DClass), 0);
  const SpanningReport cert = spanning_certificate(seed, probes);
  EXPECT_TRUE(cert.pass);
  EXPECT_EQ(cert.failures(), 0);
  EXPECT_TRUE(is_embedded(seed));
  EXPECT_EQ(count_elements(seed).euler(), 0);

  RelaxOptions opts;
  opts.probes = &probes;
  opts.steps = 400;
  RelaxReport rep;
  const TriMesh film = relax_area(seed, tubes, opts, &rep);
  EXPECT_TRUE(rep.certified);
  EXPECT_TRUE(spanning_certificate(film, probes).pass);
  EXPECT_LT(area(film), area(seed));
  expect_monotone_between_remeshes(rep);
  EXPECT_LT(max_surface_offset(film, tubes), 1e-8 * 0.05);
}

TEST(SpanningInit, UnlinkedRingsFail) {
  TubeSet tubes = coaxial_rings(1.0, 1.0, 0.05);
  Placement far = ring_placement(1.0);
  far.origin.x() += 5.0;
  tubes[1] = Tube{integrate_frame(DensityField::constant(kTwoPi, 257, 1.0, 0, 0), far), {0.05, 0.05}};
  try {
    init_spanning_mesh(tubes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InitFailed);
  }
}

TEST(Remesh, KeepsAWellShapedDiskNearlyUnchanged) {
  const double a = 0.01;
  const TubeSet tubes = unit_disk_tube(a);
  const TriMesh d = disk_mesh(tubes[0], 0, 96, kTwoPi / 96);
  const TriMesh r = remesh(d, tubes, mean_edge_length(d));
  EXPECT_NEAR(static_cast<double>(r.vertex_count()) / d.vertex_count(), 1.0, 0.1);
  EXPECT_NEAR(area(r) / area(d), 1.0, 1e-3);
  EXPECT_EQ(count_elements(r).euler(), 1);
  EXPECT_GE(min_quality(r), 0.5 * min_quality(d));
}

TEST(Remesh, RefinementPreservesShapeAndCertificate) {
  const double a = 0.01;
  const TubeSet tubes = unit_disk_tube(a);
  const ProbeFamily probes = make_probe_family(tubes);
  const TriMesh d = disk_mesh(tubes[0], 0, 64, kTwoPi / 64);
  const double target = 0.5 * mean_edge_length(d);
  const TriMesh r = remesh(d, tubes, target);
  EXPECT_GT(r.vertex_count(), 3 * d.vertex_count());
  EXPECT_EQ(count_elements(r).euler(), 1);
  EXPECT_TRUE(is_embedded(r));
  EXPECT_TRUE(spanning_certificate(r, probes).pass);
  EXPECT_LT(max_attachment_error(r, tubes), 1e-12);
  EXPECT_LT(max_surface_offset(r, tubes), 1e-8 * a);
  // Boundary refinement moves the rim polygon toward the circle, never past it.
  EXPECT_GE(area(r), area(d) - 1e-12);
  EXPECT_LE(area(r), kPi);
  EXPECT_LT(std::abs(area(r) / area(d) - 1.0), 1e-3 + (kPi - area(d)) / area(d));
  double longest = 0.0;
  for (const auto& t : r.triangles) {
    for (int k = 0; k < 3; ++k) longest = std::max(longest, (r.vertices[t[k]] - r.vertices[t[(k + 1) % 3]]).norm());
  }
  EXPECT_LE(longest, 1.5 * target + 1e-12);
}

TEST(Remesh, RemovesSlivers) {
  // Let a Hopf film degrade without remeshing, then repair it.
  const TubeSet tubes = hopf_link(0.05, 257).tubes();
  const ProbeFamily probes = make_probe_family(tubes);
  RelaxOptions opts;
  opts.steps = 60;
  opts.remesh_quality = 0.0;
  const TriMesh worn = relax_area(init_spanning_mesh(tubes), tubes, opts);
  const TriMesh fixed = remesh(worn, tubes, mean_edge_length(worn));
  EXPECT_GT(min_quality(fixed), std::max(1e-3, min_quality(worn)));
  EXPECT_EQ(count_elements(fixed).euler(), count_elements(worn).euler());
  EXPECT_TRUE(spanning_certificate(fixed, probes).pass);
  EXPECT_LT(max_surface_offset(fixed, tubes), 1e-8 * 0.05);
}

TEST(Relax, EmptyMeshIsConverged) {
  RelaxReport rep;
  const TriMesh out = relax_area(TriMesh{}, unit_disk_tube(0.01), {}, &rep);
  EXPECT_TRUE(out.empty());
  EXPECT_TRUE(rep.converged);
}
