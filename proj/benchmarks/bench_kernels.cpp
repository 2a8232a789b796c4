#include <kplateau/constraints.hpp>
#include <kplateau/energy.hpp>
#include <kplateau/film_mesh.hpp>
#include <kplateau/solver.hpp>
#include <kplateau/topology.hpp>

#include <benchmark/benchmark.h>

namespace kp {
namespace {

DensityField ring_field(int n) { return DensityField::constant(kTwoPi, n, 1.0, 0.0, 0.0); }

Placement ring_at(const Vec3& origin, const Vec3& v) {
  Placement p;
  p.origin = origin;
  p.frame = Frame::from_uv(Vec3(-1, 0, 0), v);
  return p;
}

LinkConfig hopf(int n) {
  LinkConfig link;
  link.rods.push_back(RodSpec{ring_field(n), ring_at(Vec3(1, 0, 0), Vec3(0, 0, 1)), {0.05, 0.05}, 1.0, {}});
  link.rods.push_back(RodSpec{ring_field(n), ring_at(Vec3(2, 0, 0), Vec3(0, 1, 0)), {0.05, 0.05}, 1.0, {}});
  return link;
}

void BM_IntegrateFrame(benchmark::State& state) {
  const DensityField df = ring_field(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_frame(df, Placement{}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_IntegrateFrame)->RangeMultiplier(2)->Range(64, 4096)->Complexity(benchmark::oN);

void BM_GaussLinkingNumber(benchmark::State& state) {
  const auto curves = hopf(static_cast<int>(state.range(0)) + 1).realize();
  const ClosedPolyline a = midline_polyline(curves[0]), b = midline_polyline(curves[1]);
  for (auto _ : state) benchmark::DoNotOptimize(gauss_linking_number(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GaussLinkingNumber)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_CrossingLinkingNumber(benchmark::State& state) {
  const auto curves = hopf(static_cast<int>(state.range(0)) + 1).realize();
  const ClosedPolyline a = midline_polyline(curves[0]), b = midline_polyline(curves[1]);
  for (auto _ : state) benchmark::DoNotOptimize(crossing_linking_number(a, b, Vec3(0.3, 0.2, 1.0)));
}
BENCHMARK(BM_CrossingLinkingNumber)->Arg(128)->Arg(1024);

void BM_Writhe(benchmark::State& state) {
  const auto curves = hopf(static_cast<int>(state.range(0)) + 1).realize();
  const ClosedPolyline c = midline_polyline(curves[0]);
  for (auto _ : state) benchmark::DoNotOptimize(writhe(c));
}
BENCHMARK(BM_Writhe)->Arg(128)->Arg(512);

void BM_LoopEnergyGradient(benchmark::State& state) {
  const ParameterMap map(hopf(129), static_cast<int>(state.range(0)));
  const VecX x = map.zero();
  for (auto _ : state) benchmark::DoNotOptimize(loop_energy_gradient(map, {}, {}, x));
  state.counters["parameters"] = map.size();
}
BENCHMARK(BM_LoopEnergyGradient)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_CiarletNecasResidual(benchmark::State& state) {
  const DensityField df = ring_field(257);
  const FramedCurve fc = integrate_frame(df, ring_at(Vec3(1, 0, 0), Vec3(0, 0, 1)));
  const CrossSection cs{0.05, 0.05};
  const double voxel = cs.radius / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ciarlet_necas_residual(fc, df, cs, voxel));
}
BENCHMARK(BM_CiarletNecasResidual)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Admissibility(benchmark::State& state) {
  const LinkConfig link = hopf(257);
  for (auto _ : state) benchmark::DoNotOptimize(admissibility(link, {}, {}, InvariantTargets{}, kInfiniteEnergy));
}
BENCHMARK(BM_Admissibility)->Unit(benchmark::kMillisecond);

void BM_InitSpanningMesh(benchmark::State& state) {
  const TubeSet tubes = hopf(257).tubes();
  FilmOptions fo;
  fo.boundary_points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(init_spanning_mesh(tubes, fo));
}
BENCHMARK(BM_InitSpanningMesh)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_SpanningCertificate(benchmark::State& state) {
  const TubeSet tubes = hopf(257).tubes();
  const TriMesh film = init_spanning_mesh(tubes);
  const ProbeFamily probes = make_probe_family(tubes);
  for (auto _ : state) benchmark::DoNotOptimize(spanning_certificate(film, probes));
  state.counters["triangles"] = film.triangle_count();
}
BENCHMARK(BM_SpanningCertificate)->Unit(benchmark::kMillisecond);

// Fixed number of relaxation steps on the Hopf film, starting from the seed.
void BM_RelaxArea(benchmark::State& state) {
  const TubeSet tubes = hopf(257).tubes();
  FilmOptions fo;
  fo.boundary_points = 64;
  const TriMesh seed = init_spanning_mesh(tubes, fo);
  RelaxOptions ro;
  ro.steps = static_cast<int>(state.range(0));
  ro.tolerance = 0.0;
  ro.stall_tolerance = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(relax_area(seed, tubes, ro));
  state.counters["vertices"] = seed.vertex_count();
}
BENCHMARK(BM_RelaxArea)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_PenaltyEnergy(benchmark::State& state) {
  const LinkConfig link = hopf(257);
  for (auto _ : state) benchmark::DoNotOptimize(penalty_energy(link, PenaltyWeights{}));
}
BENCHMARK(BM_PenaltyEnergy)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace kp

BENCHMARK_MAIN();
