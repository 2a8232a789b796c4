#pragma once

#include <kplateau/mesh.hpp>
#include <kplateau/rod_model.hpp>
#include <kplateau/topology.hpp>

#include <memory>
#include <vector>

namespace kp {

struct FilmOptions {
  double target_edge = -1.0;   ///< < 0: shortest rod length / boundary_points
  int boundary_points = 96;    ///< vertices per attached boundary curve (at least 64 for disks)
  int phases = 16;             ///< phase samples tried for two-rod lofts
  ProbeOptions probes;
};

/// Spanning seed for one or two rods. One rod: a disk whose rim slides on the inner side of
/// the tube. Two rods: the smallest embedded, certified loft of straight rulings between the
/// tubes. Throws InitFailed if no candidate passes the spanning certificate (in particular for
/// unlinked rods).
TriMesh init_spanning_mesh(const TubeSet& tubes, const FilmOptions& opts = {});

/// Disk spanning a single tube: concentric rings zipped together, rim attached to the tube.
TriMesh disk_mesh(const Tube& tube, int rod, int boundary_points, double target_edge);

/// Band of straight rulings from rod_a at s to rod_b at sign * (s / L_a) L_b + phase L_b / 2pi,
/// with `rulings` stations and `segments` subdivisions per ruling.
TriMesh loft_mesh(const TubeSet& tubes, int rod_a, int rod_b, int sign, double phase, int rulings,
                  int segments);

/// True if no two triangles without a shared vertex intersect.
bool is_embedded(const TriMesh& mesh);

/// Recomputes attached vertex positions from their tube coordinates.
void reembed(TriMesh& mesh, const TubeSet& tubes);

/// dArea/dx per vertex.
std::vector<Vec3> area_gradient(const TriMesh& mesh);

double mean_edge_length(const TriMesh& mesh);

/// Carries a film along when its rods move: attached vertices are re-embedded from their tube
/// coordinates and free vertices follow the harmonic extension (uniform graph weights) of the
/// boundary displacement. The factorization is set up once per reference mesh.
class FilmTransport {
 public:
  explicit FilmTransport(const TriMesh& reference);
  ~FilmTransport();
  FilmTransport(FilmTransport&&) noexcept;
  FilmTransport& operator=(FilmTransport&&) noexcept;

  TriMesh apply(const TubeSet& tubes) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RelaxOptions {
  int steps = 2000;
  double step_size = 1.0;          ///< initial line-search step (1 = full preconditioned step)
  double tolerance = 1e-10;        ///< stop when the predicted decrease falls below tolerance * area
  double stall_tolerance = 1e-9;   ///< or when stall_window steps gained less than this * area
  int stall_window = 10;
  double max_displacement = -1.0;  ///< per-step vertex move clamp; < 0: 0.5 * target edge
  double target_edge = -1.0;       ///< for remeshing; < 0: mean edge length of the input
  double remesh_quality = 1e-3;    ///< remesh when the worst triangle drops below this quality
  int remesh_interval = 0;         ///< additionally remesh every this many accepted steps (0 = never)
  const ProbeFamily* probes = nullptr;  ///< if set, the certificate is kept on accepted states
  int certificate_interval = 10;
};

struct RelaxReport {
  int accepted = 0;
  int remeshes = 0;
  bool converged = false;
  bool certified = true;
  bool blocked = false;       ///< stopped because no step small enough kept the certificate
  std::vector<double> areas;  ///< area after every accepted step, starting with the input area
  std::vector<std::size_t> remeshed_at;  ///< entries of `areas` recorded right after a remesh
};

/// Preconditioned area descent with sliding boundary contact and a monotone line search.
/// Throws DegenerateMesh if remeshing cannot restore triangle quality. When the certificate
/// fails even for the smallest step, returns the last certified mesh with `blocked` set.
TriMesh relax_area(const TriMesh& mesh, const TubeSet& tubes, const RelaxOptions& opts = {},
                   RelaxReport* report = nullptr);

/// Splits edges longer than 1.5 target, collapses edges shorter than 0.5 target where the
/// topology allows, and flips non-Delaunay interior edges. Attached vertices stay attached.
TriMesh remesh(const TriMesh& mesh, const TubeSet& tubes, double target_edge);

}  // namespace kp
