#include <kplateau/film_mesh.hpp>
#include <kplateau/parallel.hpp>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace kp {

namespace {

std::vector<Vec3> ring_midline(const Tube& tube) { return closed_midline(tube.curve); }

Vec3 centroid(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

// Triangulates the band between two closed rings of vertex ids, both traversed in the same
// direction with matching start; advances whichever ring lags in normalized parameter.
void zip_rings(const std::vector<int>& outer, const std::vector<int>& inner, std::vector<Triangle>& tris) {
  const int no = static_cast<int>(outer.size()), ni = static_cast<int>(inner.size());
  int i = 0, j = 0;
  while (i < no || j < ni) {
    const double uo = (i + 1.0) / no, ui = (j + 1.0) / ni;
    if (j >= ni || (i < no && uo <= ui)) {
      tris.push_back({outer[i % no], outer[(i + 1) % no], inner[j % ni]});
      ++i;
    } else {
      tris.push_back({outer[i % no], inner[(j + 1) % ni], inner[j % ni]});
      ++j;
    }
  }
}

Vec3 lerp_closed(const std::vector<Vec3>& ring, double u) {
  const int n = static_cast<int>(ring.size());
  const double x = u * n;
  const int i = static_cast<int>(std::floor(x)) % n;
  const double t = x - std::floor(x);
  return (1 - t) * ring[i] + t * ring[(i + 1) % n];
}

}  // namespace

TriMesh disk_mesh(const Tube& tube, int rod, int boundary_points, double target_edge) {
  const int m = boundary_points;
  if (m < 8) throw Error(ErrorKind::InvalidInput, "disk needs at least 8 boundary points");
  const Vec3 c = centroid(ring_midline(tube));
  const double L = tube.length();

  TriMesh mesh;
  std::vector<Vec3> rim;
  std::vector<int> outer;
  double radius = 0.0;
  for (int j = 0; j < m; ++j) {
    const double s = j * L / m;
    const double th = tube.angle_towards(s, c - tube.curve.midline_at(s));
    const Vec3 p = tube.surface_point(s, th);
    outer.push_back(mesh.vertex_count());
    mesh.vertices.push_back(p);
    mesh.attach.push_back(Attachment{rod, s, th});
    rim.push_back(p);
    radius += (p - c).norm() / m;
  }
  const double edge = target_edge > 0 ? target_edge : L / m;
  const int rings = std::max(1, static_cast<int>(std::lround(radius / edge)));
  for (int k = 1; k < rings; ++k) {
    const double f = 1.0 - static_cast<double>(k) / rings;
    const int count = std::max(6, static_cast<int>(std::lround(m * f)));
    std::vector<int> inner;
    for (int i = 0; i < count; ++i) {
      inner.push_back(mesh.vertex_count());
      mesh.vertices.push_back(c + f * (lerp_closed(rim, static_cast<double>(i) / count) - c));
      mesh.attach.push_back(Attachment{});
    }
    zip_rings(outer, inner, mesh.triangles);
    outer = std::move(inner);
  }
  const int center = mesh.vertex_count();
  mesh.vertices.push_back(c);
  mesh.attach.push_back(Attachment{});
  for (int i = 0; i < static_cast<int>(outer.size()); ++i) {
    mesh.triangles.push_back({outer[i], outer[(i + 1) % outer.size()], center});
  }
  return mesh;
}

TriMesh loft_mesh(const TubeSet& tubes, int rod_a, int rod_b, int sign, double phase, int rulings, int segments) {
  if (rulings < 3 || segments < 1) throw Error(ErrorKind::InvalidInput, "loft needs >= 3 rulings and >= 1 segment");
  const Tube& ta = tubes.at(rod_a);
  const Tube& tb = tubes.at(rod_b);
  const double La = ta.length(), Lb = tb.length();
  TriMesh mesh;
  const int stride = segments + 1;
  for (int i = 0; i < rulings; ++i) {
    const double sa = i * La / rulings;
    const double sb = tb.wrap(sign * (sa / La) * Lb + phase * Lb / kTwoPi);
    const Vec3 ma = ta.curve.midline_at(sa), mb = tb.curve.midline_at(sb);
    double tha = ta.angle_towards(sa, mb - ma), thb = tb.angle_towards(sb, ma - mb);
    double sa_n = sa, sb_n = sb;
    ta.normalize(sa_n, tha);
    tb.normalize(sb_n, thb);
    const Vec3 p = ta.surface_point(sa_n, tha), q = tb.surface_point(sb_n, thb);
    for (int k = 0; k <= segments; ++k) {
      const double t = static_cast<double>(k) / segments;
      mesh.vertices.push_back((1 - t) * p + t * q);
      if (k == 0) mesh.attach.push_back(Attachment{rod_a, sa_n, tha});
      else if (k == segments) mesh.attach.push_back(Attachment{rod_b, sb_n, thb});
      else mesh.attach.push_back(Attachment{});
    }
    mesh.vertices[i * stride] = p;
    mesh.vertices[i * stride + segments] = q;
  }
  for (int i = 0; i < rulings; ++i) {
    const int a0 = i * stride, b0 = ((i + 1) % rulings) * stride;
    for (int k = 0; k < segments; ++k) {
      mesh.triangles.push_back({a0 + k, b0 + k, b0 + k + 1});
      mesh.triangles.push_back({a0 + k, b0 + k + 1, a0 + k + 1});
    }
  }
  return mesh;
}

namespace {

bool triangles_intersect(const Vec3* A, const Vec3* B) {
  for (int k = 0; k < 3; ++k) {
    if (segment_intersects_triangle(A[k], A[(k + 1) % 3], B[0], B[1], B[2])) return true;
    if (segment_intersects_triangle(B[k], B[(k + 1) % 3], A[0], A[1], A[2])) return true;
  }
  return false;
}

}  // namespace

bool is_embedded(const TriMesh& mesh) {
  const int nt = mesh.triangle_count();
  std::vector<Eigen::AlignedBox3d> boxes(nt);
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) boxes[t].extend(mesh.vertices[mesh.triangles[t][k]]);
  }
  std::vector<int> order(nt);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return boxes[x].min().x() < boxes[y].min().x(); });
  std::vector<std::uint8_t> bad(nt, 0);
  parallel_for(static_cast<std::size_t>(nt), [&](std::size_t oi) {
    const int t = order[oi];
    const auto& T = mesh.triangles[t];
    const Vec3 A[3] = {mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]]};
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const int u = order[oj];
      if (boxes[u].min().x() > boxes[t].max().x()) break;
      if (!boxes[t].intersects(boxes[u])) continue;
      const auto& U = mesh.triangles[u];
      bool shared = false;
      for (int a : T) {
        for (int b : U) shared = shared || a == b;
      }
      if (shared) continue;
      const Vec3 B[3] = {mesh.vertices[U[0]], mesh.vertices[U[1]], mesh.vertices[U[2]]};
      if (triangles_intersect(A, B)) {
        bad[oi] = 1;
        return;
      }
    }
  });
  return std::none_of(bad.begin(), bad.end(), [](std::uint8_t b) { return b != 0; });
}

void reembed(TriMesh& mesh, const TubeSet& tubes) {
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!mesh.is_attached(v)) continue;
    Attachment& at = mesh.attach[v];
    tubes.at(at.rod).normalize(at.s, at.theta);
    mesh.vertices[v] = tubes[at.rod].surface_point(at.s, at.theta);
  }
}

struct FilmTransport::Impl {
  TriMesh reference;
  std::vector<int> index;  // free vertex -> unknown, -1 for attached
  std::vector<std::vector<int>> neighbours;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

FilmTransport::FilmTransport(const TriMesh& reference) : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.reference = reference;
  const int n = reference.vertex_count();
  std::vector<std::set<int>> adj(n);
  for (const auto& t : reference.triangles) {
    for (int k = 0; k < 3; ++k) {
      adj[t[k]].insert(t[(k + 1) % 3]);
      adj[t[(k + 1) % 3]].insert(t[k]);
    }
  }
  im.neighbours.resize(n);
  for (int v = 0; v < n; ++v) im.neighbours[v].assign(adj[v].begin(), adj[v].end());
  im.index.assign(n, -1);
  int nf = 0;
  for (int v = 0; v < n; ++v) {
    if (!reference.is_attached(v)) im.index[v] = nf++;
  }
  if (nf == 0) return;
  std::vector<Eigen::Triplet<double>> trips;
  for (int v = 0; v < n; ++v) {
    const int i = im.index[v];
    if (i < 0) continue;
    // The small diagonal shift keeps components without attached vertices solvable (they stay put).
    trips.emplace_back(i, i, static_cast<double>(im.neighbours[v].size()) * (1.0 + 1e-12) + 1e-12);
    for (int w : im.neighbours[v]) {
      if (im.index[w] >= 0) trips.emplace_back(i, im.index[w], -1.0);
    }
  }
  Eigen::SparseMatrix<double> L(nf, nf);
  L.setFromTriplets(trips.begin(), trips.end());
  im.solver.compute(L);
  if (im.solver.info() != Eigen::Success) throw Error(ErrorKind::DegenerateMesh, "film transport factorization failed");
}

FilmTransport::~FilmTransport() = default;
FilmTransport::FilmTransport(FilmTransport&&) noexcept = default;
FilmTransport& FilmTransport::operator=(FilmTransport&&) noexcept = default;

TriMesh FilmTransport::apply(const TubeSet& tubes) const {
  const Impl& im = *impl_;
  TriMesh out = im.reference;
  reembed(out, tubes);
  const int n = out.vertex_count();
  const int nf = static_cast<int>(std::count_if(im.index.begin(), im.index.end(), [](int i) { return i >= 0; }));
  if (nf == 0) return out;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf, 3);
  bool any = false;
  for (int v = 0; v < n; ++v) {
    const int i = im.index[v];
    if (i < 0) continue;
    for (int w : im.neighbours[v]) {
      if (im.index[w] >= 0) continue;
      const Vec3 d = out.vertices[w] - im.reference.vertices[w];
      rhs.row(i) += d.transpose();
      any = any || d.squaredNorm() > 0.0;
    }
  }
  if (!any) return out;
  const Eigen::MatrixXd disp = im.solver.solve(rhs);
  for (int v = 0; v < n; ++v) {
    if (im.index[v] >= 0) out.vertices[v] += disp.row(im.index[v]).transpose();
  }
  return out;
}

std::vector<Vec3> area_gradient(const TriMesh& mesh) {
  std::vector<Vec3> g(mesh.vertices.size(), Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (len <= 0.0) continue;
    const Vec3 nh = n / len;
    g[t[0]] += 0.5 * nh.cross(c - b);
    g[t[1]] += 0.5 * nh.cross(a - c);
    g[t[2]] += 0.5 * nh.cross(b - a);
  }
  return g;
}

double mean_edge_length(const TriMesh& mesh) {
  if (mesh.triangles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) sum += (mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]).norm();
  }
  return sum / (3.0 * mesh.triangle_count());
}

namespace {

// Minimum distance from the open ruling segment (p, q) to the midline, sampled densely.
double ruling_clearance(const Vec3& p, const Vec3& q, const ClosedPolyline& mid, double radius) {
  double worst = std::numeric_limits<double>::infinity();
  const int samples = 24;
  for (int k = 1; k < samples; ++k) {
    const Vec3 x = p + (static_cast<double>(k) / samples) * (q - p);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mid.size(); ++i) {
      best = std::min(best, segment_distance(x, x, mid.pts[i], mid.pts[(i + 1) % mid.size()]));
    }
    worst = std::min(worst, best / radius);
  }
  return worst;
}

}  // namespace

TriMesh init_spanning_mesh(const TubeSet& tubes, const FilmOptions& opts) {
  if (tubes.empty() || tubes.size() > 2) throw Error(ErrorKind::InvalidInput, "film needs one or two rods");
  ProbeFamily probes;
  try {
    probes = make_probe_family(tubes, opts.probes);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ProbeConstructionFailed) throw;
    throw Error(ErrorKind::InitFailed, std::string("no spanning seed: ") + e.what());
  }
  double min_length = tubes[0].length();
  for (const auto& t : tubes) min_length = std::min(min_length, t.length());
  const int m = std::max(opts.boundary_points, 8);
  const double edge = opts.target_edge > 0 ? opts.target_edge : min_length / m;

  if (tubes.size() == 1) {
    TriMesh disk = disk_mesh(tubes[0], 0, std::max(m, 64), edge);
    if (!spanning_certificate(disk, probes).pass) throw Error(ErrorKind::InitFailed, "disk seed fails the spanning certificate");
    return disk;
  }

  const auto m1 = midline_polyline(tubes[0].curve), m2 = midline_polyline(tubes[1].curve);
  if (std::lround(gauss_linking_number(m1, m2)) == 0) {
    throw Error(ErrorKind::InitFailed, "rods are unlinked; supply a seed mesh");
  }
  TriMesh best;
  double best_area = std::numeric_limits<double>::infinity();
  for (int sign : {1, -1}) {
    for (int ph = 0; ph < opts.phases; ++ph) {
      const double phase = kTwoPi * ph / opts.phases;
      const TriMesh probe_loft = loft_mesh(tubes, 0, 1, sign, phase, m, 1);
      double longest = 0.0;
      bool clear = true;
      for (int i = 0; i < m && clear; ++i) {
        const Vec3& p = probe_loft.vertices[2 * i];
        const Vec3& q = probe_loft.vertices[2 * i + 1];
        longest = std::max(longest, (q - p).norm());
        clear = ruling_clearance(p, q, m1, tubes[0].section.radius) >= 1.0 - 1e-9 &&
                ruling_clearance(p, q, m2, tubes[1].section.radius) >= 1.0 - 1e-9;
      }
      if (!clear) continue;
      const int segments = std::max(2, static_cast<int>(std::ceil(longest / edge)));
      TriMesh loft = loft_mesh(tubes, 0, 1, sign, phase, m, segments);
      const double a = area(loft);
      if (a >= best_area) continue;
      if (!is_embedded(loft)) continue;
      if (!spanning_certificate(loft, probes).pass) continue;
      best = std::move(loft);
      best_area = a;
    }
  }
  if (best.empty()) throw Error(ErrorKind::InitFailed, "no embedded loft passes the spanning certificate");
  return best;
}

namespace {

struct Cotan {
  std::map<std::pair<int, int>, double> w;  // key (min, max)
  std::vector<double> diag;
};

Cotan cotan_weights(const TriMesh& mesh) {
  Cotan c;
  c.diag.assign(mesh.vertices.size(), 0.0);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int i = t[k], j = t[(k + 1) % 3], o = t[(k + 2) % 3];
      const Vec3 e1 = mesh.vertices[i] - mesh.vertices[o], e2 = mesh.vertices[j] - mesh.vertices[o];
      const double cr = e1.cross(e2).norm();
      const double cot = cr > 0.0 ? e1.dot(e2) / cr : 0.0;
      c.w[{std::min(i, j), std::max(i, j)}] += 0.5 * cot;
    }
  }
  for (auto& [e, w] : c.w) {
    w = std::max(w, 1e-3);
    c.diag[e.first] += w;
    c.diag[e.second] += w;
  }
  return c;
}

struct Direction {
  std::vector<Vec3> free_step;       // displacement for free vertices
  std::vector<Eigen::Vector2d> st;   // (ds, dtheta) for attached vertices
  std::vector<Vec3> linear;          // first-order displacement of every vertex
  double slope = 0.0;                // gradient . linear
};

Direction descent_direction(const TriMesh& mesh, const TubeSet& tubes) {
  const int n = mesh.vertex_count();
  const auto g = area_gradient(mesh);
  const Cotan lap = cotan_weights(mesh);
  Direction d;
  d.free_step.assign(n, Vec3::Zero());
  d.st.assign(n, Eigen::Vector2d::Zero());
  d.linear.assign(n, Vec3::Zero());

  std::vector<int> index(n, -1);
  int nf = 0;
  for (int v = 0; v < n; ++v) {
    if (!mesh.is_attached(v)) index[v] = nf++;
  }
  if (nf > 0) {
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& [e, w] : lap.w) {
      const int i = index[e.first], j = index[e.second];
      if (i >= 0 && j >= 0) {
        trips.emplace_back(i, j, -w);
        trips.emplace_back(j, i, -w);
      }
    }
    for (int v = 0; v < n; ++v) {
      if (index[v] >= 0) trips.emplace_back(index[v], index[v], lap.diag[v]);
    }
    Eigen::SparseMatrix<double> L(nf, nf);
    L.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::DegenerateMesh, "film Laplacian factorization failed");
    Eigen::MatrixXd rhs(nf, 3);
    for (int v = 0; v < n; ++v) {
      if (index[v] >= 0) rhs.row(index[v]) = -g[v].transpose();
    }
    const Eigen::MatrixXd sol = solver.solve(rhs);
    for (int v = 0; v < n; ++v) {
      if (index[v] >= 0) d.free_step[v] = d.linear[v] = sol.row(index[v]).transpose();
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!mesh.is_attached(v)) continue;
    const Attachment& at = mesh.attach[v];
    Vec3 ds, dth;
    tubes[at.rod].surface_tangents(at.s, at.theta, ds, dth);
    // Only the angle moves: sliding along the rod is a reparametrization in the continuum and,
    // on a polygonal boundary, just lets edges cut corners of the tube.
    const double beta = lap.diag[v] > 0 ? 1.0 / lap.diag[v] : 0.0;
    const double step = -beta * dth.dot(g[v]) / dth.squaredNorm();
    d.st[v] = {0.0, step};
    d.linear[v] = step * dth;
  }
  for (int v = 0; v < n; ++v) d.slope += g[v].dot(d.linear[v]);
  return d;
}

TriMesh apply_step(const TriMesh& mesh, const TubeSet& tubes, const Direction& d, double t) {
  TriMesh out = mesh;
  for (int v = 0; v < out.vertex_count(); ++v) {
    if (out.is_attached(v)) {
      Attachment& at = out.attach[v];
      at.s += t * d.st[v][0];
      at.theta += t * d.st[v][1];
      tubes[at.rod].normalize(at.s, at.theta);
      out.vertices[v] = tubes[at.rod].surface_point(at.s, at.theta);
    } else {
      out.vertices[v] += t * d.free_step[v];
    }
  }
  return out;
}

}  // namespace

TriMesh relax_area(const TriMesh& input, const TubeSet& tubes, const RelaxOptions& opts, RelaxReport* report) {
  input.validate();
  RelaxReport local;
  RelaxReport& rep = report ? *report : local;
  rep = RelaxReport{};
  TriMesh mesh = input;
  if (mesh.empty()) {
    rep.converged = true;
    rep.areas.push_back(0.0);
    return mesh;
  }
  const double target = opts.target_edge > 0 ? opts.target_edge : mean_edge_length(mesh);
  double clamp = opts.max_displacement > 0 ? opts.max_displacement : 0.5 * target;
  double current = area(mesh);
  rep.areas.push_back(current);

  TriMesh checkpoint = mesh;
  std::size_t checkpoint_len = rep.areas.size();
  int since_check = 0;
  auto certified = [&](const TriMesh& m) { return !opts.probes || spanning_certificate(m, *opts.probes).pass; };

  for (int step = 0; step < opts.steps; ++step) {
    const Direction d = descent_direction(mesh, tubes);
    if (!(d.slope < 0.0) || -d.slope < opts.tolerance * current) {
      rep.converged = true;
      break;
    }
    double max_move = 0.0;
    for (const auto& x : d.linear) max_move = std::max(max_move, x.norm());
    double t = opts.step_size;
    if (max_move * t > clamp) t = clamp / max_move;

    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries, t *= 0.5) {
      TriMesh trial = apply_step(mesh, tubes, d, t);
      const double a = area(trial);
      if (a <= current + 1e-4 * t * d.slope) {
        mesh = std::move(trial);
        current = a;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.converged = true;
      break;
    }
    ++rep.accepted;
    rep.areas.push_back(current);
    const std::size_t n = rep.areas.size();
    const std::size_t w = static_cast<std::size_t>(std::max(1, opts.stall_window));
    const bool recent_remesh = !rep.remeshed_at.empty() && rep.remeshed_at.back() + w >= n;
    if (n > w && !recent_remesh && rep.areas[n - 1 - w] - current < opts.stall_tolerance * current) {
      rep.converged = true;
      break;
    }

    const bool periodic = opts.remesh_interval > 0 && rep.accepted % opts.remesh_interval == 0;
    if (periodic || min_quality(mesh) < opts.remesh_quality) {
      mesh = remesh(mesh, tubes, target);
      ++rep.remeshes;
      if (min_quality(mesh) < opts.remesh_quality) {
        throw Error(ErrorKind::DegenerateMesh, "remeshing could not restore triangle quality");
      }
      current = area(mesh);
      rep.remeshed_at.push_back(rep.areas.size());
      rep.areas.push_back(current);
      since_check = opts.certificate_interval;  // verify right away
    }

    if (opts.probes && ++since_check >= opts.certificate_interval) {
      since_check = 0;
      if (certified(mesh)) {
        checkpoint = mesh;
        checkpoint_len = rep.areas.size();
      } else {
        mesh = checkpoint;
        rep.areas.resize(checkpoint_len);
        std::erase_if(rep.remeshed_at, [&](std::size_t i) { return i >= checkpoint_len; });
        current = rep.areas.back();
        clamp *= 0.5;
        if (clamp < 1e-6 * target) {
          rep.blocked = true;  // every admissible step breaks the certificate
          break;
        }
      }
    }
  }
  if (opts.probes && !certified(mesh)) {
    mesh = checkpoint;
    rep.areas.resize(checkpoint_len);
    std::erase_if(rep.remeshed_at, [&](std::size_t i) { return i >= checkpoint_len; });
  }
  rep.certified = certified(mesh);
  return mesh;
}

}  // namespace kp
