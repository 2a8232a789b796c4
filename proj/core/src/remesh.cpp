#include <kplateau/film_mesh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

namespace kp {

namespace {

using Edge = std::pair<int, int>;

Edge key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Attachment at fraction t between two attachments on the same tube, taking the short way
// around both the station and the angle.
Attachment interpolate(const Tube& tube, const Attachment& a, Attachment b, double t) {
  const double L = tube.length();
  if (b.s - a.s > 0.5 * L) {
    b.s -= L;
    b.theta += tube.seam_angle();
  } else if (a.s - b.s > 0.5 * L) {
    b.s += L;
    b.theta -= tube.seam_angle();
  }
  const double dth = std::remainder(b.theta - a.theta, kTwoPi);
  Attachment out{a.rod, a.s + t * (b.s - a.s), a.theta + t * dth};
  tube.normalize(out.s, out.theta);
  return out;
}

// Station interpolated between a and b; the angle is the one closest to `target`, so a new
// boundary vertex sits near the chord instead of wandering around the tube.
Attachment between(const Tube& tube, const Attachment& a, const Attachment& b, double t, const Vec3& target) {
  Attachment at = interpolate(tube, a, b, t);
  Vec3 c;
  Frame f;
  tube.curve.evaluate(at.s, c, f);
  at.theta = std::atan2((target - c).dot(f.v), (target - c).dot(f.u));
  return at;
}

constexpr double kSliver = 0.1;

class Editor {
 public:
  Editor(const TriMesh& m, const TubeSet& tubes) : m_(m), tubes_(tubes) {
    if (m_.attach.empty()) m_.attach.assign(m_.vertices.size(), Attachment{});
    alive_.assign(m_.triangles.size(), 1);
  }

  int split_pass(double hi) {
    rebuild();
    std::vector<std::pair<double, Edge>> cand;
    for (const auto& [e, ts] : edges_) {
      const double l = length(e);
      if (l > hi) cand.emplace_back(l, e);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    int done = 0;
    std::vector<std::uint8_t> locked(m_.triangles.size(), 0);
    for (const auto& [l, e] : cand) {
      const auto& ts = edges_.at(e);
      if (std::any_of(ts.begin(), ts.end(), [&](int t) { return locked[t]; })) continue;
      const int a = e.first, b = e.second;
      const int mid = m_.vertex_count();
      const bool boundary = ts.size() == 1;
      const Attachment& A = m_.attach[a];
      const Attachment& B = m_.attach[b];
      if (boundary && A.attached() && B.attached() && A.rod == B.rod) {
        const Attachment at = between(tubes_[A.rod], A, B, 0.5, 0.5 * (m_.vertices[a] + m_.vertices[b]));
        m_.vertices.push_back(tubes_[A.rod].surface_point(at.s, at.theta));
        m_.attach.push_back(at);
      } else {
        m_.vertices.push_back(0.5 * (m_.vertices[a] + m_.vertices[b]));
        m_.attach.push_back(Attachment{});
      }
      for (int t : ts) {
        Triangle tri = m_.triangles[t];
        int k = 0;
        while (!((tri[k] == a && tri[(k + 1) % 3] == b) || (tri[k] == b && tri[(k + 1) % 3] == a))) ++k;
        const int p = tri[k], q = tri[(k + 1) % 3], o = tri[(k + 2) % 3];
        m_.triangles[t] = {p, mid, o};
        m_.triangles.push_back({mid, q, o});
        alive_.push_back(1);
        locked[t] = 1;
        locked.push_back(1);
      }
      ++done;
    }
    return done;
  }

  int collapse_pass(double lo, double hi) {
    rebuild();
    std::vector<std::pair<double, Edge>> cand;
    for (const auto& [e, ts] : edges_) {
      const double l = length(e);
      if (l < lo) cand.emplace_back(l, e);
    }
    // Needles: the shortest edge of a badly shaped triangle goes regardless of its length.
    for (const auto& tri : m_.triangles) {
      if (quality(tri) >= kSliver) continue;
      Edge best = key(tri[0], tri[1]);
      for (int k = 1; k < 3; ++k) {
        const Edge e = key(tri[k], tri[(k + 1) % 3]);
        if (length(e) < length(best)) best = e;
      }
      if (length(best) >= lo) cand.emplace_back(length(best), best);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::vector<std::uint8_t> locked(m_.triangles.size(), 0);
    std::vector<std::uint8_t> dead_vertex(m_.vertices.size(), 0);
    int done = 0;
    for (const auto& [l, e] : cand) {
      int a = e.first, b = e.second;
      if (dead_vertex[a] || dead_vertex[b]) continue;
      const auto& ts = edges_.at(e);
      const bool boundary_edge = ts.size() == 1;
      const bool att_a = m_.attach[a].attached(), att_b = m_.attach[b].attached();
      const bool bnd_a = on_boundary_[a], bnd_b = on_boundary_[b];
      // Decide which vertex survives (kept) and where it ends up.
      int keep = a, drop = b;
      Vec3 pos;
      Attachment at{};
      if (att_a && att_b) {
        if (!boundary_edge || m_.attach[a].rod != m_.attach[b].rod) continue;
        at = between(tubes_[m_.attach[a].rod], m_.attach[a], m_.attach[b], 0.5, 0.5 * (m_.vertices[a] + m_.vertices[b]));
        pos = tubes_[at.rod].surface_point(at.s, at.theta);
      } else if (att_a || att_b) {
        if (att_b) std::swap(keep, drop);
        if (on_boundary_[drop]) continue;
        at = m_.attach[keep];
        pos = m_.vertices[keep];
      } else {
        if (bnd_a || bnd_b) continue;
        pos = 0.5 * (m_.vertices[a] + m_.vertices[b]);
      }
      if (!link_condition(a, b, ts)) continue;
      const auto& star_keep = vertex_tris_[keep];
      const auto& star_drop = vertex_tris_[drop];
      bool blocked = false;
      for (int t : star_keep) blocked = blocked || locked[t] || !alive_[t];
      for (int t : star_drop) blocked = blocked || locked[t] || !alive_[t];
      if (blocked) continue;
      if (!collapse_is_safe(keep, drop, pos, hi)) continue;

      for (int t : ts) alive_[t] = 0;
      for (int t : star_drop) {
        if (!alive_[t]) continue;
        for (auto& v : m_.triangles[t]) {
          if (v == drop) v = keep;
        }
      }
      m_.vertices[keep] = pos;
      m_.attach[keep] = at;
      dead_vertex[drop] = 1;
      for (int t : star_keep) locked[t] = 1;
      for (int t : star_drop) locked[t] = 1;
      ++done;
    }
    compact_triangles();
    return done;
  }

  // Caps: a vertex lying almost on the opposite boundary edge. The edge is split at the foot of
  // that vertex, leaving a short edge for the collapse pass.
  int cap_split_pass() {
    rebuild();
    std::vector<std::uint8_t> locked(m_.triangles.size(), 0);
    int done = 0;
    const int count = static_cast<int>(m_.triangles.size());
    for (int t = 0; t < count; ++t) {
      if (locked[t] || quality(m_.triangles[t]) >= kSliver) continue;
      const Triangle tri = m_.triangles[t];
      int k = 0;
      for (int j = 1; j < 3; ++j) {
        if (length(key(tri[j], tri[(j + 1) % 3])) > length(key(tri[k], tri[(k + 1) % 3]))) k = j;
      }
      const int p = tri[k], q = tri[(k + 1) % 3], o = tri[(k + 2) % 3];
      if (edges_.at(key(p, q)).size() != 1 || angle_at(o, p, q) < 2.0 * kPi / 3.0) continue;
      const Vec3 pq = m_.vertices[q] - m_.vertices[p];
      const double u = std::clamp((m_.vertices[o] - m_.vertices[p]).dot(pq) / pq.squaredNorm(), 0.2, 0.8);
      const int mid = m_.vertex_count();
      const Attachment& A = m_.attach[p];
      const Attachment& B = m_.attach[q];
      if (A.attached() && B.attached() && A.rod == B.rod) {
        const Attachment at = between(tubes_[A.rod], A, B, u, m_.vertices[p] + u * pq);
        m_.vertices.push_back(tubes_[A.rod].surface_point(at.s, at.theta));
        m_.attach.push_back(at);
      } else {
        m_.vertices.push_back(m_.vertices[p] + u * pq);
        m_.attach.push_back(Attachment{});
      }
      m_.triangles[t] = {p, mid, o};
      m_.triangles.push_back({mid, q, o});
      alive_.push_back(1);
      locked[t] = 1;
      locked.push_back(1);
      ++done;
    }
    return done;
  }

  int flip_pass() {
    rebuild();
    int done = 0;
    std::vector<std::uint8_t> locked(m_.triangles.size(), 0);
    for (const auto& [e, ts] : edges_) {
      if (ts.size() != 2 || locked[ts[0]] || locked[ts[1]]) continue;
      const int a = e.first, b = e.second;
      const int c = opposite(ts[0], a, b), d = opposite(ts[1], a, b);
      if (c == d || edges_.count(key(c, d))) continue;
      const double alpha = angle_at(c, a, b), beta = angle_at(d, a, b);
      if (alpha + beta <= kPi + 1e-9) continue;
      // The first triangle reads (c, first, second) cyclically; the flipped pair keeps its orientation.
      const Triangle t0 = m_.triangles[ts[0]];
      const int first = t0[(std::find(t0.begin(), t0.end(), c) - t0.begin() + 1) % 3];
      const int second = first == a ? b : a;
      const Triangle n0{c, first, d}, n1{c, d, second};
      const Vec3 old_n = normal(m_.triangles[ts[0]]) + normal(m_.triangles[ts[1]]);
      const Vec3 nn0 = normal(n0), nn1 = normal(n1);
      if (nn0.dot(old_n) <= 0.0 || nn1.dot(old_n) <= 0.0 || nn0.dot(nn1) <= 0.0) continue;
      if (std::min(quality(n0), quality(n1)) <= std::min(quality(m_.triangles[ts[0]]), quality(m_.triangles[ts[1]]))) continue;
      m_.triangles[ts[0]] = n0;
      m_.triangles[ts[1]] = n1;
      locked[ts[0]] = locked[ts[1]] = 1;
      ++done;
    }
    return done;
  }

  // Moves free interior vertices toward the centroid of their neighbours within the tangent
  // plane, which evens out triangle shapes without changing the surface to first order.
  void smooth_tangential(int iterations) {
    for (int it = 0; it < iterations; ++it) {
      rebuild();
      std::vector<Vec3> next = m_.vertices;
      for (int v = 0; v < m_.vertex_count(); ++v) {
        if (m_.attach[v].attached() || on_boundary_[v] || vertex_tris_[v].empty()) continue;
        Vec3 nsum = Vec3::Zero(), csum = Vec3::Zero();
        double wsum = 0.0;
        for (int t : vertex_tris_[v]) {
          const Triangle& tri = m_.triangles[t];
          const Vec3 n = normal(tri);
          const double w = 0.5 * n.norm();
          nsum += n;
          csum += w * (m_.vertices[tri[0]] + m_.vertices[tri[1]] + m_.vertices[tri[2]]) / 3.0;
          wsum += w;
        }
        if (wsum <= 0.0 || nsum.norm() <= 0.0) continue;
        const Vec3 n = nsum.normalized();
        Vec3 d = csum / wsum - m_.vertices[v];
        d -= d.dot(n) * n;
        next[v] = m_.vertices[v] + 0.5 * d;
      }
      m_.vertices = std::move(next);
    }
  }

  TriMesh finish() {
    compact_triangles();
    std::vector<int> remap(m_.vertices.size(), -1);
    TriMesh out;
    for (const auto& t : m_.triangles) {
      for (int v : t) {
        if (remap[v] < 0) {
          remap[v] = out.vertex_count();
          out.vertices.push_back(m_.vertices[v]);
          out.attach.push_back(m_.attach[v]);
        }
      }
    }
    for (const auto& t : m_.triangles) out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    return out;
  }

 private:
  void rebuild() {
    compact_triangles();
    edges_.clear();
    vertex_tris_.assign(m_.vertices.size(), {});
    on_boundary_.assign(m_.vertices.size(), 0);
    for (int t = 0; t < static_cast<int>(m_.triangles.size()); ++t) {
      const auto& tri = m_.triangles[t];
      for (int k = 0; k < 3; ++k) {
        edges_[key(tri[k], tri[(k + 1) % 3])].push_back(t);
        vertex_tris_[tri[k]].push_back(t);
      }
    }
    for (const auto& [e, ts] : edges_) {
      if (ts.size() == 1) on_boundary_[e.first] = on_boundary_[e.second] = 1;
    }
  }

  void compact_triangles() {
    std::vector<Triangle> kept;
    for (std::size_t t = 0; t < m_.triangles.size(); ++t) {
      if (alive_[t]) kept.push_back(m_.triangles[t]);
    }
    m_.triangles = std::move(kept);
    alive_.assign(m_.triangles.size(), 1);
  }

  double length(const Edge& e) const { return (m_.vertices[e.first] - m_.vertices[e.second]).norm(); }

  Vec3 normal(const Triangle& t) const {
    return (m_.vertices[t[1]] - m_.vertices[t[0]]).cross(m_.vertices[t[2]] - m_.vertices[t[0]]);
  }

  double quality(const Triangle& t) const {
    return triangle_quality(m_.vertices[t[0]], m_.vertices[t[1]], m_.vertices[t[2]]);
  }

  int opposite(int t, int a, int b) const {
    for (int v : m_.triangles[t]) {
      if (v != a && v != b) return v;
    }
    return -1;
  }

  double angle_at(int o, int a, int b) const {
    const Vec3 u = m_.vertices[a] - m_.vertices[o], v = m_.vertices[b] - m_.vertices[o];
    return std::atan2(u.cross(v).norm(), u.dot(v));
  }

  std::set<int> neighbours(int v) const {
    std::set<int> out;
    for (int t : vertex_tris_[v]) {
      for (int w : m_.triangles[t]) {
        if (w != v) out.insert(w);
      }
    }
    return out;
  }

  bool link_condition(int a, int b, const std::vector<int>& ts) const {
    const auto na = neighbours(a), nb = neighbours(b);
    std::vector<int> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    std::set<int> opp;
    for (int t : ts) opp.insert(opposite(t, a, b));
    return common.size() == opp.size() && std::equal(common.begin(), common.end(), opp.begin());
  }

  bool collapse_is_safe(int keep, int drop, const Vec3& pos, double hi) const {
    // Degenerate triangles have unreliable normals, so orientation is judged against the
    // star as a whole, and quality only has to stay above the star's current worst.
    Vec3 star_normal = Vec3::Zero();
    double worst = 1.0;
    for (int v : {keep, drop}) {
      for (int t : vertex_tris_[v]) {
        star_normal += normal(m_.triangles[t]);
        worst = std::min(worst, quality(m_.triangles[t]));
      }
    }
    const double floor = std::min(0.05, 0.9 * worst);
    for (int v : {keep, drop}) {
      for (int t : vertex_tris_[v]) {
        const Triangle& tri = m_.triangles[t];
        if (std::count(tri.begin(), tri.end(), keep) && std::count(tri.begin(), tri.end(), drop)) continue;
        Triangle moved = tri;
        for (auto& w : moved) {
          if (w == drop) w = keep;
        }
        const Vec3 before = normal(tri);
        Vec3 pts[3];
        for (int k = 0; k < 3; ++k) pts[k] = moved[k] == keep ? pos : m_.vertices[moved[k]];
        const Vec3 after = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
        const Vec3 ref = quality(tri) >= kSliver ? before : star_normal;
        if (after.dot(ref) <= 0.0) return false;
        if (triangle_quality(pts[0], pts[1], pts[2]) < floor) return false;
        for (int k = 0; k < 3; ++k) {
          if ((pts[k] - pts[(k + 1) % 3]).norm() > hi) return false;
        }
      }
    }
    return true;
  }

  TriMesh m_;
  const TubeSet& tubes_;
  std::vector<std::uint8_t> alive_;
  std::map<Edge, std::vector<int>> edges_;
  std::vector<std::vector<int>> vertex_tris_;
  std::vector<std::uint8_t> on_boundary_;
};

}  // namespace

TriMesh remesh(const TriMesh& mesh, const TubeSet& tubes, double target_edge) {
  if (!(target_edge > 0.0)) throw Error(ErrorKind::InvalidInput, "target edge must be positive");
  mesh.validate();
  Editor ed(mesh, tubes);
  const double hi = 1.5 * target_edge, lo = 0.5 * target_edge;
  for (int round = 0; round < 8; ++round) {
    int changes = 0;
    for (int k = 0; k < 4; ++k) {
      const int s = ed.split_pass(hi);
      changes += s;
      if (s == 0) break;
    }
    changes += ed.cap_split_pass();
    for (int k = 0; k < 4; ++k) {
      const int c = ed.collapse_pass(lo, hi);
      changes += c;
      if (c == 0) break;
    }
    for (int k = 0; k < 4; ++k) {
      const int f = ed.flip_pass();
      changes += f;
      if (f == 0) break;
    }
    ed.smooth_tangential(1);
    if (changes == 0) break;
  }
  return ed.finish();
}

}  // namespace kp
