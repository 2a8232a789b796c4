#include <kplateau/parallel.hpp>
#include <kplateau/topology.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

namespace kp {

std::vector<Vec3> ClosedPolyline::oriented() const {
  if (orientation >= 0) return pts;
  return {pts.rbegin(), pts.rend()};
}

void ClosedPolyline::validate() const {
  if (pts.size() < 3) throw Error(ErrorKind::InvalidInput, "closed polyline needs >= 3 points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i] - pts[(i + 1) % pts.size()]).norm() == 0.0) {
      throw Error(ErrorKind::InvalidInput, "closed polyline has repeated consecutive points");
    }
  }
}

ClosedPolyline midline_polyline(const FramedCurve& fc) { return ClosedPolyline(closed_midline(fc)); }

namespace {

double segment_distance_oneway(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 0.0 && e <= 0.0) return r.norm();
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2), denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

// Signed solid angle / 4pi subtended between segments p1p2 and p3p4 (exact Gauss integral
// of the segment pair).
double segment_pair_linking(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
  const Vec3 r13 = p3 - p1, r14 = p4 - p1, r23 = p3 - p2, r24 = p4 - p2;
  Vec3 n[4] = {r13.cross(r14), r14.cross(r24), r24.cross(r23), r23.cross(r13)};
  for (auto& v : n) {
    const double len = v.norm();
    if (len < 1e-300) return 0.0;
    v /= len;
  }
  auto as = [](double x) { return std::asin(std::clamp(x, -1.0, 1.0)); };
  const double omega = as(n[0].dot(n[1])) + as(n[1].dot(n[2])) + as(n[2].dot(n[3])) + as(n[3].dot(n[0]));
  const double orient = (p4 - p3).cross(p2 - p1).dot(r13);
  if (orient == 0.0) return 0.0;
  return (orient > 0 ? omega : -omega) / (4.0 * kPi);
}

}  // namespace

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  return std::min(segment_distance_oneway(p0, p1, q0, q1), segment_distance_oneway(q0, q1, p0, p1));
}

double polyline_distance(const ClosedPolyline& a, const ClosedPolyline& b) {
  const auto& pa = a.pts;
  const auto& pb = b.pts;
  const std::size_t na = pa.size(), nb = pb.size();
  std::vector<double> row(na, std::numeric_limits<double>::infinity());
  parallel_for(na, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j) {
      best = std::min(best, segment_distance(pa[i], pa[(i + 1) % na], pb[j], pb[(j + 1) % nb]));
    }
    row[i] = best;
  });
  return *std::min_element(row.begin(), row.end());
}

double gauss_linking_number(const ClosedPolyline& c1, const ClosedPolyline& c2) {
  c1.validate();
  c2.validate();
  if (polyline_distance(c1, c2) < 1e-9) {
    throw Error(ErrorKind::CurvesTouch, "curves intersect");
  }
  const auto a = c1.oriented();
  const auto b = c2.oriented();
  const std::size_t na = a.size(), nb = b.size();
  std::vector<double> row(na, 0.0);
  parallel_for(na, [&](std::size_t i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      sum += segment_pair_linking(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]);
    }
    row[i] = sum;
  });
  return std::accumulate(row.begin(), row.end(), 0.0);
}

double writhe(const ClosedPolyline& c) {
  c.validate();
  const auto p = c.oriented();
  const std::size_t n = p.size();
  std::vector<double> row(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double sum = 0.0;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent across the closing segment
      sum += segment_pair_linking(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]);
    }
    row[i] = sum;
  });
  return 2.0 * std::accumulate(row.begin(), row.end(), 0.0);
}

namespace {

struct Projector {
  Vec3 dir, e1, e2;

  explicit Projector(const Vec3& d) : dir(d.normalized()) {
    const Vec3 helper = std::abs(dir.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    e1 = dir.cross(helper).normalized();
    e2 = dir.cross(e1);
  }
  Eigen::Vector2d operator()(const Vec3& p) const { return {p.dot(e1), p.dot(e2)}; }
};

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

enum class Crossing { None, Positive, Negative, Degenerate };

// Sign convention: positive when (over x under) . dir > 0, with dir pointing at the viewer.
Crossing classify_crossing(const Projector& pr, const Vec3& a0, const Vec3& a1, const Vec3& b0,
                           const Vec3& b1, double scale) {
  const Eigen::Vector2d pa0 = pr(a0), pa1 = pr(a1), pb0 = pr(b0), pb1 = pr(b1);
  const Eigen::Vector2d da = pa1 - pa0, db = pb1 - pb0;
  const double eps = 1e-10;
  // Cheap reject on bounding boxes.
  if (std::max(pa0.x(), pa1.x()) < std::min(pb0.x(), pb1.x()) - eps * scale ||
      std::max(pb0.x(), pb1.x()) < std::min(pa0.x(), pa1.x()) - eps * scale ||
      std::max(pa0.y(), pa1.y()) < std::min(pb0.y(), pb1.y()) - eps * scale ||
      std::max(pb0.y(), pb1.y()) < std::min(pa0.y(), pa1.y()) - eps * scale) {
    return Crossing::None;
  }
  if (da.norm() < eps * (a1 - a0).norm() || db.norm() < eps * (b1 - b0).norm()) return Crossing::Degenerate;
  const double denom = cross2(da, db);
  const Eigen::Vector2d w = pb0 - pa0;
  if (std::abs(denom) < 1e-12 * da.norm() * db.norm()) {
    // Parallel in projection: degenerate only if collinear and overlapping.
    if (std::abs(cross2(w, da)) < eps * scale * da.norm()) return Crossing::Degenerate;
    return Crossing::None;
  }
  const double t = cross2(w, db) / denom;
  const double u = cross2(w, da) / denom;
  const double te = 1e-9;
  if (t < -te || t > 1 + te || u < -te || u > 1 + te) return Crossing::None;
  if (t < te || t > 1 - te || u < te || u > 1 - te) return Crossing::Degenerate;
  const Vec3 pa = a0 + t * (a1 - a0), pb = b0 + u * (b1 - b0);
  const double ha = pa.dot(pr.dir), hb = pb.dot(pr.dir);
  if (std::abs(ha - hb) < eps * scale) return Crossing::Degenerate;
  const Vec3 over = ha > hb ? (a1 - a0) : (b1 - b0);
  const Vec3 under = ha > hb ? (b1 - b0) : (a1 - a0);
  return over.cross(under).dot(pr.dir) > 0 ? Crossing::Positive : Crossing::Negative;
}

double bbox_scale(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  Eigen::AlignedBox3d box;
  for (const auto& p : a) box.extend(p);
  for (const auto& p : b) box.extend(p);
  return std::max(box.diagonal().norm(), 1e-300);
}

// Returns false when the projection is not generic.
bool try_crossing_sum(const std::vector<Vec3>& a, const std::vector<Vec3>& b, const Vec3& dir, int& sum) {
  const Projector pr(dir);
  const double scale = bbox_scale(a, b);
  const std::size_t na = a.size(), nb = b.size();
  sum = 0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      switch (classify_crossing(pr, a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb], scale)) {
        case Crossing::None: break;
        case Crossing::Positive: ++sum; break;
        case Crossing::Negative: --sum; break;
        case Crossing::Degenerate: return false;
      }
    }
  }
  return sum % 2 == 0;
}

Vec3 perturbed(const Vec3& dir, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const Vec3 jitter(nd(rng), nd(rng), nd(rng));
  return (dir.normalized() + 0.1 * jitter.normalized()).normalized();
}

}  // namespace

int crossing_linking_number(const ClosedPolyline& c1, const ClosedPolyline& c2, const Vec3& dir,
                            std::uint64_t seed) {
  c1.validate();
  c2.validate();
  const auto a = c1.oriented();
  const auto b = c2.oriented();
  std::mt19937_64 rng(seed);
  Vec3 d = dir.norm() > 0 ? dir.normalized() : Vec3(0.267, 0.534, 0.802).normalized();
  for (int attempt = 0; attempt <= 16; ++attempt) {
    int sum = 0;
    if (try_crossing_sum(a, b, d, sum)) return sum / 2;
    d = perturbed(dir.norm() > 0 ? dir : d, rng);
  }
  throw Error(ErrorKind::DegenerateProjection, "no generic projection after 16 retries");
}

bool directional_writhe(const ClosedPolyline& c, const Vec3& dir, int& out) {
  const auto p = c.oriented();
  const Projector pr(dir);
  const double scale = bbox_scale(p, p);
  const std::size_t n = p.size();
  out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      switch (classify_crossing(pr, p[i], p[(i + 1) % n], p[j], p[(j + 1) % n], scale)) {
        case Crossing::None: break;
        case Crossing::Positive: ++out; break;
        case Crossing::Negative: --out; break;
        case Crossing::Degenerate: return false;
      }
    }
  }
  return true;
}

double total_twist(const DensityField& df) {
  const int n = df.size();
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) sum += 0.5 * (df.omega[i] + df.omega[i + 1]);
  return sum * df.spacing() / kTwoPi;
}

int self_linking(const FramedCurve& fc, double offset) {
  if (!(offset > 0.0)) throw Error(ErrorKind::InvalidInput, "push-off offset must be positive");
  const int n = fc.size();
  const Frame& f0 = fc.frames.front();
  std::vector<Vec3> push;
  push.reserve(n + 16);
  for (int i = 0; i + 1 < n; ++i) push.push_back(fc.r[i] + offset * fc.frames[i].u);
  // Close the ribbon by the shortest rotation from u(L) back to u(0) about the tangent at s = 0.
  const Vec3& uL = fc.frames.back().u;
  const double phi = std::atan2(uL.dot(f0.v), uL.dot(f0.u));
  const int arc = std::max(1, static_cast<int>(std::ceil(std::abs(phi) / (kPi / 8))));
  for (int k = 0; k < arc; ++k) {
    const double th = phi * (1.0 - static_cast<double>(k) / arc);
    push.push_back(fc.r.back() + offset * (std::cos(th) * f0.u + std::sin(th) * f0.v));
  }
  // A frame that closes exactly puts the last arc point on top of the first push-off point.
  while (push.size() > 3 && (push.back() - push.front()).norm() == 0.0) push.pop_back();
  const ClosedPolyline mid = midline_polyline(fc);
  const ClosedPolyline ribbon(std::move(push));
  if (polyline_distance(mid, ribbon) < 0.5 * offset) {
    throw Error(ErrorKind::OffsetTooLarge, "push-off curve approaches the midline");
  }
  return static_cast<int>(std::lround(gauss_linking_number(ribbon, mid)));
}

namespace {

class PointGrid {
 public:
  explicit PointGrid(std::span<const Vec3> pts) : pts_(pts) {
    for (const auto& p : pts) box_.extend(p);
    const double diag = std::max(box_.diagonal().maxCoeff(), 1e-12);
    cell_ = diag / std::max(1.0, std::cbrt(static_cast<double>(pts.size())));
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(index(pts[i]))].push_back(i);
    dims_ = index(box_.max());
  }

  double nearest(const Vec3& q) const {
    const Vec3 clamped = q.cwiseMax(box_.min()).cwiseMin(box_.max());
    const Eigen::Vector3i c = index(clamped);
    double best = std::numeric_limits<double>::infinity();
    const int max_ring = dims_.maxCoeff() + 1;
    for (int ring = 0; ring <= max_ring; ++ring) {
      visit_ring(c, ring, [&](std::size_t i) { best = std::min(best, (pts_[i] - q).norm()); });
      // Points in rings > ring are at least ring * cell from the clamped query, and the
      // clamped point is the projection of q onto the box.
      if (best <= ring * cell_) break;
    }
    return best;
  }

 private:
  Eigen::Vector3i index(const Vec3& p) const {
    return ((p - box_.min()) / cell_).array().floor().cast<int>().max(0);
  }
  static std::int64_t key(const Eigen::Vector3i& c) {
    return (static_cast<std::int64_t>(c.x()) * 2097152 + c.y()) * 2097152 + c.z();
  }
  template <class F>
  void visit_ring(const Eigen::Vector3i& c, int ring, F&& f) const {
    for (int dx = -ring; dx <= ring; ++dx) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          const Eigen::Vector3i k = c + Eigen::Vector3i(dx, dy, dz);
          if ((k.array() < 0).any() || (k.array() > dims_.array()).any()) continue;
          auto it = cells_.find(key(k));
          if (it == cells_.end()) continue;
          for (std::size_t i : it->second) f(i);
        }
      }
    }
  }

  std::span<const Vec3> pts_;
  Eigen::AlignedBox3d box_;
  double cell_ = 1.0;
  Eigen::Vector3i dims_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

double directed_hausdorff(std::span<const Vec3> a, std::span<const Vec3> b) {
  const PointGrid grid(b);
  std::vector<double> d(a.size());
  parallel_for(a.size(), [&](std::size_t i) { d[i] = grid.nearest(a[i]); });
  return *std::max_element(d.begin(), d.end());
}

}  // namespace

double hausdorff_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidInput, "Hausdorff distance of an empty set");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

std::string_view to_string(ProbeTag tag) {
  switch (tag) {
    case ProbeTag::AroundRod1: return "around_rod1";
    case ProbeTag::AroundRod2: return "around_rod2";
    case ProbeTag::DClass: return "d_class";
  }
  return "unknown";
}

int ProbeFamily::count(ProbeTag tag) const {
  return static_cast<int>(std::count(tags.begin(), tags.end(), tag));
}

namespace {

std::vector<Vec3> meridian(const Tube& tube, double s, double radius, int points) {
  const Frame f = tube.curve.frame_at(tube.wrap(s));
  const Vec3 c = tube.curve.midline_at(tube.wrap(s));
  std::vector<Vec3> loop(points);
  for (int k = 0; k < points; ++k) {
    const double th = kTwoPi * k / points;
    loop[k] = c + radius * (std::cos(th) * f.u + std::sin(th) * f.v);
  }
  return loop;
}

double point_polyline_distance(const Vec3& p, const ClosedPolyline& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.size(); ++i) best = std::min(best, segment_distance(p, p, c.pts[i], c.pts[(i + 1) % c.size()]));
  return best;
}

// Probe must lie in the complement of every tube.
bool clears_tubes(const ClosedPolyline& loop, const std::vector<ClosedPolyline>& mids, const TubeSet& tubes) {
  for (std::size_t k = 0; k < tubes.size(); ++k) {
    if (polyline_distance(loop, mids[k]) <= tubes[k].section.radius * 1.02) return false;
  }
  return true;
}

}  // namespace

ProbeFamily make_probe_family(const TubeSet& tubes, const ProbeOptions& opts) {
  if (tubes.empty() || tubes.size() > 2) {
    throw Error(ErrorKind::InvalidInput, "probe family needs one or two rods");
  }
  std::vector<ClosedPolyline> mids;
  for (const auto& t : tubes) mids.push_back(midline_polyline(t.curve));
  if (tubes.size() == 2 && polyline_distance(mids[0], mids[1]) <=
                               tubes[0].section.radius + tubes[1].section.radius) {
    throw Error(ErrorKind::ProbeConstructionFailed, "rods are not disjoint");
  }
  const Vec3 view = Vec3(0.3128, 0.5712, 0.7588).normalized();
  ProbeFamily fam;

  for (std::size_t k = 0; k < tubes.size(); ++k) {
    const Tube& tube = tubes[k];
    const double a = tube.section.radius;
    const ProbeTag tag = k == 0 ? ProbeTag::AroundRod1 : ProbeTag::AroundRod2;
    for (int j = 0; j < opts.stations; ++j) {
      const double s = (j + 0.5) * tube.length() / opts.stations;
      const Vec3 c = tube.curve.midline_at(s);
      double rmax = 0.5 * tube.length() / kPi;
      if (tubes.size() == 2) {
        const std::size_t o = 1 - k;
        rmax = std::min(rmax, point_polyline_distance(c, mids[o]) - tubes[o].section.radius);
      }
      bool placed = false;
      for (double frac : {0.5, 0.3, 0.15, 0.07}) {
        const double rho = a + frac * (rmax - a);
        if (!(rho > a)) break;
        ClosedPolyline loop(meridian(tube, s, rho, opts.loop_points));
        if (!clears_tubes(loop, mids, tubes)) continue;
        if (std::abs(crossing_linking_number(loop, mids[k], view, opts.seed)) != 1) continue;
        if (tubes.size() == 2 && crossing_linking_number(loop, mids[1 - k], view, opts.seed) != 0) continue;
        fam.loops.push_back(std::move(loop));
        fam.tags.push_back(tag);
        placed = true;
        break;
      }
      if (!placed) {
        throw Error(ErrorKind::ProbeConstructionFailed, "cannot place a simple link at a station");
      }
    }
  }

  if (tubes.size() < 2 || opts.d_class <= 0) return fam;

  // Loops linking both rods once: connected sums of a meridian of each rod, bridged across
  // the closest approaches of the two midlines.
  const Tube& t1 = tubes[0];
  const Tube& t2 = tubes[1];
  const double a1 = t1.section.radius, a2 = t2.section.radius;
  const double max_bridge =
      opts.max_bridge > 0 ? opts.max_bridge : 1.5 * std::min(t1.length(), t2.length()) / kTwoPi;
  const auto& p1 = mids[0].pts;
  const auto& p2 = mids[1].pts;
  struct Pair {
    double d;
    int i, j;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < static_cast<int>(p1.size()); ++i) {
    Pair best{std::numeric_limits<double>::infinity(), i, 0};
    for (int j = 0; j < static_cast<int>(p2.size()); ++j) {
      const double d = (p1[i] - p2[j]).norm();
      if (d < best.d) best = {d, i, j};
    }
    pairs.push_back(best);
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.d < y.d; });

  const int n1 = static_cast<int>(p1.size());
  const int min_sep = std::max(1, n1 / (2 * opts.d_class));
  std::vector<int> used;
  int built = 0;
  for (const Pair& pr : pairs) {
    if (built >= opts.d_class) break;
    if (pr.d > max_bridge) break;
    bool near_used = false;
    for (int u : used) {
      const int di = std::abs(u - pr.i);
      if (std::min(di, n1 - di) < min_sep) near_used = true;
    }
    if (near_used) continue;
    const double gap = pr.d - a1 - a2;
    if (gap <= 0) continue;
    const double s1 = pr.i * t1.curve.h, s2 = pr.j * t2.curve.h;
    for (double frac : {0.3, 0.2, 0.1}) {
      auto m1 = meridian(t1, s1, a1 + frac * gap, opts.loop_points);
      auto m2 = meridian(t2, s2, a2 + frac * gap, opts.loop_points);
      if (crossing_linking_number(ClosedPolyline(m1), mids[0], view, opts.seed) < 0) std::reverse(m1.begin(), m1.end());
      if (crossing_linking_number(ClosedPolyline(m2), mids[1], view, opts.seed) < 0) std::reverse(m2.begin(), m2.end());
      const Vec3 c1 = p1[pr.i], c2 = p2[pr.j];
      auto closest = [](const std::vector<Vec3>& m, const Vec3& target) {
        int best = 0;
        for (int q = 1; q < static_cast<int>(m.size()); ++q) {
          if ((m[q] - target).norm() < (m[best] - target).norm()) best = q;
        }
        return best;
      };
      const int ko = closest(m1, c2), lo = closest(m2, c1);
      const int M1 = static_cast<int>(m1.size()), M2 = static_cast<int>(m2.size());
      std::vector<Vec3> loop;
      for (int q = 1; q <= M1; ++q) loop.push_back(m1[(ko + q) % M1]);
      for (int q = 1; q <= M2; ++q) loop.push_back(m2[(lo + q) % M2]);
      ClosedPolyline candidate(std::move(loop));
      if (!clears_tubes(candidate, mids, tubes)) continue;
      if (crossing_linking_number(candidate, mids[0], view, opts.seed) != 1) continue;
      if (crossing_linking_number(candidate, mids[1], view, opts.seed) != 1) continue;
      fam.loops.push_back(std::move(candidate));
      fam.tags.push_back(ProbeTag::DClass);
      used.push_back(pr.i);
      ++built;
      break;
    }
  }
  if (built == 0) {
    throw Error(ErrorKind::ProbeConstructionFailed, "no loop linking both rods could be realized");
  }
  return fam;
}

bool segment_intersects_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 d = q - p;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pv = d.cross(e2);
  const double det = e1.dot(pv);
  const double scale = e1.norm() * e2.norm() * d.norm();
  if (std::abs(det) <= 1e-14 * scale) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = p - a;
  const double u = tv.dot(pv) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = tv.cross(e1);
  const double v = d.dot(qv) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = e2.dot(qv) * inv;
  return t >= 0.0 && t <= 1.0;
}

int SpanningReport::failures() const {
  return static_cast<int>(std::count_if(loops.begin(), loops.end(), [](const ProbeResult& r) { return r.hits == 0; }));
}

SpanningReport spanning_certificate(const TriMesh& mesh, const ProbeFamily& probes) {
  std::vector<Eigen::AlignedBox3d> boxes(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) boxes[t].extend(mesh.vertices[mesh.triangles[t][k]]);
  }
  SpanningReport rep;
  rep.loops.resize(probes.loops.size());
  parallel_for(probes.loops.size(), [&](std::size_t l) {
    const auto& pts = probes.loops[l].pts;
    int hits = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec3& p = pts[i];
      const Vec3& q = pts[(i + 1) % pts.size()];
      Eigen::AlignedBox3d seg(p.cwiseMin(q), p.cwiseMax(q));
      for (std::size_t t = 0; t < boxes.size(); ++t) {
        if (!boxes[t].intersects(seg)) continue;
        const auto& tri = mesh.triangles[t];
        if (segment_intersects_triangle(p, q, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]])) ++hits;
      }
    }
    rep.loops[l] = {probes.tags[l], hits};
  });
  rep.pass = !rep.loops.empty() && rep.failures() == 0;
  return rep;
}

}  // namespace kp
