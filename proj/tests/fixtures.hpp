#pragma once
// Shared geometry builders and independent oracles for the test suites.

#include <kplateau/rod_model.hpp>
#include <kplateau/topology.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace kp::testing {

inline std::vector<Vec3> circle_points(const Vec3& center, const Vec3& e1, const Vec3& e2, double radius, int n,
                                       double phase = 0.0) {
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const double t = phase + kTwoPi * i / n;
    pts[i] = center + radius * (std::cos(t) * e1 + std::sin(t) * e2);
  }
  return pts;
}

/// Unit circle in the xy-plane and unit circle in the xz-plane centered at (1,0,0), oriented so
/// that the pair has linking number +1.
inline std::pair<ClosedPolyline, ClosedPolyline> hopf_pair(int n) {
  return {ClosedPolyline(circle_points(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 1.0, n)),
          ClosedPolyline(circle_points(Vec3(1, 0, 0), Vec3::UnitX(), -Vec3::UnitZ(), 1.0, n))};
}

/// Two components of the (2, 2q) torus link on a torus with radii (R, r); Lk = q.
inline std::pair<ClosedPolyline, ClosedPolyline> torus_link(int q, int n, double R = 2.0, double r = 0.8) {
  auto comp = [&](double shift) {
    std::vector<Vec3> pts(n);
    for (int i = 0; i < n; ++i) {
      const double t = kTwoPi * i / n;
      const double phi = t, theta = q * t + shift;
      pts[i] = Vec3((R + r * std::cos(theta)) * std::cos(phi), (R + r * std::cos(theta)) * std::sin(phi),
                    -r * std::sin(theta));
    }
    return ClosedPolyline(std::move(pts));
  };
  return {comp(0.0), comp(kPi)};
}

/// Midpoint-rule Gauss double integral (independent of the library's solid-angle route).
inline double gauss_quadrature_oracle(const ClosedPolyline& c1, const ClosedPolyline& c2) {
  const auto a = c1.oriented();
  const auto b = c2.oriented();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec3 da = a[(i + 1) % a.size()] - a[i];
    const Vec3 ma = a[i] + 0.5 * da;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Vec3 db = b[(j + 1) % b.size()] - b[j];
      const Vec3 mb = b[j] + 0.5 * db;
      const Vec3 r = ma - mb;
      sum += r.dot(da.cross(db)) / std::pow(r.norm(), 3);
    }
  }
  return sum / (4.0 * kPi);
}

/// Smooth closed Fourier curve with `harmonics` random terms per coordinate.
inline std::vector<Vec3> random_fourier_curve(std::mt19937_64& rng, int n, int harmonics = 3, double amp = 1.0) {
  std::normal_distribution<double> nd;
  std::vector<Vec3> ca(harmonics), cb(harmonics);
  for (int k = 0; k < harmonics; ++k) {
    const double damp = amp / (k + 1);
    ca[k] = damp * Vec3(nd(rng), nd(rng), nd(rng));
    cb[k] = damp * Vec3(nd(rng), nd(rng), nd(rng));
  }
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    const double t = kTwoPi * i / n;
    Vec3 p = Vec3::Zero();
    for (int k = 0; k < harmonics; ++k) p += ca[k] * std::cos((k + 1) * t) + cb[k] * std::sin((k + 1) * t);
    pts[i] = p;
  }
  return pts;
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::Quaterniond q(nd(rng), nd(rng), nd(rng), nd(rng));
  return q.normalized().toRotationMatrix();
}

/// Densities of a planar circle of radius R whose cross-sections make `turns` full twists.
inline DensityField twisted_ring(double R, double turns, int n) {
  const double L = kTwoPi * R;
  const double tau = kTwoPi * turns / L;
  DensityField df;
  df.length = L;
  df.k1.resize(n);
  df.k2.resize(n);
  df.omega.assign(n, tau);
  for (int i = 0; i < n; ++i) {
    const double s = i * L / (n - 1);
    df.k1[i] = std::cos(tau * s) / R;
    df.k2[i] = -std::sin(tau * s) / R;
  }
  return df;
}

/// Placement of a circle in the xy-plane centered at the origin, starting at (R,0,0) heading +y.
inline Placement ring_placement(double R) {
  Placement pl;
  pl.origin = Vec3(R, 0, 0);
  pl.frame = Frame::from_uv(Vec3(-1, 0, 0), Vec3(0, 0, 1));
  return pl;
}

/// Resamples a closed polygon at uniform arc length (n + 1 nodes, last == first) and attaches a
/// parallel-transport frame rotated by the accumulated twist angle phi(s) = twist_rate * s.
inline FramedCurve framed_from_points(const std::vector<Vec3>& dense, int n, double twist_rate) {
  std::vector<double> cum(dense.size() + 1, 0.0);
  for (std::size_t i = 0; i < dense.size(); ++i) cum[i + 1] = cum[i] + (dense[(i + 1) % dense.size()] - dense[i]).norm();
  const double L = cum.back();
  FramedCurve fc;
  fc.h = L / n;
  fc.r.resize(n + 1);
  std::size_t seg = 0;
  for (int k = 0; k <= n; ++k) {
    const double s = std::min(k * fc.h, L);
    while (seg + 1 < dense.size() && cum[seg + 1] < s) ++seg;
    const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
    fc.r[k] = dense[seg] + t * (dense[(seg + 1) % dense.size()] - dense[seg]);
  }
  fc.r[n] = fc.r[0];
  fc.frames.resize(n + 1);
  auto tangent = [&](int k) {
    const Vec3 d = fc.r[(k + 1) % n] - fc.r[(k - 1 + n) % n];
    return Vec3(d.normalized());
  };
  Vec3 w = tangent(0);
  Vec3 u = w.unitOrthogonal();
  std::vector<Vec3> us(n + 1), ws(n + 1);
  us[0] = u;
  ws[0] = w;
  for (int k = 1; k <= n; ++k) {
    const Vec3 w2 = tangent(k % n);
    // Parallel transport: rotate by the minimal rotation taking w to w2.
    const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(ws[k - 1], w2);
    us[k] = (q * us[k - 1]).normalized();
    us[k] = (us[k] - us[k].dot(w2) * w2).normalized();
    ws[k] = w2;
  }
  for (int k = 0; k <= n; ++k) {
    const double phi = twist_rate * k * fc.h;
    const Vec3 v0 = ws[k].cross(us[k]);
    const Vec3 uk = std::cos(phi) * us[k] + std::sin(phi) * v0;
    fc.frames[k] = Frame::from_uv(uk, ws[k].cross(uk));
  }
  return fc;
}

/// Two unit rings of tube radius a forming a Hopf link with Lk = +1: ring 1 around the origin
/// in the xy-plane, ring 2 around (1, 0, 0) in the xz-plane.
inline LinkConfig hopf_link(double a = 0.05, int n = 257, double rho = 1.0) {
  const DensityField ring = DensityField::constant(kTwoPi, n, 1.0, 0.0, 0.0);
  Placement p2;
  p2.origin = Vec3(2, 0, 0);
  p2.frame = Frame::from_uv(Vec3(-1, 0, 0), Vec3(0, 1, 0));
  LinkConfig link;
  link.rods.push_back(RodSpec{ring, ring_placement(1.0), CrossSection{a, a}, rho, {}});
  link.rods.push_back(RodSpec{ring, p2, CrossSection{a, a}, rho, {}});
  return link;
}

}  // namespace kp::testing
