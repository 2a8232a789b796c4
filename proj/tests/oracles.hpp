#pragma once
// Shape builders with closed-form answers, shared by the unit and acceptance tests.

#include <kplateau/film_mesh.hpp>

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace kp::testing {

// Open planar hairpin: two parallel arms of length `arm` joined by an omega-shaped bulb of bend
// radius rho, with the bulb opening angle chosen so that the arms are `gap` apart.
struct Hairpin {
  DensityField df;
  FramedCurve fc;
};

inline Hairpin make_hairpin(double arm, double rho, double gap, int n) {
  auto build = [&](double alpha) {
    const double L = 2 * arm + rho * (kPi + 4 * alpha);
    DensityField df = DensityField::constant(L, n, 0, 0, 0);
    const double s1 = arm, s2 = arm + rho * alpha, s3 = s2 + rho * (kPi + 2 * alpha), s4 = s3 + rho * alpha;
    // Cell averages of the piecewise-constant curvature keep each arc's total turning exact
    // under linear interpolation, so the arms come out parallel.
    auto turning = [&](double s) {
      auto clip = [&](double lo, double hi) { return std::clamp(s, lo, hi) - lo; };
      return (-clip(s1, s2) + clip(s2, s3) - clip(s3, s4)) / rho;
    };
    const double h = df.spacing();
    for (int i = 0; i < n; ++i) {
      const double s = df.station(i);
      const double lo = std::max(0.0, s - 0.5 * h), hi = std::min(L, s + 0.5 * h);
      df.k1[i] = (turning(hi) - turning(lo)) / (hi - lo);
    }
    return Hairpin{df, integrate_frame(df, Placement{})};
  };
  double lo = 0.0, hi = 1.2;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Hairpin h = build(mid);
    const double g = h.fc.r.back().x() - h.fc.r.front().x();
    (g > gap ? lo : hi) = mid;
  }
  return build(0.5 * (lo + hi));
}

// Single ring whose tube's inner side is the unit circle.
inline TubeSet unit_disk_tube(double a) {
  const double R = 1.0 + a;
  return {Tube{integrate_frame(DensityField::constant(kTwoPi * R, 257, 1.0 / R, 0, 0), ring_placement(R)), {a, a}}};
}

inline TubeSet coaxial_rings(double R, double h, double a) {
  Placement lower = ring_placement(R), upper = ring_placement(R);
  lower.origin.z() = -h / 2;
  upper.origin.z() = h / 2;
  const auto df = DensityField::constant(kTwoPi * R, 257, 1.0 / R, 0, 0);
  return {Tube{integrate_frame(df, lower), {a, a}}, Tube{integrate_frame(df, upper), {a, a}}};
}

// Neck radius of the stable catenoid between coaxial rings of radius R a distance h apart: the
// larger root of c cosh(h / 2c) = R, by bisection above the turning point tanh(x) = 1 / x.
inline double catenoid_neck(double R, double h) {
  double lo = h / 2.399357, hi = R;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::cosh(h / (2 * mid)) < R ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Closed-form area of that catenoid with an arc length `trim` of the catenary cut off at both
// ends. A film meeting a tube at right angles lies on the catenoid through the midlines, trimmed
// by the tube radius.
inline double catenoid_area(double R, double h, double trim = 0.0) {
  const double c = catenoid_neck(R, h);
  const double z = c * std::asinh(std::sinh(h / (2 * c)) - trim / c);
  return kTwoPi * c * (z + (c / 2) * std::sinh(2 * z / c));
}

// Area of the regular m-gon inscribed in a circle of radius r.
inline double inscribed_polygon_area(int m, double r) { return 0.5 * m * r * r * std::sin(kTwoPi / m); }

}  // namespace kp::testing
