#include <kplateau/energy.hpp>
#include <kplateau/parallel.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <string>

namespace kp {

void ElasticDensity::validate() const {
  if (!(a1 > 0.0) || !(a2 > 0.0) || !(a3 > 0.0) || !std::isfinite(a1 + a2 + a3)) {
    throw Error(ErrorKind::InvalidInput, "stiffness coefficients must be positive");
  }
  if (!(barrier_eps >= 0.0 && barrier_eps <= 0.2)) {
    throw Error(ErrorKind::InvalidInput, "barrier_eps must lie in [0, 0.2]");
  }
}

double ElasticDensity::operator()(double k1, double k2, double omega, double radius) const {
  const double g2 = radius * radius * (k1 * k1 + k2 * k2);
  if (!(g2 < 1.0)) return kInfiniteEnergy;
  const double quad = 0.5 * (a1 * k1 * k1 + a2 * k2 * k2 + a3 * omega * omega);
  return quad + barrier_eps * a1 * g2 / (1.0 - g2);
}

double ElasticDensity::coercivity() const { return 0.5 * std::min({a1, a2, a3}); }

double elastic_energy(const DensityField& df, const ElasticDensity& ed, const CrossSection& cs) {
  const int n = df.size();
  const double h = df.spacing();
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = ed(df.k1[i], df.k2[i], df.omega[i], cs.radius);
    if (!std::isfinite(f)) return kInfiniteEnergy;
    e += (i == 0 || i == n - 1 ? 0.5 : 1.0) * f;
  }
  return e * h;
}

double gravity_energy(const FramedCurve& fc, double rho, const Vec3& g) {
  const int n = fc.size();
  double e = 0.0;
  for (int i = 0; i < n; ++i) e += (i == 0 || i == n - 1 ? 0.5 : 1.0) * g.dot(fc.r[i]);
  return -rho * fc.h * e;
}

double gravity_energy(const FramedCurve& fc, const RodSpec& rod, const Vec3& g) {
  if (rod.rho_nodes.empty()) return gravity_energy(fc, rod.rho, g);
  const int n = fc.size();
  double e = 0.0;
  for (int i = 0; i < n; ++i) e += (i == 0 || i == n - 1 ? 0.5 : 1.0) * rod.rho_nodes[i] * g.dot(fc.r[i]);
  return -fc.h * e;
}

double film_energy(const TriMesh& mesh, double sigma) { return 2.0 * sigma * area(mesh); }

EnergyReport total_energy(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2,
                          const TriMesh& mesh, double sigma) {
  EnergyReport rep;
  rep.sigma = sigma;
  const auto curves = link.realize();
  for (int r = 0; r < link.rod_count(); ++r) {
    const RodSpec& rod = link.rods[r];
    const ElasticDensity& ed = r == 0 ? ed1 : ed2;
    const double el = elastic_energy(rod.density, ed, rod.section);
    const double gr = gravity_energy(curves[r], rod, link.gravity);
    (r == 0 ? rep.e_el1 : rep.e_el2) = el;
    (r == 0 ? rep.e_g1 : rep.e_g2) = gr;
    if (ed.barrier_eps > 0.0) {
      for (int i = 0; i < rod.density.size(); ++i) {
        const double k = std::hypot(rod.density.k1[i], rod.density.k2[i]);
        if (k > 0.0) rep.barrier_active = true;
      }
    }
    if (!std::isfinite(el)) rep.barrier_active = true;
  }
  rep.e_film = film_energy(mesh, sigma);
  rep.e_total = rep.e_el1 + rep.e_el2 + rep.e_g1 + rep.e_g2 + rep.e_film;
  return rep;
}

double loop_energy(const LinkConfig& link, const ElasticDensity& ed1, const ElasticDensity& ed2) {
  double e = 0.0;
  for (int r = 0; r < link.rod_count(); ++r) {
    const RodSpec& rod = link.rods[r];
    e += elastic_energy(rod.density, r == 0 ? ed1 : ed2, rod.section);
    if (!std::isfinite(e)) return kInfiniteEnergy;
    if (link.gravity.squaredNorm() > 0.0) {
      e += gravity_energy(integrate_frame(rod.density, rod.placement), rod, link.gravity);
    }
  }
  return e;
}

int ParameterMap::shape_size(int rod) const {
  if (rod >= base.rod_count() || !shape_free[rod]) return 0;
  return 3 * coefficients_per_field();
}

int ParameterMap::shape_offset(int rod) const { return rod == 0 ? 0 : shape_size(0); }

int ParameterMap::placement_offset() const { return shape_size(0) + shape_size(1); }

int ParameterMap::size() const { return placement_offset() + (has_placement() ? 6 : 0); }

double ParameterMap::basis(int j, double s, double length) const {
  if (j == 0) return 1.0;
  const int k = (j + 1) / 2;
  const double phase = kTwoPi * k * s / length;
  return (j % 2 == 1) ? std::cos(phase) : std::sin(phase);
}

LinkConfig ParameterMap::apply(const VecX& x) const {
  if (x.size() != size()) throw Error(ErrorKind::InvalidInput, "parameter vector has wrong size");
  LinkConfig link = base;
  const int nc = coefficients_per_field();
  for (int r = 0; r < link.rod_count(); ++r) {
    if (shape_size(r) == 0) continue;
    DensityField& df = link.rods[r].density;
    const int off = shape_offset(r);
    for (int i = 0; i < df.size(); ++i) {
      const double s = df.station(i);
      double d[3] = {0.0, 0.0, 0.0};
      for (int j = 0; j < nc; ++j) {
        const double b = basis(j, s, df.length);
        for (int f = 0; f < 3; ++f) d[f] += x[off + f * nc + j] * b;
      }
      df.k1[i] += d[0];
      df.k2[i] += d[1];
      df.omega[i] += d[2];
    }
  }
  if (has_placement()) {
    const int off = placement_offset();
    Placement& pl = link.rods[1].placement;
    pl.origin += x.segment<3>(off);
    const Vec3 rv = x.segment<3>(off + 3);
    const double angle = rv.norm();
    if (angle > 0.0) {
      const Mat3 R = Eigen::AngleAxisd(angle, rv / angle).toRotationMatrix();
      pl.frame = Frame::from_matrix(R * pl.frame.matrix());
    }
  }
  return link;
}

VecX finite_difference_gradient(const std::function<double(const VecX&)>& f, const VecX& x, double rel_step) {
  const int n = static_cast<int>(x.size());
  VecX grad(n);
  std::vector<int> bad(n, 0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t idx) {
    const int i = static_cast<int>(idx);
    const double step = rel_step * std::max(1.0, std::abs(x[i]));
    VecX xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fp = f(xp), fm = f(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      bad[i] = 1;
      grad[i] = 0.0;
      return;
    }
    grad[i] = (fp - fm) / (2.0 * step);
  });
  for (int i = 0; i < n; ++i) {
    if (bad[i]) throw Error(ErrorKind::GradientUndefined, "non-finite energy in stencil of parameter " + std::to_string(i));
  }
  return grad;
}

VecX loop_energy_gradient(const ParameterMap& map, const ElasticDensity& ed1, const ElasticDensity& ed2,
                          const VecX& x, const std::function<double(const LinkConfig&)>& extra) {
  return finite_difference_gradient(
      [&](const VecX& p) {
        const LinkConfig link = map.apply(p);
        double e = loop_energy(link, ed1, ed2);
        if (extra && std::isfinite(e)) e += extra(link);
        return e;
      },
      x);
}

}  // namespace kp
