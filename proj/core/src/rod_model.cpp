#include <kplateau/mesh.hpp>
#include <kplateau/rod_model.hpp>

#include <algorithm>
#include <cmath>

namespace kp {

void CrossSection::validate(double rod_length, double slender_ratio) const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorKind::InvalidInput, "radius must be positive");
  }
  if (!(max_thickness >= radius)) {
    throw Error(ErrorKind::InvalidInput, "radius exceeds max_thickness");
  }
  if (rod_length > 0.0 && max_thickness > slender_ratio * rod_length) {
    throw Error(ErrorKind::InvalidInput, "max_thickness too large for rod length");
  }
}

DensityField DensityField::constant(double length, int n, double k1, double k2, double omega) {
  DensityField df;
  df.length = length;
  df.k1.assign(n, k1);
  df.k2.assign(n, k2);
  df.omega.assign(n, omega);
  return df;
}

Vec3 DensityField::at(double s) const {
  const int n = size();
  const double h = spacing();
  const double x = std::clamp(s, 0.0, length) / h;
  const int i = std::min(static_cast<int>(x), n - 2);
  const double t = x - i;
  return {(1 - t) * k1[i] + t * k1[i + 1], (1 - t) * k2[i] + t * k2[i + 1],
          (1 - t) * omega[i] + t * omega[i + 1]};
}

void DensityField::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorKind::InvalidInput, "rod length must be positive");
  }
  if (k1.size() < 8 || k2.size() != k1.size() || omega.size() != k1.size()) {
    throw Error(ErrorKind::InvalidInput, "density field needs >= 8 nodes in every component");
  }
  for (std::size_t i = 0; i < k1.size(); ++i) {
    if (!std::isfinite(k1[i]) || !std::isfinite(k2[i]) || !std::isfinite(omega[i])) {
      throw Error(ErrorKind::InvalidInput, "non-finite density sample");
    }
  }
}

DensityField resample(const DensityField& df, int n2) {
  df.validate();
  if (n2 < 8) throw Error(ErrorKind::InvalidInput, "resample needs n2 >= 8");
  if (n2 == df.size()) return df;
  DensityField out;
  out.length = df.length;
  out.k1.resize(n2);
  out.k2.resize(n2);
  out.omega.resize(n2);
  const double h2 = df.length / (n2 - 1);
  for (int i = 0; i < n2; ++i) {
    const Vec3 k = df.at(i * h2);
    out.k1[i] = k[0];
    out.k2[i] = k[1];
    out.omega[i] = k[2];
  }
  return out;
}

Frame Frame::from_uv(const Vec3& u, const Vec3& v) { return {u, v, u.cross(v)}; }

double Frame::orthonormality_defect() const {
  const Mat3 m = matrix();
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 Frame::matrix() const {
  Mat3 m;
  m.col(0) = u;
  m.col(1) = v;
  m.col(2) = w;
  return m;
}

Frame Frame::from_matrix(const Mat3& m) { return {m.col(0), m.col(1), m.col(2)}; }

void Placement::validate() const {
  if (!origin.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite placement origin");
  if (!(frame.orthonormality_defect() < 1e-9) || (frame.u.cross(frame.v) - frame.w).norm() >= 1e-9) {
    throw Error(ErrorKind::InvalidInput, "placement frame is not right-handed orthonormal");
  }
}

namespace {

struct RodState {
  Vec3 r, u, v, w;
};

// Darboux vector -k'' u + k' v + omega w, giving w' = k' u + k'' v and u'.v = omega.
RodState rate(const RodState& y, const Vec3& k) {
  const Vec3 omega = -k[1] * y.u + k[0] * y.v + k[2] * y.w;
  return {y.w, omega.cross(y.u), omega.cross(y.v), omega.cross(y.w)};
}

RodState axpy(const RodState& y, double a, const RodState& d) {
  return {y.r + a * d.r, y.u + a * d.u, y.v + a * d.v, y.w + a * d.w};
}

void orthonormalize(RodState& y) {
  y.w.normalize();
  y.u = (y.u - y.u.dot(y.w) * y.w).normalized();
  y.v = y.w.cross(y.u);
}

// One RK4 step of length h with densities linear between ka (start) and kb (at distance span).
RodState rk4_step(const RodState& y, const Vec3& ka, const Vec3& kb, double h, double span = -1.0) {
  if (span <= 0.0) span = h;
  const Vec3 k0 = ka;
  const Vec3 k1 = ka + (0.5 * h / span) * (kb - ka);
  const Vec3 k2 = ka + (h / span) * (kb - ka);
  const RodState d1 = rate(y, k0);
  const RodState d2 = rate(axpy(y, 0.5 * h, d1), k1);
  const RodState d3 = rate(axpy(y, 0.5 * h, d2), k1);
  const RodState d4 = rate(axpy(y, h, d3), k2);
  RodState out = y;
  out.r += h / 6.0 * (d1.r + 2 * d2.r + 2 * d3.r + d4.r);
  out.u += h / 6.0 * (d1.u + 2 * d2.u + 2 * d3.u + d4.u);
  out.v += h / 6.0 * (d1.v + 2 * d2.v + 2 * d3.v + d4.v);
  out.w += h / 6.0 * (d1.w + 2 * d2.w + 2 * d3.w + d4.w);
  orthonormalize(out);
  return out;
}

}  // namespace

FramedCurve integrate_frame(const DensityField& df, const Placement& pl) {
  df.validate();
  pl.validate();
  const int n = df.size();
  const double h = df.spacing();

  FramedCurve fc;
  fc.h = h;
  fc.r.resize(n);
  fc.frames.resize(n);

  fc.densities.resize(n);
  for (int i = 0; i < n; ++i) fc.densities[i] = Vec3(df.k1[i], df.k2[i], df.omega[i]);

  RodState y{pl.origin, pl.frame.u, pl.frame.v, pl.frame.w};
  fc.r[0] = y.r;
  fc.frames[0] = {y.u, y.v, y.w};
  for (int i = 0; i + 1 < n; ++i) {
    y = rk4_step(y, fc.densities[i], fc.densities[i + 1], h);
    fc.r[i + 1] = y.r;
    fc.frames[i + 1] = {y.u, y.v, y.w};
  }
  return fc;
}

ClosureResidual closure_residual(const FramedCurve& fc) {
  return {(fc.r.back() - fc.r.front()).norm(), (fc.frames.back().w - fc.frames.front().w).norm()};
}

namespace {

// Segment index and local parameter for arc length s.
std::pair<int, double> locate(const FramedCurve& fc, double s) {
  const int n = fc.size();
  const double x = std::clamp(s, 0.0, fc.length()) / fc.h;
  const int i = std::min(static_cast<int>(x), n - 2);
  return {i, x - i};
}

}  // namespace

void FramedCurve::evaluate(double s, Vec3& point, Frame& frame) const {
  const auto [i, t] = locate(*this, s);
  if (t == 0.0) {
    point = r[i];
    frame = frames[i];
    return;
  }
  if (densities.size() == r.size()) {
    const RodState y0{r[i], frames[i].u, frames[i].v, frames[i].w};
    const RodState y = rk4_step(y0, densities[i], densities[i + 1], t * h, h);
    point = y.r;
    frame = {y.u, y.v, y.w};
    return;
  }
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  point = h00 * r[i] + h10 * h * frames[i].w + h01 * r[i + 1] + h11 * h * frames[i + 1].w;
  const Eigen::Quaterniond q0(frames[i].matrix());
  const Eigen::Quaterniond q1(frames[i + 1].matrix());
  frame = Frame::from_matrix(q0.slerp(t, q1).normalized().toRotationMatrix());
}

Vec3 FramedCurve::midline_at(double s) const {
  Vec3 p;
  Frame f;
  evaluate(s, p, f);
  return p;
}

Frame FramedCurve::frame_at(double s) const {
  Vec3 p;
  Frame f;
  evaluate(s, p, f);
  return f;
}

Vec3 tube_point(const FramedCurve& fc, const CrossSection& cs, double s, double z1, double z2) {
  if (!(s >= -1e-12 * fc.length() && s <= fc.length() * (1 + 1e-12))) {
    throw Error(ErrorKind::InvalidInput, "arc length outside [0, L]");
  }
  if (z1 * z1 + z2 * z2 > cs.radius * cs.radius * (1 + 1e-12)) {
    throw Error(ErrorKind::OutOfSection, "section coordinates outside the disk");
  }
  Vec3 p;
  Frame f;
  fc.evaluate(s, p, f);
  return p + z1 * f.u + z2 * f.v;
}

namespace {

// Polar angle of u(L) in the frame at s = 0.
double seam_angle(const FramedCurve& fc) {
  const Frame& f0 = fc.frames.front();
  const Vec3& uL = fc.frames.back().u;
  return std::atan2(uL.dot(f0.v), uL.dot(f0.u));
}

}  // namespace

double Tube::wrap(double s) const {
  const double L = length();
  double x = std::fmod(s, L);
  if (x < 0) x += L;
  return x;
}

double Tube::seam_angle() const { return kp::seam_angle(curve); }

void Tube::normalize(double& s, double& theta) const {
  const double L = length();
  const double turns = std::floor(s / L);
  s -= turns * L;
  if (s >= L) s = 0.0;
  theta += turns * seam_angle();
  theta = std::remainder(theta, kTwoPi);
}

Vec3 Tube::surface_point(double s, double theta) const {
  const double L = length();
  const double turns = std::floor(s / L);
  const double sw = s - turns * L;
  // Crossing the seam rotates the angle by the frame mismatch so the surface stays continuous.
  const double th = theta + turns * seam_angle();
  Vec3 p;
  Frame f;
  curve.evaluate(sw, p, f);
  return p + section.radius * (std::cos(th) * f.u + std::sin(th) * f.v);
}

void Tube::surface_tangents(double s, double theta, Vec3& ds, Vec3& dtheta) const {
  const double eps = 1e-6 * length();
  ds = (surface_point(s + eps, theta) - surface_point(s - eps, theta)) / (2 * eps);
  const double sw = wrap(s);
  const double th = theta + std::floor(s / length()) * seam_angle();
  const Frame f = curve.frame_at(sw);
  dtheta = section.radius * (-std::sin(th) * f.u + std::cos(th) * f.v);
}

double Tube::angle_towards(double s, const Vec3& d) const {
  const Frame f = curve.frame_at(wrap(s));
  return std::atan2(d.dot(f.v), d.dot(f.u));
}

std::vector<Vec3> closed_midline(const FramedCurve& fc) {
  return {fc.r.begin(), fc.r.end() - 1};
}

TriMesh tube_mesh(const FramedCurve& fc, const CrossSection& cs, int m, double closure_tolerance) {
  if (m < 8) throw Error(ErrorKind::InvalidInput, "tube_mesh needs m >= 8");
  const double L = fc.length();
  const double tol_pos = closure_tolerance >= 0 ? closure_tolerance : 1e-4 * L;
  const double tol_tan = closure_tolerance >= 0 ? closure_tolerance / L : 1e-4;
  const ClosureResidual res = closure_residual(fc);
  if (res.position > tol_pos || res.tangent > tol_tan) {
    throw Error(ErrorKind::NotClosed, "tube_mesh requires a closed midline");
  }
  const int rings = fc.size() - 1;
  const double dtheta = kTwoPi / m;
  const int shift = static_cast<int>(std::lround(seam_angle(fc) / dtheta));

  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(rings) * m);
  for (int i = 0; i < rings; ++i) {
    const Frame& f = fc.frames[i];
    for (int j = 0; j < m; ++j) {
      const double th = j * dtheta;
      mesh.vertices.push_back(fc.r[i] + cs.radius * (std::cos(th) * f.u + std::sin(th) * f.v));
    }
  }
  auto idx = [m](int i, int j) { return i * m + ((j % m) + m) % m; };
  for (int i = 0; i < rings; ++i) {
    const int next = (i + 1) % rings;
    const int off = (next == 0) ? shift : 0;
    for (int j = 0; j < m; ++j) {
      const int a = idx(i, j), b = idx(i, j + 1);
      const int c = idx(next, j + off), d = idx(next, j + 1 + off);
      mesh.triangles.push_back({a, b, d});
      mesh.triangles.push_back({a, d, c});
    }
  }
  return mesh;
}

double RodSpec::mass() const {
  if (rho_nodes.empty()) return rho * density.length;
  const double h = density.spacing();
  double m = 0.0;
  for (std::size_t i = 0; i < rho_nodes.size(); ++i) {
    m += (i == 0 || i + 1 == rho_nodes.size() ? 0.5 : 1.0) * h * rho_nodes[i];
  }
  return m;
}

void RodSpec::validate() const {
  density.validate();
  placement.validate();
  section.validate(density.length);
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::InvalidInput, "mass density must be positive");
  if (!rho_nodes.empty()) {
    if (static_cast<int>(rho_nodes.size()) != density.size()) {
      throw Error(ErrorKind::InvalidInput, "per-node mass density has wrong length");
    }
    for (double r : rho_nodes) {
      if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidInput, "mass density must be positive");
    }
  }
}

void LinkConfig::validate() const {
  if (rods.empty() || rods.size() > 2) throw Error(ErrorKind::InvalidInput, "a link has one or two rods");
  if (!gravity.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite gravity");
  for (const auto& rod : rods) rod.validate();
}

std::vector<FramedCurve> LinkConfig::realize() const {
  std::vector<FramedCurve> out;
  out.reserve(rods.size());
  for (const auto& rod : rods) out.push_back(integrate_frame(rod.density, rod.placement));
  return out;
}

TubeSet LinkConfig::tubes() const {
  TubeSet out;
  out.reserve(rods.size());
  for (const auto& rod : rods) out.push_back(Tube{integrate_frame(rod.density, rod.placement), rod.section});
  return out;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::OutOfSection: return "OutOfSection";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::CurvesTouch: return "CurvesTouch";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::OffsetTooLarge: return "OffsetTooLarge";
    case ErrorKind::ProbeConstructionFailed: return "ProbeConstructionFailed";
    case ErrorKind::ResolutionError: return "ResolutionError";
    case ErrorKind::GradientUndefined: return "GradientUndefined";
    case ErrorKind::InitFailed: return "InitFailed";
    case ErrorKind::DegenerateMesh: return "DegenerateMesh";
    case ErrorKind::CertificateLost: return "CertificateLost";
    case ErrorKind::InitInadmissible: return "InitInadmissible";
    case ErrorKind::InvariantBroken: return "InvariantBroken";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace kp
