#include <kplateau/scenario.hpp>

namespace kp {

namespace {

// Circle of radius R in the xy-plane, starting at (R, 0, 0) and heading +y.
RodConfig planar_ring(int nodes, double radius, double R = 1.0) {
  RodConfig r;
  r.model.density = DensityField::constant(kTwoPi * R, nodes, 1.0 / R, 0.0, 0.0);
  r.model.placement.origin = Vec3(R, 0, 0);
  r.model.placement.frame = Frame::from_uv(Vec3(-1, 0, 0), Vec3(0, 0, 1));
  r.model.section = CrossSection{radius, radius};
  return r;
}

// Unit circle in the xz-plane through the center of the first ring, linked with it once.
RodConfig threaded_ring(int nodes, double radius) {
  RodConfig r = planar_ring(nodes, radius);
  r.model.placement.origin = Vec3(2, 0, 0);
  r.model.placement.frame = Frame::from_uv(Vec3(-1, 0, 0), Vec3(0, 1, 0));
  return r;
}

}  // namespace

std::vector<std::string> preset_names() { return {"ring", "hopf", "clamped-plus-free"}; }

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  c.name = std::string(name);
  if (name == "ring") {
    // The film rim rides on the inner side of the tube, so a midline radius of 1 + a leaves
    // an opening of radius 1 and a relaxed film of area pi.
    c.rods.push_back(planar_ring(257, 0.01, 1.01));
    c.sigma = 1.0;
    c.solver.film.boundary_points = 128;
  } else if (name == "hopf") {
    c.rods.push_back(planar_ring(257, 0.05));
    c.rods.push_back(threaded_ring(257, 0.05));
    c.sigma = 1.0;
  } else if (name == "clamped-plus-free") {
    c.rods.push_back(planar_ring(257, 0.05));
    c.rods.push_back(threaded_ring(257, 0.05));
    c.rods[0].shape_free = false;
    c.rods[1].model.rho = 0.05;
    c.gravity = Vec3(0, 0, -1);
    c.sigma = 0.1;
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::Config, "unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  c.validate();
  return c;
}

}  // namespace kp
