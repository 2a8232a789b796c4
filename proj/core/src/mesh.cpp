#include <kplateau/mesh.hpp>

#include <algorithm>
#include <map>
#include <utility>

namespace kp {

namespace {
const Attachment kFree{};
}

const Attachment& TriMesh::attachment(int v) const {
  return attach.empty() ? kFree : attach[v];
}

void TriMesh::validate() const {
  if (!attach.empty() && attach.size() != vertices.size()) {
    throw Error(ErrorKind::InvalidInput, "attachment count differs from vertex count");
  }
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= vertex_count()) {
        throw Error(ErrorKind::InvalidInput, "triangle references a missing vertex");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw Error(ErrorKind::InvalidInput, "triangle with repeated vertex");
    }
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (++uses[{std::min(a, b), std::max(a, b)}] > 2) {
        throw Error(ErrorKind::InvalidInput, "non-manifold edge");
      }
    }
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double l2 = (b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm();
  if (l2 <= 0.0) return 0.0;
  return 4.0 * std::sqrt(3.0) * triangle_area(a, b, c) / l2;
}

double area(const TriMesh& mesh) {
  double sum = 0.0;
  for (const auto& t : mesh.triangles) {
    sum += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  }
  return sum;
}

double min_quality(const TriMesh& mesh) {
  double q = 1.0;
  for (const auto& t : mesh.triangles) {
    q = std::min(q, triangle_quality(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
  }
  return q;
}

MeshCounts count_elements(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
  }
  MeshCounts c;
  c.vertices = mesh.vertex_count();
  c.faces = mesh.triangle_count();
  c.edges = static_cast<int>(uses.size());
  for (const auto& [e, n] : uses) {
    if (n == 1) ++c.boundary_edges;
  }
  return c;
}

}  // namespace kp
