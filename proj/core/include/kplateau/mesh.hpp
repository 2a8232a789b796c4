#pragma once

#include <kplateau/types.hpp>

#include <array>
#include <vector>

namespace kp {

/// Tube coordinates of a film vertex that slides on a rod surface. rod < 0 marks a free vertex.
struct Attachment {
  int rod = -1;
  double s = 0.0;
  double theta = 0.0;

  bool attached() const { return rod >= 0; }
};

using Triangle = std::array<int, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Attachment> attach;  ///< empty, or one entry per vertex

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  bool empty() const { return triangles.empty(); }

  const Attachment& attachment(int v) const;
  bool is_attached(int v) const { return !attach.empty() && attach[v].attached(); }

  /// Throws InvalidInput if an index is out of range or an edge has more than two triangles.
  void validate() const;
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

/// 4 sqrt(3) A / (l0^2 + l1^2 + l2^2); 1 for equilateral, 0 for degenerate.
double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c);

double area(const TriMesh& mesh);
double min_quality(const TriMesh& mesh);

struct MeshCounts {
  int vertices = 0;
  int edges = 0;
  int faces = 0;
  int boundary_edges = 0;
  int euler() const { return vertices - edges + faces; }
};

MeshCounts count_elements(const TriMesh& mesh);

}  // namespace kp
