// Tetrahedral meshes: construction, boundary extraction, quality metrics, I/O.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace llg {

using Vec3 = Eigen::Vector3d;
using Tet = std::array<int, 4>;
using Tri = std::array<int, 3>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conforming tetrahedral partition of a bounded domain.
///
/// Every tet is stored with positive signed volume and every boundary face
/// with its normal pointing out of the domain. Immutable once built.
class TetMesh {
 public:
  TetMesh() = default;

  /// Validates orientation, conformity and boundary closure. Tets with
  /// negative orientation are rejected (not silently flipped). If
  /// `boundary` is empty it is regenerated from the connectivity.
  TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets,
          std::vector<Tri> boundary = {});

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<Tri>& boundary_faces() const { return boundary_; }
  const std::vector<double>& element_volumes() const { return volumes_; }

  std::size_t num_nodes() const { return vertices_.size(); }
  std::size_t num_elements() const { return tets_.size(); }
  double total_volume() const;

  Vec3 centroid(std::size_t element) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<Tri> boundary_;
  std::vector<double> volumes_;
};

/// Signed volume of the tetrahedron (a, b, c, d).
double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Structured box mesh: nx*ny*nz cells, each split into 6 tets sharing the
/// cell's main diagonal (Kuhn split), which is conforming without any
/// parity alternation between neighbouring cells.
TetMesh build_box_mesh(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi);

/// Closed, outward-oriented triangulated boundary surface.
struct SurfaceMesh {
  std::vector<Vec3> vertices;   // boundary-local numbering
  std::vector<Tri> triangles;   // boundary-local indices, outward orientation
  std::vector<Vec3> normals;    // unit outward normals, one per triangle
  std::vector<double> areas;
  std::vector<int> global_ids;  // boundary-local -> global node id
  std::vector<int> local_ids;   // global node id -> boundary-local id, or -1

  std::size_t num_nodes() const { return vertices.size(); }
  double total_area() const;
  /// Sum over triangles of area * normal; vanishes for a closed surface.
  Vec3 oriented_area_sum() const;
};

/// Builds a standalone surface mesh from vertices and triangles. Normals
/// follow the right-hand rule of each triangle's vertex order.
SurfaceMesh make_surface(std::vector<Vec3> vertices, std::vector<Tri> triangles);

/// Extracts the boundary of `mesh`. Throws MeshError for non-manifold input
/// (a face shared by more than two tets).
SurfaceMesh extract_boundary(const TetMesh& mesh);

struct MeshQuality {
  double h;      // max element diameter
  double ratio;  // max over K of diam(K) / |K|^{1/3}
};

MeshQuality mesh_quality(const TetMesh& mesh);

/// Plain-text `tetmesh v1` format; see README for the grammar.
void save_mesh(const TetMesh& mesh, const std::filesystem::path& path);
void save_mesh(const TetMesh& mesh, std::ostream& out);
TetMesh load_mesh(const std::filesystem::path& path);
TetMesh load_mesh(std::istream& in);

}  // namespace llg
