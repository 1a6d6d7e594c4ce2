#include "llg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

namespace llg {

namespace {

struct FaceKey {
  std::array<int, 3> v;
  bool operator==(const FaceKey&) const = default;
};

struct FaceKeyHash {
  std::size_t operator()(const FaceKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.v[0]);
    h = h * 1000003u ^ static_cast<std::size_t>(k.v[1]);
    h = h * 1000003u ^ static_cast<std::size_t>(k.v[2]);
    return h;
  }
};

FaceKey sorted_key(int a, int b, int c) {
  std::array<int, 3> v{a, b, c};
  std::sort(v.begin(), v.end());
  return {v};
}

struct FaceRecord {
  Tri face;
  int owner = -1;
  int count = 0;
};

// Local faces of a tet; the opposite vertex is the array index.
constexpr std::array<std::array<int, 3>, 4> kTetFaces{{
    {1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

std::unordered_map<FaceKey, FaceRecord, FaceKeyHash> collect_faces(
    const std::vector<Tet>& tets) {
  std::unordered_map<FaceKey, FaceRecord, FaceKeyHash> faces;
  faces.reserve(tets.size() * 3);
  for (std::size_t e = 0; e < tets.size(); ++e) {
    const Tet& t = tets[e];
    for (const auto& lf : kTetFaces) {
      const Tri f{t[lf[0]], t[lf[1]], t[lf[2]]};
      auto& rec = faces[sorted_key(f[0], f[1], f[2])];
      if (rec.count == 0) {
        rec.face = f;
        rec.owner = static_cast<int>(e);
      }
      ++rec.count;
    }
  }
  return faces;
}

Vec3 tri_centroid(const std::vector<Vec3>& x, const Tri& f) {
  return (x[f[0]] + x[f[1]] + x[f[2]]) / 3.0;
}

Vec3 tri_area_vector(const std::vector<Vec3>& x, const Tri& f) {
  return 0.5 * (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]);
}

// Orients `f` so that its normal points away from the centroid of `owner`.
Tri orient_outward(const std::vector<Vec3>& x, const Tet& owner, Tri f) {
  const Vec3 c_tet = (x[owner[0]] + x[owner[1]] + x[owner[2]] + x[owner[3]]) / 4.0;
  const Vec3 n = tri_area_vector(x, f);
  if (n.dot(c_tet - tri_centroid(x, f)) > 0.0) std::swap(f[1], f[2]);
  return f;
}

std::vector<Tri> boundary_from_connectivity(const std::vector<Vec3>& x,
                                            const std::vector<Tet>& tets) {
  auto faces = collect_faces(tets);
  std::vector<Tri> boundary;
  for (const auto& [key, rec] : faces) {
    if (rec.count > 2) {
      throw MeshError("non-manifold mesh: face (" + std::to_string(key.v[0]) + "," +
                      std::to_string(key.v[1]) + "," + std::to_string(key.v[2]) +
                      ") is shared by " + std::to_string(rec.count) + " tets");
    }
    if (rec.count == 1) boundary.push_back(orient_outward(x, tets[rec.owner], rec.face));
  }
  // Hash-map iteration order is unspecified; keep output deterministic.
  std::sort(boundary.begin(), boundary.end(), [](const Tri& a, const Tri& b) {
    return sorted_key(a[0], a[1], a[2]).v < sorted_key(b[0], b[1], b[2]).v;
  });
  return boundary;
}

}  // namespace

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets,
                 std::vector<Tri> boundary)
    : vertices_(std::move(vertices)), tets_(std::move(tets)) {
  if (vertices_.empty() || tets_.empty()) throw MeshError("mesh has no vertices or no tets");
  const int n = static_cast<int>(vertices_.size());
  volumes_.reserve(tets_.size());
  for (std::size_t e = 0; e < tets_.size(); ++e) {
    const Tet& t = tets_[e];
    for (int v : t) {
      if (v < 0 || v >= n) {
        throw MeshError("tet " + std::to_string(e) + " references vertex " +
                        std::to_string(v) + " out of range");
      }
    }
    const double vol =
        signed_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]], vertices_[t[3]]);
    if (!(vol > 0.0)) {
      throw MeshError("tet " + std::to_string(e) + " has non-positive signed volume");
    }
    volumes_.push_back(vol);
  }

  auto faces = collect_faces(tets_);
  std::size_t n_boundary = 0;
  for (const auto& [key, rec] : faces) {
    if (rec.count > 2) throw MeshError("non-manifold mesh: a face is shared by more than two tets");
    if (rec.count == 1) ++n_boundary;
  }

  if (boundary.empty()) {
    boundary_ = boundary_from_connectivity(vertices_, tets_);
  } else {
    if (boundary.size() != n_boundary) {
      throw MeshError("boundary section lists " + std::to_string(boundary.size()) +
                      " faces but the connectivity has " + std::to_string(n_boundary));
    }
    for (const Tri& f : boundary) {
      auto it = faces.find(sorted_key(f[0], f[1], f[2]));
      if (it == faces.end() || it->second.count != 1) {
        throw MeshError("boundary face is not a free face of the tet connectivity");
      }
      const Tri oriented = orient_outward(vertices_, tets_[it->second.owner], f);
      if (oriented != f) throw MeshError("boundary face is not oriented outward");
    }
    boundary_ = std::move(boundary);
  }

  Vec3 closure = Vec3::Zero();
  double area = 0.0;
  for (const Tri& f : boundary_) {
    const Vec3 a = tri_area_vector(vertices_, f);
    closure += a;
    area += a.norm();
  }
  if (closure.norm() > 1e-10 * area) throw MeshError("boundary surface is not closed");
}

double TetMesh::total_volume() const {
  double s = 0.0;
  for (double v : volumes_) s += v;
  return s;
}

Vec3 TetMesh::centroid(std::size_t element) const {
  const Tet& t = tets_[element];
  return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]] + vertices_[t[3]]) / 4.0;
}

TetMesh build_box_mesh(int nx, int ny, int nz, const Vec3& lo, const Vec3& hi) {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw MeshError("build_box_mesh: cell counts must be >= 1 (got " + std::to_string(nx) +
                    "x" + std::to_string(ny) + "x" + std::to_string(nz) + ")");
  }
  if (!(lo.array() < hi.array()).all()) {
    throw MeshError("build_box_mesh: lower corner must be strictly below upper corner");
  }
  const auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };

  std::vector<Vec3> x;
  x.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        x.emplace_back(lo.x() + (hi.x() - lo.x()) * i / nx, lo.y() + (hi.y() - lo.y()) * j / ny,
                       lo.z() + (hi.z() - lo.z()) * k / nz);

  // The 6 monotone lattice paths from corner 000 to 111, one per axis order.
  constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<Tet> tets;
  tets.reserve(static_cast<std::size_t>(6) * nx * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& perm : kPerms) {
          std::array<int, 3> c{i, j, k};
          Tet t{};
          t[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[perm[s]];
            t[s + 1] = id(c[0], c[1], c[2]);
          }
          if (signed_volume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]) < 0.0) std::swap(t[2], t[3]);
          tets.push_back(t);
        }
  return TetMesh(std::move(x), std::move(tets));
}

double SurfaceMesh::total_area() const {
  double s = 0.0;
  for (double a : areas) s += a;
  return s;
}

Vec3 SurfaceMesh::oriented_area_sum() const {
  Vec3 s = Vec3::Zero();
  for (std::size_t t = 0; t < triangles.size(); ++t) s += areas[t] * normals[t];
  return s;
}

SurfaceMesh make_surface(std::vector<Vec3> vertices, std::vector<Tri> triangles) {
  SurfaceMesh s;
  s.vertices = std::move(vertices);
  s.triangles = std::move(triangles);
  s.global_ids.resize(s.vertices.size());
  s.local_ids.resize(s.vertices.size());
  for (std::size_t i = 0; i < s.vertices.size(); ++i) {
    s.global_ids[i] = static_cast<int>(i);
    s.local_ids[i] = static_cast<int>(i);
  }
  for (const Tri& t : s.triangles) {
    const Vec3 a = tri_area_vector(s.vertices, t);
    const double area = a.norm();
    if (!(area > 0.0)) throw MeshError("degenerate surface triangle");
    s.areas.push_back(area);
    s.normals.push_back(a / area);
  }
  return s;
}

SurfaceMesh extract_boundary(const TetMesh& mesh) {
  const auto& x = mesh.vertices();
  SurfaceMesh s;
  s.local_ids.assign(mesh.num_nodes(), -1);
  for (const Tri& f : mesh.boundary_faces()) {
    Tri local{};
    for (int a = 0; a < 3; ++a) {
      int& lid = s.local_ids[f[a]];
      if (lid < 0) {
        lid = static_cast<int>(s.global_ids.size());
        s.global_ids.push_back(f[a]);
        s.vertices.push_back(x[f[a]]);
      }
      local[a] = lid;
    }
    const Vec3 av = tri_area_vector(x, f);
    const double area = av.norm();
    if (!(area > 0.0)) throw MeshError("degenerate boundary triangle");
    s.triangles.push_back(local);
    s.areas.push_back(area);
    s.normals.push_back(av / area);
  }
  return s;
}

MeshQuality mesh_quality(const TetMesh& mesh) {
  MeshQuality q{0.0, 0.0};
  const auto& x = mesh.vertices();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    double diam = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) diam = std::max(diam, (x[t[a]] - x[t[b]]).norm());
    q.h = std::max(q.h, diam);
    q.ratio = std::max(q.ratio, diam / std::cbrt(mesh.element_volumes()[e]));
  }
  return q;
}

// ---------------------------------------------------------------------------
// Text I/O

void save_mesh(const TetMesh& mesh, std::ostream& out) {
  out << "tetmesh v1\n";
  out << "vertices " << mesh.num_nodes() << '\n';
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  out << "tets " << mesh.num_elements() << '\n';
  for (const Tet& t : mesh.tets()) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "boundary " << mesh.boundary_faces().size() << '\n';
  for (const Tri& f : mesh.boundary_faces()) out << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_mesh(const TetMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path.string() + "' for writing");
  save_mesh(mesh, out);
  if (!out) throw MeshError("write to '" + path.string() + "' failed");
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line with comments stripped; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++lineno_;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }

  int lineno() const { return lineno_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw MeshError("mesh parse error at line " + std::to_string(lineno_) + ": " + what);
  }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

template <std::size_t N, typename T>
std::array<T, N> parse_fields(LineReader& r, const std::string& line, const char* what) {
  std::istringstream ss(line);
  std::array<T, N> out{};
  for (auto& v : out)
    if (!(ss >> v)) r.fail(std::string("expected ") + std::to_string(N) + " values for " + what);
  std::string extra;
  if (ss >> extra) r.fail(std::string("trailing data in ") + what + " record");
  return out;
}

std::size_t parse_header(LineReader& r, const std::string& expected, bool optional,
                         std::string& line, bool& have_line) {
  if (!have_line && !r.next(line)) {
    if (optional) return static_cast<std::size_t>(-1);
    r.fail("unexpected end of file: missing section '" + expected + "'");
  }
  have_line = false;
  std::istringstream ss(line);
  std::string name;
  long long count = -1;
  ss >> name >> count;
  if (name != expected) {
    if (optional) {
      have_line = true;
      return static_cast<std::size_t>(-1);
    }
    r.fail("expected section '" + expected + "', found '" + name + "'");
  }
  if (count < 0) r.fail("section '" + expected + "' needs a non-negative count");
  return static_cast<std::size_t>(count);
}

}  // namespace

TetMesh load_mesh(std::istream& in) {
  LineReader r(in);
  std::string line;
  if (!r.next(line)) r.fail("empty file: missing header 'tetmesh v1'");
  {
    std::istringstream ss(line);
    std::string a, b;
    ss >> a >> b;
    if (a != "tetmesh" || b != "v1") r.fail("bad header, expected 'tetmesh v1'");
  }
  bool have_line = false;

  const std::size_t nv = parse_header(r, "vertices", false, line, have_line);
  std::vector<Vec3> x;
  x.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in section 'vertices'");
    const auto v = parse_fields<3, double>(r, line, "vertex");
    x.emplace_back(v[0], v[1], v[2]);
  }

  const std::size_t nt = parse_header(r, "tets", false, line, have_line);
  std::vector<Tet> tets;
  tets.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in section 'tets'");
    tets.push_back(parse_fields<4, int>(r, line, "tet"));
  }

  std::vector<Tri> boundary;
  const std::size_t nb = parse_header(r, "boundary", true, line, have_line);
  if (nb != static_cast<std::size_t>(-1)) {
    boundary.reserve(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      if (!r.next(line)) r.fail("unexpected end of file in section 'boundary'");
      boundary.push_back(parse_fields<3, int>(r, line, "boundary face"));
    }
  }
  if (have_line || r.next(line)) r.fail("unexpected content after the last section");
  return TetMesh(std::move(x), std::move(tets), std::move(boundary));
}

TetMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path.string() + "'");
  return load_mesh(in);
}

}  // namespace llg
