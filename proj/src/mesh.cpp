#include "rtmix/mesh.hpp"

#include "rtmix/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace rtmix {
namespace {

double distance(const Point& a, const Point& b) { return (a - b).norm(); }

std::uint64_t face_key(std::array<int, 3> ids, int n) {
  std::sort(ids.begin(), ids.begin() + n);
  std::uint64_t key = 0;
  for (int k = 0; k < 3; ++k) {
    key = (key << 21) | static_cast<std::uint64_t>(k < n ? ids[k] + 1 : 0);
  }
  return key;
}

}  // namespace

CellGeometry simplex_geometry(const std::vector<Point>& vertices) {
  const int d = static_cast<int>(vertices.size()) - 1;
  if (d < 1 || d > 3) throw InvalidArgument("simplex_geometry: need 2..4 vertices");
  CellGeometry g;
  g.B.resize(d, d);
  g.b = vertices[0];
  for (int k = 0; k < d; ++k) g.B.col(k) = vertices[k + 1] - vertices[0];
  g.det_B = g.B.determinant();
  if (!(g.det_B > 0.0)) {
    throw MeshIntegrityError("degenerate or negatively oriented cell (det B = " +
                             std::to_string(g.det_B) + ")");
  }
  g.B_inv = g.B.inverse();
  return g;
}

SimplicialMesh::SimplicialMesh(int dim, std::vector<Point> vertices,
                               std::vector<std::array<int, 4>> cells)
    : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)) {
  if (dim_ != 2 && dim_ != 3) throw InvalidArgument("mesh dimension must be 2 or 3");
  for (const auto& v : vertices_) {
    if (v.size() != dim_) throw InvalidArgument("vertex coordinate size does not match dimension");
  }
  for (const auto& c : cells_) {
    for (int k = 0; k <= dim_; ++k) {
      if (c[k] < 0 || c[k] >= num_vertices()) throw MeshIntegrityError("cell vertex index out of range");
    }
  }
  build_geometry();
  build_faces();
}

void SimplicialMesh::build_geometry() {
  geometry_.reserve(cells_.size());
  diameters_.reserve(cells_.size());
  std::vector<Point> verts(dim_ + 1);
  for (int c = 0; c < num_cells(); ++c) {
    for (int k = 0; k <= dim_; ++k) verts[k] = vertices_[cells_[c][k]];
    geometry_.push_back(simplex_geometry(verts));
    double diam = 0.0;
    for (int a = 0; a <= dim_; ++a) {
      for (int b = a + 1; b <= dim_; ++b) diam = std::max(diam, distance(verts[a], verts[b]));
    }
    diameters_.push_back(diam);
    h_ = std::max(h_, diam);
  }
}

void SimplicialMesh::build_faces() {
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(cells_.size() * (dim_ + 1));
  cell_faces_.resize(cells_.size());

  for (int c = 0; c < num_cells(); ++c) {
    for (int i = 0; i <= dim_; ++i) {
      std::array<int, 3> ids{-1, -1, -1};
      int n = 0;
      for (int k = 0; k <= dim_; ++k) {
        if (k != i) ids[n++] = cells_[c][k];
      }
      const auto key = face_key(ids, dim_);
      auto [it, inserted] = lookup.try_emplace(key, num_faces());
      if (inserted) {
        Face f;
        std::sort(ids.begin(), ids.begin() + dim_);
        f.vertex_ids = ids;
        f.adjacent_cells = {c, -1};
        f.local_index = {i, -1};
        f.global_normal = outward_normal(c, i);
        double diam = 0.0;
        for (int a = 0; a < dim_; ++a) {
          for (int b = a + 1; b < dim_; ++b) {
            diam = std::max(diam, distance(vertices_[ids[a]], vertices_[ids[b]]));
          }
        }
        f.diameter = diam;
        if (dim_ == 2) {
          f.measure = diam;
        } else {
          const Eigen::Vector3d e1 = vertices_[ids[1]] - vertices_[ids[0]];
          const Eigen::Vector3d e2 = vertices_[ids[2]] - vertices_[ids[0]];
          f.measure = 0.5 * e1.cross(e2).norm();
        }
        faces_.push_back(f);
        cell_faces_[c][i] = {it->second, +1};
      } else {
        Face& f = faces_[it->second];
        if (f.adjacent_cells[1] != -1) {
          throw MeshIntegrityError("face shared by more than two cells");
        }
        f.adjacent_cells[1] = c;
        f.local_index[1] = i;
        cell_faces_[c][i] = {it->second, -1};
      }
    }
  }
  for (auto& f : faces_) f.is_boundary = (f.adjacent_cells[1] == -1);
}

int SimplicialMesh::num_boundary_faces() const {
  return static_cast<int>(std::count_if(faces_.begin(), faces_.end(),
                                        [](const Face& f) { return f.is_boundary; }));
}

double SimplicialMesh::cell_measure(int c) const {
  double fact = 1.0;
  for (int k = 2; k <= dim_; ++k) fact *= k;
  return geometry_[c].det_B / fact;
}

SmallVec SimplicialMesh::outward_normal(int c, int i) const {
  // grad(lambda_k) = B^{-T} e_{k-1} for k >= 1, grad(lambda_0) = -sum of the others.
  const SmallMat& Binv = geometry_[c].B_inv;
  SmallVec grad(dim_);
  if (i == 0) {
    grad = -Binv.colwise().sum().transpose();
  } else {
    grad = Binv.row(i - 1).transpose();
  }
  return -grad / grad.norm();
}

CellGeometry cell_geometry(const SimplicialMesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.num_cells()) throw InvalidArgument("cell index out of range");
  return mesh.geometry(cell);
}

SimplicialMesh build_unit_square_mesh(int M) {
  if (M < 1) throw InvalidArgument("build_unit_square_mesh: M must be >= 1");
  const int n = M + 1;
  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Point p(2);
      p << static_cast<double>(i) / M, static_cast<double>(j) / M;
      verts.push_back(p);
    }
  }
  std::vector<std::array<int, 4>> cells;
  cells.reserve(2 * static_cast<std::size_t>(M) * M);
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < M; ++i) {
      const int v0 = i + j * n;
      const int v1 = v0 + 1;
      const int v2 = v0 + n;
      const int v3 = v2 + 1;
      cells.push_back({v0, v1, v3, -1});
      cells.push_back({v0, v3, v2, -1});
    }
  }
  return SimplicialMesh(2, std::move(verts), std::move(cells));
}

SimplicialMesh build_unit_cube_mesh(int M) {
  if (M < 1) throw InvalidArgument("build_unit_cube_mesh: M must be >= 1");
  const int n = M + 1;
  auto index = [n](int i, int j, int k) { return i + n * (j + n * k); };
  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        Point p(3);
        p << static_cast<double>(i) / M, static_cast<double>(j) / M, static_cast<double>(k) / M;
        verts.push_back(p);
      }
    }
  }
  // Axis orderings of the monotone lattice paths from corner (0,0,0) to (1,1,1).
  constexpr std::array<std::array<int, 3>, 6> perms{{
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  constexpr std::array<bool, 6> odd{false, true, true, false, false, true};

  std::vector<std::array<int, 4>> cells;
  cells.reserve(6 * static_cast<std::size_t>(M) * M * M);
  for (int k = 0; k < M; ++k) {
    for (int j = 0; j < M; ++j) {
      for (int i = 0; i < M; ++i) {
        for (int p = 0; p < 6; ++p) {
          std::array<int, 3> pos{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = index(pos[0], pos[1], pos[2]);
          for (int s = 0; s < 3; ++s) {
            ++pos[perms[p][s]];
            tet[s + 1] = index(pos[0], pos[1], pos[2]);
          }
          if (odd[p]) std::swap(tet[2], tet[3]);
          cells.push_back(tet);
        }
      }
    }
  }
  return SimplicialMesh(3, std::move(verts), std::move(cells));
}

void write_vtk(const SimplicialMesh& mesh, const std::filesystem::path& path,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_data) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open VTK output file: " + path.string());
  out.precision(12);
  const int d = mesh.dim();
  out << "# vtk DataFile Version 2.0\nrtmix mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) {
    out << v[0] << ' ' << v[1] << ' ' << (d == 3 ? v[2] : 0.0) << '\n';
  }
  out << "CELLS " << mesh.num_cells() << ' ' << mesh.num_cells() * (d + 2) << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) {
    out << d + 1;
    for (int k = 0; k <= d; ++k) out << ' ' << mesh.cell(c)[k];
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) out << (d == 2 ? 5 : 10) << '\n';
  if (!cell_data.empty()) {
    out << "CELL_DATA " << mesh.num_cells() << '\n';
    for (const auto& [name, values] : cell_data) {
      if (static_cast<int>(values.size()) != mesh.num_cells()) {
        throw InvalidArgument("VTK cell field '" + name + "' has wrong length");
      }
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) out << v << '\n';
    }
  }
}

}  // namespace rtmix
