#pragma once

#include "rtmix/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace rtmix {

/// A (d-1)-dimensional face of the triangulation.
///
/// The global normal points out of the lower-indexed adjacent cell, so on the
/// boundary it is the outward normal of the domain.
struct Face {
  std::array<int, 3> vertex_ids{-1, -1, -1};  ///< ascending global ids, first `dim` used
  std::array<int, 2> adjacent_cells{-1, -1};  ///< lower index first; [1] == -1 on the boundary
  std::array<int, 2> local_index{-1, -1};     ///< position of the face inside each adjacent cell
  SmallVec global_normal;
  double diameter = 0.0;  ///< h_F
  double measure = 0.0;   ///< |F|
  bool is_boundary = false;
};

/// Affine map x = B x_ref + b from the reference simplex onto a cell.
struct CellGeometry {
  SmallMat B;
  SmallVec b;
  SmallMat B_inv;
  double det_B = 0.0;

  int dim() const { return static_cast<int>(b.size()); }
  Point map(const Point& ref) const { return B * ref + b; }
  Point pullback(const Point& x) const { return B_inv * (x - b); }
};

/// Per-cell reference to a face together with its orientation relative to
/// the face's global normal.
struct CellFace {
  int face = -1;
  int sign = +1;
};

/// Conforming simplicial triangulation with full face connectivity.
/// Immutable once built.
class SimplicialMesh {
 public:
  SimplicialMesh(int dim, std::vector<Point> vertices, std::vector<std::array<int, 4>> cells);

  int dim() const { return dim_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_boundary_faces() const;

  const Point& vertex(int i) const { return vertices_[i]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  /// Vertex ids of a cell; the first dim+1 entries are used.
  const std::array<int, 4>& cell(int c) const { return cells_[c]; }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<Face>& faces() const { return faces_; }
  /// Local face i is the face opposite local vertex i.
  const CellFace& cell_face(int c, int i) const { return cell_faces_[c][i]; }

  const CellGeometry& geometry(int c) const { return geometry_[c]; }
  double cell_measure(int c) const;
  double cell_diameter(int c) const { return diameters_[c]; }
  /// Outward unit normal of local face i of cell c.
  SmallVec outward_normal(int c, int i) const;
  double h() const { return h_; }

 private:
  void build_geometry();
  void build_faces();

  int dim_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 4>> cells_;
  std::vector<Face> faces_;
  std::vector<std::array<CellFace, 4>> cell_faces_;
  std::vector<CellGeometry> geometry_;
  std::vector<double> diameters_;
  double h_ = 0.0;
};

/// Uniform triangulation of the unit square with (M+1)^2 vertices; every grid
/// square is split along its lower-left to upper-right diagonal.
SimplicialMesh build_unit_square_mesh(int M);

/// Uniform Kuhn triangulation of the unit cube with (M+1)^3 vertices; six
/// tetrahedra per subcube, all sharing the main diagonal.
SimplicialMesh build_unit_cube_mesh(int M);

/// Affine geometry of a cell; throws MeshIntegrityError for degenerate cells.
CellGeometry cell_geometry(const SimplicialMesh& mesh, int cell);

/// Affine geometry for an arbitrary simplex given by its d+1 vertices.
CellGeometry simplex_geometry(const std::vector<Point>& vertices);

/// Legacy VTK ASCII unstructured grid, with optional per-cell scalar fields.
void write_vtk(const SimplicialMesh& mesh, const std::filesystem::path& path,
               const std::vector<std::pair<std::string, std::vector<double>>>& cell_data = {});

}  // namespace rtmix
