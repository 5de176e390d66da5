#include "rtmix/errors.hpp"
#include "rtmix/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace rtmix;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

void expect_connectivity_consistent(const SimplicialMesh& mesh) {
  const int d = mesh.dim();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    EXPECT_GT(mesh.geometry(c).det_B, 0.0);
    for (int i = 0; i <= d; ++i) {
      const CellFace& cf = mesh.cell_face(c, i);
      const Face& f = mesh.face(cf.face);
      // the face is opposite local vertex i
      const int vi = mesh.cell(c)[i];
      for (int k = 0; k < d; ++k) EXPECT_NE(f.vertex_ids[k], vi);
      const SmallVec n = mesh.outward_normal(c, i);
      EXPECT_NEAR(n.norm(), 1.0, 1e-14);
      EXPECT_NEAR((n - cf.sign * f.global_normal).norm(), 0.0, 1e-14);
      // outward: points away from the opposite vertex
      EXPECT_GT(n.dot(mesh.vertex(f.vertex_ids[0]) - mesh.vertex(vi)), 0.0);
    }
  }
  for (int fi = 0; fi < mesh.num_faces(); ++fi) {
    const Face& f = mesh.face(fi);
    if (f.is_boundary) {
      EXPECT_EQ(f.adjacent_cells[1], -1);
      EXPECT_EQ(mesh.cell_face(f.adjacent_cells[0], f.local_index[0]).sign, 1);
      continue;
    }
    EXPECT_LT(f.adjacent_cells[0], f.adjacent_cells[1]);
    const int s0 = mesh.cell_face(f.adjacent_cells[0], f.local_index[0]).sign;
    const int s1 = mesh.cell_face(f.adjacent_cells[1], f.local_index[1]).sign;
    EXPECT_EQ(s0, 1);
    EXPECT_EQ(s1, -1);
  }
}

}  // namespace

TEST(Mesh, SquareCountsM8) {
  const auto mesh = build_unit_square_mesh(8);
  EXPECT_EQ(mesh.num_vertices(), 81);
  EXPECT_EQ(mesh.num_cells(), 128);
  EXPECT_EQ(mesh.num_faces(), 208);
  EXPECT_EQ(mesh.num_boundary_faces(), 32);
  EXPECT_NEAR(mesh.h(), std::sqrt(2.0) / 8, 1e-15);
  EXPECT_NEAR(std::abs(mesh.geometry(0).det_B), 1.0 / 64, 1e-16);
}

TEST(Mesh, SquareCountsM1) {
  const auto mesh = build_unit_square_mesh(1);
  EXPECT_EQ(mesh.num_vertices(), 4);
  EXPECT_EQ(mesh.num_cells(), 2);
  EXPECT_EQ(mesh.num_faces(), 5);
}

TEST(Mesh, CubeCounts) {
  const auto m1 = build_unit_cube_mesh(1);
  EXPECT_EQ(m1.num_vertices(), 8);
  EXPECT_EQ(m1.num_cells(), 6);
  EXPECT_EQ(m1.num_faces(), 18);
  EXPECT_EQ(m1.num_boundary_faces(), 12);
  const auto m2 = build_unit_cube_mesh(2);
  EXPECT_EQ(m2.num_vertices(), 27);
  EXPECT_EQ(m2.num_cells(), 48);
  EXPECT_NEAR(m2.h(), std::sqrt(3.0) / 2, 1e-15);
}

TEST(Mesh, EulerCharacteristicAndFaceCounts) {
  for (int M : {1, 2, 3, 5, 8}) {
    const auto mesh = build_unit_square_mesh(M);
    // V - E + F = 1 for a disk
    EXPECT_EQ(mesh.num_vertices() - mesh.num_faces() + mesh.num_cells(), 1);
    EXPECT_EQ(mesh.num_boundary_faces(), 4 * M);
    // every cell has d+1 faces; interior faces counted twice
    EXPECT_EQ(3 * mesh.num_cells(), 2 * mesh.num_faces() - mesh.num_boundary_faces());
  }
  for (int M : {1, 2, 3}) {
    const auto mesh = build_unit_cube_mesh(M);
    EXPECT_EQ(4 * mesh.num_cells(), 2 * mesh.num_faces() - mesh.num_boundary_faces());
    EXPECT_EQ(mesh.num_boundary_faces(), 12 * M * M);
  }
}

TEST(Mesh, MeasuresSumToOne) {
  for (int M : {1, 3, 7}) {
    const auto sq = build_unit_square_mesh(M);
    double area = 0.0;
    for (int c = 0; c < sq.num_cells(); ++c) area += sq.cell_measure(c);
    EXPECT_NEAR(area, 1.0, 1e-13);
    const auto cube = build_unit_cube_mesh(M);
    double vol = 0.0;
    for (int c = 0; c < cube.num_cells(); ++c) vol += cube.cell_measure(c);
    EXPECT_NEAR(vol, 1.0, 1e-13);
  }
}

TEST(Mesh, ConnectivityAndOrientation) {
  expect_connectivity_consistent(build_unit_square_mesh(4));
  expect_connectivity_consistent(build_unit_cube_mesh(2));
}

TEST(Mesh, BoundaryNormalsAreAxisAligned) {
  const auto mesh = build_unit_cube_mesh(2);
  for (const Face& f : mesh.faces()) {
    if (!f.is_boundary) continue;
    EXPECT_NEAR(f.global_normal.cwiseAbs().maxCoeff(), 1.0, 1e-14);
    // outward: the face centroid plus the normal leaves the unit cube
    Point c = Point::Zero(3);
    for (int k = 0; k < 3; ++k) c += mesh.vertex(f.vertex_ids[k]) / 3.0;
    const Point out = c + 0.1 * f.global_normal;
    EXPECT_TRUE(out.minCoeff() < 0.0 || out.maxCoeff() > 1.0);
  }
}

TEST(Mesh, FaceMeasureAndDiameter) {
  const auto mesh = build_unit_square_mesh(4);
  for (const Face& f : mesh.faces()) {
    const double len = (mesh.vertex(f.vertex_ids[0]) - mesh.vertex(f.vertex_ids[1])).norm();
    EXPECT_NEAR(f.measure, len, 1e-15);
    EXPECT_NEAR(f.diameter, len, 1e-15);
  }
}

TEST(Mesh, InvalidInputs) {
  EXPECT_THROW(build_unit_square_mesh(0), InvalidArgument);
  EXPECT_THROW(build_unit_cube_mesh(-1), InvalidArgument);
  EXPECT_THROW(simplex_geometry({pt(0, 0), pt(1, 1), pt(2, 2)}), MeshIntegrityError);
  EXPECT_THROW(SimplicialMesh(2, {pt(0, 0), pt(1, 0), pt(2, 0)}, {{0, 1, 2, -1}}), MeshIntegrityError);
}

TEST(Mesh, GeometryMapsReferenceVertices) {
  const auto mesh = build_unit_cube_mesh(2);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry& g = mesh.geometry(c);
    EXPECT_NEAR((g.map(Point::Zero(3)) - mesh.vertex(mesh.cell(c)[0])).norm(), 0.0, 1e-15);
    for (int k = 0; k < 3; ++k) {
      Point e = Point::Zero(3);
      e[k] = 1.0;
      EXPECT_NEAR((g.map(e) - mesh.vertex(mesh.cell(c)[k + 1])).norm(), 0.0, 1e-15);
      EXPECT_NEAR((g.pullback(g.map(e)) - e).norm(), 0.0, 1e-14);
    }
  }
}

TEST(Mesh, VtkOutput) {
  const auto mesh = build_unit_square_mesh(2);
  const auto path = std::filesystem::temp_directory_path() / "rtmix_mesh_test.vtk";
  std::vector<double> ids(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) ids[c] = c;
  write_vtk(mesh, path, {{"cell_id", ids}});
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("# vtk DataFile Version"), std::string::npos);
  EXPECT_NE(text.find("POINTS 9"), std::string::npos);
  EXPECT_NE(text.find("CELLS 8"), std::string::npos);
  EXPECT_NE(text.find("cell_id"), std::string::npos);
  std::filesystem::remove(path);
}
