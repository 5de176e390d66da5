#include "oracle.hpp"
#include "rtmix/assembly.hpp"
#include "rtmix/errors.hpp"
#include "rtmix/problems.hpp"
#include "rtmix/timestepper.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>

using namespace rtmix;

namespace {

std::shared_ptr<const SimplicialMesh> reference_triangle_mesh() {
  return std::make_shared<const SimplicialMesh>(2, oracle::reference_simplex(2), std::vector<std::array<int, 4>>{{0, 1, 2, -1}});
}

std::shared_ptr<const SimplicialMesh> square(int M) { return std::make_shared<const SimplicialMesh>(build_unit_square_mesh(M)); }

std::vector<Point> vertices_of(const SimplicialMesh& mesh, int c) {
  std::vector<Point> v;
  for (int k = 0; k <= mesh.dim(); ++k) v.push_back(mesh.vertex(mesh.cell(c)[k]));
  return v;
}

}  // namespace

TEST(Assembly, LowestOrderMassAndDivergenceBlocks) {
  auto mesh = square(3);
  auto rt = build_rt_space(mesh, 0);
  auto dg = build_dg_space(mesh, 0);
  const SaddleSystem sys = assemble_saddle(rt, dg, 0.1);
  const Eigen::MatrixXd D(sys.D);
  for (int c = 0; c < mesh->num_cells(); ++c) EXPECT_NEAR(D(c, c), mesh->cell_measure(c), 1e-15);
  EXPECT_NEAR((D - Eigen::MatrixXd(D.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0, 0.0);

  const Eigen::MatrixXd B(sys.B);
  for (int c = 0; c < mesh->num_cells(); ++c)
    for (int i = 0; i < 3; ++i) {
      const CellFace& cf = mesh->cell_face(c, i);
      EXPECT_NEAR(B(rt->face_dof_offset(cf.face), c), cf.sign, 1e-13);
    }
  // each face dof touches at most two cells
  for (int f = 0; f < rt->n_dofs(); ++f) EXPECT_LE((B.row(f).array().abs() > 1e-14).count(), 2);
}

TEST(Assembly, ReferenceTriangleMassMatchesOracle) {
  auto mesh = reference_triangle_mesh();
  auto rt = build_rt_space(mesh, 0);
  const SaddleSystem sys = assemble_saddle(rt, build_dg_space(mesh, 0), 1.0);
  const Eigen::MatrixXd Mm(sys.M);
  const auto v = oracle::reference_simplex(2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double exact = oracle::integrate_simplex(v, [&](const Point& x) { return (x - v[i]).dot(x - v[j]); });
      const int gi = rt->face_dof_offset(mesh->cell_face(0, i).face);
      const int gj = rt->face_dof_offset(mesh->cell_face(0, j).face);
      EXPECT_NEAR(Mm(gi, gj), exact, 1e-14);
    }
}

TEST(Assembly, MassMatrixIsSymmetricPositiveDefinite) {
  for (int r : {0, 1, 2}) {
    auto mesh = square(2);
    const SaddleSystem sys = assemble_saddle(build_rt_space(mesh, r), build_dg_space(mesh, r), 1.0);
    const Eigen::MatrixXd Mm(sys.M);
    EXPECT_EQ((Mm - Mm.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Mm);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigd{Eigen::MatrixXd(sys.D)};
    EXPECT_GT(eigd.eigenvalues().minCoeff(), 0.0);
  }
  auto cube = std::make_shared<const SimplicialMesh>(build_unit_cube_mesh(1));
  const SaddleSystem sys = assemble_saddle(build_rt_space(cube, 1), build_dg_space(cube, 1), 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(sys.M)};
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(Assembly, DivergenceBlockAdjointConsistency) {
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  for (int r : {0, 1, 2}) {
    auto mesh = square(2);
    auto rt = build_rt_space(mesh, r);
    auto dg = build_dg_space(mesh, r);
    const SaddleSystem sys = assemble_saddle(rt, dg, 1.0);
    RtField s(rt);
    DgField u(dg);
    for (auto& c : s.coeffs) c = g(rng);
    for (auto& c : u.coeffs) c = g(rng);
    double direct = 0.0;
    for (int c = 0; c < mesh->num_cells(); ++c) {
      const CellGeometry& geo = mesh->geometry(c);
      direct += oracle::integrate_simplex(vertices_of(*mesh, c), [&](const Point& x) {
        const Point xr = geo.pullback(x);
        return evaluate_field(u, c, xr) * evaluate_divergence(s, c, xr);
      });
    }
    const double assembled = s.coeffs.dot(sys.B * u.coeffs);
    EXPECT_NEAR(assembled, direct, 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST(Assembly, MassMatrixMatchesOracleOnFields) {
  std::mt19937 rng(10);
  std::normal_distribution<double> g;
  auto cube = std::make_shared<const SimplicialMesh>(build_unit_cube_mesh(1));
  auto rt = build_rt_space(cube, 1);
  const SaddleSystem sys = assemble_saddle(rt, build_dg_space(cube, 1), 1.0);
  RtField s(rt);
  for (auto& c : s.coeffs) c = g(rng);
  double direct = 0.0;
  for (int c = 0; c < cube->num_cells(); ++c) {
    const CellGeometry& geo = cube->geometry(c);
    direct += oracle::integrate_simplex(vertices_of(*cube, c), [&](const Point& x) {
      return evaluate_field(s, c, geo.pullback(x)).squaredNorm();
    });
  }
  EXPECT_NEAR(s.coeffs.dot(sys.M * s.coeffs), direct, 1e-12 * direct);
}

TEST(Assembly, IndependentOfCellOrder) {
  for (int dim : {2, 3}) {
    auto mesh = std::make_shared<const SimplicialMesh>(dim == 2 ? build_unit_square_mesh(4) : build_unit_cube_mesh(2));
    auto rt = build_rt_space(mesh, 1);
    auto dg = build_dg_space(mesh, 1);
    std::vector<int> order(mesh->num_cells());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(12);
    std::shuffle(order.begin(), order.end(), rng);
    const SaddleSystem a = assemble_saddle(rt, dg, 0.5);
    const SaddleSystem b = assemble_saddle(rt, dg, 0.5, order);
    EXPECT_EQ(Eigen::MatrixXd(a.M - b.M).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(Eigen::MatrixXd(a.B - b.B).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(Eigen::MatrixXd(a.D - b.D).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Assembly, InvalidInputs) {
  auto mesh = square(2);
  auto rt = build_rt_space(mesh, 0);
  auto dg = build_dg_space(mesh, 0);
  EXPECT_THROW(assemble_saddle(rt, build_dg_space(mesh, 1), 1.0), InvalidArgument);
  EXPECT_THROW(assemble_saddle(rt, build_dg_space(square(2), 0), 1.0), InvalidArgument);
  EXPECT_THROW(assemble_saddle(rt, dg, 0.0), InvalidArgument);
  const std::vector<int> short_order{0, 1};
  EXPECT_THROW(assemble_saddle(rt, dg, 1.0, short_order), InvalidArgument);
}

TEST(Assembly, StepMatrixBlocks) {
  auto mesh = square(2);
  const SaddleSystem sys = assemble_saddle(build_rt_space(mesh, 1), build_dg_space(mesh, 1), 0.25);
  const Eigen::MatrixXd A(sys.step_matrix(4.0));
  const Eigen::MatrixXd S(sys.symmetric_step_matrix(4.0));
  const int nr = sys.n_rt(), nd = sys.n_dg();
  EXPECT_EQ((A.topLeftCorner(nr, nr) - Eigen::MatrixXd(sys.M)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((A.topRightCorner(nr, nd) - Eigen::MatrixXd(sys.B)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((A.bottomLeftCorner(nd, nr) + Eigen::MatrixXd(sys.B).transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((A.bottomRightCorner(nd, nd) - 4.0 * Eigen::MatrixXd(sys.D)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((S - S.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((S.topRows(nr) + A.topRows(nr)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((S.bottomRows(nd) - A.bottomRows(nd)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assembly, NonlinearLoadZeroState) {
  auto mesh = square(2);
  auto rt = build_rt_space(mesh, 1);
  auto dg = build_dg_space(mesh, 1);
  NonlinearitySpec all{true, {}, true, true};
  EXPECT_EQ(assemble_nonlinear_load(dg, rt, DgField(dg), RtField(rt), all).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assembly, NonlinearLoadCubicOnConstants) {
  auto mesh = square(2);
  auto rt = build_rt_space(mesh, 0);
  auto dg = build_dg_space(mesh, 0);
  DgField u(dg);
  for (int c = 0; c < mesh->num_cells(); ++c) u.coeffs[c] = 0.5 + 0.25 * c;
  NonlinearitySpec f;
  f.cubic = true;
  f.linear_shift = true;
  const Eigen::VectorXd load = assemble_nonlinear_load(dg, rt, u, RtField(rt), f);
  for (int c = 0; c < mesh->num_cells(); ++c) {
    const double v = u.coeffs[c];
    EXPECT_NEAR(load[c], (v * v * v - v) * mesh->cell_measure(c), 1e-14);
  }
}

TEST(Assembly, NonlinearLoadAdvectionOnReferenceTriangle) {
  auto mesh = reference_triangle_mesh();
  auto rt = build_rt_space(mesh, 0);
  auto dg = build_dg_space(mesh, 0);
  SmallVec s(2);
  s << 0.3, -1.1;
  RtField sigma(rt);
  for (int f = 0; f < mesh->num_faces(); ++f) sigma.coeffs[rt->face_dof_offset(f)] = s.dot(mesh->face(f).global_normal) * mesh->face(f).measure;
  DgField u(dg);
  u.coeffs[0] = 2.5;
  NonlinearitySpec f;
  f.advection = true;
  f.b = SmallVec::Ones(2);
  const Eigen::VectorXd load = assemble_nonlinear_load(dg, rt, u, sigma, f);
  EXPECT_NEAR(load[0], s.sum() * 2.5 / 2.0, 1e-14);
}

TEST(Assembly, NonlinearLoadMatchesOracle) {
  std::mt19937 rng(13);
  std::normal_distribution<double> g;
  for (int r : {0, 1, 2}) {
    auto mesh = square(2);
    auto rt = build_rt_space(mesh, r);
    auto dg = build_dg_space(mesh, r);
    DgField u(dg);
    RtField s(rt);
    for (auto& c : u.coeffs) c = g(rng);
    for (auto& c : s.coeffs) c = g(rng);
    NonlinearitySpec f{true, {}, true, true};
    const Eigen::VectorXd load = assemble_nonlinear_load(dg, rt, u, s, f);
    for (int c = 0; c < mesh->num_cells(); ++c) {
      const CellGeometry& geo = mesh->geometry(c);
      for (int k = 0; k < dg->local_dofs(); ++k) {
        DgField psi(dg);
        psi.coeffs[dg->cell_offset(c) + k] = 1.0;
        const double exact = oracle::integrate_simplex(vertices_of(*mesh, c), [&](const Point& x) {
          const Point xr = geo.pullback(x);
          return f.evaluate(evaluate_field(u, c, xr), evaluate_field(s, c, xr)) * evaluate_field(psi, c, xr);
        });
        EXPECT_NEAR(load[dg->cell_offset(c) + k], exact, 1e-12) << r;
      }
    }
  }
}

TEST(Assembly, SourceLoad) {
  auto mesh = square(2);
  auto dg0 = build_dg_space(mesh, 0);
  EXPECT_EQ(assemble_source(dg0, [](const Point&, double) { return 0.0; }, 0.0).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::VectorXd ones = assemble_source(dg0, [](const Point&, double) { return 1.0; }, 0.0);
  for (int c = 0; c < mesh->num_cells(); ++c) EXPECT_NEAR(ones[c], mesh->cell_measure(c), 1e-15);
}

TEST(Assembly, ManufacturedSourceMatchesHighDegreeOracle) {
  const auto exact = allen_cahn_2d_solution();
  const auto g = manufactured_source(exact, allen_cahn_2d_nonlinearity());
  auto mesh = square(2);
  for (int r : {0, 1, 2}) {
    auto dg = build_dg_space(mesh, r);
    const Eigen::VectorXd load = assemble_source(dg, g, 0.0);
    for (int c = 0; c < mesh->num_cells(); ++c) {
      const CellGeometry& geo = mesh->geometry(c);
      for (int k = 0; k < dg->local_dofs(); ++k) {
        DgField psi(dg);
        psi.coeffs[dg->cell_offset(c) + k] = 1.0;
        const double ref = oracle::integrate_simplex(vertices_of(*mesh, c), [&](const Point& x) {
          return g(x, 0.0) * evaluate_field(psi, c, geo.pullback(x));
        });
        EXPECT_NEAR(load[dg->cell_offset(c) + k], ref, 1e-10) << "r=" << r << " cell " << c;
      }
    }
  }
}
