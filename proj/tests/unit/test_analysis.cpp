#include "oracle.hpp"
#include "rtmix/analysis.hpp"
#include "rtmix/errors.hpp"
#include "rtmix/problems.hpp"
#include "rtmix/timestepper.hpp"

#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace rtmix;

namespace {

std::shared_ptr<const SimplicialMesh> square(int M) { return std::make_shared<const SimplicialMesh>(build_unit_square_mesh(M)); }

DgField random_dg(std::shared_ptr<const DgSpace> dg, std::mt19937& rng) {
  std::normal_distribution<double> g;
  DgField u(dg);
  for (auto& x : u.coeffs) x = g(rng);
  return u;
}

StudyRecord errors_record(int M, double eu, double es) {
  StudyRecord r;
  r.M = M;
  r.err_u_L2 = eu;
  r.err_sigma_L2 = es;
  return r;
}

// Broken H1 norm recomputed with the oracle quadrature on cells and faces.
double dg_norm_oracle(const DgField& u) {
  const SimplicialMesh& mesh = u.space->mesh();
  double s = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    std::vector<Point> v;
    for (int k = 0; k <= mesh.dim(); ++k) v.push_back(mesh.vertex(mesh.cell(c)[k]));
    const CellGeometry& g = mesh.geometry(c);
    s += oracle::integrate_simplex(v, [&](const Point& x) { return evaluate_gradient(u, c, g.pullback(x)).squaredNorm(); });
  }
  for (const Face& f : mesh.faces()) {
    std::vector<Point> v;
    for (int k = 0; k < mesh.dim(); ++k) v.push_back(mesh.vertex(f.vertex_ids[k]));
    s += oracle::integrate_simplex(v, [&](const Point& x) {
           const int a = f.adjacent_cells[0], b = f.adjacent_cells[1];
           double j = evaluate_field(u, a, mesh.geometry(a).pullback(x));
           if (b >= 0) j -= evaluate_field(u, b, mesh.geometry(b).pullback(x));
           return j * j;
         }) /
         f.diameter;
  }
  return std::sqrt(s);
}

}  // namespace

TEST(Analysis, L2ErrorOfFieldAgainstItself) {
  std::mt19937 rng(51);
  auto dg = build_dg_space(square(4), 2);
  const DgField u = random_dg(dg, rng);
  const SimplicialMesh& mesh = dg->mesh();
  // exact callback evaluates the field itself after locating the cell
  const SpaceTimeScalar self = [&](const Point& x, double) {
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Point xr = mesh.geometry(c).pullback(x);
      if (xr.minCoeff() >= -1e-12 && xr.sum() <= 1 + 1e-12) return evaluate_field(u, c, xr);
    }
    return 0.0;
  };
  EXPECT_LT(l2_error(u, self, 0.0), 1e-13);
}

TEST(Analysis, NormOfExampleSolution) {
  auto dg = build_dg_space(square(8), 0);
  const auto exact = allen_cahn_2d_solution();
  EXPECT_NEAR(l2_error(DgField(dg), exact.u, 1.0), std::exp(1.0) / 30.0, 1e-10);
  EXPECT_NEAR(std::exp(1.0) / 30.0, 9.0609e-02, 1e-6);
}

TEST(Analysis, DgNormOfConstantField) {
  auto dg = build_dg_space(square(2), 0);
  DgField one(dg, Eigen::VectorXd::Ones(dg->n_dofs()));
  EXPECT_NEAR(dg_norm(one) * dg_norm(one), 8.0, 1e-13);
  EXPECT_EQ(dg_norm(DgField(dg)), 0.0);
}

TEST(Analysis, DgNormMatchesOracle) {
  std::mt19937 rng(52);
  for (int r : {0, 1, 2}) {
    const DgField u = random_dg(build_dg_space(square(3), r), rng);
    EXPECT_NEAR(dg_norm(u), dg_norm_oracle(u), 1e-12 * dg_norm(u));
  }
  auto cube = std::make_shared<const SimplicialMesh>(build_unit_cube_mesh(1));
  const DgField u3 = random_dg(build_dg_space(cube, 1), rng);
  EXPECT_NEAR(dg_norm(u3), dg_norm_oracle(u3), 1e-12 * dg_norm(u3));
}

TEST(Analysis, NormsAreHomogeneous) {
  std::mt19937 rng(53);
  auto dg = build_dg_space(square(3), 1);
  const DgField u = random_dg(dg, rng);
  for (double a : {-2.5, 0.3}) {
    const DgField au(dg, a * u.coeffs);
    EXPECT_NEAR(dg_norm(au), std::abs(a) * dg_norm(u), 1e-12 * dg_norm(u));
    for (int p : {2, 3, 4, 6}) EXPECT_NEAR(lp_norm(au, p), std::abs(a) * lp_norm(u, p), 1e-12 * lp_norm(u, p));
  }
}

TEST(Analysis, DgNormTriangleInequality) {
  std::mt19937 rng(54);
  auto dg = build_dg_space(square(3), 2);
  for (int trial = 0; trial < 10; ++trial) {
    const DgField a = random_dg(dg, rng), b = random_dg(dg, rng);
    const DgField s(dg, a.coeffs + b.coeffs);
    EXPECT_LE(dg_norm(s), dg_norm(a) + dg_norm(b) + 1e-12);
  }
}

TEST(Analysis, LpNorms) {
  auto dg = build_dg_space(square(4), 0);
  const DgField c(dg, Eigen::VectorXd::Constant(dg->n_dofs(), -1.7));
  for (int p : {2, 3, 4, 6}) EXPECT_NEAR(lp_norm(c, p), 1.7, 1e-13);
  std::mt19937 rng(55);
  const DgField u = random_dg(build_dg_space(square(4), 2), rng);
  EXPECT_NEAR(lp_norm(u, 2), l2_error(u, [](const Point&, double) { return 0.0; }, 0.0), 1e-13);
  EXPECT_NEAR(lp_norm(u, 2), l2_norm(u), 1e-13);
  // p-norms on a probability space are non-decreasing in p
  EXPECT_LE(lp_norm(u, 2), lp_norm(u, 3) + 1e-13);
  EXPECT_LE(lp_norm(u, 4), lp_norm(u, 6) + 1e-13);
  EXPECT_THROW(lp_norm(u, 5), InvalidArgument);
  EXPECT_THROW(lp_norm(u, 1), InvalidArgument);
}

TEST(Analysis, ConvergenceOrdersFromTabulatedErrors) {
  // the tabulated Order row is the least-squares slope over the three levels
  const auto rep = convergence_orders({errors_record(32, 2.9850e-03, 1.2659e-02), errors_record(64, 1.4928e-03, 6.3329e-03),
                                       errors_record(128, 7.4643e-04, 3.1668e-03)});
  ASSERT_TRUE(rep.final_order_u.has_value());
  EXPECT_FALSE(rep.order_u[0].has_value());
  EXPECT_NEAR(*rep.order_u[1], std::log2(2.9850 / 1.4928), 1e-12);
  EXPECT_NEAR(*rep.final_order_u, std::log2(1.4928 / 0.74643), 1e-12);
  EXPECT_NEAR(*rep.fit_order_u, 9.9983e-01, 1e-4);
  EXPECT_NEAR(*rep.fit_order_sigma, 9.9951e-01, 1e-4);

  const auto r2 = convergence_orders({errors_record(8, 4.2973e-05, 1.4866e-04), errors_record(16, 5.3949e-06, 1.8728e-05),
                                      errors_record(32, 6.7509e-07, 2.3501e-06)});
  EXPECT_NEAR(*r2.fit_order_u, 2.9961, 1e-4);
  EXPECT_NEAR(*r2.fit_order_sigma, 2.9916, 1e-4);

  const auto halving = convergence_orders({errors_record(4, 1.0, 2.0), errors_record(8, 0.5, 1.0), errors_record(16, 0.25, 0.5)});
  EXPECT_DOUBLE_EQ(*halving.final_order_u, 1.0);
  EXPECT_DOUBLE_EQ(*halving.fit_order_sigma, 1.0);
}

TEST(Analysis, ConvergenceOrdersRequireDoubling) {
  EXPECT_THROW(convergence_orders({errors_record(8, 1, 1), errors_record(12, 1, 1)}), InvalidArgument);
  EXPECT_THROW(convergence_orders({errors_record(8, 1, 1)}), InvalidArgument);
  // unsorted input is sorted by M
  const auto rep = convergence_orders({errors_record(16, 0.25, 1), errors_record(8, 1.0, 1)});
  EXPECT_EQ(rep.records.front().M, 8);
  EXPECT_DOUBLE_EQ(*rep.final_order_u, 2.0);
}

TEST(Analysis, EmbeddingChainIdentityOnDiscretePairs) {
  // sigma = -M^{-1} B u satisfies the first mixed equation exactly
  std::mt19937 rng(56);
  for (int dim : {2, 3}) {
    for (int r : {0, 1}) {
      auto mesh = std::make_shared<const SimplicialMesh>(dim == 2 ? build_unit_square_mesh(4) : build_unit_cube_mesh(2));
      auto rt = build_rt_space(mesh, r);
      auto dg = build_dg_space(mesh, r);
      const SaddleSystem sys = assemble_saddle(rt, dg, 1.0);
      const DgField u = random_dg(dg, rng);
      Eigen::SimplicialLDLT<SparseMatrix> mass(sys.M);
      const RtField sigma(rt, -mass.solve(sys.B * u.coeffs));
      ASSERT_LT(first_equation_residual(sys, sigma, u), 1e-12);
      const EmbeddingChain ch = embedding_chain(u, sigma);
      EXPECT_NEAR(ch.dg_squared, ch.sigma_dot_chi, 1e-10 * ch.dg_squared);
      EXPECT_NEAR(ch.dg_squared, dg_norm(u) * dg_norm(u), 1e-12 * ch.dg_squared);
      EXPECT_LT(ch.conformity_defect, 1e-12);
      // Cauchy-Schwarz: ||u||_DG^2 <= ||sigma|| ||chi||
      EXPECT_LE(ch.dg_squared, l2_norm(sigma) * ch.chi_l2 * (1 + 1e-12));
    }
  }
}

TEST(Analysis, EmbeddingStudyOnSchemeOutput) {
  std::vector<RunConfig> configs;
  for (int M : {4, 8}) {
    RunConfig c;
    c.r = 0;
    c.M = M;
    c.tau = 0.25;
    c.exact = allen_cahn_2d_solution();
    c.nonlinearity = allen_cahn_2d_nonlinearity();
    configs.push_back(c);
  }
  const int p_list[] = {2, 6};
  const ConvergenceReport rep = embedding_study(configs, p_list);
  ASSERT_EQ(rep.records.size(), 2u);
  for (const auto& rec : rep.records) {
    EXPECT_LE(rec.chain_dg_squared, rec.chain_sigma_chi + 1e-9);
    ASSERT_TRUE(rec.embed_ratio.at(6).has_value());
    EXPECT_NEAR(*rec.embed_ratio.at(6), rec.lp_norms.at(6) / rec.sigma_L2, 1e-14);
    EXPECT_NEAR(*rec.dg_over_sigma, rec.dg_norm / rec.sigma_L2, 1e-14);
    EXPECT_EQ(rec.lp_norms.count(3), 0u);
  }
  EXPECT_TRUE(rep.final_order_u.has_value());
}

TEST(Analysis, ZeroFieldsGiveUndefinedRatios) {
  auto mesh = square(2);
  auto rt = build_rt_space(mesh, 0);
  auto dg = build_dg_space(mesh, 0);
  StudyRecord rec;
  const int p_list[] = {2, 3, 4, 6};
  record_embedding(rec, DgField(dg), RtField(rt), p_list);
  for (int p : p_list) {
    EXPECT_FALSE(rec.embed_ratio.at(p).has_value());
    EXPECT_FALSE(rec.lp_over_dg.at(p).has_value());
  }
  EXPECT_FALSE(rec.dg_over_sigma.has_value());
}
