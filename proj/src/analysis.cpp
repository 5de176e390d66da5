#include "rtmix/analysis.hpp"

#include "rtmix/errors.hpp"
#include "rtmix/kernels.hpp"
#include "rtmix/local_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rtmix {
namespace {

void require_p(int p) {
  if (p != 2 && p != 3 && p != 4 && p != 6) {
    throw InvalidArgument("Lp norm: p = " + std::to_string(p) + " is not supported (use 2, 3, 4 or 6)");
  }
}

int lp_quad_degree(int p, int r) { return std::min(p * r + 4, kMaxQuadratureDegree); }

// Physical RT values at the quadrature points of every cell, stored
// component-major: out[c][cell * nq + q].
class RtSampler {
 public:
  RtSampler(const RtSpace& rt, int degree)
      : rt_(rt), rule_(simplex_rule(rt.dim(), degree)), tab_(rt.reference().tabulate(rule_)) {}

  const QuadratureRule& rule() const { return rule_; }

  void values(const RtField& sigma, std::vector<std::vector<double>>& out) const {
    const SimplicialMesh& mesh = rt_.mesh();
    const int d = mesh.dim();
    const int nc = mesh.num_cells();
    const int nq = rule_.size();
    const int nr = tab_.num_basis;
    const std::size_t total = static_cast<std::size_t>(nc) * nq;
    std::vector<double> coef(static_cast<std::size_t>(nc) * nr);
    for (int c = 0; c < nc; ++c) {
      const auto dofs = rt_.cell_dofs(c);
      for (int i = 0; i < nr; ++i) coef[static_cast<std::size_t>(c) * nr + i] = dofs[i].sign * sigma.coeffs[dofs[i].index];
    }
    std::vector<std::vector<double>> hat(d, std::vector<double>(total));
    const auto& k = kernels::active();
    for (int j = 0; j < d; ++j) k.gemm_nn(nc, nq, nr, coef.data(), tab_.component(j), hat[j].data());
    out.assign(d, std::vector<double>(total, 0.0));
    for (int c = 0; c < nc; ++c) {
      const CellGeometry& g = mesh.geometry(c);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double a = g.B(i, j) / g.det_B;
          double* dst = out[i].data() + static_cast<std::size_t>(c) * nq;
          const double* src = hat[j].data() + static_cast<std::size_t>(c) * nq;
          for (int q = 0; q < nq; ++q) dst[q] += a * src[q];
        }
    }
  }

 private:
  const RtSpace& rt_;
  QuadratureRule rule_;
  Tabulation tab_;
};

// Sum over cells of det_B * per-cell reduction, accumulated in cell order.
template <class F>
double reduce_cells(const SimplicialMesh& mesh, F&& per_cell) {
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) sum += mesh.geometry(c).det_B * per_cell(c);
  return sum;
}

double face_reference_measure(int face_dim) { return face_dim == 2 ? 0.5 : 1.0; }

// Quadrature on a global mesh face.
void mesh_face_points(const SimplicialMesh& mesh, const Face& f, const QuadratureRule& rule, std::vector<Point>& pts,
                      std::vector<double>& wts) {
  const int d = mesh.dim();
  const Point& v0 = mesh.vertex(f.vertex_ids[0]);
  const double scale = f.measure / face_reference_measure(d - 1);
  pts.resize(rule.size());
  wts.resize(rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    Point x = v0;
    for (int k = 1; k < d; ++k) x += rule.points[q][k - 1] * (mesh.vertex(f.vertex_ids[k]) - v0);
    pts[q] = x;
    wts[q] = rule.weights[q] * scale;
  }
}

// Jump in global-normal orientation: trace from the lower-indexed cell minus
// the trace from the other one (zero outside on the boundary).
double jump_at(const DgField& u, const SimplicialMesh& mesh, const Face& f, const Point& x) {
  const int c0 = f.adjacent_cells[0];
  const int c1 = f.adjacent_cells[1];
  double j = evaluate_field(u, c0, mesh.geometry(c0).pullback(x));
  if (c1 >= 0) j -= evaluate_field(u, c1, mesh.geometry(c1).pullback(x));
  return j;
}

std::optional<double> safe_ratio(double num, double den) {
  if (!(den > 0.0) || !std::isfinite(num) || !std::isfinite(den)) return std::nullopt;
  return num / den;
}

}  // namespace

double l2_error(const DgField& field, const SpaceTimeScalar& exact, double t) {
  if (!exact) throw InvalidArgument("l2_error: exact callback missing");
  LoadAssembler la(field.space, nullptr, error_quad_degree(field.space->degree()));
  std::vector<double> vals, ex;
  la.dg_values(field, vals);
  ex.resize(vals.size());
  for (std::size_t i = 0; i < ex.size(); ++i) ex[i] = exact(la.points()[i], t);
  const int nq = la.rule().size();
  const auto& k = kernels::active();
  const double sum = reduce_cells(field.space->mesh(), [&](int c) {
    const std::size_t off = static_cast<std::size_t>(c) * nq;
    return k.weighted_sq_diff(nq, la.rule().weights.data(), vals.data() + off, ex.data() + off);
  });
  return std::sqrt(std::max(sum, 0.0));
}

double l2_error(const RtField& field, const SpaceTimeVector& exact, double t) {
  if (!exact) throw InvalidArgument("l2_error: exact callback missing");
  const RtSpace& rt = *field.space;
  const SimplicialMesh& mesh = rt.mesh();
  const int d = mesh.dim();
  RtSampler sampler(rt, error_quad_degree(rt.degree()));
  std::vector<std::vector<double>> vals;
  sampler.values(field, vals);
  const QuadratureRule& rule = sampler.rule();
  const int nq = rule.size();
  std::vector<std::vector<double>> ex(d, std::vector<double>(vals[0].size()));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry& g = mesh.geometry(c);
    for (int q = 0; q < nq; ++q) {
      const SmallVec e = exact(g.map(rule.points[q]), t);
      for (int i = 0; i < d; ++i) ex[i][static_cast<std::size_t>(c) * nq + q] = e[i];
    }
  }
  const auto& k = kernels::active();
  const double sum = reduce_cells(mesh, [&](int c) {
    const std::size_t off = static_cast<std::size_t>(c) * nq;
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += k.weighted_sq_diff(nq, rule.weights.data(), vals[i].data() + off, ex[i].data() + off);
    return s;
  });
  return std::sqrt(std::max(sum, 0.0));
}

double l2_norm(const DgField& field) { return lp_norm(field, 2); }
double l2_norm(const RtField& field) { return lp_norm(field, 2); }

double lp_norm(const DgField& u, int p) {
  require_p(p);
  LoadAssembler la(u.space, nullptr, lp_quad_degree(p, u.space->degree()));
  std::vector<double> vals;
  la.dg_values(u, vals);
  const int nq = la.rule().size();
  const auto& k = kernels::active();
  const double sum = reduce_cells(u.space->mesh(), [&](int c) {
    return k.weighted_abs_pow(nq, la.rule().weights.data(), vals.data() + static_cast<std::size_t>(c) * nq, p);
  });
  return std::pow(std::max(sum, 0.0), 1.0 / p);
}

double lp_norm(const RtField& sigma, int p) {
  require_p(p);
  const RtSpace& rt = *sigma.space;
  const int d = rt.dim();
  RtSampler sampler(rt, lp_quad_degree(p, rt.degree() + 1));
  std::vector<std::vector<double>> vals;
  sampler.values(sigma, vals);
  std::vector<double> mag(vals[0].size(), 0.0);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += vals[c][i] * vals[c][i];
    mag[i] = std::sqrt(s);
  }
  const int nq = sampler.rule().size();
  const auto& k = kernels::active();
  const double sum = reduce_cells(rt.mesh(), [&](int c) {
    return k.weighted_abs_pow(nq, sampler.rule().weights.data(), mag.data() + static_cast<std::size_t>(c) * nq, p);
  });
  return std::pow(std::max(sum, 0.0), 1.0 / p);
}

namespace {

double dg_norm_squared(const DgField& u) {
  const DgSpace& dg = *u.space;
  const SimplicialMesh& mesh = dg.mesh();
  const int d = mesh.dim();
  const int r = dg.degree();
  double vol = 0.0;
  if (r > 0) {
    const QuadratureRule rule = simplex_rule(d, 2 * r);
    const Tabulation tab = dg.reference().tabulate(rule);
    const int nb = tab.num_basis;
    const int nq = rule.size();
    SmallVec ghat(d);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const CellGeometry& g = mesh.geometry(c);
      const double* coef = u.coeffs.data() + dg.cell_offset(c);
      double s = 0.0;
      for (int q = 0; q < nq; ++q) {
        for (int j = 0; j < d; ++j) {
          double v = 0.0;
          for (int b = 0; b < nb; ++b) v += coef[b] * tab.derivative[(static_cast<std::size_t>(j) * nb + b) * nq + q];
          ghat[j] = v;
        }
        s += rule.weights[q] * (g.B_inv.transpose() * ghat).squaredNorm();
      }
      vol += g.det_B * s;
    }
  }
  const QuadratureRule frule = simplex_rule(d - 1, 2 * r + 2);
  std::vector<Point> pts;
  std::vector<double> wts;
  double jumps = 0.0;
  for (const Face& f : mesh.faces()) {
    mesh_face_points(mesh, f, frule, pts, wts);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double j = jump_at(u, mesh, f, pts[q]);
      s += wts[q] * j * j;
    }
    jumps += s / f.diameter;
  }
  return vol + jumps;
}

}  // namespace

double dg_norm(const DgField& u) { return std::sqrt(std::max(dg_norm_squared(u), 0.0)); }

EmbeddingChain embedding_chain(const DgField& u, const RtField& sigma) {
  const DgSpace& dg = *u.space;
  const RtSpace& rt = *sigma.space;
  if (dg.mesh_ptr() != rt.mesh_ptr()) throw InvalidArgument("embedding_chain: fields live on different meshes");
  if (dg.degree() != rt.degree()) throw InvalidArgument("embedding_chain: degrees differ");
  const SimplicialMesh& mesh = dg.mesh();
  const int d = mesh.dim();
  const int r = dg.degree();
  const int nr = rt.local_dofs();
  const int quad = 2 * r + 2;

  EmbeddingChain out;
  out.dg_squared = dg_norm_squared(u);
  out.chi = RtField(sigma.space);
  std::vector<char> seen(rt.n_dofs(), 0);

  const QuadratureRule rule = simplex_rule(d, quad);
  const RtReferenceElement& ref = rt.reference();
  Eigen::MatrixXd vals(nr, d);
  double dot = 0.0;
  double chi2 = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry& g = mesh.geometry(c);
    LocalProjectionData data;
    data.p = [&u, c, &g](const Point& x) { return evaluate_gradient(u, c, g.pullback(x)); };
    FaceSigns signs = kOutward;
    for (int i = 0; i <= d; ++i) {
      const CellFace& cf = mesh.cell_face(c, i);
      signs[i] = cf.sign;
      const Face* f = &mesh.face(cf.face);
      data.q.push_back([&u, &mesh, f](const Point& x) { return -jump_at(u, mesh, *f, x) / f->diameter; });
    }
    const Eigen::VectorXd chi_loc = local_rt_project(g, data, r, signs);
    const Eigen::VectorXd s_loc = local_coefficients(sigma, c);

    const auto dofs = rt.cell_dofs(c);
    for (int i = 0; i < nr; ++i) {
      const double gv = dofs[i].sign * chi_loc[i];
      double& slot = out.chi.coeffs[dofs[i].index];
      if (seen[dofs[i].index]) {
        out.conformity_defect = std::max(out.conformity_defect, std::abs(slot - gv));
      } else {
        slot = gv;
        seen[dofs[i].index] = 1;
      }
    }

    double s_dot = 0.0, s_chi = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      ref.eval(rule.points[q], vals);
      const SmallVec a = g.B * (vals.transpose() * s_loc) / g.det_B;
      const SmallVec b = g.B * (vals.transpose() * chi_loc) / g.det_B;
      s_dot += rule.weights[q] * a.dot(b);
      s_chi += rule.weights[q] * b.squaredNorm();
    }
    dot += g.det_B * s_dot;
    chi2 += g.det_B * s_chi;
  }
  out.sigma_dot_chi = dot;
  out.chi_l2 = std::sqrt(std::max(chi2, 0.0));
  return out;
}

double first_equation_residual(const SaddleSystem& system, const RtField& sigma, const DgField& u) {
  const Eigen::VectorXd r = system.M * sigma.coeffs + system.B * u.coeffs;
  return r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

void record_embedding(StudyRecord& rec, const DgField& u, const RtField& sigma, std::span<const int> p_list) {
  rec.sigma_L2 = l2_norm(sigma);
  rec.dg_norm = dg_norm(u);
  rec.dg_over_sigma = safe_ratio(rec.dg_norm, rec.sigma_L2);
  for (int p : p_list) {
    const double n = lp_norm(u, p);
    rec.lp_norms[p] = n;
    rec.embed_ratio[p] = safe_ratio(n, rec.sigma_L2);
    rec.lp_over_dg[p] = safe_ratio(n, rec.dg_norm);
  }
}

ConvergenceReport convergence_orders(std::vector<StudyRecord> records) {
  if (records.size() < 2) throw InvalidArgument("convergence_orders: need at least two records");
  std::stable_sort(records.begin(), records.end(), [](const StudyRecord& a, const StudyRecord& b) { return a.M < b.M; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].M != 2 * records[i - 1].M) {
      throw InvalidArgument("convergence_orders: M must double between consecutive records (" +
                            std::to_string(records[i - 1].M) + " -> " + std::to_string(records[i].M) + ")");
    }
  }
  ConvergenceReport rep;
  const std::size_t n = records.size();
  rep.order_u.assign(n, std::nullopt);
  rep.order_sigma.assign(n, std::nullopt);

  auto pair_order = [](const std::optional<double>& a, const std::optional<double>& b) -> std::optional<double> {
    if (!a || !b || !(*a > 0.0) || !(*b > 0.0)) return std::nullopt;
    return std::log2(*a / *b);
  };
  // least-squares slope of log2 e against -log2 M
  auto fit = [&](auto get) -> std::optional<double> {
    std::vector<double> xs, ys;
    for (const auto& rec : records) {
      const std::optional<double> e = get(rec);
      if (!e || !(*e > 0.0)) return std::nullopt;
      xs.push_back(-std::log2(static_cast<double>(rec.M)));
      ys.push_back(std::log2(*e));
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
  };

  for (std::size_t i = 1; i < n; ++i) {
    rep.order_u[i] = pair_order(records[i - 1].err_u_L2, records[i].err_u_L2);
    rep.order_sigma[i] = pair_order(records[i - 1].err_sigma_L2, records[i].err_sigma_L2);
  }
  rep.final_order_u = rep.order_u.back();
  rep.final_order_sigma = rep.order_sigma.back();
  rep.fit_order_u = fit([](const StudyRecord& r) { return r.err_u_L2; });
  rep.fit_order_sigma = fit([](const StudyRecord& r) { return r.err_sigma_L2; });
  rep.records = std::move(records);
  return rep;
}

}  // namespace rtmix
