#include "rtmix/timestepper.hpp"

#include "rtmix/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace rtmix {
namespace {

SaddleSystem build_system(const RunConfig& c) {
  require_supported_degree(c.dim, c.r);
  if (c.dim != 2 && c.dim != 3) throw InvalidArgument("dimension must be 2 or 3");
  if (c.M < 1) throw InvalidArgument("M must be at least 1");
  (void)c.num_steps();
  auto mesh = std::make_shared<const SimplicialMesh>(c.dim == 2 ? build_unit_square_mesh(c.M) : build_unit_cube_mesh(c.M));
  return assemble_saddle(build_rt_space(mesh, c.r), build_dg_space(mesh, c.r), c.tau);
}

SpaceTimeScalar pick_source(const RunConfig& c) {
  if (c.source) return c.source;
  if (c.exact) return manufactured_source(*c.exact, c.nonlinearity);
  return [](const Point&, double) { return 0.0; };
}

void check_finite(const TimeStepState& s) {
  if (!s.u.coeffs.allFinite() || !s.sigma.coeffs.allFinite()) {
    throw DivergenceError("non-finite coefficients at step " + std::to_string(s.n), s.n);
  }
}

TimeStepState solve_step(const SaddleSystem& system, const Factorization& fact, const TimeStepState& state,
                         const RunConfig& config, LoadAssembler& nl, LoadAssembler& src, const SpaceTimeScalar& g) {
  TimeStepState next;
  next.n = state.n + 1;
  next.t = next.n * config.tau;
  Eigen::VectorXd rhs_u = (system.D * state.u.coeffs) / config.tau;
  if (config.nonlinearity.any()) rhs_u -= nl.nonlinear(state.u, state.sigma, config.nonlinearity);
  rhs_u += src.source(g, next.t);
  if (!rhs_u.allFinite()) throw DivergenceError("non-finite right-hand side at step " + std::to_string(next.n), next.n);
  auto [sigma, u] = fact.solve(Eigen::VectorXd::Zero(system.n_rt()), rhs_u);
  next.u = DgField(system.dg, std::move(u), next.t);
  next.sigma = RtField(system.rt, std::move(sigma), next.t);
  check_finite(next);
  return next;
}

void write_snapshot(const RunConfig& c, const TimeStepState& s) {
  const SimplicialMesh& mesh = s.u.space->mesh();
  std::vector<double> u_mean(mesh.num_cells());
  // cell average from the reference barycentre
  Point bary = Point::Constant(mesh.dim(), 1.0 / (mesh.dim() + 1));
  for (int k = 0; k < mesh.num_cells(); ++k) u_mean[k] = evaluate_field(s.u, k, bary);
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06ld.vtk", s.n);
  std::filesystem::path p = c.vtk_prefix;
  p += buf;
  write_vtk(mesh, p, {{"u_h", u_mean}});
}

}  // namespace

long RunConfig::num_steps() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("T must be positive");
  const double n = std::round(T / tau);
  if (n < 1.0 || std::abs(n * tau - T) > 1e-12 * T) {
    throw InvalidArgument("T / tau must be a positive integer (T = " + std::to_string(T) + ", tau = " +
                          std::to_string(tau) + ")");
  }
  return static_cast<long>(n);
}

SpaceTimeScalar manufactured_source(const ExactSolutionSpec& exact, const NonlinearitySpec& f) {
  if (!exact.u || !exact.u_t || !exact.laplace_u) throw InvalidArgument("manufactured source needs u, u_t and laplace_u");
  if (f.advection && !exact.grad_u) throw InvalidArgument("advection term needs grad_u");
  return [exact, f](const Point& x, double t) {
    const double u = exact.u(x, t);
    double g = exact.u_t(x, t) - exact.laplace_u(x, t);
    if (f.any()) g += f.evaluate(u, f.advection ? exact.grad_u(x, t) : SmallVec(SmallVec::Zero(x.size())));
    return g;
  };
}

TimeStepper::TimeStepper(const RunConfig& config)
    : config_(config),
      system_(build_system(config)),
      fact_(system_, 1.0 / config.tau, config.backend),
      source_(pick_source(config)),
      nonlinear_(system_.dg, system_.rt, nonlinear_quad_degree(config.r)),
      source_load_(system_.dg, nullptr, source_quad_degree(config.r)) {}

TimeStepState TimeStepper::initial_state() const {
  TimeStepState s;
  s.n = 0;
  s.t = 0.0;
  if (config_.exact) {
    auto [sigma, u] = initial_data(system_, *config_.exact);
    s.sigma = std::move(sigma);
    s.u = std::move(u);
  } else {
    s.sigma = RtField(system_.rt, 0.0);
    s.u = DgField(system_.dg, 0.0);
  }
  return s;
}

TimeStepState TimeStepper::advance(const TimeStepState& state) {
  return solve_step(system_, fact_, state, config_, nonlinear_, source_load_, source_);
}

TimeStepState step(const SaddleSystem& system, const Factorization& fact, const TimeStepState& state,
                   const RunConfig& config) {
  LoadAssembler nl(system.dg, system.rt, nonlinear_quad_degree(system.dg->degree()));
  LoadAssembler src(system.dg, nullptr, source_quad_degree(system.dg->degree()));
  return solve_step(system, fact, state, config, nl, src, pick_source(config));
}

RunResult run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  TimeStepper stepper(config);
  const long N = config.num_steps();
  RunResult res;
  StudyRecord& rec = res.record;
  rec.label = config.label;
  rec.M = config.M;
  rec.r = config.r;
  rec.tau = config.tau;
  rec.steps = N;

  TimeStepState s = stepper.initial_state();
  const SaddleSystem& sys = stepper.system();
  if (config.exact && config.exact->grad_u) {
    rec.projection_lp6_bound = lp_norm(s.sigma, 6) + lp_norm(s.u, 6);
  }
  if (config.record_history) res.history.push_back(s);
  if (config.vtk_stride > 0) write_snapshot(config, s);

  const bool flux = config.track_flux_error && config.exact && config.exact->grad_u;
  // the first mixed equation makes sigma = grad u
  SpaceTimeVector sigma_exact;
  if (config.exact && config.exact->grad_u) sigma_exact = config.exact->grad_u;
  double acc = 0.0;
  for (long n = 1; n <= N; ++n) {
    s = stepper.advance(s);
    rec.max_first_equation_residual = std::max(rec.max_first_equation_residual, first_equation_residual(sys, s.sigma, s.u));
    if (flux) {
      const double e = l2_error(s.sigma, sigma_exact, s.t);
      acc += config.tau * e * e;
    }
    if (config.record_history) res.history.push_back(s);
    if (config.vtk_stride > 0 && (n % config.vtk_stride == 0 || n == N)) write_snapshot(config, s);
  }
  // land exactly on T
  s.t = config.T;
  s.u.time = config.T;
  s.sigma.time = config.T;

  if (config.exact) {
    rec.err_u_L2 = l2_error(s.u, config.exact->u, config.T);
    if (sigma_exact) rec.err_sigma_L2 = l2_error(s.sigma, sigma_exact, config.T);
  }
  if (flux) rec.accumulated_flux_error = acc;
  record_embedding(rec, s.u, s.sigma, config.p_list);
  if (config.compute_embedding_chain) {
    res.chain = embedding_chain(s.u, s.sigma);
    rec.chain_dg_squared = res.chain->dg_squared;
    rec.chain_sigma_chi = res.chain->sigma_dot_chi;
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.final_state = std::move(s);
  return res;
}

ConvergenceReport embedding_study(const std::vector<RunConfig>& configs, std::span<const int> p_list) {
  std::vector<StudyRecord> records;
  for (RunConfig c : configs) {
    c.p_list.assign(p_list.begin(), p_list.end());
    c.compute_embedding_chain = true;
    RunResult r = run(c);
    if (!(r.record.max_first_equation_residual < 1e-9)) {
      throw SolvabilityError("embedding study: first mixed equation residual " +
                             std::to_string(r.record.max_first_equation_residual) + " too large");
    }
    records.push_back(std::move(r.record));
  }
  if (records.size() >= 2) {
    bool doubling = true;
    for (std::size_t i = 1; i < records.size(); ++i) doubling = doubling && records[i].M == 2 * records[i - 1].M;
    if (doubling) return convergence_orders(std::move(records));
  }
  ConvergenceReport rep;
  rep.records = std::move(records);
  rep.order_u.assign(rep.records.size(), std::nullopt);
  rep.order_sigma.assign(rep.records.size(), std::nullopt);
  return rep;
}

}  // namespace rtmix
