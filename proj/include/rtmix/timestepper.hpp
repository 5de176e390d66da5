#pragma once

#include "rtmix/analysis.hpp"
#include "rtmix/assembly.hpp"
#include "rtmix/projection.hpp"
#include "rtmix/solver.hpp"
#include "rtmix/spaces.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rtmix {

struct RunConfig {
  std::string label;
  double tau = 0.1;
  double T = 1.0;
  int r = 0;
  int M = 8;
  int dim = 2;
  NonlinearitySpec nonlinearity;
  /// Right-hand side g(x, t); when empty it is manufactured from `exact`.
  SpaceTimeScalar source;
  /// Exact solution: initial data, manufactured source and error reporting.
  std::optional<ExactSolutionSpec> exact;
  SolverBackend backend = SolverBackend::ldlt;

  bool record_history = false;
  bool track_flux_error = true;
  bool compute_embedding_chain = false;
  std::vector<int> p_list{2, 3, 4, 6};
  int vtk_stride = 0;  ///< 0 disables snapshots
  std::filesystem::path vtk_prefix;

  /// N = T / tau; throws InvalidArgument unless it is a positive integer.
  long num_steps() const;
};

struct TimeStepState {
  long n = 0;
  double t = 0.0;
  DgField u;
  RtField sigma;
};

/// g = u_t - laplace(u) + f(u, grad u), evaluated pointwise.
SpaceTimeScalar manufactured_source(const ExactSolutionSpec& exact, const NonlinearitySpec& f);

/// Assembled system, factorization and cached load assemblers for one
/// configuration. `advance` performs exactly one linear solve.
class TimeStepper {
 public:
  explicit TimeStepper(const RunConfig& config);

  const RunConfig& config() const { return config_; }
  const SaddleSystem& system() const { return system_; }
  const Factorization& factorization() const { return fact_; }
  const SpaceTimeScalar& source() const { return source_; }

  TimeStepState initial_state() const;
  TimeStepState advance(const TimeStepState& state);

 private:
  RunConfig config_;
  SaddleSystem system_;
  Factorization fact_;
  SpaceTimeScalar source_;
  LoadAssembler nonlinear_;
  LoadAssembler source_load_;
};

/// One step of the linearized backward Euler mixed scheme:
///   M sigma^n + B u^n = 0
///   -B^T sigma^n + D u^n / tau = D u^{n-1} / tau - F(u^{n-1}, sigma^{n-1}) + G(t_n)
/// Throws DivergenceError when the new coefficients are not finite.
TimeStepState step(const SaddleSystem& system, const Factorization& fact, const TimeStepState& state,
                   const RunConfig& config);

struct RunResult {
  TimeStepState final_state;
  StudyRecord record;
  std::vector<TimeStepState> history;  ///< filled when record_history is set
  std::optional<EmbeddingChain> chain;
};

RunResult run(const RunConfig& config);

}  // namespace rtmix
