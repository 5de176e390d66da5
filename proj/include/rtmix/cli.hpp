#pragma once

#include "rtmix/analysis.hpp"
#include "rtmix/timestepper.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rtmix {

enum class StudyMode { solve, convergence, stability, embedding };
enum class TauRule { coupled, fixed };

/// Parsed study configuration. See README for the file format.
struct StudyConfig {
  StudyMode mode = StudyMode::solve;
  int dim = 2;
  int r = 0;
  std::vector<int> M_list;
  TauRule tau_rule = TauRule::coupled;
  std::vector<double> tau_values;  ///< fixed rule; several values only in stability mode
  double T = 1.0;
  std::string example = "allen_cahn_2d";
  std::string solution;  ///< custom example: allen_cahn_2d, combined_3d or zero
  NonlinearitySpec nonlinearity;
  std::vector<int> p_list{2, 3, 4, 6};
  std::filesystem::path output_path;
  int vtk_stride = 0;
  int threads = 1;
  bool timing = false;
};

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

std::optional<StudyMode> parse_mode(const std::string& name);
std::string mode_name(StudyMode mode);

/// Parses INI text; throws ConfigError on syntax errors, unknown keys and
/// malformed values. Does not validate; call validate() before use.
StudyConfig parse_study_config(std::istream& in);
/// Reads, parses and validates a config file.
StudyConfig load_study_config(const std::filesystem::path& path);

/// Checks mode-specific requirements; throws ConfigError, or
/// UnsupportedFeature for an unsupported (dim, r).
void validate(const StudyConfig& config);

/// One RunConfig per (tau, M) pair, tau-major.
std::vector<RunConfig> expand_runs(const StudyConfig& config);

/// Runs every configuration; with threads > 1 independent runs execute
/// concurrently. Results keep the input order.
std::vector<RunResult> execute_runs(const std::vector<RunConfig>& runs, int threads);

/// CSV table in the fixed schema. Orders are computed within each group of
/// rows sharing tau_rule/tau when M doubles between consecutive rows.
std::string format_csv(const StudyConfig& config, const std::vector<StudyRecord>& records);

/// Default thread count from RTMIX_THREADS (1 when unset or invalid).
int default_threads();

/// Entry point used by the executable; returns one of the exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rtmix
