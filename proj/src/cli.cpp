#include "rtmix/cli.hpp"

#include "rtmix/errors.hpp"
#include "rtmix/problems.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace rtmix {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kKnownKeys = {
    "study.mode",      "study.dim",         "study.r",           "study.M_list",   "study.tau_rule",
    "study.tau",       "study.T",           "study.output",      "study.vtk_stride", "study.threads",
    "study.timing",    "study.p_list",      "problem.example",   "problem.solution", "problem.advection",
    "problem.cubic",   "problem.linear_shift", "problem.b"};

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  const auto e = s.find_last_not_of(ws);
  s.erase(e == std::string::npos ? 0 : e + 1);
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  // accept fractions such as 1/32
  const auto slash = v.find('/');
  if (slash != std::string::npos) {
    return to_double(key, trim(v.substr(0, slash))) / to_double(key, trim(v.substr(slash + 1)));
  }
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string fmt_tau(double tau) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", tau);
  return buf;
}

double coupled_tau(int M, int r) { return std::pow(1.0 / M, r + 1); }

bool is_numerical(const std::exception& e) {
  return dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const SolvabilityError*>(&e) ||
         dynamic_cast<const NumericalDegeneracy*>(&e);
}

}  // namespace

std::optional<StudyMode> parse_mode(const std::string& name) {
  if (name == "solve") return StudyMode::solve;
  if (name == "convergence") return StudyMode::convergence;
  if (name == "stability") return StudyMode::stability;
  if (name == "embedding") return StudyMode::embedding;
  return std::nullopt;
}

std::string mode_name(StudyMode mode) {
  switch (mode) {
    case StudyMode::solve: return "solve";
    case StudyMode::convergence: return "convergence";
    case StudyMode::stability: return "stability";
    case StudyMode::embedding: return "embedding";
  }
  return "solve";
}

StudyConfig parse_study_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' must be inside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!kKnownKeys.count(full)) throw ConfigError("unknown config key '" + full + "'");
      kv[full] = trim(value.data());
    }
  }
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  StudyConfig c;
  bool dim_given = false;
  if (auto v = get("study.mode")) {
    auto m = parse_mode(*v);
    if (!m) throw ConfigError("study.mode: unknown mode '" + *v + "' (solve, convergence, stability, embedding)");
    c.mode = *m;
  }
  if (auto v = get("problem.example")) c.example = *v;
  if (c.example != "allen_cahn_2d" && c.example != "combined_3d" && c.example != "custom") {
    throw ConfigError("problem.example: unknown example '" + c.example + "' (allen_cahn_2d, combined_3d, custom)");
  }
  if (auto v = get("study.dim")) {
    c.dim = to_int("study.dim", *v);
    dim_given = true;
  }
  if (!dim_given) c.dim = c.example == "combined_3d" ? 3 : 2;
  if (auto v = get("study.r")) c.r = to_int("study.r", *v);
  if (auto v = get("study.M_list")) {
    for (const auto& s : split_list(*v)) c.M_list.push_back(to_int("study.M_list", s));
  }
  if (auto v = get("study.tau_rule")) {
    if (*v == "coupled") {
      c.tau_rule = TauRule::coupled;
    } else if (*v == "fixed") {
      c.tau_rule = TauRule::fixed;
    } else {
      throw ConfigError("study.tau_rule: expected coupled or fixed, got '" + *v + "'");
    }
  }
  if (auto v = get("study.tau")) {
    for (const auto& s : split_list(*v)) c.tau_values.push_back(to_double("study.tau", s));
    if (!get("study.tau_rule")) c.tau_rule = TauRule::fixed;
  }
  if (auto v = get("study.T")) c.T = to_double("study.T", *v);
  if (auto v = get("study.output")) c.output_path = *v;
  if (auto v = get("study.vtk_stride")) c.vtk_stride = to_int("study.vtk_stride", *v);
  if (auto v = get("study.threads")) c.threads = to_int("study.threads", *v);
  else c.threads = default_threads();
  if (auto v = get("study.timing")) c.timing = to_bool("study.timing", *v);
  if (auto v = get("study.p_list")) {
    c.p_list.clear();
    for (const auto& s : split_list(*v)) c.p_list.push_back(to_int("study.p_list", s));
  }

  if (c.example == "allen_cahn_2d") {
    c.nonlinearity = allen_cahn_2d_nonlinearity();
  } else if (c.example == "combined_3d") {
    c.nonlinearity = combined_3d_nonlinearity();
  }
  if (auto v = get("problem.solution")) c.solution = *v;
  const bool custom = c.example == "custom";
  for (const char* k : {"problem.solution", "problem.advection", "problem.cubic", "problem.linear_shift", "problem.b"}) {
    if (!custom && get(k)) throw ConfigError(std::string(k) + " is only allowed with example = custom");
  }
  if (custom) {
    if (auto v = get("problem.advection")) c.nonlinearity.advection = to_bool("problem.advection", *v);
    if (auto v = get("problem.cubic")) c.nonlinearity.cubic = to_bool("problem.cubic", *v);
    if (auto v = get("problem.linear_shift")) c.nonlinearity.linear_shift = to_bool("problem.linear_shift", *v);
    if (auto v = get("problem.b")) {
      const auto parts = split_list(*v);
      c.nonlinearity.b.resize(static_cast<Eigen::Index>(parts.size()));
      for (std::size_t i = 0; i < parts.size(); ++i) c.nonlinearity.b[static_cast<Eigen::Index>(i)] = to_double("problem.b", parts[i]);
    }
  }
  return c;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  StudyConfig c = parse_study_config(in);
  validate(c);
  return c;
}

void validate(const StudyConfig& c) {
  if (c.dim != 2 && c.dim != 3) throw ConfigError("study.dim must be 2 or 3");
  require_supported_degree(c.dim, c.r);
  if (c.example == "allen_cahn_2d" && c.dim != 2) throw ConfigError("allen_cahn_2d is a 2D example");
  if (c.example == "combined_3d" && c.dim != 3) throw ConfigError("combined_3d is a 3D example");
  if (c.example == "custom") {
    if (c.solution.empty()) throw ConfigError("example = custom needs problem.solution");
    if (c.solution != "allen_cahn_2d" && c.solution != "combined_3d" && c.solution != "zero") {
      throw ConfigError("problem.solution: unknown solution '" + c.solution + "'");
    }
    if (c.solution == "allen_cahn_2d" && c.dim != 2) throw ConfigError("solution allen_cahn_2d needs dim = 2");
    if (c.solution == "combined_3d" && c.dim != 3) throw ConfigError("solution combined_3d needs dim = 3");
    if (c.nonlinearity.b.size() != 0 && c.nonlinearity.b.size() != c.dim) {
      throw ConfigError("problem.b must have " + std::to_string(c.dim) + " entries");
    }
  }
  if (c.M_list.empty()) throw ConfigError("study.M_list is required");
  for (int M : c.M_list) {
    if (M < 1) throw ConfigError("study.M_list entries must be positive");
  }
  for (std::size_t i = 1; i < c.M_list.size(); ++i) {
    if (c.M_list[i] <= c.M_list[i - 1]) throw ConfigError("study.M_list must be strictly increasing");
    if (c.mode == StudyMode::convergence && c.M_list[i] != 2 * c.M_list[i - 1]) {
      throw ConfigError("convergence mode needs M_list to double at every entry");
    }
  }
  if (c.mode == StudyMode::convergence && c.M_list.size() < 2) throw ConfigError("convergence mode needs at least two M values");
  if (c.mode == StudyMode::solve && c.M_list.size() != 1) throw ConfigError("solve mode takes exactly one M");
  if (c.tau_rule == TauRule::fixed) {
    if (c.tau_values.empty()) throw ConfigError("tau_rule = fixed needs study.tau");
    if (c.tau_values.size() > 1 && c.mode != StudyMode::stability) {
      throw ConfigError("several tau values are only allowed in stability mode");
    }
  } else if (!c.tau_values.empty()) {
    throw ConfigError("study.tau is ignored with tau_rule = coupled; remove it or set tau_rule = fixed");
  }
  if (c.mode == StudyMode::stability && c.tau_rule != TauRule::fixed) throw ConfigError("stability mode needs fixed tau");
  for (double tau : c.tau_values) {
    if (!(tau > 0.0)) throw ConfigError("study.tau must be positive");
  }
  if (!(c.T > 0.0)) throw ConfigError("study.T must be positive");
  if (c.vtk_stride < 0) throw ConfigError("study.vtk_stride must be non-negative");
  if (c.threads < 1) throw ConfigError("study.threads must be at least 1");
  for (int p : c.p_list) {
    if (p != 2 && p != 3 && p != 4 && p != 6) throw ConfigError("study.p_list entries must be 2, 3, 4 or 6");
  }
  // every (tau, M) pair must divide T
  for (const RunConfig& rc : expand_runs(c)) {
    try {
      (void)rc.num_steps();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string(e.what()) + " for M = " + std::to_string(rc.M));
    }
  }
}

std::vector<RunConfig> expand_runs(const StudyConfig& c) {
  std::vector<RunConfig> runs;
  const std::vector<double> taus = c.tau_rule == TauRule::fixed ? c.tau_values : std::vector<double>{0.0};
  const ExactSolutionSpec exact = solution_by_name(c.example == "custom" ? c.solution : c.example);
  for (double tau : taus) {
    for (int M : c.M_list) {
      RunConfig rc;
      rc.dim = c.dim;
      rc.r = c.r;
      rc.M = M;
      rc.T = c.T;
      rc.tau = c.tau_rule == TauRule::fixed ? tau : coupled_tau(M, c.r);
      rc.exact = exact;
      rc.nonlinearity = c.nonlinearity;
      rc.p_list = c.p_list;
      rc.compute_embedding_chain = c.mode == StudyMode::embedding;
      rc.label = c.example + "_M" + std::to_string(M) + "_tau" + fmt_tau(rc.tau);
      if (c.vtk_stride > 0) {
        rc.vtk_stride = c.vtk_stride;
        std::filesystem::path base = c.output_path.empty() ? std::filesystem::path("rtmix") : c.output_path;
        base.replace_extension();
        rc.vtk_prefix = base.string() + "_" + rc.label;
      }
      runs.push_back(std::move(rc));
    }
  }
  return runs;
}

std::vector<RunResult> execute_runs(const std::vector<RunConfig>& runs, int threads) {
  std::vector<std::optional<RunResult>> slots(runs.size());
  if (threads <= 1 || runs.size() <= 1) {
    for (std::size_t i = 0; i < runs.size(); ++i) slots[i] = run(runs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(runs.size());
    auto worker = [&] {
      for (std::size_t i = next++; i < runs.size(); i = next++) {
        try {
          slots[i] = run(runs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(threads), runs.size());
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<RunResult> out;
  out.reserve(runs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string format_csv(const StudyConfig& config, const std::vector<StudyRecord>& records) {
  std::ostringstream os;
  os << "M,tau,r,err_u_L2,err_sigma_L2,order_u,order_sigma,dg_norm,ratio_p2,ratio_p3,ratio_p4,ratio_p6,wall_time_s\n";
  // orders within runs of consecutive doubling M at the same tau rule
  std::vector<std::optional<double>> ou(records.size()), os_(records.size());
  for (std::size_t i = 1; i < records.size(); ++i) {
    const StudyRecord& a = records[i - 1];
    const StudyRecord& b = records[i];
    const bool same_group = config.tau_rule == TauRule::coupled || a.tau == b.tau;
    if (!same_group || b.M != 2 * a.M) continue;
    auto order = [](const std::optional<double>& x, const std::optional<double>& y) -> std::optional<double> {
      if (!x || !y || !(*x > 0.0) || !(*y > 0.0)) return std::nullopt;
      return std::log2(*x / *y);
    };
    ou[i] = order(a.err_u_L2, b.err_u_L2);
    os_[i] = order(a.err_sigma_L2, b.err_sigma_L2);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const StudyRecord& rec = records[i];
    auto ratio = [&](int p) -> std::string {
      auto it = rec.embed_ratio.find(p);
      return it == rec.embed_ratio.end() ? std::string() : fmt(it->second);
    };
    os << rec.M << ',' << fmt_tau(rec.tau) << ',' << rec.r << ',' << fmt(rec.err_u_L2) << ',' << fmt(rec.err_sigma_L2)
       << ',' << fmt(ou[i]) << ',' << fmt(os_[i]) << ',' << fmt(rec.dg_norm) << ',' << ratio(2) << ',' << ratio(3)
       << ',' << ratio(4) << ',' << ratio(6) << ',' << (config.timing ? fmt(rec.wall_time) : std::string()) << '\n';
  }
  return os.str();
}

int default_threads() {
  const char* v = std::getenv("RTMIX_THREADS");
  if (!v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  return (end != v && *end == '\0' && n >= 1 && n <= 1024) ? static_cast<int>(n) : 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed RT finite element solver for semilinear parabolic problems"};
  std::string config_path, mode, out_path;
  std::optional<int> threads, vtk_stride;
  app.add_option("--config", config_path, "INI study configuration")->required();
  app.add_option("--mode", mode, "solve | convergence | stability | embedding (overrides the file)");
  app.add_option("--out", out_path, "CSV output path (overrides the file; '-' for stdout)");
  app.add_option("--threads", threads, "independent runs executed concurrently (default: RTMIX_THREADS or 1)");
  app.add_option("--vtk-stride", vtk_stride, "write a VTK snapshot every n steps (0 disables)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  StudyConfig cfg;
  std::vector<RunConfig> runs;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
    cfg = parse_study_config(in);  // validated below, after flag overrides
    if (!mode.empty()) {
      auto m = parse_mode(mode);
      if (!m) throw ConfigError("--mode: unknown mode '" + mode + "'");
      cfg.mode = *m;
    }
    if (!out_path.empty()) cfg.output_path = out_path;
    if (threads) cfg.threads = *threads;
    if (vtk_stride) cfg.vtk_stride = *vtk_stride;
    validate(cfg);
    runs = expand_runs(cfg);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<RunResult> results;
  try {
    results = execute_runs(runs, cfg.threads);
  } catch (const std::exception& e) {
    if (is_numerical(e)) {
      err << "numerical failure: " << e.what() << "\n";
      return kExitNumerical;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<StudyRecord> records;
  for (const auto& r : results) records.push_back(r.record);
  const std::string csv = format_csv(cfg, records);
  if (cfg.output_path.empty() || cfg.output_path == "-") {
    out << csv;
  } else {
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) {
      err << "config error: cannot write '" << cfg.output_path.string() << "'\n";
      return kExitConfig;
    }
    f << csv;
    out << "wrote " << records.size() << " rows to " << cfg.output_path.string() << "\n";
  }
  if (cfg.mode == StudyMode::embedding) {
    for (const auto& r : results) {
      const auto& c = *r.chain;
      char buf[256];
      std::snprintf(buf, sizeof buf, "M=%d r=%d  ||u_h||_DG^2=%.12e  (sigma_h,chi_h)=%.12e  slack=%.3e\n", r.record.M,
                    r.record.r, c.dg_squared, c.sigma_dot_chi, c.sigma_dot_chi - c.dg_squared);
      err << buf;
    }
  } else if (cfg.mode == StudyMode::solve) {
    const auto& rec = results.front().record;
    err << "steps=" << rec.steps << " accumulated_flux_error=" << fmt(rec.accumulated_flux_error)
        << " projection_L6_bound=" << fmt(rec.projection_lp6_bound) << "\n";
  }
  return kExitOk;
}

}  // namespace rtmix
