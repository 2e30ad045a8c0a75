#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "czlab/norms.hpp"

namespace czlab {

// ---------------------------------------------------------------------------
// CSV helpers. UTF-8, header row, '.' decimal separator, 17 significant
// digits. Text fields are quoted.

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += "\"";
  return out;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw invalid_input("cannot open output file: " + path.string());
  return os;
}

// ---------------------------------------------------------------------------
// Experiment configuration: flat key = value text with [section] headers,
// '#' comments. Unknown keys are rejected so typos cannot silently change a
// run. The resolved configuration doubles as the run manifest.

struct ExperimentConfig {
  std::string name = "experiment";
  std::string kernel_name = "hilbert";
  double alpha = 0.0;
  int dimension = 1;
  std::vector<double> root_center{0.0};
  double root_side = 2.0;
  int level = 8;
  int family_max_level = -1;  // -1: same as level
  bool family_shifts = true;
  int kappa = 2;
  std::string ladder_kind = "maximal";  // maximal | nested | full
  int starts = 4;
  int max_iters = 50;
  std::uint64_t seed = 1;
  int threads = 1;
  int n_random_sets = 8;
  int poly_trials = 8;

  std::string weight_type = "power";  // power | files
  std::vector<double> power_exponents{-0.5, 0.0, 0.5, 1.0};
  std::string sigma_file;
  std::string omega_file;

  std::vector<double> betas{0.125, 0.0625};
  std::string goodlambda_f = "left_half";  // left_half | ones

  std::vector<int> cancel_radius_denoms{2, 4};
  std::vector<int> cancel_eps_cells{1, 4};

  std::vector<int> refine_levels{6, 7, 8};

  std::string out_dir = "out";

  // ---- derived objects -----------------------------------------------

  Cube root() const {
    if (static_cast<int>(root_center.size()) != dimension)
      throw invalid_input("config: root_center must have 'dimension' coordinates");
    return Cube(root_center, root_side);
  }

  Grid grid(int level_override = -1) const {
    return Grid(root(), level_override >= 0 ? level_override : level);
  }

  CubeFamily family(int level_override = -1) const {
    const int l = level_override >= 0 ? level_override : level;
    const int fl = family_max_level >= 0 ? std::min(family_max_level, l) : l;
    return CubeFamily(root(), fl, family_shifts);
  }

  Kernel kernel() const {
    if (kernel_name == "fractional") return Kernel::fractional(alpha, dimension);
    Kernel k = Kernel::parse(kernel_name, dimension);
    return k;
  }

  TruncationLadder make_ladder(const Grid& g) const {
    if (ladder_kind == "maximal") return TruncationLadder::maximal(g);
    if (ladder_kind == "nested") return TruncationLadder::nested(g);
    if (ladder_kind == "full") return TruncationLadder::full(g);
    throw invalid_input("config: ladder must be maximal | nested | full");
  }

  RwtOptions rwt_options(std::uint64_t task_seed) const {
    RwtOptions opt;
    opt.starts = starts;
    opt.max_iters = max_iters;
    opt.seed = task_seed;
    opt.threads = 1;  // parallelism lives at the weight-pair level
    return opt;
  }

  void validate() const {
    if (dimension < 1 || dimension > max_dimension) throw invalid_input("config: bad dimension");
    if (level < 0 || level * dimension > 26) throw invalid_input("config: bad level");
    if (!(root_side > 0.0)) throw invalid_input("config: root_side must be positive");
    if (kappa < 1) throw invalid_input("config: kappa must be >= 1");
    if (starts < 1) throw invalid_input("config: starts must be >= 1");
    if (max_iters < 1) throw invalid_input("config: max_iters must be >= 1");
    if (threads < 1) throw invalid_input("config: threads must be >= 1");
    if (weight_type != "power" && weight_type != "files")
      throw invalid_input("config: weights type must be power | files");
    if (weight_type == "files" && (sigma_file.empty() || omega_file.empty()))
      throw invalid_input("config: weights type files needs sigma and omega paths");
    if (goodlambda_f != "left_half" && goodlambda_f != "ones")
      throw invalid_input("config: goodlambda f must be left_half | ones");
    for (double b : betas)
      if (!(b > 0.0) || !(b < 1.0)) throw invalid_input("config: betas must lie in (0,1)");
    if (refine_levels.size() < 2)
      throw invalid_input("config: refine levels needs at least two entries");
    kernel();       // validates the kernel selection
    root();         // validates geometry
    make_ladder(Grid(root(), std::min(level, 4)));
  }

  /// Canonical key = value dump; identical configs produce identical text.
  std::string manifest() const {
    std::ostringstream os;
    auto list_d = [](const std::vector<double>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_full(v[i]);
      return s;
    };
    auto list_i = [](const std::vector<int>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
      return s;
    };
    os << "czlab_version = " << version_string << "\n";
    os << "alpha = " << format_full(alpha) << "\n";
    os << "betas = " << list_d(betas) << "\n";
    os << "cancel_eps_cells = " << list_i(cancel_eps_cells) << "\n";
    os << "cancel_radius_denoms = " << list_i(cancel_radius_denoms) << "\n";
    os << "dimension = " << dimension << "\n";
    os << "family_max_level = " << family_max_level << "\n";
    os << "family_shifts = " << (family_shifts ? "on" : "off") << "\n";
    os << "goodlambda_f = " << goodlambda_f << "\n";
    os << "kappa = " << kappa << "\n";
    os << "kernel = " << kernel_name << "\n";
    os << "ladder = " << ladder_kind << "\n";
    os << "level = " << level << "\n";
    os << "max_iters = " << max_iters << "\n";
    os << "n_random_sets = " << n_random_sets << "\n";
    os << "name = " << name << "\n";
    os << "omega_file = " << omega_file << "\n";
    os << "poly_trials = " << poly_trials << "\n";
    os << "power_exponents = " << list_d(power_exponents) << "\n";
    os << "refine_levels = " << list_i(refine_levels) << "\n";
    os << "root_center = " << list_d(root_center) << "\n";
    os << "root_side = " << format_full(root_side) << "\n";
    os << "seed = " << seed << "\n";
    os << "sigma_file = " << sigma_file << "\n";
    os << "starts = " << starts << "\n";
    os << "threads = " << threads << "\n";
    os << "weights = " << weight_type << "\n";
    return os.str();
  }

  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw invalid_input("config file not found: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return from_text(buf.str());
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& key) {
  std::istringstream is(s);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  if (out.empty() || !is.eof())
    throw invalid_input("config: cannot parse numbers for '" + key + "'");
  return out;
}

inline std::vector<int> parse_ints(const std::string& s, const std::string& key) {
  std::istringstream is(s);
  std::vector<int> out;
  int v;
  while (is >> v) out.push_back(v);
  if (out.empty() || !is.eof()) throw invalid_input("config: cannot parse integers for '" + key + "'");
  return out;
}

inline bool parse_flag(const std::string& s, const std::string& key) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw invalid_input("config: '" + key + "' must be on/off");
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw invalid_input("config line " + std::to_string(line_no) + ": bad section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_input("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = section + "." + detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    if (key == "experiment.name") cfg.name = value;
    else if (key == "experiment.kernel") cfg.kernel_name = value;
    else if (key == "experiment.alpha") cfg.alpha = detail::parse_doubles(value, key)[0];
    else if (key == "experiment.dimension") cfg.dimension = detail::parse_ints(value, key)[0];
    else if (key == "experiment.root_center") cfg.root_center = detail::parse_doubles(value, key);
    else if (key == "experiment.root_side") cfg.root_side = detail::parse_doubles(value, key)[0];
    else if (key == "experiment.level") cfg.level = detail::parse_ints(value, key)[0];
    else if (key == "experiment.family_max_level")
      cfg.family_max_level = detail::parse_ints(value, key)[0];
    else if (key == "experiment.family_shifts") cfg.family_shifts = detail::parse_flag(value, key);
    else if (key == "experiment.kappa") cfg.kappa = detail::parse_ints(value, key)[0];
    else if (key == "experiment.ladder") cfg.ladder_kind = value;
    else if (key == "experiment.starts") cfg.starts = detail::parse_ints(value, key)[0];
    else if (key == "experiment.max_iters") cfg.max_iters = detail::parse_ints(value, key)[0];
    else if (key == "experiment.seed")
      cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "experiment.threads") cfg.threads = detail::parse_ints(value, key)[0];
    else if (key == "experiment.n_random_sets")
      cfg.n_random_sets = detail::parse_ints(value, key)[0];
    else if (key == "experiment.poly_trials") cfg.poly_trials = detail::parse_ints(value, key)[0];
    else if (key == "experiment.out") cfg.out_dir = value;
    else if (key == "weights.type") cfg.weight_type = value;
    else if (key == "weights.exponents") cfg.power_exponents = detail::parse_doubles(value, key);
    else if (key == "weights.sigma") cfg.sigma_file = value;
    else if (key == "weights.omega") cfg.omega_file = value;
    else if (key == "goodlambda.betas") cfg.betas = detail::parse_doubles(value, key);
    else if (key == "goodlambda.f") cfg.goodlambda_f = value;
    else if (key == "cancel.radius_denoms")
      cfg.cancel_radius_denoms = detail::parse_ints(value, key);
    else if (key == "cancel.eps_cells") cfg.cancel_eps_cells = detail::parse_ints(value, key);
    else if (key == "refine.levels") cfg.refine_levels = detail::parse_ints(value, key);
    else
      throw invalid_input("config line " + std::to_string(line_no) + ": unknown key '" + key +
                          "'");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Power weight pairs sigma = |x|^a dx, omega = |x|^b dx: the canonical
// doubling / A_infinity test family. Cells whose closure contains the
// origin get the exact integral (closed form on the line, refined
// quadrature in higher dimension); everywhere else the midpoint rule.

namespace detail {

inline double power_density_refined(double a, const Cube& cell, int depth) {
  bool touches_origin = true;
  for (int ax = 0; ax < cell.dim(); ++ax)
    if (cell.lo(ax) > 0.0 || cell.hi(ax) < 0.0) touches_origin = false;
  auto radial = [&](std::span<const double> p) {
    double s = 0.0;
    for (double c : p) s += c * c;
    return std::sqrt(s);
  };
  const double r_center = radial(cell.center);
  if (!touches_origin || depth == 0) {
    if (r_center == 0.0) {
      // polar bound on the enclosing ball; reached only at the recursion
      // floor where the contribution is negligible
      const int n = cell.dim();
      const double r = 0.5 * cell.side * std::sqrt(static_cast<double>(n));
      const double surface = n == 1 ? 2.0 : (n == 2 ? 6.283185307179586 : 12.566370614359172);
      return surface * std::pow(r, n + a) / (n + a);
    }
    return std::pow(r_center, a) * cell.volume();
  }
  double sum = 0.0;
  for (const Cube& sub : cell_partition(cell, 1)) sum += power_density_refined(a, sub, depth - 1);
  return sum;
}

}  // namespace detail

inline GridMeasure power_weight(double a, const Cube& root, int level) {
  const int n = root.dim();
  if (!(a > -static_cast<double>(n)))
    throw invalid_input("power_weight: exponent must exceed -n for local integrability");
  Grid g(root, level);
  std::vector<double> mass(g.cell_count());
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const Cube cell = g.cell_cube(i);
    bool touches_origin = true;
    for (int ax = 0; ax < n; ++ax)
      if (cell.lo(ax) > 0.0 || cell.hi(ax) < 0.0) touches_origin = false;
    if (touches_origin) {
      if (n == 1) {
        auto antideriv = [&](double t) { return std::pow(t, a + 1.0) / (a + 1.0); };
        mass[i] = antideriv(std::max(0.0, cell.hi(0))) + antideriv(std::max(0.0, -cell.lo(0)));
      } else {
        mass[i] = detail::power_density_refined(a, cell, 10);
      }
    } else {
      mass[i] = std::pow(euclidean_distance(cell.center, std::vector<double>(n, 0.0)), a) *
                cell.volume();
    }
  }
  return GridMeasure(std::move(g), std::move(mass));
}

inline std::pair<GridMeasure, GridMeasure> power_weight_pair(double a, double b, const Cube& root,
                                                             int level) {
  return {power_weight(a, root, level), power_weight(b, root, level)};
}

struct WeightPair {
  std::string id;
  GridMeasure sigma;
  GridMeasure omega;
};

inline std::vector<WeightPair> make_weight_pairs(const ExperimentConfig& cfg,
                                                 int level_override = -1) {
  const int level = level_override >= 0 ? level_override : cfg.level;
  std::vector<WeightPair> pairs;
  if (cfg.weight_type == "power") {
    for (double a : cfg.power_exponents)
      for (double b : cfg.power_exponents) {
        char id[64];
        std::snprintf(id, sizeof(id), "a%+.6g_b%+.6g", a, b);
        auto [sig, omg] = power_weight_pair(a, b, cfg.root(), level);
        pairs.push_back({id, std::move(sig), std::move(omg)});
      }
    return pairs;
  }
  GridMeasure sig = load_measure_file(cfg.sigma_file);
  GridMeasure omg = load_measure_file(cfg.omega_file);
  if (!sig.grid().same_layout(omg.grid()))
    throw invalid_input("weight files disagree on root or resolution");
  pairs.push_back({"files", std::move(sig), std::move(omg)});
  return pairs;
}

// ---------------------------------------------------------------------------
// Theorem check rows: every constant the equivalences compare, one row per
// weight pair, plus the doubling-exponent hypothesis flags
// kappa > theta + alpha - n for each weight.

struct TheoremCheckRow {
  std::string pair_id;
  int level = 0;
  double a2 = 0.0;
  double a2_one_tailed = 0.0;
  double a2_one_tailed_dual = 0.0;
  double rwt = 0.0;
  double rwt_sq_over_a2 = 0.0;
  double bict = 0.0;
  double strong = 0.0;
  double testing = 0.0;
  double testing_dual = 0.0;
  double goodlambda_cemp = 0.0;
  double theta_sigma = 0.0;
  double theta_omega = 0.0;
  bool kappa_flag_sigma = false;
  bool kappa_flag_omega = false;
  std::string status = "ok";
};

inline TheoremCheckRow run_constants_for_pair(const ExperimentConfig& cfg, const WeightPair& pair,
                                              int level_override = -1) {
  TheoremCheckRow row;
  row.pair_id = pair.id;
  row.level = pair.sigma.grid().level();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    const Kernel kernel = cfg.kernel();
    const double alpha = kernel.alpha();
    const Grid& grid = pair.sigma.grid();
    const CubeFamily family = cfg.family(level_override >= 0 ? level_override : grid.level());
    const TruncationLadder ladder = cfg.make_ladder(grid);
    const int n = grid.dim();

    row.a2 = a2_alpha(pair.sigma, pair.omega, alpha, family).value;
    row.a2_one_tailed = one_tailed_a2(pair.sigma, pair.omega, alpha, family).value;
    row.a2_one_tailed_dual = one_tailed_a2_dual(pair.sigma, pair.omega, alpha, family).value;

    const RwtBictPair rb = rwt_and_bict(kernel, pair.sigma, pair.omega, family, ladder,
                                        cfg.rwt_options(derive_seed(cfg.seed, pair.id)));
    row.rwt = rb.rwt.value;
    row.bict = rb.bict.value;
    row.rwt_sq_over_a2 = row.a2 > 0.0 ? sq(row.rwt) / row.a2 : nan;

    row.strong =
        strong_norm(kernel, pair.sigma, pair.omega, TruncationLadder::maximal(grid).widest());
    row.testing = kappa_cube_testing(kernel, pair.sigma, pair.omega, cfg.kappa, family, ladder).value;
    row.testing_dual =
        kappa_cube_testing_dual(kernel, pair.sigma, pair.omega, cfg.kappa, family, ladder).value;

    const DoublingStats ds = doubling_stats(pair.sigma, family);
    const DoublingStats dw = doubling_stats(pair.omega, family);
    row.theta_sigma = ds.theta;
    row.theta_omega = dw.theta;
    row.kappa_flag_sigma = cfg.kappa > ds.theta + alpha - n;
    row.kappa_flag_omega = cfg.kappa > dw.theta + alpha - n;

    const GridFunction f = cfg.goodlambda_f == "ones"
                               ? constant_function(grid, 1.0)
                               : [&] {
                                   std::vector<double> v(grid.cell_count(), 0.0);
                                   for (std::size_t i = 0; i < grid.cell_count(); ++i)
                                     if (grid.center(i)[0] <= grid.root().center[0]) v[i] = 1.0;
                                   return GridFunction(grid, std::move(v));
                                 }();
    if (alpha == 0.0) {
      const AInfinityReport ainf =
          a_infinity_report(pair.omega, lebesgue_measure(grid.root(), grid.level()), family,
                            cfg.n_random_sets, derive_seed(cfg.seed, pair.id, 1));
      row.goodlambda_cemp =
          good_lambda_verify(kernel, f, pair.sigma, pair.omega, cfg.betas.at(0), family, ladder,
                             &ainf)
              .c_emp;
    } else {
      row.goodlambda_cemp = good_lambda_verify(kernel, f, pair.sigma, pair.omega, cfg.betas.at(0),
                                               family, ladder, nullptr)
                                .c_emp;
    }
  } catch (const degenerate_error& e) {
    row.status = std::string("degenerate: ") + e.what();
    row.a2 = row.a2_one_tailed = row.a2_one_tailed_dual = row.rwt = row.rwt_sq_over_a2 = nan;
    row.bict = row.strong = row.testing = row.testing_dual = row.goodlambda_cemp = nan;
  }
  return row;
}

/// Every column for every weight pair, computed in parallel over pairs and
/// gathered in pair order so the output is scheduling independent.
inline std::vector<TheoremCheckRow> run_constants(const ExperimentConfig& cfg,
                                                  int level_override = -1) {
  const std::vector<WeightPair> pairs = make_weight_pairs(cfg, level_override);
  std::vector<TheoremCheckRow> rows(pairs.size());
  detail::parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
    rows[i] = run_constants_for_pair(cfg, pairs[i], level_override);
  });
  return rows;
}

inline void write_theorem_csv(const std::filesystem::path& path,
                              std::span<const TheoremCheckRow> rows) {
  std::ofstream os = open_output(path);
  os << "pair,level,a2,a2_one_tailed,a2_one_tailed_dual,rwt,rwt_sq_over_a2,bict,strong_norm,"
        "testing,testing_dual,goodlambda_cemp,theta_sigma,theta_omega,kappa_flag_sigma,"
        "kappa_flag_omega,status\n";
  for (const TheoremCheckRow& r : rows) {
    os << csv_quote(r.pair_id) << "," << r.level << "," << format_full(r.a2) << ","
       << format_full(r.a2_one_tailed) << "," << format_full(r.a2_one_tailed_dual) << ","
       << format_full(r.rwt) << "," << format_full(r.rwt_sq_over_a2) << ","
       << format_full(r.bict) << "," << format_full(r.strong) << "," << format_full(r.testing)
       << "," << format_full(r.testing_dual) << "," << format_full(r.goodlambda_cemp) << ","
       << format_full(r.theta_sigma) << "," << format_full(r.theta_omega) << ","
       << (r.kappa_flag_sigma ? 1 : 0) << "," << (r.kappa_flag_omega ? 1 : 0) << ","
       << csv_quote(r.status) << "\n";
  }
}

inline void write_constants_csv(const std::filesystem::path& path,
                                std::span<const std::pair<std::string, ConstantReport>> rows) {
  std::ofstream os = open_output(path);
  os << "pair,name,value,alpha,kappa,L,witness_description\n";
  for (const auto& [pair_id, rep] : rows) {
    os << csv_quote(pair_id) << "," << csv_quote(rep.name) << "," << format_full(rep.value) << ","
       << format_full(rep.alpha) << "," << rep.kappa << "," << rep.level << ","
       << csv_quote(rep.witness.describe()) << "\n";
  }
}

inline void write_rwt_csv(const std::filesystem::path& path,
                          std::span<const std::pair<std::string, RwtResult>> rows) {
  std::ofstream os = open_output(path);
  os << "pair,value,Q,e_cells,f_cells,iterations\n";
  for (const auto& [pair_id, r] : rows) {
    os << csv_quote(pair_id) << "," << format_full(r.value) << ","
       << csv_quote(r.witness_q.describe()) << "," << r.e_cells.size() << "," << r.f_cells.size()
       << "," << r.iterations << "\n";
  }
}

struct GoodLambdaCsvRow {
  std::string pair_id;
  double beta;
  GoodLambdaResult result;
};

inline void write_goodlambda_csv(const std::filesystem::path& path,
                                 std::span<const GoodLambdaCsvRow> rows) {
  std::ofstream os = open_output(path);
  os << "pair,beta,variant,lambda,lhs,rhs,ratio\n";
  for (const GoodLambdaCsvRow& row : rows) {
    const char* variant = row.result.fractional_variant ? "fractional" : "classical";
    for (std::size_t k = 0; k < row.result.lambdas.size(); ++k) {
      const double rhs = row.result.rhs[k];
      const double factor =
          row.result.fractional_variant ? 1.0 / row.beta : std::pow(row.beta, row.result.epsilon);
      const double ratio =
          rhs > 0.0 ? row.result.lhs[k] / (factor * rhs) : std::numeric_limits<double>::quiet_NaN();
      os << csv_quote(row.pair_id) << "," << format_full(row.beta) << "," << variant << ","
         << format_full(row.result.lambdas[k]) << "," << format_full(row.result.lhs[k]) << ","
         << format_full(rhs) << "," << format_full(ratio) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Refinement study: recompute the headline constants over a list of grid
// resolutions and report the relative change between successive levels.

struct RefinementRow {
  std::string pair_id;
  std::string constant;
  int level = 0;
  double value = 0.0;
  double rel_change = std::numeric_limits<double>::quiet_NaN();  // vs previous level
};

inline std::vector<RefinementRow> refinement_study(const ExperimentConfig& cfg,
                                                   std::span<const int> levels) {
  if (levels.size() < 2) throw invalid_input("refinement_study: need at least two levels");
  std::vector<RefinementRow> rows;
  std::map<std::pair<std::string, std::string>, double> previous;
  for (int level : levels) {
    const std::vector<TheoremCheckRow> checks = run_constants(cfg, level);
    for (const TheoremCheckRow& c : checks) {
      auto emit = [&](const std::string& constant, double value) {
        RefinementRow r;
        r.pair_id = c.pair_id;
        r.constant = constant;
        r.level = level;
        r.value = value;
        const auto key = std::make_pair(c.pair_id, constant);
        if (auto it = previous.find(key); it != previous.end() && it->second != 0.0)
          r.rel_change = std::abs(value - it->second) / std::abs(it->second);
        previous[key] = value;
        rows.push_back(std::move(r));
      };
      emit("a2", c.a2);
      emit("a2_one_tailed", c.a2_one_tailed);
      emit("a2_one_tailed_dual", c.a2_one_tailed_dual);
      emit("rwt", c.rwt);
      emit("bict", c.bict);
      emit("strong_norm", c.strong);
      emit("testing", c.testing);
      emit("testing_dual", c.testing_dual);
    }
  }
  return rows;
}

inline void write_refinement_csv(const std::filesystem::path& path,
                                 std::span<const RefinementRow> rows) {
  std::ofstream os = open_output(path);
  os << "pair,constant,level,value,rel_change\n";
  for (const RefinementRow& r : rows)
    os << csv_quote(r.pair_id) << "," << csv_quote(r.constant) << "," << r.level << ","
       << format_full(r.value) << "," << format_full(r.rel_change) << "\n";
}

inline void write_manifest(const std::filesystem::path& out_dir, const ExperimentConfig& cfg,
                           const std::string& subcommand) {
  std::ofstream os = open_output(out_dir / "run_manifest.txt");
  os << "subcommand = " << subcommand << "\n" << cfg.manifest();
}

}  // namespace czlab
