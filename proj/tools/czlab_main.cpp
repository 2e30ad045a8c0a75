// Command line front end: runs the constant estimators over configured
// weight-pair families and writes CSV results plus a run manifest.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical degeneracy.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "czlab/czlab.hpp"

namespace fs = std::filesystem;
using namespace czlab;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = -1;
  int level = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file (key = value with sections)")
      ->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
  cmd->add_option("--threads", opts.threads, "worker threads (overrides config)");
  cmd->add_option("--level", opts.level, "grid resolution L (overrides config)");
}

ExperimentConfig resolve(const CommonOpts& opts) {
  ExperimentConfig cfg = ExperimentConfig::from_file(opts.config_path);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.threads > 0) cfg.threads = opts.threads;
  if (opts.level >= 0) cfg.level = opts.level;
  cfg.validate();
  return cfg;
}

void note_output(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

ConstantReport error_report(const std::string& name, const std::exception& e) {
  ConstantReport rep;
  rep.name = name;
  rep.value = std::numeric_limits<double>::quiet_NaN();
  rep.witness.note = std::string("error: ") + e.what();
  return rep;
}

int run_constants_cmd(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, ConstantReport>> rows;
  const Kernel kernel = cfg.kernel();
  for (const WeightPair& pair : make_weight_pairs(cfg)) {
    const Grid& grid = pair.sigma.grid();
    const CubeFamily family = cfg.family();
    const TruncationLadder ladder = cfg.make_ladder(grid);
    auto push = [&](const char* what, auto&& compute) {
      try {
        rows.emplace_back(pair.id, compute());
      } catch (const degenerate_error& e) {
        rows.emplace_back(pair.id, error_report(what, e));
      }
    };
    push("A2", [&] { return a2_alpha(pair.sigma, pair.omega, kernel.alpha(), family); });
    push("A2_one_tailed",
         [&] { return one_tailed_a2(pair.sigma, pair.omega, kernel.alpha(), family); });
    push("A2_one_tailed_dual",
         [&] { return one_tailed_a2_dual(pair.sigma, pair.omega, kernel.alpha(), family); });
    push("kappa_testing",
         [&] { return kappa_cube_testing(kernel, pair.sigma, pair.omega, cfg.kappa, family, ladder); });
    push("kappa_testing_dual", [&] {
      return kappa_cube_testing_dual(kernel, pair.sigma, pair.omega, cfg.kappa, family, ladder);
    });
    push("bict", [&] {
      return bict_constant(kernel, pair.sigma, pair.omega, family, ladder,
                           cfg.rwt_options(derive_seed(cfg.seed, pair.id)));
    });
  }
  write_constants_csv(fs::path(cfg.out_dir) / "constants.csv", rows);
  note_output(fs::path(cfg.out_dir) / "constants.csv");
  return 0;
}

int run_rwt_cmd(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, RwtResult>> rows;
  const Kernel kernel = cfg.kernel();
  for (const WeightPair& pair : make_weight_pairs(cfg)) {
    const TruncationLadder ladder = cfg.make_ladder(pair.sigma.grid());
    rows.emplace_back(pair.id,
                      restricted_weak_norm(kernel, pair.sigma, pair.omega, cfg.family(), ladder,
                                           cfg.rwt_options(derive_seed(cfg.seed, pair.id))));
  }
  write_rwt_csv(fs::path(cfg.out_dir) / "rwt.csv", rows);
  note_output(fs::path(cfg.out_dir) / "rwt.csv");
  return 0;
}

int run_goodlambda_cmd(const ExperimentConfig& cfg) {
  std::vector<GoodLambdaCsvRow> rows;
  const Kernel kernel = cfg.kernel();
  for (const WeightPair& pair : make_weight_pairs(cfg)) {
    const Grid& grid = pair.sigma.grid();
    const CubeFamily family = cfg.family();
    const TruncationLadder ladder = cfg.make_ladder(grid);
    GridFunction f = cfg.goodlambda_f == "ones" ? constant_function(grid, 1.0)
                                                : [&] {
                                                    std::vector<double> v(grid.cell_count(), 0.0);
                                                    for (std::size_t i = 0; i < grid.cell_count(); ++i)
                                                      if (grid.center(i)[0] <= grid.root().center[0])
                                                        v[i] = 1.0;
                                                    return GridFunction(grid, std::move(v));
                                                  }();
    std::optional<AInfinityReport> ainf;
    if (kernel.alpha() == 0.0)
      ainf = a_infinity_report(pair.omega, lebesgue_measure(grid.root(), grid.level()), family,
                               cfg.n_random_sets, derive_seed(cfg.seed, pair.id, 1));
    for (double beta : cfg.betas)
      rows.push_back({pair.id, beta,
                      good_lambda_verify(kernel, f, pair.sigma, pair.omega, beta, family, ladder,
                                         ainf ? &*ainf : nullptr)});
  }
  write_goodlambda_csv(fs::path(cfg.out_dir) / "goodlambda.csv", rows);
  note_output(fs::path(cfg.out_dir) / "goodlambda.csv");
  return 0;
}

int run_tptest_cmd(const ExperimentConfig& cfg) {
  std::ofstream os = open_output(fs::path(cfg.out_dir) / "tptest.csv");
  os << "pair,level,strong_norm,a2_one_tailed,a2_one_tailed_dual,testing,testing_dual,tp_rhs,"
        "strong_over_rhs,theta_sigma,theta_omega,kappa_flag_sigma,kappa_flag_omega,status\n";
  const Kernel kernel = cfg.kernel();
  for (const WeightPair& pair : make_weight_pairs(cfg)) {
    const Grid& grid = pair.sigma.grid();
    const CubeFamily family = cfg.family();
    const TruncationLadder ladder = cfg.make_ladder(grid);
    std::string status = "ok";
    double strong = std::numeric_limits<double>::quiet_NaN(), ot = strong, ot_dual = strong,
           testing = strong, testing_dual = strong, theta_s = strong, theta_w = strong;
    bool flag_s = false, flag_w = false;
    try {
      strong = strong_norm(kernel, pair.sigma, pair.omega, TruncationLadder::maximal(grid).widest());
      ot = one_tailed_a2(pair.sigma, pair.omega, kernel.alpha(), family).value;
      ot_dual = one_tailed_a2_dual(pair.sigma, pair.omega, kernel.alpha(), family).value;
      testing = kappa_cube_testing(kernel, pair.sigma, pair.omega, cfg.kappa, family, ladder).value;
      testing_dual =
          kappa_cube_testing_dual(kernel, pair.sigma, pair.omega, cfg.kappa, family, ladder).value;
      const DoublingStats ds = doubling_stats(pair.sigma, family);
      const DoublingStats dw = doubling_stats(pair.omega, family);
      theta_s = ds.theta;
      theta_w = dw.theta;
      flag_s = cfg.kappa > ds.theta + kernel.alpha() - grid.dim();
      flag_w = cfg.kappa > dw.theta + kernel.alpha() - grid.dim();
    } catch (const degenerate_error& e) {
      status = std::string("degenerate: ") + e.what();
    }
    const double rhs = std::sqrt(ot + ot_dual) + testing + testing_dual;
    os << csv_quote(pair.id) << "," << grid.level() << "," << format_full(strong) << ","
       << format_full(ot) << "," << format_full(ot_dual) << "," << format_full(testing) << ","
       << format_full(testing_dual) << "," << format_full(rhs) << ","
       << format_full(rhs > 0.0 ? strong / rhs : std::numeric_limits<double>::quiet_NaN()) << ","
       << format_full(theta_s) << "," << format_full(theta_w) << "," << (flag_s ? 1 : 0) << ","
       << (flag_w ? 1 : 0) << "," << csv_quote(status) << "\n";
  }
  note_output(fs::path(cfg.out_dir) / "tptest.csv");
  return 0;
}

int run_cancel_cmd(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, ConstantReport>> rows;
  const Kernel kernel = cfg.kernel();
  for (const WeightPair& pair : make_weight_pairs(cfg)) {
    const Grid& grid = pair.sigma.grid();
    CancellationSearch search;
    search.centers = {grid.root().center};
    for (int d : cfg.cancel_radius_denoms) search.radii.push_back(grid.root().side / d);
    for (int m : cfg.cancel_eps_cells) search.eps_ladder.push_back(m * grid.cell_width());
    search.poly_trials = cfg.poly_trials;
    search.seed = derive_seed(cfg.seed, pair.id, 2);
    try {
      rows.emplace_back(pair.id,
                        cancellation_constant(kernel, pair.sigma, pair.omega, cfg.kappa, search));
      rows.emplace_back(
          pair.id, cancellation_constant_dual(kernel, pair.sigma, pair.omega, cfg.kappa, search));
    } catch (const degenerate_error& e) {
      rows.emplace_back(pair.id, error_report("cancellation", e));
    }
  }
  write_constants_csv(fs::path(cfg.out_dir) / "cancellation.csv", rows);
  note_output(fs::path(cfg.out_dir) / "cancellation.csv");
  return 0;
}

int run_sweep_cmd(const ExperimentConfig& cfg) {
  const std::vector<TheoremCheckRow> rows = run_constants(cfg);
  write_theorem_csv(fs::path(cfg.out_dir) / "theorem_check.csv", rows);
  note_output(fs::path(cfg.out_dir) / "theorem_check.csv");
  return 0;
}

int run_refine_cmd(const ExperimentConfig& cfg, const std::vector<int>& levels_override) {
  const std::vector<int>& levels = levels_override.empty() ? cfg.refine_levels : levels_override;
  const std::vector<RefinementRow> rows = refinement_study(cfg, levels);
  write_refinement_csv(fs::path(cfg.out_dir) / "refinement.csv", rows);
  note_output(fs::path(cfg.out_dir) / "refinement.csv");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"czlab: two-weight constants for truncated singular integrals on grids"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version_string));

  CommonOpts opts;
  std::vector<int> refine_levels;
  CLI::App* constants = app.add_subcommand("constants", "Muckenhoupt / testing constants per pair");
  CLI::App* rwt = app.add_subcommand("rwt", "restricted weak type norm per pair");
  CLI::App* goodlambda = app.add_subcommand("goodlambda", "good-lambda distributional check");
  CLI::App* tptest = app.add_subcommand("tptest", "strong norm vs one-tailed + testing bound");
  CLI::App* cancel = app.add_subcommand("cancel", "polynomial cancellation constants");
  CLI::App* sweep = app.add_subcommand("sweep", "full theorem-check table over the pair family");
  CLI::App* refine = app.add_subcommand("refine", "constants vs resolution");
  for (CLI::App* cmd : {constants, rwt, goodlambda, tptest, cancel, sweep, refine})
    add_common(cmd, opts);
  refine->add_option("--levels", refine_levels, "resolutions to sweep (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 1;
  }

  try {
    const ExperimentConfig cfg = resolve(opts);
    int rc = 0;
    std::string name;
    if (constants->parsed()) { name = "constants"; rc = run_constants_cmd(cfg); }
    else if (rwt->parsed()) { name = "rwt"; rc = run_rwt_cmd(cfg); }
    else if (goodlambda->parsed()) { name = "goodlambda"; rc = run_goodlambda_cmd(cfg); }
    else if (tptest->parsed()) { name = "tptest"; rc = run_tptest_cmd(cfg); }
    else if (cancel->parsed()) { name = "cancel"; rc = run_cancel_cmd(cfg); }
    else if (sweep->parsed()) { name = "sweep"; rc = run_sweep_cmd(cfg); }
    else if (refine->parsed()) { name = "refine"; rc = run_refine_cmd(cfg, refine_levels); }
    write_manifest(cfg.out_dir, cfg, name);
    return rc;
  } catch (const invalid_input& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const degenerate_error& e) {
    std::cerr << "numerical degeneracy: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
