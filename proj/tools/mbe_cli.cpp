// Command-line front end: simulate, sweep, theorycheck, plot.
//
// Exit status: 0 success, 2 configuration error, 3 runtime or numeric error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "mbe/mbe.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

/// Experiment flags shared by simulate and sweep. Values are kept as text and
/// applied on top of the config file through the same setter as file lines.
struct ExperimentFlags {
  std::string config;
  std::string out_dir = ".";
  std::map<std::string, std::string> values;
  std::vector<std::string> algs;
  std::map<std::string, CLI::Option*> options;
  CLI::Option* algs_opt = nullptr;
  CLI::Option* log_x = nullptr;
  CLI::Option* log_y = nullptr;
  bool plot = false;

  void attach(CLI::App* app, bool sweep) {
    app->add_option("--config", config, "experiment config file (flags override its values)");
    app->add_option("--out-dir", out_dir, "directory for default output paths")->capture_default_str();
    const std::vector<std::pair<std::string, std::string>> keys = {
        {"id", "experiment id"},
        {"env", "environment spec, e.g. mab:bernoulli:K=10:alpha=1"},
        {"T", "horizon"},
        {"runs", "independent runs (fresh instance per run)"},
        {"seed", "master seed (MBE_SEED overrides)"},
        {"stride", "checkpoint stride (default T/200)"},
        {"threads", "worker threads (0 = all cores)"},
        {"accounting", "expected | realized"},
        {"raw", "raw CSV path"},
        {"aggregate", "aggregate CSV path"},
        {"svg", "SVG plot path"},
        {"meta", "metadata / config echo path"},
        {"title", "plot title"},
    };
    for (const auto& [k, help] : keys) options[k] = app->add_option("--" + k, values[k], help);
    if (sweep) options["grid"] = app->add_option("--grid", values["grid"], "comma-separated grid (default 2^-4..2^2)");
    algs_opt = app->add_option("--alg", algs, "algorithm spec (repeatable)");
    log_x = app->add_flag("--log-x", "logarithmic x axis");
    log_y = app->add_flag("--log-y", "logarithmic y axis");
    app->add_flag("--plot", plot, "also write an SVG plot");
  }

  mbe::RunConfig resolve() const {
    mbe::RunConfig cfg;
    if (!config.empty()) cfg = mbe::parse_config_file(config);
    for (const auto& [k, opt] : options) {
      if (opt->count() == 0) continue;
      const auto setting = mbe::flag_setting(k);
      mbe::apply_setting(cfg, setting->first, setting->second, values.at(k), "--" + k);
    }
    if (algs_opt->count() > 0) {
      cfg.sim.algorithms.clear();
      for (const auto& a : algs) mbe::apply_setting(cfg, "algorithms", "alg", a, "--alg");
    }
    if (log_x->count() > 0) cfg.plot.log_x = true;
    if (log_y->count() > 0) cfg.plot.log_y = true;
    if (const char* env_seed = std::getenv("MBE_SEED"); env_seed && *env_seed) {
      mbe::apply_setting(cfg, "experiment", "seed", env_seed, "MBE_SEED");
    }
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    const std::string id = cfg.sim.experiment_id;
    if (cfg.sim.raw_csv.empty()) cfg.sim.raw_csv = (dir / (id + "_raw.csv")).string();
    if (cfg.sim.aggregate_csv.empty()) cfg.sim.aggregate_csv = (dir / (id + "_aggregate.csv")).string();
    if (cfg.sim.svg.empty() && plot) cfg.sim.svg = (dir / (id + ".svg")).string();
    if (cfg.meta_path.empty()) cfg.meta_path = (dir / (id + "_meta.ini")).string();
    return cfg;
  }
};

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
}

void write_metadata(const mbe::RunConfig& cfg, const std::string& command, const std::string& status,
                    const std::vector<std::string>& notices) {
  std::vector<std::string> comments = {
      std::string("mbe ") + mbe::kVersion + " " + command,
      "status: " + status,
      "master seed: " + std::to_string(cfg.sim.master_seed),
      "environment instances are redrawn for every run",
      "rerun with: mbe " + command + " --config <this file>",
  };
  for (const auto& n : notices) comments.push_back("notice: " + n);
  ensure_parent(cfg.meta_path);
  std::ofstream out(cfg.meta_path, std::ios::binary | std::ios::trunc);
  if (!out) throw mbe::IoError("cannot write metadata to '" + cfg.meta_path + "'");
  mbe::write_config(out, cfg, comments);
}

void write_outputs(const mbe::RunConfig& cfg, const mbe::ExperimentResult& res) {
  ensure_parent(cfg.sim.raw_csv);
  ensure_parent(cfg.sim.aggregate_csv);
  mbe::emit_raw_csv(res, cfg.sim.raw_csv);
  mbe::emit_aggregate_csv(res.aggregate, cfg.sim.aggregate_csv);
  if (!cfg.sim.svg.empty()) {
    ensure_parent(cfg.sim.svg);
    auto opt = cfg.plot;
    if (opt.title.empty()) opt.title = cfg.sim.experiment_id + ": " + cfg.sim.env;
    mbe::emit_plot_svg(res.aggregate, cfg.sim.svg, opt);
  }
}

/// Runs `body`, keeping the metadata file current even when it throws.
template <class Body>
int with_metadata(const mbe::RunConfig& cfg, const std::string& command, Body&& body) {
  const auto notices = mbe::tuning_notices(cfg.sim.algorithms);
  for (const auto& n : notices) std::cerr << "note: " << n << '\n';
  write_metadata(cfg, command, "running", notices);
  try {
    body();
  } catch (const std::exception& e) {
    write_metadata(cfg, command, std::string("failed: ") + e.what(), notices);
    throw;
  }
  write_metadata(cfg, command, "ok", notices);
  return 0;
}

int run_simulate(const ExperimentFlags& flags) {
  const auto cfg = flags.resolve();
  cfg.sim.validate();
  return with_metadata(cfg, "simulate", [&] {
    const auto res = mbe::run_experiment(cfg.sim);
    write_outputs(cfg, res);
    std::cout << "experiment " << res.experiment_id << ": T=" << cfg.sim.T << ", runs=" << cfg.sim.n_runs << '\n';
    for (const auto& s : res.aggregate.series)
      std::cout << "  " << s.algorithm << "  final regret " << mbe::format_double(s.mean.back()) << " +- "
                << mbe::format_double(s.stderr_.back()) << '\n';
    std::cout << "wrote " << cfg.sim.raw_csv << ", " << cfg.sim.aggregate_csv
              << (cfg.sim.svg.empty() ? "" : ", " + cfg.sim.svg) << ", " << cfg.meta_path << '\n';
  });
}

int run_sweep(const ExperimentFlags& flags) {
  auto cfg = flags.resolve();
  cfg.sim.validate();
  const auto grid = cfg.grid.empty() ? mbe::default_sweep_grid() : cfg.grid;
  const std::string report_path =
      (std::filesystem::path(cfg.sim.aggregate_csv).parent_path() / (cfg.sim.experiment_id + "_sweep.csv")).string();
  return with_metadata(cfg, "sweep", [&] {
    const auto res = mbe::sweep(cfg.sim, grid);
    auto out_cfg = cfg;
    out_cfg.sim.algorithms = res.experiment.algorithms;
    write_outputs(out_cfg, res.experiment);
    std::ofstream rep(report_path, std::ios::binary | std::ios::trunc);
    if (!rep) throw mbe::IoError("cannot write '" + report_path + "'");
    rep << "algorithm,key,parameter,spec,final_mean,final_stderr,best\n";
    for (const auto& e : res.entries) {
      std::cout << e.base;
      if (e.key) std::cout << "  best " << *e.key << "=" << mbe::format_double(e.points[e.best].parameter);
      std::cout << "  final regret " << mbe::format_double(e.points[e.best].final_mean) << " +- "
                << mbe::format_double(e.points[e.best].final_stderr) << '\n';
      for (std::size_t i = 0; i < e.points.size(); ++i) {
        const auto& p = e.points[i];
        rep << mbe::csv_field(e.base) << ',' << (e.key ? *e.key : "") << ','
            << (e.key ? mbe::format_double(p.parameter) : "") << ',' << mbe::csv_field(p.algorithm) << ','
            << mbe::format_double(p.final_mean) << ',' << mbe::format_double(p.final_stderr) << ','
            << (i == e.best ? "true" : "false") << '\n';
      }
    }
    std::cout << "wrote " << report_path << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplier-bootstrap exploration for bandits: simulations, sweeps, checks and plots"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mbe::kVersion);

  ExperimentFlags sim_flags, sweep_flags;
  auto* simulate = app.add_subcommand("simulate", "run an experiment and write CSVs (and optionally an SVG)");
  sim_flags.attach(simulate, false);
  auto* sweep = app.add_subcommand("sweep", "tune each algorithm's hyperparameter over a grid");
  sweep_flags.attach(sweep, true);

  auto* theory = app.add_subcommand("theorycheck", "numerically verify the lemma battery");
  std::uint64_t theory_seed = 0;
  std::string theory_csv;
  bool strict = false;
  theory->add_option("--seed", theory_seed, "seed for Monte-Carlo checks (MBE_SEED overrides)");
  theory->add_option("--csv", theory_csv, "machine-readable CSV output path");
  theory->add_flag("--strict", strict, "exit 1 if any check fails");

  auto* plot = app.add_subcommand("plot", "render an aggregate CSV as SVG");
  std::string plot_in, plot_out;
  mbe::PlotOptions plot_opt;
  plot->add_option("--aggregate", plot_in, "aggregate CSV")->required();
  plot->add_option("--svg", plot_out, "output SVG")->required();
  plot->add_flag("--log-x", plot_opt.log_x, "logarithmic x axis");
  plot->add_flag("--log-y", plot_opt.log_y, "logarithmic y axis");
  plot->add_option("--title", plot_opt.title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(sim_flags);
    if (*sweep) return run_sweep(sweep_flags);
    if (*theory) {
      if (const char* env_seed = std::getenv("MBE_SEED"); env_seed && *env_seed) {
        theory_seed = mbe::detail::parse_u64(env_seed, "MBE_SEED");
      }
      const auto reports = mbe::run_theory_checks(theory_seed);
      mbe::write_check_text(std::cout, reports);
      if (!theory_csv.empty()) {
        ensure_parent(theory_csv);
        std::ofstream out(theory_csv, std::ios::binary | std::ios::trunc);
        if (!out) throw mbe::IoError("cannot write '" + theory_csv + "'");
        mbe::write_check_csv(out, reports);
      }
      bool all = true;
      for (const auto& r : reports) all = all && r.pass();
      return strict && !all ? 1 : 0;
    }
    if (*plot) {
      const auto agg = mbe::read_aggregate_csv(plot_in);
      if (agg.series.empty()) throw mbe::ConfigError("'" + plot_in + "' has no data rows");
      ensure_parent(plot_out);
      mbe::emit_plot_svg(agg, plot_out, plot_opt);
      return 0;
    }
  } catch (const mbe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
