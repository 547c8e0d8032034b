// sparse-testbench: run experiments, sweeps, exponent tables, figures and
// lemma checks from the command line.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sparse_testbench/sparse_testbench.hpp"

namespace fs = std::filesystem;
namespace st = sparse_testbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitLemma = 4;

int thread_count(std::optional<int> flag) {
  if (flag) return *flag;
  return st::threads_from_env();
}

st::RunOptions run_options(std::optional<int> threads) {
  st::RunOptions opts;
  opts.threads = thread_count(threads);
  opts.progress = [](std::int64_t p, std::size_t done, std::size_t total) {
    std::cerr << "  p=" << p << " done (" << done << "/" << total << ")\n";
  };
  return opts;
}

int cmd_run(const std::string& config, std::optional<std::string> out_dir,
            std::optional<int> threads) {
  std::cerr << "run " << config << "\n";
  std::optional<fs::path> root;
  if (out_dir) root = fs::path(*out_dir);
  const auto artifacts = st::run_config_file(config, root, run_options(threads));
  std::cout << artifacts.results_csv.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& dir, std::optional<std::string> out_dir,
              std::optional<int> threads) {
  if (!fs::is_directory(dir)) throw st::ConfigError("'" + dir + "' is not a directory");
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw st::ConfigError("no *.json configs in '" + dir + "'");
  // Validate everything before running anything.
  for (const auto& c : configs) st::load_config(c);
  for (const auto& c : configs) cmd_run(c.string(), out_dir, threads);
  return kExitOk;
}

int cmd_plot(const std::string& target, std::optional<std::string> out, int resolution) {
  std::string document;
  fs::path destination;
  bool is_mode = true;
  st::PhaseMode mode{};
  try {
    mode = st::parse_phase_mode(target);
  } catch (const st::DomainError&) {
    is_mode = false;
  }
  if (is_mode) {
    document = st::svg::phase_diagram_svg(st::phase_diagram(mode, resolution));
    destination = out ? fs::path(*out) : fs::path(target + ".svg");
  } else {
    fs::path input(target);
    if (fs::is_directory(input)) input /= "results.csv";
    if (!fs::is_regular_file(input)) throw st::Error("no results file at '" + input.string() + "'");
    if (fs::file_size(input) == 0) throw st::Error("results file '" + input.string() + "' is empty");
    document = st::results_plot_svg(st::read_file(input));
    destination = out ? fs::path(*out) : input.parent_path() / "risk_plot.svg";
  }
  st::write_atomic(destination, document);
  std::cout << destination.string() << "\n";
  return kExitOk;
}

int cmd_verify(std::optional<std::string> only, double bound_scale) {
  const auto& ids = st::lemma_ids();
  if (only && std::find(ids.begin(), ids.end(), *only) == ids.end()) {
    throw st::ConfigError("unknown lemma '" + *only + "'");
  }
  const auto results = st::verify_lemmas(only, bound_scale);
  std::printf("%-28s %8s %10s %14s  %s\n", "lemma", "points", "violations", "max_slack", "grid");
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-28s %8lld %10lld %14.6g  %s\n", r.lemma_id.c_str(),
                static_cast<long long>(r.points), static_cast<long long>(r.violations), r.max_slack,
                r.grid.c_str());
    if (!r.passed()) {
      ok = false;
      std::printf("  violation at %s\n", r.worst_point.c_str());
    }
    for (const auto& note : r.notes) std::printf("  note: %s\n", note.c_str());
  }
  return ok ? kExitOk : kExitLemma;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax risk testbench for sparse signal detection in linear regression"};
  app.set_version_flag("--version", std::string(st::kToolVersion));
  app.require_subcommand(1);

  std::string config_path, sweep_dir, plot_target;
  std::optional<std::string> out_dir, plot_out, only;
  std::optional<int> threads;
  int resolution = 200;
  double bound_scale = 1.0;

  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--output-dir", out_dir, "Override the config's output_dir");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* sweep = app.add_subcommand("sweep", "Run every *.json config in a directory");
  sweep->add_option("config-dir", sweep_dir, "Directory of configs")->required();
  sweep->add_option("--output-dir", out_dir, "Override each config's output_dir");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* table = app.add_subcommand("exponent-table", "Print predicted exponents as CSV");

  auto* plot = app.add_subcommand("plot", "Render a phase diagram or a results file as SVG");
  plot->add_option("target", plot_target,
                   "figure1_dense | figure1_sparse | figure2_dense | figure2_sparse | results path")
      ->required();
  plot->add_option("--out", plot_out, "Output SVG path");
  plot->add_option("--resolution", resolution, "Cells per axis for phase diagrams")
      ->check(CLI::Range(2, 2000));

  auto* verify = app.add_subcommand("verify-lemmas", "Check the probability inequalities");
  verify->add_option("--only", only, "Run a single lemma check");
  verify->add_option("--bound-scale", bound_scale, "Multiply every bound (1 = as stated)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, threads);
    if (*sweep) return cmd_sweep(sweep_dir, out_dir, threads);
    if (*table) {
      std::cout << st::exponent_table_csv();
      return kExitOk;
    }
    if (*plot) return cmd_plot(plot_target, plot_out, resolution);
    if (*verify) return cmd_verify(only, bound_scale);
  } catch (const st::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
