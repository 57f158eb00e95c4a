#include "vrcp_cli/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "vrcp/error.hpp"
#include "vrcp/experiment.hpp"
#include "vrcp/format.hpp"
#include "vrcp/report.hpp"

namespace vrcp::cli {

namespace {

void print_summary(const ExperimentReport& report, std::ostream& out) {
  out << "method epsilon coverage(mean+-ci95) size(mean+-ci95)\n";
  for (const AggregateRow& a : aggregate(report.rows))
    out << a.method << ' ' << format_double(a.epsilon) << ' ' << format_double(a.coverage_mean) << "+-"
        << format_double(a.coverage_ci95) << ' ' << format_double(a.size_mean) << "+-"
        << format_double(a.size_ci95) << '\n';
  for (const ContainmentSummary& c : report.containment)
    out << "containment " << c.method << " eps=" << format_double(c.epsilon) << ": " << c.violations
        << " violations in " << c.checked << " points\n";
}

int do_run(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
           std::size_t threads, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = read_experiment_config(config_path);
  RunOptions options;
  options.threads = threads;
  options.seed = seed;
  const ExperimentReport report = run_experiment(cfg, options);
  const std::filesystem::path dir(out_dir.empty() ? cfg.output : out_dir);
  for (const auto& p : write_report_files(report, dir)) out << "wrote " << p.string() << '\n';
  print_summary(report, out);
  if (report.containment_violations() > 0) {
    err << "error: " << report.containment_violations() << " containment violations (see report.json)\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust conformal prediction experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  run_cmd->add_option("--seed", seed, "Master seed (overrides splits.seed)");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string report_path;
  CLI::App* hist_cmd = app.add_subcommand("histogram", "Set-size histogram of a classification report");
  hist_cmd->add_option("--report", report_path, "report.csv written by `run`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return do_run(config_path, out_dir, seed, threads, out, err);
    const auto histograms = histogram_from_report_file(report_path);
    out << emit_histogram_csv(histograms);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace vrcp::cli
