// SPDX-License-Identifier: Apache-2.0
//
// atomsplit: positive-P simulation of the three-well entangling beamsplitter.
//
//   atomsplit simulate --config run.cfg [--out r.csv] [--seed S] [--trajectories N] [--workers W]
//   atomsplit oracle   --config run.cfg [--out r.csv]
//   atomsplit compare  a.csv b.csv [--out report.json]
//   atomsplit preset   fig3b [--scale 10] [--out r.csv] [--print-config]
//
// Exit codes: 0 success, 1 I/O or internal error, 2 validation error,
// 3 divergence breach, 4 comparison failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "atomsplit/experiment.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitComparison = 4;

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trajectories;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--out", o.out, "Output CSV path (overrides output_path)");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--trajectories", o.trajectories, "Number of trajectories");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

void apply(const Overrides& o, atomsplit::RunConfig& cfg) {
  if (!o.out.empty()) cfg.output_path = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.trajectories) cfg.trajectories = *o.trajectories;
}

int execute(atomsplit::RunConfig cfg, const Overrides& o) {
  apply(o, cfg);
  cfg.validate();
  const atomsplit::RunSummary s = atomsplit::run(cfg, o.workers);
  for (const auto& f : s.files) std::cout << "wrote " << f << '\n';
  std::cout << "valid trajectories: " << s.result.n_valid << ", divergent: " << s.divergent
            << ", wall time: " << s.wall_seconds << " s\n";
  if (cfg.mode == atomsplit::RunMode::compare && !s.comparison.pass) {
    std::cerr << "comparison failed:\n" << s.comparison.to_json() << '\n';
    return kExitComparison;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-P simulation of a three-well Bose-Hubbard beamsplitter"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path;

  auto* simulate = app.add_subcommand("simulate", "Run a positive-P ensemble from a config file");
  simulate->add_option("--config", config_path, "Key-value config file")->required();
  add_run_flags(simulate, overrides);

  auto* oracle = app.add_subcommand("oracle", "Exact Fock-basis evolution on the config's sample grid");
  oracle->add_option("--config", config_path, "Key-value config file")->required();
  oracle->add_option("--out", overrides.out, "Output CSV path (overrides output_path)");

  std::string csv_a;
  std::string csv_b;
  std::string report_path;
  auto* cmp = app.add_subcommand("compare", "z-score comparison of two result CSVs");
  cmp->add_option("first", csv_a, "Result CSV (e.g. positive-P)")->required();
  cmp->add_option("second", csv_b, "Result CSV (e.g. oracle)")->required();
  cmp->add_option("--out", report_path, "Write the JSON report here");

  std::string preset_name;
  double scale = 1.0;
  bool print_config = false;
  auto* pre = app.add_subcommand("preset", "Run a figure preset");
  pre->add_option("name", preset_name, "fig1 | fig2 | fig3a | fig3b | fig3c | fig4a | fig4b")->required();
  pre->add_option("--scale", scale, "Divide the trajectory count by this factor");
  pre->add_flag("--print-config", print_config, "Print the preset config and exit");
  add_run_flags(pre, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*simulate) {
      atomsplit::RunConfig cfg = atomsplit::load_config(config_path);
      if (cfg.mode == atomsplit::RunMode::oracle) cfg.mode = atomsplit::RunMode::positive_p;
      return execute(cfg, overrides);
    }
    if (*oracle) {
      atomsplit::RunConfig cfg = atomsplit::load_config(config_path);
      cfg.mode = atomsplit::RunMode::oracle;
      return execute(cfg, overrides);
    }
    if (*cmp) {
      const auto report = atomsplit::compare(atomsplit::read_csv_file(csv_a), atomsplit::read_csv_file(csv_b));
      const std::string json = report.to_json();
      if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << json << '\n';
        if (!out) throw std::runtime_error("cannot write '" + report_path + "'");
      }
      std::cout << json << '\n';
      if (!report.pass) {
        for (const auto& c : report.checks) {
          if (c.flagged_points > 0) std::cerr << "FAIL " << c.observable << " max |z| = " << c.max_abs_z << '\n';
        }
        return kExitComparison;
      }
      return 0;
    }
    if (*pre) {
      atomsplit::RunConfig cfg = atomsplit::preset(preset_name, scale);
      if (print_config) {
        apply(overrides, cfg);
        std::cout << atomsplit::format_config(cfg);
        return 0;
      }
      return execute(cfg, overrides);
    }
  } catch (const atomsplit::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const atomsplit::DivergenceBreach& e) {
    std::cerr << "divergence breach: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
