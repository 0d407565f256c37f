// confcal: calibration and sharpness of confidence measures from the command line.
//
//   confcal synth     --output val.jsonl --distortion 2 --seed 1
//   confcal calibrate --validation val.jsonl --output temps.json
//   confcal evaluate  --input test.jsonl --temperatures temps.json --output report.json
//   confcal heatmap   --measure all --resolution 30 --output simplex.csv

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "confcal/confcal.hpp"

using namespace confcal;

namespace {

struct DataFlags {
  std::string format;  // empty: infer from extension
  bool renormalize = false;
  std::optional<double> epsilon;
};

struct FitFlags {
  std::string measure = "all";
  std::string binning = "adaptive";
  std::size_t bins = kDefaultBins;
  std::string norm = "l1";
  TemperatureGrid grid;
  std::uint64_t seed = 0;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--format", f.format, "Dataset format (default: from file extension)")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  cmd->add_flag("--renormalize", f.renormalize,
                "Rescale probability rows that are off by at most 1e-3");
  cmd->add_option("--epsilon", f.epsilon,
                  "Recover missing logits as log(max(p, epsilon)); disabled when absent")
      ->check(CLI::PositiveNumber);
}

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--measure", f.measure, "Confidence measure")
      ->check(CLI::IsMember({"max", "margin2", "margin3", "entropy", "all"}));
  cmd->add_option("--binning", f.binning, "Binning strategy")
      ->check(CLI::IsMember({"fixed", "adaptive"}));
  cmd->add_option("--bins", f.bins, "Number of bins")->check(CLI::PositiveNumber);
  cmd->add_option("--norm", f.norm, "Residual norm")->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--t-min", f.grid.t_min, "Smallest candidate temperature")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--t-max", f.grid.t_max, "Largest candidate temperature")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--t-steps", f.grid.steps, "Number of log-spaced grid points")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Run seed, recorded in output metadata");
}

std::vector<MeasureId> selected_measures(const std::string& name) {
  if (name == "all") return {kAllMeasures.begin(), kAllMeasures.end()};
  return {parse_measure(name)};
}

Dataset load(const std::string& path, const DataFlags& f) {
  const FileFormat fmt = f.format.empty() ? format_from_path(path) : parse_format(f.format);
  Dataset d = read_dataset(path, fmt, ReadOptions{f.renormalize});
  if (d.empty()) throw ValidationError(path + ": dataset is empty");
  return d;
}

template <class WriteFn>
void emit(const std::string& path, WriteFn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
  } else {
    write_atomically(path, write);
  }
}

TemperatureSet calibrate(const Dataset& validation, const FitFlags& f, const DataFlags& df) {
  TemperatureSet set;
  set.grid = f.grid;
  set.objective = CalibrationObjective{parse_binning_strategy(f.binning), f.bins, parse_norm(f.norm)};
  set.metadata = validation.metadata;
  set.metadata["run_seed"] = std::to_string(f.seed);
  set.nll = fit_nll(validation, f.grid, df.epsilon);
  for (MeasureId m : selected_measures(f.measure)) {
    set.per_measure.push_back(fit_for_measure(validation, m, set.objective, f.grid, df.epsilon));
  }
  return set;
}

int cmd_synth(const SynthConfig& config, const std::string& format, const std::string& output,
              std::string truth_path) {
  const SynthOutput out = generate(config);
  const FileFormat fmt = format.empty() ? format_from_path(output) : parse_format(format);
  write_dataset(out.dataset, output, fmt);
  if (truth_path.empty()) truth_path = output + ".truth.jsonl";
  write_atomically(truth_path, [&](std::ostream& os) {
    for (const auto& q : out.truth) {
      os << nlohmann::json{{"q", q}, {"distortion", out.distortion}}.dump() << '\n';
    }
  });
  std::cerr << "wrote " << config.n << " records to " << output << " (truth: " << truth_path
            << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence measures, calibration error and temperature scaling"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth;
  std::size_t synth_domains = 0;
  std::string synth_format, synth_output, synth_truth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic prediction dataset");
  synth_cmd->add_option("--n", synth.n, "Number of records")->required();
  synth_cmd->add_option("--k", synth.k, "Number of classes");
  synth_cmd->add_option("--alpha", synth.alpha, "Dirichlet concentration");
  synth_cmd->add_option("--distortion", synth.distortion, "Logit multiplier a (T = a recalibrates)");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--domains", synth_domains, "Number of domain tags (0: none)");
  synth_cmd->add_option("--format", synth_format, "Output format")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  synth_cmd->add_option("--output", synth_output, "Dataset path")->required();
  synth_cmd->add_option("--truth", synth_truth, "Ground-truth sidecar path");

  // calibrate
  DataFlags cal_data;
  FitFlags cal_fit;
  std::string cal_validation, cal_output;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit temperatures on a validation set");
  cal_cmd->add_option("--validation", cal_validation, "Validation dataset")->required();
  cal_cmd->add_option("--output", cal_output, "Temperatures file (default: stdout)");
  add_data_flags(cal_cmd, cal_data);
  add_fit_flags(cal_cmd, cal_fit);

  // evaluate
  DataFlags ev_data;
  FitFlags ev_fit;
  bool ev_percent = false;
  std::string ev_input, ev_validation, ev_temps, ev_output, ev_scatter;
  auto* ev_cmd = app.add_subcommand("evaluate", "Calibration error and sharpness per measure");
  ev_cmd->add_option("--input", ev_input, "Evaluation dataset")->required();
  auto* ev_val_opt =
      ev_cmd->add_option("--validation", ev_validation, "Fit temperatures on this dataset");
  ev_cmd->add_option("--temperatures", ev_temps, "Temperatures file from `calibrate`")
      ->excludes(ev_val_opt);
  ev_cmd->add_option("--output", ev_output, "JSON report path");
  ev_cmd->add_option("--scatter", ev_scatter, "Scatter CSV path (calibration error vs sharpness)");
  ev_cmd->add_flag("--percent", ev_percent, "Show ACE/ECE as percentages in the table");
  add_data_flags(ev_cmd, ev_data);
  add_fit_flags(ev_cmd, ev_fit);

  // heatmap
  std::string hm_measure = "all", hm_output;
  std::size_t hm_resolution = 20;
  auto* hm_cmd = app.add_subcommand("heatmap", "Measure values over the 3-class simplex");
  hm_cmd->add_option("--measure", hm_measure, "Confidence measure")
      ->check(CLI::IsMember({"max", "margin2", "margin3", "entropy", "all"}));
  hm_cmd->add_option("--resolution", hm_resolution, "Subdivisions per simplex edge");
  hm_cmd->add_option("--output", hm_output, "CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      if (synth_domains > 0) synth.domain_count = synth_domains;
      return cmd_synth(synth, synth_format, synth_output, synth_truth);
    }

    if (*cal_cmd) {
      const Dataset validation = load(cal_validation, cal_data);
      const TemperatureSet set = calibrate(validation, cal_fit, cal_data);
      emit(cal_output, [&](std::ostream& os) { os << to_json(set).dump(2) << '\n'; });
      return 0;
    }

    if (*ev_cmd) {
      const Dataset input = load(ev_input, ev_data);
      EvalConfig config;
      config.bins = ev_fit.bins;
      config.binning = parse_binning_strategy(ev_fit.binning);
      config.measures = selected_measures(ev_fit.measure);
      config.recovery_epsilon = ev_data.epsilon;

      std::map<MeasureId, double> temperatures;
      if (!ev_temps.empty()) {
        temperatures = read_temperatures(ev_temps).by_measure();
      } else if (!ev_validation.empty()) {
        temperatures = calibrate(load(ev_validation, ev_data), ev_fit, ev_data).by_measure();
      }
      CalibrationReport report = evaluate_all(input, config, temperatures);
      report.metadata["run_seed"] = std::to_string(ev_fit.seed);

      write_table(report, std::cout, parse_norm(ev_fit.norm), ev_percent);
      if (!ev_output.empty()) {
        write_atomically(ev_output, [&](std::ostream& os) { os << to_json(report).dump(2) << '\n'; });
      }
      if (!ev_scatter.empty()) {
        write_atomically(ev_scatter, [&](std::ostream& os) { write_scatter(report, os); });
      }
      return 0;
    }

    if (*hm_cmd) {
      if (hm_resolution < 2) throw DomainError("--resolution must be at least 2");
      const auto measures = selected_measures(hm_measure);
      const auto rows = heatmap(measures, hm_resolution);
      emit(hm_output, [&](std::ostream& os) { write_heatmap(rows, os); });
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
