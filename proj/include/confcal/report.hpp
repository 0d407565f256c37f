#pragma once

// Serialization of evaluation reports, scatter data and fitted temperatures.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "confcal/dataio.hpp"
#include "confcal/errors.hpp"
#include "confcal/evaluate.hpp"
#include "confcal/measures.hpp"
#include "confcal/scaling.hpp"

namespace confcal {

inline nlohmann::json to_json(const Decomposition& d) {
  return {{"l2_loss", d.l2_loss},
          {"variance_term", d.variance_term},
          {"sharpness", d.sharpness},
          {"calibration_l2", d.calibration_l2}};
}

inline nlohmann::json to_json(const MeasureReport& r) {
  nlohmann::json j{{"measure", to_string(r.measure)},
                   {"regime", to_string(r.regime)},
                   {"temperature", nullptr},
                   {"accuracy", r.accuracy},
                   {"ece_l1", r.ece_l1},
                   {"ace_l1", r.ace_l1},
                   {"ece_l2", r.ece_l2},
                   {"ace_l2", r.ace_l2},
                   {"sharpness", r.sharpness},
                   {"decomposition", to_json(r.decomposition)}};
  if (r.temperature) j["temperature"] = *r.temperature;
  return j;
}

inline nlohmann::json to_json(const CalibrationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) rows.push_back(to_json(r));
  return {{"samples", report.samples},
          {"num_classes", report.num_classes},
          {"bins", report.config.bins},
          {"binning", to_string(report.config.binning)},
          {"metadata", report.metadata},
          {"rows", rows}};
}

/// Aligned table per regime: rows are measures, columns ACE, ECE, sharpness
/// and the decomposition terms. `percent` multiplies ACE and ECE by 100.
inline void write_table(const CalibrationReport& report, std::ostream& out, Norm norm = Norm::l1,
                        bool percent = false) {
  const double scale = percent ? 100.0 : 1.0;
  const char* unit = percent ? "(%)" : "";
  auto section = [&](Regime regime, const char* title) {
    bool any = false;
    for (const auto& r : report.rows) any = any || r.regime == regime;
    if (!any) return;
    out << title << " [" << to_string(norm) << ", " << report.config.bins << " bins, n="
        << report.samples << "]\n";
    out << std::left << std::setw(10) << "measure" << std::right << std::setw(9) << "T"
        << std::setw(12) << (std::string("ACE") + unit) << std::setw(12)
        << (std::string("ECE") + unit) << std::setw(12) << "sharpness" << std::setw(12)
        << "l2_loss" << std::setw(12) << "var" << std::setw(12) << "cal_l2" << '\n';
    out << std::fixed;
    for (const auto& r : report.rows) {
      if (r.regime != regime) continue;
      const double ace = norm == Norm::l1 ? r.ace_l1 : r.ace_l2;
      const double ece = norm == Norm::l1 ? r.ece_l1 : r.ece_l2;
      out << std::left << std::setw(10) << to_string(r.measure) << std::right << std::setw(9);
      if (r.temperature) {
        out << std::setprecision(4) << *r.temperature;
      } else {
        out << "-";
      }
      out << std::setprecision(percent ? 2 : 4) << std::setw(12) << ace * scale << std::setw(12)
          << ece * scale << std::setprecision(4) << std::setw(12) << r.sharpness
          << std::setw(12) << r.decomposition.l2_loss << std::setw(12)
          << r.decomposition.variance_term << std::setw(12) << r.decomposition.calibration_l2
          << '\n';
    }
    out << std::defaultfloat << '\n';
  };
  section(Regime::oob, "Out-of-the-box evaluation");
  section(Regime::ts, "With temperature scaling");
}

/// One row per (measure, regime): calibration errors against sharpness.
inline void write_scatter(const CalibrationReport& report, std::ostream& out) {
  out << "measure,regime,ace_l1,ece_l1,ace_l2,ece_l2,sharpness\n";
  for (const auto& r : report.rows) {
    out << to_string(r.measure) << ',' << to_string(r.regime) << ','
        << detail::format_double(r.ace_l1) << ',' << detail::format_double(r.ece_l1) << ','
        << detail::format_double(r.ace_l2) << ',' << detail::format_double(r.ece_l2) << ','
        << detail::format_double(r.sharpness) << '\n';
  }
}

/// Result of a calibration run: the NLL temperature plus one per measure.
struct TemperatureSet {
  TemperatureGrid grid;
  CalibrationObjective objective;
  std::optional<TemperatureFit> nll;
  std::vector<TemperatureFit> per_measure;
  std::map<std::string, std::string> metadata;

  std::map<MeasureId, double> by_measure() const {
    std::map<MeasureId, double> out;
    for (const auto& f : per_measure) {
      if (f.measure) out[*f.measure] = f.temperature;
    }
    return out;
  }
};

inline nlohmann::json to_json(const TemperatureSet& set) {
  nlohmann::json measures = nlohmann::json::object();
  for (const auto& f : set.per_measure) {
    measures[std::string(to_string(*f.measure))] = {{"temperature", f.temperature},
                                                     {"objective_value", f.objective_value}};
  }
  nlohmann::json j{
      {"grid", {{"t_min", set.grid.t_min}, {"t_max", set.grid.t_max}, {"steps", set.grid.steps}}},
      {"objective",
       {{"binning", to_string(set.objective.strategy)},
        {"bins", set.objective.bins},
        {"norm", to_string(set.objective.norm)}}},
      {"nll", nullptr},
      {"measures", measures},
      {"metadata", set.metadata}};
  if (set.nll) {
    j["nll"] = {{"temperature", set.nll->temperature},
                {"objective_value", set.nll->objective_value}};
  }
  return j;
}

inline TemperatureSet temperature_set_from_json(const nlohmann::json& j) {
  try {
    TemperatureSet set;
    set.grid.t_min = j.at("grid").at("t_min").get<double>();
    set.grid.t_max = j.at("grid").at("t_max").get<double>();
    set.grid.steps = j.at("grid").at("steps").get<std::size_t>();
    set.objective.strategy =
        parse_binning_strategy(j.at("objective").at("binning").get<std::string>());
    set.objective.bins = j.at("objective").at("bins").get<std::size_t>();
    set.objective.norm = parse_norm(j.at("objective").at("norm").get<std::string>());
    if (j.contains("nll") && !j["nll"].is_null()) {
      set.nll = TemperatureFit{j["nll"].at("temperature").get<double>(),
                               j["nll"].at("objective_value").get<double>(), Objective::nll,
                               std::nullopt, set.grid};
    }
    for (const auto& [name, fit] : j.at("measures").items()) {
      const double t = fit.at("temperature").get<double>();
      if (!(t > 0.0) || !std::isfinite(t)) {
        throw ValidationError("temperature for '" + name + "' must be positive");
      }
      set.per_measure.push_back(TemperatureFit{t, fit.at("objective_value").get<double>(),
                                               Objective::calibration_error, parse_measure(name),
                                               set.grid});
    }
    if (j.contains("metadata")) {
      set.metadata = j["metadata"].get<std::map<std::string, std::string>>();
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed temperatures file: ") + e.what());
  }
}

inline TemperatureSet read_temperatures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    return temperature_set_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace confcal
