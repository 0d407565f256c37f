#pragma once

// Dataset files: JSON lines and CSV, one record per line.
//
// JSON lines: {"logits":[..], "probs":[..], "label":int, "domain":"str"} with at
// least one of logits/probs. An optional line {"meta":{"key":"value",...}}
// carries dataset metadata.
//
// CSV: optional "# key=value" metadata lines, a mandatory header
// (logit_0..logit_{k-1} and/or prob_0..prob_{k-1}, label, optional domain),
// then one row per record. Empty logit cells mean "no logits for this row".

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "confcal/dataset.hpp"
#include "confcal/errors.hpp"
#include "confcal/measures.hpp"

namespace confcal {

enum class FileFormat { jsonl, csv };

inline FileFormat parse_format(std::string_view name) {
  if (name == "jsonl") return FileFormat::jsonl;
  if (name == "csv") return FileFormat::csv;
  throw ValidationError("unknown file format '" + std::string(name) + "'");
}

/// jsonl unless the path ends in ".csv".
inline FileFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::csv : FileFormat::jsonl;
}

struct ReadOptions {
  /// Rows whose probabilities sum to within kRenormalizeTolerance of 1 are rescaled
  /// instead of rejected.
  bool renormalize = false;

  static constexpr double kRenormalizeTolerance = 1e-3;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::vector<double> checked_probs(std::vector<double> p, const ReadOptions& opts) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValidationError("probability entry out of [0,1]: " + format_double(v));
    }
    sum += v;
  }
  const double off = std::abs(sum - 1.0);
  if (off > ProbVector::kTolerance) {
    if (!opts.renormalize || off > ReadOptions::kRenormalizeTolerance) {
      throw ValidationError("probabilities sum to " + format_double(sum));
    }
    for (double& v : p) v /= sum;
  }
  return p;
}

inline PredictionRecord make_record(std::optional<std::vector<double>> logits,
                                    std::optional<std::vector<double>> probs, long long label,
                                    std::optional<std::string> domain, const ReadOptions& opts) {
  if (label < 0) throw ValidationError("negative label");
  const auto y = static_cast<std::size_t>(label);
  if (!logits && !probs) throw ValidationError("record needs logits or probs");
  if (logits && probs) {
    return PredictionRecord(LogitVector(std::move(*logits)),
                            ProbVector(checked_probs(std::move(*probs), opts)), y,
                            std::move(domain));
  }
  if (logits) return PredictionRecord(LogitVector(std::move(*logits)), y, std::move(domain));
  return PredictionRecord(ProbVector(checked_probs(std::move(*probs), opts)), y, std::move(domain));
}

/// Appends a record, reporting any violation against `line`.
template <class Build>
void add_record(Dataset& d, const std::string& source, std::size_t line, Build&& build) {
  try {
    d.push_back(build());
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(source, line, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line, e.what());
  }
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

inline Dataset read_jsonl(std::istream& in, const std::string& source = "<stream>",
                          const ReadOptions& opts = {}) {
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(source, lineno, "expected a JSON object");
    if (j.contains("meta")) {
      if (!j["meta"].is_object()) throw ParseError(source, lineno, "'meta' must be an object");
      for (const auto& [key, value] : j["meta"].items()) {
        d.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
      continue;
    }
    detail::add_record(d, source, lineno, [&] {
      if (!j.contains("label") || !j["label"].is_number_integer()) {
        throw ValidationError("missing or non-integer 'label'");
      }
      std::optional<std::vector<double>> logits;
      std::optional<std::vector<double>> probs;
      std::optional<std::string> domain;
      if (j.contains("logits")) logits = j["logits"].get<std::vector<double>>();
      if (j.contains("probs")) probs = j["probs"].get<std::vector<double>>();
      if (j.contains("domain")) domain = j["domain"].get<std::string>();
      return detail::make_record(std::move(logits), std::move(probs), j["label"].get<long long>(),
                                 std::move(domain), opts);
    });
  }
  return d;
}

inline Dataset read_csv(std::istream& in, const std::string& source = "<stream>",
                        const ReadOptions& opts = {}) {
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  std::vector<std::size_t> logit_cols;
  std::vector<std::size_t> prob_cols;
  std::optional<std::size_t> label_col;
  std::optional<std::size_t> domain_col;

  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty()) continue;
    if (header.empty() && line.front() == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) throw ParseError(source, lineno, "metadata line needs key=value");
      d.metadata[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    const auto cells = detail::split_commas(line);
    if (header.empty()) {
      std::map<std::size_t, std::size_t> logit_at;
      std::map<std::size_t, std::size_t> prob_at;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::string name(cells[c]);
        header.push_back(name);
        try {
          if (name.rfind("logit_", 0) == 0) {
            logit_at[static_cast<std::size_t>(detail::parse_int(name.substr(6)))] = c;
          } else if (name.rfind("prob_", 0) == 0) {
            prob_at[static_cast<std::size_t>(detail::parse_int(name.substr(5)))] = c;
          } else if (name == "label") {
            label_col = c;
          } else if (name == "domain") {
            domain_col = c;
          } else {
            throw ValidationError("unknown column '" + name + "'");
          }
        } catch (const ParseError&) {
          throw;
        } catch (const ValidationError& e) {
          throw ParseError(source, lineno, e.what());
        }
      }
      auto contiguous = [](const std::map<std::size_t, std::size_t>& m) {
        std::size_t i = 0;
        for (const auto& [idx, col] : m) {
          if (idx != i++) return false;
        }
        return true;
      };
      if (!label_col) throw ParseError(source, lineno, "header lacks a 'label' column");
      if (!contiguous(logit_at) || !contiguous(prob_at)) {
        throw ParseError(source, lineno, "class columns must be numbered 0..k-1");
      }
      if (!logit_at.empty() && !prob_at.empty() && logit_at.size() != prob_at.size()) {
        throw ParseError(source, lineno, "logit and prob column counts differ");
      }
      for (const auto& [idx, col] : logit_at) logit_cols.push_back(col);
      for (const auto& [idx, col] : prob_at) prob_cols.push_back(col);
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()));
    }
    detail::add_record(d, source, lineno, [&] {
      std::optional<std::vector<double>> logits;
      std::optional<std::vector<double>> probs;
      std::optional<std::string> domain;
      if (!logit_cols.empty() && !cells[logit_cols.front()].empty()) {
        logits.emplace();
        for (std::size_t c : logit_cols) logits->push_back(detail::parse_double(cells[c]));
      }
      if (!prob_cols.empty() && !cells[prob_cols.front()].empty()) {
        probs.emplace();
        for (std::size_t c : prob_cols) probs->push_back(detail::parse_double(cells[c]));
      }
      if (domain_col && !cells[*domain_col].empty()) domain = std::string(cells[*domain_col]);
      return detail::make_record(std::move(logits), std::move(probs),
                                 detail::parse_int(cells[*label_col]), std::move(domain), opts);
    });
  }
  if (header.empty() && !d.metadata.empty()) {
    throw ParseError(source, lineno, "CSV file has no header row");
  }
  return d;
}

inline Dataset read_dataset(const std::filesystem::path& path, FileFormat format,
                            const ReadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return format == FileFormat::jsonl ? read_jsonl(in, path.string(), opts)
                                     : read_csv(in, path.string(), opts);
}

inline void write_jsonl(const Dataset& d, std::ostream& out) {
  if (!d.metadata.empty()) {
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : d.metadata) meta[k] = v;
    out << nlohmann::json{{"meta", meta}}.dump() << '\n';
  }
  for (const auto& r : d.records()) {
    nlohmann::json j = nlohmann::json::object();
    if (r.logits) {
      j["logits"] = std::vector<double>(r.logits->entries().begin(), r.logits->entries().end());
    }
    j["probs"] = std::vector<double>(r.probs.entries().begin(), r.probs.entries().end());
    j["label"] = r.label;
    if (r.domain) j["domain"] = *r.domain;
    out << j.dump() << '\n';
  }
}

inline void write_csv(const Dataset& d, std::ostream& out) {
  auto plain = [](const std::string& s, bool allow_comma) {
    return s.find_first_of(allow_comma ? "\n\r" : ",\n\r\"") == std::string::npos;
  };
  for (const auto& [k, v] : d.metadata) {
    if (k.find('=') != std::string::npos || !plain(k, false) || !plain(v, true)) {
      throw ValidationError("metadata entry '" + k + "' cannot be written as CSV");
    }
    out << "# " << k << '=' << v << '\n';
  }
  const std::size_t k = d.num_classes();
  bool any_logits = false;
  bool any_domain = false;
  for (const auto& r : d.records()) {
    any_logits = any_logits || r.logits.has_value();
    any_domain = any_domain || r.domain.has_value();
  }
  std::vector<std::string> cols;
  if (any_logits) {
    for (std::size_t i = 0; i < k; ++i) cols.push_back("logit_" + std::to_string(i));
  }
  for (std::size_t i = 0; i < k; ++i) cols.push_back("prob_" + std::to_string(i));
  cols.push_back("label");
  if (any_domain) cols.push_back("domain");
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';

  for (const auto& r : d.records()) {
    std::string row;
    if (any_logits) {
      for (std::size_t i = 0; i < k; ++i) {
        if (r.logits) row += detail::format_double((*r.logits)[i]);
        row += ',';
      }
    }
    for (std::size_t i = 0; i < k; ++i) row += detail::format_double(r.probs[i]) + ',';
    row += std::to_string(r.label);
    if (any_domain) {
      row += ',';
      if (r.domain) {
        if (r.domain->empty() || !plain(*r.domain, false)) {
          throw ValidationError("domain '" + *r.domain + "' cannot be written as CSV");
        }
        row += *r.domain;
      }
    }
    out << row << '\n';
  }
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
template <class WriteFn>
void write_atomically(const std::filesystem::path& path, WriteFn&& write) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    write(out);
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into '" + path.string() + "'");
  }
}

inline void write_dataset(const Dataset& d, const std::filesystem::path& path, FileFormat format) {
  write_atomically(path, [&](std::ostream& out) {
    if (format == FileFormat::jsonl) {
      write_jsonl(d, out);
    } else {
      write_csv(d, out);
    }
  });
}

}  // namespace confcal
