#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "confcal/dataio.hpp"
#include "confcal/errors.hpp"
#include "confcal/measures.hpp"

namespace confcal {

/// Barycentric lattice of the 2-simplex with `resolution` subdivisions per
/// edge: all (i, j, r-i-j) / r.
inline std::vector<std::array<double, 3>> simplex_grid(std::size_t resolution) {
  if (resolution < 2) throw DomainError("heatmap resolution must be at least 2");
  const double r = static_cast<double>(resolution);
  std::vector<std::array<double, 3>> pts;
  for (std::size_t i = 0; i <= resolution; ++i) {
    for (std::size_t j = 0; i + j <= resolution; ++j) {
      pts.push_back({static_cast<double>(i) / r, static_cast<double>(j) / r,
                     static_cast<double>(resolution - i - j) / r});
    }
  }
  return pts;
}

struct HeatmapRow {
  std::array<double, 3> point;
  MeasureId measure;
  double score;
};

inline std::vector<HeatmapRow> heatmap(std::span<const MeasureId> measures,
                                       std::size_t resolution) {
  std::vector<HeatmapRow> rows;
  for (const auto& p : simplex_grid(resolution)) {
    const ProbVector v(std::vector<double>(p.begin(), p.end()));
    for (MeasureId m : measures) rows.push_back({p, m, confidence(m, v)});
  }
  return rows;
}

/// CSV with columns v1,v2,v3,measure,score.
inline void write_heatmap(std::span<const HeatmapRow> rows, std::ostream& out) {
  out << "v1,v2,v3,measure,score\n";
  for (const auto& r : rows) {
    out << detail::format_double(r.point[0]) << ',' << detail::format_double(r.point[1]) << ','
        << detail::format_double(r.point[2]) << ',' << to_string(r.measure) << ','
        << detail::format_double(r.score) << '\n';
  }
}

}  // namespace confcal
