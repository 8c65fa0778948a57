#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dlms/curve.hpp"
#include "dlms/ensemble.hpp"

namespace dlms {

/// curves.csv schema: iteration,series_label,value_db,value_linear,provenance.
/// Rows are decimated (every iteration up to 1000, then every 10th); values
/// print with enough digits to round-trip exactly.
void write_curves_csv(const std::string& path, const std::vector<LearningCurve>& curves,
                      bool decimate = true);
std::vector<LearningCurve> read_curves_csv(const std::string& path);

void write_summary_csv(const std::string& path, const std::vector<SeriesSummary>& summaries);

/// Overlaid dB learning curves as a standalone SVG.
void write_curves_svg(const std::string& path, const std::vector<LearningCurve>& curves,
                      const std::string& title);

/// Heat map of a square field (row r = y index, column c = x index).
void write_heatmap_svg(const std::string& path, const Eigen::MatrixXd& field,
                       const std::string& title);

}  // namespace dlms
