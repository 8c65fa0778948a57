#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace dlms {

/// Iteration-indexed mean-square deviation, either simulated or predicted.
struct LearningCurve {
  std::string label;
  std::string reference;   // "w_opt" or "w_star"
  std::string provenance;  // "theory" or "simulated(runs=N)"
  std::vector<double> values;  // linear scale, index = iteration

  double db(size_t i) const { return 10.0 * std::log10(values[i]); }
};

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace dlms
