#include "dlms/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dlms {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

}  // namespace

void write_curves_csv(const std::string& path, const std::vector<LearningCurve>& curves,
                      bool decimate) {
  auto out = open_out(path);
  out << "iteration,series_label,value_db,value_linear,provenance\n";
  for (const auto& curve : curves) {
    const std::string label = curve.label + ":" + curve.reference;
    for (size_t i = 0; i < curve.values.size(); ++i) {
      if (decimate && i > 1000 && i % 10 != 0) continue;
      const double v = curve.values[i];
      const double db = v > 0 ? 10.0 * std::log10(v) : -std::numeric_limits<double>::infinity();
      out << i << ',' << label << ',' << fmt(db) << ',' << fmt(v) << ',' << curve.provenance
          << '\n';
    }
  }
}

std::vector<LearningCurve> read_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, size_t> index;
  std::vector<LearningCurve> curves;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string iter, label, db, linear, provenance;
    std::getline(ls, iter, ',');
    std::getline(ls, label, ',');
    std::getline(ls, db, ',');
    std::getline(ls, linear, ',');
    std::getline(ls, provenance);
    const std::string key = label + "|" + provenance;
    if (!index.count(key)) {
      index[key] = curves.size();
      LearningCurve c;
      const auto colon = label.rfind(':');
      c.label = label.substr(0, colon);
      c.reference = label.substr(colon + 1);
      c.provenance = provenance;
      curves.push_back(std::move(c));
    }
    curves[index[key]].values.push_back(std::strtod(linear.c_str(), nullptr));
  }
  return curves;
}

void write_summary_csv(const std::string& path, const std::vector<SeriesSummary>& summaries) {
  auto out = open_out(path);
  out << "series_label,runs,steady_state_db,steady_state_linear,burn_in,"
         "theory_steady_db,max_theory_gap_db,violation_original,violation_agreement\n";
  for (const auto& s : summaries) {
    out << s.algorithm << ':' << s.reference << ',' << s.runs << ','
        << fmt(to_db(s.steady.value)) << ',' << fmt(s.steady.value) << ',' << s.steady.burn_in
        << ',';
    if (s.theory_steady && *s.theory_steady > 0) out << fmt(to_db(*s.theory_steady));
    out << ',';
    if (s.max_gap_db) out << fmt(*s.max_gap_db);
    out << ',';
    if (s.violation) out << fmt(s.violation->original);
    out << ',';
    if (s.violation) out << fmt(s.violation->agreement);
    out << '\n';
  }
}

void write_curves_svg(const std::string& path, const std::vector<LearningCurve>& curves,
                      const std::string& title) {
  const int width = 860, height = 540;
  const int left = 70, right = 30, top = 40, bottom = 50;
  double lo = 1e300, hi = -1e300;
  size_t longest = 2;
  for (const auto& c : curves)
    for (size_t i = 0; i < c.values.size(); ++i)
      if (c.values[i] > 0) {
        lo = std::min(lo, c.db(i));
        hi = std::max(hi, c.db(i));
        longest = std::max(longest, c.values.size());
      }
  if (lo > hi) {
    lo = -1;
    hi = 1;
  }
  const double span = std::max(hi - lo, 1e-9);
  const auto sx = [&](double i) {
    return left + (width - left - right) * i / static_cast<double>(longest - 1);
  };
  const auto sy = [&](double db) {
    return top + (height - top - bottom) * (hi - db) / span;
  };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  // axes and ticks
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double db = hi - span * t / 5.0;
    const double y = sy(db);
    out << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << width - right
        << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << static_cast<int>(std::lround(db))
        << "</text>\n";
    const double xi = (longest - 1) * t / 5.0;
    out << "<text x=\"" << sx(xi) << "\" y=\"" << height - bottom + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << static_cast<long>(xi) << "</text>\n";
  }
  out << "<text x=\"" << (width + left - right) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">iteration</text>\n"
      << "<text x=\"16\" y=\"" << (height + top - bottom) / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 16 " << (height + top - bottom) / 2
      << ")\" text-anchor=\"middle\">MSD (dB)</text>\n";

  int color = 0;
  double legend_y = top + 8;
  for (const auto& c : curves) {
    const char* stroke = kPalette[color % 10];
    const bool dashed = c.provenance == "theory";
    std::ostringstream pts;
    // decimate long curves for rendering only
    const size_t step = std::max<size_t>(1, c.values.size() / 2000);
    for (size_t i = 0; i < c.values.size(); i += step)
      if (c.values[i] > 0) pts << sx(static_cast<double>(i)) << ',' << sy(c.db(i)) << ' ';
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.3\" "
        << (dashed ? "stroke-dasharray=\"6 4\" " : "") << "points=\"" << pts.str() << "\"/>\n";
    out << "<line x1=\"" << width - right - 180 << "\" y1=\"" << legend_y << "\" x2=\""
        << width - right - 150 << "\" y2=\"" << legend_y << "\" stroke=\"" << stroke
        << "\" stroke-width=\"2\" " << (dashed ? "stroke-dasharray=\"6 4\"" : "") << "/>\n"
        << "<text x=\"" << width - right - 144 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"11\">" << c.label << ":" << c.reference << " (" << c.provenance
        << ")</text>\n";
    legend_y += 16;
    ++color;
  }
  out << "</svg>\n";
}

void write_heatmap_svg(const std::string& path, const Eigen::MatrixXd& field,
                       const std::string& title) {
  const int n_rows = static_cast<int>(field.rows());
  const int n_cols = static_cast<int>(field.cols());
  const int cell = std::max(6, 360 / std::max(n_rows, n_cols));
  const int left = 30, top = 40;
  const int width = left + n_cols * cell + 30;
  const int height = top + n_rows * cell + 30;
  const double lo = field.minCoeff();
  const double hi = field.maxCoeff();
  const double span = std::max(hi - lo, 1e-12);

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  for (int r = 0; r < n_rows; ++r)
    for (int c = 0; c < n_cols; ++c) {
      const double t = (field(r, c) - lo) / span;
      // two-segment blue -> white -> red map
      int red, green, blue;
      if (t < 0.5) {
        red = static_cast<int>(40 + 215 * (2 * t));
        green = static_cast<int>(60 + 195 * (2 * t));
        blue = 255;
      } else {
        red = 255;
        green = static_cast<int>(255 - 195 * (2 * t - 1));
        blue = static_cast<int>(255 - 215 * (2 * t - 1));
      }
      out << "<rect x=\"" << left + c * cell << "\" y=\"" << top + (n_rows - 1 - r) * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << red << ','
          << green << ',' << blue << ")\"/>\n";
    }
  out << "</svg>\n";
}

}  // namespace dlms
