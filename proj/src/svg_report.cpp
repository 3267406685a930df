#include "expander/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "expander/errors.hpp"
#include "expander/matrix_io.hpp"

namespace expander {

namespace {

constexpr double kWidth = 720;
constexpr double kPanelHeight = 300;
constexpr double kTop = 50;
constexpr double kLeft = 70;
constexpr double kRight = 90;
constexpr double kPlotTop = 30;
constexpr double kPlotBottom = 50;
constexpr const char* kAccuracyColour = "#1f4e9c";
constexpr const char* kGapColours[] = {"#c0392b", "#27864a"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double px_lo = 0.0;
  double px_hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return px_lo + (x - a) / (b - a) * (px_hi - px_lo);
  }
};

// Ticks at 1, 2, 5 times powers of ten inside [lo, hi].
std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> out;
  for (int e = static_cast<int>(std::floor(std::log10(lo))); e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double v = m * std::pow(10.0, e);
      if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
    }
  }
  return out;
}

std::vector<GapKind> kinds_for(GraphMode mode) {
  if (mode == GraphMode::weighted) return {GapKind::weighted_S};
  return {GapKind::unweighted_R, GapKind::unweighted_S};
}

std::string gap_label(GapKind kind) {
  switch (kind) {
    case GapKind::weighted_S: return "weighted Delta_S";
    case GapKind::unweighted_S: return "unweighted Delta_S";
    case GapKind::unweighted_R: return "Delta_R";
  }
  return "?";
}

// Polyline segments through the finite points, broken at non-finite values.
void polyline(std::ostringstream& svg, const std::vector<std::pair<double, double>>& pts,
              const char* colour, const std::string& cls, bool dashed) {
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    svg << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"1.8\"" << (dashed ? " stroke-dasharray=\"6 3\"" : "") << " points=\""
        << current << "\"/>\n";
    current.clear();
  };
  for (const auto& [x, y] : pts) {
    if (!std::isfinite(y)) {
      flush();
      continue;
    }
    current += (current.empty() ? "" : " ") + fmt(x) + "," + fmt(y);
  }
  flush();
  for (const auto& [x, y] : pts) {
    if (std::isfinite(y)) {
      svg << "<circle class=\"" << cls << "\" cx=\"" << fmt(x) << "\" cy=\"" << fmt(y)
          << "\" r=\"2.5\" fill=\"" << colour << "\"/>\n";
    }
  }
}

void panel(std::ostringstream& svg, std::span<const PruneRecord> records, LayerTag layer,
           GraphMode mode, double top) {
  const double plot_top = top + kPlotTop;
  const double plot_bottom = top + kPanelHeight - kPlotBottom;
  const double plot_left = kLeft;
  const double plot_right = kWidth - kRight;

  std::vector<double> xs;
  for (const PruneRecord& r : records) xs.push_back(100.0 * r.q(layer));
  double x_lo = *std::min_element(xs.begin(), xs.end());
  double x_hi = *std::max_element(xs.begin(), xs.end());
  if (x_lo <= 0.0) x_lo = 1e-3;
  if (x_hi <= x_lo) {
    x_lo /= 2.0;
    x_hi *= 2.0;
  }
  // Remaining percentage decreases left to right, as pruning proceeds.
  Axis ax{x_lo, x_hi, plot_right, plot_left, true};
  Axis ay_acc{0.0, 1.0, plot_bottom, plot_top, false};

  const auto kinds = kinds_for(mode);
  std::vector<std::vector<double>> series;
  double g_lo = 0.0;
  double g_hi = 0.0;
  for (GapKind kind : kinds) {
    std::vector<double> s;
    for (const PruneRecord& r : records) {
      s.push_back(r.gap(GapKey{layer, kind}).value_or(std::numeric_limits<double>::quiet_NaN()));
    }
    for (double v : s) {
      if (std::isfinite(v)) {
        g_lo = std::min(g_lo, v);
        g_hi = std::max(g_hi, v);
      }
    }
    series.push_back(std::move(s));
  }
  const double pad = 0.05 * std::max(g_hi - g_lo, 1e-6);
  if (g_hi - g_lo < 1e-12) g_hi = g_lo + 1.0;
  Axis ay_gap{g_lo - pad, g_hi + pad, plot_bottom, plot_top, false};

  const std::string name = std::string(to_string(layer)) + " (" + std::string(to_string(mode)) + ")";
  svg << "<g class=\"panel\" data-layer=\"" << to_string(layer) << "\" data-mode=\""
      << to_string(mode) << "\" data-x-range=\"" << format_double(x_lo) << " "
      << format_double(x_hi) << "\" data-gap-range=\"" << format_double(ay_gap.lo) << " "
      << format_double(ay_gap.hi) << "\" data-accuracy-range=\"0 1\">\n";
  svg << "<text x=\"" << fmt(plot_left) << "\" y=\"" << fmt(top + 18)
      << "\" font-size=\"14\" font-weight=\"bold\">" << escape(name) << "</text>\n";
  svg << "<rect x=\"" << fmt(plot_left) << "\" y=\"" << fmt(plot_top) << "\" width=\""
      << fmt(plot_right - plot_left) << "\" height=\"" << fmt(plot_bottom - plot_top)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // x ticks
  for (double t : log_ticks(x_lo, x_hi)) {
    const double px = ax.map(t);
    svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(plot_bottom) << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << fmt(plot_bottom + 5) << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(plot_bottom + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  svg << "<text class=\"axis-label\" x=\"" << fmt((plot_left + plot_right) / 2) << "\" y=\""
      << fmt(plot_bottom + 36) << "\" font-size=\"12\" text-anchor=\"middle\">"
      << "remaining edges (%, log scale)</text>\n";

  // left and right y ticks
  for (int i = 0; i <= 4; ++i) {
    const double a = i / 4.0;
    const double g = ay_gap.lo + (ay_gap.hi - ay_gap.lo) * i / 4.0;
    const double py = ay_acc.map(a);
    svg << "<text x=\"" << fmt(plot_left - 6) << "\" y=\"" << fmt(py + 4)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"" << kAccuracyColour << "\">"
        << tick_label(a) << "</text>\n"
        << "<text x=\"" << fmt(plot_right + 6) << "\" y=\"" << fmt(py + 4)
        << "\" font-size=\"11\">" << tick_label(std::round(g * 1000) / 1000) << "</text>\n";
  }
  svg << "<text class=\"axis-label\" transform=\"translate(" << fmt(plot_left - 45) << ","
      << fmt((plot_top + plot_bottom) / 2) << ") rotate(-90)\" font-size=\"12\""
      << " text-anchor=\"middle\" fill=\"" << kAccuracyColour << "\">test accuracy</text>\n";
  svg << "<text class=\"axis-label\" transform=\"translate(" << fmt(plot_right + 60) << ","
      << fmt((plot_top + plot_bottom) / 2) << ") rotate(90)\" font-size=\"12\""
      << " text-anchor=\"middle\">spectral gap</text>\n";

  // zero line of the gap axis
  const double zero_y = ay_gap.map(0.0);
  svg << "<line class=\"gap-zero\" x1=\"" << fmt(plot_left) << "\" y1=\"" << fmt(zero_y)
      << "\" x2=\"" << fmt(plot_right) << "\" y2=\"" << fmt(zero_y)
      << "\" stroke=\"#999\" stroke-width=\"0.8\"/>\n";

  std::vector<std::pair<double, double>> acc_pts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    acc_pts.emplace_back(ax.map(xs[i]), ay_acc.map(records[i].test_accuracy));
  }
  polyline(svg, acc_pts, kAccuracyColour, "accuracy", false);

  for (std::size_t k = 0; k < kinds.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double v = series[k][i];
      pts.emplace_back(ax.map(xs[i]), std::isfinite(v) ? ay_gap.map(v) : v);
    }
    const std::string key = to_string(GapKey{layer, kinds[k]});
    polyline(svg, pts, kGapColours[k], "gap", true);
    if (auto crossing = detect_zero_crossing(series[k])) {
      const double px = ax.map(xs[*crossing]);
      svg << "<line class=\"zero-crossing\" data-gap=\"" << key << "\" x1=\"" << fmt(px)
          << "\" y1=\"" << fmt(plot_top) << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(plot_bottom)
          << "\" stroke=\"" << kGapColours[k] << "\" stroke-dasharray=\"2 3\"/>\n";
    }
    svg << "<text x=\"" << fmt(plot_left + 8 + 160 * static_cast<double>(k + 1)) << "\" y=\""
        << fmt(top + 18) << "\" font-size=\"11\" fill=\"" << kGapColours[k] << "\">"
        << gap_label(kinds[k]) << "</text>\n";
  }
  svg << "</g>\n";
}

std::string csv_value(std::optional<double> v) {
  if (!v) return "";
  if (std::isnan(*v)) return "nan";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return format_double(*v);
}

}  // namespace

std::string render_trajectory_svg(std::span<const PruneRecord> records, const ReportOptions& options) {
  if (records.empty()) throw DomainError("render_trajectory_svg: empty trajectory");
  if (options.layers.empty() || options.modes.empty()) {
    throw DomainError("render_trajectory_svg: nothing to plot");
  }
  for (LayerTag layer : options.layers) {
    if (layer == LayerTag::hy) throw DomainError("render_trajectory_svg: the output layer is not pruned");
  }
  const std::size_t panels = options.layers.size() * options.modes.size();
  const double height = kTop + kPanelHeight * static_cast<double>(panels);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(height)
      << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">"
      << escape(options.title) << "</text>\n";
  double top = kTop;
  for (LayerTag layer : options.layers) {
    for (GraphMode mode : options.modes) {
      panel(svg, records, layer, mode, top);
      top += kPanelHeight;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_trajectory_csv(std::span<const PruneRecord> records) {
  std::ostringstream out;
  out << "round,q_xh,q_hh,test_accuracy";
  for (const GapKey& key : all_gap_keys()) out << ',' << to_string(key);
  out << '\n';
  for (const PruneRecord& r : records) {
    out << r.round << ',' << format_double(r.q_xh) << ',' << format_double(r.q_hh) << ','
        << format_double(r.test_accuracy);
    for (const GapKey& key : all_gap_keys()) out << ',' << csv_value(r.gap(key));
    out << '\n';
  }
  return out.str();
}

}  // namespace expander
