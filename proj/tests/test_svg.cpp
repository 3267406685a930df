#include <gtest/gtest.h>

#include <regex>
#include <sstream>
#include <string>

#include "expander/errors.hpp"
#include "expander/svg_report.hpp"

using namespace expander;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

SpectralReport report(GraphMode mode, double delta_s, double delta_r) {
  SpectralReport r;
  r.mode = mode;
  r.delta_S = delta_s;
  if (mode == GraphMode::unweighted) r.delta_R = delta_r;
  return r;
}

// hh weighted_S crosses at round 2; every other gap stays positive.
std::vector<PruneRecord> trajectory() {
  const std::vector<double> q{1.0, 0.5, 0.25, 0.125};
  const std::vector<double> acc{0.9, 0.88, 0.7, 0.55};
  const std::vector<double> hh_w{1.5, 0.3, -0.2, -0.6};
  std::vector<PruneRecord> out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    PruneRecord r;
    r.round = i;
    r.q_xh = q[i];
    r.q_hh = q[i];
    r.test_accuracy = acc[i];
    for (LayerTag layer : {LayerTag::xh, LayerTag::hh}) {
      r.reports.push_back({layer, std::nullopt, report(GraphMode::unweighted, 2.0 - 0.1 * i, 3.0)});
      const double w = layer == LayerTag::hh ? hh_w[i] : 1.0;
      r.reports.push_back({layer, std::nullopt, report(GraphMode::weighted, w, 0.0)});
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(Svg, OneRulePerCrossedGapKind) {
  const std::string svg = render_trajectory_svg(trajectory());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "class=\"panel\""), 4u);
  EXPECT_EQ(count(svg, "class=\"zero-crossing\""), 1u);
  EXPECT_EQ(count(svg, "data-gap=\"hh:weighted_S\""), 1u);
}

TEST(Svg, SecondCrossingKindAddsSecondRule) {
  auto recs = trajectory();
  for (auto& r : recs) {
    for (auto& lr : r.reports) {
      if (lr.layer == LayerTag::xh && lr.report.mode == GraphMode::unweighted && r.round >= 1) {
        lr.report.delta_R = -1.0;
      }
    }
  }
  const std::string svg = render_trajectory_svg(recs);
  EXPECT_EQ(count(svg, "class=\"zero-crossing\""), 2u);
  EXPECT_EQ(count(svg, "data-gap=\"xh:unweighted_R\""), 1u);
}

TEST(Svg, AxisRangesCoverData) {
  const std::string svg = render_trajectory_svg(trajectory());
  std::regex panel(
      "data-layer=\"(\\w+)\" data-mode=\"(\\w+)\" data-x-range=\"([^ ]+) ([^\"]+)\" "
      "data-gap-range=\"([^ ]+) ([^\"]+)\" data-accuracy-range=\"0 1\"");
  std::size_t panels = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), panel), end; it != end; ++it) {
    const auto& m = *it;
    EXPECT_LE(std::stod(m[3]), 12.5);
    EXPECT_GE(std::stod(m[4]), 100.0);
    const double lo = std::stod(m[5]);
    const double hi = std::stod(m[6]);
    if (m[1] == "hh" && m[2] == "weighted") {
      EXPECT_LE(lo, -0.6);
      EXPECT_GE(hi, 1.5);
    } else if (m[2] == "unweighted") {
      EXPECT_LE(lo, 0.0);
      EXPECT_GE(hi, 3.0);
    }
    ++panels;
  }
  EXPECT_EQ(panels, 4u);
}

TEST(Svg, FilteredPanelsAndInfiniteGaps) {
  auto recs = trajectory();
  recs[0].reports[0].report.delta_S = std::numeric_limits<double>::infinity();
  ReportOptions opts;
  opts.layers = {LayerTag::xh};
  opts.modes = {GraphMode::unweighted};
  const std::string svg = render_trajectory_svg(recs, opts);
  EXPECT_EQ(count(svg, "class=\"panel\""), 1u);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Svg, EmptyTrajectoryThrows) {
  EXPECT_THROW(render_trajectory_svg({}), DomainError);
}

TEST(Csv, RowCountEqualsRecordCount) {
  auto recs = trajectory();
  const std::string csv = render_trajectory_csv(recs);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("round,q_xh,q_hh,test_accuracy", 0), 0u);
  EXPECT_EQ(count(header, ","), 3u + 6u);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++rows;
  }
  EXPECT_EQ(rows, recs.size());
}
