#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "expander/errors.hpp"
#include "expander/pruning.hpp"

namespace expander {

namespace {

using Json = nlohmann::ordered_json;

// JSON has no literal for non-finite numbers.
Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double read_number(const Json& j, const char* field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw FormatError(std::string("trajectory: field '") + field + "' is not a number");
}

Json report_to_json(const LayerReport& lr) {
  const SpectralReport& r = lr.report;
  Json j;
  j["layer"] = std::string(to_string(lr.layer));
  j["gate"] = lr.gate ? Json(*lr.gate) : Json(nullptr);
  j["mode"] = std::string(to_string(r.mode));
  j["lambda1"] = number(r.lambda1);
  j["lambda2"] = number(r.lambda2);
  j["d_avg"] = number(r.d_avg);
  j["alpha2"] = number(r.alpha2);
  j["delta_R"] = r.delta_R ? number(*r.delta_R) : Json(nullptr);
  j["delta_S"] = number(r.delta_S);
  j["cheeger_lower"] = number(r.cheeger_lower);
  j["cheeger_upper"] = number(r.cheeger_upper);
  j["ramanujan"] = r.ramanujan;
  return j;
}

LayerReport report_from_json(const Json& j) {
  LayerReport lr;
  lr.layer = parse_layer_tag(j.at("layer").get<std::string>());
  if (!j.at("gate").is_null()) lr.gate = j.at("gate").get<std::size_t>();
  SpectralReport& r = lr.report;
  r.mode = parse_graph_mode(j.at("mode").get<std::string>());
  r.lambda1 = read_number(j.at("lambda1"), "lambda1");
  r.lambda2 = read_number(j.at("lambda2"), "lambda2");
  r.d_avg = read_number(j.at("d_avg"), "d_avg");
  r.alpha2 = read_number(j.at("alpha2"), "alpha2");
  if (!j.at("delta_R").is_null()) r.delta_R = read_number(j.at("delta_R"), "delta_R");
  r.delta_S = read_number(j.at("delta_S"), "delta_S");
  r.cheeger_lower = read_number(j.at("cheeger_lower"), "cheeger_lower");
  r.cheeger_upper = read_number(j.at("cheeger_upper"), "cheeger_upper");
  r.ramanujan = j.at("ramanujan").get<bool>();
  return lr;
}

}  // namespace

std::string record_to_json(const PruneRecord& record) {
  Json j;
  j["round"] = record.round;
  j["q_xh"] = number(record.q_xh);
  j["q_hh"] = number(record.q_hh);
  j["test_accuracy"] = number(record.test_accuracy);
  Json reports = Json::array();
  for (const LayerReport& r : record.reports) reports.push_back(report_to_json(r));
  j["reports"] = std::move(reports);
  Json crossed = Json::object();
  for (const auto& [key, flag] : record.zero_crossed) crossed[to_string(key)] = flag;
  j["zero_crossed"] = std::move(crossed);
  return j.dump();
}

PruneRecord record_from_json(std::string_view line) {
  try {
    Json j = Json::parse(line);
    PruneRecord rec;
    rec.round = j.at("round").get<std::size_t>();
    rec.q_xh = read_number(j.at("q_xh"), "q_xh");
    rec.q_hh = read_number(j.at("q_hh"), "q_hh");
    rec.test_accuracy = read_number(j.at("test_accuracy"), "test_accuracy");
    for (const Json& r : j.at("reports")) rec.reports.push_back(report_from_json(r));
    for (const auto& [key, flag] : j.at("zero_crossed").items()) {
      rec.zero_crossed.emplace_back(parse_gap_key(key), flag.get<bool>());
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("trajectory record: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("trajectory record: ") + e.what());
  }
}

void write_trajectory_jsonl(const std::filesystem::path& path, std::span<const PruneRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const PruneRecord& r : records) out << record_to_json(r) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void append_record_jsonl(const std::filesystem::path& path, const PruneRecord& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << record_to_json(record) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<PruneRecord> read_trajectory_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<PruneRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace expander
