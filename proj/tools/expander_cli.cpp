// Command-line front end: analyze | prune | unroll | report | train.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "expander/checkpoint.hpp"
#include "expander/config.hpp"
#include "expander/errors.hpp"
#include "expander/experiment.hpp"
#include "expander/graph_spectra.hpp"
#include "expander/matrix_io.hpp"
#include "expander/svg_report.hpp"
#include "expander/unrolled.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace expander;

namespace {

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json report_json(const SpectralReport& r) {
  Json j;
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

std::vector<GraphMode> modes_from(const std::string& flag) {
  if (flag == "both") return {GraphMode::unweighted, GraphMode::weighted};
  return {parse_graph_mode(flag)};
}

std::vector<LayerTag> layers_from(const std::string& flag) {
  if (flag == "all") return {LayerTag::xh, LayerTag::hh};
  return {parse_layer_tag(flag)};
}

struct Common {
  std::string mode = "both";
  std::string layer = "all";
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load_with_overrides(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.train.seed = *c.seed;
  return cfg;
}

std::optional<fs::path> out_override(const Common& c) {
  if (c.out.empty()) return std::nullopt;
  return fs::path(c.out);
}

int cmd_analyze(const std::string& input, const Common& c) {
  Json out;
  out["input"] = input;
  Json reports = Json::array();
  const auto modes = modes_from(c.mode);
  if (!fs::exists(input)) throw IoError("cannot open '" + input + "'");
  if (is_checkpoint_file(input)) {
    Checkpoint ck = load_checkpoint(input);
    out["kind"] = "checkpoint";
    out["cell"] = std::string(to_string(ck.params.cell));
    out["hidden"] = ck.params.hidden_size;
    for (LayerTag layer : layers_from(c.layer)) {
      for (GraphMode mode : modes) {
        BipartiteGraph g = build_bipartite(WeightMatrix{layer, ck.params.layer(layer)},
                                           ck.mask.layer(layer), mode);
        Json r = report_json(spectral_gaps(g));
        r["layer"] = std::string(to_string(layer));
        r["remaining_fraction"] = ck.mask.layer(layer).kept_fraction();
        reports.push_back(std::move(r));
      }
    }
  } else {
    DenseMatrix m = load_matx(input);
    out["kind"] = "matrix";
    out["shape"] = {m.rows(), m.cols()};
    for (GraphMode mode : modes) {
      reports.push_back(report_json(spectral_gaps(build_bipartite(m, mode))));
    }
  }
  out["reports"] = std::move(reports);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_prune(const Common& c, std::optional<std::size_t> stop_after) {
  ExperimentConfig cfg = load_with_overrides(c);
  const fs::path dir = resolve_output_dir(cfg, out_override(c));
  PruneRunResult res = run_prune_experiment(cfg, dir, stop_after);
  std::cout << "output: " << dir.string() << '\n'
            << "rounds resumed from disk: " << res.resumed_rounds << '\n'
            << "rounds recorded: " << res.trajectory.records.size() << "\n\n"
            << zero_crossing_table(res.trajectory);
  return 0;
}

int cmd_train(const Common& c) {
  ExperimentConfig cfg = load_with_overrides(c);
  const fs::path dir = resolve_output_dir(cfg, out_override(c));
  TrainRunResult res = run_train_experiment(cfg, dir);
  std::printf("train accuracy %.4f\ntest accuracy %.4f\ncheckpoint %s\n", res.train_accuracy,
              res.test_accuracy, res.checkpoint_path.string().c_str());
  return 0;
}

int cmd_unroll(const std::string& input, std::size_t k, bool closed_form, const Common& c) {
  DenseMatrix b = load_matx(input);
  UnrolledSpec spec{b, k};
  const bool symmetric = b.is_square() && b.is_symmetric(1e-12);
  if (closed_form && !symmetric) {
    throw DomainError("refusing --closed-form: B is not symmetric, no closed-form spectrum exists");
  }
  SymmetricSpectrum numeric = sym_eigenvalues(build_unrolled(spec));
  Json out;
  out["input"] = input;
  out["k"] = k;
  out["dimension"] = spec.dimension();
  Json ev = Json::array();
  for (double x : numeric.eigenvalues) ev.push_back(x);
  out["spectrum"] = std::move(ev);
  if (symmetric) {
    SymmetricSpectrum closed = closed_form_spectrum(spec);
    double dev = 0.0;
    Json cf = Json::array();
    for (std::size_t i = 0; i < closed.size(); ++i) {
      cf.push_back(closed[i]);
      dev = std::max(dev, std::abs(closed[i] - numeric[i]));
    }
    out["closed_form"] = std::move(cf);
    out["max_deviation"] = dev;
  }
  Json block = Json::array();
  Json unrolled = Json::array();
  for (GraphMode mode : modes_from(c.mode)) {
    block.push_back(report_json(spectral_gaps(build_bipartite(b, mode))));
    unrolled.push_back(report_json(unrolled_gap_report(spec, mode)));
  }
  out["block_reports"] = std::move(block);
  out["unrolled_reports"] = std::move(unrolled);
  std::cout << out.dump(2) << '\n';
  if (symmetric) std::cerr << "max deviation numeric vs closed form: " << out["max_deviation"] << '\n';
  return 0;
}

int cmd_report(const std::string& trajectory, const Common& c) {
  std::vector<PruneRecord> records = read_trajectory_jsonl(trajectory);
  if (records.empty()) throw DomainError("trajectory '" + trajectory + "' has no records");
  ReportOptions opts;
  opts.layers = layers_from(c.layer);
  opts.modes = modes_from(c.mode);
  fs::path svg_path = c.out.empty() ? fs::path(trajectory).replace_extension(".svg") : fs::path(c.out);
  fs::path csv_path = svg_path;
  csv_path.replace_extension(".csv");
  const std::string svg = render_trajectory_svg(records, opts);
  const std::string csv = render_trajectory_csv(records);
  for (const auto& [path, text] : {std::pair{svg_path, svg}, std::pair{csv_path, csv}}) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << text;
  }
  std::cout << "wrote " << svg_path.string() << " and " << csv_path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expansion analysis and magnitude pruning of recurrent layer graphs"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    sub->add_option("--mode", common.mode, "weighted, unweighted or both")
        ->check(CLI::IsMember({"weighted", "unweighted", "both"}));
    sub->add_option("--layer", common.layer, "wxh, whh or all")
        ->check(CLI::IsMember({"wxh", "whh", "all"}));
    sub->add_option("--out", common.out, "output path");
    if (with_config) {
      sub->add_option("--config", common.config, "experiment config file")->required();
      sub->add_option("--seed", seed_value, "override train.seed");
    }
  };

  std::string input;
  auto* analyze = app.add_subcommand("analyze", "spectral reports of a checkpoint or matx file");
  analyze->add_option("input", input, "checkpoint (.rprm) or matrix (matx) file")->required();
  add_common(analyze, false);

  std::size_t stop_after = 0;
  auto* prune = app.add_subcommand("prune", "run or resume iterative magnitude pruning");
  add_common(prune, true);
  auto* stop_opt = prune->add_option("--stop-after-round", stop_after,
                                     "stop after this round (resume later)");

  std::size_t k = 1;
  bool closed_form = false;
  auto* unroll = app.add_subcommand("unroll", "spectrum of the time-unrolled W_xh chain");
  unroll->add_option("input", input, "matx file holding the square block B")->required();
  unroll->add_option("--k", k, "unrolling steps")->required()->check(CLI::PositiveNumber);
  unroll->add_flag("--closed-form", closed_form, "require and print the closed-form spectrum");
  add_common(unroll, false);

  auto* report = app.add_subcommand("report", "SVG and CSV figure from a trajectory");
  report->add_option("trajectory", input, "trajectory.jsonl")->required();
  add_common(report, false);

  auto* train = app.add_subcommand("train", "dense training only");
  add_common(train, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E_USAGE: " << e.what() << '\n';
    return 64;
  }

  for (auto* sub : {prune, train}) {
    if (sub->parsed() && sub->count("--seed") > 0) common.seed = seed_value;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(input, common);
    if (prune->parsed()) {
      return cmd_prune(common, stop_opt->count() > 0 ? std::optional<std::size_t>(stop_after)
                                                     : std::nullopt);
    }
    if (unroll->parsed()) return cmd_unroll(input, k, closed_form, common);
    if (report->parsed()) return cmd_report(input, common);
    if (train->parsed()) return cmd_train(common);
  } catch (const Error& e) {
    std::cerr << error_code_name(e.code()) << ": " << e.what() << '\n';
    return error_exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
