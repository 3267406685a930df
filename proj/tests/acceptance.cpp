// Acceptance suite: one PASS/FAIL line per criterion, plus indented info
// lines. Every tolerance and seed used for a verdict is a constant below.
// Exit status is the number of failed criteria (0 when all pass).
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "expander/experiment.hpp"
#include "expander/graph_spectra.hpp"
#include "expander/pruning.hpp"
#include "expander/unrolled.hpp"
#include "oracles.hpp"

using namespace expander;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 42;

constexpr double kEigTol = 1e-9;          // 1, 3
constexpr double kClosedFormTol = 1e-9;   // 4
constexpr double kSymmetryTol = 1e-8;     // 5
constexpr double kGradRelTol = 1e-4;      // 6
constexpr int kRamanujanNeeded = 95;      // 7, out of 100
constexpr double kKeepTol = 0.05;         // 8a
constexpr double kKeepTolMnist = 0.08;    // 8a on MNIST
constexpr double kDropNeeded = 0.10;      // 8b

constexpr double kBudget1 = 60.0;
constexpr double kBudget4 = 30.0;
constexpr double kBudget6 = 60.0;
constexpr double kBudget8 = 15 * 60.0;

int failures = 0;

void verdict(int id, bool pass, const std::string& name, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string& text) {
  std::printf("    info: %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct GraphCase {
  oracle::Mat adjacency;
  SimpleGraph graph;
};

// Connected Erdos-Renyi graphs with 2..max_n vertices and edge density drawn
// from [0.2, 0.9].
std::vector<GraphCase> connected_corpus(std::size_t count, std::size_t max_n, Rng& rng) {
  std::vector<GraphCase> out;
  while (out.size() < count) {
    const std::size_t n = 2 + rng.below(max_n - 1);
    oracle::Mat a = oracle::random_graph(n, rng.uniform(0.2, 0.9), rng);
    if (!oracle::connected(a)) continue;
    out.push_back({a, SimpleGraph::from_adjacency(oracle::from_mat(a))});
  }
  return out;
}

// min over X with 0 < vol(X) <= vol(V)/2 of e(X, complement) / vol(X).
double conductance(const SimpleGraph& g) {
  const std::size_t n = g.vertex_count();
  std::size_t total = 0;
  for (std::size_t v = 0; v < n; ++v) total += g.degree(v);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t x = 1; x < (1u << n); ++x) {
    std::size_t vol = 0;
    std::size_t cut = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (!(x >> v & 1u)) continue;
      vol += g.degree(v);
      cut += std::popcount(g.neighbours(v) & ~x);
    }
    if (2 * vol > total) continue;
    best = std::min(best, static_cast<double>(cut) / static_cast<double>(vol));
  }
  return best;
}

double alpha2_of(const oracle::Mat& a) { return normalized_laplacian_spectrum(oracle::from_mat(a))[1]; }

void criterion_1_and_2() {
  Stopwatch sw;
  Rng rng = Rng::derive(kSeed, 1);
  const auto corpus = connected_corpus(200, 14, rng);
  std::size_t lower_bad = 0, upper_bad = 0, cond_bad = 0;
  std::size_t vertex_lower_bad = 0, vertex_upper_bad = 0, vertex_reversed_bad = 0;
  std::string example;
  for (const GraphCase& c : corpus) {
    const double h = edge_cheeger_bruteforce(c.graph);
    const double hv = vertex_cheeger_bruteforce(c.graph);
    const double a2 = alpha2_of(c.adjacency);
    const double big_d = static_cast<double>(c.graph.max_degree());
    if (h * h / 2 > a2 + kEigTol) {
      ++lower_bad;
      if (example.empty()) {
        example = fmt("n=%zu edges=%zu h=%.4f alpha2=%.4f", c.graph.vertex_count(),
                      c.graph.edge_count(), h, a2);
      }
    }
    if (a2 > 2 * h + kEigTol) ++upper_bad;
    const double phi = conductance(c.graph);
    if (phi * phi / 2 > a2 + kEigTol || a2 > 2 * phi + kEigTol) ++cond_bad;
    // Stated direction: hv / D <= h <= hv.
    if (hv / big_d > h) ++vertex_lower_bad;
    if (h > hv) ++vertex_upper_bad;
    // Opposite direction: hv <= h <= D hv.
    if (hv > h || h > big_d * hv) ++vertex_reversed_bad;
  }
  const double t = sw.seconds();
  verdict(1, lower_bad == 0 && upper_bad == 0 && t < kBudget1, "Cheeger-Buser sandwich h^2/2 <= alpha2 <= 2h",
          fmt("%zu graphs, lower bound violated on %zu, upper on %zu, %.2fs", corpus.size(), lower_bad,
              upper_bad, t));
  if (!example.empty()) info("first lower-bound violation: " + example);
  info(fmt("same corpus with conductance phi in place of h: %zu violations of phi^2/2 <= alpha2 <= 2 phi",
           cond_bad));
  verdict(2, vertex_lower_bad == 0 && vertex_upper_bad == 0, "vertex/edge Cheeger equivalence hv/D <= h <= hv",
          fmt("%zu graphs, hv/D <= h violated on %zu, h <= hv violated on %zu", corpus.size(),
              vertex_lower_bad, vertex_upper_bad));
  info(fmt("opposite direction hv <= h <= D hv violated on %zu of %zu", vertex_reversed_bad, corpus.size()));
}

void criterion_3() {
  Rng rng = Rng::derive(kSeed, 3);
  const auto corpus = connected_corpus(100, 12, rng);
  std::size_t bad_graphs = 0, bad_pairs = 0, pairs = 0, bad_nonneg = 0, bad_ordered = 0;
  for (const GraphCase& c : corpus) {
    const auto lambda = sym_eigenvalues(oracle::from_mat(c.adjacency)).eigenvalues;  // descending
    const auto alpha = normalized_laplacian_spectrum(oracle::from_mat(c.adjacency));  // ascending
    const double small_d = static_cast<double>(c.graph.min_degree());
    const double big_d = static_cast<double>(c.graph.max_degree());
    bool graph_bad = false;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      const double mid = 1 - alpha[i];
      const double lo = lambda[i] / big_d;
      const double hi = lambda[i] / small_d;
      ++pairs;
      const bool ok = lo <= mid + kEigTol && mid <= hi + kEigTol;
      if (!ok) {
        ++bad_pairs;
        graph_bad = true;
        if (lambda[i] >= 0) ++bad_nonneg;
      }
      if (std::min(lo, hi) > mid + kEigTol || mid > std::max(lo, hi) + kEigTol) ++bad_ordered;
    }
    bad_graphs += graph_bad;
  }
  verdict(3, bad_pairs == 0, "adjacency-Laplacian relation lambda_i/D <= 1 - alpha_i <= lambda_i/d",
          fmt("%zu graphs, %zu eigenpairs, violated on %zu pairs in %zu graphs", corpus.size(), pairs,
              bad_pairs, bad_graphs));
  info(fmt("violations with lambda_i >= 0: %zu; with the bounds ordered as min/max of the two: %zu",
           bad_nonneg, bad_ordered));
}

void criterion_4() {
  Stopwatch sw;
  Rng rng = Rng::derive(kSeed, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(6);
    const std::size_t k = 1 + rng.below(8);
    DenseMatrix b = oracle::random_symmetric(m, rng);
    const UnrolledSpec spec{b, k};
    const auto closed = closed_form_spectrum(spec);
    const auto dense = sym_eigenvalues(build_unrolled(spec));
    for (std::size_t i = 0; i < closed.size(); ++i) worst = std::max(worst, std::abs(closed[i] - dense[i]));
  }
  const double t = sw.seconds();
  verdict(4, worst <= kClosedFormTol && t < kBudget4, "Toeplitz closed form vs dense spectrum",
          fmt("50 cases, max deviation %.3g, %.2fs", worst, t));
}

void criterion_5() {
  Rng rng = Rng::derive(kSeed, 5);
  double worst = 0.0;
  double worst_top2 = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(64);
    const std::size_t n = 1 + rng.below(64);
    DenseMatrix b = oracle::random_matrix(m, n, rng);
    const auto ev = sym_eigenvalues_ascending(bipartite_adjacency(b));
    std::vector<double> expected;
    for (double s : oracle::singular_values(b)) {
      expected.push_back(s);
      expected.push_back(-s);
    }
    expected.resize(m + n, 0.0);
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < ev.size(); ++i) worst = std::max(worst, std::abs(ev[i] - expected[i]));
    const SingularPair p = top_two_singular_values(b);
    worst_top2 = std::max({worst_top2, std::abs(p.sigma1 - ev[m + n - 1]),
                           std::abs(p.sigma2 - (m + n >= 2 ? std::max(ev[m + n - 2], 0.0) : 0.0))});
  }
  verdict(5, worst <= kSymmetryTol, "bipartite spectral symmetry",
          fmt("50 matrices up to 64x64, max deviation %.3g", worst));
  info(fmt("top-two singular values vs the two largest eigenvalues: max deviation %.3g", worst_top2));
}

void criterion_6() {
  Stopwatch sw;
  double worst = 0.0;
  std::size_t checked = 0;
  for (CellKind cell : {CellKind::rnn, CellKind::lstm}) {
    for (std::size_t hidden : {4u, 8u}) {
      for (std::size_t k : {1u, 3u, 7u}) {
        const auto r = oracle::finite_difference_check(cell, hidden, k, kSeed + 10 * hidden + k);
        worst = std::max(worst, r.worst);
        checked += r.checked;
      }
    }
  }
  const double t = sw.seconds();
  verdict(6, worst < kGradRelTol && t < kBudget6, "BPTT gradients vs central differences",
          fmt("rnn+lstm, hidden {4,8}, k {1,3,7}: %zu parameters, worst relative error %.3g, %.2fs",
              checked, worst, t));
}

void criterion_7() {
  Rng rng = Rng::derive(kSeed, 7);
  int positive = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    DenseMatrix b = oracle::random_regular_bipartite(64, 3, rng);
    const SpectralReport r = spectral_gaps(build_bipartite(b, GraphMode::unweighted));
    positive += *r.delta_R > 0;
    min_gap = std::min(min_gap, *r.delta_R);
  }
  verdict(7, positive >= kRamanujanNeeded, "Ramanujan prevalence, 3-regular bipartite 64+64",
          fmt("delta_R > 0 in %d of 100 (need %d), smallest delta_R %.4f", positive, kRamanujanNeeded,
              min_gap));
}

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.cell = CellKind::rnn;
  c.hidden_size = 32;
  c.source = DataSource::synth;
  c.synth = SynthSpec{SynthKind::running_parity, 4000, 16, 4, 3, kSeed};
  c.train.learning_rate = 0.002;
  c.train.train_epochs = 40;
  c.train.batch_size = 20;
  c.train.seed = kSeed;
  c.schedule.rounds = 20;
  c.schedule.final_fraction = 0.01;
  c.schedule.finetune_epochs = 2;
  c.per_gate_reports = false;
  return c;
}

struct TrendResult {
  bool a = false;
  bool b = false;
  std::string detail_a;
  std::string detail_b;
};

TrendResult imp_trend(const PruneTrajectory& t, double keep_tol) {
  TrendResult out;
  const double dense = t.records.front().test_accuracy;
  std::size_t positive_rounds = 0;
  double worst_drop = 0.0;
  std::size_t worst_round = 0;
  for (const PruneRecord& r : t.records) {
    const double xh = r.gap({LayerTag::xh, GapKind::unweighted_S}).value();
    const double hh = r.gap({LayerTag::hh, GapKind::unweighted_S}).value();
    if (!(xh > 0 && hh > 0)) continue;
    ++positive_rounds;
    const double drop = dense - r.test_accuracy;
    if (drop > worst_drop) {
      worst_drop = drop;
      worst_round = r.round;
    }
  }
  out.a = positive_rounds > 0 && worst_drop <= keep_tol;
  out.detail_a = fmt("dense %.4f; %zu rounds with unweighted delta_S > 0 on both layers, largest drop %.4f "
                     "(round %zu, need <= %.2f)",
                     dense, positive_rounds, worst_drop, worst_round, keep_tol);
  const auto crossing = detect_zero_crossing(t, LayerTag::hh, GapKind::weighted_S);
  if (!crossing) {
    out.detail_b = "weighted delta_S of W_hh never crossed zero";
    return out;
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = *crossing; i < t.records.size(); ++i) {
    sum += t.records[i].test_accuracy;
    ++n;
  }
  const double mean = sum / static_cast<double>(n);
  out.b = dense - mean >= kDropNeeded;
  out.detail_b = fmt("W_hh weighted delta_S crosses at round %zu (q_hh %.3f); mean accuracy from then on %.4f, "
                     "drop %.4f (need >= %.2f)",
                     *crossing, t.records[*crossing].q_hh, mean, dense - mean, kDropNeeded);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PruneRunResult fresh_run(const ExperimentConfig& c, const fs::path& dir) {
  fs::remove_all(dir);
  return run_prune_experiment(c, dir);
}

void criterion_8_and_9() {
  const fs::path root = fs::temp_directory_path() / "expander_acceptance";
  const ExperimentConfig c = desk_config();
  Stopwatch sw;
  const PruneRunResult first = fresh_run(c, root / "run1");
  const double t = sw.seconds();
  const TrendResult trend = imp_trend(first.trajectory, kKeepTol);
  verdict(8, trend.a && trend.b && t < kBudget8, "desk-scale IMP trend on running parity",
          fmt("(a) %s, (b) %s, %zu rounds in %.1fs", trend.a ? "pass" : "fail", trend.b ? "pass" : "fail",
              first.trajectory.records.size(), t));
  info("(a) " + trend.detail_a);
  info("(b) " + trend.detail_b);
  for (const PruneRecord& r : first.trajectory.records) {
    info(fmt("round %2zu q_xh %.3f q_hh %.3f acc %.4f | uS xh %8.4f hh %8.4f | wS hh %8.4f", r.round, r.q_xh,
             r.q_hh, r.test_accuracy, r.gap({LayerTag::xh, GapKind::unweighted_S}).value(),
             r.gap({LayerTag::hh, GapKind::unweighted_S}).value(),
             r.gap({LayerTag::hh, GapKind::weighted_S}).value()));
  }

  const char* mnist = std::getenv("MNIST_DIR");
  if (mnist == nullptr || *mnist == '\0') {
    info("MNIST variant: SKIP (set MNIST_DIR to a directory holding train-images-idx3-ubyte and "
         "train-labels-idx1-ubyte)");
  } else {
    ExperimentConfig m = c;
    m.source = DataSource::idx;
    m.idx_images = (fs::path(mnist) / "train-images-idx3-ubyte").string();
    m.idx_labels = (fs::path(mnist) / "train-labels-idx1-ubyte").string();
    m.idx_limit = 5000;
    try {
      const TrendResult mt = imp_trend(fresh_run(m, root / "mnist").trajectory, kKeepTolMnist);
      info(fmt("MNIST variant: (a) %s, (b) %s", mt.a ? "PASS" : "FAIL", mt.b ? "PASS" : "FAIL"));
      info("MNIST (a) " + mt.detail_a);
      info("MNIST (b) " + mt.detail_b);
    } catch (const std::exception& e) {
      info(std::string("MNIST variant: ERROR ") + e.what());
    }
  }

  const PruneRunResult second = fresh_run(c, root / "run2");
  const std::string a = slurp(first.trajectory_path);
  const std::string b = slurp(second.trajectory_path);
  verdict(9, !a.empty() && a == b, "determinism of the trajectory file",
          fmt("two runs with seed %llu: %zu and %zu bytes, %s", static_cast<unsigned long long>(kSeed), a.size(),
              b.size(), a == b ? "identical" : "different"));
}

void criterion_10() {
  struct Trace {
    std::vector<double> gaps;
    std::optional<std::size_t> expected;
  };
  const std::vector<Trace> traces = {
      {{0.4, 0.1, -0.2, -0.5}, 2},
      {{0.3, 0.2, 0.1, 0.05}, std::nullopt},
      {{0.1, -0.1, 0.2, -0.3}, 1},
  };
  std::size_t exact = 0;
  for (const Trace& t : traces) {
    PruneTrajectory traj;
    for (std::size_t i = 0; i < t.gaps.size(); ++i) {
      PruneRecord r;
      r.round = i;
      SpectralReport s;
      s.mode = GraphMode::weighted;
      s.delta_S = t.gaps[i];
      r.reports.push_back({LayerTag::hh, std::nullopt, s});
      traj.records.push_back(r);
    }
    const bool ok = detect_zero_crossing(t.gaps) == t.expected &&
                    detect_zero_crossing(traj, LayerTag::hh, GapKind::weighted_S) == t.expected;
    exact += ok;
  }
  verdict(10, exact == traces.size(), "zero-crossing detector on the example traces",
          fmt("%zu of %zu exact", exact, traces.size()));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps = {criterion_1_and_2, criterion_3, criterion_4, criterion_5,
                                                    criterion_6,       criterion_7, criterion_8_and_9,
                                                    criterion_10};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      std::printf("[FAIL] error: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures;
}
