#include "expander/graph_spectra.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "expander/errors.hpp"

namespace expander {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> row_sums(const DenseMatrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (double x : m.row(r)) out[r] += x;
  }
  return out;
}

void require_edges(const BipartiteGraph& g, const char* where) {
  if (g.biadjacency.empty()) throw ShapeError(std::string(where) + ": empty biadjacency");
  if (g.degenerate()) throw DegenerateGraphError(std::string(where) + ": graph has no edge");
}

}  // namespace

std::string_view to_string(GraphMode mode) {
  return mode == GraphMode::weighted ? "weighted" : "unweighted";
}

GraphMode parse_graph_mode(std::string_view text) {
  if (text == "weighted") return GraphMode::weighted;
  if (text == "unweighted") return GraphMode::unweighted;
  throw DomainError("unknown graph mode '" + std::string(text) + "'");
}

std::size_t BipartiteGraph::edge_count() const {
  auto d = biadjacency.data();
  return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](double x) { return x != 0.0; }));
}

BipartiteGraph build_bipartite(const WeightMatrix& w, const LayerMask& mask, GraphMode mode) {
  if (!mask.congruent(w.values)) {
    throw ShapeError("build_bipartite: mask is " + std::to_string(mask.rows()) + "x" +
                     std::to_string(mask.cols()) + ", weights are " +
                     std::to_string(w.values.rows()) + "x" + std::to_string(w.values.cols()));
  }
  if (w.values.empty()) throw ShapeError("build_bipartite: empty weight matrix");
  DenseMatrix b(w.values.rows(), w.values.cols());
  auto src = w.values.data();
  auto dst = b.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!mask.at(i)) continue;
    if (mode == GraphMode::weighted) {
      dst[i] = std::abs(src[i]);
    } else {
      dst[i] = src[i] != 0.0 ? 1.0 : 0.0;
    }
  }
  return BipartiteGraph{std::move(b), mode};
}

BipartiteGraph build_bipartite(const DenseMatrix& w, GraphMode mode) {
  return build_bipartite(WeightMatrix{LayerTag::xh, w}, LayerMask::full(w.rows(), w.cols()), mode);
}

DegreeStats degree_stats(const BipartiteGraph& g) {
  std::vector<double> degrees = row_sums(g.biadjacency);
  std::vector<double> col(g.right_size(), 0.0);
  for (std::size_t r = 0; r < g.left_size(); ++r) {
    auto row = g.biadjacency.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) col[c] += row[c];
  }
  degrees.insert(degrees.end(), col.begin(), col.end());

  DegreeStats s;
  if (degrees.empty()) return s;
  double total = 0.0;
  double min_positive = kInf;
  for (double d : degrees) {
    total += d;
    s.max_degree = std::max(s.max_degree, d);
    if (d > 0.0) {
      min_positive = std::min(min_positive, d);
    } else {
      ++s.isolated_count;
    }
  }
  s.d_avg = total / static_cast<double>(degrees.size());
  s.min_degree = std::isfinite(min_positive) ? min_positive : 0.0;
  return s;
}

double ramanujan_gap(double degree_proxy, double lambda2) {
  if (!(lambda2 >= kLambda2Floor)) return kInf;
  const double radical = degree_proxy > 1.0 ? 2.0 * std::sqrt(degree_proxy - 1.0) : 0.0;
  return (radical - lambda2) / lambda2;
}

CheegerBounds cheeger_bounds(double alpha2) {
  if (!(alpha2 >= 0.0 && alpha2 <= 2.0)) {
    throw DomainError("cheeger_bounds: alpha2 = " + std::to_string(alpha2) + " outside [0, 2]");
  }
  return CheegerBounds{alpha2 / 2.0, std::sqrt(2.0 * alpha2)};
}

SpectralReport assemble_report(GraphMode mode, double lambda1, double lambda2, double d_avg,
                               double alpha2) {
  SpectralReport r;
  r.mode = mode;
  r.lambda1 = lambda1;
  r.lambda2 = lambda2;
  r.d_avg = d_avg;
  r.alpha2 = alpha2;
  r.delta_S = ramanujan_gap(lambda1, lambda2);
  if (mode == GraphMode::unweighted) r.delta_R = ramanujan_gap(d_avg, lambda2);
  CheegerBounds cb = cheeger_bounds(alpha2);
  r.cheeger_lower = cb.lower;
  r.cheeger_upper = cb.upper;
  r.ramanujan = mode == GraphMode::weighted ? r.delta_S >= 0.0 : *r.delta_R >= 0.0;
  return r;
}

std::vector<double> normalized_laplacian_spectrum(const DenseMatrix& adjacency) {
  if (!adjacency.is_square()) throw ShapeError("normalized_laplacian_spectrum: not square");
  std::vector<double> degree = row_sums(adjacency);
  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < degree.size(); ++v) {
    if (degree[v] > 0.0) keep.push_back(v);
  }
  DenseMatrix l(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) {
      const double a = adjacency(keep[i], keep[j]);
      // sqrt of the product (not product of sqrts) keeps L exactly symmetric.
      const double scaled = a == 0.0 ? 0.0 : a / std::sqrt(degree[keep[i]] * degree[keep[j]]);
      l(i, j) = (i == j ? 1.0 : 0.0) - scaled;
    }
  }
  return sym_eigenvalues_ascending(l);
}

double normalized_laplacian_alpha2(const BipartiteGraph& g) {
  std::vector<double> spectrum = normalized_laplacian_spectrum(bipartite_adjacency(g.biadjacency));
  if (spectrum.size() < 2) {
    throw DegenerateGraphError("normalized_laplacian_alpha2: fewer than 2 non-isolated vertices");
  }
  return std::clamp(spectrum[1], 0.0, 2.0);
}

SpectralReport spectral_gaps(const BipartiteGraph& g) {
  require_edges(g, "spectral_gaps");
  SingularPair sv = top_two_singular_values(g.biadjacency);
  DegreeStats ds = degree_stats(g);
  return assemble_report(g.mode, sv.sigma1, sv.sigma2, ds.d_avg, normalized_laplacian_alpha2(g));
}

SimpleGraph::SimpleGraph(std::size_t vertex_count) : neighbours_(vertex_count, 0) {
  if (vertex_count > kMaxVertices) {
    throw SizeError("SimpleGraph: " + std::to_string(vertex_count) + " vertices, limit " +
                    std::to_string(kMaxVertices));
  }
}

SimpleGraph SimpleGraph::from_bipartite(const BipartiteGraph& g) {
  const std::size_t m = g.left_size();
  SimpleGraph out(g.vertex_count());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < g.right_size(); ++j) {
      if (g.biadjacency(i, j) != 0.0) out.add_edge(i, m + j);
    }
  }
  return out;
}

SimpleGraph SimpleGraph::from_adjacency(const DenseMatrix& adjacency) {
  if (!adjacency.is_square()) throw ShapeError("SimpleGraph::from_adjacency: not square");
  SimpleGraph out(adjacency.rows());
  for (std::size_t i = 0; i < adjacency.rows(); ++i) {
    for (std::size_t j = i + 1; j < adjacency.cols(); ++j) {
      const bool a = adjacency(i, j) != 0.0;
      if (a != (adjacency(j, i) != 0.0)) {
        throw ShapeError("SimpleGraph::from_adjacency: support is not symmetric");
      }
      if (a) out.add_edge(i, j);
    }
  }
  return out;
}

std::size_t SimpleGraph::edge_count() const {
  std::size_t twice = 0;
  for (std::uint32_t n : neighbours_) twice += static_cast<std::size_t>(std::popcount(n));
  return twice / 2;
}

void SimpleGraph::add_edge(std::size_t u, std::size_t v) {
  if (u >= vertex_count() || v >= vertex_count() || u == v) {
    throw DomainError("SimpleGraph::add_edge: invalid edge (" + std::to_string(u) + ", " +
                      std::to_string(v) + ")");
  }
  neighbours_[u] |= std::uint32_t{1} << v;
  neighbours_[v] |= std::uint32_t{1} << u;
}

bool SimpleGraph::has_edge(std::size_t u, std::size_t v) const {
  return (neighbours_[u] >> v) & 1U;
}

std::size_t SimpleGraph::degree(std::size_t v) const {
  return static_cast<std::size_t>(std::popcount(neighbours_[v]));
}

std::size_t SimpleGraph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < vertex_count(); ++v) best = std::max(best, degree(v));
  return best;
}

std::size_t SimpleGraph::min_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < vertex_count(); ++v) {
    const std::size_t d = degree(v);
    if (d > 0 && (best == 0 || d < best)) best = d;
  }
  return best;
}

bool SimpleGraph::connected() const {
  const std::size_t n = vertex_count();
  if (n <= 1) return true;
  const std::uint64_t all = (std::uint64_t{1} << n) - 1;
  std::uint64_t seen = 1;
  std::uint64_t frontier = 1;
  while (frontier != 0) {
    std::uint64_t next = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if ((frontier >> v) & 1U) next |= neighbours_[v];
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == all;
}

DenseMatrix SimpleGraph::adjacency() const {
  DenseMatrix a(vertex_count(), vertex_count());
  for (std::size_t u = 0; u < vertex_count(); ++u) {
    for (std::size_t v = 0; v < vertex_count(); ++v) {
      if (has_edge(u, v)) a(u, v) = 1.0;
    }
  }
  return a;
}

namespace {

template <typename Boundary>
double cheeger_enumerate(const SimpleGraph& g, const char* where, Boundary boundary) {
  const std::size_t n = g.vertex_count();
  if (n > SimpleGraph::kMaxBruteForceVertices) {
    throw SizeError(std::string(where) + ": " + std::to_string(n) + " vertices, limit " +
                    std::to_string(SimpleGraph::kMaxBruteForceVertices));
  }
  if (n < 2) throw DomainError(std::string(where) + ": need at least 2 vertices");
  const std::uint32_t limit = std::uint32_t{1} << n;
  const std::uint32_t all = limit - 1;
  double best = kInf;
  for (std::uint32_t x = 1; x < limit; ++x) {
    const int size = std::popcount(x);
    if (static_cast<std::size_t>(2 * size) > n) continue;
    const double ratio = static_cast<double>(boundary(x, all)) / size;
    best = std::min(best, ratio);
  }
  return best;
}

}  // namespace

double edge_cheeger_bruteforce(const SimpleGraph& g) {
  return cheeger_enumerate(g, "edge_cheeger_bruteforce", [&](std::uint32_t x, std::uint32_t all) {
    int cut = 0;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      if ((x >> v) & 1U) cut += std::popcount(g.neighbours(v) & ~x & all);
    }
    return cut;
  });
}

double vertex_cheeger_bruteforce(const SimpleGraph& g) {
  return cheeger_enumerate(g, "vertex_cheeger_bruteforce", [&](std::uint32_t x, std::uint32_t all) {
    std::uint32_t reach = 0;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      if ((x >> v) & 1U) reach |= g.neighbours(v);
    }
    return std::popcount(reach & ~x & all);
  });
}

}  // namespace expander
