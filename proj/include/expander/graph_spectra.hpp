#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "expander/linalg.hpp"
#include "expander/weights.hpp"

namespace expander {

enum class GraphMode { weighted, unweighted };

std::string_view to_string(GraphMode mode);
GraphMode parse_graph_mode(std::string_view text);

/// Bipartite layer graph held as its m x n biadjacency block.
struct BipartiteGraph {
  DenseMatrix biadjacency;
  GraphMode mode = GraphMode::unweighted;

  std::size_t left_size() const noexcept { return biadjacency.rows(); }
  std::size_t right_size() const noexcept { return biadjacency.cols(); }
  std::size_t vertex_count() const noexcept { return left_size() + right_size(); }
  std::size_t edge_count() const;
  /// No edge at all.
  bool degenerate() const { return edge_count() == 0; }
};

/// Weighted mode: |w| * mask. Unweighted mode: 1 where mask is set and w != 0.
BipartiteGraph build_bipartite(const WeightMatrix& w, const LayerMask& mask, GraphMode mode);
BipartiteGraph build_bipartite(const DenseMatrix& w, GraphMode mode);

struct DegreeStats {
  /// Average over all m + n vertices, isolated ones included.
  double d_avg = 0.0;
  double max_degree = 0.0;
  /// Smallest positive degree; 0 when the graph has no edge.
  double min_degree = 0.0;
  std::size_t isolated_count = 0;
};

DegreeStats degree_stats(const BipartiteGraph& g);

inline constexpr double kLambda2Floor = 1e-10;

/// (2 sqrt(degree_proxy - 1) - lambda2) / lambda2 with the conventions used
/// throughout: +inf when lambda2 < kLambda2Floor, radical term 0 when the
/// radicand is negative.
double ramanujan_gap(double degree_proxy, double lambda2);

struct SpectralReport {
  GraphMode mode = GraphMode::unweighted;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double d_avg = 0.0;
  double alpha2 = 0.0;
  /// Combinatorial gap, unweighted mode only.
  std::optional<double> delta_R;
  double delta_S = 0.0;
  double cheeger_lower = 0.0;
  double cheeger_upper = 0.0;
  bool ramanujan = false;
};

/// Throws DegenerateGraphError for an edgeless graph.
SpectralReport spectral_gaps(const BipartiteGraph& g);

/// Fills the derived fields (gaps, Cheeger bounds, verdict) from the four
/// measured quantities. Shared by the layer and unrolled reports.
SpectralReport assemble_report(GraphMode mode, double lambda1, double lambda2, double d_avg,
                               double alpha2);

/// Eigenvalues (ascending) of I - D^{-1/2} A D^{-1/2} for a symmetric
/// non-negative adjacency, computed after deleting isolated vertices.
std::vector<double> normalized_laplacian_spectrum(const DenseMatrix& adjacency);

/// Second smallest normalized-Laplacian eigenvalue of [[0,B],[B^T,0]],
/// clamped to [0, 2]. Needs at least two non-isolated vertices.
double normalized_laplacian_alpha2(const BipartiteGraph& g);

struct CheegerBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on the edge Cheeger constant implied by h^2/2 <= alpha2 <= 2h.
CheegerBounds cheeger_bounds(double alpha2);

/// Small undirected simple graph for exhaustive subset enumeration.
class SimpleGraph {
 public:
  static constexpr std::size_t kMaxVertices = 32;
  static constexpr std::size_t kMaxBruteForceVertices = 20;

  explicit SimpleGraph(std::size_t vertex_count);

  /// Support graph of [[0,B],[B^T,0]]: left vertices first, then right.
  static SimpleGraph from_bipartite(const BipartiteGraph& g);
  /// Nonzero off-diagonal entries of a symmetric matrix become edges.
  static SimpleGraph from_adjacency(const DenseMatrix& adjacency);

  std::size_t vertex_count() const noexcept { return neighbours_.size(); }
  std::size_t edge_count() const;
  void add_edge(std::size_t u, std::size_t v);
  bool has_edge(std::size_t u, std::size_t v) const;
  std::uint32_t neighbours(std::size_t v) const { return neighbours_[v]; }
  std::size_t degree(std::size_t v) const;
  std::size_t max_degree() const;
  /// Smallest positive degree.
  std::size_t min_degree() const;
  bool connected() const;
  DenseMatrix adjacency() const;

 private:
  std::vector<std::uint32_t> neighbours_;
};

/// min over non-empty X with |X| <= |V|/2 of |edge boundary(X)| / |X|.
/// Throws SizeError above SimpleGraph::kMaxBruteForceVertices.
double edge_cheeger_bruteforce(const SimpleGraph& g);

/// min over the same subsets of |outer vertex boundary(X)| / |X|.
double vertex_cheeger_bruteforce(const SimpleGraph& g);

}  // namespace expander
