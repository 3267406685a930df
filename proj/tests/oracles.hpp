#pragma once

// Reference implementations used only by tests. None of them call into the
// library's numerical code, so agreement is evidence rather than tautology.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "expander/linalg.hpp"
#include "expander/recurrent.hpp"
#include "expander/rng.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const expander::DenseMatrix& m);
expander::DenseMatrix from_mat(const Mat& m);

/// Cyclic Jacobi rotations until the off-diagonal mass is below 1e-30 of the
/// total. Returns eigenvalues sorted ascending.
std::vector<double> jacobi_eigenvalues(Mat a);

/// Real roots of the characteristic polynomial of a symmetric 3x3 matrix
/// (trigonometric form of the cubic), ascending.
std::vector<double> cubic_eigenvalues_3x3(const Mat& a);

/// Singular values from the Jacobi eigenvalues of the smaller Gram matrix,
/// descending, length min(rows, cols).
std::vector<double> singular_values(const expander::DenseMatrix& b);

/// Edge and vertex Cheeger constants by recursive subset enumeration over
/// adjacency lists (no bit tricks), |X| denominator, |X| <= n/2.
struct Cheeger {
  double edge;
  double vertex;
};
Cheeger cheeger_by_recursion(const std::vector<std::vector<int>>& adj);

/// Normalized Laplacian spectrum (ascending) of a 0/1 adjacency without
/// isolated vertices, via the Jacobi oracle.
std::vector<double> normalized_laplacian(const Mat& adjacency);

/// Erdos-Renyi adjacency.
Mat random_graph(std::size_t n, double p, expander::Rng& rng);
bool connected(const Mat& adjacency);
std::vector<std::vector<int>> adjacency_lists(const Mat& adjacency);

/// Random d-regular bipartite biadjacency (m x m) as the union of d random
/// permutation matrices, redrawn until no two permutations share an edge.
expander::DenseMatrix random_regular_bipartite(std::size_t m, std::size_t d, expander::Rng& rng);

expander::DenseMatrix random_matrix(std::size_t rows, std::size_t cols, expander::Rng& rng,
                                    double density = 1.0, bool non_negative = false);
expander::DenseMatrix random_symmetric(std::size_t n, expander::Rng& rng);

struct GradCheck {
  double worst = 0.0;
  std::size_t checked = 0;
};

/// Central differences (eps 1e-5) of the batch loss against loss_and_grads on
/// every parameter of a random model with 3 inputs, 3 classes and a batch of 3.
/// Relative error uses a 1e-6 floor on the denominator, so vanishing
/// gradients are compared absolutely.
GradCheck finite_difference_check(expander::CellKind cell, std::size_t hidden, std::size_t k,
                                  std::uint64_t seed);

}  // namespace oracle
