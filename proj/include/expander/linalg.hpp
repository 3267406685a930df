#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace expander {

/// Dense row-major matrix of finite doubles.
///
/// Construction from raw data rejects non-finite entries; element writes
/// through operator() are unchecked, so code that fills a matrix from
/// computed values should call all_finite() when the source is untrusted.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols_, cols_); }

  DenseMatrix transposed() const;
  bool is_square() const noexcept { return rows_ == cols_; }
  bool is_symmetric(double abs_tol) const;
  bool all_finite() const;
  /// Largest row sum of absolute values (Gershgorin radius bound).
  double max_abs_row_sum() const;
  bool is_zero() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Eigenvalues of a symmetric matrix, sorted descending.
struct SymmetricSpectrum {
  std::vector<double> eigenvalues;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  double operator[](std::size_t i) const { return eigenvalues[i]; }
};

/// Full real spectrum of a symmetric matrix.
///
/// Throws ShapeError for non-square input or asymmetry above 1e-12 per entry,
/// DomainError for non-finite entries.
SymmetricSpectrum sym_eigenvalues(const DenseMatrix& m);

/// Ascending eigenvalues; same contract as sym_eigenvalues.
std::vector<double> sym_eigenvalues_ascending(const DenseMatrix& m);

enum class SvdPath { dense, iterative, dense_fallback };

struct SingularPair {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  /// B had no nonzero entry.
  bool degenerate = false;
  SvdPath path = SvdPath::dense;
  std::size_t iterations = 0;
};

/// Dense/iterative crossover: min(rows, cols) at or below this uses a dense SVD.
inline constexpr std::size_t kDenseSvdLimit = 64;

struct PowerIterationOptions {
  double rayleigh_rel_tol = 1e-12;
  /// Accepted only once ||G v - theta v|| <= residual_rel_tol * theta as well.
  double residual_rel_tol = 1e-9;
  std::size_t max_iterations = 10000;
};

/// Largest two singular values of B, sigma1 >= sigma2 >= 0.
SingularPair top_two_singular_values(const DenseMatrix& b);

/// Forces the power/deflation path regardless of size; falls back to the
/// dense SVD when the iteration cap is hit.
SingularPair top_two_singular_values_iterative(const DenseMatrix& b,
                                               const PowerIterationOptions& options = {});

/// All min(rows, cols) singular values, descending (dense SVD).
std::vector<double> singular_values(const DenseMatrix& b);

/// [[0, B], [B^T, 0]].
DenseMatrix bipartite_adjacency(const DenseMatrix& b);

}  // namespace expander
