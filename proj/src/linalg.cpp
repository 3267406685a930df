#include "expander/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "expander/errors.hpp"
#include "expander/rng.hpp"

namespace expander {

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
    }
  }
  return out;
}

std::string shape_text(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.all_finite()) {
    throw DomainError(std::string(what) + ": matrix has non-finite entries");
  }
}

void check_symmetric_input(const DenseMatrix& m) {
  if (!m.is_square()) {
    throw ShapeError("sym_eigenvalues: matrix is " + shape_text(m) + ", expected square");
  }
  require_finite(m, "sym_eigenvalues");
  if (!m.is_symmetric(1e-12)) {
    throw ShapeError("sym_eigenvalues: matrix is not symmetric within 1e-12");
  }
}

double max_abs_col_sum(const DenseMatrix& m) {
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) sums[c] += std::abs(m(r, c));
  }
  return sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
}

// Gershgorin: every eigenvalue of a matrix lies within its largest absolute
// row sum. A violation means the solver returned garbage.
void assert_gershgorin(double largest_magnitude, double bound, const char* where) {
  double slack = 1e-10 * std::max(1.0, bound);
  if (largest_magnitude > bound + slack) {
    throw std::logic_error(std::string(where) + ": eigenvalue magnitude " +
                           std::to_string(largest_magnitude) + " exceeds Gershgorin bound " +
                           std::to_string(bound));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Applies the smaller Gram matrix of B (B^T B when cols <= rows, else B B^T)
// with fixed loop order.
class GramOperator {
 public:
  explicit GramOperator(const DenseMatrix& b)
      : b_(b), right_(b.cols() <= b.rows()), tmp_(right_ ? b.rows() : b.cols()) {}

  std::size_t dimension() const { return right_ ? b_.cols() : b_.rows(); }

  void apply(std::span<const double> v, std::span<double> out) {
    const std::size_t rows = b_.rows();
    const std::size_t cols = b_.cols();
    std::fill(out.begin(), out.end(), 0.0);
    if (right_) {
      for (std::size_t i = 0; i < rows; ++i) {
        auto row = b_.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * v[j];
        tmp_[i] = s;
      }
      for (std::size_t i = 0; i < rows; ++i) {
        auto row = b_.row(i);
        const double t = tmp_[i];
        for (std::size_t j = 0; j < cols; ++j) out[j] += row[j] * t;
      }
    } else {
      std::fill(tmp_.begin(), tmp_.end(), 0.0);
      for (std::size_t i = 0; i < rows; ++i) {
        auto row = b_.row(i);
        const double t = v[i];
        for (std::size_t j = 0; j < cols; ++j) tmp_[j] += row[j] * t;
      }
      for (std::size_t i = 0; i < rows; ++i) {
        auto row = b_.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * tmp_[j];
        out[i] = s;
      }
    }
  }

 private:
  const DenseMatrix& b_;
  bool right_;
  std::vector<double> tmp_;
};

struct PowerResult {
  double theta = 0.0;
  std::vector<double> vector;
  std::size_t iterations = 0;
};

// Power iteration on G (optionally restricted to the complement of `deflate`).
// Returns nullopt when the iteration cap is reached or the restricted operator
// is numerically zero, in which case the caller falls back to a dense solve.
std::optional<PowerResult> power_iterate(GramOperator& op, const std::vector<double>* deflate,
                                         double scale, std::uint64_t stream,
                                         const PowerIterationOptions& options) {
  const std::size_t n = op.dimension();
  Rng rng = Rng::derive(0x5eedULL, stream);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(0.5, 1.5);
  auto project = [&](std::vector<double>& x) {
    if (deflate == nullptr) return;
    const double c = dot(x, *deflate);
    for (std::size_t i = 0; i < n; ++i) x[i] -= c * (*deflate)[i];
  };
  project(v);
  double nv = norm(v);
  if (nv == 0.0) return std::nullopt;
  for (double& x : v) x /= nv;

  std::vector<double> w(n);
  double theta_prev = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    op.apply(v, w);
    project(w);
    const double theta = dot(v, w);
    const double nw = norm(w);
    if (nw <= 1e-13 * scale) return std::nullopt;
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = w[i] - theta * v[i];
      residual += r * r;
    }
    residual = std::sqrt(residual);
    if (it > 1 && std::abs(theta - theta_prev) <= options.rayleigh_rel_tol * std::abs(theta) &&
        residual <= options.residual_rel_tol * std::abs(theta)) {
      return PowerResult{theta, v, it};
    }
    theta_prev = theta;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return std::nullopt;
}

SingularPair dense_pair(const DenseMatrix& b, SvdPath path) {
  std::vector<double> sv = singular_values(b);
  SingularPair out;
  out.sigma1 = sv.empty() ? 0.0 : sv[0];
  out.sigma2 = sv.size() > 1 ? sv[1] : 0.0;
  out.path = path;
  return out;
}

void check_svd_input(const DenseMatrix& b) {
  if (b.empty()) throw ShapeError("top_two_singular_values: empty matrix");
  require_finite(b, "top_two_singular_values");
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("DenseMatrix: " + std::to_string(data_.size()) + " values for a " +
                     std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
  }
  if (!all_finite()) throw DomainError("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("DenseMatrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

bool DenseMatrix::is_symmetric(double abs_tol) const {
  if (!is_square()) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = r + 1; c < cols_; ++c) {
      if (std::abs((*this)(r, c) - (*this)(c, r)) > abs_tol) return false;
    }
  }
  return true;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double DenseMatrix::max_abs_row_sum() const {
  double best = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (double x : row(r)) s += std::abs(x);
    best = std::max(best, s);
  }
  return best;
}

bool DenseMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return x == 0.0; });
}

std::vector<double> sym_eigenvalues_ascending(const DenseMatrix& m) {
  check_symmetric_input(m);
  if (m.empty()) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eigenvalues: eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  assert_gershgorin(std::max(std::abs(out.front()), std::abs(out.back())), m.max_abs_row_sum(),
                    "sym_eigenvalues");
  return out;
}

SymmetricSpectrum sym_eigenvalues(const DenseMatrix& m) {
  std::vector<double> ev = sym_eigenvalues_ascending(m);
  std::reverse(ev.begin(), ev.end());
  return SymmetricSpectrum{std::move(ev)};
}

std::vector<double> singular_values(const DenseMatrix& b) {
  check_svd_input(b);
  Eigen::MatrixXd mb = to_eigen(b);
  Eigen::VectorXd sv;
  if (std::min(b.rows(), b.cols()) <= kDenseSvdLimit) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mb);
    sv = svd.singularValues();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(mb);
    sv = svd.singularValues();
  }
  std::vector<double> out(sv.data(), sv.data() + sv.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

SingularPair top_two_singular_values_iterative(const DenseMatrix& b,
                                               const PowerIterationOptions& options) {
  check_svd_input(b);
  if (b.is_zero()) return SingularPair{0.0, 0.0, true, SvdPath::iterative, 0};
  const double bound = std::max(b.max_abs_row_sum(), max_abs_col_sum(b));

  GramOperator op(b);
  auto first = power_iterate(op, nullptr, bound * bound, 1, options);
  if (!first) return dense_pair(b, SvdPath::dense_fallback);

  SingularPair out;
  out.sigma1 = std::sqrt(std::max(first->theta, 0.0));
  out.path = SvdPath::iterative;
  out.iterations = first->iterations;
  if (op.dimension() > 1) {
    auto second = power_iterate(op, &first->vector, first->theta, 2, options);
    if (!second) return dense_pair(b, SvdPath::dense_fallback);
    out.sigma2 = std::sqrt(std::clamp(second->theta, 0.0, first->theta));
    out.iterations += second->iterations;
  }
  assert_gershgorin(out.sigma1, bound, "top_two_singular_values");
  return out;
}

SingularPair top_two_singular_values(const DenseMatrix& b) {
  check_svd_input(b);
  if (b.is_zero()) return SingularPair{0.0, 0.0, true, SvdPath::dense, 0};
  SingularPair out = std::min(b.rows(), b.cols()) <= kDenseSvdLimit
                         ? dense_pair(b, SvdPath::dense)
                         : top_two_singular_values_iterative(b);
  assert_gershgorin(out.sigma1, std::max(b.max_abs_row_sum(), max_abs_col_sum(b)),
                    "top_two_singular_values");
  return out;
}

DenseMatrix bipartite_adjacency(const DenseMatrix& b) {
  const std::size_t m = b.rows();
  const std::size_t n = b.cols();
  DenseMatrix a(m + n, m + n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, m + j) = b(i, j);
      a(m + j, i) = b(i, j);
    }
  }
  return a;
}

}  // namespace expander
