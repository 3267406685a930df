#include "expander/unrolled.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "expander/errors.hpp"

namespace expander {

namespace {

void check_spec(const UnrolledSpec& spec) {
  if (spec.block.empty() || !spec.block.is_square()) {
    throw ShapeError("unrolled: block must be square and non-empty, got " +
                     std::to_string(spec.block.rows()) + "x" + std::to_string(spec.block.cols()));
  }
  if (spec.steps == 0) throw ShapeError("unrolled: k must be at least 1");
  if (spec.dimension() > kMaxUnrolledDimension) {
    throw SizeError("unrolled: dimension " + std::to_string(spec.dimension()) + " exceeds " +
                    std::to_string(kMaxUnrolledDimension));
  }
  if (!spec.block.all_finite()) throw DomainError("unrolled: block has non-finite entries");
}

}  // namespace

DenseMatrix build_unrolled(const UnrolledSpec& spec) {
  check_spec(spec);
  const std::size_t m = spec.block_size();
  const std::size_t dim = spec.dimension();
  DenseMatrix a(dim, dim);
  for (std::size_t t = 0; t < spec.steps; ++t) {
    const std::size_t r0 = t * m;
    const std::size_t c0 = (t + 1) * m;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        a(r0 + i, c0 + j) = spec.block(i, j);
        a(c0 + j, r0 + i) = spec.block(i, j);
      }
    }
  }
  return a;
}

SymmetricSpectrum closed_form_spectrum(const UnrolledSpec& spec) {
  check_spec(spec);
  if (!spec.block.is_symmetric(1e-12)) {
    throw DomainError("closed_form_spectrum: block is not symmetric; no closed form");
  }
  SymmetricSpectrum block = sym_eigenvalues(spec.block);
  const double denom = static_cast<double>(spec.steps + 2);
  std::vector<double> out;
  out.reserve(spec.dimension());
  for (double lambda : block.eigenvalues) {
    for (std::size_t j = 1; j <= spec.steps + 1; ++j) {
      out.push_back(2.0 * lambda * std::cos(std::numbers::pi * static_cast<double>(j) / denom));
    }
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return SymmetricSpectrum{std::move(out)};
}

SpectralReport unrolled_gap_report(const UnrolledSpec& spec, GraphMode mode) {
  check_spec(spec);
  UnrolledSpec mapped{build_bipartite(spec.block, mode).biadjacency, spec.steps};
  if (mapped.block.is_zero()) throw DegenerateGraphError("unrolled_gap_report: block has no edge");
  DenseMatrix a = build_unrolled(mapped);
  SymmetricSpectrum spectrum = sym_eigenvalues(a);

  double total = 0.0;
  for (double x : a.data()) total += x;
  const double d_avg = total / static_cast<double>(a.rows());

  std::vector<double> laplacian = normalized_laplacian_spectrum(a);
  const double alpha2 = std::clamp(laplacian.size() > 1 ? laplacian[1] : 0.0, 0.0, 2.0);
  // A is bipartite, so its spectrum is symmetric about 0; a negative second
  // eigenvalue only happens when the positive half has a single entry.
  const double lambda2 = std::max(spectrum[1], 0.0);
  return assemble_report(mode, spectrum[0], lambda2, d_avg, alpha2);
}

}  // namespace expander
