#pragma once

#include <cstddef>

#include "expander/graph_spectra.hpp"
#include "expander/linalg.hpp"

namespace expander {

/// Time-unrolled W_xh chain: k + 1 copies of an m-vertex layer joined by the
/// square block B between consecutive copies.
struct UnrolledSpec {
  DenseMatrix block;
  std::size_t steps = 1;

  std::size_t block_size() const noexcept { return block.rows(); }
  std::size_t dimension() const noexcept { return (steps + 1) * block.rows(); }
};

inline constexpr std::size_t kMaxUnrolledDimension = 4096;

/// Block tridiagonal Toeplitz adjacency: B above the diagonal, B^T below.
/// Throws ShapeError for a non-square or empty block or k == 0, SizeError
/// when (k + 1) m exceeds kMaxUnrolledDimension.
DenseMatrix build_unrolled(const UnrolledSpec& spec);

/// {2 lambda_i(B) cos(pi j / (k + 2))} for i = 1..m, j = 1..k+1, descending.
/// Only valid for symmetric B; throws DomainError otherwise.
SymmetricSpectrum closed_form_spectrum(const UnrolledSpec& spec);

/// Gap report of the unrolled graph. The block is first mapped through the
/// mode (|w| or support indicator); lambda1 and lambda2 are the two largest
/// eigenvalues of the dense spectrum of A.
SpectralReport unrolled_gap_report(const UnrolledSpec& spec, GraphMode mode);

}  // namespace expander
