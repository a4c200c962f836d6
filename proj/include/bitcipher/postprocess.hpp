#pragma once

#include "bitcipher/embedding.hpp"

#include <string>
#include <vector>

namespace bitcipher {

struct PostprocReport {
  std::vector<std::string> steps;  // transforms applied, in order
  double epsilon = 0.0;
  double condition_before = 0.0;  // largest / smallest covariance eigenvalue
  double condition_after = 0.0;
  std::size_t degenerate_directions = 0;  // eigenvalues at or below kDegenerateEigenvalue
  bool rank_deficient = false;
  std::size_t zero_rows = 0;        // rows left at zero by L2 normalization
  std::size_t normalized_rows = 0;
};

inline constexpr double kDefaultWhitenEpsilon = 1e-5;
inline constexpr double kDegenerateEigenvalue = 1e-8;

enum class CenteringMode {
  Column,  // subtract the mean row from every row
  Row,     // subtract each row's own mean from its entries
};

/// ZCA whitening: Y = (X - mean) * Q diag(s) Q^T with the population
/// covariance eigendecomposition Q diag(lambda) Q^T and s = lambda^-1/2.
/// Eigenvalues at or below kDegenerateEigenvalue use (lambda + epsilon)^-1/2
/// and flag the report; everything else is whitened exactly.
Matrix whiten(const Matrix& x, double epsilon = kDefaultWhitenEpsilon,
              PostprocReport* report = nullptr);

/// Mean-centering followed by per-row L2 normalization. Rows that are zero
/// after centering stay zero and are counted in the report.
Matrix center_and_normalize(const Matrix& x, CenteringMode mode = CenteringMode::Column,
                            PostprocReport* report = nullptr);

struct PostprocOptions {
  double epsilon = kDefaultWhitenEpsilon;
  CenteringMode centering = CenteringMode::Column;
};

/// whiten, then center_and_normalize. Appends the step names to
/// `e.meta.postprocessing`.
EmbeddingMatrix postprocess(const EmbeddingMatrix& e, const PostprocOptions& options = {},
                            PostprocReport* report = nullptr);

/// Population covariance of the rows of x.
Matrix covariance(const Matrix& x);

}  // namespace bitcipher
