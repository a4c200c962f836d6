#include "bitcipher/postprocess.hpp"

#include <cmath>
#include <limits>

namespace bitcipher {

namespace {

void require_finite(const Matrix& x, const char* what) {
  if (!x.allFinite()) throw InputError(std::string(what) + ": input has non-finite entries");
}

double condition(const Vector& eigenvalues) {
  const double lo = eigenvalues.minCoeff();
  const double hi = eigenvalues.maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

Matrix covariance(const Matrix& x) {
  const Matrix centered = x.rowwise() - x.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(x.rows());
}

Matrix whiten(const Matrix& x, double epsilon, PostprocReport* report) {
  require_finite(x, "whiten");
  if (x.rows() < x.cols() + 1) {
    throw InputError("whiten: need at least d + 1 = " + std::to_string(x.cols() + 1) +
                     " rows, got " + std::to_string(x.rows()));
  }
  if (!(epsilon > 0.0)) throw InputError("whiten: epsilon must be positive");

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  const double n = static_cast<double>(x.rows());

  // SVD of the centered data rather than an eigendecomposition of its
  // covariance: the covariance squares the condition number.
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw Error("whiten: SVD failed");
  const Vector s = svd.singularValues();
  const Vector lambda = (s.array().square() / n).matrix();

  // centered * Q diag(scale) Q^T == U diag(s * scale) Q^T
  Vector gain(lambda.size());
  std::size_t degenerate = 0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k] > kDegenerateEigenvalue) {
      gain[k] = std::sqrt(n);
    } else {
      gain[k] = s[k] / std::sqrt(lambda[k] + epsilon);
      ++degenerate;
    }
  }
  Matrix out = svd.matrixU() * gain.asDiagonal() * svd.matrixV().transpose();

  if (report) {
    report->steps.push_back("whiten");
    report->epsilon = epsilon;
    report->condition_before = condition(lambda);
    Eigen::SelfAdjointEigenSolver<Matrix> after(covariance(out), Eigen::EigenvaluesOnly);
    report->condition_after = condition(after.eigenvalues());
    report->degenerate_directions = degenerate;
    report->rank_deficient = degenerate > 0;
  }
  return out;
}

Matrix center_and_normalize(const Matrix& x, CenteringMode mode, PostprocReport* report) {
  require_finite(x, "center_and_normalize");
  Matrix out;
  if (mode == CenteringMode::Column) {
    out = x.rowwise() - x.colwise().mean();
  } else {
    out = x.colwise() - x.rowwise().mean();
  }
  std::size_t zero = 0;
  std::size_t normalized = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) {
      out.row(i) /= norm;
      ++normalized;
    } else {
      out.row(i).setZero();
      ++zero;
    }
  }
  if (report) {
    report->steps.push_back(mode == CenteringMode::Column ? "center-columns" : "center-rows");
    report->steps.push_back("l2-normalize");
    report->zero_rows = zero;
    report->normalized_rows = normalized;
  }
  return out;
}

EmbeddingMatrix postprocess(const EmbeddingMatrix& e, const PostprocOptions& options,
                            PostprocReport* report) {
  PostprocReport local;
  PostprocReport& r = report ? *report : local;
  const auto first_step = static_cast<std::ptrdiff_t>(r.steps.size());
  EmbeddingMatrix out;
  out.meta = e.meta;
  out.rows = center_and_normalize(whiten(e.rows, options.epsilon, &r), options.centering, &r);
  out.meta.postprocessing.insert(out.meta.postprocessing.end(), r.steps.begin() + first_step,
                               r.steps.end());
  return out;
}

}  // namespace bitcipher
