#include "quadinfer/dataset.hpp"

#include <cmath>

#include "quadinfer/errors.hpp"

namespace quadinfer {

Dataset center_dataset(const Dataset& raw) {
  if (raw.x.rows() < 2 || raw.y.size() < 2) {
    throw DimensionError("center_dataset: need at least 2 rows");
  }
  if (raw.x.rows() != raw.y.size()) {
    throw DimensionError("center_dataset: y and x row counts differ");
  }
  Dataset out = raw;
  out.y.array() -= raw.y.mean();
  out.x.rowwise() -= raw.x.colwise().mean();
  out.centered = true;
  return out;
}

std::pair<Eigen::MatrixXd, std::vector<int>> repair_rank(const Eigen::MatrixXd& x,
                                                         double tol) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (n < 1 || p < 1) {
    throw DimensionError("repair_rank: empty design");
  }

  double max_diag = 0.0;
  for (int j = 0; j < p; ++j) {
    max_diag = std::max(max_diag, x.col(j).squaredNorm());
  }
  const double threshold = tol * max_diag;

  // Incremental Cholesky over admitted columns: a candidate's residual pivot
  // after projecting onto the kept span decides whether it survives.
  std::vector<int> kept, dropped;
  Eigen::MatrixXd chol(p, p); // grows row by row; only the kept block is used
  for (int j = 0; j < p; ++j) {
    const int k = static_cast<int>(kept.size());
    Eigen::VectorXd w(k);
    if (k > 0) {
      Eigen::VectorXd g(k);
      for (int i = 0; i < k; ++i) g(i) = x.col(kept[i]).dot(x.col(j));
      w = chol.topLeftCorner(k, k)
              .triangularView<Eigen::Lower>()
              .solve(g);
    }
    double pivot = x.col(j).squaredNorm() - w.squaredNorm();
    if (pivot <= threshold) {
      dropped.push_back(j);
      continue;
    }
    chol.row(k).head(k) = w.transpose();
    chol(k, k) = std::sqrt(pivot);
    kept.push_back(j);
  }

  if (kept.empty()) {
    throw DegenerateDesignError("repair_rank: no usable design columns");
  }
  Eigen::MatrixXd repaired(n, static_cast<int>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    repaired.col(static_cast<int>(i)) = x.col(kept[i]);
  }
  return {repaired, dropped};
}

} // namespace quadinfer
