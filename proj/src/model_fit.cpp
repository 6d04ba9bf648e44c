#include "quadinfer/model_fit.hpp"

#include <cmath>

#include "quadinfer/errors.hpp"

namespace quadinfer {

namespace {

// Shared tail of both constructors: factor the Gram matrix, invert the factor,
// and cache the traces of the first three inverse powers.
void factor_and_cache(ModelFit& fit, const Eigen::MatrixXd& gram) {
  const int p = static_cast<int>(gram.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw SingularGramError("gram matrix is not positive definite");
  }
  fit.gram_chol = llt.matrixL();
  const double pivot_floor = std::sqrt(kRankTol * gram.diagonal().maxCoeff());
  for (int j = 0; j < p; ++j) {
    if (!(fit.gram_chol(j, j) > pivot_floor)) {
      throw SingularGramError("gram matrix pivot below rank tolerance");
    }
  }
  fit.chol_inv = fit.gram_chol.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(p, p));

  // With W = L^{-1}: (X^T X)^{-1} = W^T W, so by cyclic invariance
  // tr (X^T X)^{-k} = tr M^k with the symmetric M = W W^T.
  Eigen::MatrixXd m = fit.chol_inv * fit.chol_inv.transpose();
  fit.trace_inv[0] = m.trace();
  fit.trace_inv[1] = m.squaredNorm();
  Eigen::MatrixXd m2 = m * m;
  fit.trace_inv[2] = m2.cwiseProduct(m).sum();
}

} // namespace

ModelFit ols_fit(const Dataset& d) {
  const int n = d.n();
  const int p = d.p();
  if (p < 1 || n <= p) {
    throw DimensionError("ols_fit: need n > p >= 1");
  }
  if (d.y.size() != n) {
    throw DimensionError("ols_fit: y and x row counts differ");
  }
  ModelFit fit;
  fit.n = n;
  fit.p = p;
  Eigen::MatrixXd gram = d.x.transpose() * d.x;
  factor_and_cache(fit, gram);

  Eigen::VectorXd xty = d.x.transpose() * d.y;
  // beta = (L L^T)^{-1} X^T y via two triangular solves
  Eigen::VectorXd tmp = fit.gram_chol.triangularView<Eigen::Lower>().solve(xty);
  fit.beta_hat =
      fit.gram_chol.transpose().triangularView<Eigen::Upper>().solve(tmp);
  fit.sigma2_hat = (d.y - d.x * fit.beta_hat).squaredNorm() / (n - p);
  return fit;
}

ModelFit fit_from_gram(const Eigen::MatrixXd& gram, Eigen::VectorXd beta_hat,
                       double sigma2_hat, int n) {
  const int p = static_cast<int>(gram.rows());
  if (gram.cols() != p || p < 1) {
    throw DimensionError("fit_from_gram: gram matrix must be square");
  }
  if (beta_hat.size() != p) {
    throw DimensionError("fit_from_gram: beta length does not match gram size");
  }
  if (n <= p) {
    throw DimensionError("fit_from_gram: need n > p");
  }
  if (!(sigma2_hat >= 0.0)) {
    throw DomainError("fit_from_gram: sigma2_hat must be nonnegative");
  }
  ModelFit fit;
  fit.n = n;
  fit.p = p;
  fit.beta_hat = std::move(beta_hat);
  fit.sigma2_hat = sigma2_hat;
  factor_and_cache(fit, gram);
  return fit;
}

double trace_inv_power(const ModelFit& fit, int k) {
  if (k < 1 || k > 3) {
    throw DimensionError("trace_inv_power: k must be 1, 2, or 3");
  }
  return fit.trace_inv[static_cast<std::size_t>(k - 1)];
}

double quad_form_inv(const ModelFit& fit, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b, int k) {
  if (a.size() != fit.p || b.size() != fit.p) {
    throw DimensionError("quad_form_inv: vector length does not match fit");
  }
  if (k != 1 && k != 2) {
    throw DimensionError("quad_form_inv: k must be 1 or 2");
  }
  Eigen::VectorXd wa = fit.chol_inv * a;
  Eigen::VectorXd wb = fit.chol_inv * b;
  if (k == 1) {
    return wa.dot(wb);
  }
  Eigen::VectorXd ia = fit.chol_inv.transpose() * wa; // (X^T X)^{-1} a
  Eigen::VectorXd ib = fit.chol_inv.transpose() * wb;
  return ia.dot(ib);
}

double cross_trace(const ModelFit& fit_a, const ModelFit& fit_b) {
  if (fit_a.p != fit_b.p) {
    throw DimensionError("cross_trace: coefficient dimensions differ");
  }
  // tr(A^{-1} B^{-1}) = || W_b W_a^T ||_F^2 with A^{-1} = W_a^T W_a etc.
  return (fit_b.chol_inv * fit_a.chol_inv.transpose()).squaredNorm();
}

Eigen::VectorXd residuals(const ModelFit& fit, const Dataset& d) {
  if (d.n() != fit.n || d.p() != fit.p) {
    throw DimensionError("residuals: dataset does not match fit");
  }
  return d.y - d.x * fit.beta_hat;
}

} // namespace quadinfer
