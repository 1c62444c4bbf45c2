#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "adaffect/core/error.hpp"

namespace adaffect::eeg {

struct PcaModel {
  Eigen::RowVectorXd mean;
  /// k x dims, orthonormal rows, ordered by decreasing variance.
  Eigen::MatrixXd components;
  Eigen::VectorXd explained_variance;
  double total_variance{0.0};
  double retained_fraction{0.0};

  Eigen::Index k() const { return components.rows(); }
  Eigen::Index dims() const { return components.cols(); }
};

enum class PcaMethod { automatic, gram, covariance };

/// Fits the smallest number of components whose cumulative variance reaches
/// `retain` of the total. With fewer rows than columns the eigenproblem is
/// solved on the n x n Gram matrix instead of the d x d covariance.
inline PcaModel pca_fit(const Eigen::MatrixXd& rows, double retain = 0.9, PcaMethod method = PcaMethod::automatic) {
  if (rows.rows() < 2) throw Error(Errc::too_short, "pca_fit needs at least two rows");
  if (!(retain > 0.0 && retain <= 1.0)) throw Error(Errc::invalid_argument, "retain must lie in (0,1]");
  if (!rows.allFinite()) throw Error(Errc::non_finite, "pca_fit input has non-finite values");
  const auto n = rows.rows(), d = rows.cols();
  PcaModel m;
  m.mean = rows.colwise().mean();
  const Eigen::MatrixXd X = rows.rowwise() - m.mean;
  const double denom = static_cast<double>(n - 1);
  if (method == PcaMethod::automatic) method = n < d ? PcaMethod::gram : PcaMethod::covariance;

  Eigen::VectorXd evals;  // ascending
  Eigen::MatrixXd basis;  // d x r, columns are unit eigenvectors
  if (method == PcaMethod::gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X * X.transpose());
    evals = es.eigenvalues();
    basis = X.transpose() * es.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X.transpose() * X);
    evals = es.eigenvalues();
    basis = es.eigenvectors();
  }
  m.total_variance = X.squaredNorm() / denom;
  if (!(m.total_variance > 0.0)) throw Error(Errc::rank_zero, "input has zero variance");

  const double tol = std::max(evals.maxCoeff(), 0.0) * 1e-12 * static_cast<double>(std::max(n, d));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = evals.size() - 1; i >= 0; --i)
    if (evals(i) > tol) keep.push_back(i);
  if (keep.empty()) throw Error(Errc::rank_zero, "no positive eigenvalues");

  double cum = 0.0;
  std::size_t k = 0;
  while (k < keep.size()) {
    cum += evals(keep[k]) / denom;
    ++k;
    if (cum / m.total_variance >= retain - 1e-12) break;
  }
  m.components.resize(static_cast<Eigen::Index>(k), d);
  m.explained_variance.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    Eigen::VectorXd v = basis.col(keep[i]);
    v.normalize();
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    m.components.row(static_cast<Eigen::Index>(i)) = v.transpose();
    m.explained_variance(static_cast<Eigen::Index>(i)) = evals(keep[i]) / denom;
  }
  m.retained_fraction = std::min(1.0, cum / m.total_variance);
  return m;
}

inline Eigen::MatrixXd pca_apply(const PcaModel& m, const Eigen::MatrixXd& rows) {
  if (rows.cols() != m.dims()) throw Error(Errc::dimension_mismatch, "pca_apply dimension mismatch");
  return (rows.rowwise() - m.mean) * m.components.transpose();
}

inline Eigen::MatrixXd pca_reconstruct(const PcaModel& m, const Eigen::MatrixXd& projected) {
  return (projected * m.components).rowwise() + m.mean;
}

}  // namespace adaffect::eeg
