#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/learn/common.hpp"
#include "adaffect/learn/svm.hpp"

namespace adaffect::learn {

enum class ShallowKind { lda, linear_svm, rbf_svm };

inline std::string_view shallow_kind_name(ShallowKind k) {
  switch (k) {
    case ShallowKind::lda: return "lda";
    case ShallowKind::linear_svm: return "linear_svm";
    case ShallowKind::rbf_svm: return "rbf_svm";
  }
  return "lda";
}

struct ShallowHyper {
  double C{1.0};
  /// RBF width; 0 selects 1 / dims at fit time.
  double gamma{0.0};
  /// LDA covariance shrinkage toward a scaled identity.
  double shrinkage{0.1};
  /// Folds used to produce held-out decision values for calibration.
  int calibration_folds{5};
  double smo_tolerance{1e-3};
};

struct ShallowModel {
  ShallowKind kind{ShallowKind::lda};
  ShallowHyper hyper;
  Eigen::Index dims{0};
  /// Linear kinds: decision = weights . x + bias.
  Eigen::VectorXd weights;
  double bias{0.0};
  /// RBF: decision = sum_i dual_coef_i K(sv_i, x) + bias, dual_coef_i = y_i alpha_i.
  Eigen::MatrixXd support;
  Eigen::VectorXd dual_coef;
  /// SVM dual variables of the final fit, each in [0, C].
  Eigen::VectorXd alpha;
  double kkt_gap{0.0};
  PlattScaling calibration;

  Eigen::VectorXd decision(const Eigen::MatrixXd& X) const {
    if (X.cols() != dims)
      throw Error(Errc::dimension_mismatch, "model expects " + std::to_string(dims) + " features, got " +
                                                std::to_string(X.cols()));
    if (kind == ShallowKind::rbf_svm) {
      const Kernel k{KernelKind::rbf, hyper.gamma};
      return (k.gram(X, support) * dual_coef).array() + bias;
    }
    return (X * weights).array() + bias;
  }
};

namespace detail {

/// Shrinkage LDA: w = S^-1 (mu_high - mu_low) with S the pooled
/// within-class covariance shrunk toward (tr S / d) I. When d exceeds the
/// sample count the solve goes through the Woodbury identity.
inline void fit_lda(ShallowModel& m, const Eigen::MatrixXd& X, const std::vector<AffectLabel>& y) {
  const auto n = X.rows(), d = X.cols();
  Eigen::RowVectorXd mu_hi = Eigen::RowVectorXd::Zero(d), mu_lo = Eigen::RowVectorXd::Zero(d);
  double n_hi = 0, n_lo = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[static_cast<std::size_t>(i)] == AffectLabel::High) mu_hi += X.row(i), n_hi += 1;
    else mu_lo += X.row(i), n_lo += 1;
  }
  mu_hi /= n_hi;
  mu_lo /= n_lo;
  Eigen::MatrixXd Z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    Z.row(i) = X.row(i) - (y[static_cast<std::size_t>(i)] == AffectLabel::High ? mu_hi : mu_lo);
  const double dof = std::max(1.0, static_cast<double>(n) - 2.0);
  const double lam = std::clamp(m.hyper.shrinkage, 0.0, 1.0);
  const Eigen::VectorXd diff = (mu_hi - mu_lo).transpose();
  const double trace = Z.squaredNorm() / dof;
  const double c = lam * trace / static_cast<double>(d);

  if (lam > 0.0 && d > n && c > 0.0) {
    // (a Z'Z + c I)^-1 v = (v - Z' (c/a I + Z Z')^-1 Z v) / c with a = (1-lam)/dof.
    const double a = (1.0 - lam) / dof;
    Eigen::VectorXd w;
    if (a > 0.0) {
      Eigen::MatrixXd inner = Z * Z.transpose();
      inner.diagonal().array() += c / a;
      w = (diff - Z.transpose() * inner.ldlt().solve(Z * diff)) / c;
    } else {
      w = diff / c;
    }
    m.weights = w;
  } else {
    Eigen::MatrixXd S = (1.0 - lam) * (Z.transpose() * Z) / dof;
    S.diagonal().array() += c;
    m.weights = S.completeOrthogonalDecomposition().solve(diff);
  }
  m.bias = -m.weights.dot(((mu_hi + mu_lo) / 2.0).transpose()) + std::log(n_hi / n_lo);
}

inline void fit_svm(ShallowModel& m, const Eigen::MatrixXd& X, const std::vector<AffectLabel>& y) {
  const Kernel k{m.kind == ShallowKind::rbf_svm ? KernelKind::rbf : KernelKind::linear, m.hyper.gamma};
  const Eigen::MatrixXd K = k.gram(X, X);
  Eigen::VectorXd yy(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) yy(i) = sign_target(y[static_cast<std::size_t>(i)]);
  const auto res = smo_solve(K, yy, m.hyper.C, m.hyper.smo_tolerance);
  m.alpha = res.alpha;
  m.kkt_gap = res.kkt_gap;
  m.bias = -res.rho;
  const Eigen::VectorXd coef = res.alpha.cwiseProduct(yy);
  if (m.kind == ShallowKind::linear_svm) {
    m.weights = X.transpose() * coef;
    return;
  }
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (res.alpha(i) > 0.0) sv.push_back(i);
  m.support.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
  m.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    m.support.row(static_cast<Eigen::Index>(s)) = X.row(sv[s]);
    m.dual_coef(static_cast<Eigen::Index>(s)) = coef(sv[s]);
  }
}

inline ShallowModel fit_raw(const Eigen::MatrixXd& X, const std::vector<AffectLabel>& y, ShallowKind kind,
                            const ShallowHyper& hyper) {
  ShallowModel m;
  m.kind = kind;
  m.hyper = hyper;
  m.dims = X.cols();
  if (m.hyper.gamma <= 0.0) m.hyper.gamma = 1.0 / static_cast<double>(std::max<Eigen::Index>(1, X.cols()));
  if (kind == ShallowKind::lda) fit_lda(m, X, y);
  else fit_svm(m, X, y);
  return m;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(idx[k]));
  return out;
}

}  // namespace detail

/// Trains an LDA or SVM classifier and a Platt calibration fitted on
/// held-out decision values from an internal stratified split.
inline ShallowModel shallow_fit(const Eigen::MatrixXd& X, const std::vector<AffectLabel>& y, ShallowKind kind,
                                const ShallowHyper& hyper = {}, std::uint64_t seed = 0) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw Error(Errc::length_mismatch, "rows vs labels");
  if (!X.allFinite()) throw Error(Errc::non_finite, "training features contain non-finite values");
  require_both_classes(y);
  ShallowModel m = detail::fit_raw(X, y, kind, hyper);

  const int folds = std::min<int>(hyper.calibration_folds, static_cast<int>(min_class_count(y)));
  std::vector<double> f(y.size());
  if (folds >= 2) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const auto assign = stratified_folds(y, folds, rng);
    for (int k = 0; k < folds; ++k) {
      std::vector<std::size_t> tr, te;
      for (std::size_t i = 0; i < y.size(); ++i) (assign[i] == k ? te : tr).push_back(i);
      std::vector<AffectLabel> ytr;
      for (auto i : tr) ytr.push_back(y[i]);
      const auto inner = detail::fit_raw(detail::take_rows(X, tr), ytr, kind, m.hyper);
      const Eigen::VectorXd d = inner.decision(detail::take_rows(X, te));
      for (std::size_t t = 0; t < te.size(); ++t) f[te[t]] = d(static_cast<Eigen::Index>(t));
    }
  } else {
    const Eigen::VectorXd d = m.decision(X);
    for (std::size_t i = 0; i < y.size(); ++i) f[i] = d(static_cast<Eigen::Index>(i));
  }
  m.calibration = PlattScaling::fit(f, y);
  return m;
}

inline std::vector<Posterior> shallow_predict_proba(const ShallowModel& m, const Eigen::MatrixXd& X) {
  const Eigen::VectorXd d = m.decision(X);
  std::vector<Posterior> out(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double p = m.calibration(d(i));
    out[static_cast<std::size_t>(i)] = {p, 1.0 - p};
  }
  return out;
}

}  // namespace adaffect::learn
