#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/core/error.hpp"

namespace adaffect::learn {

enum class KernelKind { linear, rbf };

struct Kernel {
  KernelKind kind{KernelKind::linear};
  double gamma{1.0};

  double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
    if (kind == KernelKind::linear) return a.dot(b);
    return std::exp(-gamma * (a - b).squaredNorm());
  }

  Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) const {
    Eigen::MatrixXd K = X * Y.transpose();
    if (kind == KernelKind::linear) return K;
    const Eigen::VectorXd xn = X.rowwise().squaredNorm();
    const Eigen::VectorXd yn = Y.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < K.rows(); ++i)
      for (Eigen::Index j = 0; j < K.cols(); ++j)
        K(i, j) = std::exp(-gamma * std::max(0.0, xn(i) + yn(j) - 2.0 * K(i, j)));
    return K;
  }
};

struct SmoResult {
  Eigen::VectorXd alpha;  // in [0, C]
  double rho{0.0};        // decision = sum_i alpha_i y_i K(x_i, x) - rho
  double kkt_gap{0.0};    // max violating-pair gap at exit
  int iterations{0};
};

/// C-SVC dual by sequential minimal optimisation with second-order working
/// set selection. `y` holds +1/-1, `K` the full kernel matrix.
inline SmoResult smo_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, double eps = 1e-3,
                           int max_iter = 10'000'000) {
  const auto n = y.size();
  if (!(C > 0.0)) throw Error(Errc::invalid_argument, "C must be positive");
  constexpr double tau = 1e-12;
  SmoResult r;
  r.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd& a = r.alpha;
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);
  auto Q = [&](Eigen::Index i, Eigen::Index j) { return y(i) * y(j) * K(i, j); };
  auto in_up = [&](Eigen::Index t) { return (y(t) > 0 && a(t) < C) || (y(t) < 0 && a(t) > 0); };
  auto in_low = [&](Eigen::Index t) { return (y(t) > 0 && a(t) > 0) || (y(t) < 0 && a(t) < C); };

  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -y(t) * G(t) >= gmax) gmax = -y(t) * G(t), i = t;
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y(t) * G(t);
      gmin = std::min(gmin, v);
      if (i < 0) continue;
      const double b = gmax - v;
      if (b > 0) {
        double den = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (den <= 0) den = tau;
        const double obj = -(b * b) / den;
        if (obj <= best) best = obj, j = t;
      }
    }
    r.kkt_gap = gmax - gmin;
    if (i < 0 || j < 0 || r.kkt_gap < eps) break;

    const double ai = a(i), aj = a(j);
    if (y(i) != y(j)) {
      double den = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (den <= 0) den = tau;
      const double delta = (-G(i) - G(j)) / den;
      const double diff = a(i) - a(j);
      a(i) += delta;
      a(j) += delta;
      if (diff > 0) {
        if (a(j) < 0) a(j) = 0, a(i) = diff;
      } else {
        if (a(i) < 0) a(i) = 0, a(j) = -diff;
      }
      if (diff > 0) {
        if (a(i) > C) a(i) = C, a(j) = C - diff;
      } else {
        if (a(j) > C) a(j) = C, a(i) = C + diff;
      }
    } else {
      double den = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (den <= 0) den = tau;
      const double delta = (G(i) - G(j)) / den;
      const double sum = a(i) + a(j);
      a(i) -= delta;
      a(j) += delta;
      if (sum > C) {
        if (a(i) > C) a(i) = C, a(j) = sum - C;
      } else {
        if (a(j) < 0) a(j) = 0, a(i) = sum;
      }
      if (sum > C) {
        if (a(j) > C) a(j) = C, a(i) = sum - C;
      } else {
        if (a(i) < 0) a(i) = 0, a(j) = sum;
      }
    }
    const double di = a(i) - ai, dj = a(j) - aj;
    for (Eigen::Index t = 0; t < n; ++t) G(t) += Q(t, i) * di + Q(t, j) * dj;
  }

  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity(), sum = 0.0;
  int free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * G(t);
    if (a(t) >= C) {
      if (y(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free;
      sum += yg;
    }
  }
  r.rho = free > 0 ? sum / free : (ub + lb) / 2.0;
  return r;
}

/// Largest violation of the dual optimality conditions, m(alpha) - M(alpha),
/// recomputed from scratch. At an eps-optimal solution this is below eps.
inline double kkt_violation(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Eigen::VectorXd& a, double C) {
  const Eigen::VectorXd G = (y.asDiagonal() * K * y.asDiagonal()) * a - Eigen::VectorXd::Ones(y.size());
  double up = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    const double v = -y(t) * G(t);
    if ((y(t) > 0 && a(t) < C) || (y(t) < 0 && a(t) > 0)) up = std::max(up, v);
    if ((y(t) > 0 && a(t) > 0) || (y(t) < 0 && a(t) < C)) low = std::min(low, v);
  }
  return std::max(0.0, up - low);
}

}  // namespace adaffect::learn
