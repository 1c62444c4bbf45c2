#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/core/types.hpp"

namespace adaffect::learn {

/// Class posteriors for one item; high + low == 1.
struct Posterior {
  double high{0.5};
  double low{0.5};

  /// Ties resolve to Low.
  AffectLabel label() const { return high > low ? AffectLabel::High : AffectLabel::Low; }
};

inline std::vector<AffectLabel> labels_of(const std::vector<Posterior>& p) {
  std::vector<AffectLabel> out;
  out.reserve(p.size());
  for (const auto& q : p) out.push_back(q.label());
  return out;
}

inline double sign_target(AffectLabel l) { return l == AffectLabel::High ? 1.0 : -1.0; }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void require_both_classes(const std::vector<AffectLabel>& y) {
  const auto hi = std::count(y.begin(), y.end(), AffectLabel::High);
  if (hi == 0 || hi == static_cast<std::ptrdiff_t>(y.size()))
    throw Error(Errc::single_class, "training data must contain both classes");
}

/// Platt sigmoid P(High | f) = 1 / (1 + exp(A f + B)), fitted by Newton's
/// method with backtracking on prior-smoothed targets.
struct PlattScaling {
  double A{-1.0};
  double B{0.0};

  double operator()(double f) const { return sigmoid(-(A * f + B)); }

  static PlattScaling fit(const std::vector<double>& f, const std::vector<AffectLabel>& y) {
    const auto n_pos = static_cast<double>(std::count(y.begin(), y.end(), AffectLabel::High));
    const auto n_neg = static_cast<double>(y.size()) - n_pos;
    const double hi_t = (n_pos + 1.0) / (n_pos + 2.0), lo_t = 1.0 / (n_neg + 2.0);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] == AffectLabel::High ? hi_t : lo_t;

    double A = 0.0, B = std::log((n_neg + 1.0) / (n_pos + 1.0));
    auto objective = [&](double a, double b) {
      double v = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = a * f[i] + b;
        v += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
      }
      return v;
    };
    double fval = objective(A, B);
    constexpr double sigma = 1e-12, min_step = 1e-10, eps = 1e-5;
    for (int it = 0; it < 100; ++it) {
      double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = A * f[i] + B;
        const double p = sigmoid(-z);  // P(High)
        const double d2 = p * (1.0 - p);
        h11 += f[i] * f[i] * d2;
        h22 += d2;
        h21 += f[i] * d2;
        const double d1 = t[i] - p;
        g1 += f[i] * d1;
        g2 += d1;
      }
      if (std::abs(g1) < eps && std::abs(g2) < eps) break;
      const double det = h11 * h22 - h21 * h21;
      const double dA = -(h22 * g1 - h21 * g2) / det;
      const double dB = -(-h21 * g1 + h11 * g2) / det;
      const double gd = g1 * dA + g2 * dB;
      double step = 1.0;
      while (step >= min_step) {
        const double nv = objective(A + step * dA, B + step * dB);
        if (nv < fval + 1e-4 * step * gd) {
          A += step * dA;
          B += step * dB;
          fval = nv;
          break;
        }
        step /= 2.0;
      }
      if (step < min_step) break;
    }
    return {A, B};
  }
};

/// Stratified assignment of items to `folds` folds: each class is shuffled
/// and dealt round-robin, so fold class proportions differ by at most one.
inline std::vector<int> stratified_folds(const std::vector<AffectLabel>& y, int folds, std::mt19937_64& rng) {
  std::vector<int> fold(y.size(), 0);
  int next = 0;
  for (auto cls : {AffectLabel::High, AffectLabel::Low}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (auto i : idx) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

inline std::size_t min_class_count(const std::vector<AffectLabel>& y) {
  const auto hi = static_cast<std::size_t>(std::count(y.begin(), y.end(), AffectLabel::High));
  return std::min(hi, y.size() - hi);
}

}  // namespace adaffect::learn
