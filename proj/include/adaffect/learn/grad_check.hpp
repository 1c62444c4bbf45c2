#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "adaffect/learn/cnn.hpp"
#include "adaffect/learn/mtl.hpp"

namespace adaffect::learn {

struct GradCheckResult {
  double max_relative_error{0.0};
  double max_abs_analytic{0.0};
  double max_abs_numeric{0.0};
  std::size_t checked{0};
};

/// Relative error |a - n| / max(|a|, |n|); pairs where both magnitudes are
/// below `floor` count as exact.
inline double relative_error(double a, double n, double floor = 1e-10) {
  const double scale = std::max(std::abs(a), std::abs(n));
  return scale < floor ? 0.0 : std::abs(a - n) / scale;
}

namespace detail {

template <typename Loss>
GradCheckResult finite_difference_check(std::vector<double>& params, const std::vector<double>& analytic,
                                        Loss&& loss, std::size_t max_params, double h, std::uint64_t seed) {
  std::vector<std::size_t> idx(params.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(max_params, idx.size()));
  GradCheckResult r;
  for (auto i : idx) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss();
    params[i] = keep - h;
    const double down = loss();
    params[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    r.max_relative_error = std::max(r.max_relative_error, relative_error(analytic[i], numeric));
    r.max_abs_analytic = std::max(r.max_abs_analytic, std::abs(analytic[i]));
    r.max_abs_numeric = std::max(r.max_abs_numeric, std::abs(numeric));
    ++r.checked;
  }
  return r;
}

}  // namespace detail

/// Compares backpropagated CNN gradients with central differences on up to
/// `max_params` randomly chosen parameters (dropout off).
inline GradCheckResult grad_check(CnnModel& m, const Eigen::MatrixXd& X, const std::vector<AffectLabel>& y,
                                  std::size_t max_params = 200, double h = 1e-5, std::uint64_t seed = 1) {
  const RowMat Xr = X;
  std::vector<int> t;
  for (auto l : y) t.push_back(class_index(l));
  std::vector<double> g;
  m.forward_backward(Xr, t, &g);
  return detail::finite_difference_check(m.params(), g, [&] { return m.forward_backward(Xr, t, nullptr); },
                                         max_params, h, seed);
}

/// Same check for the smooth part of the multi-task objective, over the
/// stacked (W, bias) parameters.
inline GradCheckResult grad_check(const MtlData& d, const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                                  const TaskGraph& g, double alpha, double gamma, std::size_t max_params = 200,
                                  double h = 1e-5, std::uint64_t seed = 1) {
  std::vector<double> p(static_cast<std::size_t>(W.size() + b.size()));
  std::copy(W.data(), W.data() + W.size(), p.begin());
  std::copy(b.data(), b.data() + b.size(), p.begin() + W.size());
  auto [gW, gb] = mtl_smooth_gradient(d, W, b, g.incidence, alpha, gamma);
  std::vector<double> analytic(p.size());
  std::copy(gW.data(), gW.data() + gW.size(), analytic.begin());
  std::copy(gb.data(), gb.data() + gb.size(), analytic.begin() + gW.size());
  auto loss = [&] {
    const Eigen::Map<const Eigen::MatrixXd> Wm(p.data(), W.rows(), W.cols());
    const Eigen::Map<const Eigen::VectorXd> bm(p.data() + W.size(), b.size());
    return mtl_smooth_objective(d, Wm, bm, g.incidence, alpha, gamma);
  };
  return detail::finite_difference_check(p, analytic, loss, max_params, h, seed);
}

}  // namespace adaffect::learn
