#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "adaffect/core/error.hpp"

namespace adaffect::stats {

enum class TestMethod { wilcoxon_rank_sum, pearson_r };

struct TestResult {
  double statistic{0.0};
  double p_value{1.0};
  TestMethod method{TestMethod::pearson_r};
};

/// Sample Pearson correlation with a two-sided p-value from Student's t on
/// n-2 degrees of freedom.
inline TestResult pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::length_mismatch, "pearson_r inputs differ in length");
  if (x.size() < 3) throw Error(Errc::too_short, "pearson_r needs at least 3 pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw Error(Errc::zero_variance, "pearson_r input has zero variance");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2.0;
  double p = 0.0;
  if (std::abs(r) < 1.0) {
    const double t = r * std::sqrt(df / (1.0 - r * r));
    boost::math::students_t dist(df);
    p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return {r, std::clamp(p, 0.0, 1.0), TestMethod::pearson_r};
}

enum class WilcoxonMode { automatic, exact, normal };

namespace detail {

/// Midranks (1-based) of the pooled sample, plus the tie term sum(t^3 - t).
inline std::pair<std::vector<double>, double> midranks(const std::vector<double>& pooled) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(pooled.size());
  double ties = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  return {ranks, ties};
}

}  // namespace detail

/// Exact enumeration is used when n_x + n_y <= this bound in automatic mode.
inline constexpr std::size_t kWilcoxonExactLimit = 12;

/// Two-sided Wilcoxon rank-sum test. The statistic is the midrank sum of x.
/// The exact p-value enumerates every split of the pooled midranks; the
/// normal approximation uses the tie-corrected variance and a 0.5
/// continuity correction.
inline TestResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y,
                                    WilcoxonMode mode = WilcoxonMode::automatic) {
  if (x.empty() || y.empty()) throw Error(Errc::empty_input, "wilcoxon_rank_sum needs two nonempty samples");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const auto [ranks, ties] = detail::midranks(pooled);
  const std::size_t nx = x.size(), n = pooled.size();
  const double w = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(nx), 0.0);
  const double mean = static_cast<double>(nx) * (static_cast<double>(n) + 1.0) / 2.0;
  const double dev = std::abs(w - mean);

  if (mode == WilcoxonMode::exact || (mode == WilcoxonMode::automatic && n <= kWilcoxonExactLimit)) {
    // Walk all C(n, nx) index subsets in lexicographic order.
    std::vector<std::size_t> pick(nx);
    std::iota(pick.begin(), pick.end(), 0);
    double total = 0.0, extreme = 0.0;
    const double eps = 1e-9 * std::max(1.0, mean);
    for (;;) {
      double s = 0.0;
      for (auto k : pick) s += ranks[k];
      total += 1.0;
      if (std::abs(s - mean) >= dev - eps) extreme += 1.0;
      std::size_t i = nx;
      while (i > 0 && pick[i - 1] == n - nx + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t k = i; k < nx; ++k) pick[k] = pick[k - 1] + 1;
    }
    return {w, std::clamp(extreme / total, 0.0, 1.0), TestMethod::wilcoxon_rank_sum};
  }

  const double nxd = static_cast<double>(nx), nyd = static_cast<double>(y.size()), nd = static_cast<double>(n);
  const double var = nxd * nyd / 12.0 * ((nd + 1.0) - ties / (nd * (nd - 1.0)));
  if (var <= 0.0) return {w, 1.0, TestMethod::wilcoxon_rank_sum};
  const double z = std::max(0.0, dev - 0.5) / std::sqrt(var);
  const double p = std::erfc(z / std::sqrt(2.0));
  return {w, std::clamp(p, 0.0, 1.0), TestMethod::wilcoxon_rank_sum};
}

/// Benjamini-Hochberg step-up. Returns true for each rejected hypothesis.
inline std::vector<bool> bh_fdr(std::span<const double> p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::invalid_argument, "q must lie in (0,1)");
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::invalid_argument, "p-values must lie in [0,1]");
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= m; ++k)
    if (p[order[k - 1]] <= static_cast<double>(k) * q / static_cast<double>(m)) k_star = k;
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < k_star; ++k) reject[order[k]] = true;
  return reject;
}

}  // namespace adaffect::stats
