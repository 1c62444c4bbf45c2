#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "adaffect/core/ratings.hpp"
#include "adaffect/core/types.hpp"

namespace adaffect::stats {

enum class AgreementMethod { krippendorff_alpha_ordinal, krippendorff_alpha_interval, fleiss_kappa, cohen_kappa };

struct AgreementResult {
  double statistic{0.0};
  AgreementMethod method{AgreementMethod::cohen_kappa};
};

/// Cohen's kappa for two raters over the same items; chance agreement is
/// the product of the two raters' marginal category rates.
template <typename Label>
AgreementResult cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw Error(Errc::length_mismatch, "cohen_kappa inputs differ in length");
  if (a.empty()) throw Error(Errc::empty_input, "cohen_kappa needs at least one item");
  std::map<Label, std::pair<double, double>> marg;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) agree += 1.0;
    marg[a[i]].first += 1.0;
    marg[b[i]].second += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double pe = 0.0;
  for (const auto& [cat, m] : marg) pe += (m.first / n) * (m.second / n);
  const double po = agree / n;
  if (pe >= 1.0) throw Error(Errc::undefined_kappa, "chance agreement is 1");
  return {(po - pe) / (1.0 - pe), AgreementMethod::cohen_kappa};
}

template <typename Label>
AgreementResult cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  return cohen_kappa(std::span<const Label>(a), std::span<const Label>(b));
}

/// Fleiss' kappa from an items x categories tally matrix.
inline AgreementResult fleiss_kappa(const Eigen::MatrixXi& tallies) {
  const auto N = tallies.rows(), K = tallies.cols();
  if (N == 0 || K == 0) throw Error(Errc::empty_input, "fleiss_kappa needs items and categories");
  if ((tallies.array() < 0).any()) throw Error(Errc::invalid_argument, "negative tally");
  const long n = tallies.row(0).sum();
  for (Eigen::Index i = 1; i < N; ++i)
    if (tallies.row(i).sum() != n)
      throw Error(Errc::unequal_ratings, "item " + std::to_string(i) + " has " + std::to_string(tallies.row(i).sum()) +
                                             " ratings, expected " + std::to_string(n));
  if (n < 2) throw Error(Errc::unequal_ratings, "each item needs at least two ratings");

  const double nd = static_cast<double>(n);
  double p_bar = 0.0;
  Eigen::VectorXd p_cat = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < N; ++i) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
      const double c = tallies(i, j);
      sq += c * c;
      p_cat(j) += c;
    }
    p_bar += (sq - nd) / (nd * (nd - 1.0));
  }
  p_bar /= static_cast<double>(N);
  p_cat /= static_cast<double>(N) * nd;
  const double pe = p_cat.squaredNorm();
  if (pe >= 1.0) throw Error(Errc::undefined_kappa, "only one category in use");
  return {(p_bar - pe) / (1.0 - pe), AgreementMethod::fleiss_kappa};
}

/// Tallies High/Low per item from a binarized raters x items grid. Items
/// missing any rating are skipped when `drop_incomplete` is set.
inline Eigen::MatrixXi label_tallies(const LabelGrid& grid, bool drop_incomplete = false) {
  if (grid.empty()) return Eigen::MatrixXi(0, 2);
  const std::size_t items = grid.front().size();
  std::vector<std::array<int, 2>> rows;
  for (std::size_t i = 0; i < items; ++i) {
    std::array<int, 2> t{0, 0};
    bool complete = true;
    for (const auto& rater : grid) {
      if (rater[i]) ++t[*rater[i] == AffectLabel::High ? 0 : 1];
      else complete = false;
    }
    if (drop_incomplete && !complete) continue;
    rows.push_back(t);
  }
  Eigen::MatrixXi out(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = rows[i][0], out(static_cast<Eigen::Index>(i), 1) = rows[i][1];
  return out;
}

enum class AlphaMetric { ordinal, interval };

/// Krippendorff's alpha via the coincidence matrix. Only items with at least
/// two present values are pairable. The ordinal metric uses the cumulative
/// marginal frequencies between two ranks; the interval metric is the
/// squared numeric difference.
inline AgreementResult krippendorff_alpha(const RatingMatrix& m, AlphaMetric metric) {
  if (m.raters() < 2) throw Error(Errc::no_pairable_values, "need at least two raters");
  std::vector<double> levels;
  for (Eigen::Index r = 0; r < m.raters(); ++r)
    for (Eigen::Index i = 0; i < m.items(); ++i)
      if (m.present(r, i)) levels.push_back(m.values(r, i));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const auto V = static_cast<Eigen::Index>(levels.size());
  auto level_of = [&](double v) {
    return static_cast<Eigen::Index>(std::lower_bound(levels.begin(), levels.end(), v) - levels.begin());
  };

  Eigen::MatrixXd coinc = Eigen::MatrixXd::Zero(V, V);
  std::vector<Eigen::Index> unit;
  for (Eigen::Index i = 0; i < m.items(); ++i) {
    unit.clear();
    for (Eigen::Index r = 0; r < m.raters(); ++r)
      if (m.present(r, i)) unit.push_back(level_of(m.values(r, i)));
    if (unit.size() < 2) continue;
    const double w = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t a = 0; a < unit.size(); ++a)
      for (std::size_t b = 0; b < unit.size(); ++b)
        if (a != b) coinc(unit[a], unit[b]) += w;
  }
  const Eigen::VectorXd marg = coinc.rowwise().sum();
  const double n = marg.sum();
  if (n < 2.0) throw Error(Errc::no_pairable_values, "fewer than two pairable values");

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(V, V);
  for (Eigen::Index c = 0; c < V; ++c)
    for (Eigen::Index k = 0; k < V; ++k) {
      if (c == k) continue;
      if (metric == AlphaMetric::interval) {
        const double d = levels[static_cast<std::size_t>(c)] - levels[static_cast<std::size_t>(k)];
        delta(c, k) = d * d;
      } else {
        const auto lo = std::min(c, k), hi = std::max(c, k);
        const double d = marg.segment(lo, hi - lo + 1).sum() - (marg(c) + marg(k)) / 2.0;
        delta(c, k) = d * d;
      }
    }
  const double d_o = (coinc.array() * delta.array()).sum();
  const double d_e = (marg * marg.transpose()).cwiseProduct(delta).sum() / (n - 1.0);
  if (d_e <= 0.0) throw Error(Errc::no_pairable_values, "expected disagreement is zero");
  return {1.0 - d_o / d_e, metric == AlphaMetric::ordinal ? AgreementMethod::krippendorff_alpha_ordinal
                                                          : AgreementMethod::krippendorff_alpha_interval};
}

}  // namespace adaffect::stats
