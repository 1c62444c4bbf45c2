#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "adaffect/core/manifest.hpp"
#include "adaffect/core/types.hpp"

namespace adaffect {

inline std::vector<double> min_max_normalize(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::empty_input, "min_max_normalize needs at least one value");
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  double mn = *lo, mx = *hi;
  if (!(mx > mn)) throw Error(Errc::degenerate_range, "max equals min (" + io::fmt(mn) + ")");
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) out.push_back((v - mn) / (mx - mn));
  return out;
}

enum class BinarizeReference { per_rater_mean, group_mean };

using LabelGrid = std::vector<std::vector<std::optional<AffectLabel>>>;

/// High iff the score is strictly above the reference mean; ties go Low.
inline LabelGrid binarize_ratings(const RatingMatrix& m, BinarizeReference ref) {
  const auto R = m.raters(), I = m.items();
  std::vector<double> thresholds(static_cast<std::size_t>(R));
  double group_sum = 0.0;
  long group_n = 0;
  for (Eigen::Index r = 0; r < R; ++r) {
    double s = 0.0;
    long n = 0;
    for (Eigen::Index i = 0; i < I; ++i)
      if (m.present(r, i)) s += m.values(r, i), ++n;
    if (n == 0) {
      auto id = r < static_cast<Eigen::Index>(m.rater_ids.size()) ? m.rater_ids[r] : std::to_string(r);
      throw Error(Errc::empty_rater, "rater " + id + " has no ratings");
    }
    thresholds[static_cast<std::size_t>(r)] = s / static_cast<double>(n);
    group_sum += s;
    group_n += n;
  }
  if (ref == BinarizeReference::group_mean)
    std::fill(thresholds.begin(), thresholds.end(), group_sum / static_cast<double>(group_n));

  LabelGrid out(static_cast<std::size_t>(R), std::vector<std::optional<AffectLabel>>(static_cast<std::size_t>(I)));
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index i = 0; i < I; ++i)
      if (m.present(r, i))
        out[r][i] = m.values(r, i) > thresholds[static_cast<std::size_t>(r)] ? AffectLabel::High : AffectLabel::Low;
  return out;
}

/// Mean over raters of an item's present scores, or nullopt if nobody rated it.
inline std::optional<double> item_mean(const RatingMatrix& m, Eigen::Index item) {
  double s = 0.0;
  int n = 0;
  for (Eigen::Index r = 0; r < m.raters(); ++r)
    if (m.present(r, item)) s += m.values(r, item), ++n;
  if (n == 0) return std::nullopt;
  return s / n;
}

struct QuadrantRow {
  Quadrant quadrant;
  int count{0};
  double mean_length_s{0.0};
  std::optional<double> mean_asl;
  std::optional<double> mean_val;
};

/// Per-quadrant mean length / arousal / valence. Quadrants with no member
/// ads are omitted. Rating means are averaged over member ads that have at
/// least one rating.
inline std::vector<QuadrantRow> quadrant_summary(const std::vector<AdRecord>& records, const RatingPair& ratings) {
  if (records.empty()) throw Error(Errc::empty_input, "quadrant_summary needs at least one record");
  auto index_of = [](const RatingMatrix& m) {
    std::unordered_map<std::string, Eigen::Index> idx;
    for (std::size_t i = 0; i < m.item_ids.size(); ++i) idx.emplace(m.item_ids[i], static_cast<Eigen::Index>(i));
    return idx;
  };
  auto asl_idx = index_of(ratings.arousal), val_idx = index_of(ratings.valence);

  struct Acc {
    int n = 0;
    double len = 0.0, asl = 0.0, val = 0.0;
    int n_asl = 0, n_val = 0;
  };
  std::array<Acc, 4> acc{};
  for (const auto& rec : records) {
    auto& a = acc[static_cast<std::size_t>(rec.expert_quadrant.index())];
    ++a.n;
    a.len += rec.duration_s;
    if (auto it = asl_idx.find(rec.id); it != asl_idx.end())
      if (auto v = item_mean(ratings.arousal, it->second)) a.asl += *v, ++a.n_asl;
    if (auto it = val_idx.find(rec.id); it != val_idx.end())
      if (auto v = item_mean(ratings.valence, it->second)) a.val += *v, ++a.n_val;
  }
  std::vector<QuadrantRow> out;
  for (int q = 0; q < 4; ++q) {
    const auto& a = acc[static_cast<std::size_t>(q)];
    if (a.n == 0) continue;
    QuadrantRow row{Quadrant::from_index(q), a.n, a.len / a.n, std::nullopt, std::nullopt};
    if (a.n_asl) row.mean_asl = a.asl / a.n_asl;
    if (a.n_val) row.mean_val = a.val / a.n_val;
    out.push_back(row);
  }
  return out;
}

}  // namespace adaffect
