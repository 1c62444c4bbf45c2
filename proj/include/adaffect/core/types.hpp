#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/core/error.hpp"

namespace adaffect {

enum class AffectLabel : int { Low = 0, High = 1 };

inline constexpr bool operator<(AffectLabel a, AffectLabel b) {
  return static_cast<int>(a) < static_cast<int>(b);
}

inline char label_char(AffectLabel l) { return l == AffectLabel::High ? 'H' : 'L'; }

inline AffectLabel parse_label(std::string_view s) {
  if (s == "H" || s == "h" || s == "High" || s == "high" || s == "1") return AffectLabel::High;
  if (s == "L" || s == "l" || s == "Low" || s == "low" || s == "0") return AffectLabel::Low;
  throw Error(Errc::parse, "unknown affect label '" + std::string(s) + "'");
}

/// Arousal x valence cell. Two quadrants are related when they share
/// either component.
struct Quadrant {
  AffectLabel arousal{AffectLabel::Low};
  AffectLabel valence{AffectLabel::Low};

  friend constexpr bool operator==(const Quadrant&, const Quadrant&) = default;

  /// Canonical task index: HH=0, HL=1, LH=2, LL=3.
  constexpr int index() const {
    return (arousal == AffectLabel::High ? 0 : 2) + (valence == AffectLabel::High ? 0 : 1);
  }

  static constexpr Quadrant from_index(int i) {
    return {i < 2 ? AffectLabel::High : AffectLabel::Low,
            (i % 2 == 0) ? AffectLabel::High : AffectLabel::Low};
  }

  bool related(const Quadrant& o) const {
    return *this != o && (arousal == o.arousal || valence == o.valence);
  }

  std::string code() const { return {label_char(arousal), label_char(valence)}; }
};

inline constexpr std::array<Quadrant, 4> kAllQuadrants = {
    Quadrant::from_index(0), Quadrant::from_index(1), Quadrant::from_index(2),
    Quadrant::from_index(3)};

inline Quadrant parse_quadrant(std::string_view s) {
  if (s.size() != 2) throw Error(Errc::parse, "quadrant must be two letters, got '" + std::string(s) + "'");
  return {parse_label(s.substr(0, 1)), parse_label(s.substr(1, 1))};
}

enum class Attribute { valence, arousal };

inline std::string_view attribute_name(Attribute a) {
  return a == Attribute::valence ? "valence" : "arousal";
}

inline Attribute parse_attribute(std::string_view s) {
  if (s == "valence" || s == "val") return Attribute::valence;
  if (s == "arousal" || s == "asl") return Attribute::arousal;
  throw Error(Errc::parse, "unknown attribute '" + std::string(s) + "'");
}

struct AdRecord {
  std::string id;
  double duration_s{0.0};
  Quadrant expert_quadrant{};
  std::optional<double> asl_score;
  std::optional<double> val_score;

  void validate() const {
    if (!(duration_s > 0.0)) throw Error(Errc::invalid_argument, "ad '" + id + "' has non-positive duration");
    for (auto s : {asl_score, val_score})
      if (s && (*s < 0.0 || *s > 1.0))
        throw Error(Errc::scale_violation, "ad '" + id + "' score outside [0,1]");
  }
};

/// Raters x items grid of ordinal scores; NaN marks a missing entry.
struct RatingMatrix {
  Eigen::MatrixXd values;
  double scale_min{0.0};
  double scale_max{0.0};
  Attribute attribute{Attribute::valence};
  std::vector<std::string> rater_ids;
  std::vector<std::string> item_ids;

  static constexpr double missing() { return std::numeric_limits<double>::quiet_NaN(); }

  Eigen::Index raters() const { return values.rows(); }
  Eigen::Index items() const { return values.cols(); }
  bool present(Eigen::Index r, Eigen::Index i) const { return !std::isnan(values(r, i)); }

  void validate() const {
    for (Eigen::Index r = 0; r < raters(); ++r)
      for (Eigen::Index i = 0; i < items(); ++i) {
        if (!present(r, i)) continue;
        double v = values(r, i);
        if (!std::isfinite(v) || v < scale_min || v > scale_max) {
          std::string rater = r < static_cast<Eigen::Index>(rater_ids.size()) ? rater_ids[r] : std::to_string(r);
          std::string item = i < static_cast<Eigen::Index>(item_ids.size()) ? item_ids[i] : std::to_string(i);
          throw Error(Errc::scale_violation, "rater " + rater + ", item " + item + ": value " +
                                                 std::to_string(v) + " outside [" + std::to_string(scale_min) +
                                                 ", " + std::to_string(scale_max) + "]");
        }
      }
  }
};

/// Scale bounds of the source dataset: valence -2..2, arousal 0..4.
inline constexpr std::array<double, 2> default_scale(Attribute a) {
  return a == Attribute::valence ? std::array<double, 2>{-2.0, 2.0} : std::array<double, 2>{0.0, 4.0};
}

struct FeatureMatrix {
  Eigen::MatrixXd rows;
  std::vector<AffectLabel> labels;
  std::vector<Quadrant> tasks;
  std::vector<std::string> item_ids;

  Eigen::Index size() const { return rows.rows(); }
  Eigen::Index dims() const { return rows.cols(); }

  void validate() const {
    auto n = static_cast<std::size_t>(rows.rows());
    if (labels.size() != n || tasks.size() != n || item_ids.size() != n)
      throw Error(Errc::length_mismatch, "labels/tasks/item_ids must match row count");
    if (!rows.allFinite()) throw Error(Errc::non_finite, "feature matrix contains non-finite entries");
  }

  FeatureMatrix subset(const std::vector<std::size_t>& idx) const {
    FeatureMatrix out;
    out.rows.resize(static_cast<Eigen::Index>(idx.size()), rows.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.rows.row(static_cast<Eigen::Index>(k)) = rows.row(static_cast<Eigen::Index>(idx[k]));
      out.labels.push_back(labels[idx[k]]);
      out.tasks.push_back(tasks[idx[k]]);
      out.item_ids.push_back(item_ids[idx[k]]);
    }
    return out;
  }
};

}  // namespace adaffect
