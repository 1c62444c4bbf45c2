#pragma once

#include <span>
#include <vector>

#include "adaffect/core/error.hpp"
#include "adaffect/core/types.hpp"
#include "adaffect/learn/common.hpp"

namespace adaffect::eval {

struct Confusion {
  std::size_t tp{0}, fp{0}, fn{0}, tn{0};
};

inline Confusion confusion(std::span<const AffectLabel> pred, std::span<const AffectLabel> truth,
                           AffectLabel positive = AffectLabel::High) {
  if (pred.size() != truth.size())
    throw Error(Errc::length_mismatch, "prediction and truth lengths differ (" + std::to_string(pred.size()) + " vs " +
                                           std::to_string(truth.size()) + ")");
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == positive, t = truth[i] == positive;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

/// F1 = 2PR / (P + R), with 0/0 precision or recall taken as 0 and F1 = 0
/// when P + R = 0.
inline double f1_score(std::span<const AffectLabel> pred, std::span<const AffectLabel> truth,
                       AffectLabel positive = AffectLabel::High) {
  const auto c = confusion(pred, truth, positive);
  const double P = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  const double R = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  return P + R > 0.0 ? 2.0 * P * R / (P + R) : 0.0;
}

inline double f1_score(const std::vector<AffectLabel>& pred, const std::vector<AffectLabel>& truth,
                       AffectLabel positive = AffectLabel::High) {
  return f1_score(std::span<const AffectLabel>(pred), std::span<const AffectLabel>(truth), positive);
}

/// Arithmetic mean of the positive-class posteriors over an ad's segments.
inline double ad_level_score(std::span<const double> p_high) {
  if (p_high.empty()) throw Error(Errc::empty_input, "ad_level_score needs at least one segment");
  double s = 0.0;
  for (double p : p_high) s += p;
  return s / static_cast<double>(p_high.size());
}

inline double ad_level_score(const std::vector<learn::Posterior>& segments) {
  std::vector<double> p;
  p.reserve(segments.size());
  for (const auto& q : segments) p.push_back(q.high);
  return ad_level_score(std::span<const double>(p));
}

}  // namespace adaffect::eval
