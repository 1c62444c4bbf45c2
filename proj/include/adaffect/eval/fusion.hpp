#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "adaffect/eval/metrics.hpp"

namespace adaffect::eval {

struct FusionWeights {
  double a1{0.5};
  double a2{0.5};
};

struct FusedOutput {
  /// Unnormalized fused scores P_j = sum_i a_i t_i p_ij.
  std::vector<learn::Posterior> scores;
  std::vector<AffectLabel> labels;
  double t1{0.0}, t2{0.0};
};

/// W_est fusion of two modalities with training F1 scores f1 and f2:
/// t_i = a_i F_i / sum a_i F_i, P_j = sum_i a_i t_i p_ij, label = argmax P
/// (ties go to Low).
inline FusedOutput west_fuse(const std::vector<learn::Posterior>& p1, const std::vector<learn::Posterior>& p2,
                             double f1, double f2, FusionWeights w) {
  if (p1.size() != p2.size())
    throw Error(Errc::misaligned_items, "posterior sets cover " + std::to_string(p1.size()) + " and " +
                                            std::to_string(p2.size()) + " items");
  for (double v : {f1, f2, w.a1, w.a2})
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::invalid_argument, "fusion weights and F1 scores must lie in [0,1]");
  const double z = w.a1 * f1 + w.a2 * f2;
  if (!(z > 0.0)) throw Error(Errc::invalid_argument, "sum of alpha_i * F_i must be positive");
  FusedOutput out;
  out.t1 = w.a1 * f1 / z;
  out.t2 = w.a2 * f2 / z;
  const double c1 = w.a1 * out.t1, c2 = w.a2 * out.t2;
  out.scores.reserve(p1.size());
  out.labels.reserve(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    learn::Posterior P{c1 * p1[i].high + c2 * p2[i].high, c1 * p1[i].low + c2 * p2[i].low};
    out.scores.push_back(P);
    out.labels.push_back(P.label());
  }
  return out;
}

enum class FusionGrid { joint, constrained };

inline FusionGrid parse_fusion_grid(std::string_view s) {
  if (s == "joint") return FusionGrid::joint;
  if (s == "constrained") return FusionGrid::constrained;
  throw Error(Errc::parse, "fusion grid must be joint or constrained");
}

struct FusionConfig {
  double grid_step{0.01};
  FusionGrid grid{FusionGrid::joint};
};

struct FusionTuning {
  FusionWeights weights;
  double f1{-1.0};
};

/// Grid search over (a1, a2) maximizing F1 on a tuning set. Joint mode scans
/// [0,1]^2, constrained mode a2 = 1 - a1. Points where sum a_i F_i = 0 are
/// skipped; ties keep the lexicographically smallest (a1, a2).
inline FusionTuning tune_fusion(const std::vector<learn::Posterior>& p1, const std::vector<learn::Posterior>& p2,
                                const std::vector<AffectLabel>& truth, double f1, double f2,
                                const FusionConfig& cfg = {}) {
  if (p1.size() != truth.size() || p2.size() != truth.size())
    throw Error(Errc::misaligned_items, "tuning posteriors and labels are not aligned");
  if (!(cfg.grid_step > 0.0 && cfg.grid_step <= 1.0)) throw Error(Errc::invalid_argument, "grid step must be in (0,1]");
  const int steps = static_cast<int>(std::lround(1.0 / cfg.grid_step));
  auto at = [&](int i) { return i == steps ? 1.0 : static_cast<double>(i) / steps; };
  FusionTuning best;
  auto consider = [&](double a1, double a2) {
    if (!(a1 * f1 + a2 * f2 > 0.0)) return;
    const double score = f1_score(west_fuse(p1, p2, f1, f2, {a1, a2}).labels, truth);
    if (score > best.f1) best = {{a1, a2}, score};
  };
  for (int i = 0; i <= steps; ++i) {
    if (cfg.grid == FusionGrid::constrained) consider(at(i), 1.0 - at(i));
    else
      for (int j = 0; j <= steps; ++j) consider(at(i), at(j));
  }
  if (best.f1 < 0.0) throw Error(Errc::invalid_argument, "both training F1 scores are zero; fusion undefined");
  return best;
}

}  // namespace adaffect::eval
