#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/learn/common.hpp"

namespace adaffect::learn {

/// Task relatedness graph. Column e of `incidence` is e_i - e_j for edge (i, j).
struct TaskGraph {
  std::vector<Quadrant> tasks;
  std::vector<std::pair<int, int>> edges;
  Eigen::MatrixXd incidence;

  int num_tasks() const { return static_cast<int>(incidence.rows()); }

  /// gamma_ij: 1 for an edge in either orientation, else 0.
  double weight(int i, int j) const {
    for (auto [a, b] : edges)
      if ((a == i && b == j) || (a == j && b == i)) return 1.0;
    return 0.0;
  }

  static TaskGraph from_edges(int num_tasks, std::vector<std::pair<int, int>> edges) {
    TaskGraph g;
    g.edges = std::move(edges);
    g.incidence = Eigen::MatrixXd::Zero(num_tasks, static_cast<Eigen::Index>(g.edges.size()));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      auto [i, j] = g.edges[e];
      if (i == j || i < 0 || j < 0 || i >= num_tasks || j >= num_tasks)
        throw Error(Errc::invalid_argument, "invalid task graph edge");
      g.incidence(i, static_cast<Eigen::Index>(e)) = 1.0;
      g.incidence(j, static_cast<Eigen::Index>(e)) = -1.0;
    }
    return g;
  }
};

/// Quadrants sharing an arousal or a valence level are related; the two
/// diagonal pairs are not.
inline TaskGraph build_task_graph(const std::vector<Quadrant>& quadrants) {
  for (std::size_t i = 0; i < quadrants.size(); ++i)
    for (std::size_t j = i + 1; j < quadrants.size(); ++j)
      if (quadrants[i] == quadrants[j]) throw Error(Errc::invalid_argument, "task quadrants must be distinct");
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < quadrants.size(); ++i)
    for (std::size_t j = i + 1; j < quadrants.size(); ++j)
      if (quadrants[i].related(quadrants[j])) edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  auto g = TaskGraph::from_edges(static_cast<int>(quadrants.size()), std::move(edges));
  g.tasks = quadrants;
  return g;
}

inline TaskGraph quadrant_task_graph() { return build_task_graph({kAllQuadrants.begin(), kAllQuadrants.end()}); }

struct MtlOptions {
  double alpha{1.0};
  double beta{0.01};
  double gamma{0.1};
  bool fit_intercept{true};
  double tolerance{1e-6};
  int max_iterations{10'000};
};

/// Per-task design matrices (rows are items) and +1/-1 targets.
struct MtlData {
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::VectorXd> Y;

  int tasks() const { return static_cast<int>(X.size()); }
  Eigen::Index dims() const { return X.empty() ? 0 : X.front().cols(); }
};

struct MtlModel {
  Eigen::MatrixXd W;  // dims x tasks
  Eigen::VectorXd bias;
  TaskGraph graph;
  MtlOptions options;
  std::vector<double> objective_history;
  /// Slope of the logistic map from raw score to P(High).
  double calibration_slope{1.0};
};

/// Smooth part: sum_t ||X_t W_t + b_t - Y_t||^2 + alpha ||W R||_F^2 + gamma ||W||_F^2.
inline double mtl_smooth_objective(const MtlData& d, const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                                   const Eigen::MatrixXd& R, double alpha, double gamma) {
  double f = 0.0;
  for (int t = 0; t < d.tasks(); ++t)
    f += ((d.X[static_cast<std::size_t>(t)] * W.col(t)).array() + b(t) - d.Y[static_cast<std::size_t>(t)].array())
             .matrix()
             .squaredNorm();
  if (R.cols() > 0) f += alpha * (W * R).squaredNorm();
  return f + gamma * W.squaredNorm();
}

inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> mtl_smooth_gradient(const MtlData& d, const Eigen::MatrixXd& W,
                                                                       const Eigen::VectorXd& b,
                                                                       const Eigen::MatrixXd& R, double alpha,
                                                                       double gamma) {
  Eigen::MatrixXd gW(W.rows(), W.cols());
  Eigen::VectorXd gb(W.cols());
  for (int t = 0; t < d.tasks(); ++t) {
    const auto& X = d.X[static_cast<std::size_t>(t)];
    const Eigen::VectorXd r = ((X * W.col(t)).array() + b(t)).matrix() - d.Y[static_cast<std::size_t>(t)];
    gW.col(t) = 2.0 * X.transpose() * r;
    gb(t) = 2.0 * r.sum();
  }
  if (R.cols() > 0) gW += 2.0 * alpha * W * (R * R.transpose());
  gW += 2.0 * gamma * W;
  return {gW, gb};
}

inline Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& V, double thr) {
  return V.unaryExpr([thr](double v) { return v > thr ? v - thr : (v < -thr ? v + thr : 0.0); });
}

/// Monotone accelerated proximal gradient (FISTA with a descent safeguard)
/// with backtracking on the Lipschitz estimate. The l1 term is handled by
/// soft-thresholding; intercepts are unpenalised.
inline MtlModel mtl_fit(const MtlData& d, const TaskGraph& graph, const MtlOptions& opt = {}) {
  const int T = d.tasks();
  if (T == 0) throw Error(Errc::empty_task, "no tasks");
  if (static_cast<int>(d.Y.size()) != T) throw Error(Errc::length_mismatch, "X and Y task counts differ");
  if (graph.num_tasks() != T) throw Error(Errc::dimension_mismatch, "graph task count differs from data");
  const auto dims = d.dims();
  for (int t = 0; t < T; ++t) {
    const auto& X = d.X[static_cast<std::size_t>(t)];
    if (X.rows() == 0) throw Error(Errc::empty_task, "task " + std::to_string(t) + " has no items");
    if (X.cols() != dims) throw Error(Errc::dimension_mismatch, "tasks differ in feature count");
    if (X.rows() != d.Y[static_cast<std::size_t>(t)].size()) throw Error(Errc::length_mismatch, "task rows vs labels");
    if (!X.allFinite()) throw Error(Errc::non_finite, "task features contain non-finite values");
  }
  if (opt.alpha < 0 || opt.beta < 0 || opt.gamma < 0) throw Error(Errc::invalid_argument, "regularisers must be >= 0");

  const Eigen::MatrixXd& R = graph.incidence;
  auto smooth = [&](const Eigen::MatrixXd& W, const Eigen::VectorXd& b) {
    return mtl_smooth_objective(d, W, b, R, opt.alpha, opt.gamma);
  };
  auto full = [&](const Eigen::MatrixXd& W, const Eigen::VectorXd& b) {
    return smooth(W, b) + opt.beta * W.cwiseAbs().sum();
  };

  MtlModel m;
  m.graph = graph;
  m.options = opt;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(dims, T), W_prev = W, YW = W;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(T), b_prev = b, Yb = b;
  double F = full(W, b);
  const double F0 = F;
  m.objective_history.push_back(F);
  double L = 1.0, t = 1.0;

  for (int it = 0; it < opt.max_iterations; ++it) {
    const double fy = smooth(YW, Yb);
    auto [gW, gb] = mtl_smooth_gradient(d, YW, Yb, R, opt.alpha, opt.gamma);
    if (!opt.fit_intercept) gb.setZero();
    Eigen::MatrixXd ZW;
    Eigen::VectorXd Zb;
    for (;;) {
      ZW = soft_threshold(YW - gW / L, opt.beta / L);
      Zb = Yb - gb / L;
      const Eigen::MatrixXd dW = ZW - YW;
      const Eigen::VectorXd db = Zb - Yb;
      const double model = fy + (gW.array() * dW.array()).sum() + gb.dot(db) + 0.5 * L * (dW.squaredNorm() + db.squaredNorm());
      if (smooth(ZW, Zb) <= model + 1e-12 * std::abs(model) || L > 1e300) break;
      L *= 2.0;
    }
    const double Fz = full(ZW, Zb);
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    const bool accept = Fz <= F;
    W_prev = W;
    b_prev = b;
    const double F_prev = F;
    if (accept) {
      W = ZW;
      b = Zb;
      F = Fz;
    }
    YW = W + (t / t_next) * (ZW - W) + ((t - 1.0) / t_next) * (W - W_prev);
    Yb = b + (t / t_next) * (Zb - b) + ((t - 1.0) / t_next) * (b - b_prev);
    t = t_next;
    m.objective_history.push_back(F);
    if (accept && (std::abs(F_prev - F) <= opt.tolerance * std::abs(F_prev) || F <= 1e-20 * F0)) break;
  }
  m.W = W;
  m.bias = b;

  // Logistic slope on training scores, targets smoothed toward the class prior.
  std::vector<double> s;
  std::vector<double> tgt;
  double n_pos = 0, n_neg = 0;
  for (int k = 0; k < T; ++k)
    for (Eigen::Index i = 0; i < d.Y[static_cast<std::size_t>(k)].size(); ++i)
      (d.Y[static_cast<std::size_t>(k)](i) > 0 ? n_pos : n_neg) += 1;
  for (int k = 0; k < T; ++k) {
    const Eigen::VectorXd sc = (d.X[static_cast<std::size_t>(k)] * W.col(k)).array() + b(k);
    for (Eigen::Index i = 0; i < sc.size(); ++i) {
      s.push_back(sc(i));
      tgt.push_back(d.Y[static_cast<std::size_t>(k)](i) > 0 ? (n_pos + 1) / (n_pos + 2) : 1.0 / (n_neg + 2));
    }
  }
  double kappa = 1.0;
  for (int it = 0; it < 50; ++it) {
    double g = 0, h = 1e-12;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double p = sigmoid(kappa * s[i]);
      g += (p - tgt[i]) * s[i];
      h += p * (1 - p) * s[i] * s[i];
    }
    const double next = std::clamp(kappa - g / h, 1e-3, 1e3);
    if (std::abs(next - kappa) < 1e-10) break;
    kappa = next;
  }
  m.calibration_slope = kappa;
  return m;
}

struct MtlPrediction {
  AffectLabel label{AffectLabel::Low};
  double p_high{0.5};
  /// Posterior of the predicted label.
  double confidence{0.5};
  int task{0};
  double score{0.0};
};

/// Known task: sign of that task's score. Unknown task: the task with the
/// largest |score| decides (first one on ties).
inline MtlPrediction mtl_predict(const MtlModel& m, const Eigen::VectorXd& x, std::optional<int> task = std::nullopt) {
  if (x.size() != m.W.rows())
    throw Error(Errc::dimension_mismatch, "model expects " + std::to_string(m.W.rows()) + " features");
  const Eigen::VectorXd scores = (m.W.transpose() * x) + m.bias;
  int k = 0;
  if (task) {
    if (*task < 0 || *task >= scores.size()) throw Error(Errc::invalid_argument, "task index out of range");
    k = *task;
  } else {
    for (Eigen::Index t = 1; t < scores.size(); ++t)
      if (std::abs(scores(t)) > std::abs(scores(k))) k = static_cast<int>(t);
  }
  MtlPrediction p;
  p.task = k;
  p.score = scores(k);
  p.p_high = sigmoid(m.calibration_slope * p.score);
  p.label = p.score > 0 ? AffectLabel::High : AffectLabel::Low;
  p.confidence = p.label == AffectLabel::High ? p.p_high : 1.0 - p.p_high;
  return p;
}

/// Splits a feature matrix into per-quadrant task data (task index = quadrant index).
inline MtlData mtl_data_from(const FeatureMatrix& fm) {
  MtlData d;
  std::array<std::vector<Eigen::Index>, 4> members;
  for (Eigen::Index i = 0; i < fm.size(); ++i) members[static_cast<std::size_t>(fm.tasks[static_cast<std::size_t>(i)].index())].push_back(i);
  for (const auto& idx : members) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), fm.dims());
    Eigen::VectorXd Y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      X.row(static_cast<Eigen::Index>(k)) = fm.rows.row(idx[k]);
      Y(static_cast<Eigen::Index>(k)) = sign_target(fm.labels[static_cast<std::size_t>(idx[k])]);
    }
    d.X.push_back(std::move(X));
    d.Y.push_back(std::move(Y));
  }
  return d;
}

}  // namespace adaffect::learn
