#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/learn/common.hpp"

namespace adaffect::learn {

struct CnnConfig {
  int conv_filters{64};
  int kernel_width{3};
  int fc_units{128};
  double learning_rate{1e-4};
  double momentum{0.9};
  double weight_decay{5e-4};
  double dropout{0.5};
  int max_epochs{100};
  int patience{5};
  int batch_size{32};
  double validation_fraction{0.1};
  std::uint64_t seed{42};
};

/// Stops after `patience` consecutive epochs whose validation loss exceeds
/// the previous epoch's.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  /// Records one epoch; returns true when training should stop.
  bool update(double val_loss) {
    if (has_prev_ && val_loss > prev_) ++rising_;
    else rising_ = 0;
    prev_ = val_loss;
    has_prev_ = true;
    return rising_ >= patience_;
  }

 private:
  int patience_;
  int rising_ = 0;
  double prev_ = 0.0;
  bool has_prev_ = false;
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Two valid-padding 1-D convolutions (ReLU), a ReLU fully connected layer
/// with dropout, and a 2-way softmax readout (index 0 = High). All
/// parameters live in one flat vector.
class CnnModel {
 public:
  CnnModel() = default;

  CnnModel(Eigen::Index input_len, const CnnConfig& cfg) : cfg_(cfg), input_len_(input_len) {
    if (input_len < 2 * (cfg.kernel_width - 1) + 1)
      throw Error(Errc::too_short, "input length " + std::to_string(input_len) + " too short for two convolutions");
    layout();
    params_.assign(static_cast<std::size_t>(param_count()), 0.0);
  }

  static Eigen::Index param_count_for(Eigen::Index k, const CnnConfig& c) {
    const Eigen::Index F = c.conv_filters, w = c.kernel_width, H = c.fc_units;
    const Eigen::Index L2 = k - 2 * (w - 1);
    return (F * w + F) + (F * F * w + F) + (H * F * L2 + H) + (2 * H + 2);
  }

  Eigen::Index param_count() const { return off_out_b_ + 2; }
  Eigen::Index input_len() const { return input_len_; }
  const CnnConfig& config() const { return cfg_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// He-normal weights for hidden layers, small normal readout, zero biases.
  void initialize(std::mt19937_64& rng) {
    std::fill(params_.begin(), params_.end(), 0.0);
    auto fill = [&](Eigen::Index off, Eigen::Index count, double sd) {
      std::normal_distribution<double> nd(0.0, sd);
      for (Eigen::Index i = 0; i < count; ++i) params_[static_cast<std::size_t>(off + i)] = nd(rng);
    };
    const Eigen::Index F = cfg_.conv_filters, w = cfg_.kernel_width, H = cfg_.fc_units;
    fill(off_c1_w_, F * w, std::sqrt(2.0 / static_cast<double>(w)));
    fill(off_c2_w_, F * F * w, std::sqrt(2.0 / static_cast<double>(F * w)));
    fill(off_fc_w_, H * F * L2_, std::sqrt(2.0 / static_cast<double>(F * L2_)));
    fill(off_out_w_, 2 * H, 0.01);
  }

  /// Whether parameter i is a weight (weight decay applies) rather than a bias.
  bool is_weight(Eigen::Index i) const {
    return (i >= off_c1_w_ && i < off_c1_b_) || (i >= off_c2_w_ && i < off_c2_b_) ||
           (i >= off_fc_w_ && i < off_fc_b_) || (i >= off_out_w_ && i < off_out_b_);
  }

  /// Mean cross-entropy over the batch; fills `grad` (same layout as params)
  /// when non-null. `dropout_mask` (B x fc_units, already scaled) enables
  /// dropout when non-null.
  double forward_backward(const RowMat& X, const std::vector<int>& target, std::vector<double>* grad,
                          const RowMat* dropout_mask = nullptr, RowMat* probs_out = nullptr) const {
    const Eigen::Index B = X.rows(), F = cfg_.conv_filters, w = cfg_.kernel_width, H = cfg_.fc_units;
    if (X.cols() != input_len_) throw Error(Errc::dimension_mismatch, "CNN expects " + std::to_string(input_len_) + " inputs");
    const auto W1 = map(off_c1_w_, F, w);
    const auto b1 = vec(off_c1_b_, F);
    const auto W2 = map(off_c2_w_, F, F * w);
    const auto b2 = vec(off_c2_b_, F);
    const auto W3 = map(off_fc_w_, H, F * L2_);
    const auto b3 = vec(off_fc_b_, H);
    const auto W4 = map(off_out_w_, 2, H);
    const auto b4 = vec(off_out_b_, 2);

    RowMat P1(B * L1_, w);
    for (Eigen::Index b = 0; b < B; ++b)
      for (Eigen::Index p = 0; p < L1_; ++p) P1.row(b * L1_ + p) = X.row(b).segment(p, w);
    RowMat A1 = (P1 * W1.transpose()).rowwise() + b1.transpose();
    RowMat H1 = A1.cwiseMax(0.0);

    RowMat P2(B * L2_, F * w);
    for (Eigen::Index b = 0; b < B; ++b)
      for (Eigen::Index p = 0; p < L2_; ++p)
        for (Eigen::Index j = 0; j < w; ++j) P2.block(b * L2_ + p, j * F, 1, F) = H1.row(b * L1_ + p + j);
    RowMat A2 = (P2 * W2.transpose()).rowwise() + b2.transpose();
    RowMat H2 = A2.cwiseMax(0.0);
    const Eigen::Map<const RowMat> Flat(H2.data(), B, L2_ * F);

    RowMat A3 = (Flat * W3.transpose()).rowwise() + b3.transpose();
    RowMat H3 = A3.cwiseMax(0.0);
    if (dropout_mask) H3 = H3.cwiseProduct(*dropout_mask);
    RowMat Z = (H3 * W4.transpose()).rowwise() + b4.transpose();

    RowMat Pr(B, 2);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
      const double m = Z.row(b).maxCoeff();
      const double e0 = std::exp(Z(b, 0) - m), e1 = std::exp(Z(b, 1) - m);
      const double s = e0 + e1;
      Pr(b, 0) = e0 / s;
      Pr(b, 1) = e1 / s;
      const auto t = static_cast<Eigen::Index>(target.empty() ? 0 : target[static_cast<std::size_t>(b)]);
      if (!target.empty()) loss -= (Z(b, t) - m) - std::log(s);
    }
    if (probs_out) *probs_out = Pr;
    loss /= static_cast<double>(B);
    if (!grad) return loss;

    grad->assign(params_.size(), 0.0);
    RowMat dZ = Pr;
    for (Eigen::Index b = 0; b < B; ++b) dZ(b, target[static_cast<std::size_t>(b)]) -= 1.0;
    dZ /= static_cast<double>(B);
    gmap(*grad, off_out_w_, 2, H) = dZ.transpose() * H3;
    gvec(*grad, off_out_b_, 2) = dZ.colwise().sum().transpose();

    RowMat dH3 = dZ * W4;
    if (dropout_mask) dH3 = dH3.cwiseProduct(*dropout_mask);
    RowMat dA3 = dH3.cwiseProduct((A3.array() > 0.0).cast<double>().matrix());
    gmap(*grad, off_fc_w_, H, F * L2_) = dA3.transpose() * Flat;
    gvec(*grad, off_fc_b_, H) = dA3.colwise().sum().transpose();

    RowMat dFlat = dA3 * W3;
    const Eigen::Map<const RowMat> dH2(dFlat.data(), B * L2_, F);
    RowMat dA2 = dH2.cwiseProduct((A2.array() > 0.0).cast<double>().matrix());
    gmap(*grad, off_c2_w_, F, F * w) = dA2.transpose() * P2;
    gvec(*grad, off_c2_b_, F) = dA2.colwise().sum().transpose();

    RowMat dP2 = dA2 * W2;
    RowMat dH1 = RowMat::Zero(B * L1_, F);
    for (Eigen::Index b = 0; b < B; ++b)
      for (Eigen::Index p = 0; p < L2_; ++p)
        for (Eigen::Index j = 0; j < w; ++j) dH1.row(b * L1_ + p + j) += dP2.block(b * L2_ + p, j * F, 1, F);
    RowMat dA1 = dH1.cwiseProduct((A1.array() > 0.0).cast<double>().matrix());
    gmap(*grad, off_c1_w_, F, w) = dA1.transpose() * P1;
    gvec(*grad, off_c1_b_, F) = dA1.colwise().sum().transpose();
    return loss;
  }

 private:
  void layout() {
    const Eigen::Index F = cfg_.conv_filters, w = cfg_.kernel_width, H = cfg_.fc_units;
    L1_ = input_len_ - (w - 1);
    L2_ = L1_ - (w - 1);
    off_c1_w_ = 0;
    off_c1_b_ = off_c1_w_ + F * w;
    off_c2_w_ = off_c1_b_ + F;
    off_c2_b_ = off_c2_w_ + F * F * w;
    off_fc_w_ = off_c2_b_ + F;
    off_fc_b_ = off_fc_w_ + H * F * L2_;
    off_out_w_ = off_fc_b_ + H;
    off_out_b_ = off_out_w_ + 2 * H;
  }

  Eigen::Map<const RowMat> map(Eigen::Index off, Eigen::Index r, Eigen::Index c) const {
    return {params_.data() + off, r, c};
  }
  Eigen::Map<const Eigen::VectorXd> vec(Eigen::Index off, Eigen::Index n) const { return {params_.data() + off, n}; }
  static Eigen::Map<RowMat> gmap(std::vector<double>& g, Eigen::Index off, Eigen::Index r, Eigen::Index c) {
    return {g.data() + off, r, c};
  }
  static Eigen::Map<Eigen::VectorXd> gvec(std::vector<double>& g, Eigen::Index off, Eigen::Index n) {
    return {g.data() + off, n};
  }

  CnnConfig cfg_;
  Eigen::Index input_len_ = 0, L1_ = 0, L2_ = 0;
  Eigen::Index off_c1_w_ = 0, off_c1_b_ = 0, off_c2_w_ = 0, off_c2_b_ = 0, off_fc_w_ = 0, off_fc_b_ = 0,
               off_out_w_ = 0, off_out_b_ = 0;
  std::vector<double> params_;
};

struct CnnTrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int epochs_run{0};
  int best_epoch{0};
};

inline int class_index(AffectLabel l) { return l == AffectLabel::High ? 0 : 1; }

inline RowMat to_rowmat(const Eigen::MatrixXd& X) { return X; }

/// Minibatch SGD with momentum and L2 weight decay on cross-entropy. A
/// stratified validation share is carved from the training data unless one
/// is supplied; the weights with the lowest validation loss are kept.
inline CnnModel cnn_train(const Eigen::MatrixXd& X, const std::vector<AffectLabel>& y, const CnnConfig& cfg = {},
                          CnnTrainReport* report = nullptr, const Eigen::MatrixXd* X_val = nullptr,
                          const std::vector<AffectLabel>* y_val = nullptr) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw Error(Errc::length_mismatch, "rows vs labels");
  if (X.cols() < 8) throw Error(Errc::too_short, "CNN input needs at least 8 features");
  if (!X.allFinite()) throw Error(Errc::non_finite, "training features contain non-finite values");
  require_both_classes(y);
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> tr, va;
  RowMat Xv;
  std::vector<int> tv;
  if (X_val && y_val) {
    for (std::size_t i = 0; i < y.size(); ++i) tr.push_back(i);
    Xv = *X_val;
    for (auto l : *y_val) tv.push_back(class_index(l));
  } else {
    const auto per_class = [&](AffectLabel c) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == c) idx.push_back(i);
      std::shuffle(idx.begin(), idx.end(), rng);
      return idx;
    };
    for (auto c : {AffectLabel::High, AffectLabel::Low}) {
      auto idx = per_class(c);
      const auto nv = static_cast<std::size_t>(std::round(cfg.validation_fraction * static_cast<double>(idx.size())));
      const auto take = std::min(nv, idx.size() > 1 ? idx.size() - 1 : std::size_t{0});
      va.insert(va.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
      tr.insert(tr.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
    }
    std::sort(tr.begin(), tr.end());
    std::sort(va.begin(), va.end());
    Xv.resize(static_cast<Eigen::Index>(va.size()), X.cols());
    for (std::size_t k = 0; k < va.size(); ++k) {
      Xv.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(va[k]));
      tv.push_back(class_index(y[va[k]]));
    }
  }

  CnnModel model(X.cols(), cfg);
  model.initialize(rng);
  auto& w = model.params();
  std::vector<double> velocity(w.size(), 0.0), grad, best = w;
  std::vector<char> decay(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) decay[i] = model.is_weight(static_cast<Eigen::Index>(i)) ? 1 : 0;

  EarlyStopper stopper(cfg.patience);
  double best_val = std::numeric_limits<double>::infinity();
  CnnTrainReport rep;
  std::bernoulli_distribution keep(1.0 - cfg.dropout);
  const double keep_scale = cfg.dropout < 1.0 ? 1.0 / (1.0 - cfg.dropout) : 0.0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(tr.begin(), tr.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < tr.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(tr.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto B = static_cast<Eigen::Index>(end - start);
      RowMat Xb(B, X.cols());
      std::vector<int> tb;
      for (std::size_t k = start; k < end; ++k) {
        Xb.row(static_cast<Eigen::Index>(k - start)) = X.row(static_cast<Eigen::Index>(tr[k]));
        tb.push_back(class_index(y[tr[k]]));
      }
      RowMat mask;
      const RowMat* mp = nullptr;
      if (cfg.dropout > 0.0) {
        mask.resize(B, cfg.fc_units);
        for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? keep_scale : 0.0;
        mp = &mask;
      }
      epoch_loss += model.forward_backward(Xb, tb, &grad, mp) * static_cast<double>(B);
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double g = grad[i] + (decay[i] ? cfg.weight_decay * w[i] : 0.0);
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * g;
        w[i] += velocity[i];
      }
    }
    rep.train_loss.push_back(epoch_loss / static_cast<double>(tr.size()));
    rep.epochs_run = epoch;
    if (tv.empty()) {
      best = w;
      rep.best_epoch = epoch;
      continue;
    }
    const double vl = model.forward_backward(Xv, tv, nullptr);
    rep.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      best = w;
      rep.best_epoch = epoch;
    }
    if (stopper.update(vl)) break;
  }
  w = best;
  if (report) *report = std::move(rep);
  return model;
}

/// Deterministic inference (dropout off).
inline std::vector<Posterior> cnn_predict_proba(const CnnModel& m, const Eigen::MatrixXd& X) {
  if (X.cols() != m.input_len()) throw Error(Errc::dimension_mismatch, "CNN expects " + std::to_string(m.input_len()) + " inputs");
  RowMat probs;
  m.forward_backward(X, {}, nullptr, nullptr, &probs);
  std::vector<Posterior> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = {probs(i, 0), probs(i, 1)};
  return out;
}

}  // namespace adaffect::learn
