#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "adaffect/core/csv.hpp"
#include "adaffect/core/rng.hpp"
#include "adaffect/eval/fusion.hpp"
#include "adaffect/eval/metrics.hpp"
#include "adaffect/learn/model.hpp"

namespace adaffect::eval {

struct CvRun {
  int run{0};
  int fold{0};
  double f1{0.0};
};

struct CvReport {
  std::string setting;
  std::vector<CvRun> runs;
  double mean{0.0};
  /// Sample standard deviation over runs.
  double std{0.0};

  void summarize() {
    const auto n = static_cast<double>(runs.size());
    mean = 0.0;
    for (const auto& r : runs) mean += r.f1;
    mean = n > 0 ? mean / n : 0.0;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.f1 - mean) * (r.f1 - mean);
    std = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }

  std::string csv() const {
    std::string out = "setting,run,fold,f1\n";
    for (const auto& r : runs)
      out += setting + ',' + std::to_string(r.run) + ',' + std::to_string(r.fold) + ',' + io::fmt(r.f1) + '\n';
    out += "mean,std\n" + io::fmt(mean) + ',' + io::fmt(std) + '\n';
    return out;
  }
};

struct CvOptions {
  int repetitions{10};
  int folds{5};
  std::uint64_t seed{kDefaultSeed};
  /// 0 reads ADAFFECT_THREADS, falling back to 1.
  int threads{0};
  std::string setting;
};

inline int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ADAFFECT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

/// Runs body(rep) for rep in [0, reps) on up to `threads` workers. The first
/// exception thrown by any worker is rethrown after all workers join.
template <typename Body>
void parallel_reps(int reps, int threads, Body&& body) {
  threads = std::clamp(threads, 1, std::max(1, reps));
  if (threads == 1) {
    for (int r = 0; r < reps; ++r) body(r);
    return;
  }
  std::mutex mu;
  int next = 0;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      int r;
      {
        std::lock_guard lock(mu);
        if (err || next >= reps) return;
        r = next++;
      }
      try {
        body(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace detail {

inline std::vector<std::vector<std::size_t>> fold_members(const std::vector<int>& assign, int folds) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < assign.size(); ++i) out[static_cast<std::size_t>(assign[i])].push_back(i);
  return out;
}

inline std::vector<std::size_t> complement(const std::vector<std::size_t>& held, std::size_t n) {
  std::vector<char> mark(n, 0);
  for (auto i : held) mark[i] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!mark[i]) out.push_back(i);
  return out;
}

}  // namespace detail

/// Inner stratified CV over the SVM (C, gamma) grid, scored by the F1 of
/// the sign of the uncalibrated decision function. Linear SVMs search C
/// only. Returns the spec with the winning hyperparameters filled in.
inline learn::ModelSpec select_svm_hyper(const learn::ModelSpec& spec, const FeatureMatrix& train, std::uint64_t seed) {
  if (!learn::is_svm(spec.kind) || !spec.grid_search) return spec;
  const int folds = std::min<int>(spec.inner_folds, static_cast<int>(learn::min_class_count(train.labels)));
  if (folds < 2 || spec.c_grid.empty()) return spec;
  std::mt19937_64 rng(seed);
  const auto members = detail::fold_members(learn::stratified_folds(train.labels, folds, rng), folds);
  std::vector<double> gammas = spec.kind == learn::ModelKind::rbf_svm && !spec.gamma_grid.empty()
                                   ? spec.gamma_grid
                                   : std::vector<double>{spec.shallow.gamma};
  learn::ModelSpec best = spec;
  double best_f1 = -1.0;
  for (double C : spec.c_grid) {
    for (double g : gammas) {
      learn::ShallowHyper h = spec.shallow;
      h.C = C;
      h.gamma = g;
      double total = 0.0;
      for (const auto& te : members) {
        const auto tr = detail::complement(te, train.labels.size());
        const auto fit_set = train.subset(tr);
        const auto test_set = train.subset(te);
        const auto m = learn::detail::fit_raw(fit_set.rows, fit_set.labels, learn::to_shallow(spec.kind), h);
        const Eigen::VectorXd d = m.decision(test_set.rows);
        std::vector<AffectLabel> pred;
        for (Eigen::Index i = 0; i < d.size(); ++i) pred.push_back(d(i) > 0.0 ? AffectLabel::High : AffectLabel::Low);
        total += f1_score(pred, test_set.labels);
      }
      if (total > best_f1) {
        best_f1 = total;
        best.shallow = h;
      }
    }
  }
  return best;
}

/// Hyperparameter selection (for SVMs) followed by a fit on `train`.
inline learn::TrainedModel fit_selected(const learn::ModelSpec& spec, const FeatureMatrix& train, std::uint64_t seed) {
  const auto chosen = select_svm_hyper(spec, train, derive_seed(seed, {1}));
  return learn::fit_model(chosen, train, derive_seed(seed, {2}));
}

inline void require_cv_counts(const FeatureMatrix& X, int folds) {
  X.validate();
  if (folds < 2) throw Error(Errc::invalid_argument, "cross-validation needs at least 2 folds");
  const auto m = learn::min_class_count(X.labels);
  if (m < static_cast<std::size_t>(folds))
    throw Error(Errc::insufficient_class_count, "each class needs at least " + std::to_string(folds) +
                                                    " items for " + std::to_string(folds) + "-fold CV (minority has " +
                                                    std::to_string(m) + ")");
}

/// Repeated stratified k-fold CV. Run r, fold f uses seeds derived from
/// (seed, r, f), so the report does not depend on the thread count.
inline CvReport cross_validate(const FeatureMatrix& X, const learn::ModelSpec& spec, const CvOptions& opt = {}) {
  require_cv_counts(X, opt.folds);
  CvReport rep;
  rep.setting = opt.setting.empty() ? std::string(learn::model_kind_name(spec.kind)) : opt.setting;
  rep.runs.resize(static_cast<std::size_t>(opt.repetitions * opt.folds));
  parallel_reps(opt.repetitions, thread_count(opt.threads), [&](int r) {
    std::mt19937_64 rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(r)}));
    const auto members = detail::fold_members(learn::stratified_folds(X.labels, opt.folds, rng), opt.folds);
    for (int f = 0; f < opt.folds; ++f) {
      const auto& te = members[static_cast<std::size_t>(f)];
      const auto train = X.subset(detail::complement(te, X.labels.size()));
      const auto test = X.subset(te);
      const auto model = fit_selected(spec, train, derive_seed(opt.seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f), 7}));
      const auto pred = learn::labels_of(learn::predict_proba(model, test, spec.mtl_known_task));
      rep.runs[static_cast<std::size_t>(r * opt.folds + f)] = {r, f, f1_score(pred, test.labels)};
    }
  });
  rep.summarize();
  return rep;
}

struct FusedCvOptions {
  CvOptions cv;
  FusionConfig fusion;
  /// Tune alpha on the evaluation fold itself. This leaks test labels into
  /// the reported score and exists only to mirror a test-set grid search.
  bool research_mode{false};
};

struct FusedCvReport {
  CvReport modality1, modality2, fused;
  std::vector<FusionWeights> weights;
};

/// CV of W_est fusion over two aligned feature sets of the same items. Each
/// modality is trained on the training fold; F_i and the fusion weights come
/// from in-sample predictions on that training fold.
inline FusedCvReport cross_validate_fused(const FeatureMatrix& A, const learn::ModelSpec& spec_a, const FeatureMatrix& B,
                                          const learn::ModelSpec& spec_b, const FusedCvOptions& opt = {}) {
  if (A.size() != B.size() || A.labels != B.labels || A.item_ids != B.item_ids)
    throw Error(Errc::misaligned_items, "modalities must list the same items with the same labels in the same order");
  require_cv_counts(A, opt.cv.folds);
  require_cv_counts(B, opt.cv.folds);
  const auto reps = opt.cv.repetitions, folds = opt.cv.folds;
  const auto total = static_cast<std::size_t>(reps * folds);
  FusedCvReport out;
  out.modality1.runs.resize(total);
  out.modality2.runs.resize(total);
  out.fused.runs.resize(total);
  out.weights.resize(total);
  const std::string base = opt.cv.setting.empty() ? "fused" : opt.cv.setting;
  out.modality1.setting = base + ":" + std::string(learn::model_kind_name(spec_a.kind)) + "_a";
  out.modality2.setting = base + ":" + std::string(learn::model_kind_name(spec_b.kind)) + "_b";
  out.fused.setting = base + ":west";

  parallel_reps(reps, thread_count(opt.cv.threads), [&](int r) {
    std::mt19937_64 rng(derive_seed(opt.cv.seed, {static_cast<std::uint64_t>(r)}));
    const auto members = detail::fold_members(learn::stratified_folds(A.labels, folds, rng), folds);
    for (int f = 0; f < folds; ++f) {
      const auto& te = members[static_cast<std::size_t>(f)];
      const auto tr = detail::complement(te, A.labels.size());
      const auto s = derive_seed(opt.cv.seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f), 7});
      const auto trA = A.subset(tr), teA = A.subset(te), trB = B.subset(tr), teB = B.subset(te);
      const auto mA = fit_selected(spec_a, trA, s), mB = fit_selected(spec_b, trB, derive_seed(s, {11}));
      const auto inA = learn::predict_proba(mA, trA, spec_a.mtl_known_task);
      const auto inB = learn::predict_proba(mB, trB, spec_b.mtl_known_task);
      const auto outA = learn::predict_proba(mA, teA, spec_a.mtl_known_task);
      const auto outB = learn::predict_proba(mB, teB, spec_b.mtl_known_task);
      const double FA = f1_score(learn::labels_of(inA), trA.labels);
      const double FB = f1_score(learn::labels_of(inB), trB.labels);
      const auto idx = static_cast<std::size_t>(r * folds + f);
      out.modality1.runs[idx] = {r, f, f1_score(learn::labels_of(outA), teA.labels)};
      out.modality2.runs[idx] = {r, f, f1_score(learn::labels_of(outB), teB.labels)};
      double fused_f1 = 0.0;
      FusionWeights w{};
      if (FA > 0.0 || FB > 0.0) {
        const auto tuned = opt.research_mode ? tune_fusion(outA, outB, teA.labels, FA, FB, opt.fusion)
                                             : tune_fusion(inA, inB, trA.labels, FA, FB, opt.fusion);
        w = tuned.weights;
        fused_f1 = f1_score(west_fuse(outA, outB, FA, FB, w).labels, teA.labels);
      }
      out.fused.runs[idx] = {r, f, fused_f1};
      out.weights[idx] = w;
    }
  });
  out.modality1.summarize();
  out.modality2.summarize();
  out.fused.summarize();
  return out;
}

}  // namespace adaffect::eval
