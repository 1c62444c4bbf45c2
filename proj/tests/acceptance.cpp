// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adaffect/adaffect.hpp"
#include "oracles.hpp"

using namespace adaffect;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{true};
  std::string detail;
};

struct Check {
  Outcome& o;
  void operator()(bool cond, const std::string& what) {
    if (!cond && o.pass) {
      o.pass = false;
      o.detail = what;
    }
  }
};

std::string num(double v) { return io::fmt(v); }

// 1. Agreement statistics against brute-force oracles.
Outcome agreement_oracles() {
  Outcome o;
  Check check{o};
  std::mt19937_64 rng(1);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const int R = pick(2, 6), I = pick(2, 12);
    RatingMatrix m;
    m.scale_min = -2;
    m.scale_max = 2;
    m.values.resize(R, I);
    for (int r = 0; r < R; ++r)
      for (int i = 0; i < I; ++i) m.values(r, i) = pick(0, 9) == 0 ? RatingMatrix::missing() : pick(-2, 2);

    // Krippendorff: skip draws where nothing varies (alpha undefined).
    double a_ord, a_int;
    try {
      a_ord = stats::krippendorff_alpha(m, stats::AlphaMetric::ordinal).statistic;
      a_int = stats::krippendorff_alpha(m, stats::AlphaMetric::interval).statistic;
    } catch (const Error&) {
      continue;
    }
    worst = std::max({worst, std::abs(a_ord - oracle::kripp(m.values, true)),
                      std::abs(a_int - oracle::kripp(m.values, false))});

    std::vector<std::vector<int>> grid(static_cast<std::size_t>(R), std::vector<int>(static_cast<std::size_t>(I)));
    LabelGrid labels(static_cast<std::size_t>(R), std::vector<std::optional<AffectLabel>>(static_cast<std::size_t>(I)));
    for (int r = 0; r < R; ++r)
      for (int i = 0; i < I; ++i) {
        const int c = pick(0, 1);
        grid[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] = c;
        labels[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] = c ? AffectLabel::High : AffectLabel::Low;
      }
    try {
      const double f = stats::fleiss_kappa(stats::label_tallies(labels)).statistic;
      worst = std::max(worst, std::abs(f - oracle::fleiss(grid, 2)));
    } catch (const Error&) {
    }
    std::vector<int> a(static_cast<std::size_t>(I)), b(static_cast<std::size_t>(I));
    for (int i = 0; i < I; ++i) a[static_cast<std::size_t>(i)] = pick(0, 3), b[static_cast<std::size_t>(i)] = pick(0, 3);
    try {
      const double k = stats::cohen_kappa(a, b).statistic;
      worst = std::max(worst, std::abs(k - oracle::cohen(a, b)));
    } catch (const Error&) {
    }
    ++done;
  }
  check(worst <= 1e-10, "max oracle deviation " + num(worst));

  // Perfect agreement.
  RatingMatrix p;
  p.scale_min = -2;
  p.scale_max = 2;
  p.values.resize(4, 6);
  for (int i = 0; i < 6; ++i) p.values.col(i).setConstant(i % 5 - 2);
  check(stats::krippendorff_alpha(p, stats::AlphaMetric::ordinal).statistic == 1.0, "perfect alpha (ordinal) != 1");
  check(stats::krippendorff_alpha(p, stats::AlphaMetric::interval).statistic == 1.0, "perfect alpha (interval) != 1");
  const auto bin = binarize_ratings(p, BinarizeReference::group_mean);
  check(stats::fleiss_kappa(stats::label_tallies(bin)).statistic == 1.0, "perfect Fleiss != 1");
  const std::vector<int> same{0, 1, 2, 1, 0, 2};
  check(stats::cohen_kappa(same, same).statistic == 1.0, "perfect Cohen != 1");
  if (o.pass) o.detail = "max deviation " + num(worst);
  return o;
}

// 2. Spectrogram bins, frame count and Parseval.
Outcome spectrogram() {
  Outcome o;
  Check check{o};
  const auto tone = synth::gen_tone(1000.0, 16000.0, 10.0);
  const auto sg = media::stft_spectrogram(tone);
  check(sg.magnitudes.rows() == 499, "frame count " + std::to_string(sg.magnitudes.rows()));
  for (Eigen::Index f = 0; f < sg.magnitudes.rows(); ++f) {
    Eigen::Index arg;
    sg.magnitudes.row(f).maxCoeff(&arg);
    check(arg == 40, "frame " + std::to_string(f) + " argmax bin " + std::to_string(arg));
  }
  media::AudioClip noise;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int i = 0; i < 16000 * 10; ++i) noise.samples.push_back(g(rng));
  const auto rect = media::stft_spectrogram(noise, {40.0, 40.0, media::WindowFn::rectangular});
  double time_energy = 0.0;
  const auto covered = static_cast<std::size_t>(rect.magnitudes.rows()) * rect.window_samples;
  for (std::size_t i = 0; i < covered; ++i) time_energy += noise.samples[i] * noise.samples[i];
  const double rel = std::abs(media::spectrogram_energy(rect) - time_energy) / time_energy;
  check(rel <= 1e-6, "Parseval relative error " + num(rel));
  if (o.pass) o.detail = "Parseval rel err " + num(rel);
  return o;
}

// 3. EEG window vector lengths.
Outcome eeg_shapes() {
  Outcome o;
  Check check{o};
  synth::EegGenSpec s;
  s.epochs_per_class = 1;
  s.seconds = 60.0;
  const auto e = synth::gen_synthetic_eeg(s).front();
  const auto n30 = eeg::vectorize(e, TemporalWindow::first30).size();
  const auto n10 = eeg::vectorize(e, TemporalWindow::last10).size();
  check(n30 == 51338, "first30 length " + std::to_string(n30));
  check(n10 == 17920, "last10 length " + std::to_string(n10));
  o.detail = "first30=" + std::to_string(n30) + " last10=" + std::to_string(n10);
  return o;
}

// 4. PCA variance, orthonormality and Gram/covariance agreement.
Outcome pca() {
  Outcome o;
  Check check{o};
  double worst_orth = 0.0, worst_proj = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    std::mt19937_64 rng(100 + trial);
    std::normal_distribution<double> g(0.0, 1.0);
    // Low-rank signal plus isotropic noise.
    Eigen::MatrixXd A(500, 15), B(15, 200), X(500, 200);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
    X = A * B;
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] += 0.5 * g(rng);
    const auto cov = eeg::pca_fit(X, 0.9, eeg::PcaMethod::covariance);
    const auto gram = eeg::pca_fit(X, 0.9, eeg::PcaMethod::gram);
    check(cov.retained_fraction >= 0.9 && gram.retained_fraction >= 0.9, "retained variance below 0.9");
    for (const auto* m : {&cov, &gram}) {
      const Eigen::MatrixXd I = m->components * m->components.transpose();
      worst_orth = std::max(worst_orth, (I - Eigen::MatrixXd::Identity(m->k(), m->k())).cwiseAbs().maxCoeff());
    }
    check(cov.k() == gram.k(), "component counts differ");
    if (cov.k() != gram.k()) break;
    const Eigen::MatrixXd pc = eeg::pca_apply(cov, X), pg = eeg::pca_apply(gram, X);
    for (Eigen::Index c = 0; c < pc.cols(); ++c) {
      const double same = (pc.col(c) - pg.col(c)).cwiseAbs().maxCoeff();
      const double flip = (pc.col(c) + pg.col(c)).cwiseAbs().maxCoeff();
      worst_proj = std::max(worst_proj, std::min(same, flip));
    }
  }
  check(worst_orth <= 1e-8, "orthonormality error " + num(worst_orth));
  check(worst_proj <= 1e-6, "projection disagreement " + num(worst_proj));
  if (o.pass) o.detail = "orth err " + num(worst_orth) + ", proj diff " + num(worst_proj);
  return o;
}

learn::MtlData random_mtl(std::mt19937_64& rng, int tasks, int n, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  learn::MtlData data;
  for (int t = 0; t < tasks; ++t) {
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd Y(n);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
    for (int i = 0; i < n; ++i) Y(i) = g(rng) > 0 ? 1.0 : -1.0;
    data.X.push_back(X);
    data.Y.push_back(Y);
  }
  return data;
}

// 5. MTL solver properties.
Outcome mtl_solver() {
  Outcome o;
  Check check{o};
  std::mt19937_64 rng(5);
  const auto graph = learn::quadrant_task_graph();
  for (int inst = 0; inst < 50; ++inst) {
    const auto d = random_mtl(rng, 4, 12 + inst % 10, 3 + inst % 8);
    learn::MtlOptions opt;
    opt.alpha = std::exp2(inst % 7 - 3);
    opt.beta = 0.05 * (inst % 5);
    opt.gamma = 0.01 * (inst % 3);
    const auto m = learn::mtl_fit(d, graph, opt);
    for (std::size_t i = 1; i < m.objective_history.size(); ++i)
      check(m.objective_history[i] <= m.objective_history[i - 1],
            "objective increased at instance " + std::to_string(inst) + ", iteration " + std::to_string(i));
  }

  // 1-D prox: min (w - 1)^2 + |w| -> 0.5.
  learn::MtlData one;
  one.X.push_back(Eigen::MatrixXd::Constant(1, 1, 1.0));
  one.Y.push_back(Eigen::VectorXd::Constant(1, 1.0));
  learn::MtlOptions prox{0.0, 1.0, 0.0, false, 1e-12, 10'000};
  const auto pm = learn::mtl_fit(one, learn::TaskGraph::from_edges(1, {}), prox);
  check(std::abs(pm.W(0, 0) - 0.5) <= 1e-9, "1-D prox gave " + num(pm.W(0, 0)));

  // Strong coupling pulls related task weights together.
  const auto cd = random_mtl(rng, 4, 30, 5);
  learn::MtlOptions strong{1e6, 0.0, 0.0, true, 1e-14, 200'000};
  const auto sm = learn::mtl_fit(cd, graph, strong);
  double gap = 0.0;
  for (const auto& [i, j] : graph.edges) gap = std::max(gap, (sm.W.col(i) - sm.W.col(j)).norm());
  check(gap < 1e-3, "related-task column distance " + num(gap));

  // No regularization: per-task least squares.
  const auto ld = random_mtl(rng, 4, 25, 6);
  learn::MtlOptions none{0.0, 0.0, 0.0, false, 1e-15, 200'000};
  const auto lm = learn::mtl_fit(ld, graph, none);
  double ls = 0.0;
  for (int t = 0; t < 4; ++t) {
    const Eigen::VectorXd w = ld.X[static_cast<std::size_t>(t)].colPivHouseholderQr().solve(ld.Y[static_cast<std::size_t>(t)]);
    ls = std::max(ls, (w - lm.W.col(t)).cwiseAbs().maxCoeff());
  }
  check(ls <= 1e-6, "least-squares deviation " + num(ls));
  if (o.pass) o.detail = "coupling gap " + num(gap) + ", LS dev " + num(ls);
  return o;
}

// 6. Gradient checks.
Outcome grad_checks() {
  Outcome o;
  Check check{o};
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd X(6, 16);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  std::vector<AffectLabel> y{AffectLabel::High, AffectLabel::Low, AffectLabel::High,
                             AffectLabel::Low,  AffectLabel::High, AffectLabel::Low};
  learn::CnnConfig cfg;
  cfg.conv_filters = 8;
  cfg.fc_units = 16;
  learn::CnnModel net(16, cfg);
  net.initialize(rng);
  const auto rc = learn::grad_check(net, X, y, 200, 1e-5, 7);
  check(rc.max_relative_error < 1e-4, "CNN relative error " + num(rc.max_relative_error));

  const auto d = random_mtl(rng, 4, 10, 5);
  Eigen::MatrixXd W(5, 4);
  Eigen::VectorXd b(4);
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = g(rng);
  const auto rm = learn::grad_check(d, W, b, learn::quadrant_task_graph(), 0.7, 0.3);
  check(rm.max_relative_error < 1e-6, "MTL relative error " + num(rm.max_relative_error));
  o.detail = "CNN " + num(rc.max_relative_error) + " over " + std::to_string(rc.checked) + " params, MTL " +
             num(rm.max_relative_error);
  return o;
}

// 7. Learning sanity on generated data.
Outcome learning_sanity() {
  Outcome o;
  Check check{o};
  const std::vector<learn::ModelKind> kinds{learn::ModelKind::lda, learn::ModelKind::linear_svm,
                                            learn::ModelKind::rbf_svm, learn::ModelKind::mtl, learn::ModelKind::cnn};
  synth::GenSpec sep;
  sep.dims = 10;
  sep.class_separation = 10.0;
  sep.noise_std = 0.1;
  const auto easy = synth::gen_quadrant_data(sep).features;
  const auto null = synth::shuffle_labels(easy, 99);
  std::ostringstream info;
  for (auto k : kinds) {
    learn::ModelSpec spec;
    spec.kind = k;
    const auto a = eval::cross_validate(easy, spec);
    const auto b = eval::cross_validate(null, spec);
    info << learn::model_kind_name(k) << " " << num(std::round(a.mean * 1000) / 1000) << "/"
         << num(std::round(b.mean * 1000) / 1000) << " ";
    check(a.mean >= 0.95, std::string(learn::model_kind_name(k)) + " separable F1 " + num(a.mean));
    check(b.mean >= 0.4 && b.mean <= 0.6, std::string(learn::model_kind_name(k)) + " shuffled F1 " + num(b.mean));
  }
  synth::GenSpec shared;
  shared.dims = 10;
  shared.n_per_task = 30;
  shared.task_correlation = 0.9;
  shared.class_separation = 0.5;
  shared.noise_std = 0.1;
  const auto data = synth::gen_quadrant_data(shared).features;
  learn::ModelSpec mtl, svm;
  mtl.kind = learn::ModelKind::mtl;
  svm.kind = learn::ModelKind::linear_svm;
  const double fm = eval::cross_validate(data, mtl).mean, fs = eval::cross_validate(data, svm).mean;
  check(fm - fs >= 0.05, "MTL " + num(fm) + " vs linear SVM " + num(fs));
  info << "| MTL " << num(std::round(fm * 1000) / 1000) << " vs LSVM " << num(std::round(fs * 1000) / 1000);
  if (o.pass) o.detail = info.str();
  return o;
}

// 8. Decision fusion.
Outcome fusion() {
  Outcome o;
  Check check{o};
  const auto r = eval::west_fuse({{0.9, 0.1}}, {{0.4, 0.6}}, 0.5, 0.5, {0.5, 0.5});
  check(std::abs(r.scores[0].high - 0.325) <= 1e-12 && std::abs(r.scores[0].low - 0.175) <= 1e-12,
        "hand example gave (" + num(r.scores[0].high) + "," + num(r.scores[0].low) + ")");
  check(r.labels[0] == AffectLabel::High, "hand example label");
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int set = 0; set < 100; ++set) {
    const int n = 10 + static_cast<int>(u(rng) * 50);
    std::vector<learn::Posterior> p1, p2;
    std::vector<AffectLabel> truth;
    for (int i = 0; i < n; ++i) {
      const double a = u(rng), b = u(rng);
      p1.push_back({a, 1 - a});
      p2.push_back({b, 1 - b});
      truth.push_back(u(rng) < 0.5 ? AffectLabel::High : AffectLabel::Low);
    }
    const double F1 = 0.05 + 0.95 * u(rng), F2 = 0.05 + 0.95 * u(rng);
    const auto t = eval::tune_fusion(p1, p2, truth, F1, F2);
    const double best = std::max(eval::f1_score(learn::labels_of(p1), truth), eval::f1_score(learn::labels_of(p2), truth));
    check(t.f1 >= best - 1e-12, "set " + std::to_string(set) + ": fused " + num(t.f1) + " < " + num(best));
  }
  return o;
}

// 9. GA against the exhaustive optimum.
Outcome scheduler() {
  Outcome o;
  Check check{o};
  int hits = 0;
  double worst_ratio = 1.0;
  for (int run = 0; run < 100; ++run) {
    std::mt19937_64 rng(9000 + run);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    sched::ScheduleProblem p;
    for (int s = 0; s < 8; ++s) p.scenes.push_back({"s" + std::to_string(s), u(rng), u(rng)});
    for (int a = 0; a < 6; ++a) p.ads.push_back({"a" + std::to_string(a), u(rng), u(rng)});
    p.k = 5;
    const auto exact = sched::brute_force_schedule(p);
    sched::GaConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(run);
    const auto ga = sched::ga_optimize(p, cfg);
    check(sched::feasible(p, ga.schedule) && sched::feasible(p, exact.schedule), "infeasible schedule emitted");
    for (std::size_t g = 1; g < ga.history.size(); ++g)
      check(ga.history[g] >= ga.history[g - 1], "best-ever fitness decreased in run " + std::to_string(run));
    if (ga.fitness == exact.fitness) ++hits;
    worst_ratio = std::min(worst_ratio, ga.fitness / exact.fitness);
  }
  check(hits >= 95, "GA matched the optimum on " + std::to_string(hits) + "/100 runs");
  check(worst_ratio >= 0.98, "worst GA/optimum ratio " + num(worst_ratio));
  if (o.pass) o.detail = std::to_string(hits) + "/100 optimal, worst ratio " + num(worst_ratio);
  return o;
}

// 10. CLI determinism: two full pipelines in separate directories.
Outcome determinism() {
  Outcome o;
  Check check{o};
  const fs::path root = fs::temp_directory_path() / "adaffect_acceptance_determinism";
  fs::remove_all(root);
  const std::string cli = ADAFFECT_CLI_PATH;
  const std::vector<std::string> steps{
      "synth quadrant --seed 7 --out quad.csv",
      "synth quadrant --seed 8 --separation 3 --out quad_b.csv",
      "synth ratings --seed 7 --raters 5 --items 20 --level 0.7 --out ratings.csv",
      "synth eeg --seed 7 --epochs 6 --seconds 32 --out eeg",
      "synth media --kind tone --out tone.wav",
      "synth media --kind cut --out frames",
      "synth schedule --seed 7 --out-scenes scenes.json --out-ads ads.json",
      "agreement --ratings ratings.csv --method alpha-ordinal --out agreement.csv",
      "extract-av --audio tone.wav --out audio.csv --spectrogram spec.csv",
      "extract-av --frames frames --out video.csv",
      "preprocess-eeg --in eeg --window first30 --out eeg_features.csv",
      "train --features quad.csv --model rbf_svm --seed 3 --out model.json",
      "evaluate --features quad.csv --model mtl --reps 2 --out cv.csv",
      "score-ads --model model.json --features quad.csv --out scores.csv --posteriors post_a.csv",
      "train --features quad_b.csv --model lda --out model_b.json",
      "score-ads --model model_b.json --features quad.csv --out scores_b.csv --posteriors post_b.csv",
      "fuse --p1 post_a.csv --p2 post_b.csv --tune1 post_a.csv --tune2 post_b.csv --labels quad.csv --out fused.csv",
      "schedule --scenes scenes.json --ads ads.json --k 5 --method ga --out ga.csv",
      "schedule --scenes scenes.json --ads ads.json --k 5 --method exact --out exact.csv",
  };
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    for (const auto& s : steps) {
      const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + s + " > /dev/null 2>> log.txt";
      check(std::system(cmd.c_str()) == 0, "command failed: " + s);
    }
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "log.txt") continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    const auto other = root / "b" / rel;
    check(fs::exists(other) && io::read_file(entry.path()) == io::read_file(other), "differs: " + rel.string());
    ++compared;
  }
  check(compared >= 2 * steps.size(), "too few outputs compared (" + std::to_string(compared) + ")");
  if (o.pass) o.detail = std::to_string(compared) + " files byte-identical";
  return o;
}

// 11. Wilcoxon and Benjamini-Hochberg examples.
Outcome stat_tests() {
  Outcome o;
  Check check{o};
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  const auto w = stats::wilcoxon_rank_sum(x, y, stats::WilcoxonMode::exact);
  check(std::abs(w.p_value - 0.1) <= 1e-12, "Wilcoxon p " + num(w.p_value));
  check(std::abs(oracle::wilcoxon_exact(x, y) - 0.1) <= 1e-12, "enumeration oracle disagrees");
  const std::vector<double> p{0.01, 0.02, 0.04, 0.8};
  const auto rej = stats::bh_fdr(p, 0.05);
  check(rej == std::vector<bool>{true, true, false, false}, "BH rejections differ");
  o.detail = "p=" + num(w.p_value);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_s;  // 0 = unbounded
  };
  const std::vector<Criterion> criteria{
      {"agreement statistics match brute-force oracles", agreement_oracles, 5},
      {"spectrogram bins, frame count and Parseval", spectrogram, 1},
      {"EEG window vector lengths", eeg_shapes, 0},
      {"PCA variance, orthonormality, Gram/covariance agreement", pca, 0},
      {"MTL solver monotonicity, prox, coupling, least squares", mtl_solver, 0},
      {"CNN and MTL gradient checks", grad_checks, 30},
      {"learning sanity on generated quadrant data", learning_sanity, 300},
      {"W_est fusion example and grid dominance", fusion, 0},
      {"GA matches exhaustive scheduler", scheduler, 60},
      {"CLI outputs byte-identical across reruns", determinism, 0},
      {"Wilcoxon exact p and BH rejections", stat_tests, 0},
  };
  int failed = 0, id = 0;
  for (const auto& [name, fn, budget] : criteria) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.pass && budget > 0 && sec > budget) r = {false, "over the " + num(budget) + " s budget"};
    failed += r.pass ? 0 : 1;
    std::printf("%s %2d  %-56s %7.2fs  %s\n", r.pass ? "PASS" : "FAIL", id, name, sec, r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", id - failed, id);
  return failed ? 1 : 0;
}
