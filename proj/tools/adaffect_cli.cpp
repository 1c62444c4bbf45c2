// adaffect: command-line front end for the affect pipeline.
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adaffect/adaffect.hpp"

using namespace adaffect;
namespace fs = std::filesystem;

namespace {

struct Run {
  CLI::App* sub{nullptr};
  std::function<void()> body;
  /// Output path that receives the `.meta.json` sidecar.
  std::string out;
  std::uint64_t seed{kDefaultSeed};
  nlohmann::json result = nlohmann::json::object();
};

Run* g_run = nullptr;

void write(const std::string& path, const std::string& content) { io::write_file_atomic(path, content); }

/// Records every option of the invoked subcommand (given or defaulted).
nlohmann::json option_dump(const CLI::App* app) {
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    const auto& res = opt->results();
    if (!res.empty()) j[name] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
    else if (!opt->get_default_str().empty()) j[name] = opt->get_default_str();
    else if (opt->get_expected_min() == 0) j[name] = "false";
  }
  return j;
}

void write_meta(const Run& run) {
  std::string name;
  for (const CLI::App* a = run.sub; a && a->get_parent(); a = a->get_parent())
    name = a->get_name() + (name.empty() ? "" : " " + name);
  nlohmann::json meta = {{"tool", "adaffect"},
                         {"version", kVersion},
                         {"subcommand", name},
                         {"seed", run.seed},
                         {"options", option_dump(run.sub)}};
  if (!run.result.empty()) meta["result"] = run.result;
  std::string path = run.out;
  while (!path.empty() && path.back() == '/') path.pop_back();
  write(path + ".meta.json", meta.dump(2) + "\n");
}

CLI::App* command(CLI::App& parent, const std::string& name, const std::string& desc, Run& run,
                  std::function<void()> body) {
  CLI::App* sub = parent.add_subcommand(name, desc);
  sub->add_option("--seed", run.seed, "random seed")->capture_default_str();
  sub->callback([sub, &run, body = std::move(body)] {
    run.sub = sub;
    run.body = body;
    g_run = &run;
  });
  return sub;
}

void model_options(CLI::App* sub, learn::ModelSpec& spec, std::string& kind, bool& grid) {
  sub->add_option("--model", kind, "lda | linear_svm | rbf_svm | mtl | cnn")->required();
  sub->add_option("--C", spec.shallow.C, "SVM cost (without grid search)")->capture_default_str();
  sub->add_option("--gamma", spec.shallow.gamma, "RBF width; 0 means 1/dims")->capture_default_str();
  sub->add_option("--shrinkage", spec.shallow.shrinkage, "LDA covariance shrinkage")->capture_default_str();
  sub->add_option("--mtl-alpha", spec.mtl.alpha, "task-graph coupling")->capture_default_str();
  sub->add_option("--mtl-beta", spec.mtl.beta, "L1 weight")->capture_default_str();
  sub->add_option("--mtl-gamma", spec.mtl.gamma, "ridge weight")->capture_default_str();
  sub->add_option("--lr", spec.cnn.learning_rate, "CNN learning rate")->capture_default_str();
  sub->add_option("--epochs", spec.cnn.max_epochs, "CNN epoch limit")->capture_default_str();
  sub->add_option("--dropout", spec.cnn.dropout, "CNN dropout rate")->capture_default_str();
  sub->add_flag("--grid-search,!--no-grid-search", grid, "inner-CV search over the SVM grid")->capture_default_str();
}

learn::ModelSpec finish_spec(learn::ModelSpec spec, const std::string& kind, bool grid) {
  spec.kind = learn::parse_model_kind(kind);
  spec.grid_search = grid;
  return spec;
}

struct PosteriorTable {
  std::vector<std::string> ids;
  std::vector<learn::Posterior> p;
};

std::string posterior_csv(const std::vector<std::string>& ids, const std::vector<learn::Posterior>& p) {
  std::string out = "item_id,p_high\n";
  for (std::size_t i = 0; i < p.size(); ++i) out += ids[i] + ',' + io::fmt(p[i].high) + '\n';
  return out;
}

PosteriorTable load_posteriors(const std::string& path) {
  PosteriorTable t;
  bool header = true;
  io::for_each_line(io::read_file(path), [&](std::string_view line, std::size_t no) {
    const auto f = io::split(line);
    if (header) {
      header = false;
      if (f.size() >= 2 && f[0] == "item_id") return;
    }
    if (f.size() < 2) throw Error(Errc::parse, path + ":" + std::to_string(no) + ": expected item_id,p_high");
    const double p = io::parse_double(f[1], no, "p_high");
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::parse, path + ":" + std::to_string(no) + ": p_high outside [0,1]");
    t.ids.emplace_back(f[0]);
    t.p.push_back({p, 1.0 - p});
  });
  return t;
}

void require_same_items(const PosteriorTable& a, const PosteriorTable& b, const std::string& what) {
  if (a.ids != b.ids) throw Error(Errc::misaligned_items, what + ": posterior files list different items");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affective ad analysis pipeline: ratings agreement, audio-visual and EEG features, classifiers, "
               "fusion and ad scheduling."};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file supplying option values", false);
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // synth ------------------------------------------------------------------
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic inputs");
  synth_cmd->require_subcommand(1);

  Run r_quad;
  synth::GenSpec gq;
  bool shuffle = false;
  auto* quad = command(*synth_cmd, "quadrant", "quadrant-structured feature CSV", r_quad, [&] {
    gq.seed = r_quad.seed;
    auto fm = synth::gen_quadrant_data(gq).features;
    if (shuffle) fm = synth::shuffle_labels(fm, derive_seed(r_quad.seed, {1}));
    write(r_quad.out, feature_csv(fm));
  });
  quad->add_option("--n-per-task", gq.n_per_task)->capture_default_str();
  quad->add_option("--dims", gq.dims)->capture_default_str();
  quad->add_option("--separation", gq.class_separation)->capture_default_str();
  quad->add_option("--correlation", gq.task_correlation)->capture_default_str();
  quad->add_option("--noise", gq.noise_std)->capture_default_str();
  quad->add_option("--spread", gq.spread)->capture_default_str();
  quad->add_flag("--shuffle", shuffle, "permute labels (null data)");
  quad->add_option("--out", r_quad.out)->required();

  Run r_eeg;
  synth::EegGenSpec ge;
  auto* seeg = command(*synth_cmd, "eeg", "synthetic 14-channel EEG epochs", r_eeg, [&] {
    ge.seed = r_eeg.seed;
    fs::create_directories(r_eeg.out);
    for (const auto& e : synth::gen_synthetic_eeg(ge)) eeg::save_epoch(e, fs::path(r_eeg.out) / e.stimulus_id);
  });
  seeg->add_option("--epochs", ge.epochs_per_class, "epochs per class")->capture_default_str();
  seeg->add_option("--seconds", ge.seconds)->capture_default_str();
  seeg->add_option("--baseline", ge.baseline_s, "baseline seconds")->capture_default_str();
  seeg->add_option("--band-low", ge.band_low_hz)->capture_default_str();
  seeg->add_option("--band-high", ge.band_high_hz)->capture_default_str();
  seeg->add_option("--snr", ge.snr)->capture_default_str();
  seeg->add_option("--out", r_eeg.out, "output directory")->required();

  Run r_rat;
  int raters = 5, items = 20;
  double level = 0.7;
  auto* srat = command(*synth_cmd, "ratings", "ratings CSV for both attributes", r_rat, [&] {
    const auto v = synth::gen_rating_matrix(raters, items, level, derive_seed(r_rat.seed, {0}), Attribute::valence);
    const auto a = synth::gen_rating_matrix(raters, items, level, derive_seed(r_rat.seed, {1}), Attribute::arousal);
    write(r_rat.out, ratings_csv({&v, &a}));
  });
  srat->add_option("--raters", raters)->capture_default_str();
  srat->add_option("--items", items)->capture_default_str();
  srat->add_option("--level", level, "agreement level in [0,1]")->capture_default_str();
  srat->add_option("--out", r_rat.out)->required();

  Run r_med;
  std::string media_kind;
  double freq = 1000, f0 = 100, f1 = 4000, rate = 16000, seconds = 10, fps = 25;
  int frames = 100, cut_at = 50;
  auto* smed = command(*synth_cmd, "media", "test tone, sweep (WAV) or frame sequence (PPM directory)", r_med, [&] {
    if (media_kind == "tone") write(r_med.out, media::wav_bytes(synth::gen_tone(freq, rate, seconds)));
    else if (media_kind == "sweep") write(r_med.out, media::wav_bytes(synth::gen_sweep(f0, f1, rate, seconds)));
    else if (media_kind == "cut") media::save_frame_dir(synth::gen_cut_sequence(frames, cut_at, fps), r_med.out);
    else media::save_frame_dir(synth::gen_static_sequence(frames, fps), r_med.out);
  });
  smed->add_option("--kind", media_kind)->required()->check(CLI::IsMember({"tone", "sweep", "cut", "static"}));
  smed->add_option("--freq", freq)->capture_default_str();
  smed->add_option("--f0", f0)->capture_default_str();
  smed->add_option("--f1", f1)->capture_default_str();
  smed->add_option("--rate", rate)->capture_default_str();
  smed->add_option("--seconds", seconds)->capture_default_str();
  smed->add_option("--frames", frames)->capture_default_str();
  smed->add_option("--cut-at", cut_at)->capture_default_str();
  smed->add_option("--fps", fps)->capture_default_str();
  smed->add_option("--out", r_med.out)->required();

  Run r_ssch;
  int n_scenes = 8, n_ads = 6;
  std::string out_ads;
  auto* ssch = command(*synth_cmd, "schedule", "random scene and ad score lists", r_ssch, [&] {
    std::mt19937_64 rng(r_ssch.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<sched::ScoredItem> sc, ad;
    for (int i = 0; i < n_scenes; ++i) sc.push_back({"scene" + std::to_string(i), u(rng), u(rng)});
    for (int i = 0; i < n_ads; ++i) ad.push_back({"ad" + std::to_string(i), u(rng), u(rng)});
    write(r_ssch.out, sched::scored_items_json(sc));
    write(out_ads, sched::scored_items_json(ad));
  });
  ssch->add_option("--scenes", n_scenes)->capture_default_str();
  ssch->add_option("--ads", n_ads)->capture_default_str();
  ssch->add_option("--out-scenes", r_ssch.out)->required();
  ssch->add_option("--out-ads", out_ads)->required();

  // agreement --------------------------------------------------------------
  Run r_agr;
  std::string ratings_path, agr_method = "all", agr_attr = "both", reference = "per-rater";
  auto* agr = command(app, "agreement", "inter-rater agreement statistics", r_agr, [&] {
    const auto pair = load_ratings_csv(ratings_path);
    const auto ref = reference == "group" ? BinarizeReference::group_mean : BinarizeReference::per_rater_mean;
    std::string out = "method,attribute,value\n";
    for (const auto* m : {&pair.valence, &pair.arousal}) {
      const std::string an(attribute_name(m->attribute));
      if (agr_attr != "both" && agr_attr != an) continue;
      if (m->raters() == 0) continue;
      auto emit = [&](const std::string& method, double v) { out += method + ',' + an + ',' + io::fmt(v) + '\n'; };
      if (agr_method == "all" || agr_method == "alpha-ordinal")
        emit("alpha-ordinal", stats::krippendorff_alpha(*m, stats::AlphaMetric::ordinal).statistic);
      if (agr_method == "all" || agr_method == "alpha-interval")
        emit("alpha-interval", stats::krippendorff_alpha(*m, stats::AlphaMetric::interval).statistic);
      if (agr_method == "all" || agr_method == "fleiss")
        emit("fleiss", stats::fleiss_kappa(stats::label_tallies(binarize_ratings(*m, ref), true)).statistic);
      if (agr_method == "cohen" || (agr_method == "all" && m->raters() == 2)) {
        if (m->raters() != 2) throw Error(Errc::invalid_argument, "cohen needs exactly two raters");
        const auto grid = binarize_ratings(*m, ref);
        std::vector<AffectLabel> a, b;
        for (std::size_t i = 0; i < grid[0].size(); ++i)
          if (grid[0][i] && grid[1][i]) a.push_back(*grid[0][i]), b.push_back(*grid[1][i]);
        emit("cohen", stats::cohen_kappa(a, b).statistic);
      }
    }
    write(r_agr.out, out);
  });
  agr->add_option("--ratings", ratings_path, "rater_id,item_id,attribute,score CSV")->required()->check(CLI::ExistingFile);
  agr->add_option("--method", agr_method)
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "alpha-ordinal", "alpha-interval", "fleiss", "cohen"}));
  agr->add_option("--attribute", agr_attr)->capture_default_str()->check(CLI::IsMember({"both", "valence", "arousal"}));
  agr->add_option("--reference", reference, "binarization threshold for kappas")
      ->capture_default_str()
      ->check(CLI::IsMember({"per-rater", "group"}));
  agr->add_option("--out", r_agr.out)->required();

  // extract-av -------------------------------------------------------------
  Run r_av;
  std::string audio_path, frames_path, av_window = "all", spec_path;
  int smoothing = 0;
  auto* av = command(app, "extract-av", "per-second audio or video descriptors", r_av, [&] {
    if (audio_path.empty() == frames_path.empty())
      throw Error(Errc::invalid_argument, "give exactly one of --audio or --frames");
    const auto w = parse_window(av_window);
    media::DescriptorSeries s;
    if (!audio_path.empty()) {
      const auto clip = media::load_wav(audio_path);
      media::AudioDescriptorOptions opt;
      opt.smoothing_taps = smoothing;
      s = media::hanjalic_audio(clip, opt);
      if (!spec_path.empty()) write(spec_path, media::spectrogram_csv(media::stft_spectrogram(media::to_mono(clip))));
    } else {
      media::VideoDescriptorOptions opt;
      opt.smoothing_taps = smoothing;
      s = media::hanjalic_video(media::load_frame_dir(frames_path), opt);
    }
    write(r_av.out, media::descriptor_csv(media::temporal_window(s, w)));
  });
  av->add_option("--audio", audio_path)->check(CLI::ExistingFile);
  av->add_option("--frames", frames_path, "directory of frame_NNNNNN.ppm")->check(CLI::ExistingDirectory);
  av->add_option("--window", av_window, "all | first30 | last30 | last10")->capture_default_str();
  av->add_option("--smoothing", smoothing, "Kaiser smoothing taps (0 = off)")->capture_default_str();
  av->add_option("--spectrogram", spec_path, "also write the 40/20 ms spectrogram CSV");
  av->add_option("--out", r_av.out)->required();

  // preprocess-eeg ---------------------------------------------------------
  Run r_pre;
  std::string eeg_dir, eeg_window = "all";
  double retain = 0.9;
  eeg::BandpassOptions band;
  auto* pre = command(app, "preprocess-eeg", "filter, baseline-correct, window, vectorize and PCA-reduce epochs",
                      r_pre, [&] {
    const auto epochs = eeg::load_epoch_dir(eeg_dir);
    const auto w = parse_window(eeg_window);
    std::vector<Eigen::VectorXd> vecs;
    FeatureMatrix fm;
    for (const auto& e : epochs) {
      if (!e.clean) continue;
      if (!e.label || !e.quadrant)
        throw Error(Errc::invalid_argument, "epoch '" + e.stimulus_id + "' lacks label/quadrant metadata");
      const auto corrected = eeg::baseline_correct(eeg::bandpass_filter(e, band));
      vecs.push_back(eeg::vectorize(corrected, w));
      if (vecs.back().size() != vecs.front().size())
        throw Error(Errc::dimension_mismatch, "epoch '" + e.stimulus_id + "' yields a different vector length");
      fm.labels.push_back(*e.label);
      fm.tasks.push_back(*e.quadrant);
      fm.item_ids.push_back(e.stimulus_id);
    }
    if (vecs.empty()) throw Error(Errc::empty_input, "no clean epochs in " + eeg_dir);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(vecs.size()), vecs.front().size());
    for (std::size_t i = 0; i < vecs.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = vecs[i].transpose();
    if (retain > 0.0) {
      const auto pca = eeg::pca_fit(X, retain);
      fm.rows = eeg::pca_apply(pca, X);
      r_pre.result = {{"components", pca.k()}, {"retained_fraction", pca.retained_fraction}};
    } else {
      fm.rows = X;
    }
    r_pre.result["epochs_total"] = epochs.size();
    r_pre.result["epochs_clean"] = vecs.size();
    write(r_pre.out, feature_csv(fm));
  });
  pre->add_option("--in", eeg_dir, "directory of epoch .bin/.json pairs")->required()->check(CLI::ExistingDirectory);
  pre->add_option("--window", eeg_window)->capture_default_str();
  pre->add_option("--pca", retain, "variance fraction to retain; 0 disables PCA")->capture_default_str();
  pre->add_option("--low", band.low_hz)->capture_default_str();
  pre->add_option("--high", band.high_hz)->capture_default_str();
  pre->add_option("--out", r_pre.out)->required();

  // train ------------------------------------------------------------------
  Run r_train;
  learn::ModelSpec train_spec;
  std::string train_kind, train_features;
  bool train_grid = false;
  auto* train = command(app, "train", "fit a classifier on a feature CSV", r_train, [&] {
    const auto spec = finish_spec(train_spec, train_kind, train_grid);
    const auto fm = load_feature_csv(train_features);
    const auto model = train_grid ? eval::fit_selected(spec, fm, r_train.seed) : learn::fit_model(spec, fm, r_train.seed);
    write(r_train.out, learn::model_to_json(model).dump(1) + "\n");
  });
  model_options(train, train_spec, train_kind, train_grid);
  train->add_option("--features", train_features)->required()->check(CLI::ExistingFile);
  train->add_option("--out", r_train.out)->required();

  // evaluate ---------------------------------------------------------------
  Run r_eval;
  learn::ModelSpec eval_spec;
  std::string eval_kind, eval_features, eval_features2, eval_kind2, setting, fusion_grid = "joint";
  bool eval_grid = true, research = false;
  eval::CvOptions cvo;
  auto* evaluate = command(app, "evaluate", "repeated stratified cross-validation (optionally fused)", r_eval, [&] {
    const auto spec = finish_spec(eval_spec, eval_kind, eval_grid);
    cvo.seed = r_eval.seed;
    cvo.setting = setting;
    const auto fm = load_feature_csv(eval_features);
    if (eval_features2.empty()) {
      const auto rep = eval::cross_validate(fm, spec, cvo);
      r_eval.result = {{"mean", rep.mean}, {"std", rep.std}};
      write(r_eval.out, rep.csv());
      return;
    }
    auto spec2 = spec;
    if (!eval_kind2.empty()) spec2.kind = learn::parse_model_kind(eval_kind2);
    eval::FusedCvOptions fo;
    fo.cv = cvo;
    fo.fusion.grid = eval::parse_fusion_grid(fusion_grid);
    fo.research_mode = research;
    const auto rep = eval::cross_validate_fused(fm, spec, load_feature_csv(eval_features2), spec2, fo);
    r_eval.result = {{"mean_a", rep.modality1.mean}, {"mean_b", rep.modality2.mean}, {"mean_fused", rep.fused.mean}};
    write(r_eval.out, rep.modality1.csv() + rep.modality2.csv() + rep.fused.csv());
  });
  model_options(evaluate, eval_spec, eval_kind, eval_grid);
  evaluate->add_option("--features", eval_features)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--features2", eval_features2, "second modality for W_est fusion")->check(CLI::ExistingFile);
  evaluate->add_option("--model2", eval_kind2, "model for the second modality (default: --model)");
  evaluate->add_option("--reps", cvo.repetitions)->capture_default_str();
  evaluate->add_option("--folds", cvo.folds)->capture_default_str();
  evaluate->add_option("--setting", setting, "label for the setting column");
  evaluate->add_option("--fusion-grid", fusion_grid)->capture_default_str()->check(CLI::IsMember({"joint", "constrained"}));
  evaluate->add_flag("--research-mode", research, "tune fusion weights on the test fold (leaks labels)");
  evaluate->add_option("--out", r_eval.out)->required();

  // fuse -------------------------------------------------------------------
  Run r_fuse;
  std::string p1_path, p2_path, t1_path, t2_path, labels_path;
  double f1_train1 = -1, f1_train2 = -1, a1 = -1, a2 = -1;
  eval::FusionConfig fcfg;
  std::string fuse_grid = "joint";
  auto* fuse = command(app, "fuse", "W_est decision fusion of two posterior files", r_fuse, [&] {
    const auto p1 = load_posteriors(p1_path), p2 = load_posteriors(p2_path);
    require_same_items(p1, p2, "evaluation set");
    double F1 = f1_train1, F2 = f1_train2;
    eval::FusionWeights w{a1, a2};
    if (a1 < 0 || a2 < 0 || F1 < 0 || F2 < 0) {
      if (t1_path.empty() || t2_path.empty() || labels_path.empty())
        throw Error(Errc::invalid_argument, "without --a1/--a2 and both F1 values, give --tune1, --tune2 and --labels");
      const auto t1 = load_posteriors(t1_path), t2 = load_posteriors(t2_path);
      require_same_items(t1, t2, "tuning set");
      const auto fm = load_feature_csv(labels_path);
      std::map<std::string, AffectLabel> truth_of;
      for (std::size_t i = 0; i < fm.item_ids.size(); ++i) truth_of[fm.item_ids[i]] = fm.labels[i];
      std::vector<AffectLabel> truth;
      for (const auto& id : t1.ids) {
        const auto it = truth_of.find(id);
        if (it == truth_of.end()) throw Error(Errc::misaligned_items, "no label for tuning item '" + id + "'");
        truth.push_back(it->second);
      }
      if (F1 < 0) F1 = eval::f1_score(learn::labels_of(t1.p), truth);
      if (F2 < 0) F2 = eval::f1_score(learn::labels_of(t2.p), truth);
      if (a1 < 0 || a2 < 0) {
        fcfg.grid = eval::parse_fusion_grid(fuse_grid);
        const auto tuned = eval::tune_fusion(t1.p, t2.p, truth, F1, F2, fcfg);
        w = tuned.weights;
        r_fuse.result["tuning_f1"] = tuned.f1;
      }
    }
    const auto fused = eval::west_fuse(p1.p, p2.p, F1, F2, w);
    r_fuse.result["a1"] = w.a1;
    r_fuse.result["a2"] = w.a2;
    r_fuse.result["F1"] = F1;
    r_fuse.result["F2"] = F2;
    std::string out = "item_id,p_high,p_low,label\n";
    for (std::size_t i = 0; i < fused.scores.size(); ++i)
      out += p1.ids[i] + ',' + io::fmt(fused.scores[i].high) + ',' + io::fmt(fused.scores[i].low) + ',' +
             label_char(fused.labels[i]) + '\n';
    write(r_fuse.out, out);
  });
  fuse->add_option("--p1", p1_path, "modality-1 posteriors (item_id,p_high)")->required()->check(CLI::ExistingFile);
  fuse->add_option("--p2", p2_path, "modality-2 posteriors")->required()->check(CLI::ExistingFile);
  fuse->add_option("--tune1", t1_path, "modality-1 posteriors on the tuning set")->check(CLI::ExistingFile);
  fuse->add_option("--tune2", t2_path, "modality-2 posteriors on the tuning set")->check(CLI::ExistingFile);
  fuse->add_option("--labels", labels_path, "feature CSV giving tuning-set labels")->check(CLI::ExistingFile);
  fuse->add_option("--f1-train1", f1_train1, "training F1 of modality 1 (default: tuning-set F1)");
  fuse->add_option("--f1-train2", f1_train2, "training F1 of modality 2");
  fuse->add_option("--a1", a1, "fixed alpha_1 (skips the grid search)");
  fuse->add_option("--a2", a2, "fixed alpha_2");
  fuse->add_option("--step", fcfg.grid_step)->capture_default_str();
  fuse->add_option("--grid", fuse_grid)->capture_default_str()->check(CLI::IsMember({"joint", "constrained"}));
  fuse->add_option("--out", r_fuse.out)->required();

  // score-ads --------------------------------------------------------------
  Run r_score;
  std::string score_model, score_features, post_out;
  auto* score = command(app, "score-ads", "ad-level scores: mean High posterior over each ad's segments", r_score, [&] {
    const auto model = learn::model_from_json(nlohmann::json::parse(io::read_file(score_model)));
    const auto fm = load_feature_csv(score_features);
    const auto post = learn::predict_proba(model, fm);
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> groups;
    for (std::size_t i = 0; i < post.size(); ++i) {
      auto [it, fresh] = groups.try_emplace(fm.item_ids[i]);
      if (fresh) order.push_back(fm.item_ids[i]);
      it->second.push_back(post[i].high);
    }
    std::string out = "item_id,score,segments\n";
    for (const auto& id : order) {
      const auto& g = groups[id];
      out += id + ',' + io::fmt(eval::ad_level_score(g)) + ',' + std::to_string(g.size()) + '\n';
    }
    write(r_score.out, out);
    if (!post_out.empty()) write(post_out, posterior_csv(fm.item_ids, post));
  });
  score->add_option("--model", score_model, "model JSON from `train`")->required()->check(CLI::ExistingFile);
  score->add_option("--features", score_features, "segment rows; rows sharing item_id form one ad")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--posteriors", post_out, "also write per-row posteriors");
  score->add_option("--out", r_score.out)->required();

  // schedule ---------------------------------------------------------------
  Run r_sch;
  std::string scenes_path, ads_path, sch_method = "ga", anchor = "preceding", history_path;
  sched::ScheduleProblem prob;
  prob.k = 5;
  sched::GaConfig ga;
  auto* schedule = command(app, "schedule", "insert k ads at scene transitions", r_sch, [&] {
    prob.scenes = sched::parse_scored_items(io::read_file(scenes_path), scenes_path);
    prob.ads = sched::parse_scored_items(io::read_file(ads_path), ads_path);
    prob.anchor = anchor == "following" ? sched::SceneAnchor::following : sched::SceneAnchor::preceding;
    ga.seed = r_sch.seed;
    const auto res = sch_method == "exact" ? sched::brute_force_schedule(prob) : sched::ga_optimize(prob, ga);
    r_sch.result["fitness"] = res.fitness;
    write(r_sch.out, sched::schedule_csv(prob, res));
    if (!history_path.empty()) {
      std::string h = "generation,best_fitness\n";
      for (std::size_t g = 0; g < res.history.size(); ++g) h += std::to_string(g) + ',' + io::fmt(res.history[g]) + '\n';
      write(history_path, h);
    }
  });
  schedule->add_option("--scenes", scenes_path, "JSON array of {id, asl, val}")->required()->check(CLI::ExistingFile);
  schedule->add_option("--ads", ads_path, "JSON array of {id, asl, val}")->required()->check(CLI::ExistingFile);
  schedule->add_option("--k", prob.k, "insertions")->capture_default_str();
  schedule->add_option("--method", sch_method)->capture_default_str()->check(CLI::IsMember({"ga", "exact"}));
  schedule->add_option("--lambda-v", prob.lambda_v)->capture_default_str();
  schedule->add_option("--lambda-a", prob.lambda_a)->capture_default_str();
  schedule->add_option("--anchor", anchor)->capture_default_str()->check(CLI::IsMember({"preceding", "following"}));
  schedule->add_option("--population", ga.population)->capture_default_str();
  schedule->add_option("--generations", ga.generations)->capture_default_str();
  schedule->add_option("--crossover", ga.crossover)->capture_default_str();
  schedule->add_option("--mutation", ga.mutation)->capture_default_str();
  schedule->add_option("--history", history_path, "write best-ever fitness per generation");
  schedule->add_option("--out", r_sch.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (!g_run) return 2;
  try {
    g_run->body();
    write_meta(*g_run);
  } catch (const Error& e) {
    std::cerr << "adaffect: error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "adaffect: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
