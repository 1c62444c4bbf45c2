#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/core/error.hpp"
#include "adaffect/core/types.hpp"
#include "adaffect/eeg/epoch.hpp"
#include "adaffect/media/audio.hpp"
#include "adaffect/media/video.hpp"

namespace adaffect::synth {

struct GenSpec {
  std::uint64_t seed{42};
  int n_per_task{30};
  int dims{10};
  double class_separation{2.0};
  double task_correlation{0.9};
  double noise_std{0.1};
  /// Spread of the cluster within each class, orthogonal to the task weight.
  double spread{1.0};
  /// Norm of the per-task cluster centre.
  double center_scale{1.0};

  void validate() const {
    if (n_per_task < 1 || dims < 1) throw Error(Errc::invalid_argument, "n_per_task and dims must be >= 1");
    if (class_separation < 0.0 || noise_std < 0.0 || spread < 0.0 || center_scale < 0.0)
      throw Error(Errc::invalid_argument, "separation, noise, spread and centre scale must be >= 0");
    if (task_correlation < 0.0 || task_correlation > 1.0)
      throw Error(Errc::invalid_argument, "task_correlation must lie in [0,1]");
  }
};

struct QuadrantData {
  FeatureMatrix features;
  /// Features before the additive noise.
  Eigen::MatrixXd noiseless;
  /// dims x 4 unit task weights, column = quadrant index.
  Eigen::MatrixXd weights;
  /// dims x 4 cluster centres, each orthogonal to its task weight.
  Eigen::MatrixXd centers;
};

namespace detail {

inline Eigen::VectorXd gaussian_vector(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = n(rng);
  return v;
}

inline Eigen::VectorXd unit_vector(Eigen::Index d, std::mt19937_64& rng) {
  for (;;) {
    Eigen::VectorXd v = gaussian_vector(d, rng);
    if (v.norm() > 1e-12) return v.normalized();
  }
}

/// Balanced +1/-1 labels in random order.
inline std::vector<double> balanced_signs(int n, std::mt19937_64& rng) {
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1.0 : -1.0;
  std::shuffle(y.begin(), y.end(), rng);
  return y;
}

}  // namespace detail

/// Four quadrant tasks. Task t has unit weight
///   w_t ∝ rho u_0 + sqrt(1 - rho^2) (u_arousal(t) + u_valence(t)) / sqrt(2)
/// where u_0 is shared by all tasks and the level directions are shared by
/// related quadrants. An item is x0 = mu_t + spread (z - (z.w_t) w_t) + y (sep/2) w_t
/// with y = ±1 balanced, and the emitted row is x0 + noise_std * eps. The
/// label is y, which equals the sign of the noiseless projection w_t.(x0 - mu_t).
inline QuadrantData gen_quadrant_data(const GenSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const Eigen::Index d = spec.dims;
  const double rho = spec.task_correlation, rest = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const Eigen::VectorXd u0 = detail::unit_vector(d, rng);
  // Level directions: arousal High/Low, valence High/Low.
  const Eigen::VectorXd ua_hi = detail::unit_vector(d, rng), ua_lo = detail::unit_vector(d, rng);
  const Eigen::VectorXd uv_hi = detail::unit_vector(d, rng), uv_lo = detail::unit_vector(d, rng);

  QuadrantData out;
  out.weights.resize(d, 4);
  out.centers.resize(d, 4);
  for (const auto q : kAllQuadrants) {
    const auto& ua = q.arousal == AffectLabel::High ? ua_hi : ua_lo;
    const auto& uv = q.valence == AffectLabel::High ? uv_hi : uv_lo;
    Eigen::VectorXd w = rho * u0 + rest * (ua + uv) / std::numbers::sqrt2;
    if (w.norm() < 1e-12) w = u0;
    w.normalize();
    Eigen::VectorXd mu = detail::gaussian_vector(d, rng);
    mu -= mu.dot(w) * w;
    if (mu.norm() > 1e-12) mu *= spec.center_scale / mu.norm();
    out.weights.col(q.index()) = w;
    out.centers.col(q.index()) = mu;
  }

  const Eigen::Index n = 4 * static_cast<Eigen::Index>(spec.n_per_task);
  out.noiseless.resize(n, d);
  out.features.rows.resize(n, d);
  std::normal_distribution<double> eps(0.0, 1.0);
  Eigen::Index row = 0;
  for (const auto q : kAllQuadrants) {
    const Eigen::VectorXd w = out.weights.col(q.index()), mu = out.centers.col(q.index());
    const auto y = detail::balanced_signs(spec.n_per_task, rng);
    for (int i = 0; i < spec.n_per_task; ++i, ++row) {
      const Eigen::VectorXd z = detail::gaussian_vector(d, rng);
      const double yi = y[static_cast<std::size_t>(i)];
      const Eigen::VectorXd x0 = mu + spec.spread * (z - z.dot(w) * w) + yi * (spec.class_separation / 2.0) * w;
      out.noiseless.row(row) = x0.transpose();
      Eigen::VectorXd x = x0;
      if (spec.noise_std > 0.0)
        for (Eigen::Index k = 0; k < d; ++k) x(k) += spec.noise_std * eps(rng);
      out.features.rows.row(row) = x.transpose();
      out.features.labels.push_back(yi > 0 ? AffectLabel::High : AffectLabel::Low);
      out.features.tasks.push_back(q);
      out.features.item_ids.push_back("q" + q.code() + "_" + std::to_string(i));
    }
  }
  return out;
}

/// Same items with labels permuted at random (a permutation null).
inline FeatureMatrix shuffle_labels(FeatureMatrix fm, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(fm.labels.begin(), fm.labels.end(), rng);
  return fm;
}

// EEG.

struct EegGenSpec {
  std::uint64_t seed{42};
  /// Epochs per class.
  int epochs_per_class{20};
  double seconds{40.0};
  double baseline_s{1.0};
  double band_low_hz{8.0};
  double band_high_hz{12.0};
  /// Ratio of sinusoid power to noise power in positive epochs.
  double snr{10.0};
  /// Per-channel DC offset range in microvolts.
  double dc_offset{50.0};
};

namespace detail {

/// White noise through three cascaded one-pole lowpass stages, rescaled to
/// unit variance. The result has a falling, roughly 1/f-like spectrum.
inline std::vector<double> pinkish_noise(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  for (double a : {0.5, 0.8, 0.95}) {
    double s = 0.0;
    for (auto& v : x) v = s = a * s + (1.0 - a) * v;
  }
  double mean = 0.0, var = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (auto& v : x) v = sd > 0 ? (v - mean) / sd : 0.0;
  return x;
}

}  // namespace detail

/// Positive epochs carry a sinusoid in the class band on every channel on
/// top of the noise; negatives are noise only. Epochs alternate High/Low and
/// cycle through the quadrants; each carries a baseline segment.
inline std::vector<eeg::EegEpoch> gen_synthetic_eeg(const EegGenSpec& spec) {
  if (!(spec.band_low_hz > 0.1 && spec.band_high_hz < 45.0 && spec.band_low_hz < spec.band_high_hz))
    throw Error(Errc::invalid_band, "class band must lie within (0.1, 45) Hz with low < high");
  if (spec.epochs_per_class < 1 || !(spec.seconds > 0.0) || spec.baseline_s < 0.0 || spec.snr < 0.0)
    throw Error(Errc::invalid_argument, "invalid EEG generator parameters");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto T = static_cast<std::size_t>(std::llround(spec.seconds * eeg::kSampleRate));
  const auto B = static_cast<std::size_t>(std::llround(spec.baseline_s * eeg::kSampleRate));
  const double amp = std::sqrt(2.0 * spec.snr);  // sinusoid power amp^2/2 over unit noise power

  std::vector<eeg::EegEpoch> out;
  for (int i = 0; i < 2 * spec.epochs_per_class; ++i) {
    const bool positive = i % 2 == 0;
    eeg::EegEpoch e;
    e.stimulus_id = "syn_" + std::to_string(i);
    e.label = positive ? AffectLabel::High : AffectLabel::Low;
    e.quadrant = kAllQuadrants[static_cast<std::size_t>((i / 2) % 4)];
    e.data.resize(eeg::kChannels, static_cast<Eigen::Index>(T));
    Eigen::MatrixXd base(eeg::kChannels, static_cast<Eigen::Index>(B));
    const double f = spec.band_low_hz + (spec.band_high_hz - spec.band_low_hz) * unif(rng);
    for (int c = 0; c < eeg::kChannels; ++c) {
      const double dc = spec.dc_offset * (2.0 * unif(rng) - 1.0);
      const double phase = 2.0 * std::numbers::pi * unif(rng);
      const auto noise = detail::pinkish_noise(B + T, rng);
      for (std::size_t t = 0; t < B + T; ++t) {
        double v = dc + noise[t];
        if (positive && t >= B) {
          const double time = static_cast<double>(t - B) / eeg::kSampleRate;
          v += amp * std::sin(2.0 * std::numbers::pi * f * time + phase);
        }
        if (t < B) base(c, static_cast<Eigen::Index>(t)) = v;
        else e.data(c, static_cast<Eigen::Index>(t - B)) = v;
      }
    }
    if (B > 0) e.baseline = std::move(base);
    out.push_back(std::move(e));
  }
  return out;
}

// Ratings.

/// Each item gets a latent score uniform on the scale; rater r reports
/// round(latent + (1 - level)(u_r,i - latent)) with u_r,i an independent
/// uniform draw, so level 1 gives identical raters and level 0 independent
/// ones.
inline RatingMatrix gen_rating_matrix(int raters, int items, double level, std::uint64_t seed,
                                      Attribute attribute = Attribute::valence) {
  if (raters < 2) throw Error(Errc::invalid_argument, "need at least two raters");
  if (items < 1) throw Error(Errc::invalid_argument, "need at least one item");
  if (!(level >= 0.0 && level <= 1.0)) throw Error(Errc::invalid_argument, "agreement level must lie in [0,1]");
  const auto [lo, hi] = default_scale(attribute);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  RatingMatrix m;
  m.attribute = attribute;
  m.scale_min = lo;
  m.scale_max = hi;
  m.values.resize(raters, items);
  for (int i = 0; i < items; ++i) {
    const double latent = u(rng);
    for (int r = 0; r < raters; ++r) {
      const double noise = u(rng);
      m.values(r, i) = std::clamp(std::round(latent + (1.0 - level) * (noise - latent)), lo, hi);
    }
  }
  for (int r = 0; r < raters; ++r) m.rater_ids.push_back("r" + std::to_string(r));
  for (int i = 0; i < items; ++i) m.item_ids.push_back("ad" + std::to_string(i));
  return m;
}

// Test media.

inline media::AudioClip gen_tone(double freq_hz, double rate = 16000.0, double seconds = 10.0, double amplitude = 0.5) {
  media::AudioClip c;
  c.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    c.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate);
  return c;
}

/// Linear chirp from f0 to f1.
inline media::AudioClip gen_sweep(double f0, double f1, double rate = 16000.0, double seconds = 10.0,
                                  double amplitude = 0.5) {
  media::AudioClip c;
  c.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  c.samples.resize(n);
  const double k = (f1 - f0) / seconds;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    c.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * (f0 * t + 0.5 * k * t * t));
  }
  return c;
}

namespace detail {

/// Horizontal ramp of the given colour, spanning [0.8, 1.0] of it.
inline media::Frame ramp_frame(int w, int h, double r, double g, double b) {
  media::Frame f{w, h, std::vector<double>(static_cast<std::size_t>(3 * w * h))};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double s = 0.8 + 0.2 * static_cast<double>(x) / std::max(1, w - 1);
      const auto p = static_cast<std::size_t>(3 * (y * w + x));
      f.rgb[p] = r * s;
      f.rgb[p + 1] = g * s;
      f.rgb[p + 2] = b * s;
    }
  return f;
}

}  // namespace detail

/// `frames` frames with a hard cut at `cut_at`: a dark red ramp before, a
/// bright cyan ramp after, so the two halves share no luma bin.
inline media::FrameSequence gen_cut_sequence(int frames = 100, int cut_at = 50, double fps = 25.0, int width = 32,
                                             int height = 24) {
  if (frames < 1 || cut_at < 0 || cut_at > frames || width < 1 || height < 1 || !(fps > 0.0))
    throw Error(Errc::invalid_argument, "invalid cut sequence parameters");
  media::FrameSequence s;
  s.frame_rate = fps;
  const auto a = detail::ramp_frame(width, height, 0.5, 0.05, 0.05);
  const auto b = detail::ramp_frame(width, height, 0.3, 1.0, 1.0);
  for (int i = 0; i < frames; ++i) s.frames.push_back(i < cut_at ? a : b);
  return s;
}

inline media::FrameSequence gen_static_sequence(int frames = 100, double fps = 25.0, int width = 32, int height = 24) {
  return gen_cut_sequence(frames, frames, fps, width, height);
}

}  // namespace adaffect::synth
