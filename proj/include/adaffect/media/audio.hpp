#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adaffect/core/error.hpp"
#include "adaffect/media/fft.hpp"

namespace adaffect::media {

/// Interleaved PCM samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  double sample_rate{16000.0};
  int channels{1};

  std::size_t frames() const { return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0; }
  double duration_s() const { return static_cast<double>(frames()) / sample_rate; }

  void validate() const {
    if (!(sample_rate > 0.0)) throw Error(Errc::invalid_argument, "sample rate must be positive");
    if (channels < 1 || samples.size() % static_cast<std::size_t>(channels) != 0)
      throw Error(Errc::invalid_argument, "sample count not divisible by channel count");
  }
};

/// Averages interleaved channels into one.
inline AudioClip to_mono(const AudioClip& a) {
  a.validate();
  if (a.channels == 1) return a;
  AudioClip m{std::vector<double>(a.frames()), a.sample_rate, 1};
  const auto c = static_cast<std::size_t>(a.channels);
  for (std::size_t f = 0; f < m.samples.size(); ++f) {
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) s += a.samples[f * c + k];
    m.samples[f] = s / static_cast<double>(c);
  }
  return m;
}

enum class WindowFn { hann, hamming, rectangular };

inline std::vector<double> make_window(WindowFn fn, std::size_t n) {
  std::vector<double> w(n, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = two_pi * static_cast<double>(i) / static_cast<double>(n);
    if (fn == WindowFn::hann) w[i] = 0.5 - 0.5 * std::cos(ph);
    else if (fn == WindowFn::hamming) w[i] = 0.54 - 0.46 * std::cos(ph);
  }
  return w;
}

struct StftOptions {
  double window_ms{40.0};
  double hop_ms{20.0};
  WindowFn window{WindowFn::hann};
};

/// Linear magnitudes, frames x (window/2 + 1) bins.
struct Spectrogram {
  Eigen::MatrixXd magnitudes;
  double window_ms{40.0};
  double hop_ms{20.0};
  double sample_rate{16000.0};
  std::size_t window_samples{0};
  std::size_t hop_samples{0};

  double bin_hz() const { return sample_rate / static_cast<double>(window_samples); }
};

inline std::size_t ms_to_samples(double ms, double rate) {
  return static_cast<std::size_t>(std::llround(ms * rate / 1000.0));
}

inline Spectrogram stft_spectrogram(const AudioClip& clip, const StftOptions& opt = {}) {
  const AudioClip mono = to_mono(clip);
  const std::size_t W = ms_to_samples(opt.window_ms, mono.sample_rate);
  const std::size_t H = ms_to_samples(opt.hop_ms, mono.sample_rate);
  if (W < 2 || H < 1) throw Error(Errc::invalid_argument, "window/hop too small for the sample rate");
  const std::size_t N = mono.samples.size();
  if (N < W) throw Error(Errc::too_short, "clip shorter than one analysis window");
  const std::size_t frames = (N - W) / H + 1;

  Spectrogram sg;
  sg.window_ms = opt.window_ms;
  sg.hop_ms = opt.hop_ms;
  sg.sample_rate = mono.sample_rate;
  sg.window_samples = W;
  sg.hop_samples = H;
  RealFft fft(W);
  sg.magnitudes.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(fft.bins()));
  const auto win = make_window(opt.window, W);
  for (std::size_t f = 0; f < frames; ++f) {
    auto in = fft.input();
    for (std::size_t i = 0; i < W; ++i) in[i] = mono.samples[f * H + i] * win[i];
    fft.execute();
    for (std::size_t k = 0; k < fft.bins(); ++k)
      sg.magnitudes(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = std::abs(fft.bin(k));
  }
  return sg;
}

/// Splits the clip into consecutive full blocks of `block_s` seconds and
/// returns one spectrogram per block; a trailing partial block is dropped.
inline std::vector<Spectrogram> segment_spectrograms(const AudioClip& clip, double block_s = 10.0,
                                                     const StftOptions& opt = {}) {
  const AudioClip mono = to_mono(clip);
  const auto block = static_cast<std::size_t>(std::llround(block_s * mono.sample_rate));
  std::vector<Spectrogram> out;
  if (block == 0) return out;
  for (std::size_t start = 0; start + block <= mono.samples.size(); start += block) {
    AudioClip seg{std::vector<double>(mono.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                      mono.samples.begin() + static_cast<std::ptrdiff_t>(start + block)),
                  mono.sample_rate, 1};
    out.push_back(stft_spectrogram(seg, opt));
  }
  return out;
}

/// Signal energy recovered from one-sided magnitudes (Parseval); equals the
/// time-domain energy of the analysed samples when the window is rectangular
/// and hop == window.
inline double spectrogram_energy(const Spectrogram& sg) {
  const auto W = static_cast<double>(sg.window_samples);
  const auto bins = sg.magnitudes.cols();
  const bool even = sg.window_samples % 2 == 0;
  double e = 0.0;
  for (Eigen::Index f = 0; f < sg.magnitudes.rows(); ++f)
    for (Eigen::Index k = 0; k < bins; ++k) {
      const double m2 = sg.magnitudes(f, k) * sg.magnitudes(f, k);
      const bool single = k == 0 || (even && k == bins - 1);
      e += single ? m2 : 2.0 * m2;
    }
  return e / W;
}

/// Per-second descriptor table.
struct DescriptorSeries {
  Eigen::MatrixXd values;
  std::vector<std::string> names;

  Eigen::Index seconds() const { return values.rows(); }
};

inline void check_finite(const DescriptorSeries& s) {
  if (!s.values.allFinite()) throw Error(Errc::non_finite, "descriptor series has non-finite values");
}

/// Symmetric Kaiser window smoothing of every column; `length` taps (odd),
/// renormalised at the edges. length <= 1 leaves the series unchanged.
inline DescriptorSeries kaiser_smooth(const DescriptorSeries& s, int length, double beta = 5.0) {
  if (length <= 1) return s;
  if (length % 2 == 0) ++length;
  std::vector<double> w(static_cast<std::size_t>(length));
  const double denom = std::cyl_bessel_i(0.0, beta);
  for (int i = 0; i < length; ++i) {
    const double r = 2.0 * i / (length - 1) - 1.0;
    w[static_cast<std::size_t>(i)] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
  }
  DescriptorSeries out = s;
  const int half = length / 2;
  const auto T = s.values.rows();
  for (Eigen::Index c = 0; c < s.values.cols(); ++c)
    for (Eigen::Index t = 0; t < T; ++t) {
      double acc = 0.0, norm = 0.0;
      for (int k = -half; k <= half; ++k) {
        const auto u = t + k;
        if (u < 0 || u >= T) continue;
        const double wk = w[static_cast<std::size_t>(k + half)];
        acc += wk * s.values(u, c);
        norm += wk;
      }
      out.values(t, c) = acc / norm;
    }
  return out;
}

struct AudioDescriptorOptions {
  double frame_ms{40.0};
  double min_pitch_hz{60.0};
  double max_pitch_hz{500.0};
  double voicing_threshold{0.3};
  int smoothing_taps{0};
};

/// Autocorrelation pitch of one frame, or 0 when unvoiced. Uses the biased
/// autocorrelation normalised by lag 0 and refines the peak lag by parabolic
/// interpolation.
inline double frame_pitch(std::span<const double> frame, double rate, const AudioDescriptorOptions& opt) {
  const std::size_t n = frame.size();
  double r0 = 0.0;
  for (double v : frame) r0 += v * v;
  if (r0 <= 1e-12 * static_cast<double>(n)) return 0.0;
  const auto lag_min = static_cast<std::size_t>(std::floor(rate / opt.max_pitch_hz));
  const auto lag_max = std::min(n - 2, static_cast<std::size_t>(std::ceil(rate / opt.min_pitch_hz)));
  if (lag_min < 1 || lag_min + 1 > lag_max) return 0.0;
  std::vector<double> r(lag_max + 2, 0.0);
  for (std::size_t lag = lag_min - 1; lag <= lag_max + 1 && lag < n; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += frame[i] * frame[i + lag];
    r[lag] = s / r0;
  }
  std::size_t best = lag_min;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag)
    if (r[lag] > r[best]) best = lag;
  if (r[best] < opt.voicing_threshold) return 0.0;
  double lag = static_cast<double>(best);
  const double a = r[best - 1], b = r[best], c = r[best + 1];
  const double den = a - 2.0 * b + c;
  if (den < 0.0) lag += 0.5 * (a - c) / den;
  return rate / lag;
}

/// Per-second sound energy (mean square), pitch mean and standard deviation
/// over voiced frames, and the voiced-frame fraction.
inline DescriptorSeries hanjalic_audio(const AudioClip& clip, const AudioDescriptorOptions& opt = {}) {
  const AudioClip mono = to_mono(clip);
  const auto per_sec = static_cast<std::size_t>(std::llround(mono.sample_rate));
  const std::size_t seconds = mono.samples.size() / per_sec;
  if (seconds == 0) throw Error(Errc::too_short, "audio shorter than one second");
  const std::size_t frame = ms_to_samples(opt.frame_ms, mono.sample_rate);

  DescriptorSeries out;
  out.names = {"sound_energy", "pitch_mean", "pitch_std", "voiced_fraction"};
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(seconds), 4);
  for (std::size_t s = 0; s < seconds; ++s) {
    std::span<const double> sec(mono.samples.data() + s * per_sec, per_sec);
    double e = 0.0;
    for (double v : sec) e += v * v;
    std::vector<double> pitches;
    std::size_t frames = 0;
    for (std::size_t off = 0; off + frame <= per_sec; off += frame, ++frames)
      if (double p = frame_pitch(sec.subspan(off, frame), mono.sample_rate, opt); p > 0.0) pitches.push_back(p);
    double mean = 0.0, sd = 0.0;
    if (!pitches.empty()) {
      for (double p : pitches) mean += p;
      mean /= static_cast<double>(pitches.size());
      for (double p : pitches) sd += (p - mean) * (p - mean);
      sd = std::sqrt(sd / static_cast<double>(pitches.size()));
    }
    const auto row = static_cast<Eigen::Index>(s);
    out.values(row, 0) = e / static_cast<double>(per_sec);
    out.values(row, 1) = mean;
    out.values(row, 2) = sd;
    out.values(row, 3) = frames ? static_cast<double>(pitches.size()) / static_cast<double>(frames) : 0.0;
  }
  out = kaiser_smooth(out, opt.smoothing_taps);
  check_finite(out);
  return out;
}

}  // namespace adaffect::media
