#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "adaffect/media/audio.hpp"

namespace adaffect::media {

/// Interleaved RGB intensities in [0,1], row-major.
struct Frame {
  int width{0};
  int height{0};
  std::vector<double> rgb;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

struct FrameSequence {
  std::vector<Frame> frames;
  double frame_rate{25.0};

  double duration_s() const { return static_cast<double>(frames.size()) / frame_rate; }

  void validate() const {
    if (!(frame_rate > 0.0)) throw Error(Errc::invalid_argument, "frame rate must be positive");
    for (const auto& f : frames) {
      if (f.width != frames.front().width || f.height != frames.front().height)
        throw Error(Errc::invalid_argument, "frames differ in size");
      if (f.rgb.size() != 3 * f.pixels()) throw Error(Errc::invalid_argument, "frame buffer size mismatch");
    }
  }
};

/// Indices of frames at t = 0, period, 2*period, ... strictly before the end.
inline std::vector<std::size_t> sample_keyframes(const FrameSequence& v, double period_s = 3.0) {
  if (v.frames.empty()) throw Error(Errc::empty_input, "frame sequence is empty");
  if (!(period_s > 0.0)) throw Error(Errc::invalid_argument, "period must be positive");
  std::vector<std::size_t> out;
  const double dur = v.duration_s();
  for (std::size_t j = 0;; ++j) {
    const double t = static_cast<double>(j) * period_s;
    if (t >= dur - 1e-12) break;
    const auto idx = static_cast<std::size_t>(std::floor(t * v.frame_rate + 1e-9));
    if (idx >= v.frames.size()) break;
    out.push_back(idx);
  }
  return out;
}

struct VideoDescriptorOptions {
  int histogram_bins{16};
  /// Cut threshold = mean + k * std of all consecutive histogram distances.
  double shot_threshold_sigmas{3.0};
  int smoothing_taps{0};
};

namespace detail {

inline double luma(const Frame& f, std::size_t p) {
  return 0.299 * f.rgb[3 * p] + 0.587 * f.rgb[3 * p + 1] + 0.114 * f.rgb[3 * p + 2];
}

inline std::vector<double> luma_histogram(const Frame& f, int bins) {
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  const auto n = f.pixels();
  for (std::size_t p = 0; p < n; ++p) {
    auto b = static_cast<int>(std::floor(std::clamp(luma(f, p), 0.0, 1.0) * bins));
    h[static_cast<std::size_t>(std::min(b, bins - 1))] += 1.0;
  }
  for (auto& v : h) v /= static_cast<double>(n);
  return h;
}

/// Opponent-axes colourfulness: sqrt(sd_rg^2 + sd_yb^2) + 0.3 sqrt(mu_rg^2 + mu_yb^2).
inline double colorfulness(const Frame& f) {
  const auto n = static_cast<double>(f.pixels());
  double s_rg = 0, s_yb = 0, q_rg = 0, q_yb = 0;
  for (std::size_t p = 0; p < f.pixels(); ++p) {
    const double r = f.rgb[3 * p], g = f.rgb[3 * p + 1], b = f.rgb[3 * p + 2];
    const double rg = r - g, yb = 0.5 * (r + g) - b;
    s_rg += rg, s_yb += yb, q_rg += rg * rg, q_yb += yb * yb;
  }
  const double m_rg = s_rg / n, m_yb = s_yb / n;
  const double v_rg = std::max(0.0, q_rg / n - m_rg * m_rg), v_yb = std::max(0.0, q_yb / n - m_yb * m_yb);
  return std::sqrt(v_rg + v_yb) + 0.3 * std::sqrt(m_rg * m_rg + m_yb * m_yb);
}

}  // namespace detail

/// Consecutive-frame luma histogram L1 distances; entry i compares frames i and i+1.
inline std::vector<double> histogram_distances(const FrameSequence& v, int bins = 16) {
  std::vector<double> d;
  if (v.frames.size() < 2) return d;
  auto prev = detail::luma_histogram(v.frames[0], bins);
  for (std::size_t i = 1; i < v.frames.size(); ++i) {
    auto cur = detail::luma_histogram(v.frames[i], bins);
    double s = 0.0;
    for (std::size_t b = 0; b < cur.size(); ++b) s += std::abs(cur[b] - prev[b]);
    d.push_back(s);
    prev = std::move(cur);
  }
  return d;
}

/// Per-second shot-change count, motion activity and colourfulness. A
/// transition into frame i is attributed to the second containing frame i.
inline DescriptorSeries hanjalic_video(const FrameSequence& v, const VideoDescriptorOptions& opt = {}) {
  v.validate();
  if (v.frames.size() < 2) throw Error(Errc::too_short, "need at least two frames");
  const auto seconds = static_cast<std::size_t>(std::floor(v.duration_s() + 1e-9));
  if (seconds == 0) throw Error(Errc::too_short, "sequence shorter than one second");
  auto second_of = [&](std::size_t frame) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(frame) / v.frame_rate + 1e-9));
  };

  const auto dist = histogram_distances(v, opt.histogram_bins);
  double mean = 0.0, var = 0.0;
  for (double d : dist) mean += d;
  mean /= static_cast<double>(dist.size());
  for (double d : dist) var += (d - mean) * (d - mean);
  const double threshold = mean + opt.shot_threshold_sigmas * std::sqrt(var / static_cast<double>(dist.size()));

  DescriptorSeries out;
  out.names = {"shot_changes", "motion_activity", "colorfulness"};
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(seconds), 3);
  std::vector<int> motion_n(seconds, 0), color_n(seconds, 0);
  for (std::size_t i = 0; i < v.frames.size(); ++i) {
    const auto s = second_of(i);
    if (s >= seconds) break;
    const auto row = static_cast<Eigen::Index>(s);
    out.values(row, 2) += detail::colorfulness(v.frames[i]);
    ++color_n[s];
    if (i == 0) continue;
    if (dist[i - 1] > threshold) out.values(row, 0) += 1.0;
    const auto& a = v.frames[i - 1];
    const auto& b = v.frames[i];
    double m = 0.0;
    for (std::size_t p = 0; p < b.pixels(); ++p) m += std::abs(detail::luma(b, p) - detail::luma(a, p));
    out.values(row, 1) += m / static_cast<double>(b.pixels());
    ++motion_n[s];
  }
  for (std::size_t s = 0; s < seconds; ++s) {
    const auto row = static_cast<Eigen::Index>(s);
    if (motion_n[s]) out.values(row, 1) /= motion_n[s];
    if (color_n[s]) out.values(row, 2) /= color_n[s];
  }
  DescriptorSeries smoothed = kaiser_smooth(out, opt.smoothing_taps);
  check_finite(smoothed);
  return smoothed;
}

}  // namespace adaffect::media
