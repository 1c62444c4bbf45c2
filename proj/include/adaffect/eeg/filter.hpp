#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "adaffect/core/error.hpp"

namespace adaffect::eeg {

/// Second-order section, a0 normalised to 1 (direct form II transposed).
struct Biquad {
  double b0, b1, b2, a1, a2;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

enum class BandKind { lowpass, highpass };

/// Butterworth sections of an even `order` via the bilinear transform with
/// frequency prewarping.
inline std::vector<Biquad> butterworth_sections(BandKind kind, int order, double cutoff_hz, double rate) {
  if (order < 2 || order % 2 != 0) throw Error(Errc::invalid_argument, "butterworth order must be even and >= 2");
  if (!(cutoff_hz > 0.0 && cutoff_hz < rate / 2.0)) throw Error(Errc::invalid_band, "cutoff outside (0, nyquist)");
  const double K = std::tan(std::numbers::pi * cutoff_hz / rate);
  std::vector<Biquad> out;
  for (int k = 0; k < order / 2; ++k) {
    // Damping of the k-th conjugate pole pair of the analog prototype.
    const double two_zeta = 2.0 * std::sin((2.0 * k + 1.0) * std::numbers::pi / (2.0 * order));
    const double norm = 1.0 / (1.0 + two_zeta * K + K * K);
    const double a1 = 2.0 * (K * K - 1.0) * norm;
    const double a2 = (1.0 - two_zeta * K + K * K) * norm;
    if (kind == BandKind::lowpass) {
      const double b0 = K * K * norm;
      out.push_back({b0, 2.0 * b0, b0, a1, a2});
    } else {
      out.push_back({norm, -2.0 * norm, norm, a1, a2});
    }
  }
  return out;
}

/// Runs the cascade over `x` in place. `zi` holds two states per section.
inline void sos_filter(std::span<const Biquad> sos, std::span<double> x, std::vector<double> zi) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& q = sos[s];
    double z1 = zi[2 * s], z2 = zi[2 * s + 1];
    for (double& v : x) {
      const double in = v;
      const double y = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * y + z2;
      z2 = q.b2 * in - q.a2 * y;
      v = y;
    }
  }
}

/// Initial states giving the steady-state response to a unit step input.
inline std::vector<double> sos_step_state(std::span<const Biquad> sos) {
  std::vector<double> zi(2 * sos.size());
  double in = 1.0;
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const auto& q = sos[s];
    const double y = q.dc_gain() * in;
    zi[2 * s] = y - q.b0 * in;
    zi[2 * s + 1] = q.b2 * in - q.a2 * y;
    in = y;
  }
  return zi;
}

/// Zero-phase forward-backward filtering with odd-reflection padding and
/// steady-state initial conditions scaled by the edge sample.
inline std::vector<double> sos_filtfilt(std::span<const Biquad> sos, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::size_t pad = 3 * (2 * sos.size() + 1);
  if (pad >= n) pad = n - 1;
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto unit = sos_step_state(sos);
  auto scaled = [&](double v) {
    auto z = unit;
    for (auto& e : z) e *= v;
    return z;
  };
  sos_filter(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  sos_filter(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

/// High-pass then low-pass Butterworth cascade of the given per-edge order.
inline std::vector<Biquad> bandpass_sections(double low_hz, double high_hz, double rate, int order = 4) {
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < rate / 2.0))
    throw Error(Errc::invalid_band, "need 0 < low < high < nyquist");
  auto sos = butterworth_sections(BandKind::highpass, order, low_hz, rate);
  auto lp = butterworth_sections(BandKind::lowpass, order, high_hz, rate);
  sos.insert(sos.end(), lp.begin(), lp.end());
  return sos;
}

}  // namespace adaffect::eeg
