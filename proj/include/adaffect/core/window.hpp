#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>

#include "adaffect/core/error.hpp"

namespace adaffect {

enum class TemporalWindow { all, first30, last30, last10 };

inline TemporalWindow parse_window(std::string_view s) {
  if (s == "all") return TemporalWindow::all;
  if (s == "first30" || s == "F30") return TemporalWindow::first30;
  if (s == "last30" || s == "L30") return TemporalWindow::last30;
  if (s == "last10" || s == "L10") return TemporalWindow::last10;
  throw Error(Errc::parse, "unknown temporal window '" + std::string(s) + "'");
}

inline std::string_view window_name(TemporalWindow w) {
  switch (w) {
    case TemporalWindow::all: return "all";
    case TemporalWindow::first30: return "first30";
    case TemporalWindow::last30: return "last30";
    case TemporalWindow::last10: return "last10";
  }
  return "all";
}

/// EEG window lengths in samples at 128 Hz. The 30 s windows are 3667
/// samples (not 30 * 128) to match the recorded analysis setup.
inline constexpr std::size_t kEegSamples30 = 3667;
inline constexpr std::size_t kEegSamples10 = 1280;

struct Span {
  std::size_t begin{0};
  std::size_t length{0};
};

/// Resolves a window over `total` units given the unit count of a 30 s and
/// a 10 s span. Requests longer than the input clamp to the whole input.
inline Span resolve_window(TemporalWindow w, std::size_t total, std::size_t len30, std::size_t len10) {
  switch (w) {
    case TemporalWindow::all: return {0, total};
    case TemporalWindow::first30: return {0, std::min(total, len30)};
    case TemporalWindow::last30: {
      const auto n = std::min(total, len30);
      return {total - n, n};
    }
    case TemporalWindow::last10: {
      const auto n = std::min(total, len10);
      return {total - n, n};
    }
  }
  return {0, total};
}

}  // namespace adaffect
