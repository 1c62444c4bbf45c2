#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "adaffect/core/csv.hpp"
#include "adaffect/core/window.hpp"
#include "adaffect/media/video.hpp"

namespace adaffect::media {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline DescriptorSeries temporal_window(const DescriptorSeries& s, TemporalWindow w) {
  const auto total = static_cast<std::size_t>(s.seconds());
  if (total == 0) throw Error(Errc::too_short, "series shorter than one second");
  const auto span = resolve_window(w, total, 30, 10);
  return {s.values.middleRows(static_cast<Eigen::Index>(span.begin), static_cast<Eigen::Index>(span.length)), s.names};
}

namespace detail {

template <typename T>
T read_le(const std::string& buf, std::size_t off) {
  if (off + sizeof(T) > buf.size()) throw Error(Errc::parse, "truncated file");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::string& buf, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  buf.append(b, sizeof(T));
}

}  // namespace detail

/// RIFF/WAVE reader for 16-bit PCM and 32-bit IEEE float, any channel count.
inline AudioClip parse_wav(const std::string& buf) {
  using detail::read_le;
  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0)
    throw Error(Errc::parse, "not a RIFF/WAVE file");
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t off = 12;
  while (off + 8 <= buf.size()) {
    const std::string id = buf.substr(off, 4);
    const auto size = read_le<std::uint32_t>(buf, off + 4);
    const std::size_t body = off + 8;
    if (body + size > buf.size()) throw Error(Errc::parse, "chunk '" + id + "' overruns the file");
    if (id == "fmt ") {
      format = read_le<std::uint16_t>(buf, body);
      channels = read_le<std::uint16_t>(buf, body + 2);
      rate = read_le<std::uint32_t>(buf, body + 4);
      bits = read_le<std::uint16_t>(buf, body + 14);
      if (format == 0xFFFE && size >= 26) format = read_le<std::uint16_t>(buf, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(Errc::parse, "data chunk before fmt chunk");
      AudioClip clip;
      clip.sample_rate = rate;
      clip.channels = channels;
      if (format == 1 && bits == 16) {
        clip.samples.resize(size / 2);
        for (std::size_t i = 0; i < clip.samples.size(); ++i)
          clip.samples[i] = read_le<std::int16_t>(buf, body + 2 * i) / 32768.0;
      } else if (format == 3 && bits == 32) {
        clip.samples.resize(size / 4);
        for (std::size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] = read_le<float>(buf, body + 4 * i);
      } else {
        throw Error(Errc::parse, "unsupported WAV encoding (format " + std::to_string(format) + ", " +
                                     std::to_string(bits) + " bits)");
      }
      clip.validate();
      return clip;
    }
    off = body + size + (size & 1u);
  }
  throw Error(Errc::parse, "no data chunk");
}

inline AudioClip load_wav(const std::filesystem::path& p) { return parse_wav(io::read_file(p)); }

enum class WavEncoding { pcm16, float32 };

inline std::string wav_bytes(const AudioClip& clip, WavEncoding enc = WavEncoding::pcm16) {
  using detail::append_le;
  clip.validate();
  const std::uint16_t bits = enc == WavEncoding::pcm16 ? 16 : 32;
  const auto data_size = static_cast<std::uint32_t>(clip.samples.size() * bits / 8);
  std::string b = "RIFF";
  append_le<std::uint32_t>(b, 36 + data_size);
  b += "WAVEfmt ";
  append_le<std::uint32_t>(b, 16);
  append_le<std::uint16_t>(b, enc == WavEncoding::pcm16 ? 1 : 3);
  append_le<std::uint16_t>(b, static_cast<std::uint16_t>(clip.channels));
  const auto rate = static_cast<std::uint32_t>(std::llround(clip.sample_rate));
  append_le<std::uint32_t>(b, rate);
  append_le<std::uint32_t>(b, rate * static_cast<std::uint32_t>(clip.channels) * bits / 8);
  append_le<std::uint16_t>(b, static_cast<std::uint16_t>(clip.channels * bits / 8));
  append_le<std::uint16_t>(b, bits);
  b += "data";
  append_le<std::uint32_t>(b, data_size);
  for (double s : clip.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    if (enc == WavEncoding::pcm16)
      append_le<std::int16_t>(b, static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0))));
    else
      append_le<float>(b, static_cast<float>(c));
  }
  return b;
}

/// Binary PPM (P6, maxval <= 255).
inline Frame parse_ppm(const std::string& buf) {
  std::size_t pos = 0;
  auto token = [&]() {
    for (;;) {
      while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
      if (pos < buf.size() && buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const auto start = pos;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    return buf.substr(start, pos - start);
  };
  if (token() != "P6") throw Error(Errc::parse, "not a binary PPM (P6)");
  Frame f;
  try {
    f.width = std::stoi(token());
    f.height = std::stoi(token());
    const int maxval = std::stoi(token());
    if (maxval <= 0 || maxval > 255) throw Error(Errc::parse, "unsupported PPM maxval");
    ++pos;
    const auto n = 3 * f.pixels();
    if (pos + n > buf.size()) throw Error(Errc::parse, "truncated PPM data");
    f.rgb.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.rgb[i] = static_cast<unsigned char>(buf[pos + i]) / static_cast<double>(maxval);
  } catch (const std::logic_error&) {
    throw Error(Errc::parse, "malformed PPM header");
  }
  return f;
}

inline std::string ppm_bytes(const Frame& f) {
  std::string b = "P6\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  for (double v : f.rgb) b.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  return b;
}

inline std::string frame_filename(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06zu.ppm", i);
  return name;
}

/// Directory of frame_%06d.ppm files plus an `fps` sidecar file whose first
/// token is the frame rate (`fps.txt`, or `fps=<rate>` is also accepted).
inline FrameSequence load_frame_dir(const std::filesystem::path& dir) {
  FrameSequence seq;
  const auto sidecar = dir / "fps.txt";
  auto txt = std::string(io::trim(io::read_file(sidecar)));
  if (txt.rfind("fps", 0) == 0) txt = txt.substr(txt.find_first_of("=: ") + 1);
  seq.frame_rate = io::parse_double(io::trim(txt), 1, "fps");
  for (std::size_t i = 0;; ++i) {
    const auto p = dir / frame_filename(i);
    if (!std::filesystem::exists(p)) break;
    seq.frames.push_back(parse_ppm(io::read_file(p)));
  }
  if (seq.frames.empty()) throw Error(Errc::io, "no frames found in " + dir.string());
  seq.validate();
  return seq;
}

inline void save_frame_dir(const FrameSequence& seq, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_file_atomic(dir / "fps.txt", io::fmt(seq.frame_rate) + "\n");
  for (std::size_t i = 0; i < seq.frames.size(); ++i)
    io::write_file_atomic(dir / frame_filename(i), ppm_bytes(seq.frames[i]));
}

inline std::string descriptor_csv(const DescriptorSeries& s) {
  std::string out = "second";
  for (const auto& n : s.names) out += "," + n;
  out += '\n';
  for (Eigen::Index t = 0; t < s.values.rows(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index c = 0; c < s.values.cols(); ++c) out += "," + io::fmt(s.values(t, c));
    out += '\n';
  }
  return out;
}

/// Header line `# window_ms=..,hop_ms=..,sample_rate=..`, then one row of
/// magnitudes per frame.
inline std::string spectrogram_csv(const Spectrogram& sg) {
  std::string out = "# window_ms=" + io::fmt(sg.window_ms) + ",hop_ms=" + io::fmt(sg.hop_ms) +
                    ",sample_rate=" + io::fmt(sg.sample_rate) + "\n";
  for (Eigen::Index f = 0; f < sg.magnitudes.rows(); ++f) {
    for (Eigen::Index k = 0; k < sg.magnitudes.cols(); ++k) {
      if (k) out += ',';
      out += io::fmt(sg.magnitudes(f, k));
    }
    out += '\n';
  }
  return out;
}

}  // namespace adaffect::media
