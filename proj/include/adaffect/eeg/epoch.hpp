#pragma once

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "adaffect/core/csv.hpp"
#include "adaffect/core/types.hpp"
#include "adaffect/core/window.hpp"
#include "adaffect/eeg/filter.hpp"

namespace adaffect::eeg {

inline constexpr int kChannels = 14;
inline constexpr double kSampleRate = 128.0;

/// One stimulus-locked recording: channels x samples in microvolts.
struct EegEpoch {
  Eigen::MatrixXd data;
  double sample_rate{kSampleRate};
  std::string stimulus_id;
  bool clean{true};
  /// Pre-stimulus fixation segment, channels x samples.
  std::optional<Eigen::MatrixXd> baseline;
  std::optional<AffectLabel> label;
  std::optional<Quadrant> quadrant;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }

  void validate() const {
    if (channels() != kChannels) throw Error(Errc::dimension_mismatch, "epoch must have 14 channels");
    if (sample_rate != kSampleRate) throw Error(Errc::invalid_argument, "epoch sample rate must be 128 Hz");
    if (samples() <= 0) throw Error(Errc::too_short, "epoch has no samples");
    if (baseline && baseline->rows() != channels()) throw Error(Errc::dimension_mismatch, "baseline channel count");
  }
};

struct BandpassOptions {
  double low_hz{0.1};
  double high_hz{45.0};
  int order{4};
};

inline EegEpoch bandpass_filter(const EegEpoch& e, const BandpassOptions& opt = {}) {
  const auto sos = bandpass_sections(opt.low_hz, opt.high_hz, e.sample_rate, opt.order);
  EegEpoch out = e;
  std::vector<double> row(static_cast<std::size_t>(e.samples()));
  for (Eigen::Index c = 0; c < e.channels(); ++c) {
    for (Eigen::Index t = 0; t < e.samples(); ++t) row[static_cast<std::size_t>(t)] = e.data(c, t);
    const auto y = sos_filtfilt(sos, row);
    for (Eigen::Index t = 0; t < e.samples(); ++t) out.data(c, t) = y[static_cast<std::size_t>(t)];
  }
  return out;
}

/// Subtracts each channel's fixation-segment mean from that channel.
inline EegEpoch baseline_correct(const EegEpoch& e) {
  if (!e.baseline || e.baseline->cols() == 0) throw Error(Errc::missing_baseline, "epoch '" + e.stimulus_id + "' has no baseline");
  if (e.baseline->rows() != e.channels()) throw Error(Errc::dimension_mismatch, "baseline channel count");
  EegEpoch out = e;
  const Eigen::VectorXd mean = e.baseline->rowwise().mean();
  out.data.colwise() -= mean;
  return out;
}

inline EegEpoch temporal_window(const EegEpoch& e, TemporalWindow w) {
  const auto total = static_cast<std::size_t>(e.samples());
  if (total == 0) throw Error(Errc::too_short, "epoch has no samples");
  const auto span = resolve_window(w, total, kEegSamples30, kEegSamples10);
  EegEpoch out = e;
  out.data = e.data.middleCols(static_cast<Eigen::Index>(span.begin), static_cast<Eigen::Index>(span.length));
  return out;
}

/// Channel-major concatenation of the windowed epoch.
inline Eigen::VectorXd vectorize(const EegEpoch& e, TemporalWindow w = TemporalWindow::all) {
  const auto win = temporal_window(e, w);
  Eigen::VectorXd v(win.data.size());
  const auto T = win.samples();
  for (Eigen::Index c = 0; c < win.channels(); ++c) v.segment(c * T, T) = win.data.row(c).transpose();
  return v;
}

inline Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, Eigen::Index channels) {
  if (channels <= 0 || v.size() % channels != 0) throw Error(Errc::dimension_mismatch, "vector length not divisible by channels");
  const auto T = v.size() / channels;
  Eigen::MatrixXd m(channels, T);
  for (Eigen::Index c = 0; c < channels; ++c) m.row(c) = v.segment(c * T, T).transpose();
  return m;
}

struct EpochCounts {
  std::size_t total{0};
  std::size_t clean{0};
};

inline EpochCounts count_epochs(const std::vector<EegEpoch>& epochs) {
  EpochCounts c;
  c.total = epochs.size();
  c.clean = static_cast<std::size_t>(std::count_if(epochs.begin(), epochs.end(), [](const auto& e) { return e.clean; }));
  return c;
}

// On-disk format: <stem>.bin holds little-endian float32 samples, channel
// major, with `baseline_offset` fixation samples preceding the `samples`
// stimulus samples in every channel. <stem>.json is the sidecar.

inline nlohmann::json epoch_sidecar(const EegEpoch& e) {
  nlohmann::json j;
  j["channels"] = e.channels();
  j["sample_rate"] = e.sample_rate;
  j["samples"] = e.samples();
  j["stimulus_id"] = e.stimulus_id;
  j["clean"] = e.clean;
  j["baseline_offset"] = e.baseline ? e.baseline->cols() : 0;
  if (e.label) j["label"] = std::string(1, label_char(*e.label));
  if (e.quadrant) j["quadrant"] = e.quadrant->code();
  return j;
}

inline std::string epoch_bytes(const EegEpoch& e) {
  const Eigen::Index B = e.baseline ? e.baseline->cols() : 0;
  std::string buf;
  buf.reserve(static_cast<std::size_t>(e.channels() * (B + e.samples())) * 4);
  auto put = [&](double v) {
    const auto f = static_cast<float>(v);
    char b[4];
    std::memcpy(b, &f, 4);
    buf.append(b, 4);
  };
  for (Eigen::Index c = 0; c < e.channels(); ++c) {
    for (Eigen::Index t = 0; t < B; ++t) put((*e.baseline)(c, t));
    for (Eigen::Index t = 0; t < e.samples(); ++t) put(e.data(c, t));
  }
  return buf;
}

inline void save_epoch(const EegEpoch& e, const std::filesystem::path& stem) {
  auto bin = stem, side = stem;
  bin += ".bin";
  side += ".json";
  io::write_file_atomic(bin, epoch_bytes(e));
  io::write_file_atomic(side, epoch_sidecar(e).dump(2) + "\n");
}

inline EegEpoch load_epoch(const std::filesystem::path& sidecar_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(sidecar_path));
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(Errc::parse, sidecar_path.string() + ": " + ex.what());
  }
  EegEpoch e;
  Eigen::Index C = 0, T = 0, B = 0;
  try {
    C = j.at("channels").get<Eigen::Index>();
    T = j.at("samples").get<Eigen::Index>();
    B = j.value("baseline_offset", Eigen::Index{0});
    e.sample_rate = j.at("sample_rate").get<double>();
    e.stimulus_id = j.at("stimulus_id").get<std::string>();
    e.clean = j.value("clean", true);
    if (j.contains("label")) e.label = parse_label(j.at("label").get<std::string>());
    if (j.contains("quadrant")) e.quadrant = parse_quadrant(j.at("quadrant").get<std::string>());
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::parse, sidecar_path.string() + ": " + ex.what());
  }
  auto bin = sidecar_path;
  bin.replace_extension(".bin");
  if (j.contains("data")) bin = sidecar_path.parent_path() / j.at("data").get<std::string>();
  const auto buf = io::read_file(bin);
  if (buf.size() != static_cast<std::size_t>(C * (B + T)) * 4)
    throw Error(Errc::parse, bin.string() + ": expected " + std::to_string(C * (B + T) * 4) + " bytes, found " +
                                 std::to_string(buf.size()));
  e.data.resize(C, T);
  if (B > 0) e.baseline = Eigen::MatrixXd(C, B);
  std::size_t off = 0;
  auto get = [&] {
    float f;
    std::memcpy(&f, buf.data() + off, 4);
    off += 4;
    return static_cast<double>(f);
  };
  for (Eigen::Index c = 0; c < C; ++c) {
    for (Eigen::Index t = 0; t < B; ++t) (*e.baseline)(c, t) = get();
    for (Eigen::Index t = 0; t < T; ++t) e.data(c, t) = get();
  }
  e.validate();
  return e;
}

/// Loads every `*.json` sidecar in the directory, sorted by file name.
inline std::vector<EegEpoch> load_epoch_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> sidecars;
  for (const auto& ent : std::filesystem::directory_iterator(dir))
    if (ent.path().extension() == ".json") sidecars.push_back(ent.path());
  std::sort(sidecars.begin(), sidecars.end());
  std::vector<EegEpoch> out;
  out.reserve(sidecars.size());
  for (const auto& p : sidecars) out.push_back(load_epoch(p));
  return out;
}

}  // namespace adaffect::eeg
