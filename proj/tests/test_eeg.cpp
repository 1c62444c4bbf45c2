#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "adaffect/adaffect.hpp"

using namespace adaffect;
using namespace adaffect::eeg;
namespace fs = std::filesystem;

namespace {

EegEpoch sine_epoch(double hz, double seconds, double amp = 1.0) {
  EegEpoch e;
  const auto T = static_cast<Eigen::Index>(seconds * kSampleRate);
  e.data.resize(kChannels, T);
  for (Eigen::Index c = 0; c < kChannels; ++c)
    for (Eigen::Index t = 0; t < T; ++t)
      e.data(c, t) = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(t) / kSampleRate + 0.3 * static_cast<double>(c));
  return e;
}

// Amplitude of the `hz` component over the middle of the epoch. The slow
// high-pass edge transient is orthogonal to it over whole periods.
double tone_amp(const EegEpoch& e, Eigen::Index c, double hz) {
  const Eigen::Index T = e.samples(), skip = 5 * 128;
  double s = 0, k = 0;
  for (Eigen::Index t = skip; t < T - skip; ++t) {
    const double ph = 2 * std::numbers::pi * hz * static_cast<double>(t) / kSampleRate;
    s += e.data(c, t) * std::sin(ph);
    k += e.data(c, t) * std::cos(ph);
  }
  return 2.0 * std::hypot(s, k) / static_cast<double>(T - 2 * skip);
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::io;
}

}  // namespace

TEST(Bandpass, PassbandStopbandAndDc) {
  const auto in10 = sine_epoch(10, 30), in60 = sine_epoch(60, 30);
  const auto out10 = bandpass_filter(in10), out60 = bandpass_filter(in60);
  for (Eigen::Index c = 0; c < kChannels; ++c) {
    EXPECT_NEAR(tone_amp(out10, c, 10) / tone_amp(in10, c, 10), 1.0, 0.05);
    EXPECT_LE(20 * std::log10(tone_amp(out60, c, 60) / tone_amp(out10, c, 10)), -20.0);
  }
  EegEpoch dc;
  dc.data = Eigen::MatrixXd::Constant(kChannels, 128 * 120, 30.0);
  const auto f = bandpass_filter(dc);
  EXPECT_LT(f.data.middleCols(128 * 30, 128 * 60).cwiseAbs().maxCoeff(), 0.3);
}

TEST(Bandpass, InvalidBand) {
  const auto e = sine_epoch(10, 4);
  EXPECT_EQ(code_of([&] { bandpass_filter(e, {45, 10, 4}); }), Errc::invalid_band);
  EXPECT_EQ(code_of([&] { bandpass_filter(e, {0.1, 70, 4}); }), Errc::invalid_band);
}

TEST(Bandpass, Linear) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 10);
  EegEpoch x, y, mix;
  x.data.resize(kChannels, 1000);
  y.data.resize(kChannels, 1000);
  for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data(i) = g(rng), y.data(i) = g(rng);
  mix.data = 2.5 * x.data - 0.7 * y.data;
  const Eigen::MatrixXd lhs = bandpass_filter(mix).data;
  const Eigen::MatrixXd rhs = 2.5 * bandpass_filter(x).data - 0.7 * bandpass_filter(y).data;
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
}

TEST(Baseline, Examples) {
  EegEpoch e;
  e.data = Eigen::MatrixXd::Constant(kChannels, 50, 7.0);
  e.baseline = Eigen::MatrixXd::Constant(kChannels, 128, 5.0);
  auto out = baseline_correct(e);
  EXPECT_DOUBLE_EQ(out.data(0, 10), 2.0);

  e.baseline = Eigen::MatrixXd::Constant(kChannels, 128, 7.0);
  EXPECT_EQ(baseline_correct(e).data.cwiseAbs().maxCoeff(), 0.0);

  e.baseline.reset();
  EXPECT_EQ(code_of([&] { baseline_correct(e); }), Errc::missing_baseline);
}

TEST(Vectorize, WindowLengths) {
  EegEpoch full;
  full.data = Eigen::MatrixXd::Zero(kChannels, 60 * 128);
  EXPECT_EQ(vectorize(full, TemporalWindow::first30).size(), 51338);
  EXPECT_EQ(vectorize(full, TemporalWindow::last10).size(), 17920);
  EegEpoch one;
  one.data = Eigen::MatrixXd::Ones(kChannels, 1);
  EXPECT_EQ(vectorize(one, TemporalWindow::last30).size(), 14);
  EXPECT_EQ(temporal_window(full, TemporalWindow::first30).samples(), 3667);
}

TEST(Vectorize, InverseIsIdentity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  EegEpoch e;
  e.data.resize(kChannels, 77);
  for (Eigen::Index i = 0; i < e.data.size(); ++i) e.data(i) = g(rng);
  const auto v = vectorize(e);
  EXPECT_EQ(unvectorize(v, kChannels), e.data);
  EXPECT_EQ(v(77), e.data(1, 0));
}

TEST(EpochIo, RoundTripAndCleanCount) {
  const auto dir = fs::temp_directory_path() / "adaffect_eeg_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  synth::EegGenSpec spec;
  spec.epochs_per_class = 3;
  spec.seconds = 4;
  auto epochs = synth::gen_synthetic_eeg(spec);
  epochs[1].clean = false;
  for (const auto& e : epochs) save_epoch(e, dir / e.stimulus_id);
  const auto back = load_epoch_dir(dir);
  ASSERT_EQ(back.size(), epochs.size());
  const auto c = count_epochs(back);
  EXPECT_EQ(c.total, 6u);
  EXPECT_EQ(c.clean, 5u);
  for (const auto& b : back) {
    const auto it = std::find_if(epochs.begin(), epochs.end(), [&](const auto& e) { return e.stimulus_id == b.stimulus_id; });
    ASSERT_NE(it, epochs.end());
    // Samples are stored as 32-bit floats.
    EXPECT_LT((b.data - it->data).cwiseAbs().maxCoeff(), 1e-4 * std::max(1.0, it->data.cwiseAbs().maxCoeff()));
    ASSERT_TRUE(b.baseline.has_value());
    EXPECT_EQ(b.baseline->cols(), 128);
    EXPECT_EQ(b.label, it->label);
    EXPECT_EQ(b.quadrant, it->quadrant);
  }
}

TEST(EpochIo, CorpusScaleCleanCount) {
  std::vector<EegEpoch> epochs(1738);
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    epochs[i].data = Eigen::MatrixXd::Zero(kChannels, 1);
    epochs[i].clean = i % 8 != 3 || i >= 8 * 212;
  }
  const auto c = count_epochs(epochs);
  EXPECT_EQ(c.total, 1738u);
  EXPECT_EQ(c.clean, 1526u);
}

TEST(Pca, Examples) {
  Eigen::MatrixXd line(20, 3);
  for (int i = 0; i < 20; ++i) line.row(i) << i, 2 * i - 1, -0.5 * i;
  const auto m = pca_fit(line, 0.9);
  EXPECT_EQ(m.k(), 1);
  EXPECT_NEAR(m.retained_fraction, 1.0, 1e-12);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::MatrixXd iso(10000, 2);
  for (Eigen::Index i = 0; i < iso.size(); ++i) iso(i) = g(rng);
  const auto mi = pca_fit(iso, 0.9);
  EXPECT_EQ(mi.k(), 2);
  EXPECT_NEAR(mi.explained_variance(0) / mi.total_variance, 0.5, 0.02);

  Eigen::MatrixXd r(30, 6);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = g(rng);
  const auto full = pca_fit(r, 1.0);
  const Eigen::MatrixXd rec = pca_reconstruct(full, pca_apply(full, r));
  EXPECT_LE((rec - r).norm() / r.norm(), 1e-8);

  EXPECT_EQ(code_of([] { pca_fit(Eigen::MatrixXd::Ones(5, 3)); }), Errc::rank_zero);
  EXPECT_EQ(code_of([] { pca_fit(Eigen::MatrixXd::Ones(1, 3)); }), Errc::too_short);
}

TEST(Pca, InvariantsBothRoutes) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  for (auto [n, d] : {std::pair{40, 300}, std::pair{300, 20}}) {
    Eigen::MatrixXd basis(5, d), coef(n, 5);
    for (Eigen::Index i = 0; i < basis.size(); ++i) basis(i) = g(rng);
    for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = g(rng) * (1.0 + static_cast<double>(i % 5));
    Eigen::MatrixXd X = coef * basis;
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) += 0.01 * g(rng);
    const auto m = pca_fit(X, 0.95);
    const Eigen::MatrixXd gram = m.components * m.components.transpose();
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(m.k(), m.k())).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index i = 1; i < m.k(); ++i) EXPECT_LE(m.explained_variance(i), m.explained_variance(i - 1));
    EXPECT_GE(m.retained_fraction, 0.95);
    const Eigen::MatrixXd P = pca_apply(m, X);
    const Eigen::MatrixXd C = P.transpose() * P / static_cast<double>(n - 1);
    const Eigen::MatrixXd off = C - Eigen::MatrixXd(C.diagonal().asDiagonal());
    EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-8 * C.diagonal().maxCoeff());
    EXPECT_LE(C.trace(), m.total_variance * (1 + 1e-12));

    const auto other = pca_fit(X, 0.95, n < d ? PcaMethod::covariance : PcaMethod::gram);
    ASSERT_EQ(other.k(), m.k());
    EXPECT_LT((other.components - m.components).cwiseAbs().maxCoeff(), 1e-6);
  }
}
