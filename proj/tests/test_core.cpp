#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "adaffect/adaffect.hpp"

using namespace adaffect;
namespace fs = std::filesystem;
using L = AffectLabel;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("adaffect_core_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string ad_line(const std::string& id, double dur, const char* a, const char* v) {
  return R"({"id":")" + id + R"(","duration_s":)" + io::fmt(dur) + R"(,"expert_arousal":")" + a +
         R"(","expert_valence":")" + v + "\"}\n";
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

TEST(Quadrant, IndexRoundTripAndRelation) {
  for (int i = 0; i < 4; ++i) EXPECT_EQ(Quadrant::from_index(i).index(), i);
  const auto hh = parse_quadrant("HH"), ll = parse_quadrant("LL"), hl = parse_quadrant("HL");
  EXPECT_TRUE(hh.related(hl));
  EXPECT_FALSE(hh.related(ll));
  EXPECT_FALSE(hh.related(hh));
  int related_pairs = 0;
  for (const auto& a : kAllQuadrants)
    for (const auto& b : kAllQuadrants) related_pairs += a.related(b);
  EXPECT_EQ(related_pairs, 8);
  EXPECT_TRUE(L::Low < L::High);
  EXPECT_EQ(code_of([] { parse_quadrant("HX"); }), Errc::parse);
}

TEST(Manifest, FourAdsOnePerQuadrant) {
  const auto dir = scratch("four");
  io::write_file_atomic(dir / "m.jsonl", ad_line("a", 30, "H", "H") + ad_line("b", 31, "H", "L") +
                                             ad_line("c", 32, "L", "H") + ad_line("d", 33, "L", "L"));
  const auto b = load_manifest(dir / "m.jsonl");
  ASSERT_EQ(b.records.size(), 4u);
  EXPECT_EQ(quadrant_counts(b.records), (std::array<int, 4>{1, 1, 1, 1}));
  EXPECT_EQ(b.ratings.valence.items(), 4);
  EXPECT_EQ(b.ratings.valence.scale_min, -2.0);
  EXPECT_EQ(b.ratings.arousal.scale_max, 4.0);
}

TEST(Manifest, ValenceOutOfScaleIsRejected) {
  const auto dir = scratch("scale");
  io::write_file_atomic(dir / "m.jsonl", ad_line("a", 30, "H", "H") + "{\"ratings\":\"r.csv\"}\n");
  io::write_file_atomic(dir / "r.csv", "rater_id,item_id,attribute,score\nr1,a,valence,3\n");
  EXPECT_EQ(code_of([&] { load_manifest(dir / "m.jsonl"); }), Errc::scale_violation);
}

TEST(Manifest, ParseErrorsCarryLineNumbers) {
  try {
    parse_manifest(ad_line("a", 30, "H", "H") + "{not json}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_manifest(ad_line("a", 30, "H", "H") + ad_line("a", 30, "H", "H")); }), Errc::parse);
  EXPECT_EQ(code_of([] { parse_manifest(ad_line("a", 0, "H", "H")); }), Errc::invalid_argument);
}

TEST(Manifest, TableOneHighHighRow) {
  const auto dir = scratch("table1");
  io::write_file_atomic(dir / "m.jsonl", ad_line("hh", 48.16, "H", "H"));
  const auto b = load_manifest(dir / "m.jsonl");
  const auto rows = quadrant_summary(b.records, b.ratings);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].quadrant, parse_quadrant("HH"));
  EXPECT_DOUBLE_EQ(rows[0].mean_length_s, 48.16);
  EXPECT_FALSE(rows[0].mean_asl.has_value());
}

TEST(Ratings, CsvRoundTrip) {
  const std::string text = "rater_id,item_id,attribute,score\nr1,a,valence,-1\nr2,a,valence,2\nr1,b,arousal,3\n";
  const auto p = parse_ratings_csv(text);
  EXPECT_EQ(p.valence.raters(), 2);
  EXPECT_EQ(p.valence.items(), 2);
  EXPECT_TRUE(std::isnan(p.valence.values(0, 1)));
  EXPECT_EQ(p.arousal.values(0, 1), 3.0);
  const auto again = parse_ratings_csv(ratings_csv({&p.valence, &p.arousal}));
  EXPECT_EQ(ratings_csv({&again.valence, &again.arousal}), ratings_csv({&p.valence, &p.arousal}));
  EXPECT_EQ(code_of([] { parse_ratings_csv("rater_id,item_id,attribute,score\nr1,a,valence,1\nr1,a,valence,2\n"); }),
            Errc::parse);
  EXPECT_EQ(code_of([] { parse_ratings_csv("bad header\n"); }), Errc::parse);
}

TEST(MinMax, Examples) {
  EXPECT_EQ(min_max_normalize(std::vector<double>{0, 2, 4}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(min_max_normalize(std::vector<double>{-2, 0, 2}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(code_of([] { min_max_normalize(std::vector<double>{5, 5, 5}); }), Errc::degenerate_range);
  EXPECT_EQ(code_of([] { min_max_normalize(std::vector<double>{}); }), Errc::empty_input);
}

TEST(MinMax, OrderPreservingOnRandomInput) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 10);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(20);
    for (auto& v : x) v = g(rng);
    const auto y = min_max_normalize(x);
    std::vector<std::size_t> ix(x.size()), iy(x.size());
    std::iota(ix.begin(), ix.end(), 0);
    iy = ix;
    std::sort(ix.begin(), ix.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::sort(iy.begin(), iy.end(), [&](auto a, auto b) { return y[a] < y[b]; });
    EXPECT_EQ(ix, iy);
    EXPECT_EQ(*std::min_element(y.begin(), y.end()), 0.0);
    EXPECT_EQ(*std::max_element(y.begin(), y.end()), 1.0);
  }
}

namespace {

RatingMatrix grid(std::initializer_list<std::initializer_list<double>> rows, Attribute a = Attribute::arousal) {
  RatingMatrix m;
  m.attribute = a;
  m.scale_min = default_scale(a)[0];
  m.scale_max = default_scale(a)[1];
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index i = 0;
    for (double v : row) m.values(r, i++) = v;
    m.rater_ids.push_back("r" + std::to_string(r));
    ++r;
  }
  for (Eigen::Index i = 0; i < m.items(); ++i) m.item_ids.push_back("i" + std::to_string(i));
  return m;
}

}  // namespace

TEST(Binarize, Examples) {
  auto g = binarize_ratings(grid({{1, 2, 3}}), BinarizeReference::per_rater_mean);
  EXPECT_EQ(g[0][0], L::Low);
  EXPECT_EQ(g[0][1], L::Low);
  EXPECT_EQ(g[0][2], L::High);

  g = binarize_ratings(grid({{2, 2, 2}, {3, 3, 3}}), BinarizeReference::per_rater_mean);
  for (const auto& row : g)
    for (const auto& v : row) EXPECT_EQ(v, L::Low);

  g = binarize_ratings(grid({{0, 4}, {4, 0}}), BinarizeReference::group_mean);
  EXPECT_EQ(g[0][0], L::Low);
  EXPECT_EQ(g[0][1], L::High);
  EXPECT_EQ(g[1][0], L::High);
  EXPECT_EQ(g[1][1], L::Low);
}

TEST(Binarize, MissingStaysMissingAndEmptyRaterFails) {
  const double nan = RatingMatrix::missing();
  auto g = binarize_ratings(grid({{1, nan, 3}}), BinarizeReference::per_rater_mean);
  EXPECT_FALSE(g[0][1].has_value());
  EXPECT_EQ(code_of([&] { binarize_ratings(grid({{1, 2}, {nan, nan}}), BinarizeReference::per_rater_mean); }),
            Errc::empty_rater);
}

TEST(Binarize, SignFlipFlipsLabels) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> u(-2, 2);
  for (int t = 0; t < 30; ++t) {
    auto m = grid({{0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}}, Attribute::valence);
    for (Eigen::Index r = 0; r < 2; ++r)
      for (Eigen::Index i = 0; i < 6; ++i) m.values(r, i) = u(rng) + 0.1 * static_cast<double>(i);
    auto neg = m;
    neg.values = -m.values;
    const auto a = binarize_ratings(m, BinarizeReference::per_rater_mean);
    const auto b = binarize_ratings(neg, BinarizeReference::per_rater_mean);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t i = 0; i < 6; ++i) EXPECT_NE(a[r][i], b[r][i]);
  }
}

TEST(QuadrantSummary, MeansAndPermutationInvariance) {
  std::vector<AdRecord> recs = {{"x", 40, parse_quadrant("LH"), {}, {}},
                                {"y", 60, parse_quadrant("LH"), {}, {}},
                                {"z", 48.16, parse_quadrant("HH"), {}, {}}};
  RatingPair rp{grid({{1, -1, 2}}, Attribute::valence), grid({{2, 3, 4}}, Attribute::arousal)};
  rp.valence.item_ids = rp.arousal.item_ids = {"x", "y", "z"};
  const auto rows = quadrant_summary(recs, rp);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].quadrant.code(), "HH");
  EXPECT_DOUBLE_EQ(rows[0].mean_length_s, 48.16);
  EXPECT_DOUBLE_EQ(*rows[0].mean_asl, 4.0);
  EXPECT_DOUBLE_EQ(rows[1].mean_length_s, 50.0);
  EXPECT_DOUBLE_EQ(*rows[1].mean_val, 0.0);
  EXPECT_DOUBLE_EQ(*rows[1].mean_asl, 2.5);

  std::reverse(recs.begin(), recs.end());
  const auto again = quadrant_summary(recs, rp);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_DOUBLE_EQ(again[k].mean_length_s, rows[k].mean_length_s);
    EXPECT_DOUBLE_EQ(*again[k].mean_asl, *rows[k].mean_asl);
  }
  EXPECT_EQ(code_of([&] { quadrant_summary({}, rp); }), Errc::empty_input);
}

TEST(FeatureCsv, RoundTripAndValidation) {
  FeatureMatrix fm;
  fm.rows = Eigen::MatrixXd{{1.5, -2}, {0.25, 3e-7}};
  fm.labels = {L::High, L::Low};
  fm.tasks = {parse_quadrant("HL"), parse_quadrant("LL")};
  fm.item_ids = {"a", "b"};
  const auto back = parse_feature_csv(feature_csv(fm));
  EXPECT_EQ(back.rows, fm.rows);
  EXPECT_EQ(back.labels, fm.labels);
  EXPECT_EQ(back.tasks, fm.tasks);
  EXPECT_EQ(back.item_ids, fm.item_ids);
  EXPECT_EQ(code_of([] { parse_feature_csv("a,H,HH,1\nb,H,HH,1,2\n"); }), Errc::parse);
  EXPECT_EQ(code_of([] { parse_feature_csv("a,Q,HH,1\n"); }), Errc::parse);
  EXPECT_EQ(code_of([] { parse_feature_csv("a,H,HH,nan\n"); }), Errc::non_finite);
}

TEST(Window, Resolution) {
  EXPECT_EQ(resolve_window(TemporalWindow::first30, 5000, kEegSamples30, kEegSamples10).length, 3667u);
  const auto s = resolve_window(TemporalWindow::last10, 5000, kEegSamples30, kEegSamples10);
  EXPECT_EQ(s.begin, 5000u - 1280u);
  EXPECT_EQ(resolve_window(TemporalWindow::last30, 100, kEegSamples30, kEegSamples10).length, 100u);
  EXPECT_EQ(parse_window("L10"), TemporalWindow::last10);
  EXPECT_EQ(code_of([] { parse_window("middle"); }), Errc::parse);
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(42, {1}), derive_seed(42, {2}));
  EXPECT_NE(derive_seed(42, {1, 2}), derive_seed(42, {2, 1}));
  EXPECT_EQ(derive_seed(42, {3}), derive_seed(42, {3}));
}
