#pragma once

#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaffect/core/csv.hpp"
#include "adaffect/core/types.hpp"

namespace adaffect {

struct RatingPair {
  RatingMatrix valence;
  RatingMatrix arousal;

  const RatingMatrix& get(Attribute a) const { return a == Attribute::valence ? valence : arousal; }
  RatingMatrix& get(Attribute a) { return a == Attribute::valence ? valence : arousal; }
};

struct DatasetBundle {
  std::vector<AdRecord> records;
  RatingPair ratings;
};

struct ScaleSpec {
  std::array<double, 2> valence = default_scale(Attribute::valence);
  std::array<double, 2> arousal = default_scale(Attribute::arousal);
};

namespace detail {

inline RatingMatrix empty_matrix(Attribute a, const std::array<double, 2>& scale) {
  RatingMatrix m;
  m.attribute = a;
  m.scale_min = scale[0];
  m.scale_max = scale[1];
  return m;
}

}  // namespace detail

/// Parses ratings CSV text (`rater_id,item_id,attribute,score`). Items listed
/// in `item_order` come first, in that order; unseen items follow in order of
/// first appearance. Raters are ordered by first appearance.
inline RatingPair parse_ratings_csv(std::string_view text, const ScaleSpec& scales = {},
                                    const std::vector<std::string>& item_order = {}) {
  struct Cell {
    std::size_t rater, item;
    Attribute attr;
    double score;
    std::size_t line;
  };
  std::vector<std::string> raters, items(item_order);
  std::unordered_map<std::string, std::size_t> rater_idx, item_idx;
  for (std::size_t i = 0; i < items.size(); ++i) item_idx.emplace(items[i], i);
  std::vector<Cell> cells;
  bool header_seen = false;
  io::for_each_line(text, [&](std::string_view line, std::size_t no) {
    auto f = io::split(line);
    if (!header_seen) {
      header_seen = true;
      if (f.size() == 4 && f[0] == "rater_id" && f[1] == "item_id" && f[2] == "attribute" && f[3] == "score")
        return;
      throw Error(Errc::parse, "line " + std::to_string(no) + ": expected header rater_id,item_id,attribute,score");
    }
    if (f.size() != 4) throw Error(Errc::parse, "line " + std::to_string(no) + ": expected 4 fields");
    Attribute attr;
    try {
      attr = parse_attribute(f[2]);
    } catch (const Error&) {
      throw Error(Errc::parse, "line " + std::to_string(no) + ": unknown attribute '" + std::string(f[2]) + "'");
    }
    std::string r(f[0]), it(f[1]);
    auto [ri, rnew] = rater_idx.try_emplace(r, raters.size());
    if (rnew) raters.push_back(r);
    auto [ii, inew] = item_idx.try_emplace(it, items.size());
    if (inew) items.push_back(it);
    cells.push_back({ri->second, ii->second, attr, io::parse_double(f[3], no, "score"), no});
  });

  RatingPair out{detail::empty_matrix(Attribute::valence, scales.valence),
                 detail::empty_matrix(Attribute::arousal, scales.arousal)};
  for (auto* m : {&out.valence, &out.arousal}) {
    m->values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(raters.size()),
                                          static_cast<Eigen::Index>(items.size()), RatingMatrix::missing());
    m->rater_ids = raters;
    m->item_ids = items;
  }
  for (const auto& c : cells) {
    auto& m = out.get(c.attr);
    auto r = static_cast<Eigen::Index>(c.rater), i = static_cast<Eigen::Index>(c.item);
    if (m.present(r, i))
      throw Error(Errc::parse, "line " + std::to_string(c.line) + ": duplicate rating for rater " + raters[c.rater] +
                                   ", item " + items[c.item]);
    if (c.score < m.scale_min || c.score > m.scale_max)
      throw Error(Errc::scale_violation, "line " + std::to_string(c.line) + ": rater " + raters[c.rater] +
                                             ", item " + items[c.item] + ", " +
                                             std::string(attribute_name(c.attr)) + " score " + io::fmt(c.score) +
                                             " outside [" + io::fmt(m.scale_min) + ", " + io::fmt(m.scale_max) + "]");
    m.values(r, i) = c.score;
  }
  return out;
}

/// Writes present cells of each matrix in rater-major order.
inline std::string ratings_csv(std::initializer_list<const RatingMatrix*> mats) {
  std::string out = "rater_id,item_id,attribute,score\n";
  for (const auto* m : mats)
    for (Eigen::Index r = 0; r < m->raters(); ++r)
      for (Eigen::Index i = 0; i < m->items(); ++i) {
        if (!m->present(r, i)) continue;
        out += m->rater_ids[static_cast<std::size_t>(r)] + ',' + m->item_ids[static_cast<std::size_t>(i)] + ',' +
               std::string(attribute_name(m->attribute)) + ',' + io::fmt(m->values(r, i)) + '\n';
      }
  return out;
}

inline RatingPair load_ratings_csv(const std::filesystem::path& path, const ScaleSpec& scales = {},
                                   const std::vector<std::string>& item_order = {}) {
  return parse_ratings_csv(io::read_file(path), scales, item_order);
}

/// Manifest text: one JSON object per line. Ad lines carry
/// {id, duration_s, expert_arousal, expert_valence[, asl_score, val_score]}.
/// Optional directive lines: {"scales": {"valence": [lo,hi], "arousal": [lo,hi]}}
/// and {"ratings": "<csv path relative to the manifest>"}.
struct ManifestText {
  std::vector<AdRecord> records;
  ScaleSpec scales;
  std::optional<std::string> ratings_path;
};

inline ManifestText parse_manifest(std::string_view text) {
  ManifestText out;
  std::unordered_map<std::string, std::size_t> seen;
  io::for_each_line(text, [&](std::string_view line, std::size_t no) {
    auto where = [&] { return "line " + std::to_string(no) + ": "; };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse, where() + e.what());
    }
    if (!j.is_object()) throw Error(Errc::parse, where() + "expected an object");
    try {
      if (j.contains("scales")) {
        const auto& s = j.at("scales");
        if (s.contains("valence")) out.scales.valence = s.at("valence").get<std::array<double, 2>>();
        if (s.contains("arousal")) out.scales.arousal = s.at("arousal").get<std::array<double, 2>>();
        return;
      }
      if (j.contains("ratings") && !j.contains("id")) {
        out.ratings_path = j.at("ratings").get<std::string>();
        return;
      }
      AdRecord rec;
      rec.id = j.at("id").get<std::string>();
      rec.duration_s = j.at("duration_s").get<double>();
      rec.expert_quadrant = {parse_label(j.at("expert_arousal").get<std::string>()),
                             parse_label(j.at("expert_valence").get<std::string>())};
      if (j.contains("asl_score")) rec.asl_score = j.at("asl_score").get<double>();
      if (j.contains("val_score")) rec.val_score = j.at("val_score").get<double>();
      if (!seen.emplace(rec.id, out.records.size()).second)
        throw Error(Errc::parse, where() + "duplicate ad id '" + rec.id + "'");
      try {
        rec.validate();
      } catch (const Error& e) {
        throw Error(e.code(), where() + e.what());
      }
      out.records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse, where() + e.what());
    }
  });
  return out;
}

/// Loads the manifest and its ratings. `ratings_path` overrides a ratings
/// directive inside the manifest; with neither, the rating matrices are empty.
inline DatasetBundle load_manifest(const std::filesystem::path& path,
                                   std::optional<std::filesystem::path> ratings_path = std::nullopt) {
  auto m = parse_manifest(io::read_file(path));
  if (!ratings_path && m.ratings_path) ratings_path = path.parent_path() / *m.ratings_path;
  std::vector<std::string> order;
  for (const auto& r : m.records) order.push_back(r.id);
  DatasetBundle b;
  if (ratings_path) {
    b.ratings = load_ratings_csv(*ratings_path, m.scales, order);
  } else {
    b.ratings = parse_ratings_csv("rater_id,item_id,attribute,score\n", m.scales, order);
  }
  b.records = std::move(m.records);
  return b;
}

inline std::array<int, 4> quadrant_counts(const std::vector<AdRecord>& records) {
  std::array<int, 4> c{};
  for (const auto& r : records) ++c[static_cast<std::size_t>(r.expert_quadrant.index())];
  return c;
}

}  // namespace adaffect
