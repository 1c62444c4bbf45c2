#pragma once

#include <filesystem>
#include <string>

#include "adaffect/core/csv.hpp"
#include "adaffect/core/types.hpp"

namespace adaffect {

/// Feature CSV: item_id,label(H/L),quadrant(HH/HL/LH/LL),f0,f1,...
/// A first line starting with "item_id" is treated as a header.
inline FeatureMatrix parse_feature_csv(std::string_view text) {
  FeatureMatrix fm;
  std::vector<std::vector<double>> rows;
  std::size_t dims = 0;
  bool first = true;
  io::for_each_line(text, [&](std::string_view line, std::size_t no) {
    auto f = io::split(line);
    if (first && !f.empty() && f[0] == "item_id") {
      first = false;
      return;
    }
    first = false;
    if (f.size() < 4) throw Error(Errc::parse, "line " + std::to_string(no) + ": need id, label, quadrant and features");
    if (rows.empty()) dims = f.size() - 3;
    if (f.size() - 3 != dims) throw Error(Errc::parse, "line " + std::to_string(no) + ": inconsistent feature count");
    try {
      fm.labels.push_back(parse_label(f[1]));
      fm.tasks.push_back(parse_quadrant(f[2]));
    } catch (const Error& e) {
      throw Error(Errc::parse, "line " + std::to_string(no) + ": " + e.what());
    }
    fm.item_ids.emplace_back(f[0]);
    std::vector<double> r;
    r.reserve(dims);
    for (std::size_t k = 3; k < f.size(); ++k) r.push_back(io::parse_double(f[k], no, "feature"));
    rows.push_back(std::move(r));
  });
  fm.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dims; ++j) fm.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  fm.validate();
  return fm;
}

inline FeatureMatrix load_feature_csv(const std::filesystem::path& p) { return parse_feature_csv(io::read_file(p)); }

inline std::string feature_csv(const FeatureMatrix& fm) {
  std::string s = "item_id,label,quadrant";
  for (Eigen::Index j = 0; j < fm.dims(); ++j) s += ",f" + std::to_string(j);
  s += '\n';
  for (Eigen::Index i = 0; i < fm.size(); ++i) {
    auto u = static_cast<std::size_t>(i);
    s += fm.item_ids[u];
    s += ',';
    s += label_char(fm.labels[u]);
    s += ',';
    s += fm.tasks[u].code();
    for (Eigen::Index j = 0; j < fm.dims(); ++j) {
      s += ',';
      s += io::fmt(fm.rows(i, j));
    }
    s += '\n';
  }
  return s;
}

}  // namespace adaffect
