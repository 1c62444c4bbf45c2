#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaffect/core/types.hpp"
#include "adaffect/learn/cnn.hpp"
#include "adaffect/learn/mtl.hpp"
#include "adaffect/learn/shallow.hpp"

namespace adaffect::learn {

enum class ModelKind { lda, linear_svm, rbf_svm, mtl, cnn };

inline std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::lda: return "lda";
    case ModelKind::linear_svm: return "linear_svm";
    case ModelKind::rbf_svm: return "rbf_svm";
    case ModelKind::mtl: return "mtl";
    case ModelKind::cnn: return "cnn";
  }
  return "lda";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "lda") return ModelKind::lda;
  if (s == "linear_svm" || s == "lsvm") return ModelKind::linear_svm;
  if (s == "rbf_svm" || s == "rsvm") return ModelKind::rbf_svm;
  if (s == "mtl") return ModelKind::mtl;
  if (s == "cnn") return ModelKind::cnn;
  throw Error(Errc::parse, "unknown model kind '" + std::string(s) + "'");
}

inline bool is_svm(ModelKind k) { return k == ModelKind::linear_svm || k == ModelKind::rbf_svm; }

inline ShallowKind to_shallow(ModelKind k) {
  switch (k) {
    case ModelKind::linear_svm: return ShallowKind::linear_svm;
    case ModelKind::rbf_svm: return ShallowKind::rbf_svm;
    default: return ShallowKind::lda;
  }
}

struct ModelSpec {
  ModelKind kind{ModelKind::lda};
  ShallowHyper shallow;
  MtlOptions mtl;
  CnnConfig cnn;
  /// Use each item's quadrant as its task at prediction time; otherwise
  /// the max-|score| task decides.
  bool mtl_known_task{true};
  /// SVM hyperparameter grid searched by inner cross-validation.
  std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
  /// 0 in the grid stands for 1 / dims.
  std::vector<double> gamma_grid{0.0, 0.01, 0.1};
  bool grid_search{true};
  int inner_folds{5};
};

using TrainedModel = std::variant<ShallowModel, MtlModel, CnnModel>;

inline TrainedModel fit_model(const ModelSpec& spec, const FeatureMatrix& data, std::uint64_t seed = 0) {
  data.validate();
  require_both_classes(data.labels);
  switch (spec.kind) {
    case ModelKind::mtl: return mtl_fit(mtl_data_from(data), quadrant_task_graph(), spec.mtl);
    case ModelKind::cnn: {
      auto cfg = spec.cnn;
      cfg.seed = seed;
      return cnn_train(data.rows, data.labels, cfg);
    }
    default: return shallow_fit(data.rows, data.labels, to_shallow(spec.kind), spec.shallow, seed);
  }
}

inline std::vector<Posterior> predict_proba(const TrainedModel& model, const FeatureMatrix& data,
                                            bool mtl_known_task = true) {
  if (const auto* s = std::get_if<ShallowModel>(&model)) return shallow_predict_proba(*s, data.rows);
  if (const auto* c = std::get_if<CnnModel>(&model)) return cnn_predict_proba(*c, data.rows);
  const auto& m = std::get<MtlModel>(model);
  std::vector<Posterior> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::optional<int> task;
    if (mtl_known_task && static_cast<std::size_t>(i) < data.tasks.size()) task = data.tasks[static_cast<std::size_t>(i)].index();
    const auto p = mtl_predict(m, data.rows.row(i).transpose(), task);
    out.push_back({p.p_high, 1.0 - p.p_high});
  }
  return out;
}

// Serialization: a JSON document with format_version, kind, hyperparameters
// and plain numeric arrays. Doubles are written in shortest round-trip form.

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json to_array(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from(const nlohmann::json& j, Eigen::Index cols_if_empty = 0) {
  const auto r = static_cast<Eigen::Index>(j.size());
  const Eigen::Index c = r ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto row = j[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != c) throw Error(Errc::parse, "ragged matrix in model file");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row[static_cast<std::size_t>(k)];
  }
  return m;
}

inline std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd vec_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& model) {
  using namespace detail;
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  if (const auto* s = std::get_if<ShallowModel>(&model)) {
    j["kind"] = shallow_kind_name(s->kind);
    j["hyper"] = {{"C", s->hyper.C}, {"gamma", s->hyper.gamma}, {"shrinkage", s->hyper.shrinkage},
                  {"calibration_folds", s->hyper.calibration_folds}, {"smo_tolerance", s->hyper.smo_tolerance}};
    j["dims"] = s->dims;
    j["weights"] = to_vec(s->weights);
    j["bias"] = s->bias;
    j["support"] = to_array(s->support);
    j["dual_coef"] = to_vec(s->dual_coef);
    j["alpha"] = to_vec(s->alpha);
    j["kkt_gap"] = s->kkt_gap;
    j["calibration"] = {{"A", s->calibration.A}, {"B", s->calibration.B}};
  } else if (const auto* m = std::get_if<MtlModel>(&model)) {
    j["kind"] = "mtl";
    j["hyper"] = {{"alpha", m->options.alpha}, {"beta", m->options.beta}, {"gamma", m->options.gamma},
                  {"fit_intercept", m->options.fit_intercept}, {"tolerance", m->options.tolerance},
                  {"max_iterations", m->options.max_iterations}};
    j["W"] = to_array(m->W);
    j["bias"] = to_vec(m->bias);
    j["edges"] = m->graph.edges;
    j["calibration_slope"] = m->calibration_slope;
    j["objective_history"] = m->objective_history;
  } else {
    const auto& c = std::get<CnnModel>(model);
    const auto& cfg = c.config();
    j["kind"] = "cnn";
    j["hyper"] = {{"conv_filters", cfg.conv_filters}, {"kernel_width", cfg.kernel_width}, {"fc_units", cfg.fc_units},
                  {"learning_rate", cfg.learning_rate}, {"momentum", cfg.momentum}, {"weight_decay", cfg.weight_decay},
                  {"dropout", cfg.dropout}, {"max_epochs", cfg.max_epochs}, {"patience", cfg.patience},
                  {"batch_size", cfg.batch_size}, {"validation_fraction", cfg.validation_fraction}, {"seed", cfg.seed}};
    j["input_len"] = c.input_len();
    j["params"] = c.params();
  }
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  using namespace detail;
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) throw Error(Errc::parse, "unsupported model format version");
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto& h = j.at("hyper");
    if (kind == ModelKind::mtl) {
      MtlModel m;
      m.options.alpha = h.at("alpha");
      m.options.beta = h.at("beta");
      m.options.gamma = h.at("gamma");
      m.options.fit_intercept = h.at("fit_intercept");
      m.options.tolerance = h.at("tolerance");
      m.options.max_iterations = h.at("max_iterations");
      m.W = matrix_from(j.at("W"));
      m.bias = vec_from(j.at("bias"));
      m.graph = TaskGraph::from_edges(static_cast<int>(m.W.cols()), j.at("edges").get<std::vector<std::pair<int, int>>>());
      if (m.W.cols() == 4) m.graph.tasks.assign(kAllQuadrants.begin(), kAllQuadrants.end());
      m.calibration_slope = j.at("calibration_slope");
      m.objective_history = j.at("objective_history").get<std::vector<double>>();
      return m;
    }
    if (kind == ModelKind::cnn) {
      CnnConfig cfg;
      cfg.conv_filters = h.at("conv_filters");
      cfg.kernel_width = h.at("kernel_width");
      cfg.fc_units = h.at("fc_units");
      cfg.learning_rate = h.at("learning_rate");
      cfg.momentum = h.at("momentum");
      cfg.weight_decay = h.at("weight_decay");
      cfg.dropout = h.at("dropout");
      cfg.max_epochs = h.at("max_epochs");
      cfg.patience = h.at("patience");
      cfg.batch_size = h.at("batch_size");
      cfg.validation_fraction = h.at("validation_fraction");
      cfg.seed = h.at("seed");
      CnnModel c(j.at("input_len").get<Eigen::Index>(), cfg);
      auto p = j.at("params").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(p.size()) != c.param_count()) throw Error(Errc::parse, "CNN parameter count mismatch");
      c.params() = std::move(p);
      return c;
    }
    ShallowModel s;
    s.kind = to_shallow(kind);
    s.hyper.C = h.at("C");
    s.hyper.gamma = h.at("gamma");
    s.hyper.shrinkage = h.at("shrinkage");
    s.hyper.calibration_folds = h.at("calibration_folds");
    s.hyper.smo_tolerance = h.at("smo_tolerance");
    s.dims = j.at("dims");
    s.weights = vec_from(j.at("weights"));
    s.bias = j.at("bias");
    s.support = matrix_from(j.at("support"), s.dims);
    s.dual_coef = vec_from(j.at("dual_coef"));
    s.alpha = vec_from(j.at("alpha"));
    s.kkt_gap = j.at("kkt_gap");
    s.calibration = {j.at("calibration").at("A"), j.at("calibration").at("B")};
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("model file: ") + e.what());
  }
}

}  // namespace adaffect::learn
