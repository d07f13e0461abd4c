#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdgp/features.hpp"
#include "pdgp/gp.hpp"
#include "pdgp/gp_io.hpp"
#include "pdgp/types.hpp"

namespace pdgp {

// Initial hyperparameters per model kind. These sit close to the respective
// local optima on raw (unstandardized) feature scales; the huge bradykinesia
// amplitude reflects the unlogged accelerometer feature magnitudes.
inline Hyperparameters default_theta0(ModelKind kind) {
  switch (kind) {
    case ModelKind::tremor: return {96.83, 0.23, 0.50};
    case ModelKind::bradykinesia: return {96302550.0, 826659.0, 0.65};
    case ModelKind::dyskinesia: return {128741.0, 2.26, 0.83};
  }
  return {};
}

// Regression targets on one model's rating scale. For bradykinesia and
// dyskinesia the tremor windows are excluded entirely, so y is aligned to
// the retained subset via `indices` (positions in the input sequence).
struct SeverityTargets {
  ModelKind model_kind = ModelKind::tremor;
  std::vector<double> y;
  std::vector<size_t> indices;
};

inline SeverityTargets build_targets(const std::vector<Annotation>& labels, ModelKind kind) {
  SeverityTargets out;
  out.model_kind = kind;
  for (size_t i = 0; i < labels.size(); ++i) {
    const Annotation& a = labels[i];
    if (kind != ModelKind::tremor && a.pd_class == PdClass::tremor) continue;
    out.indices.push_back(i);
    out.y.push_back(a.pd_class == pd_class_of(kind) ? static_cast<double>(a.severity) : 0.0);
  }
  return out;
}

// Training subset per Fig. 7: balanced windows plus the model's own class.
// Tremor windows never reach the second-layer models.
inline std::vector<size_t> select_training_subset(const std::vector<FeaturizedWindow>& windows,
                                                  ModelKind kind) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < windows.size(); ++i) {
    const PdClass c = windows[i].annotation.pd_class;
    if (c == PdClass::balanced || c == pd_class_of(kind)) idx.push_back(i);
  }
  if (idx.size() < 2)
    fail(errc::insufficient_training_data,
         std::string("training subset for ") + to_string(kind) + " has " +
             std::to_string(idx.size()) + " windows (need >= 2)");
  return idx;
}

struct MultiLayerModel {
  GpModel tremor_gp;        // 132-d input
  GpModel bradykinesia_gp;  // 96-d input
  GpModel dyskinesia_gp;    // 96-d input
  double gate_threshold = 0.5;
  double decision_threshold = 0.5;  // "c-tilde" of the balanced test
  std::string layout_version = FeatureLayout::kVersion;
};

struct Prediction {
  PdClass pd_class = PdClass::balanced;
  int severity = 0;
  double y_tm = 0.0;
  std::optional<double> y_bk;  // absent when the tremor gate fires
  std::optional<double> y_dk;
};

// Nearest integer with ties away from zero, clamped into the rating scale.
inline int round_severity(double yhat) {
  if (!std::isfinite(yhat)) fail(errc::numerical_breakdown, "non-finite severity prediction");
  const long r = std::lround(yhat);
  return static_cast<int>(std::clamp(r, 0l, 4l));
}

// The pure three-layer decision rule, separated from the GPs so it can be
// tested exhaustively. An exact y_BK = y_DK tie goes to dyskinesia.
struct Decision {
  PdClass pd_class = PdClass::balanced;
  int severity = 0;
  bool gate_fired = false;
};

inline Decision decide(double y_tm, double y_bk, double y_dk, double gate_threshold = 0.5,
                       double decision_threshold = 0.5) {
  Decision d;
  if (y_tm >= gate_threshold) {
    d.pd_class = PdClass::tremor;
    d.severity = std::max(1, round_severity(y_tm));
    d.gate_fired = true;
    return d;
  }
  if (y_bk < decision_threshold && y_dk < decision_threshold) {
    d.pd_class = PdClass::balanced;
    d.severity = 0;
    return d;
  }
  if (y_dk >= y_bk) {
    d.pd_class = PdClass::dyskinesia;
    d.severity = std::max(1, round_severity(y_dk));
  } else {
    d.pd_class = PdClass::bradykinesia;
    d.severity = std::max(1, round_severity(y_bk));
  }
  return d;
}

namespace detail {

inline Eigen::MatrixXd feature_matrix(const std::vector<FeaturizedWindow>& windows,
                                      const std::vector<size_t>& idx, ModelKind kind) {
  const auto& keep = retained_indices(kind);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()),
                    static_cast<Eigen::Index>(keep.size()));
  for (size_t r = 0; r < idx.size(); ++r) {
    const std::vector<double> row = reduce_features(windows[idx[r]].features, kind);
    for (size_t c = 0; c < row.size(); ++c)
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return X;
}

inline GpModel train_one(const std::vector<FeaturizedWindow>& windows, ModelKind kind,
                         const Hyperparameters& theta0, const TrainOptions& opts,
                         const std::string& fold_id) {
  const std::vector<size_t> subset = select_training_subset(windows, kind);
  std::vector<Annotation> labels;
  labels.reserve(subset.size());
  for (size_t i : subset) labels.push_back(windows[i].annotation);
  const SeverityTargets targets = build_targets(labels, kind);
  // All tremor windows were already excluded by the subset, so the targets
  // cover the subset one-to-one.
  Eigen::VectorXd y(static_cast<Eigen::Index>(targets.y.size()));
  for (size_t i = 0; i < targets.y.size(); ++i) y[static_cast<Eigen::Index>(i)] = targets.y[i];
  const Eigen::MatrixXd X = feature_matrix(windows, subset, kind);
  GpModel m = train(X, y, theta0, opts);
  m.meta.model_kind = to_string(kind);
  m.meta.fold_id = fold_id;
  return m;
}

}  // namespace detail

struct MultiLayerTrainConfig {
  Hyperparameters theta0_tremor = default_theta0(ModelKind::tremor);
  Hyperparameters theta0_bradykinesia = default_theta0(ModelKind::bradykinesia);
  Hyperparameters theta0_dyskinesia = default_theta0(ModelKind::dyskinesia);
  TrainOptions train;
  double gate_threshold = 0.5;
  double decision_threshold = 0.5;
};

inline MultiLayerModel train_multilayer(const std::vector<FeaturizedWindow>& windows,
                                        const MultiLayerTrainConfig& cfg = {},
                                        const std::string& fold_id = "") {
  std::set<PdClass> classes;
  for (const auto& w : windows) classes.insert(w.annotation.pd_class);
  if (classes.size() < 2)
    fail(errc::insufficient_training_data,
         "training data spans " + std::to_string(classes.size()) + " class(es), need >= 2");
  MultiLayerModel m;
  m.gate_threshold = cfg.gate_threshold;
  m.decision_threshold = cfg.decision_threshold;
  m.tremor_gp =
      detail::train_one(windows, ModelKind::tremor, cfg.theta0_tremor, cfg.train, fold_id);
  m.bradykinesia_gp = detail::train_one(windows, ModelKind::bradykinesia,
                                        cfg.theta0_bradykinesia, cfg.train, fold_id);
  m.dyskinesia_gp =
      detail::train_one(windows, ModelKind::dyskinesia, cfg.theta0_dyskinesia, cfg.train, fold_id);
  return m;
}

struct PredictStats {
  size_t gate_fired = 0;
  size_t layer2_evaluated = 0;
};

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

// Layer 1: tremor gate on the full vector. Layer 2 (only when the gate does
// not fire): bradykinesia/dyskinesia means on their reduced vectors.
// Layer 3: balanced iff both fall below the decision threshold.
inline Prediction predict_window(const MultiLayerModel& m, const FeatureVector& fv,
                                 PredictStats* stats = nullptr) {
  if (fv.layout_version != m.layout_version)
    fail(errc::layout_mismatch, "feature layout '" + fv.layout_version +
                                    "' does not match model layout '" + m.layout_version + "'");
  Prediction p;
  p.y_tm = predict(m.tremor_gp, to_eigen(reduce_features(fv, ModelKind::tremor))).mean;
  if (p.y_tm >= m.gate_threshold) {
    if (stats) ++stats->gate_fired;
    const Decision d = decide(p.y_tm, 0.0, 0.0, m.gate_threshold, m.decision_threshold);
    p.pd_class = d.pd_class;
    p.severity = d.severity;
    return p;
  }
  if (stats) ++stats->layer2_evaluated;
  p.y_bk = predict(m.bradykinesia_gp, to_eigen(reduce_features(fv, ModelKind::bradykinesia))).mean;
  p.y_dk = predict(m.dyskinesia_gp, to_eigen(reduce_features(fv, ModelKind::dyskinesia))).mean;
  const Decision d = decide(p.y_tm, *p.y_bk, *p.y_dk, m.gate_threshold, m.decision_threshold);
  p.pd_class = d.pd_class;
  p.severity = d.severity;
  return p;
}

// --- model bundle directory -------------------------------------------------

inline void save_multilayer(const std::filesystem::path& dir, const MultiLayerModel& m) {
  std::filesystem::create_directories(dir);
  save_gp(dir / "tremor.gp.json", m.tremor_gp);
  save_gp(dir / "bradykinesia.gp.json", m.bradykinesia_gp);
  save_gp(dir / "dyskinesia.gp.json", m.dyskinesia_gp);
  nlohmann::json manifest;
  manifest["format"] = "pdgp-bundle/1";
  manifest["layout_version"] = m.layout_version;
  manifest["gate_threshold"] = m.gate_threshold;
  manifest["decision_threshold"] = m.decision_threshold;
  manifest["models"] = {{"tremor", "tremor.gp.json"},
                        {"bradykinesia", "bradykinesia.gp.json"},
                        {"dyskinesia", "dyskinesia.gp.json"}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline MultiLayerModel load_multilayer(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_row, (dir / "manifest.json").string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "pdgp-bundle/1")
    fail(errc::layout_mismatch, dir.string() + ": unsupported bundle format");
  MultiLayerModel m;
  m.layout_version = manifest.value("layout_version", "");
  m.gate_threshold = manifest.value("gate_threshold", 0.5);
  m.decision_threshold = manifest.value("decision_threshold", 0.5);
  m.tremor_gp = load_gp(dir / manifest["models"].value("tremor", "tremor.gp.json"));
  m.bradykinesia_gp =
      load_gp(dir / manifest["models"].value("bradykinesia", "bradykinesia.gp.json"));
  m.dyskinesia_gp = load_gp(dir / manifest["models"].value("dyskinesia", "dyskinesia.gp.json"));
  const Eigen::Index expect_full = FeatureLayout::kTotal;
  const Eigen::Index expect_reduced =
      static_cast<Eigen::Index>(retained_indices(ModelKind::bradykinesia).size());
  if (m.tremor_gp.dim() != expect_full || m.bradykinesia_gp.dim() != expect_reduced ||
      m.dyskinesia_gp.dim() != expect_reduced)
    fail(errc::layout_mismatch, dir.string() + ": model input dimensions do not match layout '" +
                                    m.layout_version + "'");
  return m;
}

}  // namespace pdgp
