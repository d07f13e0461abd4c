#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdgp/gp.hpp"
#include "pdgp/io_util.hpp"

namespace pdgp {

constexpr const char* kGpFormatVersion = "pdgp-gp/1";

inline nlohmann::json gp_to_json(const GpModel& m) {
  const size_t n = static_cast<size_t>(m.size());
  const size_t d = static_cast<size_t>(m.dim());
  std::vector<double> flat(n * d);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j)
      flat[i * d + j] = m.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  std::vector<double> alpha(n);
  for (size_t i = 0; i < n; ++i) alpha[i] = m.alpha[static_cast<Eigen::Index>(i)];

  nlohmann::json j;
  j["format"] = kGpFormatVersion;
  j["theta"] = {{"amplitude", m.theta.amplitude},
                {"length_scale", m.theta.length_scale},
                {"noise", m.theta.noise}};
  j["n"] = n;
  j["d"] = d;
  j["X_b64"] = encode_doubles(flat);      // row-major
  j["alpha_b64"] = encode_doubles(alpha);
  j["meta"] = {{"model_kind", m.meta.model_kind}, {"fold_id", m.meta.fold_id},
               {"n_total", m.meta.n_total},       {"n_used", m.meta.n_used},
               {"iterations", m.meta.iterations}, {"final_nlml", m.meta.final_nlml},
               {"jitter", m.meta.jitter}};
  return j;
}

// The Cholesky factor is not stored: it is recomputed from theta and X on
// load, which reproduces the training-time factor bit for bit (the jitter
// escalation is deterministic).
inline GpModel gp_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || j.value("format", "") != std::string(kGpFormatVersion))
    fail(errc::layout_mismatch,
         where + ": unsupported model format '" + j.value("format", "<missing>") + "'");
  GpModel m;
  try {
    m.theta.amplitude = j.at("theta").at("amplitude").get<double>();
    m.theta.length_scale = j.at("theta").at("length_scale").get<double>();
    m.theta.noise = j.at("theta").at("noise").get<double>();
    const size_t n = j.at("n").get<size_t>();
    const size_t d = j.at("d").get<size_t>();
    const std::vector<double> flat = decode_doubles(j.at("X_b64").get<std::string>(), n * d);
    const std::vector<double> alpha = decode_doubles(j.at("alpha_b64").get<std::string>(), n);
    m.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (size_t i = 0; i < n; ++i)
      for (size_t jj = 0; jj < d; ++jj)
        m.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) = flat[i * d + jj];
    m.alpha.resize(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) m.alpha[static_cast<Eigen::Index>(i)] = alpha[i];
    const auto& meta = j.at("meta");
    m.meta.model_kind = meta.value("model_kind", "");
    m.meta.fold_id = meta.value("fold_id", "");
    m.meta.n_total = meta.value("n_total", size_t{0});
    m.meta.n_used = meta.value("n_used", size_t{0});
    m.meta.iterations = meta.value("iterations", 0);
    m.meta.final_nlml = meta.value("final_nlml", 0.0);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_row, where + ": " + e.what());
  }
  if (!m.theta.positive()) fail(errc::malformed_row, where + ": non-positive hyperparameters");

  Eigen::MatrixXd K = gram_matrix(m.X, m.theta);
  double jitter = 0.0;
  m.chol = gp_detail::cholesky_with_jitter(K, &jitter).matrixL();
  m.meta.jitter = jitter;
  return m;
}

inline void save_gp(const std::filesystem::path& path, const GpModel& m) {
  write_text_file(path, gp_to_json(m).dump(2) + "\n");
}

inline GpModel load_gp(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_row, path.string() + ": " + e.what());
  }
  return gp_from_json(j, path.string());
}

}  // namespace pdgp
