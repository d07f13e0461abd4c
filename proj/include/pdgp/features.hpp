#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "pdgp/butterworth.hpp"
#include "pdgp/errors.hpp"
#include "pdgp/ingest.hpp"
#include "pdgp/io_util.hpp"
#include "pdgp/spectrum.hpp"
#include "pdgp/types.hpp"
#include "pdgp/wavelet.hpp"

namespace pdgp {

enum class Sensor { acc, gyr };
enum class Band { raw, level1, level3, level5, level7, level9 };
enum class Stat { std_dev, norm, max, rms, kurtosis, skewness, d_std, d_norm, d_rms };

inline const char* to_string(Sensor s) { return s == Sensor::acc ? "acc" : "gyr"; }

inline const char* to_string(Band b) {
  switch (b) {
    case Band::raw: return "raw";
    case Band::level1: return "level1";
    case Band::level3: return "level3";
    case Band::level5: return "level5";
    case Band::level7: return "level7";
    case Band::level9: return "level9";
  }
  return "?";
}

inline const char* to_string(Stat s) {
  switch (s) {
    case Stat::std_dev: return "std";
    case Stat::norm: return "norm";
    case Stat::max: return "max";
    case Stat::rms: return "rms";
    case Stat::kurtosis: return "kurtosis";
    case Stat::skewness: return "skewness";
    case Stat::d_std: return "d_std";
    case Stat::d_norm: return "d_norm";
    case Stat::d_rms: return "d_rms";
  }
  return "?";
}

// Rest thresholds in sensor units: G for the accelerometer norm, dps for the
// gyroscope norm.
struct RestThresholds {
  std::array<double, 5> acc{0.10, 0.15, 0.20, 0.25, 0.30};
  std::array<double, 5> gyr{1.00, 1.25, 1.50, 1.75, 2.00};

  const std::array<double, 5>& of(Sensor s) const { return s == Sensor::acc ? acc : gyr; }
};

// Canonical index map of the 132-entry feature vector:
//   [0..107]   sensor x band x statistic (2 x 6 x 9)
//   [108..127] rest fractions: sensor x 5 thresholds x {1min, 5min}
//   [128..131] spectral peak features: sensor x {peak_power, mean_power_at_peak}
struct FeatureLayout {
  static constexpr int kSensors = 2;
  static constexpr int kBands = 6;
  static constexpr int kStats = 9;
  static constexpr int kThresholds = 5;
  static constexpr int kBandBlock = kSensors * kBands * kStats;          // 108
  static constexpr int kRestBlock = kSensors * kThresholds * 2;          // 20
  static constexpr int kSpectralBlock = kSensors * 2;                    // 4
  static constexpr int kTotal = kBandBlock + kRestBlock + kSpectralBlock;  // 132
  static constexpr const char* kVersion = "132/raw-band/v1";

  static int index(Sensor sensor, Band band, Stat stat) {
    return static_cast<int>(sensor) * kBands * kStats + static_cast<int>(band) * kStats +
           static_cast<int>(stat);
  }
  static int rest_index(Sensor sensor, int threshold, bool five_minute) {
    return kBandBlock + static_cast<int>(sensor) * kThresholds * 2 + threshold * 2 +
           (five_minute ? 1 : 0);
  }
  static int spectral_index(Sensor sensor, bool mean_at_peak) {
    return kBandBlock + kRestBlock + static_cast<int>(sensor) * 2 + (mean_at_peak ? 1 : 0);
  }

  static std::vector<std::string> names() {
    std::vector<std::string> out(kTotal);
    const RestThresholds thresholds;
    for (int s = 0; s < kSensors; ++s) {
      const Sensor sensor = static_cast<Sensor>(s);
      for (int b = 0; b < kBands; ++b)
        for (int st = 0; st < kStats; ++st)
          out[static_cast<size_t>(index(sensor, static_cast<Band>(b), static_cast<Stat>(st)))] =
              std::string(to_string(sensor)) + "_" + to_string(static_cast<Band>(b)) + "_" +
              to_string(static_cast<Stat>(st));
      for (int t = 0; t < kThresholds; ++t)
        for (int h = 0; h < 2; ++h) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "rest_%s_c%.2f_%s", to_string(sensor),
                        thresholds.of(sensor)[static_cast<size_t>(t)], h ? "5min" : "1min");
          out[static_cast<size_t>(rest_index(sensor, t, h == 1))] = buf;
        }
      out[static_cast<size_t>(spectral_index(sensor, false))] =
          std::string("spec_") + to_string(sensor) + "_peak_power";
      out[static_cast<size_t>(spectral_index(sensor, true))] =
          std::string("spec_") + to_string(sensor) + "_mean_power_at_peak";
    }
    return out;
  }
};

struct FeatureVector {
  std::vector<double> values;  // length FeatureLayout::kTotal
  std::string layout_version = FeatureLayout::kVersion;
};

// --- statistics -------------------------------------------------------------

struct BandStats {
  double std_dev = 0.0;
  double norm = 0.0;
  double max_abs = 0.0;
  double rms = 0.0;
  double kurtosis = 0.0;
  double skewness = 0.0;
  bool zero_variance = false;
};

// Population moments; max is max |value|; kurtosis is the plain (non-excess)
// standardized fourth moment. Zero-variance inputs get kurtosis/skewness 0.
inline BandStats band_statistics(const std::vector<double>& coeffs) {
  const size_t n = coeffs.size();
  if (n < 4)
    fail(errc::insufficient_data,
         "band_statistics needs >= 4 coefficients, got " + std::to_string(n));
  double mean = 0.0, sumsq = 0.0, maxabs = 0.0;
  for (double v : coeffs) {
    mean += v;
    sumsq += v * v;
    maxabs = std::max(maxabs, std::fabs(v));
  }
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : coeffs) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);

  BandStats out;
  out.std_dev = std::sqrt(m2);
  out.norm = std::sqrt(sumsq);
  out.max_abs = maxabs;
  out.rms = std::sqrt(sumsq / static_cast<double>(n));
  if (m2 <= 0.0) {
    out.zero_variance = true;
  } else {
    out.kurtosis = m4 / (m2 * m2);
    out.skewness = m3 / (m2 * std::sqrt(m2));
  }
  return out;
}

struct DiffStats {
  double std_dev = 0.0;
  double norm = 0.0;
  double rms = 0.0;
};

// Statistics of the first forward difference (index-wise, no dt scaling).
inline DiffStats diff_statistics(const std::vector<double>& coeffs) {
  const size_t n = coeffs.size();
  if (n < 2)
    fail(errc::insufficient_data, "diff_statistics needs >= 2 coefficients");
  const size_t m = n - 1;
  double mean = 0.0, sumsq = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double d = coeffs[i + 1] - coeffs[i];
    mean += d;
    sumsq += d * d;
  }
  mean /= static_cast<double>(m);
  double m2 = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double d = coeffs[i + 1] - coeffs[i] - mean;
    m2 += d * d;
  }
  m2 /= static_cast<double>(m);
  DiffStats out;
  out.std_dev = std::sqrt(m2);
  out.norm = std::sqrt(sumsq);
  out.rms = std::sqrt(sumsq / static_cast<double>(m));
  return out;
}

// Logarithmic scaling: all gyroscope band features and the differentiated
// accelerometer features are compressed with ln(v + eps), but only for the
// statistics that are non-negative by construction; kurtosis and skewness
// (signed) pass through.
constexpr double kLogEpsilon = 1e-12;

inline double log_scale(double v, Sensor sensor, Stat stat) {
  const bool nonneg = stat != Stat::kurtosis && stat != Stat::skewness;
  const bool differentiated = stat == Stat::d_std || stat == Stat::d_norm || stat == Stat::d_rms;
  const bool in_log_set = sensor == Sensor::gyr || differentiated;
  return (in_log_set && nonneg) ? std::log(v + kLogEpsilon) : v;
}

// Fraction of samples strictly below the threshold.
inline double rest_fraction(const ScalarSignal& sig, double c) {
  if (sig.size() == 0) fail(errc::insufficient_data, "rest_fraction on empty signal");
  if (c <= 0.0) fail(errc::invalid_spec, "rest threshold must be positive");
  size_t below = 0;
  for (double v : sig.values)
    if (v < c) ++below;
  return static_cast<double>(below) / static_cast<double>(sig.size());
}

// --- spectral peak features --------------------------------------------------

struct SpectralPeakConfig {
  BandpassSpec band{0.2, 4.0, 4};
  double segment_s = 4.0;
  double neighborhood_hz = 0.25;
};

// Peak PSD value and the mean PSD within +/- neighborhood_hz of the peak,
// computed on the norm of the 0.2-4 Hz band-passed raw axes.
inline std::pair<double, double> spectral_peak_features(const ScalarSignal& x,
                                                        const ScalarSignal& y,
                                                        const ScalarSignal& z,
                                                        const SpectralPeakConfig& cfg = {}) {
  const ScalarSignal fx = butterworth_bandpass(x, cfg.band);
  const ScalarSignal fy = butterworth_bandpass(y, cfg.band);
  const ScalarSignal fz = butterworth_bandpass(z, cfg.band);
  const ScalarSignal mag = vector_norm(fx, fy, fz);
  const PsdEstimate est = psd(mag, cfg.segment_s);

  size_t argmax = 0;
  bool any_power = false;
  for (size_t k = 0; k < est.power.size(); ++k) {
    if (est.power[k] > 0.0) any_power = true;
    if (est.power[k] > est.power[argmax]) argmax = k;
  }
  if (!any_power) return {0.0, 0.0};

  const double f0 = est.freq_hz[argmax];
  double sum = 0.0;
  size_t count = 0;
  for (size_t k = 0; k < est.power.size(); ++k) {
    if (std::fabs(est.freq_hz[k] - f0) <= cfg.neighborhood_hz + 1e-12) {
      sum += est.power[k];
      ++count;
    }
  }
  return {est.power[argmax], sum / static_cast<double>(count)};
}

// --- full vector --------------------------------------------------------------

struct FeatureConfig {
  BandpassSpec band{0.1, 20.0, 4};
  int wavelet_level = 9;
  RestThresholds rest;
  SpectralPeakConfig spectral;
};

namespace detail {

struct AxisTriple {
  ScalarSignal x, y, z;
};

inline AxisTriple extract_axes(const std::vector<ImuSample>& samples, Sensor sensor,
                               double rate_hz) {
  AxisTriple out;
  out.x.rate_hz = out.y.rate_hz = out.z.rate_hz = rate_hz;
  out.x.values.reserve(samples.size());
  out.y.values.reserve(samples.size());
  out.z.values.reserve(samples.size());
  for (const ImuSample& s : samples) {
    out.x.values.push_back(sensor == Sensor::acc ? s.ax : s.gx);
    out.y.values.push_back(sensor == Sensor::acc ? s.ay : s.gy);
    out.z.values.push_back(sensor == Sensor::acc ? s.az : s.gz);
  }
  return out;
}

// 0.1-20 Hz per-axis filter, then the vector norm.
inline ScalarSignal processed_norm(const std::vector<ImuSample>& samples, Sensor sensor,
                                   double rate_hz, const BandpassSpec& band) {
  const AxisTriple axes = extract_axes(samples, sensor, rate_hz);
  return vector_norm(butterworth_bandpass(axes.x, band), butterworth_bandpass(axes.y, band),
                     butterworth_bandpass(axes.z, band));
}

}  // namespace detail

// Assembles the 132-entry vector for one window (see FeatureLayout).
inline FeatureVector build_feature_vector(const Window& w, const FeatureConfig& cfg = {},
                                          double rate_hz = kDefaultSampleRateHz) {
  FeatureVector fv;
  fv.values.assign(FeatureLayout::kTotal, 0.0);

  static constexpr Band kBands[FeatureLayout::kBands] = {Band::raw,    Band::level1, Band::level3,
                                                         Band::level5, Band::level7, Band::level9};

  for (Sensor sensor : {Sensor::acc, Sensor::gyr}) {
    const ScalarSignal delta = detail::processed_norm(w.samples, sensor, rate_hz, cfg.band);
    const WaveletDecomposition dec =
        dwt_db3(delta, cfg.wavelet_level, WaveletBoundary::symmetric);

    for (int b = 0; b < FeatureLayout::kBands; ++b) {
      const Band band = kBands[b];
      const std::vector<double>& coeffs =
          band == Band::raw ? delta.values
                            : dec.detail(2 * (b - 1) + 1);  // level1,3,5,7,9
      const BandStats bs = band_statistics(coeffs);
      const DiffStats ds = diff_statistics(coeffs);
      auto put = [&](Stat stat, double v) {
        fv.values[static_cast<size_t>(FeatureLayout::index(sensor, band, stat))] =
            log_scale(v, sensor, stat);
      };
      put(Stat::std_dev, bs.std_dev);
      put(Stat::norm, bs.norm);
      put(Stat::max, bs.max_abs);
      put(Stat::rms, bs.rms);
      put(Stat::kurtosis, bs.kurtosis);
      put(Stat::skewness, bs.skewness);
      put(Stat::d_std, ds.std_dev);
      put(Stat::d_norm, ds.norm);
      put(Stat::d_rms, ds.rms);
    }

    const ScalarSignal context_delta =
        detail::processed_norm(w.context.empty() ? w.samples : w.context, sensor, rate_hz,
                               cfg.band);
    for (int t = 0; t < FeatureLayout::kThresholds; ++t) {
      const double c = cfg.rest.of(sensor)[static_cast<size_t>(t)];
      fv.values[static_cast<size_t>(FeatureLayout::rest_index(sensor, t, false))] =
          rest_fraction(delta, c);
      fv.values[static_cast<size_t>(FeatureLayout::rest_index(sensor, t, true))] =
          rest_fraction(context_delta, c);
    }

    const detail::AxisTriple raw = detail::extract_axes(w.samples, sensor, rate_hz);
    const auto [peak, mean_at_peak] = spectral_peak_features(raw.x, raw.y, raw.z, cfg.spectral);
    fv.values[static_cast<size_t>(FeatureLayout::spectral_index(sensor, false))] = peak;
    fv.values[static_cast<size_t>(FeatureLayout::spectral_index(sensor, true))] = mean_at_peak;
  }

  for (size_t i = 0; i < fv.values.size(); ++i)
    if (!std::isfinite(fv.values[i]))
      fail(errc::feature_computation_failed,
           "non-finite feature at index " + std::to_string(i) + " (" +
               FeatureLayout::names()[i] + ") of window " + std::to_string(w.window_index));
  return fv;
}

// --- per-model reduction -------------------------------------------------------

// Indices kept for each model: the tremor model uses the full vector; the
// dyskinesia model drops the level-1/level-9 blocks of both sensors; the
// bradykinesia model drops level 1 and level 7 (36 entries each).
inline const std::vector<int>& retained_indices(ModelKind kind) {
  static const auto make = [](std::vector<Band> dropped) {
    std::vector<int> keep;
    for (int i = 0; i < FeatureLayout::kTotal; ++i) {
      bool drop = false;
      if (i < FeatureLayout::kBandBlock) {
        const Band band = static_cast<Band>((i / FeatureLayout::kStats) % FeatureLayout::kBands);
        drop = std::find(dropped.begin(), dropped.end(), band) != dropped.end();
      }
      if (!drop) keep.push_back(i);
    }
    return keep;
  };
  static const std::vector<int> full = make({});
  static const std::vector<int> dk = make({Band::level1, Band::level9});
  static const std::vector<int> bk = make({Band::level1, Band::level7});
  switch (kind) {
    case ModelKind::tremor: return full;
    case ModelKind::dyskinesia: return dk;
    case ModelKind::bradykinesia: return bk;
  }
  return full;
}

inline std::vector<double> reduce_features(const FeatureVector& fv, ModelKind kind) {
  if (fv.values.size() != FeatureLayout::kTotal)
    fail(errc::layout_mismatch, "feature vector has " + std::to_string(fv.values.size()) +
                                    " entries, layout expects " +
                                    std::to_string(FeatureLayout::kTotal));
  const auto& keep = retained_indices(kind);
  std::vector<double> out;
  out.reserve(keep.size());
  for (int i : keep) out.push_back(fv.values[static_cast<size_t>(i)]);
  return out;
}

// --- feature store --------------------------------------------------------------

struct FeaturizedWindow {
  std::string subject_id;
  long window_index = 0;
  Annotation annotation;
  FeatureVector features;
};

inline std::string feature_layout_json() {
  const auto names = FeatureLayout::names();
  std::string s = "{\n  \"layout_version\": \"" + std::string(FeatureLayout::kVersion) +
                  "\",\n  \"size\": " + std::to_string(FeatureLayout::kTotal) +
                  ",\n  \"features\": [\n";
  for (size_t i = 0; i < names.size(); ++i) {
    s += "    {\"index\": " + std::to_string(i) + ", \"name\": \"" + names[i] + "\"}";
    s += i + 1 < names.size() ? ",\n" : "\n";
  }
  s += "  ]\n}\n";
  return s;
}

inline std::filesystem::path layout_sidecar_path(const std::filesystem::path& store_path) {
  std::filesystem::path p = store_path;
  p += ".layout.json";
  return p;
}

inline void write_feature_store(const std::filesystem::path& path,
                                const std::vector<FeaturizedWindow>& rows) {
  std::string s = "subject_id,window_index,activity,pd_class,severity";
  for (int i = 0; i < FeatureLayout::kTotal; ++i) s += ",f_" + std::to_string(i);
  s += "\n";
  for (const FeaturizedWindow& r : rows) {
    s += r.subject_id + "," + std::to_string(r.window_index) + "," +
         to_string(r.annotation.activity) + "," + to_string(r.annotation.pd_class) + "," +
         std::to_string(r.annotation.severity);
    for (double v : r.features.values) s += "," + format_double(v);
    s += "\n";
  }
  write_text_file(path, s);
  write_text_file(layout_sidecar_path(path), feature_layout_json());
}

inline std::vector<FeaturizedWindow> read_feature_store(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<FeaturizedWindow> out;
  size_t pos = 0, line_no = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!saw_header) {
      if (cells.size() != 5 + FeatureLayout::kTotal || cells[0] != "subject_id" ||
          cells[5] != "f_0")
        fail(errc::layout_mismatch, where + " unexpected feature store header (wrong layout?)");
      saw_header = true;
      continue;
    }
    if (cells.size() != 5 + FeatureLayout::kTotal)
      fail(errc::malformed_row, where + " expected " +
                                    std::to_string(5 + FeatureLayout::kTotal) + " columns");
    FeaturizedWindow r;
    r.subject_id = cells[0];
    r.window_index = parse_long_strict(cells[1], where);
    r.annotation.window_index = r.window_index;
    r.annotation.activity = activity_from_string(cells[2]);
    r.annotation.pd_class = pd_class_from_string(cells[3]);
    r.annotation.severity = static_cast<int>(parse_long_strict(cells[4], where));
    validate(r.annotation, where);
    r.features.values.resize(FeatureLayout::kTotal);
    for (int i = 0; i < FeatureLayout::kTotal; ++i)
      r.features.values[static_cast<size_t>(i)] =
          parse_double_strict(cells[static_cast<size_t>(i) + 5], where);
    out.push_back(std::move(r));
  }
  if (!saw_header) fail(errc::malformed_row, path.string() + " missing header row");
  return out;
}

}  // namespace pdgp
