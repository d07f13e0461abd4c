#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pdgp/errors.hpp"

namespace pdgp {

// Sensor ranges of the wrist-worn device: +/-8 G accelerometer, +/-1000 dps
// gyroscope. Parsed values are clamped to these limits.
constexpr double kAccelRangeG = 8.0;
constexpr double kGyroRangeDps = 1000.0;

constexpr double kDefaultSampleRateHz = 60.0;
constexpr double kWindowSeconds = 60.0;

// A window must contain at least this fraction of the nominal per-minute
// sample count (10% of 60 Hz * 60 s = 360 samples) to be usable.
constexpr double kMinSampleFraction = 0.10;

enum class PdClass { balanced, tremor, bradykinesia, dyskinesia };
enum class Activity { sitting, walking, standing, lying, other };

// The two second-layer models. Used wherever "per model kind" appears.
enum class ModelKind { tremor, bradykinesia, dyskinesia };

inline const char* to_string(PdClass c) {
  switch (c) {
    case PdClass::balanced: return "balanced";
    case PdClass::tremor: return "tremor";
    case PdClass::bradykinesia: return "bradykinesia";
    case PdClass::dyskinesia: return "dyskinesia";
  }
  return "?";
}

inline const char* to_string(Activity a) {
  switch (a) {
    case Activity::sitting: return "sitting";
    case Activity::walking: return "walking";
    case Activity::standing: return "standing";
    case Activity::lying: return "lying";
    case Activity::other: return "other";
  }
  return "?";
}

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::tremor: return "tremor";
    case ModelKind::bradykinesia: return "bradykinesia";
    case ModelKind::dyskinesia: return "dyskinesia";
  }
  return "?";
}

inline PdClass pd_class_from_string(const std::string& s) {
  if (s == "balanced") return PdClass::balanced;
  if (s == "tremor") return PdClass::tremor;
  if (s == "bradykinesia") return PdClass::bradykinesia;
  if (s == "dyskinesia") return PdClass::dyskinesia;
  fail(errc::invalid_label, "unknown pd_class token '" + s + "'");
}

inline Activity activity_from_string(const std::string& s) {
  if (s == "sitting") return Activity::sitting;
  if (s == "walking") return Activity::walking;
  if (s == "standing") return Activity::standing;
  if (s == "lying") return Activity::lying;
  if (s == "other") return Activity::other;
  fail(errc::invalid_label, "unknown activity token '" + s + "'");
}

inline PdClass pd_class_of(ModelKind k) {
  switch (k) {
    case ModelKind::tremor: return PdClass::tremor;
    case ModelKind::bradykinesia: return PdClass::bradykinesia;
    case ModelKind::dyskinesia: return PdClass::dyskinesia;
  }
  return PdClass::balanced;
}

constexpr int kNumActivities = 5;
constexpr Activity kAllActivities[kNumActivities] = {
    Activity::sitting, Activity::walking, Activity::standing, Activity::lying, Activity::other};

// One 6-axis inertial sample. t is seconds since recording start,
// accelerations in G, angular rates in degrees per second.
struct ImuSample {
  double t = 0.0;
  double ax = 0.0, ay = 0.0, az = 0.0;
  double gx = 0.0, gy = 0.0, gz = 0.0;
};

struct ImuRecording {
  std::string subject_id;
  double nominal_rate_hz = kDefaultSampleRateHz;
  std::vector<ImuSample> samples;  // sorted strictly ascending in t
};

// Per-minute expert label. pd_class == balanced iff severity == 0.
struct Annotation {
  long window_index = 0;
  PdClass pd_class = PdClass::balanced;
  int severity = 0;  // 0..4
  Activity activity = Activity::sitting;
};

inline void validate(const Annotation& a, const std::string& where) {
  if (a.window_index < 0) fail(errc::invalid_label, "negative window_index at " + where);
  if (a.severity < 0 || a.severity > 4)
    fail(errc::invalid_label, "severity out of range 0..4 at " + where);
  const bool balanced = a.pd_class == PdClass::balanced;
  if (balanced != (a.severity == 0))
    fail(errc::invalid_label, "pd_class/severity mismatch (balanced <=> severity 0) at " + where);
}

struct AnnotationSequence {
  std::string subject_id;
  std::vector<Annotation> annotations;  // unique window_index, ascending
};

// A uniformly sampled scalar signal. Length >= 1, all values finite.
struct ScalarSignal {
  std::vector<double> values;
  double rate_hz = kDefaultSampleRateHz;

  size_t size() const { return values.size(); }
};

inline ScalarSignal vector_norm(const ScalarSignal& x, const ScalarSignal& y,
                                const ScalarSignal& z) {
  if (x.size() != y.size() || x.size() != z.size())
    fail(errc::invalid_spec, "vector_norm: axis length mismatch");
  ScalarSignal out;
  out.rate_hz = x.rate_hz;
  out.values.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out.values[i] =
        std::sqrt(x.values[i] * x.values[i] + y.values[i] * y.values[i] + z.values[i] * z.values[i]);
  }
  return out;
}

}  // namespace pdgp
