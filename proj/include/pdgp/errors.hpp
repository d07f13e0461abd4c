#pragma once

#include <stdexcept>
#include <string>

namespace pdgp {

// Error categories, grouped so the CLI can map them onto exit codes:
// data/validation problems, configuration/compatibility problems and
// numerical failures.
enum class errc {
  // data / validation
  missing_file,
  malformed_row,
  empty_recording,
  invalid_label,
  duplicate_window,
  non_monotone_time,
  empty_dataset,
  insufficient_data,
  insufficient_training_data,
  feature_computation_failed,
  // configuration / compatibility
  invalid_spec,
  invalid_config,
  layout_mismatch,
  // numerics
  signal_too_short,
  decomposition_too_deep,
  numerical_breakdown,
};

constexpr const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_file: return "MissingFile";
    case errc::malformed_row: return "MalformedRow";
    case errc::empty_recording: return "EmptyRecording";
    case errc::invalid_label: return "InvalidLabel";
    case errc::duplicate_window: return "DuplicateWindow";
    case errc::non_monotone_time: return "NonMonotoneTime";
    case errc::empty_dataset: return "EmptyDataset";
    case errc::insufficient_data: return "InsufficientData";
    case errc::insufficient_training_data: return "InsufficientTrainingData";
    case errc::feature_computation_failed: return "FeatureComputationFailed";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::invalid_config: return "InvalidConfig";
    case errc::layout_mismatch: return "LayoutMismatch";
    case errc::signal_too_short: return "SignalTooShort";
    case errc::decomposition_too_deep: return "DecompositionTooDeep";
    case errc::numerical_breakdown: return "NumericalBreakdown";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

  // Process exit code convention: 1 data/validation, 2 config/compatibility,
  // 3 numerical failure.
  int exit_code() const noexcept {
    switch (code_) {
      case errc::invalid_spec:
      case errc::invalid_config:
      case errc::layout_mismatch:
        return 2;
      case errc::signal_too_short:
      case errc::decomposition_too_deep:
      case errc::numerical_breakdown:
        return 3;
      default:
        return 1;
    }
  }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace pdgp
