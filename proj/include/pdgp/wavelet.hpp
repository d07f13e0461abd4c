#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pdgp/errors.hpp"
#include "pdgp/types.hpp"

namespace pdgp {

enum class WaveletBoundary {
  symmetric,   // half-sample symmetric extension; production mode
  periodized,  // circular, orthonormal; requires even length per stage
};

// Dyadic decomposition: details[i] holds level i+1, approximation is at the
// deepest level. Level i spans roughly rate/2^(i+1) .. rate/2^i.
struct WaveletDecomposition {
  std::vector<std::vector<double>> details;
  std::vector<double> approximation;
  WaveletBoundary boundary = WaveletBoundary::symmetric;
  size_t input_length = 0;

  int levels() const { return static_cast<int>(details.size()); }
  const std::vector<double>& detail(int level) const { return details.at(level - 1); }
};

namespace db3 {

constexpr int kTaps = 6;

// Daubechies-3 scaling filter in closed form (normalized to sum sqrt(2)):
// h_k = c_k / (16*sqrt(2)) with c = (1+r+q, 5+r+3q, 10-2r+2q, 10-2r-2q,
// 5+r-3q, 1+r-q), r = sqrt(10), q = sqrt(5+2*sqrt(10)).
inline const std::array<double, kTaps>& scaling_filter() {
  static const std::array<double, kTaps> h = [] {
    const double r = std::sqrt(10.0);
    const double q = std::sqrt(5.0 + 2.0 * r);
    const double s = 16.0 * std::sqrt(2.0);
    return std::array<double, kTaps>{
        (1.0 + r + q) / s,       (5.0 + r + 3.0 * q) / s, (10.0 - 2.0 * r + 2.0 * q) / s,
        (10.0 - 2.0 * r - 2.0 * q) / s, (5.0 + r - 3.0 * q) / s, (1.0 + r - q) / s};
  }();
  return h;
}

inline const std::array<double, kTaps>& dec_lo() {
  static const std::array<double, kTaps> f = [] {
    std::array<double, kTaps> out{};
    const auto& h = scaling_filter();
    for (int k = 0; k < kTaps; ++k) out[k] = h[kTaps - 1 - k];
    return out;
  }();
  return f;
}

inline const std::array<double, kTaps>& dec_hi() {
  static const std::array<double, kTaps> f = [] {
    std::array<double, kTaps> out{};
    const auto& h = scaling_filter();
    for (int k = 0; k < kTaps; ++k) out[k] = (k % 2 ? 1.0 : -1.0) * h[k];
    return out;
  }();
  return f;
}

inline const std::array<double, kTaps>& rec_lo() { return scaling_filter(); }

inline const std::array<double, kTaps>& rec_hi() {
  static const std::array<double, kTaps> f = [] {
    std::array<double, kTaps> out{};
    const auto& lo = dec_lo();
    for (int k = 0; k < kTaps; ++k) out[k] = (k % 2 ? -1.0 : 1.0) * lo[k];
    return out;
  }();
  return f;
}

}  // namespace db3

namespace detail {

inline double sym_ext(const std::vector<double>& x, long i) {
  const long n = static_cast<long>(x.size());
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return x[static_cast<size_t>(i)];
}

// One analysis step. Forward alignment constant chosen so that the paired
// synthesis step below reconstructs exactly (see idwt_single).
constexpr long kSymShift = db3::kTaps - 2;  // 4

inline void dwt_single(const std::vector<double>& x, WaveletBoundary mode,
                       std::vector<double>& approx, std::vector<double>& det) {
  const long n = static_cast<long>(x.size());
  const auto& lo = db3::dec_lo();
  const auto& hi = db3::dec_hi();
  if (mode == WaveletBoundary::periodized) {
    // Odd lengths are padded by repeating the last sample, so the circular
    // transform always acts on an even-length stage (exact orthonormality
    // holds whenever no padding is needed, e.g. power-of-two lengths).
    const long np = n + (n % 2);
    const long m = np / 2;
    approx.assign(m, 0.0);
    det.assign(m, 0.0);
    for (long i = 0; i < m; ++i) {
      double a = 0.0, d = 0.0;
      for (int k = 0; k < db3::kTaps; ++k) {
        const long j = (2 * i + k) % np;
        const double v = x[static_cast<size_t>(std::min(j, n - 1))];
        a += lo[k] * v;
        d += hi[k] * v;
      }
      approx[static_cast<size_t>(i)] = a;
      det[static_cast<size_t>(i)] = d;
    }
  } else {
    const long m = (n + db3::kTaps - 1) / 2;
    approx.assign(m, 0.0);
    det.assign(m, 0.0);
    for (long i = 0; i < m; ++i) {
      double a = 0.0, d = 0.0;
      for (int k = 0; k < db3::kTaps; ++k) {
        const double v = sym_ext(x, 2 * i + k - kSymShift);
        a += lo[k] * v;
        d += hi[k] * v;
      }
      approx[static_cast<size_t>(i)] = a;
      det[static_cast<size_t>(i)] = d;
    }
  }
}

// One synthesis step; out_len is the length of the signal this level was
// computed from.
inline std::vector<double> idwt_single(const std::vector<double>& approx,
                                       const std::vector<double>& det, WaveletBoundary mode,
                                       size_t out_len) {
  const long m = static_cast<long>(approx.size());
  std::vector<double> out(out_len, 0.0);
  const auto& dlo = db3::dec_lo();
  const auto& dhi = db3::dec_hi();
  if (mode == WaveletBoundary::periodized) {
    // Exact adjoint of the orthonormal circular analysis; a padded (odd)
    // stage reconstructs the padded signal, truncated back below.
    const long np = 2 * m;
    std::vector<double> padded(static_cast<size_t>(np), 0.0);
    for (long i = 0; i < m; ++i) {
      for (int k = 0; k < db3::kTaps; ++k) {
        const size_t j = static_cast<size_t>((2 * i + k) % np);
        padded[j] += dlo[k] * approx[static_cast<size_t>(i)] + dhi[k] * det[static_cast<size_t>(i)];
      }
    }
    for (size_t j = 0; j < out_len; ++j) out[j] = padded[j];
  } else {
    // Upsample and convolve. Analysis was a correlation with the dec pair,
    // so synthesis reuses the same pair; cropping the kTaps-2 overhang
    // cancels the boundary terms of the symmetric extension exactly.
    const long full_len = 2 * m + db3::kTaps - 2;
    std::vector<double> full(static_cast<size_t>(full_len), 0.0);
    for (long i = 0; i < m; ++i) {
      for (int k = 0; k < db3::kTaps; ++k) {
        full[static_cast<size_t>(2 * i + k)] +=
            dlo[k] * approx[static_cast<size_t>(i)] + dhi[k] * det[static_cast<size_t>(i)];
      }
    }
    const long crop = db3::kTaps - 2;
    for (size_t j = 0; j < out_len; ++j) out[j] = full[static_cast<size_t>(crop) + j];
  }
  return out;
}

}  // namespace detail

// Mallat cascade with db3 analysis filters down to max_level.
inline WaveletDecomposition dwt_db3(const ScalarSignal& sig, int max_level,
                                    WaveletBoundary mode = WaveletBoundary::symmetric) {
  if (max_level < 1) fail(errc::invalid_spec, "max_level must be >= 1");
  const size_t n = sig.size();
  if (n < (size_t(1) << max_level))
    fail(errc::decomposition_too_deep,
         "signal length must be at least 2^max_level for a depth-" + std::to_string(max_level) +
             " decomposition");

  WaveletDecomposition out;
  out.boundary = mode;
  out.input_length = n;
  std::vector<double> current = sig.values;
  for (int level = 1; level <= max_level; ++level) {
    if (current.size() < static_cast<size_t>(db3::kTaps))
      fail(errc::decomposition_too_deep,
           "approximation at level " + std::to_string(level) + " shorter than the filter support");
    std::vector<double> approx, det;
    detail::dwt_single(current, mode, approx, det);
    out.details.push_back(std::move(det));
    current = std::move(approx);
  }
  out.approximation = std::move(current);
  return out;
}

// Inverse of dwt_db3; reconstructs the original samples.
inline std::vector<double> idwt_db3(const WaveletDecomposition& dec) {
  // Recover the per-level lengths from the input length.
  std::vector<size_t> lengths;  // lengths[i] = signal length entering level i+1
  size_t len = dec.input_length;
  for (int level = 0; level < dec.levels(); ++level) {
    lengths.push_back(len);
    len = dec.boundary == WaveletBoundary::periodized
              ? (len + 1) / 2
              : static_cast<size_t>((len + db3::kTaps - 1) / 2);
  }
  std::vector<double> current = dec.approximation;
  for (int level = dec.levels(); level >= 1; --level) {
    current = detail::idwt_single(current, dec.details[static_cast<size_t>(level - 1)],
                                  dec.boundary, lengths[static_cast<size_t>(level - 1)]);
  }
  return current;
}

}  // namespace pdgp
