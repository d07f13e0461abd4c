#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "pdgp/errors.hpp"
#include "pdgp/types.hpp"

namespace pdgp {

namespace fft_detail {

using cplx = std::complex<double>;

inline bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 transform; inverse includes the 1/n factor.
inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  if (n <= 1) return;
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

// Chirp factor exp(sign * i*pi*j^2/n) with the phase reduced mod 2n so the
// argument stays small regardless of j.
inline cplx chirp(size_t j, size_t n, double sign) {
  const unsigned long long r = (static_cast<unsigned long long>(j) * j) %
                               (2ull * static_cast<unsigned long long>(n));
  const double ang = sign * M_PI * static_cast<double>(r) / static_cast<double>(n);
  return {std::cos(ang), std::sin(ang)};
}

// Bluestein's algorithm: re-expresses a length-n DFT as a circular
// convolution carried by power-of-two transforms, valid for any n.
inline void fft_bluestein(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  const size_t m = next_pow2(2 * n - 1);
  std::vector<cplx> u(m, cplx(0.0, 0.0)), v(m, cplx(0.0, 0.0));
  for (size_t j = 0; j < n; ++j) {
    const cplx w = chirp(j, n, sign);
    u[j] = a[j] * w;
    const cplx b = std::conj(w);
    v[j] = b;
    if (j != 0) v[m - j] = b;
  }
  fft_pow2(u, false);
  fft_pow2(v, false);
  for (size_t j = 0; j < m; ++j) u[j] *= v[j];
  fft_pow2(u, true);
  for (size_t k = 0; k < n; ++k) a[k] = u[k] * chirp(k, n, sign);
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

inline void fft(std::vector<cplx>& a, bool inverse) {
  if (is_pow2(a.size()))
    fft_pow2(a, inverse);
  else
    fft_bluestein(a, inverse);
}

}  // namespace fft_detail

// One-sided power spectral density; power is a density (units^2/Hz) so that
// sum(power) * bin width approximates the signal variance.
struct PsdEstimate {
  std::vector<double> freq_hz;
  std::vector<double> power;
  double rate_hz = 0.0;
  int segment_count = 0;

  double bin_width_hz() const {
    return freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 0.0;
  }
};

// Welch-averaged periodogram: Hann-windowed segments, 50% overlap, constant
// detrend per segment, normalized by rate * sum(w^2).
inline PsdEstimate psd(const ScalarSignal& sig, double segment_s) {
  const size_t n = sig.size();
  if (sig.rate_hz <= 0.0) fail(errc::invalid_spec, "sample rate must be positive");
  if (segment_s <= 0.0) fail(errc::invalid_spec, "segment length must be positive");
  const size_t seg = static_cast<size_t>(std::lround(segment_s * sig.rate_hz));
  if (seg < 2) fail(errc::invalid_spec, "segment shorter than two samples");
  if (n < seg)
    fail(errc::signal_too_short, "signal (" + std::to_string(n) +
                                     " samples) shorter than one PSD segment (" +
                                     std::to_string(seg) + ")");

  std::vector<double> window(seg);
  double wsq = 0.0;
  for (size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                      static_cast<double>(seg)));
    wsq += window[i] * window[i];
  }
  const double scale = 1.0 / (sig.rate_hz * wsq);

  const size_t hop = std::max<size_t>(1, seg / 2);
  const size_t bins = seg / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  int segments = 0;
  std::vector<fft_detail::cplx> buf(seg);
  for (size_t start = 0; start + seg <= n; start += hop) {
    double mean = 0.0;
    for (size_t i = 0; i < seg; ++i) mean += sig.values[start + i];
    mean /= static_cast<double>(seg);
    for (size_t i = 0; i < seg; ++i)
      buf[i] = fft_detail::cplx((sig.values[start + i] - mean) * window[i], 0.0);
    fft_detail::fft(buf, false);
    for (size_t k = 0; k < bins; ++k) {
      double p = std::norm(buf[k]) * scale;
      if (k != 0 && !(seg % 2 == 0 && k == bins - 1)) p *= 2.0;  // one-sided fold
      acc[k] += p;
    }
    ++segments;
  }

  PsdEstimate out;
  out.rate_hz = sig.rate_hz;
  out.segment_count = segments;
  out.freq_hz.resize(bins);
  out.power.resize(bins);
  for (size_t k = 0; k < bins; ++k) {
    out.freq_hz[k] = static_cast<double>(k) * sig.rate_hz / static_cast<double>(seg);
    out.power[k] = acc[k] / static_cast<double>(segments);
  }
  return out;
}

// Mean PSD value over bins with lo_hz <= f <= hi_hz (0 if the band is empty).
inline double psd_band_mean(const PsdEstimate& est, double lo_hz, double hi_hz) {
  double sum = 0.0;
  size_t count = 0;
  for (size_t k = 0; k < est.freq_hz.size(); ++k) {
    if (est.freq_hz[k] >= lo_hz && est.freq_hz[k] <= hi_hz) {
      sum += est.power[k];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

// Integral of the density over the band (approximates in-band variance).
inline double psd_band_integral(const PsdEstimate& est, double lo_hz, double hi_hz) {
  double sum = 0.0;
  for (size_t k = 0; k < est.freq_hz.size(); ++k)
    if (est.freq_hz[k] >= lo_hz && est.freq_hz[k] <= hi_hz) sum += est.power[k];
  return sum * est.bin_width_hz();
}

}  // namespace pdgp
