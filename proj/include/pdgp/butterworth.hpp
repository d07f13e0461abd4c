#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pdgp/errors.hpp"
#include "pdgp/types.hpp"

namespace pdgp {

// Band-pass design request. Valid iff 0 < lb < ub < rate/2.
struct BandpassSpec {
  double lb_hz = 0.1;
  double ub_hz = 20.0;
  int order = 4;  // prototype order per pass; the band-pass has 2*order poles
};

inline void validate(const BandpassSpec& spec, double rate_hz) {
  if (spec.order < 1 || spec.order > 12) fail(errc::invalid_spec, "filter order out of range 1..12");
  if (!(spec.lb_hz > 0.0) || !(spec.lb_hz < spec.ub_hz) || !(spec.ub_hz < rate_hz / 2.0))
    fail(errc::invalid_spec, "band edges must satisfy 0 < lb < ub < rate/2");
}

// One biquad, direct form II transposed, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using SosFilter = std::vector<Biquad>;

namespace detail {

inline std::vector<std::complex<double>> butterworth_prototype_poles(int order) {
  std::vector<std::complex<double>> poles;
  poles.reserve(order);
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

struct PolePair {
  std::complex<double> p1, p2;
  bool conjugate = false;  // p2 == conj(p1)
  double angle = 0.0;      // |arg| of the dominant pole, used for zero assignment
};

}  // namespace detail

// Butterworth band-pass designed via the analog prototype, the low-pass to
// band-pass transform and the bilinear transform with edge pre-warping.
// Returned as cascaded biquads with the overall gain folded into the first
// section.
inline SosFilter design_bandpass(const BandpassSpec& spec, double rate_hz) {
  validate(spec, rate_hz);
  using cd = std::complex<double>;
  const double fs2 = 2.0 * rate_hz;
  const double w1 = fs2 * std::tan(std::numbers::pi * spec.lb_hz / rate_hz);
  const double w2 = fs2 * std::tan(std::numbers::pi * spec.ub_hz / rate_hz);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  // Low-pass prototype pole p maps to the two roots of s^2 - p*bw*s + w0^2.
  std::vector<cd> analog_poles;
  analog_poles.reserve(2 * spec.order);
  for (const cd& p : detail::butterworth_prototype_poles(spec.order)) {
    const cd pb = p * bw * 0.5;
    const cd disc = std::sqrt(pb * pb - cd(w0 * w0, 0.0));
    analog_poles.push_back(pb + disc);
    analog_poles.push_back(pb - disc);
  }

  // Bilinear transform. Analog zeros are `order` zeros at s=0 plus `order`
  // zeros at infinity, which land at z=+1 and z=-1 respectively.
  std::vector<cd> digital_poles;
  digital_poles.reserve(analog_poles.size());
  cd denom(1.0, 0.0);
  for (const cd& s : analog_poles) {
    digital_poles.push_back((cd(fs2, 0.0) + s) / (cd(fs2, 0.0) - s));
    denom *= (cd(fs2, 0.0) - s);
  }
  const double gain = std::pow(bw * fs2, spec.order) / denom.real();

  // Group poles into biquad sections: conjugate pairs, then leftover real
  // poles paired low-with-high.
  const double imag_tol = 1e-10;
  std::vector<detail::PolePair> sections;
  std::vector<double> real_poles;
  for (const cd& p : digital_poles) {
    if (std::abs(p.imag()) < imag_tol) {
      real_poles.push_back(p.real());
    } else if (p.imag() > 0.0) {
      detail::PolePair pp;
      pp.p1 = p;
      pp.p2 = std::conj(p);
      pp.conjugate = true;
      pp.angle = std::abs(std::arg(p));
      sections.push_back(pp);
    }
  }
  // Real poles occur in (low edge, high edge) pairs when the band is wide;
  // pair the smallest with the largest so each biquad straddles the band.
  std::sort(real_poles.begin(), real_poles.end());
  for (size_t lo = 0, hi = real_poles.size(); lo + 1 < hi; ++lo, --hi) {
    detail::PolePair pp;
    pp.p1 = cd(real_poles[lo], 0.0);
    pp.p2 = cd(real_poles[hi - 1], 0.0);
    pp.conjugate = false;
    pp.angle = (std::abs(std::arg(pp.p1)) + std::abs(std::arg(pp.p2))) / 2.0;
    sections.push_back(pp);
  }
  std::sort(sections.begin(), sections.end(),
            [](const detail::PolePair& a, const detail::PolePair& b) { return a.angle < b.angle; });

  // Zeros: `order` at z=+1 belong to the high-pass edge (low-angle sections),
  // `order` at z=-1 to the low-pass edge.
  const double center_angle = 2.0 * std::atan(w0 / fs2);
  int avail_pos = spec.order;
  int avail_neg = spec.order;
  auto take_zero = [&](bool prefer_pos) -> double {
    if (prefer_pos && avail_pos > 0) { --avail_pos; return 1.0; }
    if (!prefer_pos && avail_neg > 0) { --avail_neg; return -1.0; }
    if (avail_pos > 0) { --avail_pos; return 1.0; }
    --avail_neg;
    return -1.0;
  };

  SosFilter sos;
  sos.reserve(sections.size());
  for (const auto& sec : sections) {
    const bool low_side = sec.angle < center_angle;
    const double z1 = take_zero(low_side);
    const double z2 = take_zero(low_side);
    Biquad q;
    q.b0 = 1.0;
    q.b1 = -(z1 + z2);
    q.b2 = z1 * z2;
    if (sec.conjugate) {
      q.a1 = -2.0 * sec.p1.real();
      q.a2 = std::norm(sec.p1);
    } else {
      q.a1 = -(sec.p1.real() + sec.p2.real());
      q.a2 = sec.p1.real() * sec.p2.real();
    }
    sos.push_back(q);
  }

  // Sections ordered with poles closest to the unit circle last; overall gain
  // in the first section.
  std::sort(sos.begin(), sos.end(), [](const Biquad& x, const Biquad& y) { return x.a2 < y.a2; });
  sos.front().b0 *= gain;
  sos.front().b1 *= gain;
  sos.front().b2 *= gain;
  return sos;
}

// Complex response H(e^{j 2 pi f / rate}) of the cascade.
inline std::complex<double> frequency_response(const SosFilter& sos, double freq_hz,
                                               double rate_hz) {
  using cd = std::complex<double>;
  const double w = 2.0 * std::numbers::pi * freq_hz / rate_hz;
  const cd z1 = std::polar(1.0, -w);
  const cd z2 = z1 * z1;
  cd h(1.0, 0.0);
  for (const Biquad& q : sos) {
    h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  }
  return h;
}

namespace detail {

// Steady-state filter state for a unit step input, per section. Scaling these
// by the first input sample suppresses the start-up transient.
inline void step_initial_state(const Biquad& q, double& s1, double& s2) {
  const double a_sum = 1.0 + q.a1 + q.a2;
  const double h1 = (q.b0 + q.b1 + q.b2) / a_sum;
  s2 = q.b2 - q.a2 * h1;
  s1 = q.b1 - q.a1 * h1 + s2;
}

inline double section_dc_gain(const Biquad& q) {
  return (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
}

inline void sosfilt_inplace(const SosFilter& sos, std::vector<double>& x, double x0_scale) {
  double carry_gain = x0_scale;
  for (const Biquad& q : sos) {
    double s1, s2;
    step_initial_state(q, s1, s2);
    s1 *= carry_gain;
    s2 *= carry_gain;
    for (double& v : x) {
      const double y = q.b0 * v + s1;
      s1 = q.b1 * v - q.a1 * y + s2;
      s2 = q.b2 * v - q.a2 * y;
      v = y;
    }
    carry_gain *= section_dc_gain(q);
  }
}

}  // namespace detail

// Zero-phase (forward-backward) application of the cascade. The signal is
// extended at both ends by odd reflection over 3*order samples before
// filtering; the extension is dropped afterwards, so output length equals
// input length.
inline ScalarSignal filtfilt(const SosFilter& sos, const BandpassSpec& spec,
                             const ScalarSignal& sig) {
  const size_t n = sig.size();
  const size_t pad = static_cast<size_t>(3 * spec.order);
  if (n <= 3 * static_cast<size_t>(spec.order))
    fail(errc::signal_too_short, "filtfilt needs more than 3*order samples");

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  const auto& x = sig.values;
  for (size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  detail::sosfilt_inplace(sos, ext, ext.front());
  std::reverse(ext.begin(), ext.end());
  detail::sosfilt_inplace(sos, ext, ext.front());
  std::reverse(ext.begin(), ext.end());

  ScalarSignal out;
  out.rate_hz = sig.rate_hz;
  out.values.assign(ext.begin() + pad, ext.begin() + pad + n);
  return out;
}

// Design-and-filter in one call.
inline ScalarSignal butterworth_bandpass(const ScalarSignal& sig, const BandpassSpec& spec) {
  const SosFilter sos = design_bandpass(spec, sig.rate_hz);
  return filtfilt(sos, spec, sig);
}

}  // namespace pdgp
