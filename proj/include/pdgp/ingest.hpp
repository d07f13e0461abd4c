#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pdgp/errors.hpp"
#include "pdgp/io_util.hpp"
#include "pdgp/types.hpp"

namespace pdgp {

struct ImuParseReport {
  size_t rows = 0;
  size_t clamped_values = 0;
  size_t duplicate_timestamps = 0;
};

// One annotated minute of sensor data, plus the surrounding samples used for
// the 5-minute rest features. Only minutes with >= 360 samples become
// windows, and only such minutes contribute to a context.
struct Window {
  std::string subject_id;
  long window_index = 0;
  std::vector<ImuSample> samples;  // t in [60*k, 60*(k+1))
  std::vector<ImuSample> context;  // qualifying minutes k-2..k+2, concatenated
  Annotation annotation;
};

struct DropReport {
  struct DroppedWindow {
    long window_index = 0;
    size_t sample_count = 0;
  };
  std::string subject_id;
  std::vector<DroppedWindow> dropped;     // annotated minutes with 1..359 samples
  std::vector<long> empty_minutes;        // annotated minutes with no samples at all

  std::string to_json() const {
    std::string s = "{\n  \"subject_id\": \"" + subject_id + "\",\n  \"dropped\": [";
    for (size_t i = 0; i < dropped.size(); ++i) {
      s += i ? ",\n    " : "\n    ";
      s += "{\"window_index\": " + std::to_string(dropped[i].window_index) +
           ", \"sample_count\": " + std::to_string(dropped[i].sample_count) + "}";
    }
    s += dropped.empty() ? "],\n" : "\n  ],\n";
    s += "  \"empty_minutes\": [";
    for (size_t i = 0; i < empty_minutes.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(empty_minutes[i]);
    }
    s += "]\n}\n";
    return s;
  }
};

// Reads `t,ax,ay,az,gx,gy,gz` rows, clamps values to the sensor ranges and
// returns samples sorted by t with exact-duplicate timestamps removed
// (first occurrence wins).
inline ImuRecording parse_imu_csv(const std::filesystem::path& path, const std::string& subject_id,
                                  ImuParseReport* report = nullptr) {
  const std::string text = read_text_file(path);
  ImuRecording rec;
  rec.subject_id = subject_id;
  ImuParseReport local;

  size_t pos = 0;
  size_t line_no = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!saw_header) {
      if (split_csv_line(line) != std::vector<std::string>{"t", "ax", "ay", "az", "gx", "gy", "gz"})
        fail(errc::malformed_row, path.string() + ":1 expected header t,ax,ay,az,gx,gy,gz");
      saw_header = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 7) fail(errc::malformed_row, where + " expected 7 columns");
    ImuSample s;
    s.t = parse_double_strict(cells[0], where);
    double* fields[6] = {&s.ax, &s.ay, &s.az, &s.gx, &s.gy, &s.gz};
    for (int i = 0; i < 6; ++i) {
      double v = parse_double_strict(cells[size_t(i) + 1], where);
      const double range = i < 3 ? kAccelRangeG : kGyroRangeDps;
      if (v > range || v < -range) {
        v = std::clamp(v, -range, range);
        ++local.clamped_values;
      }
      *fields[i] = v;
    }
    if (!std::isfinite(s.t)) fail(errc::malformed_row, where + " non-finite timestamp");
    rec.samples.push_back(s);
    ++local.rows;
  }
  if (!saw_header) fail(errc::malformed_row, path.string() + " missing header row");
  if (rec.samples.empty()) fail(errc::empty_recording, path.string() + " has a header but no rows");

  std::stable_sort(rec.samples.begin(), rec.samples.end(),
                   [](const ImuSample& a, const ImuSample& b) { return a.t < b.t; });
  auto last = std::unique(rec.samples.begin(), rec.samples.end(),
                          [](const ImuSample& a, const ImuSample& b) { return a.t == b.t; });
  local.duplicate_timestamps = static_cast<size_t>(rec.samples.end() - last);
  rec.samples.erase(last, rec.samples.end());
  for (size_t i = 1; i < rec.samples.size(); ++i)
    if (!(rec.samples[i - 1].t < rec.samples[i].t))
      fail(errc::non_monotone_time, path.string() + " timestamps not strictly increasing");

  if (report) *report = local;
  return rec;
}

// Reads `window_index,pd_class,severity,activity` rows into a validated,
// index-sorted sequence.
inline AnnotationSequence parse_annotations_csv(const std::filesystem::path& path,
                                                const std::string& subject_id) {
  const std::string text = read_text_file(path);
  AnnotationSequence seq;
  seq.subject_id = subject_id;

  size_t pos = 0;
  size_t line_no = 0;
  bool saw_header = false;
  std::set<long> seen;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!saw_header) {
      if (split_csv_line(line) !=
          std::vector<std::string>{"window_index", "pd_class", "severity", "activity"})
        fail(errc::malformed_row,
             path.string() + ":1 expected header window_index,pd_class,severity,activity");
      saw_header = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 4) fail(errc::malformed_row, where + " expected 4 columns");
    Annotation a;
    a.window_index = parse_long_strict(cells[0], where);
    a.pd_class = pd_class_from_string(cells[1]);
    a.severity = static_cast<int>(parse_long_strict(cells[2], where));
    a.activity = activity_from_string(cells[3]);
    validate(a, where);
    if (!seen.insert(a.window_index).second)
      fail(errc::duplicate_window,
           where + " window_index " + std::to_string(a.window_index) + " appears twice");
    seq.annotations.push_back(a);
  }
  if (!saw_header) fail(errc::malformed_row, path.string() + " missing header row");
  std::sort(seq.annotations.begin(), seq.annotations.end(),
            [](const Annotation& a, const Annotation& b) { return a.window_index < b.window_index; });
  return seq;
}

// Minimum samples for a usable minute: 10% of the nominal 60 Hz * 60 s.
inline size_t min_samples_per_window(double nominal_rate_hz) {
  return static_cast<size_t>(
      std::lround(kMinSampleFraction * nominal_rate_hz * kWindowSeconds));
}

// Builds one Window per annotated minute that passes the sample-count rule.
// The context of window k holds the samples of every minute in k-2..k+2
// (clamped at the recording edges) that itself passes the rule, whether or
// not that minute is annotated.
inline std::vector<Window> build_windows(const ImuRecording& rec, const AnnotationSequence& ann,
                                         DropReport* drop_report = nullptr) {
  if (rec.subject_id != ann.subject_id)
    fail(errc::invalid_config, "recording subject '" + rec.subject_id +
                                   "' does not match annotation subject '" + ann.subject_id + "'");
  const size_t min_count = min_samples_per_window(rec.nominal_rate_hz);

  // Samples are sorted by t, so each minute is a contiguous range.
  std::map<long, std::pair<size_t, size_t>> minute_spans;  // minute -> [begin, end)
  for (size_t i = 0; i < rec.samples.size();) {
    const long minute = static_cast<long>(std::floor(rec.samples[i].t / kWindowSeconds));
    size_t j = i;
    while (j < rec.samples.size() &&
           static_cast<long>(std::floor(rec.samples[j].t / kWindowSeconds)) == minute)
      ++j;
    minute_spans[minute] = {i, j};
    i = j;
  }
  auto minute_count = [&](long m) -> size_t {
    auto it = minute_spans.find(m);
    return it == minute_spans.end() ? 0 : it->second.second - it->second.first;
  };

  DropReport report;
  report.subject_id = rec.subject_id;
  std::vector<Window> out;
  for (const Annotation& a : ann.annotations) {
    const size_t count = minute_count(a.window_index);
    if (count == 0) {
      report.empty_minutes.push_back(a.window_index);
      continue;
    }
    if (count < min_count) {
      report.dropped.push_back({a.window_index, count});
      continue;
    }
    Window w;
    w.subject_id = rec.subject_id;
    w.window_index = a.window_index;
    w.annotation = a;
    const auto span = minute_spans.at(a.window_index);
    w.samples.assign(rec.samples.begin() + static_cast<long>(span.first),
                     rec.samples.begin() + static_cast<long>(span.second));
    for (long m = a.window_index - 2; m <= a.window_index + 2; ++m) {
      if (m < 0 || minute_count(m) < min_count) continue;
      const auto cspan = minute_spans.at(m);
      w.context.insert(w.context.end(), rec.samples.begin() + static_cast<long>(cspan.first),
                       rec.samples.begin() + static_cast<long>(cspan.second));
    }
    out.push_back(std::move(w));
  }
  if (out.empty())
    fail(errc::empty_dataset, "no annotated minute of subject '" + rec.subject_id +
                                  "' satisfies the " + std::to_string(min_count) + "-sample rule");
  if (drop_report) *drop_report = report;
  return out;
}

}  // namespace pdgp
