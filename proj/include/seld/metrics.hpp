// Copyright 2026 The seld-rt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seld/errors.hpp"
#include "seld/inference.hpp"

namespace seld {

using DirectionVector = std::array<double, 3>;

/// Unit direction from azimuth (degrees, (-180, 180], counterclockwise from
/// +x) and elevation (degrees, [-90, 90]).
inline DirectionVector direction_from_angles(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * M_PI / 180.0;
  const double el = elevation_deg * M_PI / 180.0;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

inline double azimuth_deg_of(const DirectionVector& v) {
  double az = std::atan2(v[1], v[0]) * 180.0 / M_PI;
  if (az <= -180.0) az += 360.0;
  return az;
}

inline double elevation_deg_of(const DirectionVector& v) {
  return std::asin(std::clamp(v[2], -1.0, 1.0)) * 180.0 / M_PI;
}

/// Great-circle distance between unit vectors, in degrees. Identical vectors
/// measure exactly zero; the dot product alone would leave rounding residue.
inline double angular_distance_deg(const DirectionVector& u, const DirectionVector& v) {
  const double nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (std::abs(nu - 1.0) > 1e-5 || std::abs(nv - 1.0) > 1e-5) {
    throw NonUnitInput("angular distance needs unit vectors (norms " + std::to_string(nu) +
                       ", " + std::to_string(nv) + ")");
  }
  if (u == v) return 0.0;
  const double dot = std::clamp(u[0] * v[0] + u[1] * v[1] + u[2] * v[2], -1.0, 1.0);
  return std::acos(dot) * 180.0 / M_PI;
}

/// Classwise localized detections on a fixed frame grid (100 ms by default).
struct LabelFrameSet {
  double frame_seconds = 0.1;
  // (frame, class) -> directions active in that frame.
  std::map<std::pair<std::int64_t, int>, std::vector<DirectionVector>> entries;

  void add(std::int64_t frame, int class_id, const DirectionVector& direction) {
    entries[{frame, class_id}].push_back(direction);
  }
};

/// Minimum-total-angle one-to-one assignment between two direction lists for
/// one frame and class.
struct FrameAssignment {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (ref index, pred index)
  std::vector<std::size_t> unmatched_refs;
  std::vector<std::size_t> unmatched_preds;
  double total_angle_deg = 0.0;
};

namespace detail {

// Exhaustive minimum-cost assignment via depth-first enumeration with
// pruning. Fine for the handful of simultaneous same-class sources the
// scoring grid can hold.
inline void enumerate_assignments(const std::vector<std::vector<double>>& cost,
                                  std::size_t ref, std::vector<int>& pred_of_ref,
                                  std::vector<bool>& pred_used, double current,
                                  double& best, std::vector<int>& best_assignment) {
  const std::size_t num_refs = cost.size();
  const std::size_t num_preds = cost.empty() ? 0 : cost[0].size();
  if (ref == num_refs) {
    if (current < best) {
      best = current;
      best_assignment = pred_of_ref;
    }
    return;
  }
  if (current >= best) return;
  for (std::size_t p = 0; p < num_preds; ++p) {
    if (pred_used[p]) continue;
    pred_used[p] = true;
    pred_of_ref[ref] = static_cast<int>(p);
    enumerate_assignments(cost, ref + 1, pred_of_ref, pred_used, current + cost[ref][p], best,
                          best_assignment);
    pred_of_ref[ref] = -1;
    pred_used[p] = false;
  }
  // A ref may stay unmatched only when predictions run out.
  if (num_refs - ref > num_preds - static_cast<std::size_t>(
                                       std::count(pred_used.begin(), pred_used.end(), true))) {
    enumerate_assignments(cost, ref + 1, pred_of_ref, pred_used, current, best,
                          best_assignment);
  }
}

}  // namespace detail

/// Matches references to predictions of one frame/class so the summed
/// angular distance is minimal; leftovers on either side stay unmatched.
inline FrameAssignment match_frame(const std::vector<DirectionVector>& refs,
                                   const std::vector<DirectionVector>& preds) {
  FrameAssignment result;
  if (refs.empty() || preds.empty()) {
    for (std::size_t r = 0; r < refs.size(); ++r) result.unmatched_refs.push_back(r);
    for (std::size_t p = 0; p < preds.size(); ++p) result.unmatched_preds.push_back(p);
    return result;
  }
  if (std::min(refs.size(), preds.size()) > 9) {
    throw SeldError("too many simultaneous same-class sources to match (" +
                    std::to_string(refs.size()) + " refs, " + std::to_string(preds.size()) +
                    " preds)");
  }

  std::vector<std::vector<double>> cost(refs.size(), std::vector<double>(preds.size()));
  for (std::size_t r = 0; r < refs.size(); ++r) {
    for (std::size_t p = 0; p < preds.size(); ++p) {
      cost[r][p] = angular_distance_deg(refs[r], preds[p]);
    }
  }

  std::vector<int> pred_of_ref(refs.size(), -1), best_assignment(refs.size(), -1);
  std::vector<bool> pred_used(preds.size(), false);
  double best = std::numeric_limits<double>::infinity();
  detail::enumerate_assignments(cost, 0, pred_of_ref, pred_used, 0.0, best, best_assignment);

  std::vector<bool> matched_pred(preds.size(), false);
  for (std::size_t r = 0; r < refs.size(); ++r) {
    if (best_assignment[r] >= 0) {
      const auto p = static_cast<std::size_t>(best_assignment[r]);
      result.matches.emplace_back(r, p);
      result.total_angle_deg += cost[r][p];
      matched_pred[p] = true;
    } else {
      result.unmatched_refs.push_back(r);
    }
  }
  for (std::size_t p = 0; p < preds.size(); ++p) {
    if (!matched_pred[p]) result.unmatched_preds.push_back(p);
  }
  return result;
}

/// Localization error for one class. Classes that never match any prediction
/// have no measurable angle; by convention they score the worst possible
/// 180 degrees so they still weigh into the macro average.
inline double localization_error_for_class(double angle_sum_deg, std::uint64_t matched_pairs) {
  return matched_pairs == 0 ? 180.0 : angle_sum_deg / static_cast<double>(matched_pairs);
}

/// Aggregated error: mean of error rate, miss rate, normalized localization
/// error, and localization miss rate.
inline double aggregate_e_seld(double er, double f1, double le_deg, double lr) {
  if (er < 0.0 || f1 < 0.0 || f1 > 1.0 || le_deg < 0.0 || le_deg > 180.0 || lr < 0.0 ||
      lr > 1.0) {
    throw RangeViolation("metric out of range: er=" + std::to_string(er) +
                         " f1=" + std::to_string(f1) + " le=" + std::to_string(le_deg) +
                         " lr=" + std::to_string(lr));
  }
  return (er + (1.0 - f1) + le_deg / 180.0 + (1.0 - lr)) / 4.0;
}

/// Location-dependent detection and localization scores.
struct MetricsReport {
  double er = 0.0;      // location-dependent error rate
  double f1 = 0.0;      // location-dependent F-score
  double le_deg = 0.0;  // class-dependent localization error (degrees)
  double lr = 0.0;      // class-dependent localization recall
  double e_seld = 0.0;  // aggregate of the four
};

/// Scores predictions against references on a shared frame grid.
///
/// Per class and frame, references and predictions are matched by minimum
/// total angle. Matched pairs within the spatial threshold are true
/// positives; matched pairs beyond it count as one false positive plus one
/// false negative; leftovers are misses / false alarms. The localization
/// error averages angles over all matched pairs regardless of the threshold,
/// and localization recall is matched references over total references.
/// The error rate aggregates per-frame substitutions/deletions/insertions.
/// Classwise scores are macro-averaged over classes with at least one
/// reference; classes absent from the references are ignored.
inline MetricsReport compute_seld_metrics(const LabelFrameSet& refs, const LabelFrameSet& preds,
                                          double spatial_threshold_deg = 20.0) {
  if (std::abs(refs.frame_seconds - preds.frame_seconds) > 1e-12) {
    throw ResolutionMismatch("reference grid is " + std::to_string(refs.frame_seconds) +
                             " s, predictions " + std::to_string(preds.frame_seconds) + " s");
  }

  struct ClassCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    std::uint64_t substitutions = 0, deletions = 0, insertions = 0;
    std::uint64_t total_refs = 0, matched_refs = 0;
    double angle_sum_deg = 0.0;
    std::uint64_t matched_pairs = 0;
  };
  std::map<int, ClassCounts> per_class;
  std::set<std::pair<std::int64_t, int>> keys;
  for (const auto& [key, dirs] : refs.entries) {
    if (!dirs.empty()) per_class[key.second];  // classes with references
    keys.insert(key);
  }
  for (const auto& [key, dirs] : preds.entries) keys.insert(key);

  static const std::vector<DirectionVector> kEmpty;
  for (const auto& key : keys) {
    const auto ref_it = refs.entries.find(key);
    const auto pred_it = preds.entries.find(key);
    const auto& ref_dirs = ref_it == refs.entries.end() ? kEmpty : ref_it->second;
    const auto& pred_dirs = pred_it == preds.entries.end() ? kEmpty : pred_it->second;
    auto class_it = per_class.find(key.second);
    if (class_it == per_class.end()) continue;  // class has no references at all
    ClassCounts& counts = class_it->second;

    const FrameAssignment assignment = match_frame(ref_dirs, pred_dirs);
    std::uint64_t frame_fp = assignment.unmatched_preds.size();
    std::uint64_t frame_fn = assignment.unmatched_refs.size();
    for (const auto& [r, p] : assignment.matches) {
      const double angle = angular_distance_deg(ref_dirs[r], pred_dirs[p]);
      counts.angle_sum_deg += angle;
      ++counts.matched_pairs;
      ++counts.matched_refs;
      if (angle <= spatial_threshold_deg) {
        ++counts.tp;
      } else {
        ++frame_fp;
        ++frame_fn;
      }
    }
    counts.fp += frame_fp;
    counts.fn += frame_fn;
    counts.total_refs += ref_dirs.size();
    const std::uint64_t s = std::min(frame_fn, frame_fp);
    counts.substitutions += s;
    counts.deletions += frame_fn - s;
    counts.insertions += frame_fp - s;
  }

  MetricsReport report;
  if (per_class.empty()) {
    report.f1 = 1.0;
    report.lr = 1.0;
    report.e_seld = aggregate_e_seld(report.er, report.f1, report.le_deg, report.lr);
    return report;
  }
  double er_sum = 0.0, f1_sum = 0.0, le_sum = 0.0, lr_sum = 0.0;
  for (const auto& [class_id, counts] : per_class) {
    er_sum += counts.total_refs == 0
                  ? 0.0
                  : static_cast<double>(counts.substitutions + counts.deletions +
                                        counts.insertions) /
                        static_cast<double>(counts.total_refs);
    const std::uint64_t f1_denominator = 2 * counts.tp + counts.fp + counts.fn;
    f1_sum += f1_denominator == 0 ? 0.0
                                  : 2.0 * static_cast<double>(counts.tp) /
                                        static_cast<double>(f1_denominator);
    le_sum += localization_error_for_class(counts.angle_sum_deg, counts.matched_pairs);
    lr_sum += counts.total_refs == 0 ? 0.0
                                     : static_cast<double>(counts.matched_refs) /
                                           static_cast<double>(counts.total_refs);
  }
  const double n = static_cast<double>(per_class.size());
  report.er = er_sum / n;
  report.f1 = f1_sum / n;
  report.le_deg = le_sum / n;
  report.lr = lr_sum / n;
  report.e_seld = aggregate_e_seld(report.er, report.f1, report.le_deg, report.lr);
  return report;
}

// ---------------------------------------------------------------------------
// Label CSV interchange: frame_index,class_index,azimuth_deg,elevation_deg
// ---------------------------------------------------------------------------

inline LabelFrameSet read_label_csv(const std::string& path, double frame_seconds = 0.1) {
  std::ifstream in(path);
  if (!in) throw SeldError("cannot open " + path);
  LabelFrameSet set;
  set.frame_seconds = frame_seconds;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::array<double, 4> values{};
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(row, field, ',')) {
        throw CsvParseError(path + ": expected 4 comma-separated values", line_number);
      }
      try {
        std::size_t consumed = 0;
        values[static_cast<std::size_t>(i)] = std::stod(field, &consumed);
        while (consumed < field.size() && std::isspace(static_cast<unsigned char>(field[consumed]))) {
          ++consumed;
        }
        if (consumed != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw CsvParseError(path + ": bad number '" + field + "'", line_number);
      }
    }
    if (std::getline(row, field, ',')) {
      throw CsvParseError(path + ": more than 4 values", line_number);
    }
    const auto frame = static_cast<std::int64_t>(std::llround(values[0]));
    const int class_id = static_cast<int>(std::llround(values[1]));
    if (frame < 0 || class_id < 0) {
      throw CsvParseError(path + ": negative frame or class index", line_number);
    }
    set.add(frame, class_id, direction_from_angles(values[2], values[3]));
  }
  return set;
}

/// Writes events with integer-rounded azimuth/elevation in degrees.
inline void write_event_csv(const std::string& path, const std::vector<SeldEvent>& events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SeldError("cannot open " + path + " for writing");
  for (const SeldEvent& event : events) {
    double az = azimuth_deg_of(event.direction);
    const double el = elevation_deg_of(event.direction);
    long az_int = std::lround(az);
    if (az_int <= -180) az_int += 360;
    out << event.frame << ',' << event.class_id << ',' << az_int << ',' << std::lround(el)
        << '\n';
  }
}

/// Bins decoded events onto the scoring grid (100 ms frames by default).
inline LabelFrameSet events_to_label_frames(const std::vector<SeldEvent>& events,
                                            double event_frame_seconds,
                                            double label_frame_seconds = 0.1) {
  LabelFrameSet set;
  set.frame_seconds = label_frame_seconds;
  for (const SeldEvent& event : events) {
    const double time = (static_cast<double>(event.frame) + 0.5) * event_frame_seconds;
    set.add(static_cast<std::int64_t>(time / label_frame_seconds), event.class_id,
            event.direction);
  }
  return set;
}

}  // namespace seld
