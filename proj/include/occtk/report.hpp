// Copyright 2026 The occtk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occtk/csv.hpp"
#include "occtk/error.hpp"

namespace occtk {

/// One model prediction: scores over the label set for one clip.
struct PredictionRecord {
  std::string clip_id;
  std::string true_label;
  std::map<std::string, double> scores;  // ordered map: deterministic iteration
};

/// class -> parent category. Must cover every evaluated label.
using ParentClassMap = std::map<std::string, std::string>;

namespace detail {

inline std::set<std::string> label_set(const std::vector<PredictionRecord>& records) {
  std::set<std::string> labels;
  for (const auto& r : records) {
    for (const auto& [label, score] : r.scores) labels.insert(label);
  }
  return labels;
}

/// True when the record's true label is among its k best scores.
/// Ties break by lexicographic label order, which the ordered map gives us:
/// sort is by (score desc, label asc).
inline bool hit_at_k(const PredictionRecord& record, std::size_t k) {
  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(record.scores.size());
  for (const auto& [label, score] : record.scores) {
    if (!std::isfinite(score)) raise(Errc::invalid_distribution, record.clip_id + ": non-finite score");
    ranked.emplace_back(score, label);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const std::size_t top = std::min(k, ranked.size());
  for (std::size_t i = 0; i < top; ++i) {
    if (ranked[i].second == record.true_label) return true;
  }
  return false;
}

}  // namespace detail

/// Fraction of records whose true label ranks within the top k scores.
inline double top_k_accuracy(const std::vector<PredictionRecord>& records, std::size_t k) {
  if (k < 1) raise(Errc::config_error, "k must be >= 1");
  if (records.empty()) raise(Errc::empty_input, "no prediction records");
  const std::set<std::string> labels = detail::label_set(records);
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (!labels.count(r.true_label)) {
      raise(Errc::unknown_label, r.clip_id + ": true label '" + r.true_label +
                                     "' not in the declared label set");
    }
    hits += detail::hit_at_k(r, k);
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

struct FactorBin {
  double lo = 0;
  double hi = 0;
  std::size_t clip_count = 0;
  double baseline_accuracy = 0;
  double occluded_accuracy = 0;
  double drop = 0;       // baseline - occluded
  bool is_empty = true;  // reported, not fatal
};

/// Per-bin accuracy before and after occlusion, clips bucketed by an
/// occlusion factor. Bins are [lo, hi); the final bin also takes hi so a
/// factor of exactly 1.0 lands somewhere when the edges cover [0, 1].
inline std::vector<FactorBin> accuracy_drop_by_factor(
    const std::vector<PredictionRecord>& baseline, const std::vector<PredictionRecord>& occluded,
    const std::map<std::string, double>& factor_by_clip, const std::vector<double>& bin_edges,
    std::size_t k = 1) {
  if (bin_edges.size() < 2) raise(Errc::config_error, "need at least two bin edges");
  if (!std::is_sorted(bin_edges.begin(), bin_edges.end())) {
    raise(Errc::config_error, "bin edges must be ascending");
  }
  if (baseline.empty() || occluded.empty()) raise(Errc::empty_input, "no prediction records");

  std::map<std::string, const PredictionRecord*> baseline_by_clip;
  for (const auto& r : baseline) baseline_by_clip[r.clip_id] = &r;
  std::map<std::string, const PredictionRecord*> occluded_by_clip;
  for (const auto& r : occluded) occluded_by_clip[r.clip_id] = &r;
  if (baseline_by_clip.size() != baseline.size() || occluded_by_clip.size() != occluded.size()) {
    raise(Errc::misaligned_clips, "duplicate clip ids in prediction records");
  }
  for (const auto& [clip_id, record] : baseline_by_clip) {
    if (!occluded_by_clip.count(clip_id) || !factor_by_clip.count(clip_id)) {
      raise(Errc::misaligned_clips, clip_id + " missing from occluded records or factor map");
    }
  }
  if (occluded_by_clip.size() != baseline_by_clip.size()) {
    raise(Errc::misaligned_clips, "occluded records name clips absent from baseline");
  }

  const std::size_t bins = bin_edges.size() - 1;
  std::vector<FactorBin> out(bins);
  std::vector<std::vector<const PredictionRecord*>> base_members(bins), occ_members(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = bin_edges[b];
    out[b].hi = bin_edges[b + 1];
  }
  for (const auto& [clip_id, record] : baseline_by_clip) {
    const double factor = factor_by_clip.at(clip_id);
    // [lo, hi) everywhere, closed on the last bin's upper edge.
    std::size_t b = bins;
    for (std::size_t i = 0; i < bins; ++i) {
      const bool last = i + 1 == bins;
      if (factor >= bin_edges[i] && (factor < bin_edges[i + 1] || (last && factor == bin_edges[i + 1]))) {
        b = i;
        break;
      }
    }
    if (b == bins) continue;  // factor outside the binned range
    base_members[b].push_back(record);
    occ_members[b].push_back(occluded_by_clip.at(clip_id));
  }
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].clip_count = base_members[b].size();
    if (base_members[b].empty()) continue;
    std::vector<PredictionRecord> base_copy, occ_copy;
    for (const auto* r : base_members[b]) base_copy.push_back(*r);
    for (const auto* r : occ_members[b]) occ_copy.push_back(*r);
    out[b].baseline_accuracy = top_k_accuracy(base_copy, k);
    out[b].occluded_accuracy = top_k_accuracy(occ_copy, k);
    out[b].drop = out[b].baseline_accuracy - out[b].occluded_accuracy;
    out[b].is_empty = false;
  }
  return out;
}

struct ParentAccuracy {
  std::string parent;
  std::size_t clip_count = 0;
  double accuracy = 0;
};

/// Top-k accuracy per parent category of the true label, sorted by accuracy
/// (then name) for stable output.
inline std::vector<ParentAccuracy> parent_class_aggregate(
    const std::vector<PredictionRecord>& records, const ParentClassMap& parent_map,
    std::size_t k = 1) {
  if (records.empty()) raise(Errc::empty_input, "no prediction records");
  std::set<std::string> unmapped;
  for (const auto& r : records) {
    if (!parent_map.count(r.true_label)) unmapped.insert(r.true_label);
  }
  if (!unmapped.empty()) {
    std::string joined;
    for (const auto& label : unmapped) {
      if (!joined.empty()) joined += ", ";
      joined += label;
    }
    raise(Errc::unmapped_label, "labels without a parent class: " + joined);
  }

  std::map<std::string, std::vector<PredictionRecord>> groups;
  for (const auto& r : records) groups[parent_map.at(r.true_label)].push_back(r);

  std::vector<ParentAccuracy> out;
  out.reserve(groups.size());
  for (const auto& [parent, members] : groups) {
    ParentAccuracy row;
    row.parent = parent;
    row.clip_count = members.size();
    row.accuracy = top_k_accuracy(members, k);
    out.push_back(std::move(row));
  }
  std::sort(out.begin(), out.end(), [](const ParentAccuracy& a, const ParentAccuracy& b) {
    if (a.accuracy != b.accuracy) return a.accuracy < b.accuracy;
    return a.parent < b.parent;
  });
  return out;
}

/// Per-class accuracy drop aggregated over several models. The two orders
/// (difference per model then average, or average accuracies then
/// difference) coincide for an equal-weight mean; both are exposed because
/// reporting conventions differ.
enum class DropOrder { difference_then_average, average_then_difference };

struct ClassDrop {
  std::string label;
  double drop = 0;
};

inline std::vector<ClassDrop> class_accuracy_drop(
    const std::vector<std::vector<PredictionRecord>>& baseline_per_model,
    const std::vector<std::vector<PredictionRecord>>& occluded_per_model,
    std::size_t k = 1, DropOrder order = DropOrder::difference_then_average) {
  if (baseline_per_model.empty()) raise(Errc::empty_input, "no models");
  if (baseline_per_model.size() != occluded_per_model.size()) {
    raise(Errc::length_mismatch, "model counts differ");
  }
  const std::size_t models = baseline_per_model.size();

  auto per_class_accuracy = [k](const std::vector<PredictionRecord>& records) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> hit_total;
    const std::set<std::string> labels = detail::label_set(records);
    for (const auto& r : records) {
      if (!labels.count(r.true_label)) raise(Errc::unknown_label, r.true_label);
      auto& [hits, total] = hit_total[r.true_label];
      hits += detail::hit_at_k(r, k);
      total += 1;
    }
    std::map<std::string, double> acc;
    for (const auto& [label, ht] : hit_total) {
      acc[label] = static_cast<double>(ht.first) / static_cast<double>(ht.second);
    }
    return acc;
  };

  std::map<std::string, double> base_sum, occ_sum, drop_sum;
  std::map<std::string, std::size_t> seen;
  for (std::size_t m = 0; m < models; ++m) {
    const auto base_acc = per_class_accuracy(baseline_per_model[m]);
    const auto occ_acc = per_class_accuracy(occluded_per_model[m]);
    for (const auto& [label, acc] : base_acc) {
      if (!occ_acc.count(label)) raise(Errc::misaligned_clips, label + " missing occluded records");
      base_sum[label] += acc;
      occ_sum[label] += occ_acc.at(label);
      drop_sum[label] += acc - occ_acc.at(label);
      seen[label] += 1;
    }
  }
  std::vector<ClassDrop> out;
  for (const auto& [label, n] : seen) {
    if (n != models) raise(Errc::misaligned_clips, label + " absent from some models");
    ClassDrop row;
    row.label = label;
    const double dn = static_cast<double>(n);
    row.drop = order == DropOrder::difference_then_average
                   ? drop_sum[label] / dn
                   : base_sum[label] / dn - occ_sum[label] / dn;
    out.push_back(std::move(row));
  }
  std::sort(out.begin(), out.end(), [](const ClassDrop& a, const ClassDrop& b) {
    if (a.drop != b.drop) return a.drop > b.drop;
    return a.label < b.label;
  });
  return out;
}

/// JSON-lines prediction dump: {"clip_id","true_label","scores":{label:score}}
/// or the ranked form {"clip_id","true_label","ranking":[label,...]} which is
/// mapped to descending synthetic scores.
inline std::vector<PredictionRecord> load_predictions_jsonl(std::istream& in,
                                                            const std::string& source_name) {
  std::vector<PredictionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      PredictionRecord r;
      r.clip_id = j.at("clip_id").get<std::string>();
      r.true_label = j.at("true_label").get<std::string>();
      if (j.contains("scores")) {
        for (const auto& [label, score] : j.at("scores").items()) {
          r.scores[label] = score.get<double>();
        }
      } else if (j.contains("ranking")) {
        const auto ranking = j.at("ranking").get<std::vector<std::string>>();
        double score = static_cast<double>(ranking.size());
        for (const auto& label : ranking) r.scores[label] = score--;
      } else {
        raise(Errc::parse_error, "record has neither scores nor ranking");
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_error, source_name + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      raise(Errc::parse_error, source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

inline std::vector<PredictionRecord> load_predictions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  return load_predictions_jsonl(in, path.filename().string());
}

/// parent map CSV: header `class,parent`, one mapping per row. When a class
/// is listed under several parents (the source hierarchy does this), the
/// first row wins.
inline ParentClassMap load_parent_map_csv(std::istream& in) {
  const auto rows = csv::parse(in);
  if (rows.empty()) raise(Errc::schema_error, "empty parent map");
  if (rows.front().size() < 2 || rows.front()[0] != "class" || rows.front()[1] != "parent") {
    raise(Errc::schema_error, "parent map header must be class,parent");
  }
  ParentClassMap map;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2) raise(Errc::row_error, "row " + std::to_string(i) + ": need class,parent");
    map.emplace(rows[i][0], rows[i][1]);  // emplace: first occurrence wins
  }
  return map;
}

inline ParentClassMap load_parent_map_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  return load_parent_map_csv(in);
}

}  // namespace occtk
