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

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "occtk/csv.hpp"
#include "occtk/error.hpp"

namespace occtk {

/// One row of the dynamic-occlusion annotation table.
struct ClipAnnotation {
  std::string action_class;
  std::string file_name;
  std::string occluder_type;
  std::string occluder_file_name;
  double occluder_pixel_ratio = 0;  // mean occluded fraction of the actor box
  double occluder_size_ratio = 0;   // the specified occlusion degree
  double occlusion_duration = 0;    // seconds
  double video_duration = 0;        // seconds
  double fps = 0;
  std::string clip_generation_time;  // ISO-8601

  friend bool operator==(const ClipAnnotation&, const ClipAnnotation&) = default;
};

/// Annotation tiers: the full dynamic-occlusion schema, the static-scene
/// subset (class, file, fps, duration), and the interactive subset
/// (class, file).
enum class AnnotationSchema { dynamic, static_scene, interactive };

/// Canonical column order of the dynamic schema. Written exactly in this
/// order; readers accept any column order by header name.
inline constexpr std::array<const char*, 10> dynamic_schema_fields = {
    "action_class",          "file_name",       "occluder_type",
    "occluder_file_name",    "occluder_pixel_ratio", "occluder_size_ratio",
    "occlusion_duration",    "video_duration",  "fps",
    "clip_generation_time",
};

inline constexpr std::array<const char*, 4> static_schema_fields = {
    "action_class", "file_name", "fps", "video_duration"};

inline constexpr std::array<const char*, 2> interactive_schema_fields = {
    "action_class", "file_name"};

inline std::vector<std::string> schema_fields(AnnotationSchema schema) {
  switch (schema) {
    case AnnotationSchema::dynamic:
      return {dynamic_schema_fields.begin(), dynamic_schema_fields.end()};
    case AnnotationSchema::static_scene:
      return {static_schema_fields.begin(), static_schema_fields.end()};
    case AnnotationSchema::interactive:
      return {interactive_schema_fields.begin(), interactive_schema_fields.end()};
  }
  return {};
}

inline AnnotationSchema parse_schema_name(const std::string& name) {
  if (name == "dynamic" || name == "d") return AnnotationSchema::dynamic;
  if (name == "static" || name == "s") return AnnotationSchema::static_scene;
  if (name == "interactive" || name == "i" || name == "m") return AnnotationSchema::interactive;
  raise(Errc::config_error, "unknown annotation schema: " + name);
}

namespace detail {

inline std::string annotation_field(const ClipAnnotation& r, const std::string& name) {
  if (name == "action_class") return r.action_class;
  if (name == "file_name") return r.file_name;
  if (name == "occluder_type") return r.occluder_type;
  if (name == "occluder_file_name") return r.occluder_file_name;
  if (name == "occluder_pixel_ratio") return csv::format_double(r.occluder_pixel_ratio);
  if (name == "occluder_size_ratio") return csv::format_double(r.occluder_size_ratio);
  if (name == "occlusion_duration") return csv::format_double(r.occlusion_duration);
  if (name == "video_duration") return csv::format_double(r.video_duration);
  if (name == "fps") return csv::format_double(r.fps);
  if (name == "clip_generation_time") return r.clip_generation_time;
  raise(Errc::schema_error, "unknown annotation field " + name);
}

}  // namespace detail

/// Check the record's own invariants; returns a message or empty when valid.
inline std::string validate_annotation(const ClipAnnotation& r, AnnotationSchema schema) {
  auto ratio_ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (schema == AnnotationSchema::dynamic) {
    if (!ratio_ok(r.occluder_pixel_ratio)) return "occluder_pixel_ratio outside [0, 1]";
    if (!ratio_ok(r.occluder_size_ratio)) return "occluder_size_ratio outside [0, 1]";
    if (!(r.occlusion_duration >= 0) || r.occlusion_duration > r.video_duration) {
      return "occlusion_duration must satisfy 0 <= d <= video_duration";
    }
  }
  if (schema != AnnotationSchema::interactive) {
    if (!(r.fps > 0) || !std::isfinite(r.fps)) return "fps must be > 0";
    if (!(r.video_duration >= 0) || !std::isfinite(r.video_duration)) {
      return "video_duration must be >= 0";
    }
  }
  return "";
}

inline void write_annotations(std::ostream& os, const std::vector<ClipAnnotation>& records,
                              AnnotationSchema schema = AnnotationSchema::dynamic) {
  const std::vector<std::string> fields = schema_fields(schema);
  csv::write_row(os, fields);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string message = validate_annotation(records[i], schema);
    if (!message.empty()) {
      raise(Errc::row_error, "record " + std::to_string(i) + ": " + message);
    }
    std::vector<std::string> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) row.push_back(detail::annotation_field(records[i], f));
    csv::write_row(os, row);
  }
}

inline void write_annotations(const std::filesystem::path& path,
                              const std::vector<ClipAnnotation>& records,
                              AnnotationSchema schema = AnnotationSchema::dynamic) {
  std::ofstream out(path, std::ios::binary);  // binary: keep LF endings
  if (!out) raise(Errc::io_error, "cannot write " + path.string());
  write_annotations(out, records, schema);
}

struct RowIssue {
  int row = 0;  // 1-based data row number (header is row 0)
  std::string message;
};

struct AnnotationReadResult {
  std::vector<ClipAnnotation> records;  // rows that passed validation
  std::vector<RowIssue> issues;         // rows that did not, with reasons
};

/// Header-keyed read: columns may appear in any order, but every schema
/// column must be present. Invalid rows are collected, not fatal.
inline AnnotationReadResult read_annotations(std::istream& in,
                                             AnnotationSchema schema = AnnotationSchema::dynamic) {
  const auto rows = csv::parse(in);
  if (rows.empty()) raise(Errc::schema_error, "missing header row");
  const std::vector<std::string>& header = rows.front();
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const std::string& f : schema_fields(schema)) {
    if (!column.count(f)) raise(Errc::schema_error, "missing column " + f);
  }

  AnnotationReadResult result;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const int row_no = static_cast<int>(r);
    if (row.size() != header.size()) {
      result.issues.push_back({row_no, "wrong field count"});
      continue;
    }
    auto text = [&](const char* name) { return row[column.at(name)]; };
    auto number = [&](const char* name, double& out) {
      if (!csv::parse_double(text(name), out)) {
        result.issues.push_back({row_no, std::string("bad number in ") + name});
        return false;
      }
      return true;
    };

    ClipAnnotation rec;
    bool ok = true;
    rec.action_class = text("action_class");
    rec.file_name = text("file_name");
    if (schema == AnnotationSchema::dynamic) {
      rec.occluder_type = text("occluder_type");
      rec.occluder_file_name = text("occluder_file_name");
      ok = number("occluder_pixel_ratio", rec.occluder_pixel_ratio) &&
           number("occluder_size_ratio", rec.occluder_size_ratio) &&
           number("occlusion_duration", rec.occlusion_duration) &&
           number("video_duration", rec.video_duration) && number("fps", rec.fps);
      if (ok) rec.clip_generation_time = text("clip_generation_time");
    } else if (schema == AnnotationSchema::static_scene) {
      ok = number("fps", rec.fps) && number("video_duration", rec.video_duration);
    }
    if (!ok) continue;

    const std::string message = validate_annotation(rec, schema);
    if (!message.empty()) {
      result.issues.push_back({row_no, message});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

inline AnnotationReadResult read_annotations(const std::filesystem::path& path,
                                             AnnotationSchema schema = AnnotationSchema::dynamic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  return read_annotations(in, schema);
}

}  // namespace occtk
