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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occtk/error.hpp"

namespace occtk {

/// Axis-aligned box in frame coordinates, origin top-left. May extend past
/// the frame edges; the compositor clips.
struct BoundingBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }

  bool valid() const {
    return w > 0 && h > 0 && std::isfinite(x) && std::isfinite(y) &&
           std::isfinite(w) && std::isfinite(h);
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Per-frame detections of the primary actor in one clip. Frames the
/// detector missed have no box.
struct ActorTrack {
  std::string clip_id;
  double fps = 0;
  int frame_count = 0;
  std::vector<std::optional<BoundingBox>> boxes;

  int present_count() const {
    int n = 0;
    for (const auto& b : boxes) n += b.has_value();
    return n;
  }
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

inline bool parse_int(const std::string& s, long long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace detail

/// Text track format:
///   clip_id,fps,frame_count
///   frame_index,x,y,w,h        (one line per detection, floats allowed)
inline ActorTrack parse_track_text(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    raise(Errc::inconsistent_header, source_name + ": empty file, header expected");
  }
  auto header = detail::split_fields(line);
  if (header.size() != 3) {
    raise(Errc::inconsistent_header,
          source_name + ": header must be clip_id,fps,frame_count");
  }
  ActorTrack track;
  track.clip_id = detail::trim(header[0]);
  long long frame_count = 0;
  if (track.clip_id.empty() || !detail::parse_double(header[1], track.fps) ||
      !detail::parse_int(header[2], frame_count) || track.fps <= 0 || frame_count < 1) {
    raise(Errc::inconsistent_header, source_name + ": bad fps/frame_count in header");
  }
  track.frame_count = static_cast<int>(frame_count);
  track.boxes.assign(track.frame_count, std::nullopt);

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_fields(line);
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (fields.size() != 5) {
      raise(Errc::parse_error, where + ": expected frame_index,x,y,w,h");
    }
    long long frame = 0;
    BoundingBox box;
    if (!detail::parse_int(fields[0], frame) || !detail::parse_double(fields[1], box.x) ||
        !detail::parse_double(fields[2], box.y) || !detail::parse_double(fields[3], box.w) ||
        !detail::parse_double(fields[4], box.h)) {
      raise(Errc::parse_error, where + ": malformed number");
    }
    if (frame < 0 || frame >= track.frame_count) {
      raise(Errc::parse_error, where + ": frame_index out of range");
    }
    if (!box.valid()) {
      raise(Errc::parse_error, where + ": box must have w > 0 and h > 0");
    }
    if (track.boxes[static_cast<std::size_t>(frame)].has_value()) {
      raise(Errc::parse_error, where + ": duplicate frame_index");
    }
    track.boxes[static_cast<std::size_t>(frame)] = box;
  }
  if (track.present_count() == 0) {
    raise(Errc::empty_track, source_name + ": no detections");
  }
  return track;
}

/// JSON equivalent: {"clip_id","fps","frame_count","boxes":[{"frame_index","x","y","w","h"},...]}
inline ActorTrack parse_track_json(std::istream& in, const std::string& source_name) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse_error, source_name + ": " + e.what());
  }
  ActorTrack track;
  try {
    track.clip_id = j.at("clip_id").get<std::string>();
    track.fps = j.at("fps").get<double>();
    track.frame_count = j.at("frame_count").get<int>();
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::inconsistent_header, source_name + ": " + e.what());
  }
  if (track.clip_id.empty() || track.fps <= 0 || track.frame_count < 1) {
    raise(Errc::inconsistent_header, source_name + ": bad fps/frame_count");
  }
  track.boxes.assign(track.frame_count, std::nullopt);
  if (!j.contains("boxes") || !j["boxes"].is_array()) {
    raise(Errc::parse_error, source_name + ": missing boxes array");
  }
  int entry = 0;
  for (const auto& item : j["boxes"]) {
    ++entry;
    const std::string where = source_name + ": boxes[" + std::to_string(entry - 1) + "]";
    long long frame = -1;
    BoundingBox box;
    try {
      frame = item.at("frame_index").get<long long>();
      box.x = item.at("x").get<double>();
      box.y = item.at("y").get<double>();
      box.w = item.at("w").get<double>();
      box.h = item.at("h").get<double>();
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_error, where + ": " + e.what());
    }
    if (frame < 0 || frame >= track.frame_count) raise(Errc::parse_error, where + ": frame_index out of range");
    if (!box.valid()) raise(Errc::parse_error, where + ": box must have w > 0 and h > 0");
    if (track.boxes[static_cast<std::size_t>(frame)].has_value()) {
      raise(Errc::parse_error, where + ": duplicate frame_index");
    }
    track.boxes[static_cast<std::size_t>(frame)] = box;
  }
  if (track.present_count() == 0) raise(Errc::empty_track, source_name + ": no detections");
  return track;
}

inline ActorTrack parse_track(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open track file " + path.string());
  // Sniff: a JSON track starts with '{'.
  int first = in.peek();
  while (first == ' ' || first == '\n' || first == '\r' || first == '\t') {
    in.get();
    first = in.peek();
  }
  if (first == '{') return parse_track_json(in, path.filename().string());
  return parse_track_text(in, path.filename().string());
}

/// Fill interior gaps of length <= max_gap by per-field linear interpolation
/// between the flanking boxes. Longer gaps and leading/trailing runs stay
/// absent: extrapolating would invent actor positions.
inline ActorTrack interpolate_track(const ActorTrack& track, int max_gap) {
  ActorTrack out = track;
  if (max_gap <= 0) return out;
  const int n = track.frame_count;
  int prev = -1;  // last frame with a box
  for (int f = 0; f < n; ++f) {
    if (!track.boxes[static_cast<std::size_t>(f)].has_value()) continue;
    if (prev >= 0 && f - prev - 1 > 0 && f - prev - 1 <= max_gap) {
      const BoundingBox& a = *track.boxes[static_cast<std::size_t>(prev)];
      const BoundingBox& b = *track.boxes[static_cast<std::size_t>(f)];
      for (int g = prev + 1; g < f; ++g) {
        const double t = static_cast<double>(g - prev) / static_cast<double>(f - prev);
        out.boxes[static_cast<std::size_t>(g)] = BoundingBox{
            a.x + (b.x - a.x) * t,
            a.y + (b.y - a.y) * t,
            a.w + (b.w - a.w) * t,
            a.h + (b.h - a.h) * t,
        };
      }
    }
    prev = f;
  }
  return out;
}

}  // namespace occtk
