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

// Batch orchestration behind the CLI subcommands. Jobs are independent per
// clip; a bad clip is recorded and skipped, never aborts the batch. All
// outputs land via temp-then-rename so reruns and crashes leave no torn
// files, and everything random flows from the single job seed through
// per-clip sub-seeds.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "occtk/annotations.hpp"
#include "occtk/car.hpp"
#include "occtk/compositor.hpp"
#include "occtk/counterfactual.hpp"
#include "occtk/csv.hpp"
#include "occtk/error.hpp"
#include "occtk/image_io.hpp"
#include "occtk/metrics.hpp"
#include "occtk/occluder.hpp"
#include "occtk/prng.hpp"
#include "occtk/report.hpp"
#include "occtk/track.hpp"
#include "occtk/version.hpp"

namespace occtk {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Shared plumbing

inline int default_worker_count() {
  if (const char* env = std::getenv("OCCTK_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(i) for i in [0, count) on a small thread pool. fn must not throw;
/// jobs record their own failures.
template <typename Fn>
inline void parallel_for(int workers, std::size_t count, Fn&& fn) {
  if (workers <= 0) workers = default_worker_count();
  const int n_threads = static_cast<int>(std::min<std::size_t>(workers, count));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

inline void write_text_atomic(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) raise(Errc::io_error, "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

inline void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

struct ClipFailure {
  std::string clip_id;
  std::string error;
};

struct RunSummary {
  std::string command;
  std::string version = version_string;
  std::uint64_t seed = 0;
  std::size_t clips_total = 0;
  std::size_t clips_succeeded = 0;
  std::size_t outputs_written = 0;
  double wall_seconds = 0;
  std::vector<ClipFailure> failures;
  std::vector<std::string> notes;

  int exit_code() const { return failures.empty() ? 0 : 1; }
};

inline void to_json(nlohmann::json& j, const RunSummary& s) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : s.failures) {
    failures.push_back({{"clip_id", f.clip_id}, {"error", f.error}});
  }
  j = nlohmann::json{{"command", s.command},
                     {"version", s.version},
                     {"seed", s.seed},
                     {"clips_total", s.clips_total},
                     {"clips_succeeded", s.clips_succeeded},
                     {"outputs_written", s.outputs_written},
                     {"wall_seconds", s.wall_seconds},
                     {"failures", failures},
                     {"notes", s.notes}};
}

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// Clip discovery

struct ClipEntry {
  std::string clip_id;
  fs::path frames_dir;
  fs::path track_file;   // may be empty for counterfactual runs
  fs::path mask_dir;     // may be empty for synthesis runs
  std::string action_class;
};

/// manifest.json:
/// {"clips":[{"clip_id","frames_dir","track_file","mask_dir","action_class"},...]}
/// Relative paths resolve against the manifest's directory.
inline std::vector<ClipEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse_error, path.string() + ": " + e.what());
  }
  if (!j.contains("clips") || !j["clips"].is_array()) {
    raise(Errc::schema_error, path.string() + ": missing clips array");
  }
  const fs::path base = path.parent_path();
  auto resolve = [&base](const std::string& p) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::vector<ClipEntry> clips;
  for (const auto& item : j["clips"]) {
    ClipEntry entry;
    entry.clip_id = item.at("clip_id").get<std::string>();
    if (item.contains("frames_dir")) entry.frames_dir = resolve(item.at("frames_dir").get<std::string>());
    if (item.contains("track_file")) entry.track_file = resolve(item.at("track_file").get<std::string>());
    if (item.contains("mask_dir")) entry.mask_dir = resolve(item.at("mask_dir").get<std::string>());
    if (item.contains("action_class")) entry.action_class = item.at("action_class").get<std::string>();
    clips.push_back(std::move(entry));
  }
  std::sort(clips.begin(), clips.end(),
            [](const ClipEntry& a, const ClipEntry& b) { return a.clip_id < b.clip_id; });
  return clips;
}

/// Directory convention: one subdirectory per clip under frames_root;
/// tracks_root/<clip_id>.{csv,txt,json}; masks_root/<clip_id>/.
inline std::vector<ClipEntry> discover_clips(const fs::path& frames_root, const fs::path& tracks_root,
                                             const fs::path& masks_root = {}) {
  if (!fs::is_directory(frames_root)) {
    raise(Errc::io_error, frames_root.string() + " is not a directory");
  }
  std::vector<ClipEntry> clips;
  for (const auto& entry : fs::directory_iterator(frames_root)) {
    if (!entry.is_directory()) continue;
    ClipEntry clip;
    clip.clip_id = entry.path().filename().string();
    clip.frames_dir = entry.path();
    if (!tracks_root.empty()) {
      for (const char* ext : {".csv", ".txt", ".json"}) {
        const fs::path candidate = tracks_root / (clip.clip_id + ext);
        if (fs::exists(candidate)) {
          clip.track_file = candidate;
          break;
        }
      }
    }
    if (!masks_root.empty()) {
      const fs::path candidate = masks_root / clip.clip_id;
      if (fs::is_directory(candidate)) clip.mask_dir = candidate;
    }
    clips.push_back(std::move(clip));
  }
  std::sort(clips.begin(), clips.end(),
            [](const ClipEntry& a, const ClipEntry& b) { return a.clip_id < b.clip_id; });
  return clips;
}

// ---------------------------------------------------------------------------
// synthesize

struct SynthesizeConfig {
  fs::path frames_root;
  fs::path tracks_root;
  fs::path occluders_root;
  fs::path manifest_path;  // alternative to frames/tracks roots
  fs::path out_root;
  std::uint64_t seed = 0;
  std::vector<double> degrees{0.25, 0.50, 0.75};
  std::int64_t min_opaque_pixels = default_min_opaque_pixels;
  int max_gap = 15;
  int workers = 0;
  std::optional<OccluderCategory> category_filter;
  ColorResample resample = ColorResample::bilinear;
  // Stamped into every annotation row. Fixed by default so same-seed runs
  // are byte-identical; pass an actual timestamp to record one.
  std::string generation_time = "1970-01-01T00:00:00Z";
};

/// Output directory name for one (clip, degree) product: degree as an
/// integer percentage, e.g. clip__d025 at degree 0.25.
inline std::string degree_suffix(double degree) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "d%03d", static_cast<int>(std::lround(degree * 100)));
  return buf;
}

inline std::string output_clip_name(const std::string& clip_id, double degree) {
  return clip_id + "__" + degree_suffix(degree);
}

namespace detail {

struct SynthesizedClipOutcome {
  bool attempted = false;
  bool ok = false;
  std::string error;
  std::size_t outputs = 0;
  std::vector<ClipAnnotation> annotations;
};

inline void validate_degrees(const std::vector<double>& degrees) {
  if (degrees.empty()) raise(Errc::config_error, "no degrees given");
  for (double d : degrees) {
    if (!(d > 0.0 && d <= 1.0)) {
      raise(Errc::config_error, "degree must be in (0, 1], got " + csv::format_double(d));
    }
  }
}

}  // namespace detail

inline RunSummary run_synthesize(const SynthesizeConfig& cfg) {
  WallClock clock;
  detail::validate_degrees(cfg.degrees);
  if (cfg.out_root.empty()) raise(Errc::config_error, "missing output directory");
  if (cfg.manifest_path.empty() && (cfg.frames_root.empty() || cfg.tracks_root.empty())) {
    raise(Errc::config_error, "need --manifest or both --frames and --tracks");
  }

  const std::vector<ClipEntry> clips =
      !cfg.manifest_path.empty() ? load_manifest(cfg.manifest_path)
                                 : discover_clips(cfg.frames_root, cfg.tracks_root);
  if (clips.empty()) raise(Errc::config_error, "no clips found");

  CatalogLoadResult catalog = load_catalog(cfg.occluders_root, cfg.min_opaque_pixels);
  if (catalog.catalog.empty()) {
    raise(Errc::empty_catalog, "no usable occluders under " + cfg.occluders_root.string());
  }

  fs::create_directories(cfg.out_root);
  std::vector<detail::SynthesizedClipOutcome> outcomes(clips.size());

  parallel_for(cfg.workers, clips.size(), [&](std::size_t i) {
    const ClipEntry& clip = clips[i];
    detail::SynthesizedClipOutcome& outcome = outcomes[i];
    outcome.attempted = true;
    try {
      if (clip.track_file.empty() || !fs::exists(clip.track_file)) {
        raise(Errc::io_error, "no track file for clip " + clip.clip_id);
      }
      const ClipFrames source = load_clip_frames(clip.frames_dir);
      ActorTrack track = interpolate_track(parse_track(clip.track_file), cfg.max_gap);
      const double fps = source.fps.value_or(track.fps);
      if (static_cast<int>(source.frames.size()) != track.frame_count) {
        raise(Errc::frame_count_mismatch,
              clip.clip_id + ": " + std::to_string(source.frames.size()) + " frames on disk, track declares " +
                  std::to_string(track.frame_count));
      }

      const std::uint64_t clip_seed = derive_subseed(cfg.seed, clip.clip_id);
      // One occluder per clip, shared by all degree variants.
      const OccluderAsset& asset =
          sample_occluder(catalog.catalog, clip_seed, cfg.category_filter);

      for (double degree : cfg.degrees) {
        OcclusionSpec spec;
        spec.degree = degree;
        spec.seed = clip_seed;
        spec.occluder_id = asset.id;
        SynthesisResult result = synthesize_clip(source.frames, track, spec, catalog.catalog, cfg.resample);
        const OcclusionMetrics clip_metrics = compute_clip_metrics(track, result.placements, degree);

        const std::string out_name = output_clip_name(clip.clip_id, degree);
        const fs::path final_dir = cfg.out_root / out_name;
        const fs::path tmp_dir = cfg.out_root / (".tmp_" + out_name);
        fs::remove_all(tmp_dir);
        save_clip_frames(tmp_dir, result.frames, fps);

        nlohmann::json placements_json{{"clip_id", out_name},
                                       {"source_clip_id", clip.clip_id},
                                       {"degree", degree},
                                       {"occluder_id", result.occluder_id},
                                       {"occluder_type", std::string(to_string(asset.category))},
                                       {"seed", spec.seed},
                                       {"fps", fps},
                                       {"frame_count", track.frame_count},
                                       {"placements", result.placements}};
        write_json_atomic(tmp_dir / "placements.json", placements_json);

        nlohmann::json metrics_json = clip_metrics;
        metrics_json["clip_id"] = out_name;
        write_json_atomic(tmp_dir / "metrics.json", metrics_json);

        fs::remove_all(final_dir);
        fs::rename(tmp_dir, final_dir);

        ClipAnnotation row;
        row.action_class = clip.action_class.empty() ? "unknown" : clip.action_class;
        row.file_name = out_name;
        row.occluder_type = std::string(to_string(asset.category));
        row.occluder_file_name = asset.id;
        row.occluder_pixel_ratio = clip_metrics.mean_area_ratio;
        row.occluder_size_ratio = degree;
        row.video_duration = track.frame_count / fps;
        row.occlusion_duration = clip_metrics.duration_ratio * row.video_duration;
        row.fps = fps;
        row.clip_generation_time = cfg.generation_time;
        outcome.annotations.push_back(std::move(row));
        ++outcome.outputs;
      }
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
  });

  RunSummary summary;
  summary.command = "synthesize";
  summary.seed = cfg.seed;
  summary.clips_total = clips.size();
  for (const auto& [path, reason] : catalog.rejected) {
    summary.notes.push_back("occluder rejected: " + path + " (" + reason + ")");
  }

  std::vector<ClipAnnotation> annotations;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].ok) {
      ++summary.clips_succeeded;
      summary.outputs_written += outcomes[i].outputs;
      annotations.insert(annotations.end(), outcomes[i].annotations.begin(),
                         outcomes[i].annotations.end());
    } else {
      summary.failures.push_back({clips[i].clip_id, outcomes[i].error});
    }
  }
  std::sort(annotations.begin(), annotations.end(),
            [](const ClipAnnotation& a, const ClipAnnotation& b) { return a.file_name < b.file_name; });

  std::ostringstream csv_text;
  write_annotations(csv_text, annotations, AnnotationSchema::dynamic);
  write_text_atomic(cfg.out_root / "annotations.csv", csv_text.str());

  summary.wall_seconds = clock.seconds();
  write_json_atomic(cfg.out_root / "run_summary.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// metrics (recompute from stored placements)

struct MetricsConfig {
  fs::path clips_root;  // a synthesize output tree
  int workers = 0;
};

inline RunSummary run_metrics(const MetricsConfig& cfg) {
  WallClock clock;
  if (!fs::is_directory(cfg.clips_root)) {
    raise(Errc::config_error, cfg.clips_root.string() + " is not a directory");
  }
  std::vector<fs::path> clip_dirs;
  for (const auto& entry : fs::directory_iterator(cfg.clips_root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "placements.json")) {
      clip_dirs.push_back(entry.path());
    }
  }
  std::sort(clip_dirs.begin(), clip_dirs.end());
  if (clip_dirs.empty()) raise(Errc::config_error, "no clips with placements.json found");

  std::vector<std::string> errors(clip_dirs.size());
  parallel_for(cfg.workers, clip_dirs.size(), [&](std::size_t i) {
    try {
      std::ifstream in(clip_dirs[i] / "placements.json");
      nlohmann::json j;
      in >> j;
      const auto placements = j.at("placements").get<std::vector<Placement>>();
      const int frame_count = j.at("frame_count").get<int>();
      const double degree = j.at("degree").get<double>();
      const OcclusionMetrics m = compute_clip_metrics(frame_count, placements, degree);
      nlohmann::json out = m;
      out["clip_id"] = j.at("clip_id").get<std::string>();
      write_json_atomic(clip_dirs[i] / "metrics.json", out);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  RunSummary summary;
  summary.command = "metrics";
  summary.clips_total = clip_dirs.size();
  for (std::size_t i = 0; i < clip_dirs.size(); ++i) {
    if (errors[i].empty()) {
      ++summary.clips_succeeded;
      ++summary.outputs_written;
    } else {
      summary.failures.push_back({clip_dirs[i].filename().string(), errors[i]});
    }
  }
  summary.wall_seconds = clock.seconds();
  write_json_atomic(cfg.clips_root / "run_summary.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// counterfactual

struct CounterfactualConfig {
  fs::path frames_root;
  fs::path masks_root;
  fs::path manifest_path;
  fs::path out_root;
  FillPolicy fill;
  int workers = 0;
  // Strict: mask count must equal frame count. Lenient: pair by file stem
  // and pass unmasked frames through (flagged in the summary).
  bool allow_missing_masks = false;
};

inline RunSummary run_counterfactual(const CounterfactualConfig& cfg) {
  WallClock clock;
  if (cfg.out_root.empty()) raise(Errc::config_error, "missing output directory");
  if (cfg.manifest_path.empty() && (cfg.frames_root.empty() || cfg.masks_root.empty())) {
    raise(Errc::config_error, "need --manifest or both --frames and --masks");
  }
  const std::vector<ClipEntry> clips =
      !cfg.manifest_path.empty() ? load_manifest(cfg.manifest_path)
                                 : discover_clips(cfg.frames_root, {}, cfg.masks_root);
  if (clips.empty()) raise(Errc::config_error, "no clips found");
  fs::create_directories(cfg.out_root);

  struct Outcome {
    bool ok = false;
    std::string error;
    std::vector<int> missing;
  };
  std::vector<Outcome> outcomes(clips.size());

  parallel_for(cfg.workers, clips.size(), [&](std::size_t i) {
    const ClipEntry& clip = clips[i];
    Outcome& outcome = outcomes[i];
    try {
      if (clip.mask_dir.empty() || !fs::is_directory(clip.mask_dir)) {
        raise(Errc::io_error, "no mask directory for clip " + clip.clip_id);
      }
      const ClipFrames source = load_clip_frames(clip.frames_dir);
      MaskSequence masks;
      if (cfg.allow_missing_masks) {
        masks = load_mask_sequence_matched(clip.mask_dir, list_image_files(clip.frames_dir));
      } else {
        masks = load_mask_sequence(clip.mask_dir, source.frames.size());
      }
      masks.clip_id = clip.clip_id;
      EraseResult erased = erase_actor(source.frames, masks, cfg.fill);
      outcome.missing = erased.missing_mask_frames;

      const fs::path tmp_dir = cfg.out_root / (".tmp_" + clip.clip_id);
      fs::remove_all(tmp_dir);
      save_clip_frames(tmp_dir, erased.frames, source.fps);
      const fs::path final_dir = cfg.out_root / clip.clip_id;
      fs::remove_all(final_dir);
      fs::rename(tmp_dir, final_dir);
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
  });

  RunSummary summary;
  summary.command = "counterfactual";
  summary.clips_total = clips.size();
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (outcomes[i].ok) {
      ++summary.clips_succeeded;
      ++summary.outputs_written;
      for (int f : outcomes[i].missing) {
        summary.notes.push_back(clips[i].clip_id + ": frame " + std::to_string(f) +
                                " has no mask, passed through");
      }
    } else {
      summary.failures.push_back({clips[i].clip_id, outcomes[i].error});
    }
  }
  summary.wall_seconds = clock.seconds();
  write_json_atomic(cfg.out_root / "run_summary.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// annotate (regenerate the CSV from a synthesize output tree)

struct AnnotateConfig {
  fs::path clips_root;       // synthesize output tree
  fs::path classes_csv;      // optional: clip_id,action_class
  fs::path out_path;         // defaults to clips_root/annotations.csv
  AnnotationSchema schema = AnnotationSchema::dynamic;
  std::string generation_time;  // optional override; default keeps stored rows' time
};

inline RunSummary run_annotate(const AnnotateConfig& cfg) {
  WallClock clock;
  if (!fs::is_directory(cfg.clips_root)) {
    raise(Errc::config_error, cfg.clips_root.string() + " is not a directory");
  }
  std::map<std::string, std::string> action_class;
  if (!cfg.classes_csv.empty()) {
    std::ifstream in(cfg.classes_csv, std::ios::binary);
    if (!in) raise(Errc::io_error, "cannot open " + cfg.classes_csv.string());
    const auto rows = csv::parse(in);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() >= 2) action_class[rows[i][0]] = rows[i][1];
    }
  }

  std::vector<fs::path> clip_dirs;
  for (const auto& entry : fs::directory_iterator(cfg.clips_root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "placements.json")) {
      clip_dirs.push_back(entry.path());
    }
  }
  std::sort(clip_dirs.begin(), clip_dirs.end());
  if (clip_dirs.empty()) raise(Errc::config_error, "no clips with placements.json found");

  RunSummary summary;
  summary.command = "annotate";
  summary.clips_total = clip_dirs.size();

  std::vector<ClipAnnotation> annotations;
  for (const auto& dir : clip_dirs) {
    try {
      nlohmann::json pj, mj;
      {
        std::ifstream in(dir / "placements.json");
        in >> pj;
      }
      {
        std::ifstream in(dir / "metrics.json");
        if (!in) raise(Errc::io_error, "missing metrics.json (run the metrics command first)");
        in >> mj;
      }
      ClipAnnotation row;
      row.file_name = pj.at("clip_id").get<std::string>();
      const std::string source = pj.value("source_clip_id", row.file_name);
      if (auto it = action_class.find(source); it != action_class.end()) {
        row.action_class = it->second;
      } else if (auto it2 = action_class.find(row.file_name); it2 != action_class.end()) {
        row.action_class = it2->second;
      } else {
        row.action_class = "unknown";
      }
      row.occluder_type = pj.value("occluder_type", "custom");
      row.occluder_file_name = pj.value("occluder_id", "");
      row.occluder_size_ratio = pj.at("degree").get<double>();
      row.occluder_pixel_ratio = mj.at("mean_area_ratio").get<double>();
      row.fps = pj.at("fps").get<double>();
      row.video_duration = pj.at("frame_count").get<int>() / row.fps;
      row.occlusion_duration = mj.at("duration_ratio").get<double>() * row.video_duration;
      row.clip_generation_time =
          cfg.generation_time.empty() ? "1970-01-01T00:00:00Z" : cfg.generation_time;
      annotations.push_back(std::move(row));
      ++summary.clips_succeeded;
    } catch (const std::exception& e) {
      summary.failures.push_back({dir.filename().string(), e.what()});
    }
  }

  std::sort(annotations.begin(), annotations.end(),
            [](const ClipAnnotation& a, const ClipAnnotation& b) { return a.file_name < b.file_name; });
  const fs::path out_path =
      cfg.out_path.empty() ? cfg.clips_root / "annotations.csv" : cfg.out_path;
  std::ostringstream text;
  write_annotations(text, annotations, cfg.schema);
  write_text_atomic(out_path, text.str());
  summary.outputs_written = 1;
  summary.wall_seconds = clock.seconds();
  return summary;
}

// ---------------------------------------------------------------------------
// car-loss

struct CarLossConfig {
  fs::path pairs_path;   // JSONL: {"p":[...],"c":[...]}
  fs::path labels_path;  // JSONL: {"index":i} or {"probs":[...]}
  fs::path out_path;     // empty -> stdout
  LossConfig loss;
  std::vector<double> sweep_alphas;  // non-empty -> emit the sweep table
};

inline std::vector<PredictionPair> read_prediction_pairs_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  std::vector<PredictionPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      PredictionPair pair;
      pair.p = j.at("p").get<std::vector<double>>();
      pair.c = j.at("c").get<std::vector<double>>();
      pair.validate();
      pairs.push_back(std::move(pair));
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_error, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (pairs.empty()) raise(Errc::empty_batch, path.string() + " has no records");
  return pairs;
}

inline std::vector<LabelDistribution> read_labels_jsonl(const fs::path& path,
                                                        const std::vector<PredictionPair>& pairs) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  std::vector<LabelDistribution> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (labels.size() >= pairs.size()) {
      raise(Errc::length_mismatch, path.string() + ": more labels than prediction pairs");
    }
    const std::size_t n = pairs[labels.size()].size();
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (j.contains("index")) {
        labels.push_back(LabelDistribution::one_hot(n, j.at("index").get<std::size_t>()));
      } else if (j.contains("probs")) {
        LabelDistribution label;
        label.q = j.at("probs").get<std::vector<double>>();
        label.validate();
        labels.push_back(std::move(label));
      } else {
        raise(Errc::parse_error, "label record needs index or probs");
      }
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_error, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::out_of_range& e) {
      raise(Errc::parse_error, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (labels.size() != pairs.size()) {
    raise(Errc::length_mismatch, path.string() + ": " + std::to_string(labels.size()) +
                                     " labels for " + std::to_string(pairs.size()) + " pairs");
  }
  return labels;
}

inline std::string alpha_sweep_csv(const std::vector<AlphaSweepRow>& rows) {
  std::ostringstream os;
  os << "alpha,mean_cross_entropy,mean_kl,mean_total\n";
  for (const auto& row : rows) {
    os << csv::format_double(row.alpha) << ',' << csv::format_double(row.mean_cross_entropy)
       << ',' << csv::format_double(row.mean_kl) << ',' << csv::format_double(row.mean_total)
       << '\n';
  }
  return os.str();
}

inline RunSummary run_car_loss(const CarLossConfig& cfg, std::ostream& stdout_stream) {
  WallClock clock;
  cfg.loss.validate();
  const std::vector<PredictionPair> pairs = read_prediction_pairs_jsonl(cfg.pairs_path);
  const std::vector<LabelDistribution> labels = read_labels_jsonl(cfg.labels_path, pairs);

  std::string output;
  if (!cfg.sweep_alphas.empty()) {
    output = alpha_sweep_csv(alpha_sweep(pairs, labels, cfg.sweep_alphas, cfg.loss));
  } else {
    std::ostringstream os;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const LossBreakdown loss = car_loss(pairs[i], labels[i], cfg.loss);
      const LossGradient grad = car_loss_gradient(pairs[i], labels[i], cfg.loss);
      const nlohmann::json j{{"index", i},
                             {"loss", loss.total},
                             {"cross_entropy", loss.cross_entropy},
                             {"kl_divergence", loss.kl_divergence},
                             {"grad_p", grad.grad_p},
                             {"grad_c", grad.grad_c}};
      os << j.dump() << '\n';
    }
    output = os.str();
  }
  if (cfg.out_path.empty()) {
    stdout_stream << output;
  } else {
    write_text_atomic(cfg.out_path, output);
  }

  RunSummary summary;
  summary.command = "car-loss";
  summary.clips_total = pairs.size();
  summary.clips_succeeded = pairs.size();
  summary.outputs_written = 1;
  summary.wall_seconds = clock.seconds();
  return summary;
}

// ---------------------------------------------------------------------------
// report

struct ReportConfig {
  std::vector<fs::path> prediction_paths;  // occluded / evaluated runs
  std::vector<fs::path> baseline_paths;    // unoccluded runs, same order
  fs::path factors_path;                   // CSV clip_id,factor
  fs::path parents_path;                   // CSV class,parent
  fs::path out_dir;
  std::vector<std::size_t> ks{1, 5};
  std::vector<double> bin_edges{0.0, 0.25, 0.5, 0.75, 1.0};
  DropOrder drop_order = DropOrder::difference_then_average;
};

inline std::map<std::string, double> load_factor_map_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  const auto rows = csv::parse(in);
  if (rows.empty() || rows.front().size() < 2) {
    raise(Errc::schema_error, path.string() + ": need header clip_id,factor");
  }
  std::map<std::string, double> factors;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double value = 0;
    if (rows[i].size() < 2 || !csv::parse_double(rows[i][1], value)) {
      raise(Errc::row_error, path.string() + " row " + std::to_string(i) + ": bad factor");
    }
    factors[rows[i][0]] = value;
  }
  return factors;
}

inline RunSummary run_report(const ReportConfig& cfg) {
  WallClock clock;
  if (cfg.prediction_paths.empty()) raise(Errc::config_error, "no prediction files given");
  if (cfg.out_dir.empty()) raise(Errc::config_error, "missing output directory");
  if (!cfg.baseline_paths.empty() && cfg.baseline_paths.size() != cfg.prediction_paths.size()) {
    raise(Errc::config_error, "baseline and prediction file counts differ");
  }
  fs::create_directories(cfg.out_dir);

  std::vector<std::vector<PredictionRecord>> predictions, baselines;
  for (const auto& p : cfg.prediction_paths) predictions.push_back(load_predictions_jsonl(p));
  for (const auto& p : cfg.baseline_paths) baselines.push_back(load_predictions_jsonl(p));

  nlohmann::json report;
  RunSummary summary;
  summary.command = "report";

  {  // top-k accuracy per k, first prediction set (and baseline when given)
    std::ostringstream os;
    os << "set,k,accuracy\n";
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k : cfg.ks) {
      const double acc = top_k_accuracy(predictions.front(), k);
      os << "occluded," << k << ',' << csv::format_double(acc) << '\n';
      rows.push_back({{"set", "occluded"}, {"k", k}, {"accuracy", acc}});
      if (!baselines.empty()) {
        const double base = top_k_accuracy(baselines.front(), k);
        os << "baseline," << k << ',' << csv::format_double(base) << '\n';
        rows.push_back({{"set", "baseline"}, {"k", k}, {"accuracy", base}});
      }
    }
    write_text_atomic(cfg.out_dir / "accuracy.csv", os.str());
    report["accuracy"] = rows;
    ++summary.outputs_written;
  }

  if (!baselines.empty() && !cfg.factors_path.empty()) {
    const auto factors = load_factor_map_csv(cfg.factors_path);
    const auto bins =
        accuracy_drop_by_factor(baselines.front(), predictions.front(), factors, cfg.bin_edges);
    std::ostringstream os;
    os << "lo,hi,clip_count,baseline_accuracy,occluded_accuracy,drop,empty\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& bin : bins) {
      os << csv::format_double(bin.lo) << ',' << csv::format_double(bin.hi) << ','
         << bin.clip_count << ',' << csv::format_double(bin.baseline_accuracy) << ','
         << csv::format_double(bin.occluded_accuracy) << ',' << csv::format_double(bin.drop)
         << ',' << (bin.is_empty ? "true" : "false") << '\n';
      rows.push_back({{"lo", bin.lo},
                      {"hi", bin.hi},
                      {"clip_count", bin.clip_count},
                      {"baseline_accuracy", bin.baseline_accuracy},
                      {"occluded_accuracy", bin.occluded_accuracy},
                      {"drop", bin.drop},
                      {"empty", bin.is_empty}});
      if (bin.is_empty) summary.notes.push_back("empty factor bin [" + csv::format_double(bin.lo) +
                                                ", " + csv::format_double(bin.hi) + ")");
    }
    write_text_atomic(cfg.out_dir / "drops_by_factor.csv", os.str());
    report["drops_by_factor"] = rows;
    ++summary.outputs_written;
  }

  if (!cfg.parents_path.empty()) {
    const ParentClassMap parents = load_parent_map_csv(cfg.parents_path);
    const auto table = parent_class_aggregate(predictions.front(), parents, cfg.ks.front());
    std::ostringstream os;
    os << "parent,clip_count,accuracy\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table) {
      os << csv::escape_field(row.parent) << ',' << row.clip_count << ','
         << csv::format_double(row.accuracy) << '\n';
      rows.push_back({{"parent", row.parent}, {"clip_count", row.clip_count}, {"accuracy", row.accuracy}});
    }
    write_text_atomic(cfg.out_dir / "parent_accuracy.csv", os.str());
    report["parent_accuracy"] = rows;
    ++summary.outputs_written;
  }

  if (!baselines.empty()) {
    const auto drops = class_accuracy_drop(baselines, predictions, cfg.ks.front(), cfg.drop_order);
    std::ostringstream os;
    os << "class,drop\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : drops) {
      os << csv::escape_field(row.label) << ',' << csv::format_double(row.drop) << '\n';
      rows.push_back({{"class", row.label}, {"drop", row.drop}});
    }
    write_text_atomic(cfg.out_dir / "class_drop.csv", os.str());
    report["class_drop"] = rows;
    ++summary.outputs_written;
  }

  write_json_atomic(cfg.out_dir / "report.json", report);
  summary.clips_total = predictions.front().size();
  summary.clips_succeeded = summary.clips_total;
  summary.wall_seconds = clock.seconds();
  write_json_atomic(cfg.out_dir / "run_summary.json", summary);
  return summary;
}

}  // namespace occtk
