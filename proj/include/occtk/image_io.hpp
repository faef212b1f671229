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

// File codecs only. Everything pixel-level in the library works on plain
// rasters; OpenCV is confined to imread/imwrite here.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "occtk/counterfactual.hpp"
#include "occtk/error.hpp"
#include "occtk/image.hpp"
#include "occtk/occluder.hpp"

namespace occtk {

inline ImageRgba decode_image_rgba(const std::filesystem::path& path, bool require_alpha = false) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) raise(Errc::decode_error, "cannot decode " + path.string());
  if (mat.depth() != CV_8U) {
    raise(Errc::decode_error, path.string() + ": only 8-bit images are supported");
  }
  if (require_alpha && mat.channels() != 4) {
    raise(Errc::no_alpha_channel, path.string() + " has no alpha channel");
  }
  ImageRgba img(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      Rgba& p = img.at(x, y);
      switch (mat.channels()) {
        case 1: {
          const std::uint8_t v = mat.at<std::uint8_t>(y, x);
          p = {v, v, v, 255};
          break;
        }
        case 3: {
          const cv::Vec3b v = mat.at<cv::Vec3b>(y, x);
          p = {v[2], v[1], v[0], 255};  // BGR -> RGB
          break;
        }
        case 4: {
          const cv::Vec4b v = mat.at<cv::Vec4b>(y, x);
          p = {v[2], v[1], v[0], v[3]};
          break;
        }
        default:
          raise(Errc::decode_error, path.string() + ": unsupported channel count");
      }
    }
  }
  return img;
}

inline ImageGray decode_image_gray(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (mat.empty()) raise(Errc::decode_error, "cannot decode " + path.string());
  ImageGray img(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) img.at(x, y) = mat.at<std::uint8_t>(y, x);
  }
  return img;
}

/// PNG write via a temp file in the same directory, then rename, so readers
/// never observe a half-written image.
inline void encode_png(const std::filesystem::path& path, const ImageRgba& img,
                       bool keep_alpha = false) {
  cv::Mat mat(img.height, img.width, keep_alpha ? CV_8UC4 : CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Rgba& p = img.at(x, y);
      if (keep_alpha) {
        mat.at<cv::Vec4b>(y, x) = {p.b, p.g, p.r, p.a};
      } else {
        mat.at<cv::Vec3b>(y, x) = {p.b, p.g, p.r};
      }
    }
  }
  const std::filesystem::path tmp = path.string() + ".tmp.png";
  if (!cv::imwrite(tmp.string(), mat)) {
    raise(Errc::io_error, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) raise(Errc::io_error, dir.string() + " is not a directory");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct ClipFrames {
  std::vector<Frame> frames;
  std::optional<double> fps;  // from the clip.json sidecar when present
};

/// Numbered frame images plus an optional `clip.json` sidecar with fps.
inline ClipFrames load_clip_frames(const std::filesystem::path& dir) {
  ClipFrames clip;
  for (const auto& file : list_image_files(dir)) {
    clip.frames.push_back(decode_image_rgba(file));
  }
  if (clip.frames.empty()) raise(Errc::io_error, "no frames in " + dir.string());
  const std::filesystem::path sidecar = dir / "clip.json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    nlohmann::json j;
    try {
      in >> j;
      if (j.contains("fps")) clip.fps = j.at("fps").get<double>();
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::parse_error, sidecar.string() + ": " + e.what());
    }
  }
  return clip;
}

inline void save_clip_frames(const std::filesystem::path& dir, const std::vector<Frame>& frames,
                             std::optional<double> fps = {}) {
  std::filesystem::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "%06zu.png", i);
    encode_png(dir / name, frames[i]);
  }
  if (fps) {
    nlohmann::json j{{"fps", *fps}};
    std::ofstream out(dir / "clip.json", std::ios::binary);
    out << j.dump(2) << '\n';
  }
}

/// Quality-controlled load of one cut-out; the category comes from the
/// parent directory name unless overridden.
inline OccluderAsset load_occluder(const std::filesystem::path& path,
                                   std::int64_t min_opaque_pixels = default_min_opaque_pixels,
                                   std::optional<OccluderCategory> category = {}) {
  ImageRgba img = decode_image_rgba(path, /*require_alpha=*/true);
  const OccluderCategory cat =
      category ? *category : category_from_name(path.parent_path().filename().string());
  const std::string id = path.parent_path().filename().string() + "/" + path.filename().string();
  return make_occluder(id, cat, std::move(img), min_opaque_pixels);
}

struct CatalogLoadResult {
  OccluderCatalog catalog;
  std::vector<std::pair<std::string, std::string>> rejected;  // path, reason
};

/// Walk `occluders/<category>/<file>` in lexicographic order so the catalog
/// ordering (and therefore sampling) is identical on every load. Assets that
/// fail quality control are skipped and reported, not fatal.
inline CatalogLoadResult load_catalog(const std::filesystem::path& root,
                                      std::int64_t min_opaque_pixels = default_min_opaque_pixels) {
  if (!std::filesystem::is_directory(root)) {
    raise(Errc::io_error, root.string() + " is not a directory");
  }
  CatalogLoadResult result;
  std::vector<std::filesystem::path> subdirs;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());

  auto load_dir = [&](const std::filesystem::path& dir, OccluderCategory category) {
    for (const auto& file : list_image_files(dir)) {
      try {
        result.catalog.add(load_occluder(file, min_opaque_pixels, category));
      } catch (const Error& e) {
        result.rejected.emplace_back(file.string(), e.what());
      }
    }
  };

  // Image files directly under the root count as `custom`.
  load_dir(root, OccluderCategory::custom);
  for (const auto& dir : subdirs) {
    load_dir(dir, category_from_name(dir.filename().string()));
  }
  return result;
}

/// Numbered mask images mirroring the frame numbering. When the caller
/// knows the clip length and the counts disagree, that is an error.
inline MaskSequence load_mask_sequence(const std::filesystem::path& dir,
                                       std::optional<std::size_t> expected_frames = {}) {
  MaskSequence seq;
  seq.clip_id = dir.filename().string();
  const auto files = list_image_files(dir);
  if (expected_frames && files.size() != *expected_frames) {
    raise(Errc::frame_count_mismatch, dir.string() + ": " + std::to_string(files.size()) +
                                          " masks for " + std::to_string(*expected_frames) +
                                          " frames");
  }
  for (const auto& file : files) {
    seq.masks.push_back(binarize_mask(decode_image_gray(file)));
  }
  return seq;
}

/// Lenient variant: pair masks to frames by file stem (the mask dir mirrors
/// the frame dir), leaving frames without a mask unset so erase_actor can
/// flag them instead of failing.
inline MaskSequence load_mask_sequence_matched(const std::filesystem::path& mask_dir,
                                               const std::vector<std::filesystem::path>& frame_files) {
  MaskSequence seq;
  seq.clip_id = mask_dir.filename().string();
  seq.masks.assign(frame_files.size(), std::nullopt);
  std::map<std::string, std::filesystem::path> by_stem;
  for (const auto& file : list_image_files(mask_dir)) {
    by_stem[file.stem().string()] = file;
  }
  for (std::size_t i = 0; i < frame_files.size(); ++i) {
    auto it = by_stem.find(frame_files[i].stem().string());
    if (it != by_stem.end()) seq.masks[i] = binarize_mask(decode_image_gray(it->second));
  }
  return seq;
}

}  // namespace occtk
