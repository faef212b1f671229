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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "occtk/error.hpp"
#include "occtk/image.hpp"
#include "occtk/prng.hpp"

namespace occtk {

enum class OccluderCategory { backpack, handbag, suitcase, dog, custom };

inline std::string_view to_string(OccluderCategory c) {
  switch (c) {
    case OccluderCategory::backpack: return "backpack";
    case OccluderCategory::handbag: return "handbag";
    case OccluderCategory::suitcase: return "suitcase";
    case OccluderCategory::dog: return "dog";
    case OccluderCategory::custom: return "custom";
  }
  return "custom";
}

/// Directory names select the category; anything unrecognized is `custom`.
inline OccluderCategory category_from_name(std::string_view name) {
  if (name == "backpack" || name == "backpacks") return OccluderCategory::backpack;
  if (name == "handbag" || name == "handbags") return OccluderCategory::handbag;
  if (name == "suitcase" || name == "suitcases") return OccluderCategory::suitcase;
  if (name == "dog" || name == "dogs") return OccluderCategory::dog;
  return OccluderCategory::custom;
}

/// Opaque-pixel floor for quality control. Assets below it are rejected at
/// load time unless the caller lowers the threshold.
inline constexpr std::int64_t default_min_opaque_pixels = 30000;

/// A foreground cut-out with alpha, the thing pasted over actors.
struct OccluderAsset {
  std::string id;  // unique within a catalog; relative path for loaded files
  OccluderCategory category = OccluderCategory::custom;
  ImageRgba image;
  std::int64_t opaque_pixel_count = 0;
};

/// Validate an in-memory cut-out and stamp the recounted opaque total.
/// Throws TooSmall when the count is under min_opaque_pixels.
inline OccluderAsset make_occluder(std::string id, OccluderCategory category, ImageRgba image,
                                   std::int64_t min_opaque_pixels = default_min_opaque_pixels) {
  if (image.width <= 0 || image.height <= 0) {
    raise(Errc::decode_error, id + ": empty raster");
  }
  OccluderAsset asset;
  asset.id = std::move(id);
  asset.category = category;
  asset.opaque_pixel_count = image.opaque_pixel_count();
  asset.image = std::move(image);
  if (asset.opaque_pixel_count < min_opaque_pixels) {
    raise(Errc::too_small, asset.id + ": " + std::to_string(asset.opaque_pixel_count) +
                               " opaque pixels, need " + std::to_string(min_opaque_pixels));
  }
  return asset;
}

/// Immutable after construction; ordering is fixed by the loader
/// (lexicographic by relative path) so catalogs reload identically.
struct OccluderCatalog {
  std::vector<OccluderAsset> assets;
  std::map<OccluderCategory, std::vector<std::size_t>> category_index;

  void add(OccluderAsset asset) {
    for (const auto& existing : assets) {
      if (existing.id == asset.id) raise(Errc::decode_error, "duplicate occluder id " + asset.id);
    }
    category_index[asset.category].push_back(assets.size());
    assets.push_back(std::move(asset));
  }

  bool empty() const { return assets.empty(); }
  std::size_t size() const { return assets.size(); }

  const OccluderAsset* find(std::string_view id) const {
    for (const auto& a : assets) {
      if (a.id == id) return &a;
    }
    return nullptr;
  }

  std::size_t count(OccluderCategory c) const {
    auto it = category_index.find(c);
    return it == category_index.end() ? 0 : it->second.size();
  }
};

/// Deterministic choice, uniform over eligible assets: one SplitMix64 stream
/// seeded with `seed`, one bounded draw. Same (catalog order, seed, filter)
/// always returns the same asset.
inline const OccluderAsset& sample_occluder(const OccluderCatalog& catalog, std::uint64_t seed,
                                            std::optional<OccluderCategory> category_filter = {}) {
  std::vector<std::size_t> eligible;
  if (category_filter) {
    auto it = catalog.category_index.find(*category_filter);
    if (it != catalog.category_index.end()) eligible = it->second;
  } else {
    eligible.resize(catalog.size());
    for (std::size_t i = 0; i < eligible.size(); ++i) eligible[i] = i;
  }
  if (eligible.empty()) {
    raise(Errc::empty_catalog, category_filter
                                   ? "no occluders in category " + std::string(to_string(*category_filter))
                                   : "catalog is empty");
  }
  SplitMix64 rng(seed);
  return catalog.assets[eligible[rng.uniform_index(eligible.size())]];
}

}  // namespace occtk
