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

#include <cstdlib>
#include <filesystem>
#include <map>

#include <catch2/catch_amalgamated.hpp>

#include "occtk/image_io.hpp"
#include "occtk/occluder.hpp"

using occtk::Errc;
using occtk::Error;
using occtk::ImageRgba;
using occtk::OccluderAsset;
using occtk::OccluderCatalog;
using occtk::OccluderCategory;

namespace {

ImageRgba opaque_image(int w, int h, std::uint8_t tone = 128) {
  return ImageRgba(w, h, {tone, tone, tone, 255});
}

OccluderCatalog four_asset_catalog() {
  OccluderCatalog catalog;
  catalog.add(occtk::make_occluder("a", OccluderCategory::backpack, opaque_image(10, 10, 10), 1));
  catalog.add(occtk::make_occluder("b", OccluderCategory::handbag, opaque_image(10, 10, 20), 1));
  catalog.add(occtk::make_occluder("c", OccluderCategory::dog, opaque_image(10, 10, 30), 1));
  catalog.add(occtk::make_occluder("d", OccluderCategory::dog, opaque_image(10, 10, 40), 1));
  return catalog;
}

}  // namespace

TEST_CASE("a fully opaque 200x200 image counts 40000 opaque pixels") {
  const OccluderAsset asset =
      occtk::make_occluder("x", OccluderCategory::custom, opaque_image(200, 200));
  CHECK(asset.opaque_pixel_count == 40000);
}

TEST_CASE("an all-transparent image is rejected as TooSmall") {
  ImageRgba img(100, 100, {50, 50, 50, 0});
  try {
    occtk::make_occluder("x", OccluderCategory::custom, img);
    FAIL("expected TooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_small);
  }
}

TEST_CASE("opaque count is recomputed, not trusted") {
  ImageRgba img(300, 300, {1, 2, 3, 0});
  for (int y = 0; y < 300; ++y) {
    for (int x = 0; x < 150; ++x) img.at(x, y).a = 9;
  }
  const OccluderAsset asset = occtk::make_occluder("x", OccluderCategory::custom, img);
  CHECK(asset.opaque_pixel_count == 45000);
  CHECK(asset.opaque_pixel_count == asset.image.opaque_pixel_count());
}

TEST_CASE("sampling a singleton catalog returns that asset for any seed") {
  OccluderCatalog catalog;
  catalog.add(occtk::make_occluder("only", OccluderCategory::custom, opaque_image(8, 8), 1));
  for (std::uint64_t seed : {0ULL, 1ULL, 999ULL}) {
    CHECK(occtk::sample_occluder(catalog, seed).id == "only");
  }
}

TEST_CASE("same seed always selects the same asset") {
  const OccluderCatalog catalog = four_asset_catalog();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(occtk::sample_occluder(catalog, seed).id == occtk::sample_occluder(catalog, seed).id);
  }
}

TEST_CASE("selection over seeds 0..9999 is uniform within five points") {
  const OccluderCatalog catalog = four_asset_catalog();
  std::map<std::string, int> counts;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    counts[occtk::sample_occluder(catalog, seed).id] += 1;
  }
  REQUIRE(counts.size() == 4);
  for (const auto& [id, n] : counts) {
    const double freq = n / 10000.0;
    INFO(id << " frequency " << freq);
    CHECK(freq > 0.20);
    CHECK(freq < 0.30);
  }
}

TEST_CASE("category filter restricts the pool; empty pool is EmptyCatalog") {
  const OccluderCatalog catalog = four_asset_catalog();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const OccluderAsset& asset = occtk::sample_occluder(catalog, seed, OccluderCategory::dog);
    CHECK((asset.id == "c" || asset.id == "d"));
  }
  try {
    occtk::sample_occluder(catalog, 0, OccluderCategory::suitcase);
    FAIL("expected EmptyCatalog");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_catalog);
  }
  OccluderCatalog empty;
  CHECK_THROWS_AS(occtk::sample_occluder(empty, 0), Error);
}

TEST_CASE("duplicate ids are rejected") {
  OccluderCatalog catalog;
  catalog.add(occtk::make_occluder("same", OccluderCategory::custom, opaque_image(8, 8), 1));
  CHECK_THROWS_AS(
      catalog.add(occtk::make_occluder("same", OccluderCategory::custom, opaque_image(8, 8), 1)),
      Error);
}

TEST_CASE("directory loads are stable and category-aware") {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "occtk_test_catalog";
  fs::remove_all(root);
  fs::create_directories(root / "backpack");
  fs::create_directories(root / "strange_stuff");
  occtk::encode_png(root / "backpack" / "b1.png", opaque_image(20, 20, 100), true);
  occtk::encode_png(root / "backpack" / "b0.png", opaque_image(20, 20, 90), true);
  occtk::encode_png(root / "strange_stuff" / "s.png", opaque_image(20, 20, 80), true);

  const auto first = occtk::load_catalog(root, /*min_opaque_pixels=*/100);
  const auto second = occtk::load_catalog(root, /*min_opaque_pixels=*/100);
  REQUIRE(first.catalog.size() == 3);
  REQUIRE(second.catalog.size() == 3);
  for (std::size_t i = 0; i < first.catalog.size(); ++i) {
    CHECK(first.catalog.assets[i].id == second.catalog.assets[i].id);
    CHECK(first.catalog.assets[i].image == second.catalog.assets[i].image);
  }
  // Lexicographic within a category directory.
  CHECK(first.catalog.assets[0].id == "backpack/b0.png");
  CHECK(first.catalog.assets[1].id == "backpack/b1.png");
  CHECK(first.catalog.assets[0].category == OccluderCategory::backpack);
  // Unknown directory name maps to custom.
  CHECK(first.catalog.assets[2].category == OccluderCategory::custom);

  // Below-threshold assets are rejected with a reason, not fatal.
  const auto strict = occtk::load_catalog(root, /*min_opaque_pixels=*/1000);
  CHECK(strict.catalog.size() == 0);
  CHECK(strict.rejected.size() == 3);

  fs::remove_all(root);
}

TEST_CASE("images without an alpha channel are NoAlphaChannel") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "occtk_test_noalpha";
  fs::remove_all(dir);
  fs::create_directories(dir);
  occtk::encode_png(dir / "rgb.png", opaque_image(16, 16), /*keep_alpha=*/false);
  try {
    occtk::load_occluder(dir / "rgb.png", 1);
    FAIL("expected NoAlphaChannel");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_alpha_channel);
  }
  try {
    occtk::load_occluder(dir / "missing.png", 1);
    FAIL("expected DecodeError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::decode_error);
  }
  fs::remove_all(dir);
}

// With the real asset collection mounted, the four category directories
// carry 153/118/888/1629 assets. Checked only when OCCTK_REAL_OCCLUDERS
// points at it; skipped otherwise.
TEST_CASE("real inventory counts per category") {
  const char* root = std::getenv("OCCTK_REAL_OCCLUDERS");
  if (root == nullptr) {
    SKIP("OCCTK_REAL_OCCLUDERS not set");
  }
  const auto loaded = occtk::load_catalog(root);
  CHECK(loaded.catalog.count(OccluderCategory::backpack) == 153);
  CHECK(loaded.catalog.count(OccluderCategory::handbag) == 118);
  CHECK(loaded.catalog.count(OccluderCategory::suitcase) == 888);
  CHECK(loaded.catalog.count(OccluderCategory::dog) == 1629);
}
