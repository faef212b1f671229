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

#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "occtk/annotations.hpp"
#include "occtk/prng.hpp"

using occtk::AnnotationSchema;
using occtk::ClipAnnotation;
using occtk::Errc;
using occtk::Error;

namespace {

ClipAnnotation sample_record() {
  ClipAnnotation r;
  r.action_class = "walking the dog";
  r.file_name = "clip_pan__d050";
  r.occluder_type = "backpack";
  r.occluder_file_name = "backpack/block.png";
  r.occluder_pixel_ratio = 0.25;
  r.occluder_size_ratio = 0.5;
  r.occlusion_duration = 0.8;
  r.video_duration = 1.0;
  r.fps = 12;
  r.clip_generation_time = "1970-01-01T00:00:00Z";
  return r;
}

std::string write_to_string(const std::vector<ClipAnnotation>& records,
                            AnnotationSchema schema = AnnotationSchema::dynamic) {
  std::ostringstream os;
  occtk::write_annotations(os, records, schema);
  return os.str();
}

}  // namespace

TEST_CASE("the header carries the ten fields in canonical order") {
  const std::string text = write_to_string({});
  CHECK(text ==
        "action_class,file_name,occluder_type,occluder_file_name,occluder_pixel_ratio,"
        "occluder_size_ratio,occlusion_duration,video_duration,fps,clip_generation_time\n");
}

TEST_CASE("one record round-trips exactly") {
  const ClipAnnotation r = sample_record();
  const std::string text = write_to_string({r});
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);

  std::istringstream in(text);
  const auto result = occtk::read_annotations(in);
  CHECK(result.issues.empty());
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0] == r);
}

TEST_CASE("fields with commas and quotes survive the round trip") {
  ClipAnnotation r = sample_record();
  r.action_class = "passing American football (in game), fast";
  r.occluder_file_name = "weird\"name\".png";
  const std::string text = write_to_string({r});
  CHECK(text.find("\"passing American football (in game), fast\"") != std::string::npos);

  std::istringstream in(text);
  const auto result = occtk::read_annotations(in);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0] == r);
}

TEST_CASE("a thousand generated records round-trip identically") {
  occtk::SplitMix64 rng(4711);
  std::vector<ClipAnnotation> records;
  const char* charset = "abc ,\"XYZ-_09'\n";
  const std::size_t charset_len = 15;
  for (int i = 0; i < 1000; ++i) {
    ClipAnnotation r;
    auto random_string = [&](std::size_t max_len) {
      std::string s;
      const std::size_t len = rng.uniform_index(max_len + 1);
      for (std::size_t k = 0; k < len; ++k) s += charset[rng.uniform_index(charset_len)];
      return s;
    };
    r.action_class = random_string(12);
    r.file_name = "clip_" + std::to_string(i);
    r.occluder_type = random_string(8);
    r.occluder_file_name = random_string(16);
    r.occluder_pixel_ratio = rng.uniform01();
    r.occluder_size_ratio = rng.uniform01();
    r.video_duration = rng.uniform01() * 100;
    r.occlusion_duration = r.video_duration * rng.uniform01();
    r.fps = 1 + rng.uniform01() * 60;
    r.clip_generation_time = "2024-06-0" + std::to_string(1 + rng.uniform_index(9)) + "T12:00:00Z";
    records.push_back(std::move(r));
  }

  std::istringstream in(write_to_string(records));
  const auto result = occtk::read_annotations(in);
  CHECK(result.issues.empty());
  REQUIRE(result.records.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    REQUIRE(result.records[i] == records[i]);  // doubles via shortest round-trip form
  }
}

TEST_CASE("out-of-range ratios are per-row errors, collected not fatal") {
  std::ostringstream os;
  occtk::write_annotations(os, {sample_record()});
  std::string text = os.str();
  ClipAnnotation good = sample_record();
  good.file_name = "second";
  // Hand-craft a bad middle row: pixel ratio 1.2.
  text += "x,bad,backpack,f.png,1.2,0.5,0.5,1,12,t\n";
  std::ostringstream tail;
  occtk::write_annotations(tail, {good});
  text += tail.str().substr(tail.str().find('\n') + 1);

  std::istringstream in(text);
  const auto result = occtk::read_annotations(in);
  REQUIRE(result.records.size() == 2);
  REQUIRE(result.issues.size() == 1);
  CHECK(result.issues[0].row == 2);
  CHECK(result.issues[0].message.find("occluder_pixel_ratio") != std::string::npos);
}

TEST_CASE("writers refuse invalid records outright") {
  ClipAnnotation bad = sample_record();
  bad.occlusion_duration = 2.0;  // longer than the video
  CHECK_THROWS_AS(write_to_string({bad}), Error);
  ClipAnnotation bad_fps = sample_record();
  bad_fps.fps = 0;
  CHECK_THROWS_AS(write_to_string({bad_fps}), Error);
}

TEST_CASE("reordered columns parse by header name") {
  const std::string text =
      "fps,action_class,file_name,occluder_type,occluder_file_name,occluder_pixel_ratio,"
      "occluder_size_ratio,occlusion_duration,video_duration,clip_generation_time\n"
      "12,run,clipX,dog,dog/a.png,0.1,0.25,0.5,2,2024-01-01T00:00:00Z\n";
  std::istringstream in(text);
  const auto result = occtk::read_annotations(in);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].action_class == "run");
  CHECK(result.records[0].fps == 12.0);
  CHECK(result.records[0].occluder_size_ratio == 0.25);
}

TEST_CASE("a missing column is a SchemaError") {
  const std::string text = "action_class,file_name\nx,y\n";
  std::istringstream in(text);
  try {
    occtk::read_annotations(in, AnnotationSchema::dynamic);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::schema_error);
  }
  // The same two columns are exactly the interactive schema.
  std::istringstream in2(text);
  const auto result = occtk::read_annotations(in2, AnnotationSchema::interactive);
  CHECK(result.records.size() == 1);
}

TEST_CASE("reduced schema tiers write their own field subsets") {
  const ClipAnnotation r = sample_record();
  const std::string static_text = write_to_string({r}, AnnotationSchema::static_scene);
  CHECK(static_text.rfind("action_class,file_name,fps,video_duration\n", 0) == 0);
  const std::string interactive_text = write_to_string({r}, AnnotationSchema::interactive);
  CHECK(interactive_text.rfind("action_class,file_name\n", 0) == 0);

  std::istringstream in(static_text);
  const auto result = occtk::read_annotations(in, AnnotationSchema::static_scene);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].fps == r.fps);
  CHECK(result.records[0].video_duration == r.video_duration);
}
