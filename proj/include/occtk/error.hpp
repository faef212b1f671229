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

#include <stdexcept>
#include <string>
#include <string_view>

namespace occtk {

/// Every failure the library reports, one code per distinct condition.
/// Codes are part of the public contract: tests and callers match on them.
enum class Errc {
  // occluder library
  decode_error,
  no_alpha_channel,
  too_small,
  empty_catalog,
  unknown_occluder,
  // track ingest
  parse_error,
  empty_track,
  inconsistent_header,
  // compositor
  degenerate_scale,
  // metrics
  empty_box,
  // counterfactual
  dimension_mismatch,
  missing_mask,
  frame_count_mismatch,
  // car math
  empty_vector,
  length_mismatch,
  non_finite_loss,
  empty_batch,
  invalid_distribution,
  // dataset io
  io_error,
  schema_error,
  row_error,
  // report
  empty_input,
  unknown_label,
  misaligned_clips,
  unmapped_label,
  // cli
  config_error,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::decode_error: return "DecodeError";
    case Errc::no_alpha_channel: return "NoAlphaChannel";
    case Errc::too_small: return "TooSmall";
    case Errc::empty_catalog: return "EmptyCatalog";
    case Errc::unknown_occluder: return "UnknownOccluder";
    case Errc::parse_error: return "ParseError";
    case Errc::empty_track: return "EmptyTrack";
    case Errc::inconsistent_header: return "InconsistentHeader";
    case Errc::degenerate_scale: return "DegenerateScale";
    case Errc::empty_box: return "EmptyBox";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::missing_mask: return "MissingMask";
    case Errc::frame_count_mismatch: return "FrameCountMismatch";
    case Errc::empty_vector: return "EmptyVector";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::empty_batch: return "EmptyBatch";
    case Errc::invalid_distribution: return "InvalidDistribution";
    case Errc::io_error: return "IoError";
    case Errc::schema_error: return "SchemaError";
    case Errc::row_error: return "RowError";
    case Errc::empty_input: return "EmptyInput";
    case Errc::unknown_label: return "UnknownLabel";
    case Errc::misaligned_clips: return "MisalignedClips";
    case Errc::unmapped_label: return "UnmappedLabel";
    case Errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace occtk
