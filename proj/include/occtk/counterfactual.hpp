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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "occtk/error.hpp"
#include "occtk/image.hpp"

namespace occtk {

/// Per-frame binary actor masks (1 = actor pixel). Frames may lack a mask;
/// erase_actor passes those through and flags them.
struct MaskSequence {
  std::string clip_id;
  std::vector<std::optional<ImageGray>> masks;
};

/// Grayscale-to-binary threshold used when ingesting mask images.
inline constexpr int mask_binarize_threshold = 128;

inline ImageGray binarize_mask(const ImageGray& gray) {
  ImageGray out(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) {
    out.pixels[i] = gray.pixels[i] >= mask_binarize_threshold ? 1 : 0;
  }
  return out;
}

/// What to put where the actor was. The erase fill is a stated choice, not
/// recovered intent; constant gray (114,114,114) is the default.
struct FillPolicy {
  enum class Mode { constant, frame_mean, horizontal_inpaint };
  Mode mode = Mode::constant;
  std::uint8_t constant_r = 114;
  std::uint8_t constant_g = 114;
  std::uint8_t constant_b = 114;
};

struct EraseResult {
  std::vector<Frame> frames;
  std::vector<int> missing_mask_frames;  // passed through unchanged
};

namespace detail {

inline Rgba frame_mean_of_unmasked(const Frame& frame, const ImageGray& mask,
                                   const FillPolicy& policy) {
  std::uint64_t sum_r = 0, sum_g = 0, sum_b = 0, n = 0;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (mask.at(x, y) != 0) continue;
      const Rgba& p = frame.at(x, y);
      sum_r += p.r;
      sum_g += p.g;
      sum_b += p.b;
      ++n;
    }
  }
  if (n == 0) {
    // Fully masked frame: no mean exists, fall back to the constant fill.
    return {policy.constant_r, policy.constant_g, policy.constant_b, 255};
  }
  auto avg = [n](std::uint64_t s) {
    return static_cast<std::uint8_t>((s + n / 2) / n);
  };
  return {avg(sum_r), avg(sum_g), avg(sum_b), 255};
}

inline void fill_row_inpaint(Frame& frame, const ImageGray& mask, int y, Rgba fallback) {
  const int w = frame.width;
  int x = 0;
  while (x < w) {
    if (mask.at(x, y) == 0) {
      ++x;
      continue;
    }
    const int run_begin = x;
    while (x < w && mask.at(x, y) != 0) ++x;
    const int run_end = x;  // exclusive
    const bool has_left = run_begin > 0;
    const bool has_right = run_end < w;
    const Rgba left = has_left ? frame.at(run_begin - 1, y) : Rgba{};
    const Rgba right = has_right ? frame.at(run_end, y) : Rgba{};
    for (int i = run_begin; i < run_end; ++i) {
      Rgba v;
      if (has_left && has_right) {
        const double t = static_cast<double>(i - run_begin + 1) /
                         static_cast<double>(run_end - run_begin + 1);
        auto lerp = [t](std::uint8_t a, std::uint8_t b) {
          return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
        };
        v = {lerp(left.r, right.r), lerp(left.g, right.g), lerp(left.b, right.b), 255};
      } else if (has_left) {
        v = {left.r, left.g, left.b, 255};
      } else if (has_right) {
        v = {right.r, right.g, right.b, 255};
      } else {
        v = fallback;  // whole row masked
      }
      frame.at(i, y) = v;
    }
  }
}

}  // namespace detail

/// do(A = a) on pixels: replace mask=1 pixels per policy, leave mask=0
/// pixels bit-identical. Strictly per-frame, so frame order never matters.
inline EraseResult erase_actor(const std::vector<Frame>& frames, const MaskSequence& masks,
                               const FillPolicy& policy = {}) {
  if (masks.masks.size() != frames.size()) {
    raise(Errc::dimension_mismatch,
          masks.clip_id + ": " + std::to_string(masks.masks.size()) + " masks for " +
              std::to_string(frames.size()) + " frames");
  }
  EraseResult result;
  result.frames = frames;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& maybe_mask = masks.masks[f];
    if (!maybe_mask.has_value()) {
      result.missing_mask_frames.push_back(static_cast<int>(f));
      continue;
    }
    const ImageGray& mask = *maybe_mask;
    Frame& frame = result.frames[f];
    if (mask.width != frame.width || mask.height != frame.height) {
      raise(Errc::dimension_mismatch,
            masks.clip_id + " frame " + std::to_string(f) + ": mask " +
                std::to_string(mask.width) + "x" + std::to_string(mask.height) + " vs frame " +
                std::to_string(frame.width) + "x" + std::to_string(frame.height));
    }
    switch (policy.mode) {
      case FillPolicy::Mode::constant: {
        const Rgba fill{policy.constant_r, policy.constant_g, policy.constant_b, 255};
        for (int y = 0; y < frame.height; ++y) {
          for (int x = 0; x < frame.width; ++x) {
            if (mask.at(x, y) != 0) frame.at(x, y) = fill;
          }
        }
        break;
      }
      case FillPolicy::Mode::frame_mean: {
        const Rgba fill = detail::frame_mean_of_unmasked(frame, mask, policy);
        for (int y = 0; y < frame.height; ++y) {
          for (int x = 0; x < frame.width; ++x) {
            if (mask.at(x, y) != 0) frame.at(x, y) = fill;
          }
        }
        break;
      }
      case FillPolicy::Mode::horizontal_inpaint: {
        const Rgba fallback{policy.constant_r, policy.constant_g, policy.constant_b, 255};
        for (int y = 0; y < frame.height; ++y) {
          detail::fill_row_inpaint(frame, mask, y, fallback);
        }
        break;
      }
    }
  }
  return result;
}

/// Parse "constant:114,114,114", "frame_mean", or "horizontal_inpaint".
inline FillPolicy parse_fill_policy(const std::string& text) {
  FillPolicy policy;
  if (text == "frame_mean") {
    policy.mode = FillPolicy::Mode::frame_mean;
    return policy;
  }
  if (text == "horizontal_inpaint") {
    policy.mode = FillPolicy::Mode::horizontal_inpaint;
    return policy;
  }
  const std::string prefix = "constant";
  if (text.rfind(prefix, 0) == 0) {
    policy.mode = FillPolicy::Mode::constant;
    if (text.size() == prefix.size()) return policy;  // default gray
    if (text[prefix.size()] != ':') raise(Errc::config_error, "bad fill policy: " + text);
    int r = 0, g = 0, b = 0;
    if (std::sscanf(text.c_str() + prefix.size() + 1, "%d,%d,%d", &r, &g, &b) != 3 ||
        r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      raise(Errc::config_error, "bad fill policy: " + text);
    }
    policy.constant_r = static_cast<std::uint8_t>(r);
    policy.constant_g = static_cast<std::uint8_t>(g);
    policy.constant_b = static_cast<std::uint8_t>(b);
    return policy;
  }
  raise(Errc::config_error, "unknown fill policy: " + text);
}

}  // namespace occtk
