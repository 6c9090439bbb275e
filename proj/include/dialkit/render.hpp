#pragma once

#include <cstdint>
#include <utility>

#include "dialkit/appearance.hpp"
#include "dialkit/image.hpp"
#include "dialkit/record.hpp"
#include "dialkit/state.hpp"

namespace dialkit {

// Dial look. Lengths and widths are fractions of the dial radius; the radius
// is dial_radius_frac of the image side.
struct StyleConfig {
  std::uint64_t seed = 0;
  int image_size_px = 448;
  int supersample = 2;
  double dial_radius_frac = 0.45;

  Rgb background{28, 30, 34};
  Rgb face{244, 242, 236};
  Rgb ring{70, 72, 78};
  Rgb tick{40, 40, 40};
  Rgb hour_hand{22, 32, 92};
  Rgb minute_hand{22, 32, 92};
  Rgb pointer{200, 36, 36};
  Rgb hub{50, 50, 56};

  double ring_width = 0.05;
  double tick_outer = 0.92;
  double major_tick_length = 0.12;
  double minor_tick_length = 0.05;
  double major_tick_width = 0.03;
  double minor_tick_width = 0.012;
  int clock_major_ticks = 12;
  int clock_minor_per_major = 4;
  double arc_width = 0.012;

  double hour_hand_length = 0.5;
  double hour_hand_width = 0.06;
  double minute_hand_length = 0.76;
  double minute_hand_width = 0.035;
  double pointer_length = 0.78;
  double pointer_width = 0.03;
  double hand_tail = 0.1;
  double pointer_tail = 0.03;
  double hub_radius = 0.05;

  bool numerals_enabled = false;
  double numeral_radius = 0.62;
  double numeral_height = 0.11;

  // Throws StyleError on degenerate geometry.
  void validate() const;

  double dial_radius_px() const { return dial_radius_frac * image_size_px; }
  double center_px() const { return (image_size_px - 1) / 2.0; }
};

StyleConfig default_style(int image_size_px = 448);

// seed 0 is the default style; other seeds draw palette and geometry
// variations from SplitMix64(seed).
StyleConfig style_from_seed(std::uint64_t seed, int image_size_px = 448);

// Canonical fronto-parallel dial. Deterministic, bit-identical per build.
ImageBuffer render_dial_face(const DialState& state, const StyleConfig& style);

// render_dial_face then apply_appearance. The record carries task, state,
// appearance, style seed and image size; id, split, severity, bucket and
// image_path are left for the caller.
std::pair<ImageBuffer, SampleRecord> render_sample(const DialState& state, const AppearanceCondition& cond,
                                                   const StyleConfig& style);

// Re-renders the image a record describes.
ImageBuffer render_record(const SampleRecord& record);

}  // namespace dialkit
