#pragma once

#include <cstdint>
#include <string_view>

#include "dialkit/image.hpp"

namespace dialkit {

enum class Split { clean, view, illum, combined };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

// Nuisance imaging factors. Ranges (neutral value first):
//   pitch_deg, yaw_deg      0  in [-45, 45]      scale 45
//   roll_deg                0  in [-30, 30]      scale 30
//   brightness              1  in [0.5, 1.5]     scale 0.5
//   gamma                   1  in [0.6, 1.6]     scale 0.5
//   gradient_strength       0  in [0, 0.5]       scale 0.5
//   glare_intensity         0  in [0, 0.6]       scale 0.6
//   blur_sigma_px           0  in [0, 3]         scale 3
// An axis's magnitude is min(1, |value - neutral| / scale); view_severity is
// the max over pose axes, illum_severity the max over the rest. The glare
// centre/radii and gradient direction shape their effect but carry no
// severity of their own.
struct AppearanceCondition {
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double roll_deg = 0.0;
  double brightness = 1.0;
  double gamma = 1.0;
  double gradient_strength = 0.0;
  double gradient_direction_deg = 0.0;
  double glare_intensity = 0.0;
  double glare_u = 0.5;
  double glare_v = 0.5;
  double glare_radius_u = 0.25;
  double glare_radius_v = 0.25;
  double blur_sigma_px = 0.0;
  double view_severity = 0.0;
  double illum_severity = 0.0;

  // Throws DomainError when a field leaves its documented range or the stored
  // severities disagree with the field values.
  void validate() const;

  // Recomputes view_severity / illum_severity from the field values.
  void refresh_severities();
  bool is_identity() const;

  friend bool operator==(const AppearanceCondition&, const AppearanceCondition&) = default;
};

double view_severity_of(const AppearanceCondition& cond);
double illum_severity_of(const AppearanceCondition& cond);

// Draws a condition for a split. Pose and photometric groups are each driven
// to the target magnitude by forcing one randomly chosen axis of the group to
// full scale and drawing the rest inside it:
//   Clean    both groups at 0.1 * severity
//   View     pose at severity, photometric neutral
//   Illum    photometric at severity, pose neutral
//   Combined both at severity
AppearanceCondition sample_appearance(Split split, double severity, std::uint64_t seed);

struct WarpGeometry {
  // Camera sits 2.5 dial radii from the dial plane.
  double dial_radius_px = 0.0;
  Rgb background{};
};

// Warp (dial-plane rotation under a pinhole camera, inverse bilinear
// sampling) -> illumination -> glare -> Gaussian blur (truncated at 3 sigma).
// A neutral stage is skipped, so the identity condition copies the input.
ImageBuffer apply_appearance(const ImageBuffer& image, const AppearanceCondition& cond,
                             const WarpGeometry& geometry);

// Row-major 3x3 plane-to-image homography used by the warp stage.
struct Homography {
  double m[9];
};
Homography view_homography(const AppearanceCondition& cond, int width, int height, double dial_radius_px);

}  // namespace dialkit
