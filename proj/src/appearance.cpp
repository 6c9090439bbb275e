#include "dialkit/appearance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dialkit/errors.hpp"
#include "dialkit/kernels.hpp"
#include "dialkit/rng.hpp"

namespace dialkit {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::clean: return "clean";
    case Split::view: return "view";
    case Split::illum: return "illum";
    case Split::combined: return "combined";
  }
  return "clean";
}

Split parse_split(std::string_view text) {
  if (text == "clean") return Split::clean;
  if (text == "view") return Split::view;
  if (text == "illum") return Split::illum;
  if (text == "combined") return Split::combined;
  throw ConfigError("unknown split '" + std::string(text) + "' (expected clean|view|illum|combined)");
}

namespace {

constexpr double kPoseScale = 45.0;
constexpr double kRollScale = 30.0;
constexpr double kBrightnessScale = 0.5;
constexpr double kGammaScale = 0.5;
constexpr double kGradientScale = 0.5;
constexpr double kGlareScale = 0.6;
constexpr double kBlurScale = 3.0;

double magnitude(double value, double neutral, double scale) {
  return std::min(1.0, std::abs(value - neutral) / scale);
}

void check_range(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw DomainError(std::string("appearance field ") + name + "=" + std::to_string(v) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

double view_severity_of(const AppearanceCondition& c) {
  return std::max({magnitude(c.pitch_deg, 0.0, kPoseScale), magnitude(c.yaw_deg, 0.0, kPoseScale),
                   magnitude(c.roll_deg, 0.0, kRollScale)});
}

double illum_severity_of(const AppearanceCondition& c) {
  return std::max({magnitude(c.brightness, 1.0, kBrightnessScale), magnitude(c.gamma, 1.0, kGammaScale),
                   magnitude(c.gradient_strength, 0.0, kGradientScale),
                   magnitude(c.glare_intensity, 0.0, kGlareScale), magnitude(c.blur_sigma_px, 0.0, kBlurScale)});
}

void AppearanceCondition::validate() const {
  check_range(pitch_deg, -45, 45, "pitch_deg");
  check_range(yaw_deg, -45, 45, "yaw_deg");
  check_range(roll_deg, -30, 30, "roll_deg");
  check_range(brightness, 0.5, 1.5, "brightness");
  check_range(gamma, 0.6, 1.6, "gamma");
  check_range(gradient_strength, 0, 0.5, "gradient_strength");
  check_range(gradient_direction_deg, 0, 360, "gradient_direction_deg");
  check_range(glare_intensity, 0, 0.6, "glare_intensity");
  check_range(glare_u, 0, 1, "glare_u");
  check_range(glare_v, 0, 1, "glare_v");
  check_range(glare_radius_u, 1e-3, 1, "glare_radius_u");
  check_range(glare_radius_v, 1e-3, 1, "glare_radius_v");
  check_range(blur_sigma_px, 0, 3, "blur_sigma_px");
  check_range(view_severity, 0, 1, "view_severity");
  check_range(illum_severity, 0, 1, "illum_severity");
  if (view_severity != view_severity_of(*this) || illum_severity != illum_severity_of(*this)) {
    throw DomainError("appearance severities do not match the field values");
  }
}

void AppearanceCondition::refresh_severities() {
  view_severity = view_severity_of(*this);
  illum_severity = illum_severity_of(*this);
}

bool AppearanceCondition::is_identity() const {
  return pitch_deg == 0 && yaw_deg == 0 && roll_deg == 0 && brightness == 1 && gamma == 1 &&
         gradient_strength == 0 && glare_intensity == 0 && blur_sigma_px == 0;
}

AppearanceCondition sample_appearance(Split split, double severity, std::uint64_t seed) {
  if (!(severity >= 0.0 && severity <= 1.0)) throw DomainError("severity must lie in [0, 1]");
  SplitMix64 rng(seed);

  // Unit draws per axis; symmetric axes in [-1, 1), gamma in [-0.8, 1) so the
  // lower end stays inside [0.6, 1.6], one-sided axes in [0, 1).
  std::array<double, 3> pose{rng.symmetric(), rng.symmetric(), rng.symmetric()};
  pose[rng.below(3)] = 1.0;
  std::array<double, 5> photo{rng.symmetric(), rng.uniform(-0.8, 1.0), rng.uniform(), rng.uniform(), rng.uniform()};
  photo[rng.below(5)] = 1.0;
  const double direction = rng.uniform(0.0, 360.0);
  const double glare_u = rng.uniform(0.2, 0.8);
  const double glare_v = rng.uniform(0.2, 0.8);
  const double glare_ru = rng.uniform(0.1, 0.35);
  const double glare_rv = rng.uniform(0.1, 0.35);

  double pose_level = 0.0;
  double photo_level = 0.0;
  switch (split) {
    case Split::clean: pose_level = photo_level = 0.1 * severity; break;
    case Split::view: pose_level = severity; break;
    case Split::illum: photo_level = severity; break;
    case Split::combined: pose_level = photo_level = severity; break;
  }

  AppearanceCondition c;
  if (pose_level > 0.0) {
    c.pitch_deg = pose[0] * kPoseScale * pose_level;
    c.yaw_deg = pose[1] * kPoseScale * pose_level;
    c.roll_deg = pose[2] * kRollScale * pose_level;
  }
  if (photo_level > 0.0) {
    c.brightness = 1.0 + photo[0] * kBrightnessScale * photo_level;
    c.gamma = 1.0 + photo[1] * kGammaScale * photo_level;
    c.gradient_strength = photo[2] * kGradientScale * photo_level;
    c.gradient_direction_deg = direction;
    c.glare_intensity = photo[3] * kGlareScale * photo_level;
    c.glare_u = glare_u;
    c.glare_v = glare_v;
    c.glare_radius_u = glare_ru;
    c.glare_radius_v = glare_rv;
    c.blur_sigma_px = photo[4] * kBlurScale * photo_level;
  }
  c.refresh_severities();
  return c;
}

Homography view_homography(const AppearanceCondition& cond, int width, int height, double dial_radius_px) {
  const double p = deg2rad(cond.pitch_deg), y = deg2rad(cond.yaw_deg), r = deg2rad(cond.roll_deg);
  const double cp = std::cos(p), sp = std::sin(p), cy = std::cos(y), sy = std::sin(y);
  const double cr = std::cos(r), sr = std::sin(r);
  // R = Rz(roll) * Ry(yaw) * Rx(pitch)
  const double R[3][3] = {
      {cr * cy, cr * sy * sp - sr * cp, cr * sy * cp + sr * sp},
      {sr * cy, sr * sy * sp + cr * cp, sr * sy * cp - cr * sp},
      {-sy, cy * sp, cy * cp},
  };
  const double dist = 2.5 * dial_radius_px;
  const double f = dist;
  const double ox = (width - 1) / 2.0, oy = (height - 1) / 2.0;
  // Plane point (x - ox, y - oy, 0) -> camera R*P + (0, 0, dist) -> pixel.
  const double r1[3] = {R[0][0], R[1][0], R[2][0]};
  const double r2[3] = {R[0][1], R[1][1], R[2][1]};
  const double A[9] = {
      f * r1[0] + ox * r1[2], f * r2[0] + ox * r2[2], ox * dist,
      f * r1[1] + oy * r1[2], f * r2[1] + oy * r2[2], oy * dist,
      r1[2], r2[2], dist,
  };
  // Fold in the translation from pixel to plane coordinates.
  Homography h{};
  for (int row = 0; row < 3; ++row) {
    h.m[3 * row + 0] = A[3 * row + 0];
    h.m[3 * row + 1] = A[3 * row + 1];
    h.m[3 * row + 2] = A[3 * row + 2] - ox * A[3 * row + 0] - oy * A[3 * row + 1];
  }
  return h;
}

namespace {

Homography invert(const Homography& h) {
  const double* a = h.m;
  const double c00 = a[4] * a[8] - a[5] * a[7];
  const double c01 = a[5] * a[6] - a[3] * a[8];
  const double c02 = a[3] * a[7] - a[4] * a[6];
  const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
  if (det == 0.0) throw DomainError("singular view homography");
  Homography inv{};
  inv.m[0] = c00 / det;
  inv.m[1] = (a[2] * a[7] - a[1] * a[8]) / det;
  inv.m[2] = (a[1] * a[5] - a[2] * a[4]) / det;
  inv.m[3] = c01 / det;
  inv.m[4] = (a[0] * a[8] - a[2] * a[6]) / det;
  inv.m[5] = (a[2] * a[3] - a[0] * a[5]) / det;
  inv.m[6] = c02 / det;
  inv.m[7] = (a[1] * a[6] - a[0] * a[7]) / det;
  inv.m[8] = (a[0] * a[4] - a[1] * a[3]) / det;
  return inv;
}

// Three float planes in [0, 1].
struct Planes {
  int w = 0, h = 0;
  std::array<std::vector<float>, 3> c;

  Planes(int width, int height) : w(width), h(height) {
    for (auto& p : c) p.assign(static_cast<std::size_t>(w) * h, 0.0f);
  }
};

Planes to_planes(const ImageBuffer& img) {
  Planes out(img.width(), img.height());
  const auto& d = img.data();
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  for (std::size_t i = 0; i < n; ++i)
    for (int ch = 0; ch < 3; ++ch) out.c[ch][i] = d[3 * i + ch] / 255.0f;
  return out;
}

ImageBuffer from_planes(const Planes& p) {
  ImageBuffer img(p.w, p.h);
  auto& d = img.data();
  const std::size_t n = static_cast<std::size_t>(p.w) * p.h;
  for (std::size_t i = 0; i < n; ++i) {
    for (int ch = 0; ch < 3; ++ch) {
      const float v = std::clamp(p.c[ch][i], 0.0f, 1.0f);
      d[3 * i + ch] = static_cast<std::uint8_t>(v * 255.0f + 0.5f);
    }
  }
  return img;
}

Planes warp(const Planes& src, const AppearanceCondition& cond, const WarpGeometry& geo) {
  const double radius = geo.dial_radius_px > 0 ? geo.dial_radius_px : 0.45 * std::min(src.w, src.h);
  const Homography inv = invert(view_homography(cond, src.w, src.h, radius));
  const float bg[3] = {geo.background.r / 255.0f, geo.background.g / 255.0f, geo.background.b / 255.0f};
  Planes out(src.w, src.h);
  const double* m = inv.m;
  for (int v = 0; v < src.h; ++v) {
    for (int u = 0; u < src.w; ++u) {
      const double W = m[6] * u + m[7] * v + m[8];
      const double sx = (m[0] * u + m[1] * v + m[2]) / W;
      const double sy = (m[3] * u + m[4] * v + m[5]) / W;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      const float ax = static_cast<float>(sx - fx), ay = static_cast<float>(sy - fy);
      const std::size_t o = static_cast<std::size_t>(v) * src.w + u;
      const bool inside = x0 >= 0 && y0 >= 0 && x0 + 1 < src.w && y0 + 1 < src.h;
      for (int ch = 0; ch < 3; ++ch) {
        auto tap = [&](int x, int y) -> float {
          if (x < 0 || y < 0 || x >= src.w || y >= src.h) return bg[ch];
          return src.c[ch][static_cast<std::size_t>(y) * src.w + x];
        };
        float p00, p10, p01, p11;
        if (inside) {
          const float* row = src.c[ch].data() + static_cast<std::size_t>(y0) * src.w + x0;
          p00 = row[0];
          p10 = row[1];
          p01 = row[src.w];
          p11 = row[src.w + 1];
        } else {
          p00 = tap(x0, y0);
          p10 = tap(x0 + 1, y0);
          p01 = tap(x0, y0 + 1);
          p11 = tap(x0 + 1, y0 + 1);
        }
        const float top = p00 + (p10 - p00) * ax;
        const float bottom = p01 + (p11 - p01) * ax;
        out.c[ch][o] = top + (bottom - top) * ay;
      }
    }
  }
  return out;
}

void illuminate(Planes& p, const AppearanceCondition& cond) {
  const double ox = (p.w - 1) / 2.0, oy = (p.h - 1) / 2.0;
  const double half_diag = 0.5 * std::hypot(p.w, p.h);
  const double dx = std::cos(deg2rad(cond.gradient_direction_deg));
  const double dy = std::sin(deg2rad(cond.gradient_direction_deg));
  const float inv_gamma = static_cast<float>(1.0 / cond.gamma);
  const float gain = static_cast<float>(cond.brightness);
  const bool power = cond.gamma != 1.0;
  for (int y = 0; y < p.h; ++y) {
    for (int x = 0; x < p.w; ++x) {
      const float ramp = static_cast<float>(cond.gradient_strength * ((x - ox) * dx + (y - oy) * dy) / half_diag);
      const std::size_t i = static_cast<std::size_t>(y) * p.w + x;
      for (auto& plane : p.c) {
        float v = gain * plane[i];
        if (power) v = std::pow(v, inv_gamma);
        plane[i] = std::clamp(v + ramp, 0.0f, 1.0f);
      }
    }
  }
}

void add_glare(Planes& p, const AppearanceCondition& cond) {
  const double cx = cond.glare_u * (p.w - 1), cy = cond.glare_v * (p.h - 1);
  const double rx = cond.glare_radius_u * p.w, ry = cond.glare_radius_v * p.h;
  for (int y = 0; y < p.h; ++y) {
    const double ny = (y - cy) / ry;
    for (int x = 0; x < p.w; ++x) {
      const double nx = (x - cx) / rx;
      const float g = static_cast<float>(cond.glare_intensity * std::exp(-0.5 * (nx * nx + ny * ny)));
      const std::size_t i = static_cast<std::size_t>(y) * p.w + x;
      for (auto& plane : p.c) plane[i] = std::min(plane[i] + g, 1.0f);
    }
  }
}

std::vector<float> gaussian_weights(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) sum += w[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  std::vector<float> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<float>(w[i] / sum);
  return out;
}

void blur(Planes& p, double sigma) {
  const auto weights = gaussian_weights(sigma);
  const int radius = static_cast<int>(weights.size() / 2);
  const int taps = static_cast<int>(weights.size());
  std::vector<float> padded(p.w + 2 * radius);
  std::vector<float> tmp(static_cast<std::size_t>(p.w) * p.h);
  std::vector<const float*> rows(taps);
  for (auto& plane : p.c) {
    // Horizontal pass: clamp-to-edge padding, each tap is a shifted view.
    for (int y = 0; y < p.h; ++y) {
      const float* src = plane.data() + static_cast<std::size_t>(y) * p.w;
      for (int i = 0; i < static_cast<int>(padded.size()); ++i) padded[i] = src[std::clamp(i - radius, 0, p.w - 1)];
      for (int k = 0; k < taps; ++k) rows[k] = padded.data() + k;
      kernels::weighted_row_sum(rows, weights, std::span(tmp.data() + static_cast<std::size_t>(y) * p.w, p.w));
    }
    // Vertical pass: each tap is a clamped source row.
    for (int y = 0; y < p.h; ++y) {
      for (int k = 0; k < taps; ++k) {
        rows[k] = tmp.data() + static_cast<std::size_t>(std::clamp(y + k - radius, 0, p.h - 1)) * p.w;
      }
      kernels::weighted_row_sum(rows, weights, std::span(plane.data() + static_cast<std::size_t>(y) * p.w, p.w));
    }
  }
}

}  // namespace

ImageBuffer apply_appearance(const ImageBuffer& image, const AppearanceCondition& cond,
                             const WarpGeometry& geometry) {
  cond.validate();
  if (cond.is_identity() || image.width() == 0 || image.height() == 0) return image;
  Planes planes = to_planes(image);
  if (cond.pitch_deg != 0 || cond.yaw_deg != 0 || cond.roll_deg != 0) planes = warp(planes, cond, geometry);
  if (cond.brightness != 1 || cond.gamma != 1 || cond.gradient_strength != 0) illuminate(planes, cond);
  if (cond.glare_intensity != 0) add_glare(planes, cond);
  if (cond.blur_sigma_px != 0) blur(planes, cond.blur_sigma_px);
  return from_planes(planes);
}

}  // namespace dialkit
