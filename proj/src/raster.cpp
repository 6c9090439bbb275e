#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dialkit/errors.hpp"
#include "dialkit/render.hpp"
#include "dialkit/rng.hpp"

namespace dialkit {

void StyleConfig::validate() const {
  auto frac = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw StyleError(std::string("style ") + name + " must lie in (0, 1]");
  };
  if (image_size_px < 16 || image_size_px > 8192) throw StyleError("style image_size_px must lie in [16, 8192]");
  if (supersample < 1 || supersample > 4) throw StyleError("style supersample must lie in [1, 4]");
  if (!(dial_radius_frac > 0.0 && dial_radius_frac <= 0.5)) throw StyleError("style dial_radius_frac must lie in (0, 0.5]");
  if (dial_radius_px() < 4.0) throw StyleError("dial radius is below 4 pixels");
  frac(ring_width, "ring_width");
  frac(tick_outer, "tick_outer");
  frac(major_tick_length, "major_tick_length");
  frac(minor_tick_length, "minor_tick_length");
  frac(major_tick_width, "major_tick_width");
  frac(minor_tick_width, "minor_tick_width");
  frac(arc_width, "arc_width");
  frac(hour_hand_length, "hour_hand_length");
  frac(hour_hand_width, "hour_hand_width");
  frac(minute_hand_length, "minute_hand_length");
  frac(minute_hand_width, "minute_hand_width");
  frac(pointer_length, "pointer_length");
  frac(pointer_width, "pointer_width");
  frac(hub_radius, "hub_radius");
  frac(numeral_radius, "numeral_radius");
  frac(numeral_height, "numeral_height");
  if (hand_tail < 0.0 || hand_tail > 0.5 || pointer_tail < 0.0 || pointer_tail > 0.5) {
    throw StyleError("style hand tails must lie in [0, 0.5]");
  }
  if (clock_major_ticks < 1 || clock_minor_per_major < 0) throw StyleError("style clock tick counts invalid");
}

StyleConfig default_style(int image_size_px) {
  StyleConfig s;
  s.image_size_px = image_size_px;
  return s;
}

StyleConfig style_from_seed(std::uint64_t seed, int image_size_px) {
  StyleConfig s = default_style(image_size_px);
  if (seed == 0) return s;
  s.seed = seed;
  SplitMix64 rng(seed);
  auto pick = [&](std::initializer_list<Rgb> options) { return options.begin()[rng.below(options.size())]; };
  auto jitter = [&](double v, double rel) { return v * (1.0 + rel * rng.symmetric()); };

  s.dial_radius_frac = rng.uniform(0.40, 0.47);
  s.background = pick({{28, 30, 34}, {60, 58, 52}, {86, 92, 98}, {40, 52, 44}, {22, 22, 22}});
  s.face = pick({{244, 242, 236}, {252, 252, 252}, {238, 228, 205}, {225, 228, 232}, {222, 232, 242}});
  s.ring = pick({{70, 72, 78}, {150, 120, 60}, {170, 172, 178}, {20, 20, 20}});
  s.tick = pick({{40, 40, 40}, {70, 70, 70}, {30, 30, 60}});
  s.hour_hand = pick({{22, 32, 92}, {12, 12, 12}, {90, 20, 20}});
  s.minute_hand = rng.below(2) == 0 ? s.hour_hand : pick({{22, 32, 92}, {12, 12, 12}, {90, 20, 20}});
  s.pointer = pick({{200, 36, 36}, {230, 110, 20}, {12, 12, 12}});
  s.hub = pick({{50, 50, 56}, {150, 120, 60}, {12, 12, 12}});
  s.ring_width = rng.uniform(0.03, 0.07);
  s.tick_outer = rng.uniform(0.90, 0.94);
  s.major_tick_length = rng.uniform(0.10, 0.14);
  s.minor_tick_length = rng.uniform(0.04, 0.06);
  s.major_tick_width = jitter(s.major_tick_width, 0.2);
  s.minor_tick_width = jitter(s.minor_tick_width, 0.2);
  s.hour_hand_length = rng.uniform(0.45, 0.55);
  s.hour_hand_width = jitter(s.hour_hand_width, 0.2);
  s.minute_hand_length = rng.uniform(0.70, 0.76);
  s.minute_hand_width = jitter(s.minute_hand_width, 0.2);
  s.pointer_length = rng.uniform(0.72, 0.78);
  s.pointer_width = jitter(s.pointer_width, 0.2);
  s.hand_tail = rng.uniform(0.05, 0.15);
  s.hub_radius = rng.uniform(0.04, 0.06);
  s.numerals_enabled = rng.below(2) == 1;
  return s;
}

namespace {

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

// Painter's-algorithm rasterizer on a supersampled grid. Each primitive only
// visits the cells of its own bounding box; a cell takes the colour of the
// last primitive that covers its centre.
class Canvas {
 public:
  Canvas(int size, int ss, Rgb fill) : size_(size), ss_(ss), n_(size * ss), cells_(3 * static_cast<std::size_t>(n_) * n_) {
    for (std::size_t i = 0; i < cells_.size(); i += 3) {
      cells_[i] = fill.r;
      cells_[i + 1] = fill.g;
      cells_[i + 2] = fill.b;
    }
  }

  // Paints every cell whose centre (in output-pixel coordinates) lies in the
  // box and satisfies `inside`.
  template <class Pred>
  void paint(double x0, double y0, double x1, double y1, Rgb color, Pred inside) {
    const int i0 = std::max(0, static_cast<int>(std::floor((x0 + 0.5) * ss_)));
    const int i1 = std::min(n_ - 1, static_cast<int>(std::ceil((x1 + 0.5) * ss_)));
    const int j0 = std::max(0, static_cast<int>(std::floor((y0 + 0.5) * ss_)));
    const int j1 = std::min(n_ - 1, static_cast<int>(std::ceil((y1 + 0.5) * ss_)));
    for (int j = j0; j <= j1; ++j) {
      const double y = (j + 0.5) / ss_ - 0.5;
      for (int i = i0; i <= i1; ++i) {
        const double x = (i + 0.5) / ss_ - 0.5;
        if (!inside(x, y)) continue;
        auto* p = &cells_[3 * (static_cast<std::size_t>(j) * n_ + i)];
        p[0] = color.r;
        p[1] = color.g;
        p[2] = color.b;
      }
    }
  }

  void disc(double cx, double cy, double r, Rgb color) {
    const double r2 = r * r;
    paint(cx - r, cy - r, cx + r, cy + r, color, [&](double x, double y) {
      const double dx = x - cx, dy = y - cy;
      return dx * dx + dy * dy <= r2;
    });
  }

  void annulus(double cx, double cy, double r_in, double r_out, Rgb color) {
    const double lo = r_in * r_in, hi = r_out * r_out;
    paint(cx - r_out, cy - r_out, cx + r_out, cy + r_out, color, [&](double x, double y) {
      const double dx = x - cx, dy = y - cy, d2 = dx * dx + dy * dy;
      return d2 >= lo && d2 <= hi;
    });
  }

  // Annular sector from math-convention angle `start_deg` sweeping
  // `sweep_deg` (either sign).
  void arc(double cx, double cy, double r_in, double r_out, double start_deg, double sweep_deg, Rgb color) {
    const double lo = r_in * r_in, hi = r_out * r_out;
    const double span = std::abs(sweep_deg);
    const double dir = sweep_deg >= 0 ? 1.0 : -1.0;
    paint(cx - r_out, cy - r_out, cx + r_out, cy + r_out, color, [&](double x, double y) {
      const double dx = x - cx, dy = y - cy, d2 = dx * dx + dy * dy;
      if (d2 < lo || d2 > hi) return false;
      const double phi = std::atan2(-dy, dx) * 180.0 / std::numbers::pi;
      double rel = std::fmod(dir * (phi - start_deg), 360.0);
      if (rel < 0) rel += 360.0;
      return rel <= span || rel >= 360.0 - 1e-9;
    });
  }

  // Rectangle of the given width along the segment (x0,y0)-(x1,y1).
  void bar(double x0, double y0, double x1, double y1, double width, Rgb color) {
    const double dx = x1 - x0, dy = y1 - y0;
    const double len = std::hypot(dx, dy);
    if (len == 0.0) return;
    const double ux = dx / len, uy = dy / len;
    const double hw = width / 2.0;
    const double pad = hw + 1.0;
    paint(std::min(x0, x1) - pad, std::min(y0, y1) - pad, std::max(x0, x1) + pad, std::max(y0, y1) + pad, color,
          [&](double x, double y) {
            const double px = x - x0, py = y - y0;
            const double along = px * ux + py * uy;
            const double across = -px * uy + py * ux;
            return along >= 0.0 && along <= len && std::abs(across) <= hw;
          });
  }

  ImageBuffer downsample() const {
    ImageBuffer out(size_, size_);
    auto& d = out.data();
    const int area = ss_ * ss_;
    for (int y = 0; y < size_; ++y) {
      for (int x = 0; x < size_; ++x) {
        int sum[3] = {0, 0, 0};
        for (int j = 0; j < ss_; ++j) {
          const auto* row = &cells_[3 * ((static_cast<std::size_t>(y) * ss_ + j) * n_ + static_cast<std::size_t>(x) * ss_)];
          for (int i = 0; i < ss_; ++i)
            for (int ch = 0; ch < 3; ++ch) sum[ch] += row[3 * i + ch];
        }
        auto* p = &d[3 * (static_cast<std::size_t>(y) * size_ + x)];
        for (int ch = 0; ch < 3; ++ch) p[ch] = static_cast<std::uint8_t>((sum[ch] + area / 2) / area);
      }
    }
    return out;
  }

 private:
  int size_;
  int ss_;
  int n_;
  std::vector<std::uint8_t> cells_;
};

// Seven-segment strokes: a b c d e f g.
constexpr unsigned char kSegments[10] = {
    0b1111110, 0b0110000, 0b1101101, 0b1111001, 0b0110011,
    0b1011011, 0b1011111, 0b1110000, 0b1111111, 0b1111011,
};

void stroke_text(Canvas& canvas, const std::string& text, double cx, double cy, double height, Rgb color) {
  const double w = 0.5 * height, h = height, gap = 0.25 * height, stroke = 0.12 * height;
  const double total = text.size() * w + (text.size() - 1) * gap;
  double left = cx - total / 2.0;
  for (char ch : text) {
    if (ch < '0' || ch > '9') {
      left += w + gap;
      continue;
    }
    const unsigned s = kSegments[ch - '0'];
    const double l = left, r = left + w, t = cy - h / 2, m = cy, b = cy + h / 2;
    if (s & 0b1000000) canvas.bar(l, t, r, t, stroke, color);
    if (s & 0b0100000) canvas.bar(r, t, r, m, stroke, color);
    if (s & 0b0010000) canvas.bar(r, m, r, b, stroke, color);
    if (s & 0b0001000) canvas.bar(l, b, r, b, stroke, color);
    if (s & 0b0000100) canvas.bar(l, m, l, b, stroke, color);
    if (s & 0b0000010) canvas.bar(l, t, l, m, stroke, color);
    if (s & 0b0000001) canvas.bar(l, m, r, m, stroke, color);
    left += w + gap;
  }
}

struct Frame {
  double c;  // centre, both axes
  double R;  // dial radius in pixels
};

// Clock angles: clockwise from 12 o'clock.
void clock_dir(double deg, double& dx, double& dy) {
  dx = std::sin(deg2rad(deg));
  dy = -std::cos(deg2rad(deg));
}

// Gauge angles: counter-clockwise from 3 o'clock.
void gauge_dir(double deg, double& dx, double& dy) {
  dx = std::cos(deg2rad(deg));
  dy = -std::sin(deg2rad(deg));
}

void radial_bar(Canvas& cv, const Frame& f, double dx, double dy, double r0, double r1, double width, Rgb color) {
  cv.bar(f.c + dx * r0 * f.R, f.c + dy * r0 * f.R, f.c + dx * r1 * f.R, f.c + dy * r1 * f.R, width * f.R, color);
}

std::string tick_label(double value) {
  if (value == std::round(value)) return std::to_string(static_cast<long long>(std::round(value)));
  return format_gauge_value(value);
}

void draw_clock(Canvas& cv, const Frame& f, const ClockState& state, const StyleConfig& s) {
  const int total = s.clock_major_ticks * (s.clock_minor_per_major + 1);
  for (int k = 0; k < total; ++k) {
    const bool major = k % (s.clock_minor_per_major + 1) == 0;
    double dx, dy;
    clock_dir(360.0 * k / total, dx, dy);
    const double len = major ? s.major_tick_length : s.minor_tick_length;
    radial_bar(cv, f, dx, dy, s.tick_outer - len, s.tick_outer, major ? s.major_tick_width : s.minor_tick_width, s.tick);
  }
  if (s.numerals_enabled) {
    for (int h = 1; h <= 12; ++h) {
      double dx, dy;
      clock_dir(30.0 * h, dx, dy);
      stroke_text(cv, std::to_string(h), f.c + dx * s.numeral_radius * f.R, f.c + dy * s.numeral_radius * f.R,
                  s.numeral_height * f.R, s.tick);
    }
  }
  const HandAngles a = clock_hand_angles(state);
  double dx, dy;
  clock_dir(a.hour_deg, dx, dy);
  radial_bar(cv, f, dx, dy, -s.hand_tail, s.hour_hand_length, s.hour_hand_width, s.hour_hand);
  clock_dir(a.minute_deg, dx, dy);
  radial_bar(cv, f, dx, dy, -s.hand_tail, s.minute_hand_length, s.minute_hand_width, s.minute_hand);
}

void draw_gauge(Canvas& cv, const Frame& f, const GaugeState& state, const StyleConfig& s) {
  const auto& cal = state.calibration();
  const double sweep = cal.angle_end_deg - cal.angle_start_deg;
  cv.arc(f.c, f.c, (s.tick_outer - s.arc_width) * f.R, s.tick_outer * f.R, cal.angle_start_deg, sweep, s.tick);
  const int per = cal.minor_per_major + 1;
  const int total = cal.major_ticks * per;
  for (int k = 0; k <= total; ++k) {
    const bool major = k % per == 0;
    const double angle = cal.angle_start_deg + sweep * k / total;
    double dx, dy;
    gauge_dir(angle, dx, dy);
    const double len = major ? s.major_tick_length : s.minor_tick_length;
    radial_bar(cv, f, dx, dy, s.tick_outer - len, s.tick_outer, major ? s.major_tick_width : s.minor_tick_width, s.tick);
    if (major && s.numerals_enabled) {
      const double value = cal.value_min + cal.range() * k / total;
      stroke_text(cv, tick_label(value), f.c + dx * s.numeral_radius * f.R, f.c + dy * s.numeral_radius * f.R,
                  s.numeral_height * f.R, s.tick);
    }
  }
  double dx, dy;
  gauge_dir(gauge_value_to_angle(state), dx, dy);
  radial_bar(cv, f, dx, dy, -s.pointer_tail, s.pointer_length, s.pointer_width, s.pointer);
}

}  // namespace

ImageBuffer render_dial_face(const DialState& state, const StyleConfig& style) {
  style.validate();
  const Frame f{style.center_px(), style.dial_radius_px()};
  Canvas cv(style.image_size_px, style.supersample, style.background);
  cv.disc(f.c, f.c, f.R, style.face);
  cv.annulus(f.c, f.c, f.R * (1.0 - style.ring_width), f.R, style.ring);
  if (const auto* clock = std::get_if<ClockState>(&state)) {
    draw_clock(cv, f, *clock, style);
  } else {
    draw_gauge(cv, f, std::get<GaugeState>(state), style);
  }
  cv.disc(f.c, f.c, style.hub_radius * f.R, style.hub);
  return cv.downsample();
}

std::pair<ImageBuffer, SampleRecord> render_sample(const DialState& state, const AppearanceCondition& cond,
                                                   const StyleConfig& style) {
  const ImageBuffer face = render_dial_face(state, style);
  ImageBuffer image = apply_appearance(face, cond, WarpGeometry{style.dial_radius_px(), style.background});
  SampleRecord record;
  record.task = task_of(state);
  record.state = state;
  record.appearance = cond;
  record.style_seed = style.seed;
  record.image_size = style.image_size_px;
  return {std::move(image), std::move(record)};
}

ImageBuffer render_record(const SampleRecord& record) {
  return render_sample(record.state, record.appearance, style_from_seed(record.style_seed, record.image_size)).first;
}

}  // namespace dialkit
