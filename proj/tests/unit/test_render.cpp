#include <doctest.h>

#include "dialkit/errors.hpp"
#include "dialkit/image.hpp"
#include "dialkit/render.hpp"
#include "oracles.hpp"

using namespace dialkit;

TEST_CASE("default style and validation") {
  const auto s = default_style();
  CHECK(s.image_size_px == 448);
  CHECK(style_from_seed(0).minute_hand_length == s.minute_hand_length);
  CHECK_NOTHROW(s.validate());
  for (std::uint64_t seed = 1; seed < 50; ++seed) CHECK_NOTHROW(style_from_seed(seed).validate());
  auto bad = s;
  bad.dial_radius_frac = 0.7;
  CHECK_THROWS_AS(bad.validate(), StyleError);
  bad = s;
  bad.minute_hand_length = 0;
  CHECK_THROWS_AS(bad.validate(), StyleError);
}

TEST_CASE("minute hand follows the state") {
  const auto s = default_style(224);
  for (int m = 0; m < 60; m += 7) {
    const auto img = render_dial_face(ClockState(m % 12, m), s);
    CHECK(oracle::angle_gap_deg(oracle::clock_minute_angle(img, s), 6.0 * m) <= 3.0);
  }
}

TEST_CASE("pointer follows the gauge value") {
  const auto s = default_style(224);
  const auto cal = default_gauge_calibration();
  for (double v : {0.0, 12.5, 50.0, 81.0, 100.0}) {
    const GaugeState g(v, cal);
    const auto img = render_dial_face(g, s);
    CHECK(oracle::angle_gap_deg(oracle::gauge_pointer_angle(img, s), gauge_value_to_angle(g)) <= 3.0);
  }
}

TEST_CASE("seeded styles still encode the state") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto s = style_from_seed(seed, 224);
    const auto img = render_dial_face(ClockState(5, 40), s);
    CHECK(oracle::angle_gap_deg(oracle::clock_minute_angle(img, s), 240.0) <= 3.0);
  }
}

TEST_CASE("render is deterministic and the record re-renders") {
  const auto s = style_from_seed(9, 128);
  const DialState st = GaugeState(42.0, default_gauge_calibration());
  AppearanceCondition c;
  c.yaw_deg = 20;
  c.blur_sigma_px = 1;
  c.refresh_severities();
  const auto [img, rec] = render_sample(st, c, s);
  CHECK(rec.style_seed == 9);
  CHECK(rec.image_size == 128);
  CHECK(render_record(rec) == img);
  CHECK(render_sample(st, c, s).first == img);
}

TEST_CASE("png round trip") {
  const auto img = render_dial_face(ClockState(1, 2), default_style(64));
  const auto dir = oracle::scratch_dir("render_png");
  write_png(dir / "a.png", img);
  CHECK(read_png(dir / "a.png") == img);
  CHECK_THROWS_AS(read_png(dir / "missing.png"), IoError);
}
