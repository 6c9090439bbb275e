#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <variant>

namespace dialkit {

enum class Task { clock, gauge };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

// Time on a 12-hour dial at minute granularity. Hour 0 is displayed as "12".
class ClockState {
 public:
  static constexpr int kCycleMinutes = 720;

  ClockState() = default;
  // Throws DomainError outside hour [0,11] / minute [0,59].
  ClockState(int hour, int minute);

  static ClockState from_minutes(int minute_of_cycle);

  int hour() const { return hour_; }
  int minute() const { return minute_; }

  friend bool operator==(const ClockState&, const ClockState&) = default;
  friend auto operator<=>(const ClockState&, const ClockState&) = default;

 private:
  int hour_ = 0;
  int minute_ = 0;
};

struct GaugeCalibration {
  std::string id = "default";
  double value_min = 0.0;
  double value_max = 100.0;
  double angle_start_deg = 180.0;
  double angle_end_deg = 0.0;
  int major_ticks = 10;
  int minor_per_major = 4;

  // Throws DomainError on an inverted range, zero sweep, or bad tick counts.
  void validate() const;

  double range() const { return value_max - value_min; }
  // Value spacing between adjacent (minor or major) ticks.
  double minor_step() const;

  friend bool operator==(const GaugeCalibration&, const GaugeCalibration&) = default;
};

GaugeCalibration default_gauge_calibration();

class GaugeState {
 public:
  GaugeState() = default;
  // Throws DomainError when value lies outside the calibrated range.
  GaugeState(double value, GaugeCalibration calibration);

  double value() const { return value_; }
  const GaugeCalibration& calibration() const { return calibration_; }

  friend bool operator==(const GaugeState&, const GaugeState&) = default;

 private:
  double value_ = 0.0;
  GaugeCalibration calibration_;
};

using DialState = std::variant<ClockState, GaugeState>;

Task task_of(const DialState& state);

struct HandAngles {
  double hour_deg;
  double minute_deg;
};

int clock_state_to_minutes(const ClockState& state);

// Clockwise from 12 o'clock, both in [0, 360).
HandAngles clock_hand_angles(const ClockState& state);

// Circular minute distance on the 720-minute cycle, in [0, 360].
int clock_distance(const ClockState& a, const ClockState& b);

// Pointer angle, counter-clockwise from 3 o'clock (180 = left, 90 = up).
double gauge_value_to_angle(const GaugeState& state);

// |v1 - v2| / range. Throws CalibrationMismatch.
double gauge_distance(const GaugeState& a, const GaugeState& b);

// Clock: clock_distance / 360. Gauge: gauge_distance. Result in [0, 1].
// Throws VariantMismatch or CalibrationMismatch.
double state_distance_normalized(const DialState& a, const DialState& b);

// Serialization used in manifests and answers: clock "H:MM" with H in
// {12, 1..11}; gauge decimal with 1 to 4 fractional digits.
std::string format_clock(const ClockState& state);
std::string format_gauge_value(double value);
std::string format_state(const DialState& state);

// Strict inverse of format_clock (also accepts a zero-padded hour and "0").
ClockState parse_clock_text(std::string_view text);

// Rounds to the 4 fractional digits that format_gauge_value keeps.
double quantize_gauge_value(double value);

// Key that is equal exactly when two states are equal; used for grouping.
std::string state_key(const DialState& state);

}  // namespace dialkit
