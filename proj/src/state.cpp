#include "dialkit/state.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "dialkit/errors.hpp"

namespace dialkit {

std::string_view to_string(Task task) {
  return task == Task::clock ? "clock" : "gauge";
}

Task parse_task(std::string_view text) {
  if (text == "clock") return Task::clock;
  if (text == "gauge") return Task::gauge;
  throw ConfigError("unknown task '" + std::string(text) + "' (expected clock|gauge)");
}

ClockState::ClockState(int hour, int minute) : hour_(hour), minute_(minute) {
  if (hour < 0 || hour > 11 || minute < 0 || minute > 59) {
    throw DomainError("clock state out of range: hour=" + std::to_string(hour) +
                      " minute=" + std::to_string(minute));
  }
}

ClockState ClockState::from_minutes(int minute_of_cycle) {
  int m = minute_of_cycle % kCycleMinutes;
  if (m < 0) m += kCycleMinutes;
  return ClockState(m / 60, m % 60);
}

void GaugeCalibration::validate() const {
  if (!std::isfinite(value_min) || !std::isfinite(value_max) || !(value_max > value_min)) {
    throw DomainError("gauge calibration requires value_max > value_min");
  }
  if (!std::isfinite(angle_start_deg) || !std::isfinite(angle_end_deg) ||
      angle_start_deg == angle_end_deg) {
    throw DomainError("gauge calibration requires a non-zero angular sweep");
  }
  if (major_ticks < 1) throw DomainError("gauge calibration requires major_ticks >= 1");
  if (minor_per_major < 0) throw DomainError("gauge calibration requires minor_per_major >= 0");
  if (id.empty()) throw DomainError("gauge calibration requires an id");
}

double GaugeCalibration::minor_step() const {
  return range() / (static_cast<double>(major_ticks) * (minor_per_major + 1));
}

GaugeCalibration default_gauge_calibration() { return GaugeCalibration{}; }

GaugeState::GaugeState(double value, GaugeCalibration calibration)
    : value_(value), calibration_(std::move(calibration)) {
  calibration_.validate();
  if (!std::isfinite(value) || value < calibration_.value_min || value > calibration_.value_max) {
    throw DomainError("gauge value " + std::to_string(value) + " outside calibrated range");
  }
}

Task task_of(const DialState& state) {
  return std::holds_alternative<ClockState>(state) ? Task::clock : Task::gauge;
}

int clock_state_to_minutes(const ClockState& state) { return 60 * state.hour() + state.minute(); }

HandAngles clock_hand_angles(const ClockState& state) {
  return {30.0 * state.hour() + 0.5 * state.minute(), 6.0 * state.minute()};
}

int clock_distance(const ClockState& a, const ClockState& b) {
  const int diff = std::abs(clock_state_to_minutes(a) - clock_state_to_minutes(b));
  return std::min(diff, ClockState::kCycleMinutes - diff);
}

double gauge_value_to_angle(const GaugeState& state) {
  const auto& cal = state.calibration();
  const double t = (state.value() - cal.value_min) / cal.range();
  return cal.angle_start_deg + t * (cal.angle_end_deg - cal.angle_start_deg);
}

double gauge_distance(const GaugeState& a, const GaugeState& b) {
  if (!(a.calibration() == b.calibration())) {
    throw CalibrationMismatch("gauge states use different calibrations ('" + a.calibration().id +
                              "' vs '" + b.calibration().id + "')");
  }
  return std::abs(a.value() - b.value()) / a.calibration().range();
}

double state_distance_normalized(const DialState& a, const DialState& b) {
  if (a.index() != b.index()) throw VariantMismatch("cannot compare a clock state with a gauge state");
  if (const auto* ca = std::get_if<ClockState>(&a)) {
    return clock_distance(*ca, std::get<ClockState>(b)) / 360.0;
  }
  return gauge_distance(std::get<GaugeState>(a), std::get<GaugeState>(b));
}

std::string format_clock(const ClockState& state) {
  char buf[8];
  const int shown = state.hour() == 0 ? 12 : state.hour();
  std::snprintf(buf, sizeof buf, "%d:%02d", shown, state.minute());
  return buf;
}

std::string format_gauge_value(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  std::string out = buf;
  const auto dot = out.find('.');
  auto last = out.find_last_not_of('0');
  if (last == dot) ++last;
  out.erase(last + 1);
  if (out == "-0.0") out = "0.0";
  return out;
}

std::string format_state(const DialState& state) {
  if (const auto* c = std::get_if<ClockState>(&state)) return format_clock(*c);
  return format_gauge_value(std::get<GaugeState>(state).value());
}

ClockState parse_clock_text(std::string_view text) {
  const auto colon = text.find(':');
  auto all_digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char ch : s)
      if (ch < '0' || ch > '9') return false;
    return true;
  };
  if (colon == std::string_view::npos) throw ParseError("clock text '" + std::string(text) + "' lacks ':'");
  const auto hs = text.substr(0, colon);
  const auto ms = text.substr(colon + 1);
  if (!all_digits(hs) || hs.size() > 2 || !all_digits(ms) || ms.size() != 2) {
    throw ParseError("malformed clock text '" + std::string(text) + "'");
  }
  const int h = std::stoi(std::string(hs));
  const int m = std::stoi(std::string(ms));
  if (h > 12 || m > 59) throw ParseError("clock text '" + std::string(text) + "' out of range");
  return ClockState(h % 12, m);
}

double quantize_gauge_value(double value) { return std::round(value * 1e4) / 1e4; }

std::string state_key(const DialState& state) {
  if (const auto* c = std::get_if<ClockState>(&state)) return "clock:" + format_clock(*c);
  const auto& g = std::get<GaugeState>(state);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", g.value());
  return "gauge:" + g.calibration().id + ":" + buf;
}

}  // namespace dialkit
