#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "dialkit/state.hpp"

namespace dialkit {

// A parsed gauge answer may fall outside the calibrated range; it is still
// scored by its raw value.
struct GaugeReading {
  double value = 0.0;
  bool out_of_range = false;

  friend bool operator==(const GaugeReading&, const GaugeReading&) = default;
};

using Prediction = std::variant<ClockState, GaugeReading>;

// Last "H:MM" with H in 0..12 and MM in 00..59, delimited by non-digits.
std::optional<ClockState> parse_clock_answer(std::string_view text);

// Last finite decimal number (optional leading '-', optional fraction).
std::optional<double> parse_decimal_answer(std::string_view text);

// Gauge answers need the calibration only to set out_of_range; passing
// nullptr leaves the flag false. nullopt is a parse failure.
std::optional<Prediction> parse_prediction(std::string_view text, Task task,
                                           const GaugeCalibration* calibration = nullptr);

// DialState for an in-range prediction. Throws DomainError otherwise.
DialState to_state(const Prediction& prediction, const GaugeCalibration* calibration);

// Normalized distance between a prediction and the truth; gauge errors are
// unclamped (|p - t| / range). Throws VariantMismatch / CalibrationMismatch.
double prediction_distance_normalized(const Prediction& prediction, const DialState& truth);

}  // namespace dialkit
