#include "dialkit/answer.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "dialkit/errors.hpp"

namespace dialkit {

namespace {

bool is_digit(char ch) { return ch >= '0' && ch <= '9'; }

}  // namespace

std::optional<ClockState> parse_clock_answer(std::string_view text) {
  std::optional<ClockState> found;
  for (std::size_t colon = text.find(':'); colon != std::string_view::npos;
       colon = text.find(':', colon + 1)) {
    std::size_t h_begin = colon;
    while (h_begin > 0 && is_digit(text[h_begin - 1])) --h_begin;
    const std::size_t h_len = colon - h_begin;
    std::size_t m_end = colon + 1;
    while (m_end < text.size() && is_digit(text[m_end])) ++m_end;
    const std::size_t m_len = m_end - colon - 1;
    if (h_len < 1 || h_len > 2 || m_len != 2) continue;
    const int hour = std::stoi(std::string(text.substr(h_begin, h_len)));
    const int minute = std::stoi(std::string(text.substr(colon + 1, 2)));
    if (hour > 12 || minute > 59) continue;
    found = ClockState(hour % 12, minute);
  }
  return found;
}

std::optional<double> parse_decimal_answer(std::string_view text) {
  std::optional<double> found;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < text.size() && is_digit(text[i])) ++i;
    if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
      ++i;
      while (i < text.size() && is_digit(text[i])) ++i;
    }
    if (begin > 0 && text[begin - 1] == '-' &&
        (begin == 1 || !std::isalnum(static_cast<unsigned char>(text[begin - 2])))) {
      --begin;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + i, value);
    if (ec == std::errc() && std::isfinite(value)) found = value;
  }
  return found;
}

std::optional<Prediction> parse_prediction(std::string_view text, Task task,
                                           const GaugeCalibration* calibration) {
  if (task == Task::clock) {
    if (auto c = parse_clock_answer(text)) return Prediction{*c};
    return std::nullopt;
  }
  const auto value = parse_decimal_answer(text);
  if (!value) return std::nullopt;
  GaugeReading reading{*value, false};
  if (calibration) reading.out_of_range = *value < calibration->value_min || *value > calibration->value_max;
  return Prediction{reading};
}

DialState to_state(const Prediction& prediction, const GaugeCalibration* calibration) {
  if (const auto* c = std::get_if<ClockState>(&prediction)) return *c;
  if (!calibration) throw MetadataError("gauge prediction needs a calibration");
  return GaugeState(std::get<GaugeReading>(prediction).value, *calibration);
}

double prediction_distance_normalized(const Prediction& prediction, const DialState& truth) {
  if (prediction.index() != truth.index()) {
    throw VariantMismatch("prediction and truth are for different dial types");
  }
  if (const auto* c = std::get_if<ClockState>(&prediction)) {
    return clock_distance(*c, std::get<ClockState>(truth)) / 360.0;
  }
  const auto& g = std::get<GaugeState>(truth);
  return std::abs(std::get<GaugeReading>(prediction).value - g.value()) / g.calibration().range();
}

}  // namespace dialkit
