#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dialkit/appearance.hpp"
#include "dialkit/state.hpp"

namespace dialkit {

// One rendered sample. State and appearance are independent factors; every
// field needed to reproduce the image is stored here.
struct SampleRecord {
  std::string id;
  Task task = Task::clock;
  Split split = Split::clean;
  DialState state;
  AppearanceCondition appearance;
  double severity = 0.0;
  int bucket = 0;
  std::uint64_t style_seed = 0;
  int image_size = 448;
  std::string image_path;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

// Manifest-row JSON (field order fixed for byte-stable output).
nlohmann::ordered_json state_to_json(const DialState& state);
nlohmann::ordered_json calibration_to_json(const GaugeCalibration& cal);
nlohmann::ordered_json appearance_to_json(const AppearanceCondition& cond);
nlohmann::ordered_json record_to_json(const SampleRecord& record);

// Inverses; throw MetadataError naming the offending field.
GaugeCalibration calibration_from_json(const nlohmann::ordered_json& j);
AppearanceCondition appearance_from_json(const nlohmann::ordered_json& j);
// `calibration` is required for gauge states.
DialState state_from_json(const nlohmann::ordered_json& j, Task task, const GaugeCalibration* calibration);
SampleRecord record_from_json(const nlohmann::ordered_json& j);

// bucket = floor(severity * bucket_count), last bucket absorbs severity 1.
int bucket_of(double severity, int bucket_count);

}  // namespace dialkit
