#include "dialkit/record.hpp"

#include <algorithm>
#include <cmath>

#include "dialkit/errors.hpp"

namespace dialkit {

using json = nlohmann::ordered_json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw MetadataError(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw MetadataError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw MetadataError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) throw MetadataError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

std::string text(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw MetadataError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

json state_to_json(const DialState& state) {
  json j;
  j["text"] = format_state(state);
  if (const auto* c = std::get_if<ClockState>(&state)) {
    j["hour"] = c->hour();
    j["minute"] = c->minute();
  } else {
    const auto& g = std::get<GaugeState>(state);
    j["value"] = g.value();
    j["calibration_id"] = g.calibration().id;
  }
  return j;
}

json calibration_to_json(const GaugeCalibration& cal) {
  json j;
  j["id"] = cal.id;
  j["value_min"] = cal.value_min;
  j["value_max"] = cal.value_max;
  j["angle_start_deg"] = cal.angle_start_deg;
  j["angle_end_deg"] = cal.angle_end_deg;
  j["major_ticks"] = cal.major_ticks;
  j["minor_per_major"] = cal.minor_per_major;
  return j;
}

json appearance_to_json(const AppearanceCondition& c) {
  json j;
  j["pitch_deg"] = c.pitch_deg;
  j["yaw_deg"] = c.yaw_deg;
  j["roll_deg"] = c.roll_deg;
  j["brightness"] = c.brightness;
  j["gamma"] = c.gamma;
  j["gradient_strength"] = c.gradient_strength;
  j["gradient_direction_deg"] = c.gradient_direction_deg;
  j["glare_intensity"] = c.glare_intensity;
  j["glare_u"] = c.glare_u;
  j["glare_v"] = c.glare_v;
  j["glare_radius_u"] = c.glare_radius_u;
  j["glare_radius_v"] = c.glare_radius_v;
  j["blur_sigma_px"] = c.blur_sigma_px;
  j["view_severity"] = c.view_severity;
  j["illum_severity"] = c.illum_severity;
  return j;
}

json record_to_json(const SampleRecord& r) {
  json j;
  j["id"] = r.id;
  j["task"] = to_string(r.task);
  j["split"] = to_string(r.split);
  j["state"] = state_to_json(r.state);
  if (const auto* g = std::get_if<GaugeState>(&r.state)) {
    j["calibration"] = calibration_to_json(g->calibration());
  } else {
    j["calibration"] = nullptr;
  }
  j["appearance"] = appearance_to_json(r.appearance);
  j["severity"] = r.severity;
  j["bucket"] = r.bucket;
  j["style_seed"] = r.style_seed;
  j["image_size"] = r.image_size;
  j["image_path"] = r.image_path;
  return j;
}

GaugeCalibration calibration_from_json(const json& j) {
  GaugeCalibration cal;
  cal.id = text(j, "id");
  cal.value_min = number(j, "value_min");
  cal.value_max = number(j, "value_max");
  cal.angle_start_deg = number(j, "angle_start_deg");
  cal.angle_end_deg = number(j, "angle_end_deg");
  cal.major_ticks = integer(j, "major_ticks");
  cal.minor_per_major = integer(j, "minor_per_major");
  try {
    cal.validate();
  } catch (const DomainError& e) {
    throw MetadataError(std::string("invalid calibration: ") + e.what());
  }
  return cal;
}

AppearanceCondition appearance_from_json(const json& j) {
  AppearanceCondition c;
  c.pitch_deg = number(j, "pitch_deg");
  c.yaw_deg = number(j, "yaw_deg");
  c.roll_deg = number(j, "roll_deg");
  c.brightness = number(j, "brightness");
  c.gamma = number(j, "gamma");
  c.gradient_strength = number(j, "gradient_strength");
  c.gradient_direction_deg = number(j, "gradient_direction_deg");
  c.glare_intensity = number(j, "glare_intensity");
  c.glare_u = number(j, "glare_u");
  c.glare_v = number(j, "glare_v");
  c.glare_radius_u = number(j, "glare_radius_u");
  c.glare_radius_v = number(j, "glare_radius_v");
  c.blur_sigma_px = number(j, "blur_sigma_px");
  c.view_severity = number(j, "view_severity");
  c.illum_severity = number(j, "illum_severity");
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw MetadataError(std::string("invalid appearance: ") + e.what());
  }
  return c;
}

DialState state_from_json(const json& j, Task task, const GaugeCalibration* calibration) {
  DialState state;
  try {
    if (task == Task::clock) {
      state = ClockState(integer(j, "hour"), integer(j, "minute"));
    } else {
      if (!calibration) throw MetadataError("gauge state needs a calibration");
      if (text(j, "calibration_id") != calibration->id) {
        throw MetadataError("gauge state calibration_id does not match its calibration");
      }
      state = GaugeState(number(j, "value"), *calibration);
    }
  } catch (const DomainError& e) {
    throw MetadataError(std::string("invalid state: ") + e.what());
  }
  if (text(j, "text") != format_state(state)) {
    throw MetadataError("state text '" + text(j, "text") + "' disagrees with its fields");
  }
  return state;
}

SampleRecord record_from_json(const json& j) {
  SampleRecord r;
  r.id = text(j, "id");
  try {
    r.task = parse_task(text(j, "task"));
    r.split = parse_split(text(j, "split"));
  } catch (const ConfigError& e) {
    throw MetadataError(e.what());
  }
  const auto& cal_json = field(j, "calibration");
  std::optional<GaugeCalibration> cal;
  if (!cal_json.is_null()) cal = calibration_from_json(cal_json);
  if (r.task == Task::gauge && !cal) throw MetadataError("gauge record '" + r.id + "' has no calibration");
  r.state = state_from_json(field(j, "state"), r.task, cal ? &*cal : nullptr);
  r.appearance = appearance_from_json(field(j, "appearance"));
  r.severity = number(j, "severity");
  r.bucket = integer(j, "bucket");
  const auto& seed = field(j, "style_seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw MetadataError("field 'style_seed' must be a non-negative integer");
  }
  r.style_seed = seed.get<std::uint64_t>();
  r.image_size = integer(j, "image_size");
  r.image_path = text(j, "image_path");
  if (!(r.severity >= 0.0 && r.severity <= 1.0)) throw MetadataError("record severity outside [0, 1]");
  return r;
}

int bucket_of(double severity, int bucket_count) {
  if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  const int b = static_cast<int>(std::floor(severity * bucket_count));
  return std::clamp(b, 0, bucket_count - 1);
}

}  // namespace dialkit
