#include "dialkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "dialkit/errors.hpp"
#include "dialkit/parallel.hpp"
#include "dialkit/render.hpp"
#include "dialkit/rng.hpp"

namespace dialkit::dataset {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

json header_to_json(const ManifestHeader& h) {
  json j;
  j["schema"] = kManifestSchema;
  j["version"] = kManifestVersion;
  j["kind"] = h.kind;
  j["task"] = to_string(h.task);
  j["bucket_count"] = h.bucket_count;
  j["master_seed"] = h.master_seed;
  return j;
}

ManifestHeader header_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != kManifestSchema) {
    throw SchemaError("not a dialkit manifest (missing schema header)");
  }
  if (!j.contains("version") || j["version"] != kManifestVersion) {
    throw SchemaError("unsupported manifest version " + (j.contains("version") ? j["version"].dump() : "?") +
                      " (expected " + std::to_string(kManifestVersion) + ")");
  }
  ManifestHeader h;
  try {
    h.kind = j.at("kind").get<std::string>();
    h.task = parse_task(j.at("task").get<std::string>());
    h.bucket_count = j.at("bucket_count").get<int>();
    h.master_seed = j.at("master_seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    throw SchemaError(std::string("malformed manifest header: ") + e.what());
  }
  if (h.bucket_count < 1) throw SchemaError("manifest header bucket_count must be >= 1");
  return h;
}

std::string padded(std::uint64_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*llu", width, static_cast<unsigned long long>(i));
  return buf;
}

std::string image_path_for(const std::string& id) { return "images/" + id + ".png"; }

SampleRecord finish(SampleRecord r, std::string id, Split split, double severity, int bucket_count) {
  r.id = std::move(id);
  r.split = split;
  r.severity = severity;
  r.bucket = bucket_of(severity, bucket_count);
  r.image_path = image_path_for(r.id);
  return r;
}

SampleRecord make_record(const DialState& state, const AppearanceCondition& cond, std::uint64_t style_seed,
                         int image_size) {
  SampleRecord r;
  r.task = task_of(state);
  r.state = state;
  r.appearance = cond;
  r.style_seed = style_seed;
  r.image_size = image_size;
  return r;
}

// Stratified severity: bucket b gets s in [b/B, (b+1)/B).
double stratified_severity(int bucket, int bucket_count, double u) {
  double s = (bucket + u) / bucket_count;
  while (s > 0.0 && bucket_of(s, bucket_count) != bucket) s = std::nextafter(s, 0.0);
  return s;
}

std::string angle_text(double deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", deg);
  std::string s = buf;
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

}  // namespace

std::string manifest_text(const ManifestHeader& header, std::span<const SampleRecord> records) {
  std::string out = header_to_json(header).dump();
  out += '\n';
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const fs::path& path, const ManifestHeader& header, std::span<const SampleRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_text(header, records);
  if (!out) throw IoError("failed writing " + path.string());
}

ManifestReader::ManifestReader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in_, line)) throw SchemaError(path.string() + ": empty manifest (no header line)");
  line_ = 1;
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ":1: header is not JSON: " + e.what());
  }
  header_ = header_from_json(j);
}

std::optional<SampleRecord> ManifestReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    try {
      SampleRecord r = record_from_json(json::parse(line));
      if (r.task != header_.task) throw MetadataError("row task differs from the manifest header");
      return r;
    } catch (const json::parse_error& e) {
      throw ParseError(path_.string() + ":" + std::to_string(line_) + ": malformed JSON: " + e.what());
    } catch (const MetadataError& e) {
      throw MetadataError(path_.string() + ":" + std::to_string(line_) + ": " + e.what());
    }
  }
  return std::nullopt;
}

Manifest read_manifest(const fs::path& path) {
  ManifestReader reader(path);
  Manifest m{reader.header(), {}};
  std::set<std::string> seen;
  while (auto r = reader.next()) {
    if (!seen.insert(r->id).second) {
      throw DuplicateId(path.string() + ":" + std::to_string(reader.line()) + ": duplicate id '" + r->id + "'");
    }
    m.records.push_back(std::move(*r));
  }
  return m;
}

std::uint64_t style_seed_for(std::uint64_t master_seed, std::uint64_t index, int style_pool) {
  if (style_pool <= 0) return 0;
  const std::uint64_t seed = derive_seed(master_seed, index % static_cast<std::uint64_t>(style_pool), SeedRole::style);
  return seed == 0 ? 1 : seed;
}

DialState random_state(Task task, const GaugeCalibration& calibration, std::uint64_t seed) {
  SplitMix64 rng(seed);
  if (task == Task::clock) return ClockState::from_minutes(static_cast<int>(rng.below(ClockState::kCycleMinutes)));
  const double v = quantize_gauge_value(rng.uniform(calibration.value_min, calibration.value_max));
  return GaugeState(std::clamp(v, calibration.value_min, calibration.value_max), calibration);
}

void BenchmarkConfig::validate() const {
  if (counts.empty()) throw ConfigError("benchmark needs at least one split count");
  std::set<Split> seen;
  for (const auto& c : counts) {
    if (c.count <= 0) throw ConfigError("split counts must be positive");
    if (!seen.insert(c.split).second) throw ConfigError("split listed twice in benchmark config");
    if (unique_states && task == Task::clock && c.count > ClockState::kCycleMinutes) {
      throw ConfigError("unique clock states allow at most 720 samples per split");
    }
  }
  if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  if (style_pool < 0) throw ConfigError("style_pool must be >= 0");
  if (image_size < 16 || image_size > 8192) throw ConfigError("image_size must lie in [16, 8192]");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (unique_states && task == Task::gauge) throw ConfigError("unique_states applies to clock benchmarks only");
  try {
    calibration.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<SampleRecord> plan_benchmark(const BenchmarkConfig& config) {
  config.validate();
  std::vector<SampleRecord> rows;
  for (const auto& [split, count] : config.counts) {
    const auto split_tag = static_cast<std::uint64_t>(split) + 1;
    std::vector<int> minutes;
    if (config.unique_states) {
      minutes.resize(ClockState::kCycleMinutes);
      std::iota(minutes.begin(), minutes.end(), 0);
      SplitMix64 shuffle(derive_seed(config.master_seed, split_tag, SeedRole::shuffle));
      for (std::size_t i = minutes.size() - 1; i > 0; --i) std::swap(minutes[i], minutes[shuffle.below(i + 1)]);
    }
    for (int i = 0; i < count; ++i) {
      const std::uint64_t key = (split_tag << 32) | static_cast<std::uint64_t>(i);
      const DialState state = config.unique_states
                                  ? DialState{ClockState::from_minutes(minutes[i])}
                                  : random_state(config.task, config.calibration,
                                                 derive_seed(config.master_seed, key, SeedRole::state));
      SplitMix64 sev(derive_seed(config.master_seed, key, SeedRole::severity));
      const int bucket = i % config.bucket_count;
      const double severity = stratified_severity(bucket, config.bucket_count, sev.uniform());
      const auto cond = sample_appearance(split, severity, derive_seed(config.master_seed, key, SeedRole::appearance));
      const auto style = style_seed_for(config.master_seed, static_cast<std::uint64_t>(rows.size()), config.style_pool);
      rows.push_back(finish(make_record(state, cond, style, config.image_size),
                            std::string(to_string(split)) + "-" + padded(i, 6), split, severity,
                            config.bucket_count));
    }
  }
  return rows;
}

void render_images(std::span<const SampleRecord> records, const fs::path& out_dir, int jobs) {
  std::set<fs::path> dirs;
  for (const auto& r : records) dirs.insert((out_dir / r.image_path).parent_path());
  for (const auto& d : dirs) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw IoError("cannot create " + d.string() + ": " + ec.message());
  }
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    write_png(out_dir / records[i].image_path, render_record(records[i]));
  });
}

Manifest generate_benchmark(const BenchmarkConfig& config, const fs::path& out_dir) {
  Manifest m;
  m.header = ManifestHeader{"benchmark", config.task, config.bucket_count, config.master_seed};
  m.records = plan_benchmark(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  render_images(m.records, out_dir, config.jobs);
  write_manifest(out_dir / "manifest.jsonl", m.header, m.records);
  return m;
}

namespace {

struct Draw {
  AppearanceCondition cond;
  double severity;
};

Draw draw_condition(const PairOptions& o, std::uint64_t master, std::uint64_t index, SeedRole role) {
  const std::uint64_t seed = derive_seed(master, index, role);
  SplitMix64 rng(derive_seed(seed, 0, SeedRole::severity));
  const double severity = rng.uniform();
  return {sample_appearance(o.split, severity, seed), severity};
}

void validate_pair_options(const PairOptions& o) {
  if (o.bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  if (o.image_size < 16) throw ConfigError("image_size must be >= 16");
  if (o.style_pool < 0) throw ConfigError("style_pool must be >= 0");
}

}  // namespace

std::pair<SampleRecord, SampleRecord> sample_same_state_pair(const DialState& state, std::uint64_t master_seed,
                                                             std::uint64_t index, const PairOptions& o) {
  validate_pair_options(o);
  const auto style = style_seed_for(master_seed, index, o.style_pool);
  const Draw a = draw_condition(o, master_seed, index, SeedRole::appearance);
  const Draw b = draw_condition(o, master_seed, index, SeedRole::second_appearance);
  const std::string base = "same-" + padded(index, 7);
  return {finish(make_record(state, a.cond, style, o.image_size), base + "-0", o.split, a.severity, o.bucket_count),
          finish(make_record(state, b.cond, style, o.image_size), base + "-1", o.split, b.severity, o.bucket_count)};
}

double default_neighbor_delta(Task task, const GaugeCalibration& calibration) {
  return task == Task::clock ? 1.0 : calibration.minor_step();
}

std::pair<SampleRecord, SampleRecord> sample_neighbor_pair(const DialState& state, double delta,
                                                           std::uint64_t master_seed, std::uint64_t index,
                                                           const PairOptions& o) {
  validate_pair_options(o);
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("neighbor delta must be positive");
  DialState first = state, second = state;
  if (const auto* c = std::get_if<ClockState>(&state)) {
    if (delta != std::floor(delta)) throw DomainError("clock neighbor delta must be a whole number of minutes");
    if (delta >= ClockState::kCycleMinutes) throw DomainError("clock neighbor delta must be below 720 minutes");
    second = ClockState::from_minutes(clock_state_to_minutes(*c) + static_cast<int>(delta));
  } else {
    const auto& g = std::get<GaugeState>(state);
    const auto& cal = g.calibration();
    if (delta >= cal.range()) throw DomainError("gauge neighbor delta must be below the calibrated range");
    double lo = g.value();
    if (lo + delta > cal.value_max) lo = quantize_gauge_value(cal.value_max - delta);
    const double hi = std::min(quantize_gauge_value(lo + delta), cal.value_max);
    first = GaugeState(std::max(lo, cal.value_min), cal);
    second = GaugeState(hi, cal);
  }
  const auto style = style_seed_for(master_seed, index, o.style_pool);
  const Draw d = draw_condition(o, master_seed, index, SeedRole::appearance);
  const std::string base = "near-" + padded(index, 7);
  return {finish(make_record(first, d.cond, style, o.image_size), base + "-0", o.split, d.severity, o.bucket_count),
          finish(make_record(second, d.cond, style, o.image_size), base + "-1", o.split, d.severity, o.bucket_count)};
}

void TripletConfig::validate() const {
  if (!(gap_min > 0.0 && gap_min <= gap_max && gap_max <= 1.0)) {
    throw ConfigError("negative gap range must satisfy 0 < gap_min <= gap_max <= 1");
  }
  if (task == Task::clock && std::ceil(gap_min * 360.0) > std::floor(gap_max * 360.0)) {
    throw ConfigError("negative gap range contains no whole-minute clock gap");
  }
  try {
    schedule.validate();
    calibration.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  validate_pair_options(pair);
}

TripletSample sample_triplet(std::uint64_t master_seed, std::uint64_t index, const TripletConfig& config) {
  config.validate();
  SplitMix64 rng(derive_seed(master_seed, index, SeedRole::negative));
  const double target_gap = rng.uniform(config.gap_min, config.gap_max);

  DialState anchor_state, negative_state;
  if (config.task == Task::clock) {
    const int lo = std::max(1, static_cast<int>(std::ceil(config.gap_min * 360.0)));
    const int hi = static_cast<int>(std::floor(config.gap_max * 360.0));
    const int minutes = std::clamp(static_cast<int>(std::lround(target_gap * 360.0)), lo, hi);
    const int anchor = static_cast<int>(rng.below(ClockState::kCycleMinutes));
    const int sign = rng.below(2) == 0 ? 1 : -1;
    anchor_state = ClockState::from_minutes(anchor);
    negative_state = ClockState::from_minutes(anchor + sign * minutes);
  } else {
    const auto& cal = config.calibration;
    const double span = target_gap * cal.range();
    const double low = quantize_gauge_value(rng.uniform(cal.value_min, cal.value_max - span));
    const double high = std::min(quantize_gauge_value(low + span), cal.value_max);
    const bool anchor_low = rng.below(2) == 0;
    anchor_state = GaugeState(std::max(anchor_low ? low : high, cal.value_min), cal);
    negative_state = GaugeState(std::max(anchor_low ? high : low, cal.value_min), cal);
  }

  auto [anchor, positive] = sample_same_state_pair(anchor_state, master_seed, index, config.pair);
  const Draw n = draw_condition(config.pair, master_seed, index, SeedRole::negative);
  const std::string base = "trip-" + padded(index, 7);
  anchor.id = base + "-a";
  anchor.image_path = image_path_for(anchor.id);
  positive.id = base + "-p";
  positive.image_path = image_path_for(positive.id);
  SampleRecord negative = finish(make_record(negative_state, n.cond, anchor.style_seed, config.pair.image_size),
                                 base + "-n", config.pair.split, n.severity, config.pair.bucket_count);

  TripletSample out;
  out.triplet.anchor_id = anchor.id;
  out.triplet.positive_id = positive.id;
  out.triplet.negative_id = negative.id;
  out.triplet.state_gap_norm = state_distance_normalized(anchor.state, negative.state);
  out.triplet.margin = align::margin_for_gap(out.triplet.state_gap_norm, config.schedule);
  out.anchor = std::move(anchor);
  out.positive = std::move(positive);
  out.negative = std::move(negative);
  return out;
}

json triplet_to_json(const Triplet& t) {
  json j;
  j["anchor_id"] = t.anchor_id;
  j["positive_id"] = t.positive_id;
  j["negative_id"] = t.negative_id;
  j["state_gap_norm"] = t.state_gap_norm;
  j["margin"] = t.margin;
  return j;
}

Triplet triplet_from_json(const json& j) {
  try {
    return Triplet{j.at("anchor_id").get<std::string>(), j.at("positive_id").get<std::string>(),
                   j.at("negative_id").get<std::string>(), j.at("state_gap_norm").get<double>(),
                   j.at("margin").get<double>()};
  } catch (const json::exception& e) {
    throw MetadataError(std::string("malformed triplet row: ") + e.what());
  }
}

GroundedTarget sft_target(const SampleRecord& record) {
  GroundedTarget t;
  t.sample_id = record.id;
  t.final_state = format_state(record.state);
  if (const auto* c = std::get_if<ClockState>(&record.state)) {
    const HandAngles a = clock_hand_angles(*c);
    const int shown_hour = c->hour() == 0 ? 12 : c->hour();
    t.indicator = "hour hand and minute hand";
    t.dial_position = "minute hand at " + angle_text(a.minute_deg) + " degrees and hour hand at " +
                      angle_text(a.hour_deg);
    t.calibration_mapping = "the minute hand turns 6 degrees per minute and the hour hand 30 degrees per hour, "
                            "so the hands show " + std::to_string(c->minute()) + " minutes past hour " +
                            std::to_string(shown_hour);
  } else {
    const auto& g = std::get<GaugeState>(record.state);
    const auto& cal = g.calibration();
    if (cal.id.empty()) throw MetadataError("record '" + record.id + "' lacks calibration metadata");
    const std::string angle = angle_text(gauge_value_to_angle(g));
    t.indicator = "pointer";
    t.dial_position = "pointer at " + angle;
    t.calibration_mapping = "the scale runs linearly from " + format_gauge_value(cal.value_min) + " at " +
                            angle_text(cal.angle_start_deg) + " degrees to " + format_gauge_value(cal.value_max) +
                            " at " + angle_text(cal.angle_end_deg) + " degrees, so " + angle +
                            " degrees corresponds to " + t.final_state;
  }
  t.rendered_text = "Indicator: " + t.indicator + ". Position: " + t.dial_position +
                    " degrees on the dial. Mapping: " + t.calibration_mapping + ". Answer: " + t.final_state + ".";
  return t;
}

json sft_to_json(const GroundedTarget& target, const SampleRecord& record) {
  json j;
  j["sample_id"] = target.sample_id;
  j["prompt"] = kSftPrompt;
  j["target_text"] = target.rendered_text;
  j["image_path"] = record.image_path;
  return j;
}

void write_jsonl(const fs::path& path, std::span<const json> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace dialkit::dataset
