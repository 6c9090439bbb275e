#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dialkit/align.hpp"
#include "dialkit/record.hpp"

namespace dialkit::dataset {

inline constexpr std::string_view kManifestSchema = "dialkit.manifest";
inline constexpr int kManifestVersion = 1;

// First line of every manifest.jsonl.
struct ManifestHeader {
  std::string kind = "benchmark";  // benchmark | pairs | triplets
  Task task = Task::clock;
  int bucket_count = 4;
  std::uint64_t master_seed = 0;

  friend bool operator==(const ManifestHeader&, const ManifestHeader&) = default;
};

std::string manifest_text(const ManifestHeader& header, std::span<const SampleRecord> records);
void write_manifest(const std::filesystem::path& path, const ManifestHeader& header,
                    std::span<const SampleRecord> records);

// Streaming reader. The header is validated in the constructor (SchemaError);
// row errors name the 1-based line number.
class ManifestReader {
 public:
  explicit ManifestReader(const std::filesystem::path& path);

  const ManifestHeader& header() const { return header_; }
  std::optional<SampleRecord> next();
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  ManifestHeader header_;
  std::size_t line_ = 0;
};

struct Manifest {
  ManifestHeader header;
  std::vector<SampleRecord> records;
};

// Reads every row; also rejects duplicate ids.
Manifest read_manifest(const std::filesystem::path& path);

// style_pool 0 keeps every sample on the default style (seed 0); otherwise
// sample i uses one of `style_pool` seeded styles, chosen by i mod pool.
std::uint64_t style_seed_for(std::uint64_t master_seed, std::uint64_t index, int style_pool);

// Gauge values are quantized to the 4 fractional digits of the manifest text.
DialState random_state(Task task, const GaugeCalibration& calibration, std::uint64_t seed);

struct SplitCount {
  Split split;
  int count;
};

struct BenchmarkConfig {
  Task task = Task::clock;
  std::vector<SplitCount> counts;
  int bucket_count = 4;
  std::uint64_t master_seed = 0;
  int style_pool = 8;
  int image_size = 448;
  // Each clock minute state at most once per split (count <= 720).
  bool unique_states = false;
  GaugeCalibration calibration;
  int jobs = 1;

  void validate() const;
};

// Records only; no rendering. Rows are in split order, then index order.
std::vector<SampleRecord> plan_benchmark(const BenchmarkConfig& config);

// Plans, renders images/<id>.png under out_dir, writes manifest.jsonl.
Manifest generate_benchmark(const BenchmarkConfig& config, const std::filesystem::path& out_dir);

// Renders each record to out_dir / record.image_path. Throws IoError.
void render_images(std::span<const SampleRecord> records, const std::filesystem::path& out_dir, int jobs);

struct PairOptions {
  Split split = Split::combined;
  int bucket_count = 4;
  int image_size = 448;
  int style_pool = 8;
};

// Identical state, independently drawn appearance, shared style.
std::pair<SampleRecord, SampleRecord> sample_same_state_pair(const DialState& state, std::uint64_t master_seed,
                                                             std::uint64_t index, const PairOptions& options = {});

// Second state = first advanced by delta (clock: whole minutes modulo 720;
// gauge: value units, re-centred downward when the advance would leave the
// range). Both records share one appearance and style. Throws DomainError.
std::pair<SampleRecord, SampleRecord> sample_neighbor_pair(const DialState& state, double delta,
                                                           std::uint64_t master_seed, std::uint64_t index,
                                                           const PairOptions& options = {});

// One minor tick for gauges, one minute for clocks.
double default_neighbor_delta(Task task, const GaugeCalibration& calibration);

struct Triplet {
  std::string anchor_id;
  std::string positive_id;
  std::string negative_id;
  double state_gap_norm = 0.0;
  double margin = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletConfig {
  Task task = Task::clock;
  double gap_min = 0.05;
  double gap_max = 1.0;
  align::MarginSchedule schedule;
  PairOptions pair;
  GaugeCalibration calibration;

  void validate() const;
};

struct TripletSample {
  Triplet triplet;
  SampleRecord anchor;
  SampleRecord positive;
  SampleRecord negative;
};

TripletSample sample_triplet(std::uint64_t master_seed, std::uint64_t index, const TripletConfig& config);

nlohmann::ordered_json triplet_to_json(const Triplet& t);
Triplet triplet_from_json(const nlohmann::ordered_json& j);

inline constexpr std::string_view kSftPrompt = "Read the instrument and state its value.";

// Four-step observation-to-state target, filled from metadata only.
struct GroundedTarget {
  std::string sample_id;
  std::string indicator;
  std::string dial_position;
  std::string calibration_mapping;
  std::string final_state;
  std::string rendered_text;
};

GroundedTarget sft_target(const SampleRecord& record);
nlohmann::ordered_json sft_to_json(const GroundedTarget& target, const SampleRecord& record);

// Writes the same rows to a JSONL file, one compact object per line.
void write_jsonl(const std::filesystem::path& path, std::span<const nlohmann::ordered_json> rows);

}  // namespace dialkit::dataset
