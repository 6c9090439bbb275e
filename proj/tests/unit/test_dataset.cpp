#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "dialkit/answer.hpp"
#include "dialkit/dataset.hpp"
#include "dialkit/errors.hpp"
#include "dialkit/image.hpp"
#include "dialkit/render.hpp"
#include "oracles.hpp"

using namespace dialkit;
using namespace dialkit::dataset;

namespace {

BenchmarkConfig small_config(Task task = Task::clock) {
  BenchmarkConfig c;
  c.task = task;
  c.counts = {{Split::clean, 40}, {Split::view, 40}, {Split::illum, 40}, {Split::combined, 40}};
  c.master_seed = 17;
  c.image_size = 64;
  return c;
}

}  // namespace

TEST_CASE("benchmark plan: ids, buckets and split semantics") {
  const auto rows = plan_benchmark(small_config());
  REQUIRE(rows.size() == 160);
  CHECK(rows.front().id == "clean-000000");
  CHECK(rows[41].id == "view-000001");
  std::map<std::pair<Split, int>, int> per_bucket;
  for (const auto& r : rows) {
    REQUIRE(r.bucket == bucket_of(r.severity, 4));
    REQUIRE(r.image_path == "images/" + r.id + ".png");
    ++per_bucket[{r.split, r.bucket}];
    if (r.split == Split::view) REQUIRE(r.appearance.illum_severity == 0.0);
    if (r.split == Split::illum) REQUIRE(r.appearance.view_severity == 0.0);
    if (r.split == Split::clean) {
      REQUIRE(r.appearance.view_severity <= 0.1 + 1e-12);
      REQUIRE(r.appearance.illum_severity <= 0.1 + 1e-12);
    }
  }
  for (const auto& [key, n] : per_bucket) CHECK(n == 10);
}

TEST_CASE("bucket_of edges") {
  CHECK(bucket_of(0.0, 4) == 0);
  CHECK(bucket_of(0.25, 4) == 1);
  CHECK(bucket_of(0.2499999, 4) == 0);
  CHECK(bucket_of(1.0, 4) == 3);
}

TEST_CASE("unique states and config validation") {
  auto c = small_config();
  c.counts = {{Split::combined, 720}};
  c.unique_states = true;
  std::set<int> minutes;
  for (const auto& r : plan_benchmark(c)) minutes.insert(clock_state_to_minutes(std::get<ClockState>(r.state)));
  CHECK(minutes.size() == 720);
  c.counts = {{Split::combined, 721}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.bucket_count = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.counts.push_back({Split::clean, 3});
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("manifest round trip and streaming reader") {
  const auto dir = oracle::scratch_dir("dataset_manifest");
  const auto rows = plan_benchmark(small_config(Task::gauge));
  const ManifestHeader h{"benchmark", Task::gauge, 4, 17};
  write_manifest(dir / "m.jsonl", h, rows);
  const auto m = read_manifest(dir / "m.jsonl");
  CHECK(m.header == h);
  CHECK(m.records == rows);

  ManifestReader reader(dir / "m.jsonl");
  std::size_t n = 0;
  while (auto r = reader.next()) CHECK(*r == rows[n++]);
  CHECK(n == rows.size());

  write_manifest(dir / "empty.jsonl", h, {});
  ManifestReader empty(dir / "empty.jsonl");
  CHECK_FALSE(empty.next().has_value());
}

TEST_CASE("manifest errors name the line") {
  const auto dir = oracle::scratch_dir("dataset_errors");
  const auto rows = plan_benchmark(small_config());
  write_manifest(dir / "m.jsonl", {"benchmark", Task::clock, 4, 17}, std::span(rows).first(3));
  auto text = oracle::read_file(dir / "m.jsonl");
  const auto third = text.find('\n', text.find('\n', text.find('\n') + 1) + 1);
  text.insert(third + 1, "{not json\n");
  std::ofstream(dir / "bad.jsonl", std::ios::binary) << text;
  ManifestReader reader(dir / "bad.jsonl");
  reader.next();
  reader.next();
  try {
    reader.next();
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:4") != std::string::npos);
  }

  std::ofstream(dir / "v2.jsonl") << R"({"schema":"dialkit.manifest","version":2,"kind":"benchmark","task":"clock","bucket_count":4,"master_seed":0})"
                                  << "\n";
  CHECK_THROWS_AS(ManifestReader(dir / "v2.jsonl"), SchemaError);
  std::ofstream(dir / "dup.jsonl", std::ios::binary)
      << manifest_text({"benchmark", Task::clock, 4, 17}, std::vector<SampleRecord>{rows[0], rows[0]});
  CHECK_THROWS_AS(read_manifest(dir / "dup.jsonl"), DuplicateId);

  auto j = record_to_json(rows[0]);
  j["state"]["text"] = "1:23";
  CHECK_THROWS_AS(record_from_json(j), MetadataError);
}

TEST_CASE("same-state and neighbour pairs") {
  const PairOptions o{Split::combined, 4, 64, 8};
  const DialState s = ClockState(11, 59);
  const auto [a, b] = sample_same_state_pair(s, 3, 12, o);
  CHECK(a.id == "same-0000012-0");
  CHECK(b.id == "same-0000012-1");
  CHECK(a.state == b.state);
  CHECK(a.style_seed == b.style_seed);
  CHECK_FALSE(a.appearance == b.appearance);

  const auto [c, d] = sample_neighbor_pair(s, 1, 3, 12, o);
  CHECK(c.id == "near-0000012-0");
  CHECK(std::get<ClockState>(d.state) == ClockState(0, 0));
  CHECK(c.appearance == d.appearance);

  const auto cal = default_gauge_calibration();
  const auto [g0, g1] = sample_neighbor_pair(GaugeState(99.5, cal), 2.0, 3, 1, o);
  CHECK(std::get<GaugeState>(g0.state).value() == doctest::Approx(98.0));
  CHECK(std::get<GaugeState>(g1.state).value() == doctest::Approx(100.0));
  CHECK_THROWS_AS(sample_neighbor_pair(s, 1.5, 3, 1, o), DomainError);
}

TEST_CASE("triplets carry consistent gaps and margins") {
  for (Task task : {Task::clock, Task::gauge}) {
    TripletConfig c;
    c.task = task;
    c.pair.image_size = 64;
    for (std::uint64_t i = 0; i < 300; ++i) {
      const auto t = sample_triplet(5, i, c);
      REQUIRE(t.anchor.state == t.positive.state);
      REQUIRE(t.triplet.state_gap_norm == state_distance_normalized(t.anchor.state, t.negative.state));
      REQUIRE(t.triplet.state_gap_norm >= c.gap_min - 1e-3);
      REQUIRE(t.triplet.state_gap_norm <= c.gap_max + 1e-9);
      REQUIRE(t.triplet.margin == align::margin_for_gap(t.triplet.state_gap_norm, c.schedule));
      REQUIRE(t.anchor.style_seed == t.negative.style_seed);
      REQUIRE(triplet_from_json(triplet_to_json(t.triplet)) == t.triplet);
    }
  }
  const auto first = sample_triplet(5, 0, TripletConfig{});
  CHECK(first.triplet.anchor_id == "trip-0000000-a");
  CHECK(first.triplet.negative_id == "trip-0000000-n");
}

TEST_CASE("sft targets follow the template and parse back") {
  SampleRecord clock;
  clock.id = "x";
  clock.task = Task::clock;
  clock.state = ClockState(6, 30);
  const auto t = sft_target(clock);
  CHECK(t.rendered_text.rfind("Indicator: ", 0) == 0);
  CHECK(t.rendered_text.find("minute hand at 180 degrees") != std::string::npos);
  CHECK(t.rendered_text.find("hour hand at 195") != std::string::npos);
  CHECK(t.rendered_text.find(" degrees on the dial. Mapping: ") != std::string::npos);
  CHECK(t.final_state == "6:30");
  CHECK(t.rendered_text.size() > 2);
  CHECK(t.rendered_text.substr(t.rendered_text.size() - 13) == "Answer: 6:30.");

  SampleRecord gauge = clock;
  gauge.task = Task::gauge;
  gauge.state = GaugeState(50, default_gauge_calibration());
  const auto g = sft_target(gauge);
  CHECK(g.dial_position == "pointer at 90");
  CHECK(g.final_state == "50.0");
  const auto parsed = parse_prediction(g.rendered_text, Task::gauge);
  REQUIRE(parsed.has_value());
  CHECK(std::get<GaugeReading>(*parsed).value == 50.0);

  const auto j = sft_to_json(g, gauge);
  CHECK(j["prompt"] == "Read the instrument and state its value.");
  CHECK(j["sample_id"] == "x");
}

TEST_CASE("generated images match their records") {
  const auto dir = oracle::scratch_dir("dataset_generate");
  auto c = small_config();
  c.counts = {{Split::combined, 6}};
  c.jobs = 3;
  const auto m = generate_benchmark(c, dir);
  for (const auto& r : m.records) CHECK(read_png(dir / r.image_path) == render_record(r));
  CHECK(read_manifest(dir / "manifest.jsonl").records == m.records);
}
