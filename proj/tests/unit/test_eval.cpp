#include <doctest.h>

#include <fstream>
#include <random>

#include "dialkit/dataset.hpp"
#include "dialkit/errors.hpp"
#include "dialkit/eval.hpp"
#include "oracles.hpp"

using namespace dialkit;
using namespace dialkit::eval;

namespace {

SampleRecord clock_row(const std::string& id, ClockState s, Split split = Split::clean, int bucket = 0) {
  SampleRecord r;
  r.id = id;
  r.task = Task::clock;
  r.split = split;
  r.state = s;
  r.bucket = bucket;
  return r;
}

}  // namespace

TEST_CASE("hand-checked clock fixture") {
  const std::vector<SampleRecord> m{clock_row("a", ClockState(0, 0))};
  const std::vector<PredictionRecord> p{{"a", "Answer: 12:03"}};
  const auto r = evaluate(m, p, 1);
  const auto* all = r.find(kAllSplits, kAllBuckets);
  REQUIRE(all);
  CHECK(all->exact_match_pct == 0.0);
  CHECK(all->tol1_pct == 0.0);
  CHECK(all->tol5_pct == 100.0);
  CHECK(all->mae == 3.0);
  CHECK(all->parse_failure_pct == 0.0);
}

TEST_CASE("missing and unparseable predictions") {
  const std::vector<SampleRecord> m{clock_row("a", ClockState(1, 0)), clock_row("b", ClockState(2, 0)),
                                    clock_row("c", ClockState(3, 0))};
  const std::vector<PredictionRecord> p{{"a", "1:00"}, {"b", "dunno"}};
  const auto r = evaluate(m, p, 1);
  const auto* all = r.find(kAllSplits, kAllBuckets);
  CHECK(all->n == 3);
  CHECK(all->n_parsed == 1);
  CHECK(all->exact_match_pct == doctest::Approx(100.0 / 3));
  CHECK(all->mae == 0.0);
  CHECK(all->parse_failure_pct == doctest::Approx(200.0 / 3));
  CHECK_THROWS_AS(evaluate(m, std::vector<PredictionRecord>{{"z", "1:00"}}, 1), UnknownId);
  CHECK_THROWS_AS(evaluate(m, std::vector<PredictionRecord>{{"a", "1:00"}, {"a", "2:00"}}, 1), DuplicateId);
}

TEST_CASE("gauge tolerances are in minor ticks") {
  const auto cal = default_gauge_calibration();
  auto row = [&](std::string id, double v) {
    SampleRecord r;
    r.id = std::move(id);
    r.task = Task::gauge;
    r.state = GaugeState(v, cal);
    return r;
  };
  const std::vector<SampleRecord> m{row("a", 50), row("b", 50), row("c", 50), row("d", 50)};
  const std::vector<PredictionRecord> p{{"a", "51"}, {"b", "52"}, {"c", "60"}, {"d", "61"}};
  const auto r = evaluate(m, p, 1);
  CHECK(r.em_tolerance == doctest::Approx(0.01));
  const auto* all = r.find(kAllSplits, kAllBuckets);
  CHECK(all->n_exact == 1);
  CHECK(all->n_tol1 == 2);
  CHECK(all->n_tol5 == 3);
  CHECK(all->mae == doctest::Approx((0.01 + 0.02 + 0.1 + 0.11) / 4));
}

TEST_CASE("metric laws and bucket reconstruction on random sets") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SampleRecord> m;
    std::vector<PredictionRecord> p;
    for (int i = 0; i < 80; ++i) {
      const auto split = static_cast<Split>(rng() % 4);
      const auto truth = ClockState::from_minutes(static_cast<int>(rng() % 720));
      m.push_back(clock_row("r" + std::to_string(i), truth, split, static_cast<int>(rng() % 3)));
      const int off = static_cast<int>(rng() % 13) - 6;
      if (rng() % 10) p.push_back({m.back().id, format_clock(ClockState::from_minutes(clock_state_to_minutes(truth) + off))});
    }
    const auto r = evaluate(m, p, 3);
    for (const auto& g : r.groups) {
      REQUIRE(g.exact_match_pct <= g.tol1_pct);
      REQUIRE(g.tol1_pct <= g.tol5_pct);
    }
    for (const auto& split : r.splits()) {
      const auto* total = r.find(split, kAllBuckets);
      double weighted = 0;
      std::size_t n = 0;
      for (int b = 0; b < 3; ++b) {
        const auto* g = r.find(split, b);
        weighted += g->exact_match_pct * g->n;
        n += g->n;
      }
      REQUIRE(n == total->n);
      REQUIRE(std::abs(weighted / n - total->exact_match_pct) < 1e-9);
    }
  }
}

TEST_CASE("group order and degradation curve") {
  const std::vector<SampleRecord> m{clock_row("a", ClockState(1, 0), Split::view, 1),
                                    clock_row("b", ClockState(1, 0), Split::clean, 0)};
  const std::vector<PredictionRecord> p{{"a", "1:00"}, {"b", "2:00"}};
  const auto r = evaluate(m, p, 2);
  REQUIRE(r.groups.size() == 7);
  CHECK(r.groups[0].split == "clean");
  CHECK(r.groups[2].bucket == kAllBuckets);
  CHECK(r.groups[3].split == "view");
  CHECK(r.groups.back().split == "all");
  const auto curve = degradation_curve(r, "view", CurveMetric::em);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].severity == 0.25);
  CHECK(curve[1].accuracy_pct == 100.0);
}

TEST_CASE("report serializations") {
  const std::vector<SampleRecord> m{clock_row("a", ClockState(1, 0), Split::view, 1),
                                    clock_row("b", ClockState(1, 0), Split::clean, 0)};
  const std::vector<PredictionRecord> p{{"a", "1:00"}, {"b", "1:07"}};
  const auto r = evaluate(m, p, 2);
  const auto back = report_from_json(report_to_json(r));
  REQUIRE(back.groups.size() == r.groups.size());
  for (std::size_t i = 0; i < r.groups.size(); ++i) {
    CHECK(back.groups[i].split == r.groups[i].split);
    CHECK(back.groups[i].bucket == r.groups[i].bucket);
    CHECK(back.groups[i].mae == r.groups[i].mae);
    CHECK(back.groups[i].tol5_pct == r.groups[i].tol5_pct);
  }
  const auto csv = report_to_csv(r);
  CHECK(csv.rfind("split,bucket,n,n_parsed,exact_match_pct,tol1_pct,tol5_pct,mae,parse_failure_pct\n", 0) == 0);
  CHECK(csv.find("all,all,2,2,50,50,50,3.5,0\n") != std::string::npos);
  const auto svg = report_to_svg(r, CurveMetric::tol5);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("accuracy (%)") != std::string::npos);
  CHECK(svg.find("data-split=\"view\"") != std::string::npos);
  CHECK(svg == report_to_svg(r, CurveMetric::tol5));
  CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);

  const auto dir = oracle::scratch_dir("eval_report");
  emit_report(r, ReportFormat::csv, dir / "r.csv");
  CHECK(oracle::read_file(dir / "r.csv") == csv);
}

TEST_CASE("read_predictions reports the line") {
  const auto dir = oracle::scratch_dir("eval_predictions");
  std::ofstream(dir / "p.jsonl") << R"({"id":"a","prediction":"1:00"})" << "\n" << R"({"id":"b"})" << "\n";
  try {
    read_predictions(dir / "p.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("p.jsonl:2") != std::string::npos);
  }
}
