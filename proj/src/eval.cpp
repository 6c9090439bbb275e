#include "dialkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "dialkit/compensated_sum.hpp"
#include "dialkit/errors.hpp"

namespace dialkit::eval {

using json = nlohmann::ordered_json;

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("prediction").get<std::string>()});
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

const GroupMetrics* MetricReport::find(std::string_view split, int bucket) const {
  for (const auto& g : groups)
    if (g.split == split && g.bucket == bucket) return &g;
  return nullptr;
}

std::vector<std::string> MetricReport::splits() const {
  std::vector<std::string> out;
  for (const auto& g : groups)
    if (g.split != kAllSplits && std::find(out.begin(), out.end(), g.split) == out.end()) out.push_back(g.split);
  return out;
}

namespace {

struct Accumulator {
  GroupMetrics m;
  CompensatedSum errors;

  void add(std::optional<double> error, const MetricReport& r) {
    ++m.n;
    if (!error) return;
    ++m.n_parsed;
    // Small slack absorbs rounding in normalized gauge errors.
    const double slack = r.task == Task::gauge ? 1e-12 : 0.0;
    if (*error <= r.em_tolerance + slack) ++m.n_exact;
    if (*error <= r.tol1_tolerance + slack) ++m.n_tol1;
    if (*error <= r.tol5_tolerance + slack) ++m.n_tol5;
    errors.add(*error);
  }

  GroupMetrics finish() {
    m.error_sum = errors.value();
    const double n = static_cast<double>(m.n);
    if (m.n > 0) {
      m.exact_match_pct = 100.0 * m.n_exact / n;
      m.tol1_pct = 100.0 * m.n_tol1 / n;
      m.tol5_pct = 100.0 * m.n_tol5 / n;
      m.parse_failure_pct = 100.0 * (m.n - m.n_parsed) / n;
    }
    m.mae = m.n_parsed > 0 ? m.error_sum / static_cast<double>(m.n_parsed) : 0.0;
    return m;
  }
};

}  // namespace

MetricReport evaluate(std::span<const SampleRecord> manifest, std::span<const PredictionRecord> predictions,
                      int bucket_count, const EvalOptions& options) {
  if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  MetricReport report;
  report.bucket_count = bucket_count;
  if (!manifest.empty()) report.task = manifest.front().task;

  std::unordered_map<std::string, const SampleRecord*> by_id;
  for (const auto& r : manifest) {
    if (r.task != report.task) throw MetadataError("manifest mixes clock and gauge rows");
    if (!by_id.emplace(r.id, &r).second) throw DuplicateId("duplicate manifest id '" + r.id + "'");
  }
  std::unordered_map<std::string, const PredictionRecord*> pred_by_id;
  for (const auto& p : predictions) {
    if (!by_id.count(p.id)) throw UnknownId("prediction id '" + p.id + "' not in manifest");
    if (!pred_by_id.emplace(p.id, &p).second) throw DuplicateId("duplicate prediction id '" + p.id + "'");
  }

  if (report.task == Task::gauge) {
    const auto& cal = std::get<GaugeState>(manifest.front().state).calibration();
    const double step = cal.minor_step() / cal.range();
    report.em_tolerance = options.gauge_em_tolerance.value_or(0.5 * step);
    report.tol1_tolerance = step;
    report.tol5_tolerance = 5.0 * step;
  }

  // One accumulator per (split, bucket) plus split totals; the fold runs in
  // manifest order so prediction-file order never matters.
  std::map<int, std::vector<Accumulator>> per_split;  // index bucket_count = split total
  Accumulator total;
  total.m.split = kAllSplits;
  for (const auto& r : manifest) {
    if (r.bucket < 0 || r.bucket >= bucket_count) {
      throw MetadataError("record '" + r.id + "' has bucket " + std::to_string(r.bucket) + " outside [0, " +
                          std::to_string(bucket_count) + ")");
    }
    std::optional<double> error;
    if (auto it = pred_by_id.find(r.id); it != pred_by_id.end()) {
      const GaugeCalibration* cal = nullptr;
      if (const auto* g = std::get_if<GaugeState>(&r.state)) cal = &g->calibration();
      if (auto pred = parse_prediction(it->second->prediction_text, r.task, cal)) {
        if (const auto* c = std::get_if<ClockState>(&*pred)) {
          error = static_cast<double>(clock_distance(*c, std::get<ClockState>(r.state)));
        } else {
          error = prediction_distance_normalized(*pred, r.state);
        }
      }
    }
    auto [it, inserted] = per_split.try_emplace(static_cast<int>(r.split));
    auto& groups = it->second;
    if (inserted) {
      groups.resize(bucket_count + 1);
      for (int b = 0; b <= bucket_count; ++b) {
        groups[b].m.split = to_string(r.split);
        groups[b].m.bucket = b == bucket_count ? kAllBuckets : b;
      }
    }
    groups[r.bucket].add(error, report);
    groups[bucket_count].add(error, report);
    total.add(error, report);
  }
  for (auto& [split, groups] : per_split)
    for (auto& g : groups) report.groups.push_back(g.finish());
  report.groups.push_back(total.finish());
  return report;
}

CurveMetric parse_curve_metric(std::string_view text) {
  if (text == "em") return CurveMetric::em;
  if (text == "tol1") return CurveMetric::tol1;
  if (text == "tol5") return CurveMetric::tol5;
  throw ConfigError("unknown tolerance metric '" + std::string(text) + "' (expected em|tol1|tol5)");
}

std::string_view to_string(CurveMetric metric) {
  switch (metric) {
    case CurveMetric::em: return "em";
    case CurveMetric::tol1: return "tol1";
    case CurveMetric::tol5: return "tol5";
  }
  return "em";
}

std::vector<CurvePoint> degradation_curve(const MetricReport& report, std::string_view split, CurveMetric metric) {
  std::vector<CurvePoint> out;
  for (int b = 0; b < report.bucket_count; ++b) {
    const GroupMetrics* g = report.find(split, b);
    double v = 0.0;
    if (g) v = metric == CurveMetric::em ? g->exact_match_pct : metric == CurveMetric::tol1 ? g->tol1_pct : g->tol5_pct;
    out.push_back({(b + 0.5) / report.bucket_count, v});
  }
  return out;
}

}  // namespace dialkit::eval
