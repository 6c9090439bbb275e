#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dialkit/answer.hpp"
#include "dialkit/record.hpp"

namespace dialkit::eval {

struct PredictionRecord {
  std::string id;
  std::string prediction_text;
};

// predictions.jsonl rows: {"id", "prediction"}.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

inline constexpr int kAllBuckets = -1;
inline constexpr std::string_view kAllSplits = "all";

struct GroupMetrics {
  std::string split;           // split name or "all"
  int bucket = kAllBuckets;    // bucket index or kAllBuckets
  std::size_t n = 0;
  std::size_t n_parsed = 0;
  std::size_t n_exact = 0;
  std::size_t n_tol1 = 0;
  std::size_t n_tol5 = 0;
  double error_sum = 0.0;      // over parsed predictions
  double exact_match_pct = 0.0;
  double tol1_pct = 0.0;
  double tol5_pct = 0.0;
  double mae = 0.0;            // minutes (clock) or normalized (gauge)
  double parse_failure_pct = 0.0;
};

struct MetricReport {
  Task task = Task::clock;
  int bucket_count = 1;
  // Gauge thresholds on normalized error; clocks use 0 / 1 / 5 minutes.
  double em_tolerance = 0.0;
  double tol1_tolerance = 1.0;
  double tol5_tolerance = 5.0;
  // Per split: buckets 0..B-1 then the split total; finally the "all" total.
  std::vector<GroupMetrics> groups;

  const GroupMetrics* find(std::string_view split, int bucket) const;
  std::vector<std::string> splits() const;
};

struct EvalOptions {
  // Gauge exact-match tolerance on normalized error; default half a minor tick.
  std::optional<double> gauge_em_tolerance;
};

// Missing predictions count as parse failures. Throws UnknownId, DuplicateId.
MetricReport evaluate(std::span<const SampleRecord> manifest, std::span<const PredictionRecord> predictions,
                      int bucket_count, const EvalOptions& options = {});

enum class CurveMetric { em, tol1, tol5 };
CurveMetric parse_curve_metric(std::string_view text);
std::string_view to_string(CurveMetric metric);

struct CurvePoint {
  double severity;  // bucket centre
  double accuracy_pct;
};

std::vector<CurvePoint> degradation_curve(const MetricReport& report, std::string_view split,
                                          CurveMetric metric = CurveMetric::em);

enum class ReportFormat { json, csv, svg };
ReportFormat parse_report_format(std::string_view text);

nlohmann::ordered_json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::ordered_json& j);
std::string report_to_csv(const MetricReport& report);
std::string report_to_svg(const MetricReport& report, CurveMetric metric = CurveMetric::em);

// Writes one serialization. Throws IoError.
void emit_report(const MetricReport& report, ReportFormat format, const std::filesystem::path& path,
                 CurveMetric metric = CurveMetric::em);

}  // namespace dialkit::eval
