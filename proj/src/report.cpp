#include <cstdio>
#include <fstream>
#include <sstream>

#include "dialkit/errors.hpp"
#include "dialkit/eval.hpp"

namespace dialkit::eval {

using json = nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  if (text == "svg") return ReportFormat::svg;
  throw ConfigError("unknown report format '" + std::string(text) + "' (expected json|csv|svg)");
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string bucket_text(int bucket) { return bucket == kAllBuckets ? "all" : std::to_string(bucket); }

}  // namespace

json report_to_json(const MetricReport& r) {
  json j;
  j["task"] = to_string(r.task);
  j["bucket_count"] = r.bucket_count;
  j["mae_unit"] = r.task == Task::clock ? "minutes" : "normalized";
  j["em_tolerance"] = r.em_tolerance;
  j["tol1_tolerance"] = r.tol1_tolerance;
  j["tol5_tolerance"] = r.tol5_tolerance;
  json groups = json::array();
  for (const auto& g : r.groups) {
    json row;
    row["split"] = g.split;
    row["bucket"] = bucket_text(g.bucket);
    row["n"] = g.n;
    row["n_parsed"] = g.n_parsed;
    row["n_exact"] = g.n_exact;
    row["n_tol1"] = g.n_tol1;
    row["n_tol5"] = g.n_tol5;
    row["error_sum"] = g.error_sum;
    row["exact_match_pct"] = g.exact_match_pct;
    row["tol1_pct"] = g.tol1_pct;
    row["tol5_pct"] = g.tol5_pct;
    row["mae"] = g.mae;
    row["parse_failure_pct"] = g.parse_failure_pct;
    groups.push_back(std::move(row));
  }
  j["groups"] = std::move(groups);
  json curves;
  for (const auto& split : r.splits()) {
    json points = json::array();
    const auto em = degradation_curve(r, split, CurveMetric::em);
    const auto t1 = degradation_curve(r, split, CurveMetric::tol1);
    const auto t5 = degradation_curve(r, split, CurveMetric::tol5);
    for (std::size_t i = 0; i < em.size(); ++i) {
      points.push_back(json{{"severity", em[i].severity}, {"em", em[i].accuracy_pct}, {"tol1", t1[i].accuracy_pct},
                            {"tol5", t5[i].accuracy_pct}});
    }
    curves[split] = std::move(points);
  }
  j["curves"] = curves.is_null() ? json::object() : curves;
  return j;
}

MetricReport report_from_json(const json& j) {
  MetricReport r;
  try {
    r.task = parse_task(j.at("task").get<std::string>());
    r.bucket_count = j.at("bucket_count").get<int>();
    r.em_tolerance = j.at("em_tolerance").get<double>();
    r.tol1_tolerance = j.at("tol1_tolerance").get<double>();
    r.tol5_tolerance = j.at("tol5_tolerance").get<double>();
    for (const auto& row : j.at("groups")) {
      GroupMetrics g;
      g.split = row.at("split").get<std::string>();
      const auto bucket = row.at("bucket").get<std::string>();
      g.bucket = bucket == "all" ? kAllBuckets : std::stoi(bucket);
      g.n = row.at("n").get<std::size_t>();
      g.n_parsed = row.at("n_parsed").get<std::size_t>();
      g.n_exact = row.at("n_exact").get<std::size_t>();
      g.n_tol1 = row.at("n_tol1").get<std::size_t>();
      g.n_tol5 = row.at("n_tol5").get<std::size_t>();
      g.error_sum = row.at("error_sum").get<double>();
      g.exact_match_pct = row.at("exact_match_pct").get<double>();
      g.tol1_pct = row.at("tol1_pct").get<double>();
      g.tol5_pct = row.at("tol5_pct").get<double>();
      g.mae = row.at("mae").get<double>();
      g.parse_failure_pct = row.at("parse_failure_pct").get<double>();
      r.groups.push_back(std::move(g));
    }
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed metric report: ") + e.what());
  }
  return r;
}

std::string report_to_csv(const MetricReport& r) {
  std::ostringstream out;
  out << "split,bucket,n,n_parsed,exact_match_pct,tol1_pct,tol5_pct,mae,parse_failure_pct\n";
  for (const auto& g : r.groups) {
    out << g.split << ',' << bucket_text(g.bucket) << ',' << g.n << ',' << g.n_parsed << ','
        << num(g.exact_match_pct) << ',' << num(g.tol1_pct) << ',' << num(g.tol5_pct) << ',' << num(g.mae) << ','
        << num(g.parse_failure_pct) << '\n';
  }
  return out.str();
}

std::string report_to_svg(const MetricReport& r, CurveMetric metric) {
  constexpr double W = 640, H = 400, left = 60, right = 130, top = 30, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double sev) { return left + sev * pw; };
  auto py = [&](double pct) { return top + (1.0 - pct / 100.0) * ph; };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << to_string(r.task) << " "
    << to_string(metric) << " by severity bucket</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = 25.0 * t;
    s << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(v) + 4, 2) << "\" text-anchor=\"end\" font-size=\"11\">"
      << v << "</text>\n";
    const double sev = 0.25 * t;
    s << "<text x=\"" << fixed(px(sev), 2) << "\" y=\"" << top + ph + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fixed(sev, 2) << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">severity</text>\n";
  s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << top + ph / 2 << ")\">accuracy (%)</text>\n";

  const auto splits = r.splits();
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const char* color = kColors[i % 5];
    const auto curve = degradation_curve(r, splits[i], metric);
    s << "<polyline class=\"curve\" data-split=\"" << splits[i] << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < curve.size(); ++k) {
      s << (k ? " " : "") << fixed(px(curve[k].severity), 2) << ',' << fixed(py(curve[k].accuracy_pct), 2);
    }
    s << "\"/>\n";
    for (const auto& p : curve) {
      s << "<circle class=\"point\" data-split=\"" << splits[i] << "\" cx=\"" << fixed(px(p.severity), 2)
        << "\" cy=\"" << fixed(py(p.accuracy_pct), 2) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 16 + 18.0 * i;
    s << "<text x=\"" << left + pw + 12 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\"" << color << "\">"
      << splits[i] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_report(const MetricReport& report, ReportFormat format, const std::filesystem::path& path,
                 CurveMetric metric) {
  std::string body;
  switch (format) {
    case ReportFormat::json: body = report_to_json(report).dump(2) + "\n"; break;
    case ReportFormat::csv: body = report_to_csv(report); break;
    case ReportFormat::svg: body = report_to_svg(report, metric); break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << body;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace dialkit::eval
