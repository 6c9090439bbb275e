#include "dialkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dialkit/align.hpp"
#include "dialkit/dataset.hpp"
#include "dialkit/errors.hpp"
#include "dialkit/eval.hpp"
#include "dialkit/probe.hpp"
#include "dialkit/rng.hpp"

namespace dialkit::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig out;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    ConfigEntry entry{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
                      line_no};
    if (entry.key.empty()) throw ParseError(where + ": empty key");
    if (entry.key.find_first_of(" \t") != std::string::npos) throw ParseError(where + ": malformed key");
    const auto [it, inserted] = seen.emplace(entry.key, line_no);
    if (!inserted) {
      throw ParseError(where + ": duplicate key '" + entry.key + "' (first set on line " +
                       std::to_string(it->second) + ")");
    }
    out.push_back(std::move(entry));
  }
  return out;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

namespace {

std::string fmt(const std::string& v) { return v; }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Tracks every option a subcommand exposes so the resolved values can be
// echoed back as a loadable config.
class Registry {
 public:
  template <class T>
  CLI::Option* option(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    fields_[app].push_back({name, [&var] { return fmt(var); }});
    return app->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
    fields_[app].push_back({name, [&var] { return fmt(var); }});
    return app->add_flag("--" + name, var, help);
  }

  std::string echo(CLI::App* app) const {
    std::string out = "# resolved " + app->get_name() + " config\n";
    for (const auto& f : fields_.at(app)) out += f.name + " = " + f.value() + "\n";
    return out;
  }

 private:
  struct Field {
    std::string name;
    std::function<std::string()> value;
  };
  std::map<const CLI::App*, std::vector<Field>> fields_;
};

class Log {
 public:
  Log(std::ostream& err, const std::string& level) : err_(err), level_(level == "quiet" ? 0 : level == "debug" ? 2 : 1) {}
  void warn(const std::string& msg) const { err_ << "warning: " << msg << '\n'; }
  void info(const std::string& msg) const {
    if (level_ >= 1) err_ << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= 2) err_ << "debug: " << msg << '\n';
  }

 private:
  std::ostream& err_;
  int level_;
};

struct Common {
  std::string config;
  std::string out;
  int jobs = 1;
  std::string log_level = "info";
  bool verbose = false;
  bool quiet = false;
};

struct GaugeArgs {
  std::string id = "default";
  double min = 0.0;
  double max = 100.0;
  double angle_start = 180.0;
  double angle_end = 0.0;
  int major_ticks = 10;
  int minor_per_major = 4;

  GaugeCalibration calibration() const {
    GaugeCalibration c{id, min, max, angle_start, angle_end, major_ticks, minor_per_major};
    try {
      c.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("gauge calibration: ") + e.what());
    }
    return c;
  }
};

struct SynthArgs {
  std::string task = "clock";
  int n = 100;
  int buckets = 4;
  std::uint64_t seed = 0;
  int style_pool = 8;
  int image_size = 448;
  bool metadata_only = false;
  GaugeArgs gauge;
};

struct Params {
  Common generate_c, pairs_c, triplets_c, sft_c, reward_c, evaluate_c, probe_c, plot_c;
  SynthArgs generate, pairs, triplets;
  std::string splits = "combined";
  bool unique_states = false;
  std::string pair_kind = "same";
  std::string pair_split = "combined";
  double pair_delta = 0.0;
  std::string triplet_split = "combined";
  double gap_min = 0.05, gap_max = 1.0, margin_min = 0.2, margin_max = 1.0, gap_cap = 0.5;
  std::string sft_manifest;
  std::string reward_input;
  double sigma = 0.05, beta = 0.1, group_eps = 1e-8;
  std::string eval_manifest, eval_predictions, eval_format = "json", eval_metric = "em",
                             gauge_em_tolerance = "auto";
  std::string probe_embeddings, probe_manifest, probe_coords, retrieval_metric = "cosine",
                                                              cluster_metric = "euclidean", grouping = "exact",
                                                              singleton = "zero-intra";
  std::string plot_report, plot_metric = "em";
};

struct Command {
  CLI::App* app;
  Common* common;
  bool out_is_dir;
  std::function<void(const Log&)> run;
};

void add_common(Registry& reg, CLI::App* app, Common& c, bool out_is_dir) {
  app->add_option("--config", c.config, "key = value config file; flags override it")->check(CLI::ExistingFile);
  reg.option(app, "out", c.out, out_is_dir ? "output directory" : "output file")->required();
  reg.option(app, "jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  reg.option(app, "log-level", c.log_level, "quiet|info|debug")->check(CLI::IsMember({"quiet", "info", "debug"}));
  app->add_flag("-v,--verbose", c.verbose, "same as --log-level debug");
  app->add_flag("-q,--quiet", c.quiet, "same as --log-level quiet");
}

void add_synth(Registry& reg, CLI::App* app, SynthArgs& s) {
  reg.option(app, "task", s.task, "clock|gauge")->check(CLI::IsMember({"clock", "gauge"}));
  reg.option(app, "n", s.n, "number of samples")->check(CLI::NonNegativeNumber);
  reg.option(app, "buckets", s.buckets, "severity buckets");
  reg.option(app, "seed", s.seed, "master seed");
  reg.option(app, "style-pool", s.style_pool, "number of seeded styles (0 = default style only)");
  reg.option(app, "image-size", s.image_size, "image side in pixels");
  reg.flag(app, "metadata-only", s.metadata_only, "write metadata without rendering images");
  reg.option(app, "gauge-id", s.gauge.id, "gauge calibration id");
  reg.option(app, "gauge-min", s.gauge.min, "gauge range start");
  reg.option(app, "gauge-max", s.gauge.max, "gauge range end");
  reg.option(app, "gauge-angle-start", s.gauge.angle_start, "angle of the range start (deg, ccw from 3 o'clock)");
  reg.option(app, "gauge-angle-end", s.gauge.angle_end, "angle of the range end");
  reg.option(app, "gauge-major-ticks", s.gauge.major_ticks, "major tick intervals");
  reg.option(app, "gauge-minor-per-major", s.gauge.minor_per_major, "minor ticks between majors");
}

std::vector<Split> parse_split_list(const std::string& text) {
  if (text == "all") return {Split::clean, Split::view, Split::illum, Split::combined};
  std::vector<Split> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto split = parse_split(trim(item));
    for (auto s : out) {
      if (s == split) throw ConfigError("split listed twice: " + trim(item));
    }
    out.push_back(split);
  }
  if (out.empty()) throw ConfigError("no splits given");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_dir(const fs::path& dir) {
  if (fs::exists(dir) && !fs::is_directory(dir)) throw IoError(dir.string() + " exists and is not a directory");
  fs::create_directories(dir);
}

void ensure_distinct(const std::string& out, std::initializer_list<std::string> inputs) {
  const auto o = fs::weakly_canonical(out);
  for (const auto& in : inputs) {
    if (!in.empty() && fs::weakly_canonical(in) == o) throw ConfigError("output would overwrite input " + in);
  }
}

dataset::PairOptions pair_options(const SynthArgs& s, const std::string& split) {
  dataset::PairOptions po;
  po.split = parse_split(split);
  po.bucket_count = s.buckets;
  po.image_size = s.image_size;
  po.style_pool = s.style_pool;
  if (po.bucket_count < 1) throw ConfigError("buckets must be >= 1");
  if (po.style_pool < 0) throw ConfigError("style-pool must be >= 0");
  if (po.image_size < 32) throw ConfigError("image-size must be >= 32");
  return po;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

DialState ground_truth(const json& row) {
  const auto& gt = row.at("ground_truth_state");
  GaugeCalibration cal = default_gauge_calibration();
  if (const auto it = row.find("calibration"); it != row.end() && !it->is_null()) cal = calibration_from_json(*it);
  if (gt.is_string()) {
    const auto text = gt.get<std::string>();
    if (text.find(':') != std::string::npos) return parse_clock_text(text);
    double value = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || p != text.data() + text.size()) throw ParseError("unreadable ground truth '" + text + "'");
    return GaugeState(quantize_gauge_value(value), cal);
  }
  if (gt.is_object()) {
    if (gt.contains("hour")) return state_from_json(gt, Task::clock, nullptr);
    return state_from_json(gt, Task::gauge, &cal);
  }
  throw ParseError("ground_truth_state must be a string or a state object");
}

void run_reward(const Params& p, const Log& log) {
  align::RewardConfig rc{p.sigma, p.beta, p.group_eps};
  try {
    rc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  std::ifstream in(p.reward_input, std::ios::binary);
  if (!in) throw IoError("cannot open reward input " + p.reward_input);
  std::vector<json> rows;
  std::vector<std::string> group_of;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = p.reward_input + ":" + std::to_string(line_no);
    json out;
    try {
      const auto row = json::parse(line);
      const auto truth = ground_truth(row);
      const auto b = align::score_response(row.at("response_text").get<std::string>(), truth, rc);
      out["id"] = row.at("id");
      out["r_state"] = b.r_state;
      out["r_fmt"] = b.r_fmt;
      out["r"] = b.r;
      if (const auto it = row.find("group_id"); it != row.end() && !it->is_null()) {
        const std::string key = it->dump();
        out["group_id"] = *it;
        groups[key].push_back(rows.size());
      }
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
    rows.push_back(std::move(out));
  }
  for (const auto& [key, members] : groups) {
    std::vector<double> r;
    for (auto i : members) r.push_back(rows[i]["r"].get<double>());
    const auto adv = align::group_normalize(r, rc.group_eps);
    for (std::size_t k = 0; k < members.size(); ++k) rows[members[k]]["advantage"] = adv[k];
  }
  dataset::write_jsonl(p.reward_c.out, rows);
  log.info("reward: scored " + std::to_string(rows.size()) + " responses in " + std::to_string(groups.size()) +
           " groups");
}

void run_generate(const Params& p, const Log& log) {
  const auto& s = p.generate;
  dataset::BenchmarkConfig cfg;
  cfg.task = parse_task(s.task);
  for (auto split : parse_split_list(p.splits)) cfg.counts.push_back({split, s.n});
  cfg.bucket_count = s.buckets;
  cfg.master_seed = s.seed;
  cfg.style_pool = s.style_pool;
  cfg.image_size = s.image_size;
  cfg.unique_states = p.unique_states;
  cfg.calibration = s.gauge.calibration();
  cfg.jobs = p.generate_c.jobs;
  cfg.validate();
  const fs::path out = p.generate_c.out;
  prepare_dir(out);
  std::size_t rows = 0;
  if (s.metadata_only) {
    const auto records = dataset::plan_benchmark(cfg);
    dataset::write_manifest(out / "manifest.jsonl", {"benchmark", cfg.task, cfg.bucket_count, cfg.master_seed},
                            records);
    rows = records.size();
  } else {
    rows = dataset::generate_benchmark(cfg, out).records.size();
  }
  log.info("generate: wrote " + std::to_string(rows) + " samples to " + out.string());
}

void run_pairs(const Params& p, const Log& log) {
  const auto& s = p.pairs;
  const Task task = parse_task(s.task);
  const auto cal = s.gauge.calibration();
  const auto po = pair_options(s, p.pair_split);
  if (p.pair_kind != "same" && p.pair_kind != "near") throw ConfigError("kind must be same|near");
  const double delta = p.pair_delta != 0.0 ? p.pair_delta : dataset::default_neighbor_delta(task, cal);
  std::vector<SampleRecord> records;
  std::vector<json> rows;
  for (int i = 0; i < s.n; ++i) {
    const auto index = static_cast<std::uint64_t>(i);
    const auto state = dataset::random_state(task, cal, derive_seed(s.seed, index, SeedRole::state));
    auto pair = p.pair_kind == "same" ? dataset::sample_same_state_pair(state, s.seed, index, po)
                                      : dataset::sample_neighbor_pair(state, delta, s.seed, index, po);
    const auto& id = pair.first.id;
    json row;
    row["pair_id"] = id.substr(0, id.rfind('-'));
    row["kind"] = p.pair_kind;
    row["first_id"] = pair.first.id;
    row["second_id"] = pair.second.id;
    row["state_gap_norm"] = state_distance_normalized(pair.first.state, pair.second.state);
    rows.push_back(std::move(row));
    records.push_back(std::move(pair.first));
    records.push_back(std::move(pair.second));
  }
  const fs::path out = p.pairs_c.out;
  prepare_dir(out);
  if (!s.metadata_only) dataset::render_images(records, out, p.pairs_c.jobs);
  dataset::write_manifest(out / "manifest.jsonl", {"pairs", task, po.bucket_count, s.seed}, records);
  dataset::write_jsonl(out / "pairs.jsonl", rows);
  log.info("pairs: wrote " + std::to_string(rows.size()) + " " + p.pair_kind + "-state pairs to " + out.string());
}

void run_triplets(const Params& p, const Log& log) {
  const auto& s = p.triplets;
  dataset::TripletConfig tc;
  tc.task = parse_task(s.task);
  tc.gap_min = p.gap_min;
  tc.gap_max = p.gap_max;
  tc.schedule = {p.margin_min, p.margin_max, p.gap_cap};
  tc.pair = pair_options(s, p.triplet_split);
  tc.calibration = s.gauge.calibration();
  try {
    tc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  std::vector<SampleRecord> records;
  std::vector<json> rows;
  for (int i = 0; i < s.n; ++i) {
    auto t = dataset::sample_triplet(s.seed, static_cast<std::uint64_t>(i), tc);
    rows.push_back(dataset::triplet_to_json(t.triplet));
    records.push_back(std::move(t.anchor));
    records.push_back(std::move(t.positive));
    records.push_back(std::move(t.negative));
  }
  const fs::path out = p.triplets_c.out;
  prepare_dir(out);
  if (!s.metadata_only) dataset::render_images(records, out, p.triplets_c.jobs);
  dataset::write_manifest(out / "manifest.jsonl", {"triplets", tc.task, tc.pair.bucket_count, s.seed}, records);
  dataset::write_jsonl(out / "triplets.jsonl", rows);
  log.info("triplets: wrote " + std::to_string(rows.size()) + " triplets to " + out.string());
}

void run_sft(const Params& p, const Log& log) {
  ensure_distinct(p.sft_c.out, {p.sft_manifest});
  dataset::ManifestReader reader(p.sft_manifest);
  std::vector<json> rows;
  while (auto r = reader.next()) rows.push_back(dataset::sft_to_json(dataset::sft_target(*r), *r));
  dataset::write_jsonl(p.sft_c.out, rows);
  log.info("sft: wrote " + std::to_string(rows.size()) + " targets to " + p.sft_c.out);
}

void run_evaluate(const Params& p, const Log& log) {
  ensure_distinct(p.evaluate_c.out, {p.eval_manifest, p.eval_predictions});
  const auto format = eval::parse_report_format(p.eval_format);
  const auto metric = eval::parse_curve_metric(p.eval_metric);
  eval::EvalOptions opts;
  if (p.gauge_em_tolerance != "auto") {
    try {
      opts.gauge_em_tolerance = std::stod(p.gauge_em_tolerance);
    } catch (const std::exception&) {
      throw ConfigError("gauge-em-tolerance must be a number or 'auto'");
    }
    if (!(*opts.gauge_em_tolerance >= 0.0)) throw ConfigError("gauge-em-tolerance must be >= 0");
  }
  const auto manifest = dataset::read_manifest(p.eval_manifest);
  const auto predictions = eval::read_predictions(p.eval_predictions);
  const auto report = eval::evaluate(manifest.records, predictions, manifest.header.bucket_count, opts);
  eval::emit_report(report, format, p.evaluate_c.out, metric);
  if (const auto* all = report.find(eval::kAllSplits, eval::kAllBuckets)) {
    log.info("evaluate: n=" + std::to_string(all->n) + " EM=" + pct(all->exact_match_pct) + "% Tol-1=" +
             pct(all->tol1_pct) + "% Tol-5=" + pct(all->tol5_pct) + "% MAE=" + fmt(all->mae) +
             " parse-fail=" + pct(all->parse_failure_pct) + "%");
  }
}

void run_probe(const Params& p, const Log& log) {
  ensure_distinct(p.probe_c.out, {p.probe_embeddings, p.probe_manifest});
  if (!p.probe_coords.empty()) ensure_distinct(p.probe_coords, {p.probe_embeddings, p.probe_manifest, p.probe_c.out});
  probe::ProbeOptions opts;
  opts.retrieval_metric = probe::parse_metric(p.retrieval_metric);
  opts.cluster_metric = probe::parse_metric(p.cluster_metric);
  opts.grouping = probe::parse_grouping(p.grouping);
  opts.singleton = probe::parse_singleton_convention(p.singleton);
  opts.jobs = p.probe_c.jobs;
  const auto dump = probe::load_embeddings(p.probe_embeddings);
  const auto manifest = dataset::read_manifest(p.probe_manifest);
  const auto report = probe::run_probe(dump, manifest.records, opts);
  auto j = probe::probe_report_to_json(report);
  if (!p.probe_coords.empty()) {
    const auto proj = probe::pca_project(dump, 2);
    if (proj.degenerate) log.warn("embeddings have zero variance; projection is all zeros");
    j["pca_degenerate"] = proj.degenerate;
    write_text(p.probe_coords, probe::projection_to_csv(proj));
  }
  if (report.recall.skipped) {
    log.warn(std::to_string(report.recall.skipped) + " queries skipped (no same-state partner)");
  }
  write_text(p.probe_c.out, j.dump(2) + "\n");
  log.info("probe: n=" + std::to_string(report.n) + " D=" + std::to_string(report.dim) +
           " recall@1=" + pct(report.recall.pct) + "% silhouette=" + fmt(report.silhouette));
}

void run_plot(const Params& p, const Log& log) {
  ensure_distinct(p.plot_c.out, {p.plot_report});
  const auto metric = eval::parse_curve_metric(p.plot_metric);
  std::ifstream in(p.plot_report, std::ios::binary);
  if (!in) throw IoError("cannot open report " + p.plot_report);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(p.plot_report + ": " + e.what());
  }
  const auto report = eval::report_from_json(j);
  write_text(p.plot_c.out, eval::report_to_svg(report, metric));
  log.info("plot: wrote " + p.plot_c.out);
}

struct Cli {
  CLI::App app{"Synthetic dial-reading toolkit: data generation, alignment targets, evaluation and probing",
               "dialkit"};
  Params p;
  Registry reg;
  std::vector<Command> commands;

  Cli() {
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    auto* gen = app.add_subcommand("generate", "render a benchmark split set with its manifest");
    add_common(reg, gen, p.generate_c, true);
    add_synth(reg, gen, p.generate);
    reg.option(gen, "split", p.splits, "comma-separated splits (clean,view,illum,combined) or 'all'");
    reg.flag(gen, "unique-states", p.unique_states, "clock states at most once per split");
    commands.push_back({gen, &p.generate_c, true, [this](const Log& l) { run_generate(p, l); }});

    auto* pairs = app.add_subcommand("pairs", "same-state or neighbouring-state image pairs");
    add_common(reg, pairs, p.pairs_c, true);
    add_synth(reg, pairs, p.pairs);
    reg.option(pairs, "kind", p.pair_kind, "same|near")->check(CLI::IsMember({"same", "near"}));
    reg.option(pairs, "split", p.pair_split, "appearance split");
    reg.option(pairs, "delta", p.pair_delta, "neighbour offset (0 = one minute / one minor tick)");
    commands.push_back({pairs, &p.pairs_c, true, [this](const Log& l) { run_pairs(p, l); }});

    auto* trip = app.add_subcommand("triplets", "margin-annotated anchor/positive/negative triplets");
    add_common(reg, trip, p.triplets_c, true);
    add_synth(reg, trip, p.triplets);
    reg.option(trip, "split", p.triplet_split, "appearance split");
    reg.option(trip, "gap-min", p.gap_min, "smallest negative state gap (normalized)");
    reg.option(trip, "gap-max", p.gap_max, "largest negative state gap (normalized)");
    reg.option(trip, "margin-min", p.margin_min, "margin at zero gap");
    reg.option(trip, "margin-max", p.margin_max, "margin at the gap cap");
    reg.option(trip, "gap-cap", p.gap_cap, "gap at which the margin saturates");
    commands.push_back({trip, &p.triplets_c, true, [this](const Log& l) { run_triplets(p, l); }});

    auto* sft = app.add_subcommand("sft", "grounded observation-to-state targets for a manifest");
    add_common(reg, sft, p.sft_c, false);
    reg.option(sft, "manifest", p.sft_manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
    commands.push_back({sft, &p.sft_c, false, [this](const Log& l) { run_sft(p, l); }});

    auto* reward = app.add_subcommand("reward", "state-aware rewards and group advantages for responses");
    add_common(reg, reward, p.reward_c, false);
    reg.option(reward, "input", p.reward_input, "JSONL of {id, response_text, ground_truth_state[, group_id]}")
        ->required()
        ->check(CLI::ExistingFile);
    reg.option(reward, "sigma", p.sigma, "state reward width (normalized distance)");
    reg.option(reward, "beta", p.beta, "format reward weight");
    reg.option(reward, "group-eps", p.group_eps, "group normalization epsilon");
    commands.push_back({reward, &p.reward_c, false, [this](const Log& l) { run_reward(p, l); }});

    auto* ev = app.add_subcommand("evaluate", "score predictions against a manifest");
    add_common(reg, ev, p.evaluate_c, false);
    reg.option(ev, "manifest", p.eval_manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
    reg.option(ev, "predictions", p.eval_predictions, "JSONL of {id, prediction}")
        ->required()
        ->check(CLI::ExistingFile);
    reg.option(ev, "format", p.eval_format, "json|csv|svg")->check(CLI::IsMember({"json", "csv", "svg"}));
    reg.option(ev, "tolerance-metric", p.eval_metric, "curve metric for svg: em|tol1|tol5")
        ->check(CLI::IsMember({"em", "tol1", "tol5"}));
    reg.option(ev, "gauge-em-tolerance", p.gauge_em_tolerance, "normalized gauge exact-match tolerance or 'auto'");
    commands.push_back({ev, &p.evaluate_c, false, [this](const Log& l) { run_evaluate(p, l); }});

    auto* pr = app.add_subcommand("probe", "retrieval and clustering diagnostics for an embedding dump");
    add_common(reg, pr, p.probe_c, false);
    reg.option(pr, "embeddings", p.probe_embeddings, "JSONL of {id, vector}")->required()->check(CLI::ExistingFile);
    reg.option(pr, "manifest", p.probe_manifest, "manifest.jsonl")->required()->check(CLI::ExistingFile);
    reg.option(pr, "coords", p.probe_coords, "optional CSV of 2-D PCA coordinates");
    reg.option(pr, "retrieval-metric", p.retrieval_metric, "cosine|euclidean")
        ->check(CLI::IsMember({"cosine", "euclidean"}));
    reg.option(pr, "cluster-metric", p.cluster_metric, "cosine|euclidean")
        ->check(CLI::IsMember({"cosine", "euclidean"}));
    reg.option(pr, "grouping", p.grouping, "exact|coarse")->check(CLI::IsMember({"exact", "coarse"}));
    reg.option(pr, "singleton", p.singleton, "zero-intra|zero-score")
        ->check(CLI::IsMember({"zero-intra", "zero-score"}));
    commands.push_back({pr, &p.probe_c, false, [this](const Log& l) { run_probe(p, l); }});

    auto* plot = app.add_subcommand("plot", "degradation curve SVG from a JSON metric report");
    add_common(reg, plot, p.plot_c, false);
    reg.option(plot, "report", p.plot_report, "report.json from evaluate")->required()->check(CLI::ExistingFile);
    reg.option(plot, "metric", p.plot_metric, "em|tol1|tol5")->check(CLI::IsMember({"em", "tol1", "tol5"}));
    commands.push_back({plot, &p.plot_c, false, [this](const Log& l) { run_plot(p, l); }});
  }

  const Command* selected() const {
    for (const auto& c : commands) {
      if (c.app->parsed()) return &c;
    }
    return nullptr;
  }
};

// Parse errors and --help; returns nullopt when parsing succeeded.
std::optional<int> parse(Cli& cli, std::vector<std::string> args, std::ostream& err) {
  std::reverse(args.begin(), args.end());
  try {
    cli.app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = cli.app.exit(e, err, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return std::nullopt;
}

int run(const std::vector<std::string>& args, std::ostream& err) {
  auto first = std::make_unique<Cli>();
  if (auto code = parse(*first, args, err)) return *code;
  const Command* cmd = first->selected();

  std::unique_ptr<Cli> cli = std::move(first);
  if (!cmd->common->config.empty()) {
    RunConfig config;
    try {
      config = load_config(cmd->common->config);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    std::vector<std::string> extra;
    for (const auto& entry : config) {
      const auto* opt = entry.key == "config" ? nullptr : cmd->app->get_option_no_throw("--" + entry.key);
      if (!opt) {
        err << "error: " << cmd->common->config << ":" << entry.line << ": unknown key '" << entry.key << "' for "
            << cmd->app->get_name() << '\n';
        return kExitUsage;
      }
      if (opt->count() == 0) extra.push_back("--" + entry.key + "=" + entry.value);
    }
    std::vector<std::string> merged = args;
    const auto pos = std::find(merged.begin(), merged.end(), cmd->app->get_name());
    merged.insert(pos + 1, extra.begin(), extra.end());
    cli = std::make_unique<Cli>();
    if (auto code = parse(*cli, merged, err)) return *code;
    cmd = cli->selected();
  }

  Common& common = *cmd->common;
  if (common.verbose) common.log_level = "debug";
  if (common.quiet) common.log_level = "quiet";
  const Log log(err, common.log_level);
  const std::string resolved = cli->reg.echo(cmd->app);
  log.debug("resolved config:\n" + resolved);
  try {
    cmd->run(log);
    const fs::path echo = cmd->out_is_dir ? fs::path(common.out) / "config.resolved" : fs::path(common.out + ".config");
    write_text(echo, resolved);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& err) { return run(args, err); }

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cerr);
}

}  // namespace dialkit::cli
