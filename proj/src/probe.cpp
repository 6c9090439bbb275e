#include "dialkit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "dialkit/compensated_sum.hpp"
#include "dialkit/errors.hpp"
#include "dialkit/kernels.hpp"
#include "dialkit/parallel.hpp"

namespace dialkit::probe {

using json = nlohmann::ordered_json;

std::vector<EmbeddingRecord> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  std::vector<EmbeddingRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    EmbeddingRecord rec;
    try {
      const auto j = json::parse(line);
      rec.id = j.at("id").get<std::string>();
      rec.vector = j.at("vector").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    for (double v : rec.vector) {
      if (!std::isfinite(v)) throw ParseError(where + ": non-finite vector entry");
    }
    if (rec.vector.empty()) throw ParseError(where + ": empty vector");
    if (!out.empty() && rec.vector.size() != out.front().vector.size()) {
      throw DimensionMismatch(where + ": dimension " + std::to_string(rec.vector.size()) + ", expected " +
                              std::to_string(out.front().vector.size()));
    }
    if (!seen.insert(rec.id).second) throw DuplicateId(where + ": duplicate id " + rec.id);
    out.push_back(std::move(rec));
  }
  return out;
}

Metric parse_metric(std::string_view text) {
  if (text == "cosine") return Metric::cosine;
  if (text == "euclidean") return Metric::euclidean;
  throw ConfigError("unknown metric '" + std::string(text) + "' (expected cosine|euclidean)");
}

std::string_view to_string(Metric metric) { return metric == Metric::cosine ? "cosine" : "euclidean"; }

Grouping parse_grouping(std::string_view text) {
  if (text == "exact") return Grouping::exact;
  if (text == "coarse") return Grouping::coarse;
  throw ConfigError("unknown grouping '" + std::string(text) + "' (expected exact|coarse)");
}

std::string_view to_string(Grouping grouping) { return grouping == Grouping::exact ? "exact" : "coarse"; }

SingletonConvention parse_singleton_convention(std::string_view text) {
  if (text == "zero-intra") return SingletonConvention::zero_intra;
  if (text == "zero-score") return SingletonConvention::zero_score;
  throw ConfigError("unknown singleton convention '" + std::string(text) + "' (expected zero-intra|zero-score)");
}

LabeledEmbeddings make_labeled(const std::vector<std::vector<double>>& vectors, std::vector<std::string> labels) {
  if (vectors.size() != labels.size()) throw DimensionMismatch("vector and label counts differ");
  LabeledEmbeddings e;
  e.n = vectors.size();
  e.dim = vectors.empty() ? 0 : vectors.front().size();
  e.data.reserve(e.n * e.dim);
  for (std::size_t i = 0; i < e.n; ++i) {
    if (vectors[i].size() != e.dim) throw DimensionMismatch("inconsistent vector dimension");
    e.data.insert(e.data.end(), vectors[i].begin(), vectors[i].end());
    e.ids.push_back(std::to_string(i));
  }
  e.labels = std::move(labels);
  return e;
}

DialState group_state(const DialState& state, Grouping grouping) {
  if (grouping == Grouping::exact) return state;
  if (const auto* c = std::get_if<ClockState>(&state)) {
    return ClockState::from_minutes(clock_state_to_minutes(*c) / 5 * 5);
  }
  const auto& g = std::get<GaugeState>(state);
  const auto& cal = g.calibration();
  const double step = cal.minor_step();
  const double bin = std::floor((g.value() - cal.value_min) / step + 1e-9);
  const double value = std::min(cal.value_max, cal.value_min + bin * step);
  return GaugeState(quantize_gauge_value(value), cal);
}

LabeledEmbeddings attach_labels(std::span<const EmbeddingRecord> dump, std::span<const SampleRecord> manifest,
                                Grouping grouping) {
  std::unordered_map<std::string_view, const SampleRecord*> by_id;
  by_id.reserve(manifest.size());
  for (const auto& r : manifest) by_id.emplace(r.id, &r);
  LabeledEmbeddings e;
  e.n = dump.size();
  e.dim = dump.empty() ? 0 : dump.front().vector.size();
  e.data.reserve(e.n * e.dim);
  for (const auto& rec : dump) {
    if (rec.vector.size() != e.dim) throw DimensionMismatch("embedding " + rec.id + " has inconsistent dimension");
    const auto it = by_id.find(rec.id);
    if (it == by_id.end()) throw UnknownId("embedding id not in manifest: " + rec.id);
    e.data.insert(e.data.end(), rec.vector.begin(), rec.vector.end());
    e.ids.push_back(rec.id);
    auto state = group_state(it->second->state, grouping);
    e.labels.push_back(state_key(state));
    e.states.push_back(std::move(state));
  }
  return e;
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (metric == Metric::euclidean) return std::sqrt(kernels::squared_l2(a, b));
  const double na = kernels::dot(a, a);
  const double nb = kernels::dot(b, b);
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - kernels::dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

// Dense label ids in first-appearance order plus member lists.
struct Clusters {
  std::vector<std::size_t> of;
  std::vector<std::vector<std::size_t>> members;
};

Clusters cluster(const LabeledEmbeddings& e) {
  Clusters c;
  std::unordered_map<std::string_view, std::size_t> index;
  c.of.resize(e.n);
  for (std::size_t i = 0; i < e.n; ++i) {
    const auto [it, inserted] = index.try_emplace(e.labels[i], c.members.size());
    if (inserted) c.members.emplace_back();
    c.of[i] = it->second;
    c.members[it->second].push_back(i);
  }
  return c;
}

void check(const LabeledEmbeddings& e) {
  if (e.labels.size() != e.n || e.data.size() != e.n * e.dim) throw DimensionMismatch("malformed embedding matrix");
}

// Full distance matrix, filled row-parallel.
std::vector<double> distance_matrix(const LabeledEmbeddings& e, Metric metric, int jobs) {
  std::vector<double> d(e.n * e.n, 0.0);
  parallel_for(e.n, jobs, [&](std::size_t i) {
    for (std::size_t j = 0; j < e.n; ++j) {
      if (j != i) d[i * e.n + j] = distance(e.row(i), e.row(j), metric);
    }
  });
  return d;
}

}  // namespace

RecallResult recall_at_1(const LabeledEmbeddings& e, Metric metric, int jobs) {
  check(e);
  if (e.n < 2) throw DomainError("recall@1 needs at least two embeddings");
  const auto c = cluster(e);
  std::vector<signed char> outcome(e.n, -1);
  parallel_for(e.n, jobs, [&](std::size_t i) {
    if (c.members[c.of[i]].size() < 2) return;
    std::size_t best = e.n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < e.n; ++j) {
      if (j == i) continue;
      const double d = distance(e.row(i), e.row(j), metric);
      if (d < best_d || best == e.n) {
        best_d = d;
        best = j;
      }
    }
    outcome[i] = c.of[best] == c.of[i] ? 1 : 0;
  });
  RecallResult r;
  for (signed char o : outcome) {
    if (o < 0) {
      ++r.skipped;
    } else {
      ++r.queries;
      r.hits += static_cast<std::size_t>(o);
    }
  }
  r.pct = r.queries ? 100.0 * static_cast<double>(r.hits) / static_cast<double>(r.queries) : 0.0;
  return r;
}

double silhouette(const LabeledEmbeddings& e, Metric metric, SingletonConvention convention, int jobs) {
  check(e);
  const auto c = cluster(e);
  if (c.members.size() < 2) throw SingleCluster("silhouette needs at least two distinct states");
  const std::size_t k = c.members.size();
  std::vector<double> score(e.n, 0.0);
  parallel_for(e.n, jobs, [&](std::size_t i) {
    std::vector<CompensatedSum> sums(k);
    for (std::size_t j = 0; j < e.n; ++j) {
      if (j != i) sums[c.of[j]].add(distance(e.row(i), e.row(j), metric));
    }
    const std::size_t own = c.of[i];
    const std::size_t own_size = c.members[own].size();
    if (own_size == 1 && convention == SingletonConvention::zero_score) return;
    const double a = own_size > 1 ? sums[own].value() / static_cast<double>(own_size - 1) : 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < k; ++g) {
      if (g != own) b = std::min(b, sums[g].value() / static_cast<double>(c.members[g].size()));
    }
    const double denom = std::max(a, b);
    score[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });
  CompensatedSum total;
  for (double s : score) total.add(s);
  return total.value() / static_cast<double>(e.n);
}

Compactness compactness_separability(const LabeledEmbeddings& e, Metric metric) {
  check(e);
  if (e.states.size() != e.n) throw DomainError("compactness needs a state per embedding");
  const auto c = cluster(e);
  const std::size_t k = c.members.size();
  if (k < 2) throw SingleCluster("compactness needs at least two distinct states");
  const auto d = distance_matrix(e, metric, 1);
  auto at = [&](std::size_t i, std::size_t j) { return d[i * e.n + j]; };

  CompensatedSum intra;
  std::size_t intra_pairs = 0;
  for (const auto& m : c.members) {
    for (std::size_t x = 0; x < m.size(); ++x) {
      for (std::size_t y = x + 1; y < m.size(); ++y) {
        intra.add(at(m[x], m[y]));
        ++intra_pairs;
      }
    }
  }
  Compactness out;
  out.intra_state_mean_dist = intra_pairs ? intra.value() / static_cast<double>(intra_pairs) : 0.0;

  CompensatedSum nearest_sum;
  for (std::size_t g = 0; g < k; ++g) {
    const DialState& sg = e.states[c.members[g].front()];
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> tied;
    for (std::size_t h = 0; h < k; ++h) {
      if (h == g) continue;
      const double sd = state_distance_normalized(sg, e.states[c.members[h].front()]);
      if (sd < best) {
        best = sd;
        tied.assign(1, h);
      } else if (sd == best) {
        tied.push_back(h);
      }
    }
    CompensatedSum cross;
    std::size_t pairs = 0;
    for (std::size_t x : c.members[g]) {
      for (std::size_t h : tied) {
        for (std::size_t y : c.members[h]) {
          cross.add(at(x, y));
          ++pairs;
        }
      }
    }
    nearest_sum.add(cross.value() / static_cast<double>(pairs));
  }
  out.neighbor_state_margin = nearest_sum.value() / static_cast<double>(k) - out.intra_state_mean_dist;
  return out;
}

Projection pca_project(std::span<const EmbeddingRecord> dump, std::size_t out_dim) {
  if (out_dim == 0) throw DomainError("pca output dimension must be positive");
  if (dump.size() < out_dim) throw DomainError("pca needs at least out_dim embeddings");
  const std::size_t dim = dump.front().vector.size();
  if (dim < out_dim) throw DomainError("pca output dimension exceeds embedding dimension");

  std::vector<std::size_t> order(dump.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dump[a].id < dump[b].id; });

  const auto n = static_cast<Eigen::Index>(dump.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim));
  Projection p;
  p.out_dim = out_dim;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = dump[order[static_cast<std::size_t>(r)]];
    if (rec.vector.size() != dim) throw DimensionMismatch("embedding " + rec.id + " has inconsistent dimension");
    p.ids.push_back(rec.id);
    for (std::size_t c = 0; c < dim; ++c) x(r, static_cast<Eigen::Index>(c)) = rec.vector[c];
  }
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  x.rowwise() -= x.colwise().mean();
  p.coords.assign(dump.size() * out_dim, 0.0);
  p.variance.assign(out_dim, 0.0);
  if (x.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    p.degenerate = true;
    return p;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  Eigen::MatrixXd v = svd.matrixV().leftCols(static_cast<Eigen::Index>(out_dim));
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < v.rows(); ++r) {
      if (std::abs(v(r, c)) > std::abs(v(arg, c))) arg = r;
    }
    if (v(arg, c) < 0.0) v.col(c) *= -1.0;
    const double s = svd.singularValues()(c);
    p.variance[static_cast<std::size_t>(c)] = s * s / static_cast<double>(n);
  }
  const Eigen::MatrixXd y = x * v;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < y.cols(); ++c) p.coords[static_cast<std::size_t>(r) * out_dim + c] = y(r, c);
  }
  return p;
}

ProbeReport run_probe(std::span<const EmbeddingRecord> dump, std::span<const SampleRecord> manifest,
                      const ProbeOptions& options) {
  const auto e = attach_labels(dump, manifest, options.grouping);
  ProbeReport r;
  r.options = options;
  r.n = e.n;
  r.dim = e.dim;
  r.clusters = cluster(e).members.size();
  r.recall = recall_at_1(e, options.retrieval_metric, options.jobs);
  r.silhouette = silhouette(e, options.cluster_metric, options.singleton, options.jobs);
  r.compactness = compactness_separability(e, options.cluster_metric);
  return r;
}

json probe_report_to_json(const ProbeReport& r) {
  json j;
  j["recall_at_1_pct"] = r.recall.pct;
  j["recall_queries"] = r.recall.queries;
  j["recall_hits"] = r.recall.hits;
  j["recall_skipped"] = r.recall.skipped;
  j["silhouette"] = r.silhouette;
  j["intra_state_mean_dist"] = r.compactness.intra_state_mean_dist;
  j["neighbor_state_margin"] = r.compactness.neighbor_state_margin;
  j["n"] = r.n;
  j["D"] = r.dim;
  j["clusters"] = r.clusters;
  j["retrieval_metric"] = to_string(r.options.retrieval_metric);
  j["cluster_metric"] = to_string(r.options.cluster_metric);
  j["grouping"] = to_string(r.options.grouping);
  j["singleton_convention"] = r.options.singleton == SingletonConvention::zero_intra ? "zero-intra" : "zero-score";
  return j;
}

std::string projection_to_csv(const Projection& p) {
  std::ostringstream out;
  out << "id";
  for (std::size_t c = 0; c < p.out_dim; ++c) out << ",pc" << c + 1;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < p.ids.size(); ++r) {
    out << p.ids[r];
    for (std::size_t c = 0; c < p.out_dim; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", p.coords[r * p.out_dim + c]);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace dialkit::probe
