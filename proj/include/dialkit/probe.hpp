#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dialkit/record.hpp"
#include "dialkit/state.hpp"

namespace dialkit::probe {

struct EmbeddingRecord {
  std::string id;
  std::vector<double> vector;
};

// embeddings.jsonl rows: {"id", "vector": [...]}. Rejects non-finite entries,
// duplicate ids (DuplicateId) and inconsistent dimensions (DimensionMismatch).
std::vector<EmbeddingRecord> load_embeddings(const std::filesystem::path& path);

enum class Metric { cosine, euclidean };
Metric parse_metric(std::string_view text);
std::string_view to_string(Metric metric);

// exact: one cluster per state. coarse: 5-minute bins for clocks, one minor
// tick per bin for gauges.
enum class Grouping { exact, coarse };
Grouping parse_grouping(std::string_view text);
std::string_view to_string(Grouping grouping);

// Silhouette of a point alone in its cluster: a = 0, or s = 0.
enum class SingletonConvention { zero_intra, zero_score };
SingletonConvention parse_singleton_convention(std::string_view text);

// Row-major n x dim matrix with one cluster label per row.
struct LabeledEmbeddings {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> data;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<DialState> states;  // group representative per row; may be empty

  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

LabeledEmbeddings make_labeled(const std::vector<std::vector<double>>& vectors, std::vector<std::string> labels);

// Throws UnknownId for ids missing from the manifest.
LabeledEmbeddings attach_labels(std::span<const EmbeddingRecord> dump, std::span<const SampleRecord> manifest,
                                Grouping grouping = Grouping::exact);

DialState group_state(const DialState& state, Grouping grouping);

// Cosine distance against a zero vector is 1.
double distance(std::span<const double> a, std::span<const double> b, Metric metric);

struct RecallResult {
  double pct = 0.0;
  std::size_t queries = 0;
  std::size_t hits = 0;
  std::size_t skipped = 0;  // queries with no same-label partner
};

// Nearest neighbour ties go to the lowest row index.
RecallResult recall_at_1(const LabeledEmbeddings& e, Metric metric = Metric::cosine, int jobs = 1);

// Throws SingleCluster with fewer than two labels.
double silhouette(const LabeledEmbeddings& e, Metric metric = Metric::euclidean,
                  SingletonConvention convention = SingletonConvention::zero_intra, int jobs = 1);

struct Compactness {
  double intra_state_mean_dist = 0.0;
  double neighbor_state_margin = 0.0;
};

// Needs states. The nearest-state group of a state is the set of other groups
// at minimal state distance; tied groups are pooled.
Compactness compactness_separability(const LabeledEmbeddings& e, Metric metric = Metric::euclidean);

struct Projection {
  std::vector<std::string> ids;  // sorted
  std::size_t out_dim = 2;
  std::vector<double> coords;    // row-major ids.size() x out_dim
  std::vector<double> variance;  // per component
  bool degenerate = false;
};

// Mean-centred PCA; each component's largest-magnitude loading is positive.
Projection pca_project(std::span<const EmbeddingRecord> dump, std::size_t out_dim = 2);

struct ProbeOptions {
  Metric retrieval_metric = Metric::cosine;
  Metric cluster_metric = Metric::euclidean;
  Grouping grouping = Grouping::exact;
  SingletonConvention singleton = SingletonConvention::zero_intra;
  int jobs = 1;
};

struct ProbeReport {
  RecallResult recall;
  double silhouette = 0.0;
  Compactness compactness;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t clusters = 0;
  ProbeOptions options;
};

ProbeReport run_probe(std::span<const EmbeddingRecord> dump, std::span<const SampleRecord> manifest,
                      const ProbeOptions& options = {});

nlohmann::ordered_json probe_report_to_json(const ProbeReport& report);
std::string projection_to_csv(const Projection& projection);

}  // namespace dialkit::probe
