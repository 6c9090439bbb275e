#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "dialkit/errors.hpp"
#include "dialkit/probe.hpp"
#include "oracles.hpp"

using namespace dialkit;
using namespace dialkit::probe;

namespace {

std::vector<std::vector<double>> random_points(std::mt19937& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> x(n, std::vector<double>(d));
  for (auto& v : x)
    for (auto& c : v) c = g(rng);
  return x;
}

std::vector<std::string> names(const std::vector<int>& labels) {
  std::vector<std::string> out;
  for (int l : labels) out.push_back("s" + std::to_string(l));
  return out;
}

SampleRecord clock_record(const std::string& id, int minutes) {
  SampleRecord r;
  r.id = id;
  r.task = Task::clock;
  r.state = ClockState::from_minutes(minutes);
  return r;
}

}  // namespace

TEST_CASE("distances") {
  const std::vector<double> a{1, 0}, b{0, 2}, z{0, 0};
  CHECK(distance(a, b, Metric::euclidean) == doctest::Approx(std::sqrt(5.0)));
  CHECK(distance(a, b, Metric::cosine) == doctest::Approx(1.0));
  CHECK(distance(a, a, Metric::cosine) == doctest::Approx(0.0));
  CHECK(distance(a, z, Metric::cosine) == 1.0);
}

TEST_CASE("silhouette hand cases") {
  const auto two = make_labeled({{0, 0}, {0, 0}, {10, 0}, {10, 0}}, names({0, 0, 1, 1}));
  CHECK(std::abs(silhouette(two) - 1.0) < 1e-12);
  const auto single = make_labeled({{0, 0}, {0, 0}, {10, 0}}, names({0, 0, 1}));
  CHECK(std::abs(silhouette(single) - 1.0) < 1e-12);
  CHECK(std::abs(silhouette(single, Metric::euclidean, SingletonConvention::zero_score) - 2.0 / 3.0) < 1e-12);
  CHECK_THROWS_AS(silhouette(make_labeled({{0}, {1}}, names({0, 0}))), SingleCluster);
}

TEST_CASE("silhouette matches the direct formula") {
  std::mt19937 rng(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng() % 60, d = 1 + rng() % 8;
    auto x = random_points(rng, n, d);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng() % 4);
    labels[0] = 0;
    labels[1] = 1;
    const auto e = make_labeled(x, names(labels));
    for (auto [m, dm] : {std::pair{Metric::euclidean, oracle::Dist::euclidean}, {Metric::cosine, oracle::Dist::cosine}}) {
      REQUIRE(std::abs(silhouette(e, m) - oracle::direct_silhouette(x, labels, dm)) < 1e-9);
      REQUIRE(std::abs(silhouette(e, m, SingletonConvention::zero_intra, 4) - silhouette(e, m)) == 0.0);
    }
  }
}

TEST_CASE("recall matches the direct formula and its invariances") {
  std::mt19937 rng(32);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 3 + rng() % 60, d = 2 + rng() % 6;
    auto x = random_points(rng, n, d);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng() % 5);
    const auto e = make_labeled(x, names(labels));
    const auto r = recall_at_1(e, Metric::euclidean);
    REQUIRE(r.pct == doctest::Approx(oracle::direct_recall(x, labels, oracle::Dist::euclidean)));
    REQUIRE(r.queries + r.skipped == n);
    REQUIRE(recall_at_1(e, Metric::cosine).pct == doctest::Approx(oracle::direct_recall(x, labels, oracle::Dist::cosine)));

    auto scaled = x;
    for (auto& v : scaled)
      for (auto& c : v) c *= 3.5;
    REQUIRE(recall_at_1(make_labeled(scaled, names(labels)), Metric::cosine).hits == recall_at_1(e, Metric::cosine).hits);
    // Rotation in the first two coordinates.
    auto rotated = x;
    const double th = 0.7;
    for (auto& v : rotated) {
      const double a = v[0], b = v[1];
      v[0] = std::cos(th) * a - std::sin(th) * b;
      v[1] = std::sin(th) * a + std::cos(th) * b;
    }
    REQUIRE(recall_at_1(make_labeled(rotated, names(labels)), Metric::euclidean).hits == r.hits);
  }
}

TEST_CASE("recall skips queries without a partner") {
  const auto e = make_labeled({{0, 0}, {0, 0.1}, {5, 5}}, names({0, 0, 1}));
  const auto r = recall_at_1(e, Metric::euclidean);
  CHECK(r.queries == 2);
  CHECK(r.skipped == 1);
  CHECK(r.pct == 100.0);
}

TEST_CASE("compactness and nearest-state margin") {
  std::vector<SampleRecord> manifest;
  std::vector<EmbeddingRecord> dump;
  for (int s = 0; s < 4; ++s) {
    for (int k = 0; k < 3; ++k) {
      const std::string id = "r" + std::to_string(s) + std::to_string(k);
      manifest.push_back(clock_record(id, s * 10));
      std::vector<double> v(4, 0.0);
      v[s] = 1.0;
      dump.push_back({id, v});
    }
  }
  const auto e = attach_labels(dump, manifest);
  const auto c = compactness_separability(e);
  CHECK(c.intra_state_mean_dist == 0.0);
  CHECK(c.neighbor_state_margin == doctest::Approx(std::sqrt(2.0)));

  for (auto& d : dump) d.vector = {1, 1, 1, 1};
  const auto same = compactness_separability(attach_labels(dump, manifest));
  CHECK(same.intra_state_mean_dist == 0.0);
  CHECK(same.neighbor_state_margin == 0.0);
}

TEST_CASE("compactness matches a double loop") {
  std::mt19937 rng(33);
  std::vector<SampleRecord> manifest;
  std::vector<EmbeddingRecord> dump;
  const std::vector<int> minutes{0, 3, 7, 8, 30, 715};
  auto x = random_points(rng, 30, 5);
  std::vector<int> state(30);
  for (int i = 0; i < 30; ++i) {
    state[i] = minutes[i % minutes.size()];
    manifest.push_back(clock_record("q" + std::to_string(i), state[i]));
    dump.push_back({"q" + std::to_string(i), x[i]});
  }
  const auto got = compactness_separability(attach_labels(dump, manifest));

  double intra = 0;
  int pairs = 0;
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      if (state[i] == state[j]) {
        intra += oracle::plain_distance(x[i], x[j], oracle::Dist::euclidean);
        ++pairs;
      }
  intra /= pairs;
  double margin = 0;
  for (int s : minutes) {
    int best = 1000;
    for (int o : minutes)
      if (o != s) best = std::min(best, oracle::walk_clock_distance(ClockState::from_minutes(s), ClockState::from_minutes(o)));
    double sum = 0;
    int cnt = 0;
    for (int i = 0; i < 30; ++i) {
      if (state[i] != s) continue;
      for (int j = 0; j < 30; ++j) {
        if (state[j] == s) continue;
        if (oracle::walk_clock_distance(ClockState::from_minutes(s), ClockState::from_minutes(state[j])) != best) continue;
        sum += oracle::plain_distance(x[i], x[j], oracle::Dist::euclidean);
        ++cnt;
      }
    }
    margin += sum / cnt;
  }
  margin = margin / minutes.size() - intra;
  CHECK(got.intra_state_mean_dist == doctest::Approx(intra).epsilon(1e-12));
  CHECK(got.neighbor_state_margin == doctest::Approx(margin).epsilon(1e-12));
}

TEST_CASE("coarse grouping bins clock minutes by five") {
  CHECK(std::get<ClockState>(group_state(ClockState(3, 14), Grouping::coarse)) == ClockState(3, 10));
  const auto cal = default_gauge_calibration();
  CHECK(std::get<GaugeState>(group_state(GaugeState(5.9, cal), Grouping::coarse)).value() == 4.0);
  std::vector<SampleRecord> manifest{clock_record("a", 61), clock_record("b", 64)};
  std::vector<EmbeddingRecord> dump{{"a", {1.0}}, {"b", {2.0}}};
  const auto e = attach_labels(dump, manifest, Grouping::coarse);
  CHECK(e.labels[0] == e.labels[1]);
  dump.push_back({"zzz", {0.0}});
  CHECK_THROWS_AS(attach_labels(dump, manifest), UnknownId);
}

TEST_CASE("pca against an explicit covariance eigensolve") {
  std::mt19937 rng(34);
  auto x = random_points(rng, 10, 5);
  std::vector<EmbeddingRecord> dump;
  for (int i = 0; i < 10; ++i) dump.push_back({"p" + std::to_string(i), x[i]});
  const auto proj = pca_project(dump, 2);
  REQUIRE_FALSE(proj.degenerate);

  std::vector<double> mean(5, 0.0);
  for (auto& v : x)
    for (int c = 0; c < 5; ++c) mean[c] += v[c] / 10;
  std::vector<std::vector<double>> cov(5, std::vector<double>(5, 0.0));
  for (auto& v : x)
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) cov[a][b] += (v[a] - mean[a]) * (v[b] - mean[b]);
  const auto eig = oracle::jacobi_eigen(cov);
  for (int k = 0; k < 2; ++k) {
    auto vec = eig.vectors[k];
    const auto arg = std::max_element(vec.begin(), vec.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*arg < 0)
      for (auto& c : vec) c = -c;
    for (int i = 0; i < 10; ++i) {
      double want = 0;
      for (int c = 0; c < 5; ++c) want += (x[i][c] - mean[c]) * vec[c];
      REQUIRE(proj.coords[i * 2 + k] == doctest::Approx(want).epsilon(1e-6));
    }
    CHECK(proj.variance[k] == doctest::Approx(eig.values[k] / 10).epsilon(1e-9));
  }

  auto shuffled = dump;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(pca_project(shuffled, 2).coords == proj.coords);
}

TEST_CASE("pca edge cases") {
  std::vector<EmbeddingRecord> same{{"a", {1, 2, 3}}, {"b", {1, 2, 3}}, {"c", {1, 2, 3}}};
  const auto p = pca_project(same, 2);
  CHECK(p.degenerate);
  for (double c : p.coords) CHECK(c == 0.0);

  std::vector<EmbeddingRecord> plane{{"a", {0, 0, 0}}, {"b", {1, 0, 0}}, {"c", {0, 2, 0}}, {"d", {3, 1, 0}}};
  const auto q = pca_project(plane, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double want = oracle::plain_distance(plane[i].vector, plane[j].vector, oracle::Dist::euclidean);
      const double got = std::hypot(q.coords[2 * i] - q.coords[2 * j], q.coords[2 * i + 1] - q.coords[2 * j + 1]);
      CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
  CHECK_THROWS_AS(pca_project(std::vector<EmbeddingRecord>{{"a", {1, 2}}}, 2), DomainError);
}

TEST_CASE("embedding loader validation") {
  const auto dir = oracle::scratch_dir("probe_load");
  std::ofstream(dir / "ok.jsonl") << R"({"id":"a","vector":[1,2]})" << "\n" << R"({"id":"b","vector":[3,4]})" << "\n";
  CHECK(load_embeddings(dir / "ok.jsonl").size() == 2);
  std::ofstream(dir / "dim.jsonl") << R"({"id":"a","vector":[1,2]})" << "\n" << R"({"id":"b","vector":[3]})" << "\n";
  CHECK_THROWS_AS(load_embeddings(dir / "dim.jsonl"), DimensionMismatch);
  std::ofstream(dir / "dup.jsonl") << R"({"id":"a","vector":[1]})" << "\n" << R"({"id":"a","vector":[3]})" << "\n";
  CHECK_THROWS_AS(load_embeddings(dir / "dup.jsonl"), DuplicateId);
}
