#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dialkit/cli.hpp"
#include "dialkit/dataset.hpp"
#include "dialkit/errors.hpp"
#include "oracles.hpp"

using namespace dialkit;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args, std::string* err_out = nullptr) {
  std::ostringstream err;
  const int code = cli::dispatch(args, err);
  if (err_out) *err_out = err.str();
  return code;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) n += !line.empty();
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  CHECK(cli::parse_config("").empty());
  const auto c = cli::parse_config("# comment\n task = gauge \n\nn=5 # trailing\n");
  REQUIRE(c.size() == 2);
  CHECK(c[0].key == "task");
  CHECK(c[0].value == "gauge");
  CHECK(c[1].line == 4);
  try {
    cli::parse_config("n = 1\nseed = 2\nn = 3\n", "run.cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("run.cfg:3") != std::string::npos);
    CHECK(std::string(e.what()).find("'n'") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::parse_config("just words\n"), ParseError);
}

TEST_CASE("generate writes manifest, images and the resolved config") {
  const auto dir = oracle::scratch_dir("cli_generate");
  std::string err;
  REQUIRE(run({"generate", "--task", "clock", "--split", "combined", "--n", "8", "--buckets", "4", "--seed", "7",
               "--image-size", "64", "--out", (dir / "d").string()},
              &err) == 0);
  const auto m = dataset::read_manifest(dir / "d" / "manifest.jsonl");
  CHECK(m.records.size() == 8);
  CHECK(m.header.master_seed == 7);
  for (const auto& r : m.records) CHECK(fs::exists(dir / "d" / r.image_path));
  const auto resolved = oracle::read_file(dir / "d" / "config.resolved");
  CHECK(resolved.find("seed = 7\n") != std::string::npos);
  CHECK(resolved.find("image-size = 64\n") != std::string::npos);

  // The echoed config reproduces the run on its own.
  std::ofstream(dir / "again.cfg") << resolved;
  REQUIRE(run({"generate", "--config", (dir / "again.cfg").string(), "--out", (dir / "e").string()}) == 0);
  CHECK(oracle::read_file(dir / "e" / "manifest.jsonl") == oracle::read_file(dir / "d" / "manifest.jsonl"));
}

TEST_CASE("flags override config values and unknown keys are rejected") {
  const auto dir = oracle::scratch_dir("cli_config");
  std::ofstream(dir / "run.cfg") << "task = clock\nn = 3\nseed = 1\nimage-size = 48\nmetadata-only = true\n";
  REQUIRE(run({"generate", "--config", (dir / "run.cfg").string(), "--n", "5", "--out", (dir / "o").string()}) == 0);
  CHECK(count_lines(dir / "o" / "manifest.jsonl") == 6);
  CHECK_FALSE(fs::exists(dir / "o" / "images"));
  const auto resolved = oracle::read_file(dir / "o" / "config.resolved");
  CHECK(resolved.find("n = 5\n") != std::string::npos);
  CHECK(resolved.find("seed = 1\n") != std::string::npos);

  std::ofstream(dir / "bad.cfg") << "task = clock\nwidth = 3\n";
  std::string err;
  CHECK(run({"generate", "--config", (dir / "bad.cfg").string(), "--out", (dir / "p").string()}, &err) == 2);
  CHECK(err.find("width") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "p"));

  std::ofstream(dir / "dup.cfg") << "n = 1\nn = 2\n";
  CHECK(run({"generate", "--config", (dir / "dup.cfg").string(), "--out", (dir / "q").string()}, &err) == 2);
  CHECK(err.find("line 1") != std::string::npos);
}

TEST_CASE("usage errors exit 2 without writing") {
  const auto dir = oracle::scratch_dir("cli_usage");
  CHECK(run({"generate", "--bogus", "--out", (dir / "x").string()}) == 2);
  CHECK(run({"generate", "--task", "sundial", "--out", (dir / "x").string()}) == 2);
  CHECK(run({"generate", "--n", "0", "--out", (dir / "x").string()}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({}) == 2);
  CHECK_FALSE(fs::exists(dir / "x"));
  std::string err;
  CHECK(run({"--help"}, &err) == 0);
  CHECK(err.find("generate") != std::string::npos);
}

TEST_CASE("pairs, triplets, sft, evaluate and plot") {
  const auto dir = oracle::scratch_dir("cli_pipeline");
  REQUIRE(run({"pairs", "--kind", "near", "--n", "4", "--image-size", "48", "--out", (dir / "pairs").string()}) == 0);
  CHECK(count_lines(dir / "pairs" / "pairs.jsonl") == 4);
  CHECK(count_lines(dir / "pairs" / "manifest.jsonl") == 9);
  REQUIRE(run({"triplets", "--n", "5", "--metadata-only", "--out", (dir / "trip").string()}) == 0);
  CHECK(count_lines(dir / "trip" / "triplets.jsonl") == 5);

  REQUIRE(run({"sft", "--manifest", (dir / "pairs" / "manifest.jsonl").string(), "--out",
               (dir / "sft.jsonl").string()}) == 0);
  CHECK(count_lines(dir / "sft.jsonl") == 8);
  CHECK(fs::exists(dir / "sft.jsonl.config"));

  const auto m = dataset::read_manifest(dir / "pairs" / "manifest.jsonl");
  {
    std::ofstream p(dir / "pred.jsonl");
    for (const auto& r : m.records) p << nlohmann::json{{"id", r.id}, {"prediction", format_state(r.state)}}.dump() << "\n";
  }
  REQUIRE(run({"evaluate", "--manifest", (dir / "pairs" / "manifest.jsonl").string(), "--predictions",
               (dir / "pred.jsonl").string(), "--out", (dir / "r.json").string()}) == 0);
  const auto report = nlohmann::json::parse(oracle::read_file(dir / "r.json"));
  CHECK(report["groups"].back()["exact_match_pct"] == 100.0);
  REQUIRE(run({"evaluate", "--manifest", (dir / "pairs" / "manifest.jsonl").string(), "--predictions",
               (dir / "pred.jsonl").string(), "--format", "csv", "--out", (dir / "r.csv").string()}) == 0);
  CHECK(oracle::read_file(dir / "r.csv").rfind("split,bucket", 0) == 0);
  REQUIRE(run({"plot", "--report", (dir / "r.json").string(), "--out", (dir / "r.svg").string()}) == 0);
  CHECK(oracle::read_file(dir / "r.svg").find("<svg") == 0);

  std::string err;
  CHECK(run({"evaluate", "--manifest", (dir / "pairs" / "manifest.jsonl").string(), "--predictions",
             (dir / "pred.jsonl").string(), "--out", (dir / "pred.jsonl").string()},
            &err) == 2);
  std::ofstream(dir / "bad_pred.jsonl") << R"({"id":"nope","prediction":"1:00"})" << "\n";
  CHECK(run({"evaluate", "--manifest", (dir / "pairs" / "manifest.jsonl").string(), "--predictions",
             (dir / "bad_pred.jsonl").string(), "--out", (dir / "r2.json").string()},
            &err) == 1);
  CHECK(err.find("nope") != std::string::npos);
}

TEST_CASE("reward subcommand") {
  const auto dir = oracle::scratch_dir("cli_reward");
  {
    std::ofstream in(dir / "in.jsonl");
    in << R"({"id":"a","response_text":"Answer: 3:00","ground_truth_state":"3:00","group_id":1})" << "\n";
    in << R"({"id":"b","response_text":"no idea","ground_truth_state":{"text":"3:00","hour":3,"minute":0},"group_id":1})" << "\n";
    in << R"({"id":"c","response_text":"Answer: 50","ground_truth_state":"50.0"})" << "\n";
  }
  REQUIRE(run({"reward", "--input", (dir / "in.jsonl").string(), "--sigma", "0.05", "--beta", "0.1", "--group-eps",
               "0", "--out", (dir / "out.jsonl").string()}) == 0);
  std::ifstream out(dir / "out.jsonl");
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(out, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["r"] == 1.0);
  CHECK(rows[0]["advantage"] == 1.0);
  CHECK(rows[1]["r_fmt"] == 0);
  CHECK(rows[1]["advantage"] == -1.0);
  CHECK(rows[2]["r_state"] == 1.0);
  CHECK_FALSE(rows[2].contains("advantage"));
}

TEST_CASE("probe subcommand") {
  const auto dir = oracle::scratch_dir("cli_probe");
  REQUIRE(run({"generate", "--n", "12", "--metadata-only", "--out", (dir / "d").string()}) == 0);
  const auto m = dataset::read_manifest(dir / "d" / "manifest.jsonl");
  {
    std::ofstream e(dir / "emb.jsonl");
    for (const auto& r : m.records) {
      const int minutes = clock_state_to_minutes(std::get<ClockState>(r.state));
      e << nlohmann::json{{"id", r.id}, {"vector", {std::cos(minutes * 0.1), std::sin(minutes * 0.1), 1.0}}}.dump()
        << "\n";
    }
  }
  std::string err;
  const int code = run({"probe", "--embeddings", (dir / "emb.jsonl").string(), "--manifest",
                        (dir / "d" / "manifest.jsonl").string(), "--out", (dir / "probe.json").string(), "--coords",
                        (dir / "coords.csv").string()},
                       &err);
  REQUIRE(code == 0);
  const auto j = nlohmann::json::parse(oracle::read_file(dir / "probe.json"));
  CHECK(j["n"] == 12);
  CHECK(j["D"] == 3);
  CHECK(j.contains("silhouette"));
  CHECK(count_lines(dir / "coords.csv") == 13);
}

TEST_CASE("installed binary exit codes") {
  const char* bin = std::getenv("DIALKIT_CLI");
  if (!bin) return;
  const auto dir = oracle::scratch_dir("cli_binary");
  const std::string quiet = " 2>/dev/null";
  auto status = [&](const std::string& args) {
    const int s = std::system((std::string(bin) + " " + args + quiet).c_str());
    return WEXITSTATUS(s);
  };
  CHECK(status("generate --unknown-flag --out " + (dir / "x").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "x"));
  CHECK(status("generate --n 2 --metadata-only --out " + (dir / "y").string()) == 0);
  CHECK(status("sft --manifest " + (dir / "missing.jsonl").string() + " --out " + (dir / "s.jsonl").string()) == 2);
}
