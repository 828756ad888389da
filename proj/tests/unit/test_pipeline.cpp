#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "loadshape/analytics.hpp"
#include "loadshape/dictionary.hpp"
#include "loadshape/error.hpp"
#include "loadshape/pipeline.hpp"
#include "loadshape/synthetic.hpp"
#include "test_support.hpp"

using namespace loadshape;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_corpus(const fs::path& dir) {
  SyntheticSpec spec;
  spec.households = 40;
  spec.days = 120;
  spec.outlier_fraction = 0.05;
  spec.bad_day_fraction = 0.02;
  spec.temperature_response = 0.5;
  spec.seed = 31;
  write_synthetic(dir, generate_synthetic(spec));
}

RunConfig config_for(const fs::path& corpus, const fs::path& out) {
  RunConfig c;
  c.meter = corpus / "meter.csv";
  c.weather = corpus / "weather.csv";
  c.survey = corpus / "survey.csv";
  c.out = out;
  c.seed = 5;
  c.bootstrap_resamples = 200;
  return c;
}

std::string error_of(Stage stage, const RunConfig& c) {
  try {
    run_stage(stage, c);
  } catch (const StageError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config keys round-trip and validate") {
  RunConfig c;
  apply_key_values(c, {{"theta", "0.25"}, {"truncate-violation", "0.1"}, {"occurrence-targets", "1,4"}, {"seed", "9"}});
  CHECK(c.theta == 0.25);
  CHECK(c.truncate_v == 0.1);
  CHECK(c.occurrence_targets == std::vector<std::size_t>{1, 4});
  RunConfig back;
  apply_key_values(back, to_key_values(c));
  CHECK(to_key_values(back) == to_key_values(c));
  CHECK_THROWS_AS(apply_key_values(c, {{"bogus", "1"}}), InvalidArgument);
  CHECK_THROWS_AS(apply_key_values(c, {{"theta", "abc"}}), InvalidArgument);

  c.theta = 0.0;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c.theta = 0.3;
  c.truncate_v = 1.0;
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c.truncate_v = 0.3;
  c.quartiles = "fixed:70,65,80";
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c.quartiles = "fixed:65,70,80";
  validate(c);
}

TEST_CASE("run id ignores threads and output location") {
  RunConfig a;
  a.seed = 1;
  auto b = a;
  b.threads = 7;
  b.out = "elsewhere";
  CHECK(run_id(a) == run_id(b));
  CHECK(run_id(a).size() == 16);
  b.theta = 0.2;
  CHECK(run_id(a) != run_id(b));
}

TEST_CASE("pipeline end to end") {
  testing::TempDir dir("pipeline");
  write_corpus(dir / "corpus");
  const auto c = config_for(dir / "corpus", dir / "out");

  const auto first = run_pipeline(c);
  REQUIRE(first.size() == 5);
  for (const auto& o : first) CHECK_FALSE(o.cached);
  for (const char* f : {"shapes.csv", "cleaning_report.csv", "model.json", "labels.csv", "dictionary.json",
                        "truncation.csv", "assignments.csv", "entropy_by_stratum.csv", "coverage_curve.csv",
                        "taxonomy.csv", "household_entropy.csv", "char_deltas.csv", "occurrence_map.csv",
                        "quality.csv", kManifestFile}) {
    CAPTURE(f);
    CHECK(fs::exists(c.out / f));
  }

  const auto dict = load_dictionary(c.out / "dictionary.json");
  CHECK(dict.provenance.at("run_id") == run_id(c));
  std::ifstream in(c.out / kManifestFile);
  const auto manifest = nlohmann::json::parse(in);
  CHECK(manifest.at("run_id") == run_id(c));
  for (const char* s : {"ingest", "cluster", "truncate", "assign", "analyze"}) {
    const auto& e = manifest.at("stages").at(s);
    CHECK(e.contains("params_hash"));
    CHECK(e.contains("inputs"));
    CHECK(e.contains("outputs"));
    CHECK(e.contains("completed_at"));
  }
  for (const char* f : {"entropy_by_stratum.csv", "coverage_curve.csv", "taxonomy.csv", "quality.csv"}) {
    CHECK(slurp(c.out / f).rfind("# ", 0) == 0);
  }
  const auto coverage = read_data_lines(c.out / "coverage_curve.csv");
  CHECK(coverage.size() == dict.size() + 1);

  SUBCASE("a rerun is served from the manifest") {
    const auto before = slurp(c.out / "dictionary.json");
    for (const auto& o : run_pipeline(c)) CHECK(o.cached);
    CHECK(slurp(c.out / "dictionary.json") == before);
  }
  SUBCASE("changing V recomputes truncate and what follows") {
    auto v = c;
    v.truncate_v = 0.10;
    const auto outcomes = run_pipeline(v);
    CHECK(outcomes[0].cached);
    CHECK(outcomes[1].cached);
    CHECK_FALSE(outcomes[2].cached);
    CHECK_FALSE(outcomes[3].cached);
    const auto smaller_v = load_dictionary(c.out / "dictionary.json");
    CHECK(smaller_v.size() >= dict.size());
  }
  SUBCASE("a deleted output is rebuilt") {
    fs::remove(c.out / "truncation.csv");
    const auto o = run_stage(Stage::kTruncate, c);
    CHECK_FALSE(o.cached);
    CHECK(fs::exists(c.out / "truncation.csv"));
  }
  SUBCASE("a failing stage removes its outputs") {
    std::ofstream(c.out / "labels.csv") << "household_id,date,cluster_id\nnope\n";
    const auto msg = error_of(Stage::kTruncate, c);
    CHECK(msg.rfind("stage truncate failed: ", 0) == 0);
    CHECK_FALSE(fs::exists(c.out / "dictionary.json"));
    CHECK_FALSE(fs::exists(c.out / "truncation.csv"));
    std::ifstream m(c.out / kManifestFile);
    CHECK_FALSE(nlohmann::json::parse(m).at("stages").contains("truncate"));
  }
}

TEST_CASE("stages name the missing upstream step") {
  testing::TempDir dir("pipeline");
  write_corpus(dir / "corpus");
  const auto c = config_for(dir / "corpus", dir / "out");
  CHECK(error_of(Stage::kCluster, c).find("run `ingest` first") != std::string::npos);
  for (auto s : {Stage::kIngest, Stage::kCluster, Stage::kTruncate}) run_stage(s, c);
  const auto msg = error_of(Stage::kAnalyze, c);
  CHECK(msg.find("assignments.csv not found") != std::string::npos);
  CHECK(msg.find("run `assign` first") != std::string::npos);
}

TEST_CASE("stochastic stages need a seed and a sane config") {
  testing::TempDir dir("pipeline");
  write_corpus(dir / "corpus");
  auto c = config_for(dir / "corpus", dir / "out");
  run_stage(Stage::kIngest, c);
  c.seed.reset();
  CHECK(error_of(Stage::kCluster, c).find("--seed") != std::string::npos);
  c.seed = 1;
  c.theta = 0.0;
  CHECK(error_of(Stage::kCluster, c).find("theta") != std::string::npos);
  CHECK_FALSE(fs::exists(c.out / "model.json"));
}

TEST_CASE("dictionary size does not grow with V") {
  testing::TempDir dir("pipeline");
  write_corpus(dir / "corpus");
  auto c = config_for(dir / "corpus", dir / "out");
  for (auto s : {Stage::kIngest, Stage::kCluster}) run_stage(s, c);
  c.truncate_v = 0.10;
  run_stage(Stage::kTruncate, c);
  const auto tight = load_dictionary(c.out / "dictionary.json").size();
  c.truncate_v = 0.30;
  run_stage(Stage::kTruncate, c);
  CHECK(load_dictionary(c.out / "dictionary.json").size() <= tight);
}

TEST_CASE("outputs do not depend on the thread count") {
  testing::TempDir dir("pipeline");
  write_corpus(dir / "corpus");
  auto one = config_for(dir / "corpus", dir / "t1");
  one.threads = 1;
  auto four = config_for(dir / "corpus", dir / "t4");
  four.threads = 4;
  run_pipeline(one);
  run_pipeline(four);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(one.out)) {
    const auto name = entry.path().filename().string();
    if (name == kManifestFile) continue;
    CAPTURE(name);
    CHECK(slurp(entry.path()) == slurp(four.out / name));
    ++compared;
  }
  CHECK(compared >= 14);
}

TEST_CASE("cli synth is reproducible and rejects bad configs") {
  testing::TempDir dir("cli");
  const std::string cli = LOADSHAPE_CLI;
  const auto synth = [&](const std::string& out) {
    const auto cmd = cli + " synth --out " + (dir / out).string() +
                     " --seed 4 --households 10 --days 20 > " + (dir / (out + ".log")).string();
    return std::system(cmd.c_str());
  };
  REQUIRE(synth("a") == 0);
  REQUIRE(synth("b") == 0);
  for (const char* f : {"meter.csv", "weather.csv", "survey.csv", "truth.csv"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const auto bad = cli + " run --meter " + (dir / "a" / "meter.csv").string() + " --out " + (dir / "o").string() +
                   " --seed 1 --theta 0 2> " + (dir / "err.log").string();
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(slurp(dir / "err.log").find("theta") != std::string::npos);
}
