#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfm/error.hpp"
#include "rfm/runner.hpp"

using namespace rfm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("rfm_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const int rc = std::system((std::string(RFM_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kCircle =
    R"({"experiment":"clt","seed":7,"measure":{"type":"wrapped_uniform_arc","center":0.0,"halfwidth":1.0},)"
    R"("q0":[0.0],"n":200,"reps":2000})";

}  // namespace

TEST(Config, RoundTrip) {
  const ExperimentConfig c = parse_experiment_config(kCircle);
  EXPECT_EQ(c.experiment, "clt");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(ExperimentConfig::from_json(c.to_json()), c);
  EXPECT_EQ(parse_experiment_config(c.to_json().dump()), c);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_experiment_config("{bad"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"experiment":"clt","seed":1,"bogus":1})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"experiment":"nope","seed":1})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"seed":1})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"experiment":"counterexample","seed":1,"r":-1})"), ConfigError);
  EXPECT_THROW(parse_experiment_config(R"({"experiment":"counterexample","seed":1,"alpha":1.0})"), ConfigError);
  EXPECT_NO_THROW(parse_experiment_config(R"({"experiment":"counterexample","seed":1})"));
}

TEST(Config, HashIgnoresOutputDirAndTracksSeed) {
  ExperimentConfig a = parse_experiment_config(kCircle);
  ExperimentConfig b = a;
  b.output_dir = "/somewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.seed = 8;
  EXPECT_NE(config_hash(a), config_hash(b));
  // Field order in the file does not matter.
  const ExperimentConfig c = parse_experiment_config(
      R"({"q0":[0.0],"n":200,"reps":2000,"seed":7,"experiment":"clt",)"
      R"("measure":{"halfwidth":1.0,"type":"wrapped_uniform_arc","center":0.0}})");
  EXPECT_EQ(config_hash(a), config_hash(c));
}

TEST(Runner, ReportsAreReproducibleAcrossParallelism) {
  const ExperimentConfig c = parse_experiment_config(kCircle);
  const RunOutcome a = run_experiment(c, {std::nullopt, 1});
  const RunOutcome b = run_experiment(c, {std::nullopt, 2});
  EXPECT_TRUE(a.passed());
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.report["config_hash"], config_hash(c));
  EXPECT_EQ(a.report["version"], library_version());
  const RunOutcome s = run_experiment(c, {9, std::nullopt});
  EXPECT_EQ(s.report["config"]["seed"], 9);
  EXPECT_NE(s.report.dump(), a.report.dump());
}

TEST(Runner, WritesNamedOutputs) {
  const fs::path d = scratch("outputs");
  const ExperimentConfig c = parse_experiment_config(kCircle);
  const RunOutcome o = run_experiment(c);
  const std::string path = write_outputs(o, d.string());
  EXPECT_EQ(fs::path(path).filename().string(), "clt-" + o.config_hash + ".json");
  EXPECT_TRUE(fs::exists(d / ("clt-" + o.config_hash + ".csv")));
  EXPECT_EQ(nlohmann::json::parse(read_file(path)), o.report);
  EXPECT_EQ(read_file(d / ("clt-" + o.config_hash + ".csv")), o.csv);
}

TEST(Runner, ListMentionsExperiments) {
  const std::string s = list_experiments();
  for (const char* k : {"clt", "stability", "counterexample", "consistency", "matrices", "seed"}) {
    EXPECT_NE(s.find(k), std::string::npos) << k;
  }
  const auto clt = s.substr(0, s.find("matrices"));
  EXPECT_NE(clt.find("seed"), std::string::npos);
}

TEST(Runner, StabilityAndMatrices) {
  const RunOutcome st = run_experiment(parse_experiment_config(
      R"({"experiment":"stability","seed":3,"model":"cylinder","p":[0.0,1.0],)"
      R"("neighborhood":{"type":"cylinder_funnel"},"r_list":[1.0,0.3],"samples":200,"expect_stable":false})"));
  EXPECT_TRUE(st.passed());
  const RunOutcome mt = run_experiment(parse_experiment_config(
      R"({"experiment":"matrices","seed":5,"measure":{"type":"wrapped_uniform_arc","center":0.0,"halfwidth":1.0},)"
      R"("q0":[0.0]})"));
  EXPECT_TRUE(mt.passed());
  EXPECT_NEAR(mt.report["result"]["sandwich"][0][0].get<double>(), 1.0 / 3.0, 1e-12);
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("cli");
  EXPECT_EQ(cli("--version"), 0);
  EXPECT_EQ(cli("list"), 0);
  EXPECT_EQ(cli("run " + write_file(d, "bad.json", "{bad").string()), 2);
  EXPECT_EQ(cli("run " + write_file(d, "unk.json", R"({"experiment":"clt","seed":1,"bogus":1})").string()), 2);
  EXPECT_EQ(cli("run " + (d / "missing.json").string()), 2);
  const fs::path good = write_file(d, "good.json", kCircle);
  EXPECT_EQ(cli("run " + good.string() + " --output-dir " + (d / "out").string()), 0);
  const std::string h = config_hash(parse_experiment_config(kCircle));
  EXPECT_TRUE(fs::exists(d / "out" / ("clt-" + h + ".json")));
  // A check that cannot pass.
  const fs::path strict = write_file(d, "strict.json",
                                     R"({"experiment":"stability","seed":3,"model":"cylinder","p":[0.0,1.0],)"
                                     R"("neighborhood":{"type":"cylinder_funnel"},"r_list":[0.3],"samples":50,)"
                                     R"("expect_stable":true})");
  EXPECT_EQ(cli("run " + strict.string() + " --output-dir " + (d / "out").string()), 3);
}

TEST(Cli, SeedOverrideChangesHash) {
  const fs::path d = scratch("seed");
  const fs::path good = write_file(d, "good.json", kCircle);
  ASSERT_EQ(cli("run " + good.string() + " --seed 11 --trials-parallelism 2 --output-dir " + (d / "o").string()), 0);
  ExperimentConfig c = parse_experiment_config(kCircle);
  c.seed = 11;
  EXPECT_TRUE(fs::exists(d / "o" / ("clt-" + config_hash(c) + ".json")));
}
