#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "multicoh/cli.hpp"
#include "multicoh/io.hpp"

namespace fs = std::filesystem;
using namespace multicoh;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(MULTICOH_TEST_TMPDIR) / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

  std::string config(const std::string& name, const nlohmann::json& doc) {
    write_file(dir_ / name, doc.dump(2));
    return path(name);
  }

  fs::path dir_;
};

nlohmann::json csbm_config(double in_target, double out_target) {
  const double v_in = 0.36 + in_target * 0.24;
  const double v_out = 0.04 + out_target * 0.16;
  return {{"model", "blockmodel"},
          {"block_sizes", {300, 300}},
          {"theta1", {{0.6, 0.2}, {0.2, 0.6}}},
          {"varrho", {{v_in, v_out}, {v_out, v_in}}},
          {"mechanism", "mixture"}};
}

// Rows of an estimate CSV as column-name -> value maps.
std::vector<std::map<std::string, std::string>> parse_csv(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) header.push_back(c);
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::map<std::string, std::string> row;
    std::size_t k = 0;
    for (std::string c; std::getline(ls, c, ',');) row[header.at(k++)] = c;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_F(CliTest, UsageAndVersion) {
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"generate"}).code, cli::kUsage);
  const auto v = run_cli({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(cli::kVersion) + "\n");
  const auto h = run_cli({"generate", "--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("--mechanism"), std::string::npos);
}

TEST_F(CliTest, GenerateEmptyModel) {
  const auto cfg = config("empty.json", {{"model", "blockmodel"},
                                         {"block_sizes", {25}},
                                         {"theta1", {{0.0}}},
                                         {"varrho", {{0.0}}}});
  const auto r = run_cli({"generate", cfg, "--out", path("out"), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("out/layer1.tsv")), "# multicoh layer v1 n=25\n");
  EXPECT_EQ(read_file(path("out/layer2.tsv")), "# multicoh layer v1 n=25\n");
  const auto manifest = nlohmann::json::parse(read_file(path("out/manifest.json")));
  EXPECT_EQ(manifest["seed"], 3);
  EXPECT_EQ(manifest["n"], 25);
  EXPECT_EQ(manifest["config_sha256"], sha256_hex(read_file(cfg)));
}

TEST_F(CliTest, GenerateVmeanOneGivesIdenticalLayers) {
  const auto cfg = config("same.json", {{"model", "blockmodel"},
                                        {"block_sizes", {40, 60}},
                                        {"theta1", {{0.5, 0.3}, {0.3, 0.5}}},
                                        {"varrho", {{0.5, 0.3}, {0.3, 0.5}}},
                                        {"mechanism", "mixture"}});
  ASSERT_EQ(run_cli({"generate", cfg, "--out", path("o"), "--seed", "9"}).code, 0);
  const auto l1 = read_file(path("o/layer1.tsv"));
  EXPECT_EQ(l1, read_file(path("o/layer2.tsv")));
  EXPECT_GT(l1.size(), 100u);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  const auto cfg = config("g.json", {{"model", "graphon"},
                                     {"rho", 0.5},
                                     {"f1", {{"type", "gravity"}, {"c", 1.0}}},
                                     {"r0", 0.2}});
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(run_cli({"generate", cfg, "--out", path(out), "--seed", "77",
                       "--n", "150"})
                  .code,
              0);
  }
  for (const char* f : {"layer1.tsv", "layer2.tsv", "latents.tsv",
                        "manifest.json"}) {
    EXPECT_EQ(read_file(path(std::string("a/") + f)),
              read_file(path(std::string("b/") + f)))
        << f;
  }
  ASSERT_EQ(run_cli({"generate", cfg, "--out", path("c"), "--seed", "78",
                     "--n", "150"})
                .code,
            0);
  EXPECT_NE(read_file(path("a/layer1.tsv")), read_file(path("c/layer1.tsv")));
}

TEST_F(CliTest, GenerateErrorsUseDistinctExitCodes) {
  const auto bad = config("bad.json", {{"model", "graphon"},
                                       {"gamma", 1},
                                       {"f1", 0.06},
                                       {"f2", 0.12},
                                       {"r0", 0.7}});
  auto r = run_cli({"generate", bad, "--out", path("o"), "--n", "5"});
  EXPECT_EQ(r.code, cli::kModel);
  EXPECT_NE(r.err.find("upper"), std::string::npos) << r.err;
  r = run_cli({"generate", path("missing.json"), "--out", path("o")});
  EXPECT_EQ(r.code, cli::kIo);
  write_file(dir_ / "broken.json", "{ not json");
  r = run_cli({"generate", path("broken.json"), "--out", path("o")});
  EXPECT_EQ(r.code, cli::kModel);
}

TEST_F(CliTest, EstimateIdenticalAndComplement) {
  const auto cfg = config("c.json", csbm_config(0.3, 0.1));
  ASSERT_EQ(run_cli({"generate", cfg, "--out", path("o"), "--seed", "1"}).code, 0);
  auto r = run_cli({"estimate", path("o/layer1.tsv"), path("o/layer1.tsv"),
                    "--labels", path("o/latents.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  for (auto& row : rows) EXPECT_NEAR(std::stod(row["r"]), 1.0, 1e-12);

  // Complement of layer 1.
  std::istringstream in(read_file(path("o/layer1.tsv")));
  const Adjacency a = read_layer(in);
  Adjacency c(a.nodes());
  for (std::size_t i = 0; i < a.nodes(); ++i)
    for (std::size_t j = i + 1; j < a.nodes(); ++j)
      if (!a(i, j)) c.set(i, j);
  std::ostringstream os;
  write_layer(os, c);
  write_file(dir_ / "comp.tsv", os.str());
  r = run_cli({"estimate", path("o/layer1.tsv"), path("comp.tsv"), "--labels",
               path("o/latents.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (auto& row : parse_csv(r.out)) EXPECT_EQ(row["varrho"], "0");
}

TEST_F(CliTest, GenerateEstimateRoundTrip) {
  const auto cfg = config("c.json", csbm_config(0.36, 0.16));
  ASSERT_EQ(run_cli({"generate", cfg, "--out", path("o"), "--seed", "5"}).code, 0);
  const auto r = run_cli({"estimate", path("o/layer1.tsv"),
                          path("o/layer2.tsv"), "--labels",
                          path("o/latents.tsv"), "--coherence-graph",
                          path("coh.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  const std::map<std::string, double> theta{{"1,1", 0.6}, {"1,2", 0.2}, {"2,2", 0.6}};
  const std::map<std::string, double> target{{"1,1", 0.36}, {"1,2", 0.16},
                                             {"2,2", 0.36}};
  for (auto row : rows) {
    const std::string key = row["a"] + "," + row["b"];
    EXPECT_NEAR(std::stod(row["theta1"]), theta.at(key), 0.01);
    EXPECT_NEAR(std::stod(row["theta2"]), theta.at(key), 0.01);
    EXPECT_NEAR(std::stod(row["r"]), target.at(key), 0.05);
  }
  EXPECT_EQ(read_file(path("coh.tsv")).rfind("# multicoh coherence v1 K=2\n", 0),
            0u);
}

TEST_F(CliTest, EstimateThreeLayersAndMismatch) {
  const auto cfg = config("c.json", csbm_config(0.3, 0.1));
  ASSERT_EQ(run_cli({"generate", cfg, "--out", path("o"), "--seed", "2"}).code, 0);
  auto r = run_cli({"estimate", path("o/layer1.tsv"), path("o/layer2.tsv"),
                    path("o/layer1.tsv"), "--labels", path("o/latents.tsv"),
                    "--coherence-graph", path("g.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 9u);
  for (auto row : rows) {
    if (row["layer1"] == "1" && row["layer2"] == "3") {
      EXPECT_NEAR(std::stod(row["r"]), 1.0, 1e-12);
    }
  }
  EXPECT_TRUE(fs::exists(path("g_1_3.tsv")));
  EXPECT_TRUE(fs::exists(path("g_2_3.tsv")));

  write_file(dir_ / "small.tsv", "# multicoh layer v1 n=3\n1\t2\n");
  r = run_cli({"estimate", path("o/layer1.tsv"), path("small.tsv"), "--labels",
               path("o/latents.tsv")});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.code, cli::kModel);
  write_file(dir_ / "garbled.tsv", "# multicoh layer v1 n=600\n2\t1\n");
  r = run_cli({"estimate", path("o/layer1.tsv"), path("garbled.tsv"),
               "--labels", path("o/latents.tsv")});
  EXPECT_EQ(r.code, cli::kIo);
}

TEST_F(CliTest, EstimateRhoOptions) {
  const auto cfg = config("c.json", csbm_config(0.3, 0.1));
  ASSERT_EQ(run_cli({"generate", cfg, "--out", path("o"), "--seed", "2"}).code, 0);
  const std::vector<std::string> base{"estimate", path("o/layer1.tsv"),
                                      path("o/layer2.tsv"), "--labels",
                                      path("o/latents.tsv")};
  auto args = base;
  args.insert(args.end(), {"--rho", "0.5", "--gamma", "2"});
  auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  for (auto row : parse_csv(r.out)) {
    EXPECT_NEAR(std::stod(row["r0"]), 2 * std::stod(row["r"]), 1e-12);
  }
  args = base;
  args.insert(args.end(), {"--gamma", "1"});
  r = run_cli(args);
  for (auto row : parse_csv(r.out)) EXPECT_EQ(row["r0"], row["r"]);
  args = base;
  args.insert(args.end(), {"--rho", "abc"});
  EXPECT_EQ(run_cli(args).code, cli::kModel);
  args = base;
  args.push_back("--per-layer-density");
  EXPECT_EQ(run_cli(args).code, 0);
}

TEST_F(CliTest, ValidateReports) {
  const auto ok = config("ok.json", {{"model", "graphon"},
                                     {"f1", {{"type", "gravity"}}},
                                     {"f2", {{"type", "distance"}, {"beta", 2}}},
                                     {"r0", 0.0}});
  auto r = run_cli({"validate", ok, "--grid", "32"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("admissible", 0), 0u);

  const auto bad = config("bad.json", {{"model", "graphon"},
                                       {"gamma", 1},
                                       {"f1", 0.06},
                                       {"f2", 0.12},
                                       {"r0", 0.7}});
  r = run_cli({"validate", bad});
  EXPECT_EQ(r.code, cli::kModel);
  EXPECT_NE(r.out.find("1 violation"), std::string::npos) << r.out;
  r = run_cli({"validate", bad, "--format", "json"});
  EXPECT_EQ(r.code, cli::kModel);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_FALSE(doc["admissible"].get<bool>());
  ASSERT_EQ(doc["violations"].size(), 1u);
  EXPECT_NEAR(doc["violations"][0]["hi"].get<double>(), 0.6842, 1e-4);

  const auto frechet = config("f.json", {{"model", "blockmodel"},
                                         {"block_sizes", {5, 5}},
                                         {"theta1", {{0.6, 0.2}, {0.2, 0.6}}},
                                         {"varrho", {{0.4, 0.3}, {0.3, 0.4}}}});
  r = run_cli({"validate", frechet});
  EXPECT_EQ(r.code, cli::kModel);
  EXPECT_NE(r.err.find("(1,2)"), std::string::npos) << r.err;
}

TEST_F(CliTest, MonteCarloTrivialModel) {
  const auto cfg = config("z.json", {{"model", "blockmodel"},
                                     {"block_sizes", {10, 10}},
                                     {"theta1", {{0.0, 0.0}, {0.0, 0.0}}},
                                     {"varrho", {{0.0, 0.0}, {0.0, 0.0}}}});
  const auto r = run_cli({"montecarlo", cfg, "--replicates", "1", "--n-grid",
                          "20", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_FALSE(rows.empty());
  for (auto row : rows) EXPECT_EQ(row["value"], "0") << row["stat_name"];
}

TEST_F(CliTest, MonteCarloIndependenceErrorShrinks) {
  const auto cfg = config("ind.json", {{"model", "blockmodel"},
                                       {"block_proportions", {0.5, 0.5}},
                                       {"theta1", {{0.6, 0.2}, {0.2, 0.6}}},
                                       {"r0", 0.0}});
  const auto r = run_cli({"montecarlo", cfg, "--replicates", "4", "--n-grid",
                          "50,400", "--rho-grid", "0.5", "--seed", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, double> mae;
  for (auto row : parse_csv(r.out)) {
    if (row["replicate"] == "mean" && row["stat_name"] == "r0_mae") {
      mae[row["n"]] += std::stod(row["value"]);
    }
  }
  EXPECT_LT(mae.at("400"), mae.at("50"));
}

TEST_F(CliTest, MonteCarloScalingStability) {
  const auto cfg = config("s.json", {{"model", "blockmodel"},
                                     {"block_proportions", {0.5, 0.5}},
                                     {"theta1", {{1.0, 0.6}, {0.6, 1.0}}},
                                     {"r0", 0.3}});
  const auto r = run_cli({"montecarlo", cfg, "--replicates", "2", "--n-grid",
                          "1200", "--rho-grid", "0.5,0.2,0.1", "--seed", "3",
                          "--out", path("mc.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("mc.csv.manifest.json")));
  std::map<std::string, std::vector<double>> means;
  for (auto row : parse_csv(read_file(path("mc.csv")))) {
    if (row["replicate"] == "mean" && row["stat_name"] == "r0_hat") {
      means[row["block_a"] + row["block_b"]].push_back(std::stod(row["value"]));
    }
  }
  ASSERT_EQ(means.size(), 3u);
  for (const auto& [block, v] : means) {
    ASSERT_EQ(v.size(), 3u);
    for (double x : v)
      for (double y : v) EXPECT_LE(std::abs(x - y), 0.1) << block;
  }
}

TEST_F(CliTest, MonteCarloDeterministicAcrossThreadCounts) {
  const auto cfg = config("d.json", csbm_config(0.2, 0.1));
  std::string outputs[2];
  int k = 0;
  for (const char* threads : {"1", "4"}) {
    const auto r = run_cli({"montecarlo", cfg, "--replicates", "3", "--n-grid",
                            "60,80", "--seed", "8", "--threads", threads});
    ASSERT_EQ(r.code, 0) << r.err;
    outputs[k++] = r.out;
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  EXPECT_EQ(outputs[0].rfind(std::string(cli::kExperimentCsvHeader) + "\n", 0),
            0u);
}

TEST_F(CliTest, MonteCarloNeedsLabels) {
  const auto cfg = config("g.json", {{"model", "graphon"}, {"f1", 0.5}, {"r0", 0.0}});
  EXPECT_EQ(run_cli({"montecarlo", cfg, "--n-grid", "10"}).code, cli::kModel);
}

TEST_F(CliTest, ModulationAndNegativeConfigs) {
  const auto mod = config("m.json", {{"model", "modulation"},
                                     {"block_sizes", {30, 30}},
                                     {"rho", 0.5},
                                     {"f1", {{0.9, 0.4}, {0.4, 0.9}}},
                                     {"h", 0.7}});
  ASSERT_EQ(run_cli({"generate", mod, "--out", path("m"), "--seed", "1"}).code, 0);
  std::istringstream i1(read_file(path("m/layer1.tsv")));
  std::istringstream i2(read_file(path("m/layer2.tsv")));
  const Adjacency a1 = read_layer(i1), a2 = read_layer(i2);
  for (const auto& [i, j] : a2.edges()) EXPECT_TRUE(a1(i, j));

  const auto neg = config("n.json", {{"model", "negative"},
                                     {"rho", 0.5},
                                     {"g", {{"type", "gravity"}}},
                                     {"c", 1.0}});
  EXPECT_EQ(run_cli({"generate", neg, "--out", path("n"), "--n", "50"}).code, 0);
  EXPECT_EQ(run_cli({"validate", neg}).code, 0);
  EXPECT_EQ(run_cli({"generate", neg, "--out", path("n2"), "--n", "50",
                     "--mechanism", "modulation"})
                .code,
            cli::kModel);
}
