#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/experiment.hpp"
#include "daonmf/data.hpp"
#include "daonmf/error.hpp"
#include "daonmf/rng.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using daonmf::cli::run;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("daonmf_cli_") + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "daonmf");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const fs::path& dataset, const std::string& methods) {
  const fs::path cfg = dir / "exp.json";
  std::ofstream(cfg) << "{\"dataset\": \"" << dataset.string() << "\", \"methods\": " << methods
                     << ", \"k1\": 5, \"k2_sweep\": [6, 8], \"seeds\": [0, 1],"
                     << " \"kmeans_restarts\": 3, \"max_iters\": 50, \"pretrain_iters\": 100}";
  return cfg;
}

}  // namespace

TEST(Experiment, RowCountAndDeterminism) {
  TempDir tmp;
  daonmf::save_dataset(tmp.path() / "ds", daonmf::synth_planted(5, 10, 20, 0.05, 1));
  const fs::path cfg = write_config(tmp.path(), tmp.path() / "ds", "[\"aonmf\", \"daonmf\"]");

  const auto a = invoke({"experiment", cfg.string(), "--out", (tmp.path() / "a.csv").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = invoke({"experiment", cfg.string(), "--out", (tmp.path() / "b.csv").string()});
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string csv = read_file(tmp.path() / "a.csv");
  EXPECT_EQ(csv, read_file(tmp.path() / "b.csv"));

  const auto rows = parse_csv(csv);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), daonmf::cli::ExperimentReport::kHeader);
  std::size_t data_rows = 0;
  std::size_t summary_rows = 0;
  std::map<std::string, double> mean_acc;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 8u) << "row " << i;
    if (rows[i][2] == "mean") {
      ++summary_rows;
      mean_acc[rows[i][0]] += std::stod(rows[i][3]) / 2.0;
    } else {
      ++data_rows;
      EXPECT_EQ(rows[i][7], "ok");
    }
  }
  EXPECT_EQ(data_rows, 2u * 2u * 2u);
  EXPECT_EQ(summary_rows, 4u);
  EXPECT_GE(mean_acc["daonmf"], mean_acc["aonmf"] - 0.05);
}

TEST(Experiment, FailedRunIsRecordedNotFatal) {
  TempDir tmp;
  daonmf::save_dataset(tmp.path() / "ds", daonmf::synth_planted(5, 10, 20, 0.05, 1));
  const fs::path cfg = tmp.path() / "exp.json";
  // k1 wider than k2 makes the deep model infeasible for every k2 but not aonmf.
  std::ofstream(cfg) << "{\"dataset\": \"" << (tmp.path() / "ds").string()
                     << "\", \"methods\": [\"aonmf\", \"daonmf\"], \"k1\": 7, \"k2_sweep\": [6],"
                     << " \"seeds\": [0], \"max_iters\": 20, \"pretrain_iters\": 20}";
  const auto res = invoke({"experiment", cfg.string()});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto rows = parse_csv(res.out);
  bool saw_error = false;
  bool saw_ok = false;
  for (const auto& row : rows) {
    if (row.size() == 8 && row[2] != "mean" && row[0] == "daonmf")
      saw_error = row[7].rfind("error:", 0) == 0;
    if (row.size() == 8 && row[0] == "aonmf" && row[7] == "ok") saw_ok = true;
  }
  EXPECT_TRUE(saw_error) << res.out;
  EXPECT_TRUE(saw_ok) << res.out;
}

TEST(Experiment, MissingDatasetExitsWithDataError) {
  const auto res = invoke({"experiment", std::string(DAONMF_CONFIG_DIR) + "/cmu_pie.json"});
  EXPECT_EQ(res.code, daonmf::cli::kDataError);
  const auto cfg = daonmf::cli::ExperimentConfig::load(std::string(DAONMF_CONFIG_DIR) + "/cmu_pie.json");
  EXPECT_NE(res.err.find(cfg.dataset.string()), std::string::npos) << res.err;
}

TEST(Experiment, ShippedConfigsParse) {
  for (const char* name : {"cmu_pie.json", "extended_yale_b.json", "planted.json"}) {
    const auto cfg = daonmf::cli::ExperimentConfig::load(fs::path(DAONMF_CONFIG_DIR) / name);
    EXPECT_NO_THROW(cfg.validate()) << name;
  }
  const auto pie = daonmf::cli::ExperimentConfig::load(fs::path(DAONMF_CONFIG_DIR) / "cmu_pie.json");
  EXPECT_EQ(pie.k1, 120u);
  EXPECT_EQ(pie.k2_sweep, (std::vector<std::size_t>{130, 135, 140, 145, 150, 160, 165, 170}));
  EXPECT_EQ(pie.lambda1, 1e-6);
  EXPECT_EQ(pie.lambda2, 1e-5);
}

TEST(Experiment, UnknownKeyIsConfigError) {
  EXPECT_THROW(daonmf::cli::ExperimentConfig::from_json(
                   nlohmann::json::parse(R"({"dataset": "x", "methods": ["nmf"], "k1": 2,
                                             "k2_sweep": [3], "seeds": [0], "bogus": 1})")),
               daonmf::ConfigError);
}

TEST(Cli, UnknownFlagPrintsUsageAndExitsTwo) {
  const auto res = invoke({"factorize", "--bogus", "x"});
  EXPECT_EQ(res.code, daonmf::cli::kConfigError);
  EXPECT_NE(res.err.find("Usage"), std::string::npos) << res.err;
}

TEST(Cli, InfeasibleRankExitsTwo) {
  TempDir tmp;
  daonmf::save_dataset(tmp.path() / "ds", daonmf::synth_planted(2, 2, 4, 0.0, 1));
  const auto res = invoke({"factorize", "--rank", "9", (tmp.path() / "ds").string()});
  EXPECT_EQ(res.code, daonmf::cli::kConfigError) << res.err;
}

TEST(Cli, DeepFactorizeWritesModelShapes) {
  TempDir tmp;
  daonmf::Rng rng(1);
  daonmf::save_matrix(tmp.path() / "x.mat", oracle::random_matrix(20, 40, rng));
  const auto res = invoke({"deep-factorize", "--layers", "3,5", "--lambda", "0.01", "--iters", "10",
                           "--pretrain-iters", "30", "--out", (tmp.path() / "model").string(),
                           (tmp.path() / "x.mat").string()});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto w1 = daonmf::read_matrix_file(tmp.path() / "model" / "W1.mat");
  const auto h1 = daonmf::read_matrix_file(tmp.path() / "model" / "H1.mat");
  const auto h2 = daonmf::read_matrix_file(tmp.path() / "model" / "H2.mat");
  EXPECT_EQ(std::make_pair(w1.rows(), w1.cols()), std::make_pair(std::size_t{20}, std::size_t{3}));
  EXPECT_EQ(std::make_pair(h1.rows(), h1.cols()), std::make_pair(std::size_t{5}, std::size_t{3}));
  EXPECT_EQ(std::make_pair(h2.rows(), h2.cols()), std::make_pair(std::size_t{40}, std::size_t{5}));
}

TEST(Cli, PlantedPipelineReachesPerfectAccuracy) {
  TempDir tmp;
  const std::string d = (tmp.path() / "d").string();
  ASSERT_EQ(invoke({"synth", "--k", "3", "--n-per", "20", "--m", "30", "--noise", "0", "--seed", "1",
                    "--out", d})
                .code,
            0);
  const auto fact = invoke({"factorize", "--method", "aonmf", "--rank", "3", "--lambda", "1", d});
  ASSERT_EQ(fact.code, 0) << fact.err;
  const auto eval = invoke({"evaluate", d});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const auto rows = parse_csv(eval.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][3], "1.000000");
}

TEST(Cli, ClusterWritesLabels) {
  TempDir tmp;
  const daonmf::Matrix pts{{0, 0}, {0, 1}, {9, 9}, {9, 8}};
  daonmf::save_matrix(tmp.path() / "f.mat", pts);
  const auto res = invoke({"cluster", "--features", (tmp.path() / "f.mat").string(), "--k", "2"});
  ASSERT_EQ(res.code, 0) << res.err;
  std::istringstream in(res.out);
  std::vector<int> labels;
  for (int v; in >> v;) labels.push_back(v);
  ASSERT_EQ(labels.size(), 4u);
  EXPECT_EQ(labels[0], labels[1]);
  EXPECT_NE(labels[0], labels[2]);
}

TEST(Cli, MissingInputExitsThree) {
  const auto res = invoke({"factorize", "--rank", "2", "/nonexistent/dataset"});
  EXPECT_EQ(res.code, daonmf::cli::kDataError);
}
