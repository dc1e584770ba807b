#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace daonmf::cli {

// Parameters of a clustering sweep over the second-layer width k2. Loaded
// from a flat JSON object whose keys are the field names below.
struct ExperimentConfig {
  std::filesystem::path dataset;
  // Side length of the square PGM images when `dataset` is an image tree.
  std::size_t image_side = 32;
  std::vector<std::string> methods;  // nmf, aonmf, daonmf, argmax-daonmf
  std::size_t k1 = 0;
  std::vector<std::size_t> k2_sweep;
  double lambda1 = 1e-6;
  double lambda2 = 1e-5;
  std::vector<std::uint64_t> seeds;
  std::size_t kmeans_restarts = 10;
  std::size_t kmeans_max_iters = 300;
  // Iteration budget of single-layer solvers and of fine-tuning.
  std::size_t max_iters = 200;
  double tol = 1e-5;
  std::size_t pretrain_iters = 500;
  double pretrain_tol = 1e-6;
  std::filesystem::path output;

  // Throws ConfigError on unknown keys, wrong types or empty sweeps.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  void validate() const;
};

struct ExperimentRow {
  std::string method;
  std::size_t k2 = 0;
  std::uint64_t seed = 0;
  double acc = 0.0;
  double nmi = 0.0;
  double final_cost = 0.0;
  std::size_t iters = 0;
  // "ok", or "error: <message>" for a failed run.
  std::string status;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;

  // Header, one line per run, then one summary line per (method, k2) with
  // seed = "mean", the means in the numeric columns and the standard
  // deviations in the status column.
  std::string to_csv() const;
  static constexpr const char* kHeader = "method,k2,seed,acc,nmi,final_cost,iters,status";
};

// Loads the dataset (InvalidData if missing or unlabeled), then runs every
// (method, k2, seed) in the listed order. A failing run becomes a row with an
// error status; the sweep always completes.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace daonmf::cli
