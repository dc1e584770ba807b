#include "cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "daonmf/aonmf.hpp"
#include "daonmf/clustering.hpp"
#include "daonmf/data.hpp"
#include "daonmf/deep.hpp"
#include "daonmf/error.hpp"
#include "daonmf/nmf.hpp"

namespace daonmf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kMethods = {"nmf", "aonmf", "daonmf", "argmax-daonmf"};

template <typename T>
void read_field(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: field '") + key + "': " + e.what());
  }
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string general(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

Dataset load_experiment_data(const ExperimentConfig& cfg) {
  if (!fs::exists(cfg.dataset)) throw InvalidData(cfg.dataset.string() + ": dataset not found");
  Dataset data = (fs::is_directory(cfg.dataset) && !fs::exists(cfg.dataset / "X.mat"))
                     ? load_image_dataset(cfg.dataset, cfg.image_side)
                     : load_dataset(cfg.dataset);
  if (!data.labels) throw InvalidData(cfg.dataset.string() + ": dataset has no ground-truth labels");
  return data;
}

Matrix normalized(const Matrix& h) {
  Matrix out = h;
  normalize_columns(out);
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment config: expected a JSON object");
  static const std::set<std::string> known = {
      "dataset", "image_side", "methods", "k1", "k2_sweep", "lambda1", "lambda2",
      "seeds", "kmeans_restarts", "kmeans_max_iters", "max_iters", "tol",
      "pretrain_iters", "pretrain_tol", "output"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("experiment config: unknown field '" + key + "'");
  }
  ExperimentConfig cfg;
  std::string dataset;
  std::string output;
  read_field(doc, "dataset", dataset);
  read_field(doc, "output", output);
  cfg.dataset = dataset;
  cfg.output = output;
  read_field(doc, "image_side", cfg.image_side);
  read_field(doc, "methods", cfg.methods);
  read_field(doc, "k1", cfg.k1);
  read_field(doc, "k2_sweep", cfg.k2_sweep);
  read_field(doc, "lambda1", cfg.lambda1);
  read_field(doc, "lambda2", cfg.lambda2);
  read_field(doc, "seeds", cfg.seeds);
  read_field(doc, "kmeans_restarts", cfg.kmeans_restarts);
  read_field(doc, "kmeans_max_iters", cfg.kmeans_max_iters);
  read_field(doc, "max_iters", cfg.max_iters);
  read_field(doc, "tol", cfg.tol);
  read_field(doc, "pretrain_iters", cfg.pretrain_iters);
  read_field(doc, "pretrain_tol", cfg.pretrain_tol);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData(path.string() + ": cannot open experiment config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ConfigError("experiment config: 'dataset' is required");
  if (methods.empty()) throw ConfigError("experiment config: 'methods' is empty");
  for (const auto& m : methods) {
    if (!kMethods.contains(m)) throw ConfigError("experiment config: unknown method '" + m + "'");
  }
  if (k2_sweep.empty()) throw ConfigError("experiment config: 'k2_sweep' is empty");
  if (seeds.empty()) throw ConfigError("experiment config: 'seeds' is empty");
  const bool deep = std::any_of(methods.begin(), methods.end(),
                                [](const std::string& m) { return m.find("daonmf") != std::string::npos; });
  if (deep && k1 == 0) throw ConfigError("experiment config: 'k1' is required for daonmf methods");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("experiment config: lambdas must be >= 0");
  if (max_iters == 0 || pretrain_iters == 0) throw ConfigError("experiment config: iteration budgets must be positive");
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << kHeader << '\n';
  // (method, k2) in first-appearance order.
  std::vector<std::pair<std::string, std::size_t>> groups;
  std::map<std::pair<std::string, std::size_t>, std::vector<const ExperimentRow*>> members;
  for (const auto& row : rows) {
    out << row.method << ',' << row.k2 << ',' << row.seed << ',';
    if (row.status == "ok") {
      out << fixed6(row.acc) << ',' << fixed6(row.nmi) << ',' << general(row.final_cost) << ','
          << row.iters;
    } else {
      out << ",,,";
    }
    out << ',' << row.status << '\n';
    const auto key = std::make_pair(row.method, row.k2);
    if (!members.contains(key)) groups.push_back(key);
    auto& list = members[key];
    if (row.status == "ok") list.push_back(&row);
  }
  for (const auto& key : groups) {
    const auto& list = members[key];
    out << key.first << ',' << key.second << ",mean,";
    if (list.empty()) {
      out << ",,,,summary n=0\n";
      continue;
    }
    const auto n = static_cast<double>(list.size());
    auto mean_of = [&](auto field) {
      double s = 0.0;
      for (const auto* r : list) s += field(*r);
      return s / n;
    };
    auto std_of = [&](auto field, double mean) {
      double s = 0.0;
      for (const auto* r : list) s += (field(*r) - mean) * (field(*r) - mean);
      return std::sqrt(s / n);
    };
    auto acc = [](const ExperimentRow& r) { return r.acc; };
    auto nmi_f = [](const ExperimentRow& r) { return r.nmi; };
    auto cost = [](const ExperimentRow& r) { return r.final_cost; };
    auto iters = [](const ExperimentRow& r) { return static_cast<double>(r.iters); };
    const double acc_mean = mean_of(acc);
    const double nmi_mean = mean_of(nmi_f);
    out << fixed6(acc_mean) << ',' << fixed6(nmi_mean) << ',' << general(mean_of(cost)) << ','
        << general(mean_of(iters)) << ",summary n=" << list.size()
        << " acc_std=" << fixed6(std_of(acc, acc_mean))
        << " nmi_std=" << fixed6(std_of(nmi_f, nmi_mean)) << '\n';
  }
  return out.str();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset data = load_experiment_data(cfg);
  const Labels& truth = *data.labels;
  const std::size_t classes = count_classes(truth);

  std::map<std::pair<std::size_t, std::uint64_t>, std::optional<DeepModel>> deep_cache;
  std::map<std::pair<std::size_t, std::uint64_t>, std::string> deep_errors;
  auto deep_model = [&](std::size_t k2, std::uint64_t seed) -> const DeepModel& {
    const auto key = std::make_pair(k2, seed);
    if (auto it = deep_errors.find(key); it != deep_errors.end()) throw ConfigError(it->second);
    auto& slot = deep_cache[key];
    if (!slot) {
      DeepConfig dc;
      dc.seed = seed;
      dc.max_iters = cfg.max_iters;
      dc.tol = cfg.tol;
      dc.pretrain_iters = cfg.pretrain_iters;
      dc.pretrain_tol = cfg.pretrain_tol;
      try {
        slot = train(data.x, LayerSpec::make({cfg.k1, k2}, {cfg.lambda1, cfg.lambda2}), dc);
      } catch (const std::exception& e) {
        deep_errors[key] = e.what();
        throw;
      }
    }
    return *slot;
  };

  ExperimentReport report;
  for (const auto& method : cfg.methods) {
    for (std::size_t k2 : cfg.k2_sweep) {
      for (std::uint64_t seed : cfg.seeds) {
        ExperimentRow row;
        row.method = method;
        row.k2 = k2;
        row.seed = seed;
        try {
          Matrix features;
          std::optional<Labels> direct;
          if (method == "nmf") {
            NmfConfig nc;
            nc.rank = k2;
            nc.seed = seed;
            nc.max_iters = cfg.max_iters;
            nc.tol = cfg.tol;
            Factorization f = nmf_fit(data.x, nc);
            features = normalized(f.h);
            row.final_cost = f.cost_trace.back();
            row.iters = f.iters_run;
          } else if (method == "aonmf") {
            AonmfConfig ac;
            ac.rank = k2;
            ac.lambda = cfg.lambda2;
            ac.seed = seed;
            ac.max_iters = cfg.max_iters;
            ac.tol = cfg.tol;
            AonmfResult f = aonmf_fit(data.x, ac);
            features = normalized(f.h);
            row.final_cost = f.cost_trace.back();
            row.iters = f.iters_run;
          } else {
            const DeepModel& model = deep_model(k2, seed);
            row.final_cost = model.final_cost;
            row.iters = model.iters_run;
            if (method == "argmax-daonmf") {
              direct = row_argmax(model.hs.back());
            } else {
              features = model.hs.back().matrix();
            }
          }
          Labels pred;
          if (direct) {
            pred = std::move(*direct);
          } else {
            KMeansConfig kc;
            kc.k = classes;
            kc.seed = seed;
            kc.restarts = cfg.kmeans_restarts;
            kc.max_iters = cfg.kmeans_max_iters;
            pred = kmeans(features, kc).labels;
          }
          row.acc = clustering_accuracy(pred, truth);
          row.nmi = nmi(pred, truth);
          row.status = "ok";
        } catch (const std::exception& e) {
          row.status = "error: " + sanitize(e.what());
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace daonmf::cli
