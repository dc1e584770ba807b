#include "cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cli/experiment.hpp"
#include "daonmf/aonmf.hpp"
#include "daonmf/clustering.hpp"
#include "daonmf/data.hpp"
#include "daonmf/deep.hpp"
#include "daonmf/error.hpp"
#include "daonmf/nmf.hpp"

namespace daonmf::cli {

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  std::size_t k = 0;
  std::size_t n_per = 0;
  std::size_t m = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct FactorizeArgs {
  std::string method = "aonmf";
  std::size_t rank = 0;
  double lambda = 0.0;
  std::size_t iters = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::string out;
  std::string input;
};

struct DeepArgs {
  std::vector<std::size_t> layers;
  std::vector<double> lambdas{0.0};
  std::size_t iters = 200;
  std::size_t pretrain_iters = 500;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  std::string penalty_form = "objective";
  std::string out;
  std::string input;
};

struct ClusterArgs {
  std::string features;
  std::size_t k = 0;
  bool argmax = false;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t iters = 300;
  std::string out;
};

struct EvaluateArgs {
  std::string dir;
  std::string truth;
  std::string pred;
  std::string features;
  std::string method = "kmeans";
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
};

struct ExperimentArgs {
  std::string config;
  std::string out;
};

fs::path default_output(const std::string& input, const char* leaf) {
  const fs::path in(input);
  if (fs::is_directory(in)) return in / leaf;
  return in.parent_path() / (in.stem().string() + "_" + leaf);
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const Dataset data = synth_planted(a.k, a.n_per, a.m, a.noise, a.seed);
  save_dataset(a.out, data);
  out << "wrote " << data.x.rows() << "x" << data.x.cols() << " planted dataset ("
      << a.k << " clusters) to " << a.out << '\n';
  return kOk;
}

int cmd_factorize(const FactorizeArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.input);
  const fs::path dir = a.out.empty() ? default_output(a.input, "factors") : fs::path(a.out);
  Matrix w;
  Matrix h;
  std::vector<double> trace;
  std::size_t iters = 0;
  if (a.method == "nmf") {
    NmfConfig cfg;
    cfg.rank = a.rank;
    cfg.max_iters = a.iters;
    cfg.tol = a.tol;
    cfg.seed = a.seed;
    Factorization f = nmf_fit(data.x, cfg);
    for (const auto& warning : f.warnings) out << "warning: " << warning << '\n';
    w = f.w.matrix();
    h = f.h.matrix();
    trace = std::move(f.cost_trace);
    iters = f.iters_run;
  } else if (a.method == "aonmf") {
    AonmfConfig cfg;
    cfg.rank = a.rank;
    cfg.lambda = a.lambda;
    cfg.max_iters = a.iters;
    cfg.tol = a.tol;
    cfg.seed = a.seed;
    AonmfResult f = aonmf_fit(data.x, cfg);
    w = f.w.matrix();
    h = f.h.matrix();
    trace = std::move(f.cost_trace);
    iters = f.iters_run;
    out << "ortho_residual " << f.ortho_residual << '\n';
  } else {
    throw ConfigError("factorize: unknown method '" + a.method + "'");
  }
  fs::create_directories(dir);
  save_matrix(dir / "W.mat", w);
  save_matrix(dir / "H.mat", h);
  {
    std::ofstream t(dir / "cost_trace.txt");
    t.precision(17);
    for (double c : trace) t << c << '\n';
  }
  out << a.method << " rank " << a.rank << ": " << iters << " iterations, final cost "
      << trace.back() << ", factors in " << dir.string() << '\n';
  return kOk;
}

int cmd_deep(const DeepArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.input);
  const fs::path dir = a.out.empty() ? default_output(a.input, "model") : fs::path(a.out);
  DeepConfig cfg;
  cfg.max_iters = a.iters;
  cfg.pretrain_iters = a.pretrain_iters;
  cfg.tol = a.tol;
  cfg.seed = a.seed;
  if (a.penalty_form == "paper") {
    cfg.penalty_form = PenaltyForm::kPaper;
  } else if (a.penalty_form != "objective") {
    throw ConfigError("deep-factorize: --penalty-form must be 'objective' or 'paper'");
  }
  const DeepModel model = train(data.x, LayerSpec::make(a.layers, a.lambdas), cfg);
  save_model(dir, model);
  out << "trained " << model.depth() << "-layer model: " << model.iters_run
      << " fine-tuning passes, final cost " << model.final_cost << ", written to "
      << dir.string() << '\n';
  return kOk;
}

Labels cluster_features(const Matrix& features, std::size_t k, bool argmax, std::uint64_t seed,
                        std::size_t restarts, std::size_t iters) {
  if (argmax) return row_argmax(features);
  KMeansConfig kc;
  kc.k = k;
  kc.seed = seed;
  kc.restarts = restarts;
  kc.max_iters = iters;
  return kmeans(features, kc).labels;
}

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
  if (!a.argmax && a.k == 0) throw ConfigError("cluster: --k is required unless --argmax is given");
  Matrix features = read_matrix_file(a.features);
  normalize_columns(features);
  const Labels labels = cluster_features(features, a.k, a.argmax, a.seed, a.restarts, a.iters);
  if (a.out.empty()) {
    for (std::size_t v : labels) out << v << '\n';
  } else {
    save_labels(a.out, labels);
    out << "wrote " << labels.size() << " labels to " << a.out << '\n';
  }
  return kOk;
}

// The last H factor of a factors/ or model/ directory under `dir`.
fs::path find_features(const fs::path& dir) {
  if (fs::exists(dir / "factors" / "H.mat")) return dir / "factors" / "H.mat";
  if (fs::exists(dir / "model" / "meta")) {
    const DeepModel model = load_model(dir / "model");
    return dir / "model" / ("H" + std::to_string(model.depth()) + ".mat");
  }
  throw InvalidData(dir.string() + ": no factors/H.mat or model/ to evaluate");
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  fs::path truth_path = a.truth;
  fs::path features_path = a.features;
  if (!a.dir.empty()) {
    if (truth_path.empty()) truth_path = fs::path(a.dir) / "labels.txt";
    if (features_path.empty() && a.pred.empty()) features_path = find_features(a.dir);
  }
  if (truth_path.empty()) throw ConfigError("evaluate: ground truth labels are required");
  const Labels truth = load_labels(truth_path);
  Labels pred;
  if (!a.pred.empty()) {
    pred = load_labels(a.pred);
  } else if (!features_path.empty()) {
    Matrix features = read_matrix_file(features_path);
    if (features.rows() != truth.size()) {
      throw InvalidData(features_path.string() + ": " + std::to_string(features.rows()) +
                        " feature rows for " + std::to_string(truth.size()) + " labels");
    }
    normalize_columns(features);
    pred = cluster_features(features, count_classes(truth), false, a.seed, a.restarts, 300);
  } else {
    throw ConfigError("evaluate: give --pred, --features, or a dataset directory");
  }
  const EvalReport report = evaluate(pred, truth, a.method, a.seed);
  out << EvalReport::csv_header() << '\n' << report.to_csv_row() << '\n';
  return kOk;
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  ExperimentConfig cfg = ExperimentConfig::load(a.config);
  if (!a.out.empty()) cfg.output = a.out;
  const std::string csv = run_experiment(cfg).to_csv();
  if (cfg.output.empty()) {
    out << csv;
    return kOk;
  }
  if (cfg.output.has_parent_path()) fs::create_directories(cfg.output.parent_path());
  std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidData(cfg.output.string() + ": cannot write report");
  file << csv;
  out << "wrote " << cfg.output.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep approximately orthogonal NMF: factorization and clustering toolkit", "daonmf"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a planted block-cluster dataset");
  s->add_option("--k", synth.k, "Number of clusters")->required();
  s->add_option("--n-per", synth.n_per, "Samples per cluster")->required();
  s->add_option("--m", synth.m, "Number of features")->required();
  s->add_option("--noise", synth.noise, "Magnitude of |N(0,1)| noise");
  s->add_option("--seed", synth.seed, "RNG seed");
  s->add_option("--out", synth.out, "Output dataset directory")->required();

  FactorizeArgs fact;
  auto* f = app.add_subcommand("factorize", "Single-layer NMF or AONMF");
  f->add_option("--method", fact.method, "nmf or aonmf")->check(CLI::IsMember({"nmf", "aonmf"}));
  f->add_option("--rank", fact.rank, "Factorization rank")->required();
  f->add_option("--lambda", fact.lambda, "Orthogonality penalty weight");
  f->add_option("--iters", fact.iters, "Maximum iterations");
  f->add_option("--tol", fact.tol, "Relative cost-change tolerance");
  f->add_option("--seed", fact.seed, "RNG seed");
  f->add_option("--out", fact.out, "Output directory (default: <dataset>/factors)");
  f->add_option("dataset", fact.input, "Dataset directory or matrix file")->required();

  DeepArgs deep;
  auto* d = app.add_subcommand("deep-factorize", "Train a deep approximately orthogonal NMF");
  d->add_option("--layers", deep.layers, "Layer widths d1,...,dL")->required()->delimiter(',');
  d->add_option("--lambda", deep.lambdas, "Penalty weights (one, or one per layer)")->delimiter(',');
  d->add_option("--iters", deep.iters, "Maximum fine-tuning passes");
  d->add_option("--pretrain-iters", deep.pretrain_iters, "AONMF iterations per pretraining layer");
  d->add_option("--tol", deep.tol, "Relative cost-change tolerance");
  d->add_option("--seed", deep.seed, "RNG seed");
  d->add_option("--penalty-form", deep.penalty_form, "objective or paper");
  d->add_option("--out", deep.out, "Model directory (default: <dataset>/model)");
  d->add_option("dataset", deep.input, "Dataset directory or matrix file")->required();

  ClusterArgs clus;
  auto* c = app.add_subcommand("cluster", "Cluster the rows of a factor matrix");
  c->add_option("--features", clus.features, "Factor matrix file (one sample per row)")->required();
  c->add_option("--k", clus.k, "Number of clusters");
  c->add_flag("--argmax", clus.argmax, "Label each row by its largest entry");
  c->add_option("--seed", clus.seed, "RNG seed");
  c->add_option("--restarts", clus.restarts, "K-means restarts");
  c->add_option("--iters", clus.iters, "Maximum Lloyd iterations");
  c->add_option("--out", clus.out, "Label file (default: standard output)");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "ACC and NMI against ground-truth labels");
  e->add_option("dataset", eval.dir, "Dataset directory holding labels.txt and factors/ or model/");
  e->add_option("--truth", eval.truth, "Ground-truth label file");
  e->add_option("--pred", eval.pred, "Predicted label file");
  e->add_option("--features", eval.features, "Factor matrix to cluster with K-means");
  e->add_option("--method", eval.method, "Method name for the report row");
  e->add_option("--seed", eval.seed, "K-means seed");
  e->add_option("--restarts", eval.restarts, "K-means restarts");

  ExperimentArgs exp;
  auto* x = app.add_subcommand("experiment", "Run a clustering sweep from a JSON config");
  x->add_option("config", exp.config, "Experiment config (JSON)")->required();
  x->add_option("--out", exp.out, "CSV report path (overrides the config)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kConfigError;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (f->parsed()) return cmd_factorize(fact, out);
    if (d->parsed()) return cmd_deep(deep, out);
    if (c->parsed()) return cmd_cluster(clus, out);
    if (e->parsed()) return cmd_evaluate(eval, out);
    if (x->parsed()) return cmd_experiment(exp, out);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const Error& ex) {
    err << "data error: " << ex.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& ex) {
    err << "data error: " << ex.what() << '\n';
    return kDataError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace daonmf::cli
