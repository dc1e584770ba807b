#include "daonmf/deep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "daonmf/aonmf.hpp"
#include "daonmf/error.hpp"
#include "daonmf/nmf.hpp"
#include "daonmf/rng.hpp"

namespace daonmf {

namespace {

void check_layer(const DeepModel& model, std::size_t layer, std::size_t limit, const char* who) {
  if (layer >= limit) {
    throw DimError(std::string(who) + ": layer index " + std::to_string(layer) +
                   " out of range for a " + std::to_string(model.depth()) + "-layer model");
  }
}

void check_model(const Matrix& x, const DeepModel& model, const char* who) {
  const std::size_t depth = model.depth();
  if (depth == 0) throw DimError(std::string(who) + ": model has no layers");
  bool ok = model.w1.rows() == x.rows() && model.w1.cols() == model.hs[0].cols();
  for (std::size_t l = 0; ok && l + 1 < depth; ++l) {
    ok = model.hs[l].rows() == model.hs[l + 1].cols();
  }
  ok = ok && model.hs[depth - 1].rows() == x.cols();
  if (!ok) throw DimError(std::string(who) + ": factor chain does not conform to X");
}

double penalty_weight(const DeepModel& model, std::size_t layer) {
  return model.spec.lambdas.empty() ? 0.0 : model.spec.lambdas[layer];
}

// H_from^T ... HL^T, evaluated right to left.
Matrix chain_from(const DeepModel& model, std::size_t from) {
  const std::size_t depth = model.depth();
  Matrix p = transpose(model.hs[depth - 1].matrix());
  for (std::size_t l = depth - 1; l-- > from;) p = matmul_tn(model.hs[l].matrix(), p);
  return p;
}

}  // namespace

LayerSpec LayerSpec::make(std::vector<std::size_t> sizes, std::vector<double> lambdas) {
  if (lambdas.size() == 1 && sizes.size() > 1) lambdas.assign(sizes.size(), lambdas.front());
  LayerSpec spec{std::move(sizes), std::move(lambdas)};
  spec.validate();
  return spec;
}

void LayerSpec::validate() const {
  if (sizes.empty()) throw ConfigError("layer spec: at least one layer is required");
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    if (sizes[l] == 0) throw ConfigError("layer " + std::to_string(l + 1) + ": width must be positive");
  }
  if (lambdas.size() != sizes.size()) {
    throw ConfigError("layer spec: " + std::to_string(lambdas.size()) + " lambdas for " +
                      std::to_string(sizes.size()) + " layers");
  }
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    if (!(lambdas[l] >= 0.0) || !std::isfinite(lambdas[l])) {
      throw ConfigError("layer " + std::to_string(l + 1) + ": lambda must be finite and >= 0");
    }
  }
}

DeepModel pretrain(const NonnegMatrix& x, const LayerSpec& spec, const DeepConfig& cfg) {
  spec.validate();
  const std::size_t depth = spec.depth();
  for (std::size_t l = depth; l-- > 0;) {
    const std::size_t cols = (l + 1 == depth) ? x.cols() : spec.sizes[l + 1];
    if (spec.sizes[l] > std::min(x.rows(), cols)) {
      throw ConfigError("layer " + std::to_string(l + 1) + ": width " +
                        std::to_string(spec.sizes[l]) + " exceeds min(" +
                        std::to_string(x.rows()) + ", " + std::to_string(cols) +
                        ") of the matrix it factorizes");
    }
  }

  DeepModel model;
  model.spec = spec;
  model.hs.resize(depth);
  NonnegMatrix current = x;
  for (std::size_t l = depth; l-- > 0;) {
    AonmfConfig layer_cfg;
    layer_cfg.rank = spec.sizes[l];
    layer_cfg.lambda = spec.lambdas[l];
    layer_cfg.max_iters = cfg.pretrain_iters;
    layer_cfg.tol = cfg.pretrain_tol;
    layer_cfg.seed = (l + 1 == depth) ? cfg.seed : derive_seed(cfg.seed, l);
    layer_cfg.epsilon = cfg.epsilon;
    AonmfResult fit = aonmf_fit(current, layer_cfg);
    model.reinitializations += fit.reinitializations;
    model.hs[l] = std::move(fit.h);
    current = std::move(fit.w);
  }
  model.w1 = std::move(current);
  model.final_cost = deep_cost(x, model);
  return model;
}

Matrix chain_phi(const DeepModel& model) {
  if (model.depth() == 0) throw DimError("chain_phi: model has no layers");
  return chain_from(model, 0);
}

Matrix chain_psi(const DeepModel& model, std::size_t layer) {
  check_layer(model, layer, model.depth() == 0 ? 0 : model.depth() - 1, "chain_psi");
  return chain_from(model, layer + 1);
}

Matrix layer_basis(const DeepModel& model, std::size_t layer) {
  check_layer(model, layer, model.depth(), "layer_basis");
  Matrix basis = model.w1.matrix();
  for (std::size_t i = 0; i < layer; ++i) basis = matmul_nt(basis, model.hs[i].matrix());
  return basis;
}

Matrix reconstruct(const DeepModel& model) { return matmul(model.w1.matrix(), chain_phi(model)); }

double deep_cost(const Matrix& x, const DeepModel& model) {
  check_model(x, model, "deep_cost");
  double cost = 0.5 * frobenius_sq(subtract(x, reconstruct(model)));
  for (std::size_t l = 0; l < model.depth(); ++l) {
    const double lambda = penalty_weight(model, l);
    if (lambda != 0.0) cost += 0.5 * lambda * offdiag_gram_mass(model.hs[l].matrix());
  }
  return cost;
}

NonnegMatrix update_w1(const Matrix& x, const DeepModel& model, double epsilon) {
  check_model(x, model, "update_w1");
  const Matrix phi = chain_phi(model);
  Matrix w1 = model.w1.matrix();
  detail::multiplicative_update_w(x, w1, transpose(phi), epsilon);
  return NonnegMatrix(std::move(w1));
}

GradientSplit mid_layer_gradient(const Matrix& x, const DeepModel& model, std::size_t layer,
                                 PenaltyForm form) {
  check_model(x, model, "mid_layer_gradient");
  check_layer(model, layer, model.depth() - 1, "mid_layer_gradient");
  const Matrix basis = layer_basis(model, layer);  // M x d_l
  const Matrix psi = chain_psi(model, layer);      // d_{l+1} x N
  const Matrix& h = model.hs[layer].matrix();      // d_{l+1} x d_l

  GradientSplit split;
  split.negative = matmul(psi, matmul_tn(x, basis));
  split.positive = matmul(matmul(matmul_nt(psi, psi), h), matmul_tn(basis, basis));

  const double lambda = penalty_weight(model, layer);
  if (lambda != 0.0) {
    for (std::size_t i = 0; i < h.rows(); ++i) {
      double row_sum = 0.0;
      for (double v : h.row(i)) row_sum += v;
      for (std::size_t j = 0; j < h.cols(); ++j) {
        const double rest = form == PenaltyForm::kObjective ? row_sum - h(i, j) : row_sum;
        split.positive(i, j) += lambda * rest;
      }
    }
  }
  return split;
}

double mid_layer_objective(const Matrix& x, const DeepModel& model, std::size_t layer,
                           PenaltyForm form) {
  check_model(x, model, "mid_layer_objective");
  check_layer(model, layer, model.depth() - 1, "mid_layer_objective");
  const Matrix basis = layer_basis(model, layer);
  const Matrix psi = chain_psi(model, layer);
  const Matrix& h = model.hs[layer].matrix();
  const Matrix fit = matmul(matmul_nt(basis, h), psi);
  double cost = 0.5 * frobenius_sq(subtract(x, fit));
  const double lambda = penalty_weight(model, layer);
  double mass = offdiag_gram_mass(h);
  if (form == PenaltyForm::kPaper) {
    mass += frobenius_sq(h) - static_cast<double>(h.cols());
  }
  cost += 0.5 * lambda * mass;
  return cost;
}

NonnegMatrix update_h_mid(const Matrix& x, const DeepModel& model, std::size_t layer,
                          PenaltyForm form, double epsilon) {
  const GradientSplit split = mid_layer_gradient(x, model, layer, form);
  Matrix h = model.hs[layer].matrix();
  auto hd = h.data();
  auto nd = split.negative.data();
  auto pd = split.positive.data();
  for (std::size_t i = 0; i < hd.size(); ++i) hd[i] *= nd[i] / (pd[i] + epsilon);
  return NonnegMatrix(std::move(h));
}

LastLayerUpdate update_h_last(const Matrix& x, const DeepModel& model, std::uint64_t seed,
                              double epsilon) {
  check_model(x, model, "update_h_last");
  const std::size_t last = model.depth() - 1;
  Matrix h = model.hs[last].matrix();

  detail::HalsContext ctx;
  ctx.lambda = penalty_weight(model, last);
  ctx.epsilon = epsilon;
  const double mean = detail::mean_entry(x);
  ctx.noise_scale = mean > 0.0 ? mean : 1.0;
  ctx.rng = Rng(seed);

  if (last == 0) {
    // W_L is W1 itself; the default hooks edit it directly.
    Matrix w1 = model.w1.matrix();
    detail::hals_sweep_h(x, w1, h, ctx);
    return {NonnegMatrix(std::move(h)), NonnegMatrix(std::move(w1)),
            std::move(ctx.degenerate_columns), ctx.reinitializations};
  }

  // Column r of W_L = W_{L-1} H_{L-1}^T is W_{L-1} times row r of H_{L-1}.
  const Matrix below = layer_basis(model, last - 1);
  Matrix adjacent = model.hs[last - 1].matrix();
  const double adj_mean = detail::mean_entry(adjacent);
  const double adj_scale = adj_mean > 0.0 ? adj_mean : 1.0;
  auto sync_column = [&](std::size_t r, Matrix& w) {
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, r) = dot(below.row(i), adjacent.row(r));
  };
  ctx.revive_w = [&](std::size_t r, Matrix& w) {
    for (double& v : adjacent.row(r)) v = adj_scale * ctx.rng.uniform_open_closed(epsilon, 1.0);
    sync_column(r, w);
  };
  ctx.silence_w = [&](std::size_t r, Matrix& w) {
    for (double& v : adjacent.row(r)) v = 0.0;
    sync_column(r, w);
  };
  Matrix basis = matmul_nt(below, adjacent);
  detail::hals_sweep_h(x, basis, h, ctx);
  return {NonnegMatrix(std::move(h)), NonnegMatrix(std::move(adjacent)),
          std::move(ctx.degenerate_columns), ctx.reinitializations};
}

void normalize_last_layer(DeepModel& model) {
  const std::size_t depth = model.depth();
  Matrix last = std::move(model.hs[depth - 1]).release();
  const std::vector<double> norms = normalize_columns(last);
  model.hs[depth - 1] = NonnegMatrix(std::move(last));

  if (depth == 1) {
    Matrix w1 = std::move(model.w1).release();
    for (std::size_t i = 0; i < w1.rows(); ++i)
      for (std::size_t r = 0; r < w1.cols(); ++r)
        if (norms[r] > 0.0) w1(i, r) *= norms[r];
    model.w1 = NonnegMatrix(std::move(w1));
  } else {
    // Column r of H_{L-1}^T is row r of H_{L-1}.
    Matrix prev = std::move(model.hs[depth - 2]).release();
    for (std::size_t r = 0; r < prev.rows(); ++r)
      if (norms[r] > 0.0)
        for (double& v : prev.row(r)) v *= norms[r];
    model.hs[depth - 2] = NonnegMatrix(std::move(prev));
  }
}

DeepModel train(const NonnegMatrix& x, const LayerSpec& spec, const DeepConfig& cfg) {
  if (!(cfg.tol >= 0.0)) throw ConfigError("train: tol must be >= 0");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("train: epsilon must be > 0");
  DeepModel model = pretrain(x, spec, cfg);
  const Matrix& xm = x.matrix();
  const std::size_t depth = model.depth();

  double previous = deep_cost(xm, model);
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    for (std::size_t l = 0; l < depth; ++l) {
      model.w1 = update_w1(xm, model, cfg.epsilon);
      if (l + 1 < depth) {
        model.hs[l] = update_h_mid(xm, model, l, cfg.penalty_form, cfg.epsilon);
      } else {
        LastLayerUpdate upd =
            update_h_last(xm, model, derive_seed(cfg.seed, 0x10000 + it), cfg.epsilon);
        model.reinitializations += upd.reinitializations;
        model.hs[l] = std::move(upd.h);
        if (l == 0) {
          model.w1 = std::move(upd.adjacent);
        } else {
          model.hs[l - 1] = std::move(upd.adjacent);
        }
      }
    }
    const double cost = deep_cost(xm, model);
    model.cost_trace.push_back(cost);
    ++model.iters_run;
    normalize_last_layer(model);
    const bool done = detail::converged(previous, cost, cfg.tol);
    previous = cost;
    if (done) break;
  }
  if (cfg.max_iters == 0) normalize_last_layer(model);
  model.final_cost = deep_cost(xm, model);
  return model;
}

}  // namespace daonmf
