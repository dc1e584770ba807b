#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "daonmf/matrix.hpp"

namespace daonmf {

// Layer widths d_1..d_L and per-layer penalty weights lambda_1..lambda_L.
struct LayerSpec {
  std::vector<std::size_t> sizes;
  std::vector<double> lambdas;

  // A single lambda is broadcast to every layer.
  static LayerSpec make(std::vector<std::size_t> sizes, std::vector<double> lambdas);

  std::size_t depth() const noexcept { return sizes.size(); }
  // Throws ConfigError on an empty spec, a zero width, a negative lambda, or a
  // lambda count that matches neither 1 nor L.
  void validate() const;
};

// How the penalty enters the mid-layer multiplicative rule.
enum class PenaltyForm {
  // Gradient lambda * H (1 - I) of the off-diagonal mass of H^T H.
  kObjective,
  // Gradient lambda * H 1 (diagonal included), the printed form of the rule.
  kPaper,
};

struct DeepConfig {
  // Per-layer AONMF pretraining budget.
  std::size_t pretrain_iters = 500;
  double pretrain_tol = 1e-6;
  // Fine-tuning: outer passes and relative cost-change threshold.
  std::size_t max_iters = 200;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  double epsilon = 1e-12;
  PenaltyForm penalty_form = PenaltyForm::kObjective;
};

// X ~= W1 H1^T H2^T ... HL^T. H_l is d_{l+1} x d_l for l < L and HL is N x d_L.
// W_l for l >= 2 is never stored; see layer_basis().
struct DeepModel {
  NonnegMatrix w1;
  std::vector<NonnegMatrix> hs;
  LayerSpec spec;
  // deep_cost after each fine-tuning pass, taken before HL is normalized.
  std::vector<double> cost_trace;
  std::size_t iters_run = 0;
  // deep_cost of the returned (normalized) model.
  double final_cost = 0.0;
  std::size_t reinitializations = 0;

  std::size_t depth() const noexcept { return hs.size(); }
};

// Layer-wise AONMF from the top: X ~= W_L H_L^T, then W_L ~= W_{L-1} H_{L-1}^T,
// down to W_2 ~= W_1 H_1^T. The top layer uses cfg.seed unchanged so that
// L = 1 is exactly aonmf_fit. Throws ConfigError naming the infeasible layer.
DeepModel pretrain(const NonnegMatrix& x, const LayerSpec& spec, const DeepConfig& cfg);

// 0.5 ||X - W1 H1^T ... HL^T||^2 + sum_l (lambda_l / 2) offdiag(H_l^T H_l).
double deep_cost(const Matrix& x, const DeepModel& model);

// Phi = H1^T H2^T ... HL^T  (d_1 x N).
Matrix chain_phi(const DeepModel& model);
// Psi_l = H_{l+1}^T ... HL^T for the 0-based layer index l < L - 1.
Matrix chain_psi(const DeepModel& model, std::size_t layer);
// W_l = W1 H1^T ... H_{l-1}^T for the 0-based layer index (layer 0 gives W1).
Matrix layer_basis(const DeepModel& model, std::size_t layer);
// W1 H1^T ... HL^T
Matrix reconstruct(const DeepModel& model);

// W1 <- W1 .* (X Phi^T) ./ (W1 Phi Phi^T + eps).
NonnegMatrix update_w1(const Matrix& x, const DeepModel& model, double epsilon = 1e-12);

// Negative and positive parts of the gradient of the mid-layer objective
//   0.5 ||X - W_l H_l^T Psi||^2 + penalty(H_l)
// with respect to H_l, so that gradient = positive - negative.
struct GradientSplit {
  Matrix negative;  // Psi X^T W_l
  Matrix positive;  // Psi Psi^T H_l W_l^T W_l + penalty gradient
};

GradientSplit mid_layer_gradient(const Matrix& x, const DeepModel& model, std::size_t layer,
                                 PenaltyForm form = PenaltyForm::kObjective);

// The objective whose gradient mid_layer_gradient splits. The kObjective
// penalty is (lambda/2) offdiag(H^T H); kPaper uses (lambda/2) 1^T (H^T H - I) 1.
double mid_layer_objective(const Matrix& x, const DeepModel& model, std::size_t layer,
                           PenaltyForm form = PenaltyForm::kObjective);

// H_l <- H_l .* negative ./ (positive + eps), for 0-based layer < L - 1.
// Throws DimError on a bad layer index.
NonnegMatrix update_h_mid(const Matrix& x, const DeepModel& model, std::size_t layer,
                          PenaltyForm form = PenaltyForm::kObjective, double epsilon = 1e-12);

struct LastLayerUpdate {
  NonnegMatrix h;
  // The factor W_L is built from: W1 when L = 1, otherwise H_{L-1}. It only
  // differs from the model's copy when a column had to be revived or removed.
  NonnegMatrix adjacent;
  // Columns r for which (W_L)_r was zero when h_r came up for update.
  std::vector<std::size_t> degenerate_columns;
  std::size_t reinitializations = 0;
};

// HALS sweep over every column of HL against W_L = W1 H1^T ... H_{L-1}^T with
// lambda_L. A zero (W_L)_r is revived through the adjacent factor (noise in
// column r of W1, or row r of H_{L-1}) before h_r is solved; an h_r that
// collapses to zero is replaced by noise and (W_L)_r is removed the same way.
LastLayerUpdate update_h_last(const Matrix& x, const DeepModel& model, std::uint64_t seed = 0,
                              double epsilon = 1e-12);

// Pretraining followed by fine-tuning passes. Each pass visits l = 1..L:
// update W1, rebuild W_l, then update H_l (multiplicative for l < L, HALS for
// HL). After each pass the columns of HL are scaled to unit norm and the scale
// is moved into the adjacent factor, so the reconstruction is unchanged.
DeepModel train(const NonnegMatrix& x, const LayerSpec& spec, const DeepConfig& cfg);

// Scales HL's columns to unit norm, multiplying the matching rows of H_{L-1}
// (or columns of W1 when L = 1) by the removed scale.
void normalize_last_layer(DeepModel& model);

}  // namespace daonmf
