#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "daonmf/matrix.hpp"
#include "daonmf/rng.hpp"

namespace daonmf {

struct AonmfConfig {
  std::size_t rank = 1;
  // Weight of the off-diagonal penalty on H^T H; 0 gives plain NMF.
  double lambda = 0.0;
  std::size_t max_iters = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  double epsilon = 1e-12;
};

struct AonmfResult {
  NonnegMatrix w;  // M x R
  NonnegMatrix h;  // N x R
  std::vector<double> cost_trace;
  std::size_t iters_run = 0;
  // Off-diagonal mass of H^T H after scaling every column of H to unit norm.
  double ortho_residual = 0.0;
  // Columns replaced by positive noise because they collapsed to zero.
  std::size_t reinitializations = 0;
};

// 0.5 * ||X - W H^T||_F^2 + (lambda / 2) * sum_r sum_{j != r} h_r^T h_j
double aonmf_cost(const Matrix& x, const Matrix& w, const Matrix& h, double lambda);

// Projected closed-form minimizer of the cost over column r of H:
//   P+( h_r + (X^T w_r - H (W^T w_r)) / (w_r^T w_r) - lambda * Hbreve_r 1 / (w_r^T w_r) )
// where Hbreve_r is H without column r. Throws DegenerateColumn if
// w_r^T w_r < epsilon.
std::vector<double> hals_update_h_col(const Matrix& x, const Matrix& w, const Matrix& h,
                                      std::size_t r, double lambda, double epsilon = 1e-12);

// P+( w_r + (X h_r - W (H^T h_r)) / (h_r^T h_r) ). Throws DegenerateColumn if
// h_r^T h_r < epsilon.
std::vector<double> hals_update_w_col(const Matrix& x, const Matrix& w, const Matrix& h,
                                      std::size_t r, double epsilon = 1e-12);

// Off-diagonal mass of H^T H on the column-normalized copy of H.
double ortho_residual(const Matrix& h);

// HALS block coordinate descent: per outer iteration all columns of H in index
// order, then all columns of W. Collapsed columns are reinitialized, never fatal.
AonmfResult aonmf_fit(const NonnegMatrix& x, const AonmfConfig& cfg);

namespace detail {

// Shared state of a run of sweeps. Column updates are sequential: each one
// sees the columns already updated earlier in the same sweep.
struct HalsContext {
  double lambda = 0.0;
  double epsilon = 1e-12;
  // Magnitude of replacement noise for collapsed columns.
  double noise_scale = 1.0;
  Rng rng{0};
  // Makes column r of W nonzero (and whatever W is derived from). Default:
  // positive noise in w_r.
  std::function<void(std::size_t, Matrix&)> revive_w;
  // Zeroes column r of W (and whatever W is derived from). Default: w_r = 0.
  std::function<void(std::size_t, Matrix&)> silence_w;
  std::size_t reinitializations = 0;
  // H columns whose divisor w_r was degenerate, in order of occurrence.
  std::vector<std::size_t> degenerate_columns;

  void fill_noise(Matrix& m, std::size_t r);
};

// One H sweep against fixed W, in place. X^T W and W^T W are formed once per
// sweep, which is algebraically the same as calling hals_update_h_col column
// by column.
//  - w_r degenerate: revive_w(r) then update h_r. The fresh h_r is the exact
//    minimizer, so the cost cannot rise above its value with h_r = 0.
//  - h_r projects to all zeros: h_r becomes positive noise and silence_w(r)
//    removes w_r, so the reconstruction is unchanged; only the penalty moves.
void hals_sweep_h(const Matrix& x, Matrix& w, Matrix& h, HalsContext& ctx);

// One W sweep against fixed H, in place. A column with degenerate h_r is left
// untouched and recorded.
void hals_sweep_w(const Matrix& x, Matrix& w, const Matrix& h, HalsContext& ctx);

double mean_entry(const Matrix& x) noexcept;

}  // namespace detail

}  // namespace daonmf
