#include "daonmf/aonmf.hpp"

#include <algorithm>
#include <string>

#include "daonmf/error.hpp"
#include "daonmf/nmf.hpp"

namespace daonmf {

namespace {

void check_conforming(const Matrix& x, const Matrix& w, const Matrix& h, const char* who) {
  if (w.rows() != x.rows() || h.rows() != x.cols() || w.cols() != h.cols()) {
    throw DimError(std::string(who) + ": X is " + std::to_string(x.rows()) + "x" +
                   std::to_string(x.cols()) + ", W is " + std::to_string(w.rows()) + "x" +
                   std::to_string(w.cols()) + ", H is " + std::to_string(h.rows()) + "x" +
                   std::to_string(h.cols()));
  }
}

bool column_is_zero(const Matrix& m, std::size_t r) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (m(i, r) != 0.0) return false;
  return true;
}

// Recompute column r of X^T W and row/column r of W^T W after w_r changed.
void refresh_products(const Matrix& x, const Matrix& w, std::size_t r, Matrix& xtw,
                      Matrix& gram) {
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, j) * w(i, r);
    xtw(j, r) = s;
  }
  for (std::size_t k = 0; k < w.cols(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) s += w(i, k) * w(i, r);
    gram(k, r) = s;
    gram(r, k) = s;
  }
}

}  // namespace

double aonmf_cost(const Matrix& x, const Matrix& w, const Matrix& h, double lambda) {
  check_conforming(x, w, h, "aonmf_cost");
  const double fit = 0.5 * frobenius_sq(subtract(x, matmul_nt(w, h)));
  if (lambda == 0.0) return fit;
  return fit + 0.5 * lambda * offdiag_gram_mass(h);
}

std::vector<double> hals_update_h_col(const Matrix& x, const Matrix& w, const Matrix& h,
                                      std::size_t r, double lambda, double epsilon) {
  check_conforming(x, w, h, "hals_update_h_col");
  if (r >= h.cols()) throw IndexError("hals_update_h_col: column " + std::to_string(r));
  const std::vector<double> wr = column(w, r);
  const double wr2 = dot(wr, wr);
  if (wr2 < epsilon) {
    throw DegenerateColumn("hals_update_h_col: column " + std::to_string(r) + " of W is zero", r);
  }
  // W^T w_r
  std::vector<double> wtw(w.cols(), 0.0);
  for (std::size_t k = 0; k < w.cols(); ++k) wtw[k] = dot(column(w, k), wr);

  std::vector<double> out(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double xtw = 0.0;
    for (std::size_t m = 0; m < x.rows(); ++m) xtw += x(m, i) * wr[m];
    const double h_wtw = dot(h.row(i), wtw);
    double others = 0.0;
    for (std::size_t k = 0; k < h.cols(); ++k)
      if (k != r) others += h(i, k);
    out[i] = std::max(0.0, h(i, r) + (xtw - h_wtw) / wr2 - lambda * others / wr2);
  }
  return out;
}

std::vector<double> hals_update_w_col(const Matrix& x, const Matrix& w, const Matrix& h,
                                      std::size_t r, double epsilon) {
  check_conforming(x, w, h, "hals_update_w_col");
  if (r >= w.cols()) throw IndexError("hals_update_w_col: column " + std::to_string(r));
  const std::vector<double> hr = column(h, r);
  const double hr2 = dot(hr, hr);
  if (hr2 < epsilon) {
    throw DegenerateColumn("hals_update_w_col: column " + std::to_string(r) + " of H is zero", r);
  }
  std::vector<double> hth(h.cols(), 0.0);
  for (std::size_t k = 0; k < h.cols(); ++k) hth[k] = dot(column(h, k), hr);

  std::vector<double> out(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double xh = dot(x.row(i), hr);
    const double w_hth = dot(w.row(i), hth);
    out[i] = std::max(0.0, w(i, r) + (xh - w_hth) / hr2);
  }
  return out;
}

double ortho_residual(const Matrix& h) {
  Matrix normalized = h;
  normalize_columns(normalized);
  return offdiag_gram_mass(normalized);
}

namespace detail {

double mean_entry(const Matrix& x) noexcept {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x.data()) s += v;
  return s / static_cast<double>(x.size());
}

void HalsContext::fill_noise(Matrix& m, std::size_t r) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    m(i, r) = noise_scale * rng.uniform_open_closed(epsilon, 1.0);
  }
  ++reinitializations;
}

void hals_sweep_h(const Matrix& x, Matrix& w, Matrix& h, HalsContext& ctx) {
  const std::size_t n = h.rows();
  const std::size_t rank = h.cols();
  Matrix xtw = matmul_tn(x, w);   // N x R
  Matrix gram = matmul_tn(w, w);  // R x R

  std::vector<double> row_sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (double v : h.row(i)) row_sums[i] += v;

  for (std::size_t r = 0; r < rank; ++r) {
    if (gram(r, r) < ctx.epsilon) {
      ctx.degenerate_columns.push_back(r);
      if (ctx.revive_w) {
        ctx.revive_w(r, w);
        ++ctx.reinitializations;
      } else {
        ctx.fill_noise(w, r);
      }
      refresh_products(x, w, r, xtw, gram);
      if (gram(r, r) < ctx.epsilon) continue;
    }
    const double wr2 = gram(r, r);
    for (std::size_t i = 0; i < n; ++i) {
      const auto hi = h.row(i);
      double h_g = 0.0;
      for (std::size_t k = 0; k < rank; ++k) h_g += hi[k] * gram(k, r);
      const double old = hi[r];
      const double others = row_sums[i] - old;
      const double updated =
          std::max(0.0, old + (xtw(i, r) - h_g) / wr2 - ctx.lambda * others / wr2);
      h(i, r) = updated;
      row_sums[i] = others + updated;
    }
    if (column_is_zero(h, r)) {
      ctx.fill_noise(h, r);
      for (std::size_t i = 0; i < n; ++i) row_sums[i] += h(i, r);
      if (ctx.silence_w) {
        ctx.silence_w(r, w);
      } else {
        for (std::size_t i = 0; i < w.rows(); ++i) w(i, r) = 0.0;
      }
      refresh_products(x, w, r, xtw, gram);
    }
  }
}

void hals_sweep_w(const Matrix& x, Matrix& w, const Matrix& h, HalsContext& ctx) {
  const std::size_t m = w.rows();
  const std::size_t rank = w.cols();
  const Matrix xh = matmul(x, h);       // M x R
  const Matrix gram = matmul_tn(h, h);  // R x R

  for (std::size_t r = 0; r < rank; ++r) {
    const double hr2 = gram(r, r);
    if (hr2 < ctx.epsilon) {
      ctx.degenerate_columns.push_back(r);
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const auto wi = w.row(i);
      double w_g = 0.0;
      for (std::size_t k = 0; k < rank; ++k) w_g += wi[k] * gram(k, r);
      w(i, r) = std::max(0.0, wi[r] + (xh(i, r) - w_g) / hr2);
    }
  }
}

}  // namespace detail

AonmfResult aonmf_fit(const NonnegMatrix& x, const AonmfConfig& cfg) {
  detail::check_rank(cfg.rank, x.rows(), x.cols(), "aonmf_fit");
  if (cfg.max_iters == 0) throw ConfigError("aonmf_fit: max_iters must be positive");
  if (!(cfg.lambda >= 0.0)) throw ConfigError("aonmf_fit: lambda must be >= 0");
  if (!(cfg.tol >= 0.0)) throw ConfigError("aonmf_fit: tol must be >= 0");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("aonmf_fit: epsilon must be > 0");

  const Matrix& xm = x.matrix();
  auto [w0, h0] = init_factors(xm.rows(), xm.cols(), cfg.rank, cfg.seed, cfg.epsilon);
  Matrix w = std::move(w0).release();
  Matrix h = std::move(h0).release();

  detail::HalsContext ctx;
  ctx.lambda = cfg.lambda;
  ctx.epsilon = cfg.epsilon;
  const double mean = detail::mean_entry(xm);
  ctx.noise_scale = mean > 0.0 ? mean : 1.0;
  ctx.rng = Rng(derive_seed(cfg.seed, 0x4a0e));

  AonmfResult out;
  double cost = aonmf_cost(xm, w, h, cfg.lambda);
  out.cost_trace.push_back(cost);
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    detail::hals_sweep_h(xm, w, h, ctx);
    detail::hals_sweep_w(xm, w, h, ctx);
    const double next = aonmf_cost(xm, w, h, cfg.lambda);
    out.cost_trace.push_back(next);
    ++out.iters_run;
    const bool done = detail::converged(cost, next, cfg.tol);
    cost = next;
    if (done) break;
  }
  out.ortho_residual = ortho_residual(h);
  out.reinitializations = ctx.reinitializations;
  out.w = NonnegMatrix(std::move(w));
  out.h = NonnegMatrix(std::move(h));
  return out;
}

}  // namespace daonmf
