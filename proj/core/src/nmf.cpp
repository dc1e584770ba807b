#include "daonmf/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "daonmf/error.hpp"
#include "daonmf/rng.hpp"

namespace daonmf {

namespace detail {

void check_rank(std::size_t rank, std::size_t rows, std::size_t cols, const char* who) {
  if (rank == 0) throw ConfigError(std::string(who) + ": rank must be positive");
  if (rank > std::min(rows, cols)) {
    throw ConfigError(std::string(who) + ": rank " + std::to_string(rank) +
                      " exceeds min(" + std::to_string(rows) + ", " + std::to_string(cols) + ")");
  }
}

bool converged(double previous, double current, double tol) noexcept {
  if (previous == current) return true;
  const double scale = std::max(std::abs(previous), 1e-300);
  return std::abs(previous - current) / scale < tol;
}

void multiplicative_update_w(const Matrix& x, Matrix& w, const Matrix& h, double epsilon) {
  const Matrix numer = matmul(x, h);                  // M x R
  const Matrix denom = matmul(w, matmul_tn(h, h));    // M x R
  auto wd = w.data();
  auto nd = numer.data();
  auto dd = denom.data();
  for (std::size_t i = 0; i < wd.size(); ++i) wd[i] *= nd[i] / (dd[i] + epsilon);
}

void multiplicative_update_h(const Matrix& x, const Matrix& w, Matrix& h, double epsilon) {
  const Matrix numer = matmul_tn(x, w);               // N x R
  const Matrix denom = matmul(h, matmul_tn(w, w));    // N x R
  auto hd = h.data();
  auto nd = numer.data();
  auto dd = denom.data();
  for (std::size_t i = 0; i < hd.size(); ++i) hd[i] *= nd[i] / (dd[i] + epsilon);
}

}  // namespace detail

std::pair<NonnegMatrix, NonnegMatrix> init_factors(std::size_t m, std::size_t n,
                                                   std::size_t r, std::uint64_t seed,
                                                   double epsilon) {
  Rng rng(seed);
  Matrix w(m, r);
  Matrix h(n, r);
  for (double& v : w.data()) v = rng.uniform_open_closed(epsilon, 1.0);
  for (double& v : h.data()) v = rng.uniform_open_closed(epsilon, 1.0);
  return {NonnegMatrix(std::move(w)), NonnegMatrix(std::move(h))};
}

double nmf_cost(const Matrix& x, const Matrix& w, const Matrix& h) {
  return 0.5 * frobenius_sq(subtract(x, matmul_nt(w, h)));
}

Factorization nmf_fit(const NonnegMatrix& x, const NmfConfig& cfg) {
  detail::check_rank(cfg.rank, x.rows(), x.cols(), "nmf_fit");
  if (cfg.max_iters == 0) throw ConfigError("nmf_fit: max_iters must be positive");
  if (!(cfg.tol >= 0.0)) throw ConfigError("nmf_fit: tol must be >= 0");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("nmf_fit: epsilon must be > 0");

  Factorization out;
  const Matrix& xm = x.matrix();
  for (std::size_t i = 0; i < xm.rows(); ++i) {
    const auto row = xm.row(i);
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      out.warnings.push_back("row " + std::to_string(i) +
                             " of X is zero; multiplicative updates drive W's row to zero");
    }
  }
  for (std::size_t j = 0; j < xm.cols(); ++j) {
    bool zero = true;
    for (std::size_t i = 0; i < xm.rows() && zero; ++i) zero = xm(i, j) == 0.0;
    if (zero) {
      out.warnings.push_back("column " + std::to_string(j) +
                             " of X is zero; multiplicative updates drive H's row to zero");
    }
  }

  auto [w0, h0] = init_factors(xm.rows(), xm.cols(), cfg.rank, cfg.seed, cfg.epsilon);
  Matrix w = std::move(w0).release();
  Matrix h = std::move(h0).release();

  double cost = nmf_cost(xm, w, h);
  out.cost_trace.push_back(cost);
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    detail::multiplicative_update_h(xm, w, h, cfg.epsilon);
    detail::multiplicative_update_w(xm, w, h, cfg.epsilon);
    const double next = nmf_cost(xm, w, h);
    out.cost_trace.push_back(next);
    ++out.iters_run;
    const bool done = detail::converged(cost, next, cfg.tol);
    cost = next;
    if (done) break;
  }
  out.w = NonnegMatrix(std::move(w));
  out.h = NonnegMatrix(std::move(h));
  return out;
}

}  // namespace daonmf
