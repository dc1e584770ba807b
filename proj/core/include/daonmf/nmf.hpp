#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "daonmf/matrix.hpp"

namespace daonmf {

struct NmfConfig {
  std::size_t rank = 1;
  std::size_t max_iters = 500;
  // Stop once |cost(t-1) - cost(t)| / cost(t-1) < tol.
  double tol = 1e-6;
  std::uint64_t seed = 0;
  // Added to every multiplicative denominator.
  double epsilon = 1e-12;
};

// X ~= W H^T with W (M x R) and H (N x R).
struct Factorization {
  NonnegMatrix w;
  NonnegMatrix h;
  // cost_trace[0] is the cost at initialization, then one entry per iteration.
  std::vector<double> cost_trace;
  std::size_t iters_run = 0;
  std::vector<std::string> warnings;
};

// Strictly positive factors, entries i.i.d. uniform on (epsilon, 1].
std::pair<NonnegMatrix, NonnegMatrix> init_factors(std::size_t m, std::size_t n,
                                                   std::size_t r, std::uint64_t seed,
                                                   double epsilon = 1e-12);

// 0.5 * ||X - W H^T||_F^2
double nmf_cost(const Matrix& x, const Matrix& w, const Matrix& h);

// Lee-Seung multiplicative updates for 0.5 * ||X - W H^T||_F^2.
// Throws ConfigError when the rank exceeds min(M, N) or the settings are invalid.
Factorization nmf_fit(const NonnegMatrix& x, const NmfConfig& cfg);

namespace detail {

// One multiplicative step of W with H fixed, in place.
void multiplicative_update_w(const Matrix& x, Matrix& w, const Matrix& h, double epsilon);
// One multiplicative step of H with W fixed, in place.
void multiplicative_update_h(const Matrix& x, const Matrix& w, Matrix& h, double epsilon);

void check_rank(std::size_t rank, std::size_t rows, std::size_t cols, const char* who);
bool converged(double previous, double current, double tol) noexcept;

}  // namespace detail

}  // namespace daonmf
