#include <gtest/gtest.h>

#include <cmath>

#include "daonmf/error.hpp"
#include "daonmf/nmf.hpp"
#include "daonmf/rng.hpp"
#include "oracles.hpp"

using daonmf::Matrix;
using daonmf::NonnegMatrix;

namespace {

double relative_error(const Matrix& x, const Matrix& w, const Matrix& h) {
  return std::sqrt(oracle::residual_sq(x, w, h) / oracle::sum_squares(x));
}

void expect_monotone(const std::vector<double>& trace, double slack) {
  for (std::size_t t = 1; t < trace.size(); ++t)
    EXPECT_LE(trace[t], trace[t - 1] * (1.0 + slack)) << "step " << t;
}

}  // namespace

TEST(InitFactors, SameSeedIsIdentical) {
  const auto a = daonmf::init_factors(6, 7, 3, 42);
  const auto b = daonmf::init_factors(6, 7, 3, 42);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(InitFactors, EntriesAreStrictlyPositive) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [w, h] = daonmf::init_factors(10, 12, 4, seed);
    for (double v : w.matrix().data()) EXPECT_GT(v, 0.0);
    for (double v : h.matrix().data()) EXPECT_GT(v, 0.0);
    for (double v : w.matrix().data()) EXPECT_LE(v, 1.0);
  }
}

TEST(InitFactors, DifferentSeedsDiffer) {
  EXPECT_NE(daonmf::init_factors(5, 5, 2, 1).first, daonmf::init_factors(5, 5, 2, 2).first);
}

TEST(NmfFit, RecoversRankThreeProduct) {
  daonmf::Rng rng(11);
  const Matrix ws = oracle::random_matrix(8, 3, rng);
  const Matrix hs = oracle::random_matrix(10, 3, rng);
  const NonnegMatrix x(oracle::naive_matmul(ws, oracle::naive_transpose(hs)));
  daonmf::NmfConfig cfg;
  cfg.rank = 3;
  cfg.max_iters = 2000;
  cfg.tol = 0.0;
  const auto fit = daonmf::nmf_fit(x, cfg);
  EXPECT_LE(fit.iters_run, 2000u);
  EXPECT_LT(relative_error(x, fit.w, fit.h), 1e-3);
}

TEST(NmfFit, RecoversRankOneOuterProduct) {
  daonmf::Rng rng(12);
  const Matrix u = oracle::random_matrix(9, 1, rng, 0.1, 1.0);
  const Matrix v = oracle::random_matrix(7, 1, rng, 0.1, 1.0);
  const NonnegMatrix x(oracle::naive_matmul(u, oracle::naive_transpose(v)));
  daonmf::NmfConfig cfg;
  cfg.rank = 1;
  cfg.max_iters = 500;
  cfg.tol = 0.0;
  const auto fit = daonmf::nmf_fit(x, cfg);
  EXPECT_LT(relative_error(x, fit.w, fit.h), 1e-6);
}

TEST(NmfFit, ZeroDataReachesZeroCost) {
  const NonnegMatrix x(Matrix(4, 5));
  daonmf::NmfConfig cfg;
  cfg.rank = 2;
  const auto fit = daonmf::nmf_fit(x, cfg);
  EXPECT_EQ(fit.cost_trace.back(), 0.0);
  EXPECT_TRUE(daonmf::all_nonneg(fit.w));
  EXPECT_TRUE(daonmf::all_nonneg(fit.h));
}

TEST(NmfFit, CostNeverIncreases) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    daonmf::Rng rng(100 + s);
    const NonnegMatrix x(oracle::random_matrix(12, 15, rng));
    daonmf::NmfConfig cfg;
    cfg.rank = 4;
    cfg.max_iters = 300;
    cfg.tol = 0.0;
    cfg.seed = s;
    const auto fit = daonmf::nmf_fit(x, cfg);
    expect_monotone(fit.cost_trace, 1e-9);
    EXPECT_LE(fit.cost_trace.back(), fit.cost_trace.front());
    EXPECT_TRUE(daonmf::all_nonneg(fit.w) && daonmf::all_finite(fit.w));
    EXPECT_TRUE(daonmf::all_nonneg(fit.h) && daonmf::all_finite(fit.h));
  }
}

TEST(NmfFit, CostMatchesResidualOracle) {
  daonmf::Rng rng(13);
  const Matrix x = oracle::random_matrix(5, 6, rng);
  const Matrix w = oracle::random_matrix(5, 2, rng);
  const Matrix h = oracle::random_matrix(6, 2, rng);
  EXPECT_LE(oracle::rel_diff(daonmf::nmf_cost(x, w, h), 0.5 * oracle::residual_sq(x, w, h)),
            1e-12);
}

TEST(NmfFit, ExactProductIsFixedPoint) {
  daonmf::Rng rng(14);
  const Matrix w0 = oracle::random_matrix(6, 3, rng, 0.2, 1.0);
  const Matrix h0 = oracle::random_matrix(8, 3, rng, 0.2, 1.0);
  const Matrix x = oracle::naive_matmul(w0, oracle::naive_transpose(h0));
  Matrix w = w0;
  Matrix h = h0;
  daonmf::detail::multiplicative_update_h(x, w, h, 1e-12);
  daonmf::detail::multiplicative_update_w(x, w, h, 1e-12);
  EXPECT_LE(oracle::max_abs_diff(w, w0), 1e-10 * oracle::max_abs(w0));
  EXPECT_LE(oracle::max_abs_diff(h, h0), 1e-10 * oracle::max_abs(h0));
}

TEST(NmfFit, RankAboveDimensionsIsConfigError) {
  const NonnegMatrix x(Matrix(3, 5, 1.0));
  daonmf::NmfConfig cfg;
  cfg.rank = 4;
  EXPECT_THROW(daonmf::nmf_fit(x, cfg), daonmf::ConfigError);
}

TEST(NmfFit, ZeroRowProducesWarning) {
  Matrix m(4, 5, 1.0);
  for (std::size_t j = 0; j < 5; ++j) m(2, j) = 0.0;
  daonmf::NmfConfig cfg;
  cfg.rank = 2;
  cfg.max_iters = 10;
  const auto fit = daonmf::nmf_fit(NonnegMatrix(m), cfg);
  EXPECT_FALSE(fit.warnings.empty());
}

TEST(NmfFit, StopsEarlyOnTolerance) {
  daonmf::Rng rng(15);
  const NonnegMatrix x(oracle::random_matrix(10, 10, rng));
  daonmf::NmfConfig cfg;
  cfg.rank = 2;
  cfg.max_iters = 5000;
  cfg.tol = 1e-4;
  const auto fit = daonmf::nmf_fit(x, cfg);
  EXPECT_LT(fit.iters_run, 5000u);
  EXPECT_EQ(fit.cost_trace.size(), fit.iters_run + 1);
}
