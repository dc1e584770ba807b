#include <gtest/gtest.h>

#include <cmath>

#include "daonmf/aonmf.hpp"
#include "daonmf/clustering.hpp"
#include "daonmf/data.hpp"
#include "daonmf/error.hpp"
#include "daonmf/nmf.hpp"
#include "daonmf/rng.hpp"
#include "oracles.hpp"

using daonmf::Matrix;
using daonmf::NonnegMatrix;

namespace {

double max_vec_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

daonmf::AonmfConfig config(std::size_t rank, double lambda, std::uint64_t seed) {
  daonmf::AonmfConfig cfg;
  cfg.rank = rank;
  cfg.lambda = lambda;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(AonmfCost, ZeroForExactOrthogonalFactorization) {
  const Matrix w{{2, 0}, {0, 3}, {1, 1}};
  const Matrix h{{1, 0}, {0, 1}, {0, 0}};
  const Matrix x = oracle::naive_matmul(w, oracle::naive_transpose(h));
  EXPECT_EQ(daonmf::aonmf_cost(x, w, h, 5.0), 0.0);
}

TEST(AonmfCost, ZeroLambdaIsHalfResidual) {
  daonmf::Rng rng(1);
  const Matrix x = oracle::random_matrix(4, 5, rng);
  const Matrix w = oracle::random_matrix(4, 3, rng);
  const Matrix h = oracle::random_matrix(5, 3, rng);
  EXPECT_LE(oracle::rel_diff(daonmf::aonmf_cost(x, w, h, 0.0),
                             0.5 * daonmf::frobenius_sq(
                                       daonmf::subtract(x, daonmf::matmul_nt(w, h)))),
            1e-12);
}

TEST(AonmfCost, MatchesDoubleSumOracle) {
  daonmf::Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = oracle::random_matrix(4, 3, rng);
    const Matrix w = oracle::random_matrix(4, 2, rng);
    const Matrix h = oracle::random_matrix(3, 2, rng);
    EXPECT_LE(oracle::rel_diff(daonmf::aonmf_cost(x, w, h, 2.0), oracle::aonmf_cost(x, w, h, 2.0)),
              1e-12);
  }
}

TEST(AonmfCost, DimensionMismatchThrows) {
  EXPECT_THROW(daonmf::aonmf_cost(Matrix(3, 4), Matrix(3, 2), Matrix(5, 2), 0.0),
               daonmf::DimError);
}

TEST(HalsUpdateH, SingleColumnCollapsesToProjectedLeastSquares) {
  daonmf::Rng rng(3);
  const Matrix x = oracle::random_matrix(5, 4, rng, -0.2, 1.0);
  const Matrix w = oracle::random_matrix(5, 1, rng);
  const Matrix h = oracle::random_matrix(4, 1, rng);
  const auto got = daonmf::hals_update_h_col(x, w, h, 0, 3.0);
  double ww = 0.0;
  for (std::size_t m = 0; m < 5; ++m) ww += w(m, 0) * w(m, 0);
  for (std::size_t n = 0; n < 4; ++n) {
    double xw = 0.0;
    for (std::size_t m = 0; m < 5; ++m) xw += x(m, n) * w(m, 0);
    EXPECT_NEAR(got[n], std::max(0.0, xw / ww), 1e-12);
  }
}

TEST(HalsUpdateH, IdentityIsFixedPoint) {
  const Matrix i2 = Matrix::identity(2);
  const auto got = daonmf::hals_update_h_col(i2, i2, i2, 0, 0.0);
  EXPECT_EQ(got, (std::vector<double>{1.0, 0.0}));
}

TEST(HalsUpdateH, MatchesScalarOracle) {
  daonmf::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = oracle::random_matrix(5, 5, rng);
    const Matrix w = oracle::random_matrix(5, 3, rng);
    const Matrix h = oracle::random_matrix(5, 3, rng);
    for (std::size_t r = 0; r < 3; ++r)
      EXPECT_LE(max_vec_rel_diff(daonmf::hals_update_h_col(x, w, h, r, 0.5),
                                 oracle::hals_h_col(x, w, h, r, 0.5)),
                1e-12);
  }
}

TEST(HalsUpdateH, ZeroBasisColumnIsDegenerate) {
  Matrix w{{1, 0}, {1, 0}};
  try {
    daonmf::hals_update_h_col(Matrix(2, 3, 1.0), w, Matrix(3, 2, 1.0), 1, 0.0);
    FAIL() << "expected DegenerateColumn";
  } catch (const daonmf::DegenerateColumn& e) {
    EXPECT_EQ(e.column(), 1u);
  }
}

TEST(HalsUpdateH, SatisfiesStationarityAtZeroLambda) {
  daonmf::Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = oracle::random_matrix(6, 7, rng);
    const Matrix w = oracle::random_matrix(6, 3, rng);
    Matrix h = oracle::random_matrix(7, 3, rng);
    for (std::size_t r = 0; r < 3; ++r) {
      const auto col = daonmf::hals_update_h_col(x, w, h, r, 0.0);
      daonmf::set_column(h, r, col);
      for (std::size_t n = 0; n < 7; ++n) {
        double grad = 0.0;
        for (std::size_t m = 0; m < 6; ++m) {
          double fit = 0.0;
          for (std::size_t k = 0; k < 3; ++k) fit += w(m, k) * h(n, k);
          grad += (fit - x(m, n)) * w(m, r);
        }
        if (h(n, r) > 0.0)
          EXPECT_LE(std::abs(grad), 1e-8);
        else
          EXPECT_GE(grad, -1e-12);
      }
    }
  }
}

TEST(HalsUpdateW, ExactFactorizationIsFixedPoint) {
  daonmf::Rng rng(6);
  const Matrix w = oracle::random_matrix(6, 2, rng, 0.1, 1.0);
  const Matrix h = oracle::random_matrix(4, 2, rng, 0.1, 1.0);
  const Matrix x = oracle::naive_matmul(w, oracle::naive_transpose(h));
  for (std::size_t r = 0; r < 2; ++r) {
    const auto got = daonmf::hals_update_w_col(x, w, h, r);
    for (std::size_t m = 0; m < 6; ++m) EXPECT_NEAR(got[m], w(m, r), 1e-12);
  }
}

TEST(HalsUpdateW, RankOneClosedForm) {
  const Matrix u{{1}, {2}, {0.5}};
  const Matrix v{{3}, {1}};
  const Matrix x = oracle::naive_matmul(u, oracle::naive_transpose(v));
  const auto got = daonmf::hals_update_w_col(x, Matrix(3, 1, 0.7), v, 0);
  for (std::size_t m = 0; m < 3; ++m) EXPECT_NEAR(got[m], u(m, 0), 1e-12);
}

TEST(HalsUpdateW, MatchesScalarOracle) {
  daonmf::Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = oracle::random_matrix(6, 4, rng);
    const Matrix w = oracle::random_matrix(6, 2, rng);
    const Matrix h = oracle::random_matrix(4, 2, rng);
    for (std::size_t r = 0; r < 2; ++r)
      EXPECT_LE(max_vec_rel_diff(daonmf::hals_update_w_col(x, w, h, r),
                                 oracle::hals_w_col(x, w, h, r)),
                1e-12);
  }
}

TEST(HalsUpdateW, ZeroCoefficientColumnIsDegenerate) {
  const Matrix h{{0, 1}, {0, 1}};
  EXPECT_THROW(daonmf::hals_update_w_col(Matrix(3, 2, 1.0), Matrix(3, 2, 1.0), h, 0),
               daonmf::DegenerateColumn);
}

TEST(AonmfFit, RecoversPlantedOrthogonalClusters) {
  const auto data = daonmf::synth_planted(3, 10, 12, 0.0, 21);
  const auto res = daonmf::aonmf_fit(data.x, config(3, 1.0, 0));
  const auto pred = daonmf::row_argmax(res.h);
  EXPECT_EQ(daonmf::clustering_accuracy(pred, *data.labels), 1.0);
}

TEST(AonmfFit, CostTraceIsMonotone) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    daonmf::Rng rng(200 + s);
    const NonnegMatrix x(oracle::random_matrix(15, 20, rng));
    auto cfg = config(4, 0.01, s);
    cfg.tol = 0.0;
    cfg.max_iters = 200;
    const auto res = daonmf::aonmf_fit(x, cfg);
    for (std::size_t t = 1; t < res.cost_trace.size(); ++t)
      EXPECT_LE(res.cost_trace[t], res.cost_trace[t - 1] * (1.0 + 1e-9)) << "step " << t;
    EXPECT_TRUE(daonmf::all_finite(res.w) && daonmf::all_finite(res.h));
  }
}

TEST(AonmfFit, LargerLambdaReducesOrthoResidual) {
  const auto data = daonmf::synth_planted(4, 10, 20, 0.3, 5);
  std::vector<double> resid;
  for (double lambda : {0.0, 1.0, 100.0}) resid.push_back(daonmf::aonmf_fit(data.x, config(4, lambda, 3)).ortho_residual);
  int inversions = 0;
  for (std::size_t i = 1; i < resid.size(); ++i) inversions += resid[i] > resid[i - 1];
  EXPECT_LE(inversions, 1);
  EXPECT_LE(resid.back(), resid.front());
}

TEST(AonmfFit, LargeLambdaGivesNearOrthogonalColumns) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto data = daonmf::synth_planted(4, 15, 20, 0.05, 8 + s);
    const auto res = daonmf::aonmf_fit(data.x, config(4, 100.0, s));
    EXPECT_LT(res.ortho_residual, 0.01 * 4 * 3) << "seed " << s;
  }
}

TEST(AonmfFit, ReturnedColumnsAreNeverZero) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    daonmf::Rng rng(300 + s);
    const NonnegMatrix x(oracle::random_matrix(8, 10, rng));
    const auto res = daonmf::aonmf_fit(x, config(6, 100.0, s));
    for (std::size_t r = 0; r < 6; ++r) {
      const auto col = daonmf::column(res.h, r);
      EXPECT_GT(daonmf::dot(col, col), 0.0) << "seed " << s << " column " << r;
    }
    EXPECT_TRUE(daonmf::all_nonneg(res.h) && daonmf::all_finite(res.h));
  }
}

TEST(AonmfFit, OrthoResidualIsScaleInvariant) {
  daonmf::Rng rng(9);
  Matrix h = oracle::random_matrix(6, 3, rng);
  const double before = daonmf::ortho_residual(h);
  for (double& v : h.data()) v *= 17.0;
  EXPECT_NEAR(daonmf::ortho_residual(h), before, 1e-12);
}

TEST(AonmfFit, SameSeedIsDeterministic) {
  daonmf::Rng rng(10);
  const NonnegMatrix x(oracle::random_matrix(9, 11, rng));
  const auto a = daonmf::aonmf_fit(x, config(3, 0.5, 4));
  const auto b = daonmf::aonmf_fit(x, config(3, 0.5, 4));
  EXPECT_EQ(a.w, b.w);
  EXPECT_EQ(a.h, b.h);
}

TEST(AonmfFit, SweepRevivesZeroBasisColumn) {
  daonmf::Rng rng(11);
  const Matrix x = oracle::random_matrix(5, 6, rng);
  Matrix w = oracle::random_matrix(5, 3, rng);
  Matrix h = oracle::random_matrix(6, 3, rng);
  for (std::size_t m = 0; m < 5; ++m) w(m, 1) = 0.0;
  daonmf::detail::HalsContext ctx;
  ctx.noise_scale = daonmf::detail::mean_entry(x);
  daonmf::detail::hals_sweep_h(x, w, h, ctx);
  ASSERT_EQ(ctx.degenerate_columns, (std::vector<std::size_t>{1}));
  EXPECT_GE(ctx.reinitializations, 1u);
  const auto wc = daonmf::column(w, 1);
  EXPECT_GT(daonmf::dot(wc, wc), 0.0);
  EXPECT_TRUE(daonmf::all_nonneg(h) && daonmf::all_finite(h));
}

TEST(AonmfFit, RankAboveDimensionsIsConfigError) {
  const NonnegMatrix x(Matrix(3, 8, 1.0));
  EXPECT_THROW(daonmf::aonmf_fit(x, config(4, 0.0, 0)), daonmf::ConfigError);
}
