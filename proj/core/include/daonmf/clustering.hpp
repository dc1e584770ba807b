#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "daonmf/matrix.hpp"

namespace daonmf {

using Labels = std::vector<std::size_t>;

struct ClusterAssignment {
  Labels labels;
  std::size_t k = 0;
  // Sum of squared distances from each point to its assigned centroid.
  double inertia = 0.0;
  // Inertia after every Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

struct KMeansConfig {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iters = 300;
};

// Lloyd's algorithm with k-means++ seeding on the rows of `points`; the
// restart with the lowest inertia wins. Restart i draws from the stream
// derive_seed(seed, i). An emptied cluster is re-seeded at the point farthest
// from its current centroid. Throws ConfigError if k == 0 or k > rows.
ClusterAssignment kmeans(const Matrix& points, const KMeansConfig& cfg);

// Index of the largest entry in each row (first one on ties).
Labels row_argmax(const Matrix& m);

// Optimal-assignment (Hungarian) maximum of the fraction of samples whose
// predicted label maps to the true label under a one-to-one relabeling.
// Throws InputError on a length mismatch.
double clustering_accuracy(std::span<const std::size_t> pred,
                           std::span<const std::size_t> truth);

enum class NmiNormalization {
  kGeometric,   // I / sqrt(H(a) H(b))
  kArithmetic,  // 2 I / (H(a) + H(b))
};

// Normalized mutual information with natural-log entropies. When either
// partition has zero entropy the result is 1 if the partitions are identical
// up to relabeling, else 0. Throws InputError on a length mismatch or empty input.
double nmi(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
           NmiNormalization norm = NmiNormalization::kGeometric);

// Number of distinct labels.
std::size_t count_classes(std::span<const std::size_t> labels);

struct EvalReport {
  double acc = 0.0;
  double nmi = 0.0;
  std::size_t k = 0;
  std::string method;
  std::uint64_t run_seed = 0;

  // method,k,seed,acc,nmi
  std::string to_csv_row() const;
  static std::string csv_header() { return "method,k,seed,acc,nmi"; }
};

EvalReport evaluate(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                    std::string method, std::uint64_t seed);

namespace detail {

// Minimum-cost perfect assignment on a square cost matrix; returns, for each
// row, the assigned column.
std::vector<std::size_t> hungarian_min_cost(const Matrix& cost);

}  // namespace detail

}  // namespace daonmf
