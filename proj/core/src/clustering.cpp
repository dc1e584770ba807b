#include "daonmf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "daonmf/error.hpp"
#include "daonmf/rng.hpp"

namespace daonmf {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Matrix seed_plus_plus(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t pick = static_cast<std::size_t>(rng.index(n));
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] <= 0.0) continue;
          target -= d2[i];
          if (target < 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<std::size_t>(rng.index(n));
      }
    }
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points.row(i), centroids.row(c)));
  }
  return centroids;
}

ClusterAssignment lloyd(const Matrix& points, Matrix centroids, std::size_t max_iters) {
  const std::size_t n = points.rows();
  const std::size_t k = centroids.rows();
  const std::size_t dim = points.cols();
  ClusterAssignment out;
  out.k = k;
  out.labels.assign(n, 0);
  std::vector<double> dist(n, 0.0);

  for (std::size_t it = 0; it < std::max<std::size_t>(max_iters, 1); ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(points.row(i), centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (it == 0 || best != out.labels[i]) changed = true;
      out.labels[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    out.inertia = inertia;
    out.inertia_trace.push_back(inertia);
    if (!changed) break;

    Matrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(out.labels[i]);
      auto p = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
      ++counts[out.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed at the point farthest from its centroid; it stops counting
        // as farthest for any later empty cluster.
        const auto far = static_cast<std::size_t>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy(points.row(far).begin(), points.row(far).end(), centroids.row(c).begin());
        dist[far] = -1.0;
        continue;
      }
      auto s = sums.row(c);
      auto dst = centroids.row(c);
      for (std::size_t j = 0; j < dim; ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
    }
  }
  return out;
}

// Maps arbitrary labels onto 0..K-1 in increasing label order.
std::vector<std::size_t> compress(std::span<const std::size_t> labels, std::size_t& classes) {
  std::map<std::size_t, std::size_t> ids;
  for (std::size_t v : labels) ids.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  classes = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

void check_pair(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                const char* who) {
  if (pred.size() != truth.size()) {
    throw InputError(std::string(who) + ": " + std::to_string(pred.size()) +
                     " predicted labels vs " + std::to_string(truth.size()) + " true labels");
  }
  if (pred.empty()) throw InputError(std::string(who) + ": empty labelings");
}

}  // namespace

ClusterAssignment kmeans(const Matrix& points, const KMeansConfig& cfg) {
  if (cfg.k == 0) throw ConfigError("kmeans: k must be positive");
  if (cfg.k > points.rows()) {
    throw ConfigError("kmeans: k = " + std::to_string(cfg.k) + " exceeds the " +
                      std::to_string(points.rows()) + " points");
  }
  if (!all_finite(points)) throw InvalidInput("kmeans: non-finite point coordinate");

  ClusterAssignment best;
  best.inertia = std::numeric_limits<double>::infinity();
  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, r));
    ClusterAssignment run = lloyd(points, seed_plus_plus(points, cfg.k, rng), cfg.max_iters);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

Labels row_argmax(const Matrix& m) {
  Labels out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    out[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

namespace detail {

std::vector<std::size_t> hungarian_min_cost(const Matrix& cost) {
  const std::size_t n = cost.rows();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace detail

double clustering_accuracy(std::span<const std::size_t> pred,
                           std::span<const std::size_t> truth) {
  check_pair(pred, truth, "clustering_accuracy");
  std::size_t kp = 0;
  std::size_t kt = 0;
  const auto p = compress(pred, kp);
  const auto t = compress(truth, kt);
  const std::size_t n = std::max(kp, kt);
  Matrix counts(n, n);
  for (std::size_t i = 0; i < p.size(); ++i) counts(p[i], t[i]) += 1.0;

  Matrix cost(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = -counts(i, j);
  const auto assignment = detail::hungarian_min_cost(cost);
  double matched = 0.0;
  for (std::size_t i = 0; i < n; ++i) matched += counts(i, assignment[i]);
  return matched / static_cast<double>(pred.size());
}

double nmi(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
           NmiNormalization norm) {
  check_pair(pred, truth, "nmi");
  std::size_t ka = 0;
  std::size_t kb = 0;
  const auto a = compress(pred, ka);
  const auto b = compress(truth, kb);
  const double total = static_cast<double>(a.size());

  Matrix joint(ka, kb);
  std::vector<double> pa(ka, 0.0), pb(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint(a[i], b[i]) += 1.0;
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
  }
  auto entropy = [total](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts)
      if (c > 0.0) h -= (c / total) * std::log(c / total);
    return h;
  };
  const double ha = entropy(pa);
  const double hb = entropy(pb);
  if (ha == 0.0 || hb == 0.0) return (ha == 0.0 && hb == 0.0) ? 1.0 : 0.0;

  double mi = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      const double c = joint(i, j);
      if (c > 0.0) mi += (c / total) * std::log(c * total / (pa[i] * pb[j]));
    }
  }
  const double denom = norm == NmiNormalization::kGeometric ? std::sqrt(ha * hb) : 0.5 * (ha + hb);
  return std::clamp(mi / denom, 0.0, 1.0);
}

std::size_t count_classes(std::span<const std::size_t> labels) {
  std::size_t classes = 0;
  compress(labels, classes);
  return classes;
}

std::string EvalReport::to_csv_row() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f", acc, nmi);
  return method + "," + std::to_string(k) + "," + std::to_string(run_seed) + "," + buf;
}

EvalReport evaluate(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                    std::string method, std::uint64_t seed) {
  EvalReport report;
  report.acc = clustering_accuracy(pred, truth);
  report.nmi = nmi(pred, truth);
  report.k = count_classes(truth);
  report.method = std::move(method);
  report.run_seed = seed;
  return report;
}

}  // namespace daonmf
