#include <algorithm>
#include <cmath>
#include <limits>

#include "silico/clustering.hpp"
#include "silico/log.hpp"
#include "silico/util.hpp"

namespace silico {

namespace {

/// Dense 64-bit working copy of the input rows.
struct Points {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

Points prepare(const EmbeddingMatrix& m, bool normalize) {
  require(m.dim >= 1 && m.data.size() == m.rows() * m.dim, ErrorKind::Validation, "malformed embedding matrix");
  Points p{m.rows(), m.dim, std::vector<double>(m.data.begin(), m.data.end())};
  for (double v : p.data) require(std::isfinite(v), ErrorKind::Validation, "k-means input contains a non-finite value");
  if (normalize) {
    for (std::size_t i = 0; i < p.n; ++i) {
      double sq = 0.0;
      for (std::size_t d = 0; d < p.dim; ++d) sq += p.data[i * p.dim + d] * p.data[i * p.dim + d];
      if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t d = 0; d < p.dim; ++d) p.data[i * p.dim + d] *= inv;
      }
    }
  }
  return p;
}

double dist2(std::span<const double> a, const double* b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

std::vector<double> kmeanspp(const Points& p, std::size_t k, Rng& rng) {
  std::vector<double> centers(k * p.dim);
  auto place = [&](std::size_t c, std::size_t i) {
    std::copy_n(p.data.begin() + static_cast<std::ptrdiff_t>(i * p.dim), p.dim,
                centers.begin() + static_cast<std::ptrdiff_t>(c * p.dim));
  };
  place(0, rng.below(p.n));
  std::vector<double> closest(p.n);
  for (std::size_t i = 0; i < p.n; ++i) closest[i] = dist2(p.row(i), centers.data());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : closest) total += d;
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      chosen = p.n - 1;
      for (std::size_t i = 0; i < p.n; ++i) {
        running += closest[i];
        if (running > target && closest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = rng.below(p.n);
    }
    place(c, chosen);
    for (std::size_t i = 0; i < p.n; ++i) {
      closest[i] = std::min(closest[i], dist2(p.row(i), centers.data() + c * p.dim));
    }
  }
  return centers;
}

class Lloyd {
 public:
  Lloyd(const Points& p, std::size_t k, std::vector<double> centers)
      : p_(p), k_(k), centers_(std::move(centers)), assign_(p.n, std::numeric_limits<std::uint32_t>::max()) {}

  /// Nearest-centroid assignment, ties to the lowest index. Returns whether
  /// anything moved.
  bool assign() {
    bool changed = false;
    for (std::size_t i = 0; i < p_.n; ++i) {
      const auto x = p_.row(i);
      std::uint32_t best = 0;
      double best_d = dist2(x, centers_.data());
      for (std::size_t c = 1; c < k_; ++c) {
        const double d = dist2(x, centers_.data() + c * p_.dim);
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(c);
        }
      }
      if (assign_[i] != best) {
        assign_[i] = best;
        changed = true;
      }
    }
    return changed;
  }

  /// Moves the point farthest from its centroid into each empty cluster.
  void fill_empty() {
    for (std::size_t c = 0; c < k_; ++c) {
      auto sizes = counts();
      if (sizes[c] > 0) continue;
      std::size_t victim = p_.n;
      double far = -1.0;
      for (std::size_t i = 0; i < p_.n; ++i) {
        if (sizes[assign_[i]] < 2) continue;
        const double d = dist2(p_.row(i), centers_.data() + assign_[i] * p_.dim);
        if (d > far) {
          far = d;
          victim = i;
        }
      }
      if (victim == p_.n) continue;  // fewer distinct donors than clusters
      assign_[victim] = static_cast<std::uint32_t>(c);
      std::copy_n(p_.data.begin() + static_cast<std::ptrdiff_t>(victim * p_.dim), p_.dim,
                  centers_.begin() + static_cast<std::ptrdiff_t>(c * p_.dim));
    }
  }

  /// Centroids become member means, summed in index order.
  void update() {
    std::vector<double> sums(k_ * p_.dim, 0.0);
    std::vector<std::size_t> n(k_, 0);
    for (std::size_t i = 0; i < p_.n; ++i) {
      const auto c = assign_[i];
      ++n[c];
      const auto x = p_.row(i);
      for (std::size_t d = 0; d < p_.dim; ++d) sums[c * p_.dim + d] += x[d];
    }
    for (std::size_t c = 0; c < k_; ++c) {
      if (n[c] == 0) continue;  // keeps its previous position
      for (std::size_t d = 0; d < p_.dim; ++d) centers_[c * p_.dim + d] = sums[c * p_.dim + d] / static_cast<double>(n[c]);
    }
  }

  /// One pass of single-point transfers that strictly lower the objective,
  /// with means updated incrementally. Expects centers to be member means.
  bool transfer_sweep() {
    auto n = counts();
    bool moved = false;
    for (std::size_t i = 0; i < p_.n; ++i) {
      const auto x = p_.row(i);
      const auto a = assign_[i];
      if (n[a] < 2) continue;
      const double na = static_cast<double>(n[a]);
      const double remove = na / (na - 1.0) * dist2(x, centers_.data() + a * p_.dim);
      std::uint32_t best = a;
      double best_add = remove * (1.0 - 1e-12);
      for (std::size_t c = 0; c < k_; ++c) {
        if (c == a) continue;
        const double nc = static_cast<double>(n[c]);
        const double add = nc / (nc + 1.0) * dist2(x, centers_.data() + c * p_.dim);
        if (add < best_add) {
          best_add = add;
          best = static_cast<std::uint32_t>(c);
        }
      }
      if (best == a) continue;
      const double nb = static_cast<double>(n[best]);
      double* ma = centers_.data() + a * p_.dim;
      double* mb = centers_.data() + best * p_.dim;
      for (std::size_t d = 0; d < p_.dim; ++d) {
        ma[d] = (ma[d] * na - x[d]) / (na - 1.0);
        mb[d] = (mb[d] * nb + x[d]) / (nb + 1.0);
      }
      --n[a];
      ++n[best];
      assign_[i] = best;
      moved = true;
    }
    return moved;
  }

  double objective() const {
    double total = 0.0;
    for (std::size_t i = 0; i < p_.n; ++i) total += dist2(p_.row(i), centers_.data() + assign_[i] * p_.dim);
    return total;
  }

  std::vector<std::size_t> counts() const {
    std::vector<std::size_t> n(k_, 0);
    for (auto a : assign_) ++n[a];
    return n;
  }

  std::vector<double>& centers() { return centers_; }
  std::vector<std::uint32_t>& assignment() { return assign_; }

 private:
  const Points& p_;
  std::size_t k_;
  std::vector<double> centers_;
  std::vector<std::uint32_t> assign_;
};

ClusterModel run_lloyd(const EmbeddingMatrix& m, const Points& p, std::size_t k, std::vector<double> init,
                       std::uint64_t seed, const KMeansOptions& opt) {
  Lloyd lloyd(p, k, std::move(init));
  ClusterModel model;
  model.k = k;
  model.dim = p.dim;
  model.seed = seed;
  model.normalized_input = opt.normalize_input;
  model.record_ids = m.record_ids;

  lloyd.assign();
  lloyd.fill_empty();
  lloyd.update();
  double wcss = lloyd.objective();
  model.wcss_history.push_back(wcss);
  std::size_t iter = 1;
  while (iter < opt.max_iter) {
    if (!lloyd.assign()) {
      model.converged = true;
      break;
    }
    lloyd.fill_empty();
    lloyd.update();
    const double next = lloyd.objective();
    model.wcss_history.push_back(next);
    ++iter;
    const double improvement = wcss > 0.0 ? (wcss - next) / wcss : 0.0;
    wcss = next;
    if (improvement < opt.tol) break;
  }
  // Lloyd fixed points can still admit improving single-point moves. A
  // partition with none left is also a Lloyd fixed point.
  bool stable = false;
  while (iter < opt.max_iter) {
    if (!lloyd.transfer_sweep()) {
      stable = true;
      break;
    }
    lloyd.update();
    wcss = lloyd.objective();
    model.wcss_history.push_back(wcss);
    ++iter;
  }
  model.converged = stable;
  model.iterations_run = iter;
  model.wcss = wcss;
  model.centroids = std::move(lloyd.centers());
  model.assignments = std::move(lloyd.assignment());
  if (opt.observer) opt.observer(model);
  return model;
}

void check_k(const EmbeddingMatrix& m, std::size_t k) {
  require(k >= 1, ErrorKind::Validation, "k must be at least 1");
  require(k <= m.rows(), ErrorKind::Validation,
          "k = " + std::to_string(k) + " exceeds the number of rows (" + std::to_string(m.rows()) + ")");
}

}  // namespace

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> n(k, 0);
  for (auto a : assignments) ++n[a];
  return n;
}

ClusterModel kmeans(const EmbeddingMatrix& matrix, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  check_k(matrix, k);
  const Points p = prepare(matrix, options.normalize_input);
  Rng rng(seed);
  return run_lloyd(matrix, p, k, kmeanspp(p, k, rng), seed, options);
}

ClusterModel kmeans_from(const EmbeddingMatrix& matrix, std::vector<double> initial, std::size_t k,
                         std::uint64_t seed, const KMeansOptions& options) {
  check_k(matrix, k);
  require(initial.size() == k * matrix.dim, ErrorKind::Validation, "initial centroids have the wrong shape");
  const Points p = prepare(matrix, options.normalize_input);
  return run_lloyd(matrix, p, k, std::move(initial), seed, options);
}

ClusterModel kmeans_best_of(const EmbeddingMatrix& matrix, std::size_t k, std::size_t restarts, std::uint64_t seed,
                            const KMeansOptions& options) {
  check_k(matrix, k);
  require(restarts >= 1, ErrorKind::Validation, "restarts must be at least 1");
  const Points p = prepare(matrix, options.normalize_input);
  ClusterModel best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, "restart-" + std::to_string(r)));
    auto model = run_lloyd(matrix, p, k, kmeanspp(p, k, rng), seed, options);
    model.restart = r;
    if (r == 0 || model.wcss < best.wcss) best = std::move(model);
  }
  return best;
}

double recompute_wcss(const EmbeddingMatrix& matrix, const ClusterModel& model) {
  require(matrix.record_ids == model.record_ids, ErrorKind::Validation,
          "model record ids do not match the matrix");
  require(model.assignments.size() == matrix.rows() && model.centroids.size() == model.k * matrix.dim,
          ErrorKind::Validation, "model shape does not match the matrix");
  const Points p = prepare(matrix, model.normalized_input);
  double total = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    require(model.assignments[i] < model.k, ErrorKind::Validation, "assignment out of range");
    total += dist2(p.row(i), model.centroids.data() + model.assignments[i] * p.dim);
  }
  return total;
}

}  // namespace silico
