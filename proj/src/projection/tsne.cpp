#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "silico/log.hpp"
#include "silico/projection.hpp"
#include "silico/util.hpp"

namespace silico {

namespace {

constexpr double kEntropyTol = 1e-5;
constexpr int kBandwidthSteps = 200;

/// Gaussian row over `m` squared distances, tuned so exp(entropy) matches
/// the perplexity. Writes normalized probabilities to `out`, returns entropy.
double gaussian_row(const double* d, std::size_t m, double perplexity, double* out) {
  const double target = std::log(perplexity);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) dmin = std::min(dmin, d[j]);
  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double entropy = 0.0;
  double sum = 0.0;
  for (int step = 0; step < kBandwidthSteps; ++step) {
    sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double shifted = d[j] - dmin;
      out[j] = std::exp(-beta * shifted);
      sum += out[j];
      weighted += shifted * out[j];
    }
    entropy = std::log(sum) + beta * weighted / sum;
    const double diff = entropy - target;
    if (std::abs(diff) < kEntropyTol) break;
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  for (std::size_t j = 0; j < m; ++j) out[j] /= sum;
  return entropy;
}

/// Compressed sparse rows of the symmetric joint distribution.
struct SparseP {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
};

SparseP symmetrize_sparse(const std::vector<std::map<std::uint32_t, double>>& cond) {
  const std::size_t n = cond.size();
  std::vector<std::map<std::uint32_t, double>> sym(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, v] : cond[i]) {
      sym[i][j] += v;
      sym[j][static_cast<std::uint32_t>(i)] += v;
    }
  }
  SparseP p;
  p.n = n;
  p.row_ptr.push_back(0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (const auto& row : sym) {
    for (const auto& [j, v] : row) {
      p.col.push_back(j);
      p.val.push_back(v * scale);
    }
    p.row_ptr.push_back(p.col.size());
  }
  return p;
}

double sq_dist_rows(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

SparseP exact_affinities(const std::vector<double>& x, std::size_t n, std::size_t dim, double perplexity) {
  std::vector<std::map<std::uint32_t, double>> cond(n);
  std::vector<double> d(n - 1), p(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) d[k++] = sq_dist_rows(&x[i * dim], &x[j * dim], dim);
    }
    gaussian_row(d.data(), n - 1, perplexity, p.data());
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) cond[i][static_cast<std::uint32_t>(j)] = p[k++];
    }
  }
  return symmetrize_sparse(cond);
}

SparseP knn_affinities(const std::vector<double>& x, std::size_t n, std::size_t dim, double perplexity) {
  const std::size_t k = std::min<std::size_t>(n - 1, static_cast<std::size_t>(3.0 * perplexity));
  std::vector<std::map<std::uint32_t, double>> cond(n);
  std::vector<std::pair<double, std::uint32_t>> all(n);
  std::vector<double> d(k), p(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      all[j] = {j == i ? std::numeric_limits<double>::infinity() : sq_dist_rows(&x[i * dim], &x[j * dim], dim),
                static_cast<std::uint32_t>(j)};
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    for (std::size_t m = 0; m < k; ++m) d[m] = all[m].first;
    gaussian_row(d.data(), k, perplexity, p.data());
    for (std::size_t m = 0; m < k; ++m) cond[i][all[m].second] = p[m];
  }
  return symmetrize_sparse(cond);
}

// ---------------------------------------------------------------------------
// Barnes-Hut quadtree over the 2-D embedding. Points are inserted in index
// order so the structure, and every sum over it, is deterministic.

class QuadTree {
 public:
  QuadTree(const std::vector<double>& y, std::size_t n) : y_(y) {
    double minx = y[0], maxx = y[0], miny = y[1], maxy = y[1];
    for (std::size_t i = 1; i < n; ++i) {
      minx = std::min(minx, y[2 * i]);
      maxx = std::max(maxx, y[2 * i]);
      miny = std::min(miny, y[2 * i + 1]);
      maxy = std::max(maxy, y[2 * i + 1]);
    }
    const double hw = 0.5 * std::max(maxx - minx, maxy - miny) + 1e-5;
    add_node(0.5 * (minx + maxx), 0.5 * (miny + maxy), hw);
    for (std::size_t i = 0; i < n; ++i) insert(0, static_cast<std::uint32_t>(i), 0);
  }

  /// Repulsive term for point i; accumulates the unnormalized Z into sum_q.
  void repulsion(std::size_t i, double theta, double& fx, double& fy, double& sum_q) const {
    visit(0, i, theta * theta, fx, fy, sum_q);
  }

 private:
  struct Node {
    double cx, cy, hw;
    double mx = 0.0, my = 0.0;  // center of mass
    std::size_t count = 0;
    std::int32_t child = -1;    // index of the first of four children
    std::vector<std::uint32_t> points;
  };

  void add_node(double cx, double cy, double hw) {
    Node node;
    node.cx = cx;
    node.cy = cy;
    node.hw = hw;
    nodes_.push_back(std::move(node));
  }

  void insert(std::size_t idx, std::uint32_t i, int depth) {
    const double px = y_[2 * i], py = y_[2 * i + 1];
    {
      Node& node = nodes_[idx];
      const double c = static_cast<double>(node.count);
      node.mx = (node.mx * c + px) / (c + 1.0);
      node.my = (node.my * c + py) / (c + 1.0);
      ++node.count;
      if (node.child < 0) {
        const bool coincident = !node.points.empty() && y_[2 * node.points[0]] == px && y_[2 * node.points[0] + 1] == py;
        if (node.points.empty() || coincident || depth > 48) {
          node.points.push_back(i);
          return;
        }
      }
    }
    if (nodes_[idx].child < 0) split(idx, depth);
    insert(quadrant(idx, px, py), i, depth + 1);
  }

  void split(std::size_t idx, int depth) {
    const auto first = static_cast<std::int32_t>(nodes_.size());
    const Node parent = nodes_[idx];
    const double h = parent.hw * 0.5;
    for (int q = 0; q < 4; ++q) {
      add_node(parent.cx + ((q & 1) ? h : -h), parent.cy + ((q & 2) ? h : -h), h);
    }
    nodes_[idx].child = first;
    auto moved = std::move(nodes_[idx].points);
    nodes_[idx].points.clear();
    for (auto j : moved) insert(quadrant(idx, y_[2 * j], y_[2 * j + 1]), j, depth + 1);
  }

  std::size_t quadrant(std::size_t idx, double px, double py) const {
    const Node& node = nodes_[idx];
    const int q = (px >= node.cx ? 1 : 0) | (py >= node.cy ? 2 : 0);
    return static_cast<std::size_t>(node.child + q);
  }

  void visit(std::size_t idx, std::size_t i, double theta2, double& fx, double& fy, double& sum_q) const {
    const Node& node = nodes_[idx];
    if (node.count == 0) return;
    const double yx = y_[2 * i], yy = y_[2 * i + 1];
    if (node.child < 0) {
      for (auto j : node.points) {
        if (j == i) continue;
        const double dx = yx - y_[2 * j], dy = yy - y_[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        sum_q += q;
        fx += q * q * dx;
        fy += q * q * dy;
      }
      return;
    }
    const double dx = yx - node.mx, dy = yy - node.my;
    const double d2 = dx * dx + dy * dy;
    const double width = 2.0 * node.hw;
    if (width * width < theta2 * d2) {
      const double c = static_cast<double>(node.count);
      const double q = 1.0 / (1.0 + d2);
      sum_q += c * q;
      fx += c * q * q * dx;
      fy += c * q * q * dy;
      return;
    }
    for (int q = 0; q < 4; ++q) visit(static_cast<std::size_t>(node.child + q), i, theta2, fx, fy, sum_q);
  }

  const std::vector<double>& y_;
  std::vector<Node> nodes_;
};

double kl_sparse(const SparseP& p, const std::vector<double>& y) {
  const std::size_t n = p.n;
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      z += 2.0 / (1.0 + dx * dx + dy * dy);
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = p.row_ptr[i]; e < p.row_ptr[i + 1]; ++e) {
      const double pij = p.val[e];
      if (pij <= 0.0) continue;
      const std::size_t j = p.col[e];
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy) / z;
      kl += pij * std::log(pij / std::max(q, std::numeric_limits<double>::min()));
    }
  }
  return std::max(kl, 0.0);
}

/// Attractive forces from the sparse joint distribution.
void attraction(const SparseP& p, const std::vector<double>& y, double scale, std::vector<double>& grad) {
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t e = p.row_ptr[i]; e < p.row_ptr[i + 1]; ++e) {
      const std::size_t j = p.col[e];
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double w = scale * p.val[e] / (1.0 + dx * dx + dy * dy);
      grad[2 * i] += w * dx;
      grad[2 * i + 1] += w * dy;
    }
  }
}

void repulsion_exact(const std::vector<double>& y, std::size_t n, std::vector<double>& grad) {
  std::vector<double> fx(n, 0.0), fy(n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      z += 2.0 * q;
      const double q2 = q * q;
      fx[i] += q2 * dx;
      fy[i] += q2 * dy;
      fx[j] -= q2 * dx;
      fy[j] -= q2 * dy;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    grad[2 * i] -= fx[i] / z;
    grad[2 * i + 1] -= fy[i] / z;
  }
}

void repulsion_bh(const std::vector<double>& y, std::size_t n, double theta, std::vector<double>& grad) {
  QuadTree tree(y, n);
  std::vector<double> fx(n, 0.0), fy(n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) tree.repulsion(i, theta, fx[i], fy[i], z);
  for (std::size_t i = 0; i < n; ++i) {
    grad[2 * i] -= fx[i] / z;
    grad[2 * i + 1] -= fy[i] / z;
  }
}

}  // namespace

namespace tsne_detail {

std::vector<double> squared_distances(const std::vector<double>& rows, std::size_t n, std::size_t dim) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i * n + j] = d[j * n + i] = sq_dist_rows(&rows[i * dim], &rows[j * dim], dim);
    }
  }
  return d;
}

std::vector<double> conditional_affinities(const std::vector<double>& sq_dist, std::size_t n, double perplexity,
                                           std::vector<double>* entropy) {
  std::vector<double> out(n * n, 0.0);
  std::vector<double> d(n - 1), p(n - 1);
  if (entropy) entropy->assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) d[k++] = sq_dist[i * n + j];
    }
    const double h = gaussian_row(d.data(), n - 1, perplexity, p.data());
    if (entropy) (*entropy)[i] = h;
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) out[i * n + j] = p[k++];
    }
  }
  return out;
}

std::vector<double> symmetrize(const std::vector<double>& conditional, std::size_t n) {
  std::vector<double> p(n * n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p[i * n + j] = (conditional[i * n + j] + conditional[j * n + i]) * scale;
  }
  return p;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& y, std::size_t n) {
  SparseP sp;
  sp.n = n;
  sp.row_ptr.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && p[i * n + j] > 0.0) {
        sp.col.push_back(static_cast<std::uint32_t>(j));
        sp.val.push_back(p[i * n + j]);
      }
    }
    sp.row_ptr.push_back(sp.col.size());
  }
  return kl_sparse(sp, y);
}

std::vector<double> pca_reduce(const std::vector<double>& rows, std::size_t n, std::size_t dim, std::size_t out_dim) {
  if (out_dim == 0 || out_dim >= dim) return rows;
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat x = Eigen::Map<const Mat>(rows.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  x.rowwise() -= x.colwise().mean();
  const auto k = static_cast<Eigen::Index>(std::min(out_dim, n));
  Mat projected;
  if (dim <= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x.transpose() * x);
    Eigen::MatrixXd v = solver.eigenvectors().rightCols(k).rowwise().reverse();
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::Index arg;
      v.col(c).cwiseAbs().maxCoeff(&arg);
      if (v(arg, c) < 0) v.col(c) *= -1.0;
    }
    projected = x * v;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x * x.transpose());
    Eigen::MatrixXd u = solver.eigenvectors().rightCols(k).rowwise().reverse();
    Eigen::VectorXd lambda = solver.eigenvalues().tail(k).reverse().cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::Index arg;
      u.col(c).cwiseAbs().maxCoeff(&arg);
      if (u(arg, c) < 0) u.col(c) *= -1.0;
    }
    projected = u * lambda.asDiagonal();
  }
  std::vector<double> out(static_cast<std::size_t>(projected.size()));
  Eigen::Map<Mat>(out.data(), projected.rows(), projected.cols()) = projected;
  if (static_cast<std::size_t>(k) < out_dim) {
    // Fewer rows than requested components: pad with zeros.
    std::vector<double> padded(n * out_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(out.begin() + static_cast<std::ptrdiff_t>(i * k), k, padded.begin() + static_cast<std::ptrdiff_t>(i * out_dim));
    }
    return padded;
  }
  return out;
}

}  // namespace tsne_detail

Projection2D tsne(const EmbeddingMatrix& matrix, std::uint64_t seed, const TsneOptions& opt) {
  const std::size_t n = matrix.rows();
  require(n >= 5, ErrorKind::Validation, "t-SNE needs at least 5 rows");
  require(opt.perplexity > 0.0 && opt.perplexity < static_cast<double>(n - 1) / 3.0, ErrorKind::Validation,
          "perplexity " + std::to_string(opt.perplexity) + " is infeasible for " + std::to_string(n) + " rows");
  std::vector<double> x(matrix.data.begin(), matrix.data.end());
  for (double v : x) require(std::isfinite(v), ErrorKind::Validation, "t-SNE input contains a non-finite value");
  std::size_t dim = matrix.dim;
  if (opt.pca_dims > 0 && opt.pca_dims < dim) {
    x = tsne_detail::pca_reduce(x, n, dim, opt.pca_dims);
    dim = opt.pca_dims;
  }

  const bool barnes_hut = n > opt.exact_threshold;
  const SparseP p = barnes_hut ? knn_affinities(x, n, dim, opt.perplexity) : exact_affinities(x, n, dim, opt.perplexity);

  Rng rng(seed);
  std::vector<double> y(2 * n);
  for (auto& v : y) v = rng.normal() * opt.init_scale;
  std::vector<double> update(2 * n, 0.0), gains(2 * n, 1.0), grad(2 * n);
  const double eta = opt.learning_rate > 0.0 ? opt.learning_rate : std::max(static_cast<double>(n) / 12.0, 50.0);

  Projection2D out;
  out.record_ids = matrix.record_ids;
  out.perplexity = opt.perplexity;
  out.iterations = opt.iterations;
  out.seed = seed;
  out.barnes_hut = barnes_hut;
  bool measured = false;

  for (std::size_t it = 0; it < opt.iterations; ++it) {
    const bool exaggerating = it < opt.exaggeration_iters;
    if (it == opt.exaggeration_iters) {
      out.kl_after_exaggeration = kl_sparse(p, y);
      measured = true;
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    attraction(p, y, exaggerating ? opt.early_exaggeration : 1.0, grad);
    if (barnes_hut) {
      repulsion_bh(y, n, opt.theta, grad);
    } else {
      repulsion_exact(y, n, grad);
    }
    const double momentum = exaggerating ? opt.momentum : opt.final_momentum;
    for (std::size_t d = 0; d < 2 * n; ++d) {
      const double g = 4.0 * grad[d];
      gains[d] = (std::signbit(g) != std::signbit(update[d])) ? gains[d] + 0.2 : gains[d] * 0.8;
      gains[d] = std::max(gains[d], 0.01);
      update[d] = momentum * update[d] - eta * gains[d] * g;
      y[d] += update[d];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }
  out.final_kl = kl_sparse(p, y);
  if (!measured) out.kl_after_exaggeration = out.final_kl;
  for (double v : y) require(std::isfinite(v), ErrorKind::Internal, "t-SNE diverged");
  out.points = std::move(y);
  log().info("t-SNE on {} rows ({}): KL {} -> {}", n, barnes_hut ? "Barnes-Hut" : "exact", out.kl_after_exaggeration,
             out.final_kl);
  return out;
}

void save_projection(const Projection2D& proj, const std::filesystem::path& path) {
  EmbeddingMatrix m;
  m.dim = 2;
  m.record_ids = proj.record_ids;
  m.provider_tag = "tsne";
  m.data.assign(proj.points.begin(), proj.points.end());
  save_matrix(m, path);
  auto meta = path;
  meta += ".meta.json";
  nlohmann::json j = {{"perplexity", proj.perplexity},   {"iterations", proj.iterations},
                      {"seed", proj.seed},               {"final_kl", proj.final_kl},
                      {"kl_after_exaggeration", proj.kl_after_exaggeration}, {"barnes_hut", proj.barnes_hut}};
  write_file_atomic(meta, j.dump(2) + "\n");
}

Projection2D load_projection(const std::filesystem::path& path) {
  const auto m = load_matrix(path);
  require(m.dim == 2, ErrorKind::Validation, "projection file must be two-dimensional");
  auto meta_path = path;
  meta_path += ".meta.json";
  const auto j = nlohmann::json::parse(read_file(meta_path));
  Projection2D p;
  p.record_ids = m.record_ids;
  p.points.assign(m.data.begin(), m.data.end());
  p.perplexity = j.at("perplexity").get<double>();
  p.iterations = j.at("iterations").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.final_kl = j.at("final_kl").get<double>();
  p.kl_after_exaggeration = j.value("kl_after_exaggeration", 0.0);
  p.barnes_hut = j.value("barnes_hut", false);
  return p;
}

}  // namespace silico
