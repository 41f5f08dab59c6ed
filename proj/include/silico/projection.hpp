#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "silico/clustering.hpp"
#include "silico/embedding.hpp"

namespace silico {

struct TsneOptions {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 0.0;  // 0 selects max(N / 12, 50)
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double momentum = 0.5;
  double final_momentum = 0.8;
  double theta = 0.5;
  std::size_t exact_threshold = 2000;  // Barnes-Hut above this many rows
  double init_scale = 1e-4;
  std::size_t pca_dims = 0;            // 0 disables PCA pre-reduction
};

struct Projection2D {
  std::vector<std::string> record_ids;
  std::vector<double> points;  // N x 2, row-major
  double perplexity = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  double final_kl = 0.0;
  double kl_after_exaggeration = 0.0;
  bool barnes_hut = false;

  std::size_t size() const { return record_ids.size(); }
  double x(std::size_t i) const { return points[2 * i]; }
  double y(std::size_t i) const { return points[2 * i + 1]; }
};

Projection2D tsne(const EmbeddingMatrix& matrix, std::uint64_t seed, const TsneOptions& options = {});

namespace tsne_detail {

/// Row-normalized Gaussian conditionals p(j|i) from a dense n x n matrix of
/// squared distances, each row's bandwidth tuned to the target perplexity.
/// `entropy` receives the achieved Shannon entropy (nats) per row.
std::vector<double> conditional_affinities(const std::vector<double>& sq_dist, std::size_t n, double perplexity,
                                           std::vector<double>* entropy = nullptr);

/// P = (P_cond + P_cond^T) / (2n); symmetric, sums to one.
std::vector<double> symmetrize(const std::vector<double>& conditional, std::size_t n);

std::vector<double> squared_distances(const std::vector<double>& rows, std::size_t n, std::size_t dim);

/// KL(P || Q) for a dense joint P and embedding Y (n x 2).
double kl_divergence(const std::vector<double>& p, const std::vector<double>& y, std::size_t n);

/// Projects rows onto their top principal components.
std::vector<double> pca_reduce(const std::vector<double>& rows, std::size_t n, std::size_t dim, std::size_t out_dim);

}  // namespace tsne_detail

void save_projection(const Projection2D& proj, const std::filesystem::path& path);
Projection2D load_projection(const std::filesystem::path& path);

/// Standalone SVG: one circle per point colored by cluster, a legend of
/// cluster indices and a title naming the snapshot and K.
std::string render_scatter_svg(const Projection2D& proj, const ClusterModel& model, const std::string& snapshot_id);
void scatter_svg(const Projection2D& proj, const ClusterModel& model, const std::string& snapshot_id,
                 const std::filesystem::path& path);

/// Distinct categorical colors ("#rrggbb") for k classes.
std::vector<std::string> categorical_palette(std::size_t k);

}  // namespace silico
