#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "silico/embedding.hpp"

namespace silico {

struct ClusterModel;

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;             // relative WCSS improvement that stops descent
  bool normalize_input = false;  // L2-normalize rows before clustering
  std::function<void(const ClusterModel&)> observer;  // sees every finished Lloyd run
};

/// K centroids (row-major, 64-bit) with the row-aligned assignment of each
/// record id.
struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;
  std::vector<std::string> record_ids;
  std::vector<std::uint32_t> assignments;
  double wcss = 0.0;
  std::size_t iterations_run = 0;
  std::uint64_t seed = 0;
  std::size_t restart = 0;
  bool normalized_input = false;
  bool converged = false;              // assignments stopped changing
  std::vector<double> wcss_history;    // objective after every Lloyd update

  std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
  std::vector<std::size_t> cluster_sizes() const;
};

/// Lloyd iterations from a seeded k-means++ start.
ClusterModel kmeans(const EmbeddingMatrix& matrix, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Lloyd iterations from caller-supplied centroids (k x dim, row-major).
ClusterModel kmeans_from(const EmbeddingMatrix& matrix, std::vector<double> initial, std::size_t k,
                         std::uint64_t seed, const KMeansOptions& options = {});

/// Lowest WCSS over `restarts` independently seeded runs (ties: earliest).
ClusterModel kmeans_best_of(const EmbeddingMatrix& matrix, std::size_t k, std::size_t restarts,
                            std::uint64_t seed, const KMeansOptions& options = {});

/// Recomputes the objective from scratch with the model's stored centroids.
double recompute_wcss(const EmbeddingMatrix& matrix, const ClusterModel& model);

struct ElbowPoint {
  std::size_t k = 0;
  double wcss = 0.0;
  double chord_distance = 0.0;
};

struct ElbowCurve {
  std::vector<ElbowPoint> points;
  std::size_t selected_k = 0;
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
  double confidence = 0.0;  // chord distance of the selected point
  bool low_confidence = false;
};

/// Chord distances are measured with k scaled to [0, 1] and WCSS divided by
/// WCSS(k_min); below this the curve is treated as having no clear elbow.
inline constexpr double kElbowConfidenceThreshold = 0.05;

/// Runs best-of-restarts k-means for each k and selects the point farthest
/// from the chord joining the curve's end points.
ElbowCurve elbow_select(const EmbeddingMatrix& matrix, std::size_t k_min, std::size_t k_max, std::size_t restarts,
                        std::uint64_t seed, const KMeansOptions& options = {},
                        std::vector<ClusterModel>* models = nullptr);

/// Picks the elbow of an already computed curve (fills chord distances).
void select_elbow(ElbowCurve& curve);

/// Chance-corrected agreement between two labelings of the same items.
double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

/// JSON (assignments, k, seed, wcss, flags) + centroid file in matrix format.
void save_model(const ClusterModel& model, const std::filesystem::path& json_path,
                const std::filesystem::path& centroid_path);
ClusterModel load_model(const std::filesystem::path& json_path, const std::filesystem::path& centroid_path);

}  // namespace silico
