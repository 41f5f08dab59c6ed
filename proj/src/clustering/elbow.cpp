#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "silico/clustering.hpp"
#include "silico/log.hpp"
#include "silico/util.hpp"

namespace silico {

void select_elbow(ElbowCurve& curve) {
  auto& pts = curve.points;
  require(pts.size() >= 2, ErrorKind::Validation, "an elbow curve needs at least two points");
  const double k0 = static_cast<double>(pts.front().k);
  const double k1 = static_cast<double>(pts.back().k);
  const double w0 = pts.front().wcss;
  const double scale = w0 > 0.0 ? w0 : 1.0;

  // Frame: x = (k - k_min)/(k_max - k_min), y = wcss / wcss(k_min).
  const double x_end = 1.0;
  const double y_start = w0 / scale;
  const double y_end = pts.back().wcss / scale;
  const double dx = x_end;
  const double dy = y_end - y_start;
  const double len = std::hypot(dx, dy);

  curve.selected_k = pts.front().k;
  curve.confidence = 0.0;
  for (auto& pt : pts) {
    const double x = (static_cast<double>(pt.k) - k0) / (k1 - k0);
    const double y = pt.wcss / scale;
    // Positive below the chord, where a convex decreasing curve bends.
    pt.chord_distance = ((y_start - y) * dx + x * dy) / len;
    if (pt.chord_distance > curve.confidence) {
      curve.confidence = pt.chord_distance;
      curve.selected_k = pt.k;
    }
  }
  curve.low_confidence = curve.confidence < kElbowConfidenceThreshold;
}

ElbowCurve elbow_select(const EmbeddingMatrix& matrix, std::size_t k_min, std::size_t k_max, std::size_t restarts,
                        std::uint64_t seed, const KMeansOptions& options, std::vector<ClusterModel>* models) {
  require(k_min >= 1 && k_min < k_max, ErrorKind::Validation, "elbow range needs 1 <= k_min < k_max");
  require(k_max <= matrix.rows(), ErrorKind::Validation, "elbow k_max exceeds the number of rows");
  ElbowCurve curve;
  curve.restarts = restarts;
  curve.seed = seed;
  std::vector<ClusterModel> fitted;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    auto best = kmeans_best_of(matrix, k, restarts, derive_seed(seed, "k-" + std::to_string(k)), options);
    if (!fitted.empty() && best.wcss > fitted.back().wcss) {
      // Nested start: the k-1 solution plus its worst-served point.
      const auto& prev = fitted.back();
      std::vector<double> init = prev.centroids;
      double far_d = -1.0;
      std::vector<double> far_x(matrix.dim);
      std::vector<double> x(matrix.dim);
      for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto raw = matrix.row(i);
        double norm = 1.0;
        if (options.normalize_input) {
          double sq = 0.0;
          for (float v : raw) sq += static_cast<double>(v) * v;
          norm = sq > 0.0 ? std::sqrt(sq) : 1.0;
        }
        for (std::size_t d = 0; d < matrix.dim; ++d) x[d] = raw[d] / norm;
        const auto c = prev.centroid(prev.assignments[i]);
        double s = 0.0;
        for (std::size_t d = 0; d < matrix.dim; ++d) s += (x[d] - c[d]) * (x[d] - c[d]);
        if (s > far_d) {
          far_d = s;
          far_x = x;
        }
      }
      init.insert(init.end(), far_x.begin(), far_x.end());
      auto nested = kmeans_from(matrix, std::move(init), k, best.seed, options);
      log().debug("elbow k={} best-of-restarts {} exceeded k-1; nested start gives {}", k, best.wcss, nested.wcss);
      if (nested.wcss < best.wcss) best = std::move(nested);
    }
    double w = best.wcss;
    if (!fitted.empty() && w > fitted.back().wcss) w = fitted.back().wcss;
    curve.points.push_back({k, w, 0.0});
    fitted.push_back(std::move(best));
  }
  select_elbow(curve);
  if (models) *models = std::move(fitted);
  return curve;
}

double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  require(a.size() == b.size(), ErrorKind::Validation, "labelings differ in length");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<std::int64_t, std::int64_t>, double> table;
  std::map<std::int64_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [_, v] : table) index += c2(v);
  for (const auto& [_, v] : rows) sa += c2(v);
  for (const auto& [_, v] : cols) sb += c2(v);
  const double total = c2(n);
  if (total == 0.0) return 1.0;
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;  // both labelings trivial
  return (index - expected) / (max_index - expected);
}

void save_model(const ClusterModel& m, const std::filesystem::path& json_path,
                const std::filesystem::path& centroid_path) {
  nlohmann::json j = {
      {"schema", "cluster-model/1"},
      {"k", m.k},
      {"dim", m.dim},
      {"seed", m.seed},
      {"restart", m.restart},
      {"wcss", m.wcss},
      {"iterations_run", m.iterations_run},
      {"normalized_input", m.normalized_input},
      {"converged", m.converged},
      {"wcss_history", m.wcss_history},
      {"record_ids", m.record_ids},
      {"assignments", m.assignments},
      {"centroid_file", centroid_path.filename().string()},
  };
  write_file_atomic(json_path, j.dump(1) + "\n");
  EmbeddingMatrix c;
  c.dim = m.dim;
  c.provider_tag = "centroids";
  for (std::size_t i = 0; i < m.k; ++i) c.record_ids.push_back("cluster-" + std::to_string(i));
  c.data.assign(m.centroids.begin(), m.centroids.end());
  save_matrix(c, centroid_path);
}

ClusterModel load_model(const std::filesystem::path& json_path, const std::filesystem::path& centroid_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(json_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Validation, std::string("cluster model is not JSON: ") + e.what());
  }
  require(j.value("schema", "") == "cluster-model/1", ErrorKind::Validation, "unsupported cluster model schema");
  ClusterModel m;
  m.k = j.at("k").get<std::size_t>();
  m.dim = j.at("dim").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.restart = j.value("restart", std::size_t{0});
  m.wcss = j.at("wcss").get<double>();
  m.iterations_run = j.at("iterations_run").get<std::size_t>();
  m.normalized_input = j.at("normalized_input").get<bool>();
  m.converged = j.value("converged", false);
  m.wcss_history = j.value("wcss_history", std::vector<double>{});
  m.record_ids = j.at("record_ids").get<std::vector<std::string>>();
  m.assignments = j.at("assignments").get<std::vector<std::uint32_t>>();
  require(m.record_ids.size() == m.assignments.size(), ErrorKind::Validation, "model assignment length mismatch");
  for (auto a : m.assignments) require(a < m.k, ErrorKind::Validation, "model assignment out of range");
  // Centroids are persisted as float32; the stored wcss keeps full precision.
  const auto c = load_matrix(centroid_path);
  require(c.rows() == m.k && c.dim == m.dim, ErrorKind::Validation, "centroid file shape mismatch");
  m.centroids.assign(c.data.begin(), c.data.end());
  return m;
}

}  // namespace silico
