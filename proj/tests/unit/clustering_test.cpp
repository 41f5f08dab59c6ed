#include <gtest/gtest.h>

#include <algorithm>

#include "silico/clustering.hpp"
#include "support/test_support.hpp"

using namespace silico;
using testsupport::matrix_1d;

namespace {

std::vector<std::int64_t> as_labels(const ClusterModel& m) {
  return {m.assignments.begin(), m.assignments.end()};
}

}  // namespace

TEST(KMeans, DegenerateIdenticalRows) {
  const auto m = matrix_1d({3, 3, 3, 3});
  const auto model = kmeans(m, 1, 1);
  EXPECT_EQ(model.wcss, 0.0);
  EXPECT_EQ(model.centroids[0], 3.0);
}

TEST(KMeans, FourPointInstance) {
  const auto m = matrix_1d({0, 1, 10, 11});
  const auto model = kmeans_best_of(m, 2, 10, 5);
  EXPECT_EQ(model.assignments[0], model.assignments[1]);
  EXPECT_EQ(model.assignments[2], model.assignments[3]);
  EXPECT_NE(model.assignments[0], model.assignments[2]);
  std::vector<double> c = model.centroids;
  std::sort(c.begin(), c.end());
  EXPECT_DOUBLE_EQ(c[0], 0.5);
  EXPECT_DOUBLE_EQ(c[1], 10.5);
  EXPECT_DOUBLE_EQ(model.wcss, 1.0);
  EXPECT_NEAR(model.wcss, testsupport::brute_force_min_wcss(m, 2), 1e-12);
}

TEST(KMeans, SingleSwapNeverImprovesConvergedModel) {
  const auto m = matrix_1d({0, 1, 10, 11});
  const auto model = kmeans_best_of(m, 2, 10, 5);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto labels = model.assignments;
    labels[i] = 1 - labels[i];
    if (std::count(labels.begin(), labels.end(), labels[i]) == static_cast<long>(labels.size())) continue;
    EXPECT_GE(testsupport::wcss_of(m, labels, 2), model.wcss);
  }
}

TEST(KMeans, GlobalOptimumOnSmallInstances) {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.below(6);
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(std::round(rng.uniform() * 1000) / 10.0);
    const auto m = matrix_1d(xs);
    const auto model = kmeans_best_of(m, 2, 10, 1000 + trial);
    EXPECT_NEAR(model.wcss, testsupport::brute_force_min_wcss(m, 2), 1e-9) << "trial " << trial;
  }
}

// Every single-point relabeling, to any cluster, is checked even for one restart.
TEST(KMeans, NoSinglePointMoveImprovesAnyRestart) {
  const std::vector<std::vector<double>> cases = {{-72.75, 13, -27.875, 35.625, 113.875, -21.25},
                                                  {8.125, 54.5, 94.375, -62, 94, 39.25, 39.25}};
  for (const auto& xs : cases) {
    const auto m = matrix_1d(xs);
    for (std::size_t k = 2; k <= 3; ++k) {
      for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto model = kmeans_best_of(m, k, 1, seed);
        for (std::size_t i = 0; i < m.rows(); ++i) {
          for (std::uint32_t c = 0; c < k; ++c) {
            auto labels = model.assignments;
            if (labels[i] == c) continue;
            labels[i] = c;
            if (std::count(labels.begin(), labels.end(), model.assignments[i]) == 0) continue;
            EXPECT_GE(testsupport::wcss_of(m, labels, k), model.wcss - 1e-9) << "k=" << k << " seed=" << seed;
          }
        }
      }
    }
  }
}

TEST(KMeans, RejectsBadK) {
  const auto m = matrix_1d({0, 1, 2});
  EXPECT_THROW(kmeans(m, 0, 1), Error);
  EXPECT_THROW(kmeans(m, 4, 1), Error);
}

TEST(KMeans, SeedDeterminism) {
  const auto blobs = testsupport::planted_blobs(3, 30, 4, 1.0, 10.0, 8);
  const auto a = kmeans_best_of(blobs.matrix, 3, 4, 11);
  const auto b = kmeans_best_of(blobs.matrix, 3, 4, 11);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(KMeans, WcssHistoryNeverIncreases) {
  const auto blobs = testsupport::planted_blobs(5, 40, 6, 1.0, 3.0, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = kmeans(blobs.matrix, 5, seed);
    for (std::size_t i = 1; i < model.wcss_history.size(); ++i) {
      EXPECT_LE(model.wcss_history[i], model.wcss_history[i - 1] * (1 + 1e-12));
    }
  }
}

TEST(KMeans, RecomputedWcssMatchesStored) {
  const auto blobs = testsupport::planted_blobs(4, 25, 5, 1.0, 5.0, 3);
  const auto model = kmeans(blobs.matrix, 4, 9);
  EXPECT_NEAR(recompute_wcss(blobs.matrix, model), model.wcss, 1e-6 * model.wcss);
}

TEST(KMeans, HandBuiltModelWcss) {
  const auto m = matrix_1d({0, 2});
  ClusterModel model;
  model.k = 1;
  model.dim = 1;
  model.centroids = {1.0};
  model.record_ids = m.record_ids;
  model.assignments = {0, 0};
  EXPECT_DOUBLE_EQ(recompute_wcss(m, model), 2.0);
  model.record_ids = {"x", "y"};
  EXPECT_THROW(recompute_wcss(m, model), Error);
}

TEST(KMeans, PlantedEightBlobsRecovered) {
  const auto blobs = testsupport::planted_blobs(8, 100, 16, 1.0, 20.0, 2026);
  const auto model = kmeans_best_of(blobs.matrix, 8, 10, 17);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(as_labels(model), blobs.labels), 1.0);
}

TEST(Elbow, PlantedStructureSelectsTrueK) {
  const auto eight = testsupport::planted_blobs(8, 100, 16, 1.0, 20.0, 2026);
  EXPECT_EQ(elbow_select(eight.matrix, 2, 15, 10, 4).selected_k, 8u);
  const auto three = testsupport::planted_blobs(3, 60, 8, 1.0, 20.0, 99);
  EXPECT_EQ(elbow_select(three.matrix, 2, 15, 10, 4).selected_k, 3u);
}

TEST(Elbow, SingleBlobIsLowConfidence) {
  // Same dimensionality as the planted-blob cases.
  const auto one = testsupport::planted_blobs(1, 200, 16, 1.0, 0.0, 5);
  const auto curve = elbow_select(one.matrix, 2, 10, 5, 4);
  EXPECT_GE(curve.selected_k, 2u);
  EXPECT_LE(curve.selected_k, 10u);
  EXPECT_TRUE(curve.low_confidence);
}

TEST(Elbow, ChordRuleOnHandCurve) {
  ElbowCurve curve;
  const double w[] = {100, 40, 30, 25, 22};
  for (std::size_t i = 0; i < 5; ++i) curve.points.push_back({i + 1, w[i], 0.0});
  select_elbow(curve);
  EXPECT_EQ(curve.selected_k, 2u);
  EXPECT_FALSE(curve.low_confidence);
  EXPECT_EQ(curve.points.front().chord_distance, 0.0);
}

TEST(Elbow, RejectsBadRange) {
  const auto m = matrix_1d({0, 1, 2, 3});
  EXPECT_THROW(elbow_select(m, 3, 2, 2, 1), Error);
}

TEST(Ari, AgreesWithPairCountingOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<std::int64_t> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(static_cast<std::int64_t>(rng.below(4)));
      b.push_back(static_cast<std::int64_t>(rng.below(3)));
    }
    EXPECT_NEAR(adjusted_rand_index(a, b), testsupport::pair_counting_ari(a, b), 1e-12);
  }
}

TEST(Ari, InvariantToRelabeling) {
  const std::vector<std::int64_t> a{0, 0, 1, 1, 2, 2}, b{5, 5, 3, 3, 9, 9};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), 1.0);
}

TEST(Model, SaveLoadRoundTrip) {
  testsupport::TempDir dir;
  const auto blobs = testsupport::planted_blobs(3, 10, 3, 1.0, 10.0, 1);
  const auto model = kmeans(blobs.matrix, 3, 2);
  save_model(model, dir / "model.json", dir / "centroids.bin");
  const auto back = load_model(dir / "model.json", dir / "centroids.bin");
  EXPECT_EQ(back.assignments, model.assignments);
  EXPECT_EQ(back.record_ids, model.record_ids);
  EXPECT_EQ(back.k, 3u);
  ASSERT_EQ(back.centroids.size(), model.centroids.size());
  for (std::size_t i = 0; i < model.centroids.size(); ++i) {
    EXPECT_EQ(back.centroids[i], static_cast<double>(static_cast<float>(model.centroids[i])));
  }
}
