#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <set>

#include "silico/projection.hpp"
#include "support/test_support.hpp"

using namespace silico;
namespace td = silico::tsne_detail;

namespace {

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

ClusterModel model_for(const std::vector<std::string>& ids, const std::vector<std::uint32_t>& labels, std::size_t k) {
  ClusterModel m;
  m.k = k;
  m.dim = 1;
  m.centroids.assign(k, 0.0);
  m.record_ids = ids;
  m.assignments = labels;
  return m;
}

// KL(P || Q) straight from the definition.
double kl_oracle(const std::vector<double>& p, const std::vector<double>& y, std::size_t n) {
  double z = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) z += 1.0 / (1.0 + std::pow(y[2 * i] - y[2 * j], 2) + std::pow(y[2 * i + 1] - y[2 * j + 1], 2));
  double kl = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p[i * n + j] <= 0) continue;
      const double q = 1.0 / (1.0 + std::pow(y[2 * i] - y[2 * j], 2) + std::pow(y[2 * i + 1] - y[2 * j + 1], 2)) / z;
      kl += p[i * n + j] * std::log(p[i * n + j] / q);
    }
  return kl;
}

}  // namespace

TEST(Affinities, RowsHitTargetPerplexity) {
  const auto blobs = testsupport::planted_blobs(2, 20, 3, 1.0, 4.0, 1);
  std::vector<double> rows(blobs.matrix.data.begin(), blobs.matrix.data.end());
  const auto d = td::squared_distances(rows, 40, 3);
  std::vector<double> entropy;
  const auto p = td::conditional_affinities(d, 40, 10.0, &entropy);
  for (std::size_t i = 0; i < 40; ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < 40; ++j) sum += p[i * 40 + j];
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_EQ(p[i * 40 + i], 0.0);
    EXPECT_NEAR(std::exp(entropy[i]), 10.0, 1e-3);
  }
}

TEST(Affinities, DuplicateRowsHaveIdenticalConditionals) {
  std::vector<double> rows{0, 0, 1, 0, 0, 2, 3, 3, 1, 0, 5, 1, 2, 2};
  const std::size_t n = 7, dim = 2;
  rows[2 * 6] = rows[2 * 1];
  rows[2 * 6 + 1] = rows[2 * 1 + 1];
  const auto p = td::conditional_affinities(td::squared_distances(rows, n, dim), n, 1.5);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == 1 || j == 6) continue;
    EXPECT_NEAR(p[1 * n + j], p[6 * n + j], 1e-12);
  }
  EXPECT_NEAR(p[1 * n + 6], p[6 * n + 1], 1e-12);
}

TEST(Affinities, SymmetrizedJointSumsToOne) {
  Rng rng(3);
  std::vector<double> rows(30 * 4);
  for (auto& v : rows) v = rng.normal();
  const auto joint = td::symmetrize(td::conditional_affinities(td::squared_distances(rows, 30, 4), 30, 5.0), 30);
  double sum = 0;
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) {
      sum += joint[i * 30 + j];
      EXPECT_DOUBLE_EQ(joint[i * 30 + j], joint[j * 30 + i]);
    }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Affinities, KlMatchesDefinition) {
  Rng rng(8);
  const std::size_t n = 12;
  std::vector<double> rows(n * 3), y(n * 2);
  for (auto& v : rows) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  const auto joint = td::symmetrize(td::conditional_affinities(td::squared_distances(rows, n, 3), n, 3.0), n);
  EXPECT_NEAR(td::kl_divergence(joint, y, n), kl_oracle(joint, y, n), 1e-10);
}

TEST(Pca, RecoversDominantAxis) {
  Rng rng(12);
  const std::size_t n = 200;
  std::vector<double> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 10 * rng.normal();
    rows.insert(rows.end(), {t, t, 0.01 * rng.normal()});
  }
  const auto out = td::pca_reduce(rows, n, 3, 1);
  ASSERT_EQ(out.size(), n);
  // The projection should be +-(x + y)/sqrt(2) up to centering.
  double num = 0, den_a = 0, den_b = 0, mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += rows[3 * i];
  mean /= n;
  for (std::size_t i = 0; i < n; ++i) {
    const double ref = (rows[3 * i] - mean) * std::sqrt(2.0);
    num += ref * out[i];
    den_a += ref * ref;
    den_b += out[i] * out[i];
  }
  EXPECT_NEAR(std::abs(num) / std::sqrt(den_a * den_b), 1.0, 1e-6);
}

TEST(Tsne, SeparatesPlantedBlobs) {
  const auto blobs = testsupport::planted_blobs(3, 50, 16, 1.0, 10.0, 33);
  TsneOptions opt;
  opt.perplexity = 20;
  const auto proj = tsne(blobs.matrix, 5, opt);
  ASSERT_EQ(proj.size(), 150u);
  EXPECT_GT(testsupport::silhouette(proj.points, blobs.labels), 0.5);
  EXPECT_LT(proj.final_kl, proj.kl_after_exaggeration);
  EXPECT_FALSE(proj.barnes_hut);
}

TEST(Tsne, BarnesHutPathAlsoSeparates) {
  const auto blobs = testsupport::planted_blobs(3, 50, 16, 1.0, 10.0, 34);
  TsneOptions opt;
  opt.perplexity = 15;
  opt.exact_threshold = 10;
  const auto proj = tsne(blobs.matrix, 6, opt);
  EXPECT_TRUE(proj.barnes_hut);
  EXPECT_GT(testsupport::silhouette(proj.points, blobs.labels), 0.5);
  EXPECT_LT(proj.final_kl, proj.kl_after_exaggeration);
}

TEST(Tsne, Deterministic) {
  const auto blobs = testsupport::planted_blobs(2, 20, 4, 1.0, 8.0, 2);
  TsneOptions opt;
  opt.perplexity = 5;
  opt.iterations = 300;
  EXPECT_EQ(tsne(blobs.matrix, 1, opt).points, tsne(blobs.matrix, 1, opt).points);
}

TEST(Tsne, RejectsInfeasiblePerplexity) {
  const auto blobs = testsupport::planted_blobs(1, 10, 2, 1.0, 0.0, 2);
  TsneOptions opt;
  opt.perplexity = 30;
  EXPECT_THROW(tsne(blobs.matrix, 1, opt), Error);
  const auto tiny = testsupport::planted_blobs(1, 4, 2, 1.0, 0.0, 2);
  opt.perplexity = 0.5;
  EXPECT_THROW(tsne(tiny.matrix, 1, opt), Error);
}

TEST(Tsne, SaveLoadRoundTrip) {
  testsupport::TempDir dir;
  Projection2D p;
  p.record_ids = {"a", "b"};
  p.points = {0.25, -1.5, 3.0, 4.0};
  p.perplexity = 5;
  save_projection(p, dir / "p.bin");
  const auto back = load_projection(dir / "p.bin");
  EXPECT_EQ(back.record_ids, p.record_ids);
  EXPECT_EQ(back.points, p.points);
}

TEST(Scatter, OneCirclePerPointAndLegendPerCluster) {
  Projection2D p;
  std::vector<std::uint32_t> labels;
  for (std::size_t i = 0; i < 10; ++i) {
    p.record_ids.push_back("r" + std::to_string(i));
    p.points.insert(p.points.end(), {static_cast<double>(i), static_cast<double>(i % 3)});
    labels.push_back(i < 5 ? 0 : 1);
  }
  const auto svg = render_scatter_svg(p, model_for(p.record_ids, labels, 2), "snap-1");
  EXPECT_EQ(count_of(svg, "<circle"), 10u);
  EXPECT_EQ(count_of(svg, "class=\"legend-entry\""), 2u);
  EXPECT_NE(svg.find("snap-1"), std::string::npos);
  EXPECT_NE(svg.find("K=2"), std::string::npos);
}

TEST(Scatter, DegenerateBoundsRender) {
  Projection2D p;
  p.record_ids = {"a", "b", "c"};
  p.points = {1, 1, 1, 1, 1, 1};
  const auto svg = render_scatter_svg(p, model_for(p.record_ids, {0, 0, 0}, 1), "s");
  EXPECT_EQ(count_of(svg, "<circle"), 3u);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}

TEST(Scatter, EightDistinctLegendColors) {
  Projection2D p;
  std::vector<std::uint32_t> labels;
  for (std::uint32_t i = 0; i < 16; ++i) {
    p.record_ids.push_back("r" + std::to_string(i));
    p.points.insert(p.points.end(), {static_cast<double>(i), 0.0});
    labels.push_back(i % 8);
  }
  const auto svg = render_scatter_svg(p, model_for(p.record_ids, labels, 8), "s");
  const std::regex entry(R"re(class="legend-entry"><rect[^>]*fill="(#[0-9a-f]{6})")re");
  std::set<std::string> colors;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), entry); it != std::sregex_iterator(); ++it)
    colors.insert((*it)[1]);
  EXPECT_EQ(colors.size(), 8u);
}

TEST(Scatter, IdMismatchRejected) {
  Projection2D p;
  p.record_ids = {"a", "b"};
  p.points = {0, 0, 1, 1};
  EXPECT_THROW(render_scatter_svg(p, model_for({"a", "z"}, {0, 0}, 1), "s"), Error);
}
