#include <gtest/gtest.h>

#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "silico/util.hpp"
#include "silico/wordcloud.hpp"
#include "support/test_support.hpp"

using namespace silico;

namespace {

NGramProfile profile_of(PhraseCounts counts, std::size_t index = 0) {
  NGramProfile p;
  p.cluster_index = index;
  p.counts = std::move(counts);
  return p;
}

bool is_xml(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
  return true;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Font, SqrtScale) {
  EXPECT_DOUBLE_EQ(font_size_for(100, 100), 48.0);
  EXPECT_DOUBLE_EQ(font_size_for(25, 100), 10 + 38 * 0.5);
  EXPECT_DOUBLE_EQ(font_size_for(0, 100), 10.0);
}

TEST(Layout, SinglePhraseAtCenterWithMaxFont) {
  const auto panel = layout_panel(profile_of({{"whisky tasting", 5}}), Canvas{800, 600}, 1);
  ASSERT_EQ(panel.placements.size(), 1u);
  const auto& p = panel.placements[0];
  EXPECT_DOUBLE_EQ(p.font_size, 48.0);
  EXPECT_NEAR(p.bbox.x + p.bbox.w / 2, 400.0, 1e-9);
  EXPECT_NEAR(p.bbox.y + p.bbox.h / 2, 300.0, 1e-9);
}

TEST(Layout, EqualCountsEqualFontsDisjoint) {
  const auto panel = layout_panel(profile_of({{"alpha beta", 3}, {"gamma delta", 3}}), Canvas{800, 600}, 2);
  ASSERT_EQ(panel.placements.size(), 2u);
  EXPECT_EQ(panel.placements[0].font_size, panel.placements[1].font_size);
  EXPECT_EQ(testsupport::overlapping_pairs(panel), 0u);
}

TEST(Layout, EmptyProfileEmptyPanel) {
  const auto panel = layout_panel(NGramProfile{}, Canvas{800, 600}, 1);
  EXPECT_TRUE(panel.placements.empty());
  EXPECT_EQ(panel.dropped, 0u);
}

TEST(Layout, ZipfPanelsAreDisjointInsideAndMonotone) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Canvas canvas{800, 600};
    const auto panel = layout_panel(profile_of(testsupport::zipf_counts(60, 500, 1.0, seed)), canvas, seed);
    EXPECT_EQ(testsupport::overlapping_pairs(panel), 0u) << "seed " << seed;
    for (std::size_t i = 0; i < panel.placements.size(); ++i) {
      const auto& p = panel.placements[i];
      EXPECT_TRUE(p.bbox.inside(canvas));
      if (i > 0) {
        const auto& prev = panel.placements[i - 1];
        EXPECT_GE(prev.count, p.count);
        EXPECT_GE(prev.font_size, p.font_size);
      }
    }
    EXPECT_EQ(panel.placements.size() + panel.dropped, 60u);
  }
}

TEST(Layout, CrowdedCanvasDropsAndCounts) {
  PhraseCounts counts;
  for (int i = 0; i < 200; ++i) counts["a rather long phrase number " + std::to_string(i)] = 50;
  LayoutOptions opt;
  opt.max_phrases = 200;
  const auto panel = layout_panel(profile_of(counts), Canvas{200, 200}, 3, opt);
  EXPECT_GT(panel.dropped, 0u);
  EXPECT_EQ(panel.placements.size() + panel.dropped, 200u);
  EXPECT_EQ(testsupport::overlapping_pairs(panel), 0u);
}

TEST(Layout, RejectsTinyCanvas) {
  EXPECT_THROW(layout_panel(profile_of({{"a b", 1}}), Canvas{100, 600}, 1), Error);
}

TEST(Grid, Shapes) {
  EXPECT_EQ(grid_shape(8), (std::pair<std::size_t, std::size_t>{3, 3}));
  EXPECT_EQ(grid_shape(1), (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_EQ(grid_shape(5), (std::pair<std::size_t, std::size_t>{2, 3}));
}

TEST(Grid, EightPanelsTitledAndValidXml) {
  std::vector<WordCloudPanel> panels;
  for (std::size_t c = 0; c < 8; ++c) {
    panels.push_back(layout_panel(profile_of(testsupport::zipf_counts(30, 100, 1.1, c), c), Canvas{800, 600}, c));
  }
  const auto svg = render_grid_svg(panels, 8);
  EXPECT_TRUE(is_xml(svg));
  for (std::size_t c = 0; c < 8; ++c) EXPECT_NE(svg.find(">Cluster " + std::to_string(c) + "<"), std::string::npos);
  EXPECT_EQ(count_of(svg, "class=\"panel\""), 8u);
  EXPECT_EQ(render_grid_svg(panels, 8), svg);
}

TEST(Grid, EscapesMarkupInPhrases) {
  std::vector<WordCloudPanel> panels{layout_panel(profile_of({{"a < b & c", 2}}), Canvas{800, 600}, 1)};
  EXPECT_TRUE(is_xml(render_grid_svg(panels, 1)));
}

TEST(Grid, ComposeWritesFiles) {
  testsupport::TempDir dir;
  std::vector<WordCloudPanel> panels{layout_panel(profile_of({{"x y", 1}}), Canvas{800, 600}, 1)};
  const auto set = compose_grid(panels, 1, dir / "grid.svg");
  EXPECT_EQ(set.rows, 1u);
  EXPECT_EQ(set.cols, 1u);
  EXPECT_TRUE(is_xml(read_file(dir / "grid.svg")));
  EXPECT_THROW(compose_grid(panels, 2, dir / "bad.svg"), Error);
  if (png_supported()) {
    const auto with_png = compose_grid(panels, 1, dir / "grid2.svg", 400);
    ASSERT_TRUE(with_png.png_path);
    EXPECT_EQ(read_file(*with_png.png_path).substr(1, 3), "PNG");
  }
}
