#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "silico/ngram.hpp"

namespace silico {

struct Canvas {
  double width = 800;
  double height = 600;
};

struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  bool intersects(const BBox& o) const { return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h; }
  bool inside(const Canvas& c) const { return x >= 0 && y >= 0 && x + w <= c.width && y + h <= c.height; }
};

struct PlacedPhrase {
  std::string phrase;
  std::uint64_t count = 0;
  double font_size = 0;
  double x = 0, y = 0;  // text baseline origin
  BBox bbox;
  std::size_t color_index = 0;
};

struct WordCloudPanel {
  std::size_t cluster_index = 0;
  Canvas canvas;
  std::vector<PlacedPhrase> placements;
  std::uint64_t seed = 0;
  std::size_t dropped = 0;  // phrases with no free spot on the canvas
};

struct LayoutOptions {
  std::size_t max_phrases = 60;
  double font_min = 10;
  double font_max = 48;
};

/// Width of `phrase` at unit font size from a fixed per-character table.
double text_advance(std::string_view phrase);

/// f_min + (f_max - f_min) * sqrt(count / count_max)
double font_size_for(std::uint64_t count, std::uint64_t count_max, const LayoutOptions& options = {});

/// Greedy Archimedean-spiral placement in descending count order.
WordCloudPanel layout_panel(const NGramProfile& profile, Canvas canvas, std::uint64_t seed,
                            const LayoutOptions& options = {});

struct VisualFeatureSet {
  std::vector<WordCloudPanel> panels;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::filesystem::path svg_path;
  std::optional<std::filesystem::path> png_path;
};

/// cols = ceil(sqrt(k)), rows = ceil(k / cols).
std::pair<std::size_t, std::size_t> grid_shape(std::size_t k);

std::string render_grid_svg(const std::vector<WordCloudPanel>& panels, std::size_t k);

/// Writes the composed SVG and, when `png_width` is set, a rasterized PNG.
VisualFeatureSet compose_grid(std::vector<WordCloudPanel> panels, std::size_t k, const std::filesystem::path& svg_path,
                              std::optional<int> png_width = std::nullopt);

/// False when the build has no raster backend.
bool png_supported();

}  // namespace silico
