#include <cmath>

#include "silico/util.hpp"
#include "silico/wordcloud.hpp"

namespace silico {

namespace {

// Advance widths in 1/1000 em for printable ASCII (Helvetica metrics).
constexpr short kAsciiAdvance[95] = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,  //  !"#$%&'()*+,-./
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,  // 0-9:;<=>?
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,  // @A-O
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,  // P-Z[\]^_
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,  // `a-o
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584,       // p-z{|}~
};

constexpr double kAscent = 0.92;
constexpr double kLineHeight = 1.18;

}  // namespace

double text_advance(std::string_view phrase) {
  double width = 0.0;
  std::size_t i = 0;
  while (i < phrase.size()) {
    const auto c = static_cast<unsigned char>(phrase[i]);
    if (c < 0x80) {
      width += (c >= 32 && c < 127) ? kAsciiAdvance[c - 32] / 1000.0 : 0.5;
      ++i;
      continue;
    }
    const std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : 2;
    // Three- and four-byte sequences are mostly CJK and symbols: full width.
    width += len >= 3 ? 1.0 : 0.6;
    i += len;
  }
  return width;
}

double font_size_for(std::uint64_t count, std::uint64_t count_max, const LayoutOptions& o) {
  if (count_max == 0) return o.font_max;
  return o.font_min + (o.font_max - o.font_min) *
                          std::sqrt(static_cast<double>(count) / static_cast<double>(count_max));
}

WordCloudPanel layout_panel(const NGramProfile& profile, Canvas canvas, std::uint64_t seed, const LayoutOptions& o) {
  require(canvas.width >= 200 && canvas.height >= 200, ErrorKind::Validation, "word-cloud canvas must be at least 200x200");
  WordCloudPanel panel;
  panel.cluster_index = profile.cluster_index;
  panel.canvas = canvas;
  panel.seed = seed;
  if (profile.counts.empty()) return panel;

  const auto phrases = top_phrases(profile, o.max_phrases);
  const std::uint64_t count_max = phrases.front().second;

  Rng rng(seed);
  const double start_angle = 2.0 * M_PI * rng.uniform();
  const double turn_spacing = 4.0 + 4.0 * rng.uniform();  // px between spiral turns
  const double growth = turn_spacing / (2.0 * M_PI);
  const double max_radius = std::hypot(canvas.width, canvas.height) / 2.0;
  const double cx = canvas.width / 2.0, cy = canvas.height / 2.0;

  for (std::size_t rank = 0; rank < phrases.size(); ++rank) {
    const auto& [phrase, count] = phrases[rank];
    const double size = font_size_for(count, count_max, o);
    const double w = text_advance(phrase) * size;
    const double h = kLineHeight * size;
    bool placed = false;
    for (double t = 0.0;; t += 0.1) {
      const double r = growth * t;
      if (r > max_radius) break;
      const double px = cx + r * std::cos(start_angle + t);
      const double py = cy + r * std::sin(start_angle + t);
      const BBox box{px - w / 2.0, py - h / 2.0, w, h};
      if (!box.inside(canvas)) continue;
      bool clear = true;
      for (const auto& other : panel.placements) {
        if (box.intersects(other.bbox)) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      panel.placements.push_back({phrase, count, size, box.x, box.y + kAscent * size, box, rank % 8});
      placed = true;
      break;
    }
    if (!placed) ++panel.dropped;
  }
  return panel;
}

std::pair<std::size_t, std::size_t> grid_shape(std::size_t k) {
  require(k >= 1, ErrorKind::Validation, "grid needs at least one panel");
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))));
  const std::size_t rows = (k + cols - 1) / cols;
  return {rows, cols};
}

}  // namespace silico
