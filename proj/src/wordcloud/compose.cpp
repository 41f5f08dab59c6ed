#include <fmt/format.h>

#include "silico/text.hpp"
#include "silico/util.hpp"
#include "silico/wordcloud.hpp"

#ifdef SILICO_HAVE_OPENCV
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace silico {

namespace {

constexpr double kTitleBand = 32;
constexpr double kGap = 12;
constexpr const char* kPhraseColors[8] = {"#1b4f72", "#b03a2e", "#1e8449", "#7d3c98",
                                          "#b9770e", "#117864", "#566573", "#a04000"};

struct CellOrigin {
  double x, y;
};

CellOrigin cell_origin(std::size_t index, std::size_t cols, const Canvas& c) {
  const std::size_t row = index / cols, col = index % cols;
  return {kGap + static_cast<double>(col) * (c.width + kGap),
          kGap + static_cast<double>(row) * (c.height + kTitleBand + kGap)};
}

void check_panels(const std::vector<WordCloudPanel>& panels, std::size_t k) {
  require(panels.size() == k, ErrorKind::Validation,
          "expected " + std::to_string(k) + " word-cloud panels, got " + std::to_string(panels.size()));
  for (std::size_t i = 0; i < k; ++i) {
    require(panels[i].cluster_index == i, ErrorKind::Validation, "word-cloud panels must be in cluster order");
  }
}

}  // namespace

std::string render_grid_svg(const std::vector<WordCloudPanel>& panels, std::size_t k) {
  check_panels(panels, k);
  const auto [rows, cols] = grid_shape(k);
  const Canvas cell = panels.front().canvas;
  const double width = kGap + static_cast<double>(cols) * (cell.width + kGap);
  const double height = kGap + static_cast<double>(rows) * (cell.height + kTitleBand + kGap);

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" data-grid=\"{2}x{3}\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      width, height, rows, cols);
  for (const auto& panel : panels) {
    const auto origin = cell_origin(panel.cluster_index, cols, cell);
    svg += fmt::format("<g id=\"panel-{0}\" class=\"panel\" transform=\"translate({1},{2})\">\n"
                       "<text class=\"title\" x=\"{3}\" y=\"22\" text-anchor=\"middle\" "
                       "font-family=\"Helvetica, Arial, sans-serif\" font-size=\"18\" font-weight=\"bold\">"
                       "Cluster {0}</text>\n"
                       "<g transform=\"translate(0,{4})\">\n"
                       "<rect width=\"{5}\" height=\"{6}\" fill=\"#fbfbfb\" stroke=\"#cccccc\"/>\n",
                       panel.cluster_index, origin.x, origin.y, panel.canvas.width / 2.0, kTitleBand,
                       panel.canvas.width, panel.canvas.height);
    for (const auto& p : panel.placements) {
      svg += fmt::format(
          "<text class=\"phrase\" x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"{:.2f}\" textLength=\"{:.2f}\" "
          "lengthAdjust=\"spacingAndGlyphs\" font-family=\"Helvetica, Arial, sans-serif\" fill=\"{}\" "
          "data-count=\"{}\">{}</text>\n",
          p.x, p.y, p.font_size, p.bbox.w, kPhraseColors[p.color_index % 8], p.count, text::xml_escape(p.phrase));
    }
    svg += "</g>\n</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

bool png_supported() {
#ifdef SILICO_HAVE_OPENCV
  return true;
#else
  return false;
#endif
}

namespace {

#ifdef SILICO_HAVE_OPENCV
cv::Scalar bgra(const char* hex) {
  const auto v = std::stoul(std::string(hex + 1), nullptr, 16);
  return {static_cast<double>(v & 0xFF), static_cast<double>((v >> 8) & 0xFF), static_cast<double>((v >> 16) & 0xFF), 255};
}

void render_png(const std::vector<WordCloudPanel>& panels, std::size_t k, int png_width,
                const std::filesystem::path& path) {
  const auto [rows, cols] = grid_shape(k);
  const Canvas cell = panels.front().canvas;
  const double width = kGap + static_cast<double>(cols) * (cell.width + kGap);
  const double height = kGap + static_cast<double>(rows) * (cell.height + kTitleBand + kGap);
  const double s = static_cast<double>(png_width) / width;
  cv::Mat img(static_cast<int>(std::lround(height * s)), png_width, CV_8UC4, cv::Scalar(255, 255, 255, 255));
  const int font = cv::FONT_HERSHEY_SIMPLEX;
  auto draw = [&](const std::string& label, const BBox& box, const cv::Scalar& color) {
    int base = 0;
    const auto unit = cv::getTextSize(label, font, 1.0, 1, &base);
    const double scale = std::min(box.w * s / std::max(1, unit.width), box.h * s / std::max(1, unit.height + base));
    const int thickness = std::max(1, static_cast<int>(scale * 1.5));
    cv::putText(img, label, cv::Point(static_cast<int>(box.x * s), static_cast<int>((box.y + box.h) * s - base * scale)),
                font, scale, color, thickness, cv::LINE_AA);
  };
  for (const auto& panel : panels) {
    const auto o = cell_origin(panel.cluster_index, cols, cell);
    draw("Cluster " + std::to_string(panel.cluster_index), {o.x + cell.width / 2 - 60, o.y + 4, 120, 24},
         cv::Scalar(0, 0, 0, 255));
    cv::rectangle(img, cv::Rect(static_cast<int>(o.x * s), static_cast<int>((o.y + kTitleBand) * s),
                                static_cast<int>(cell.width * s), static_cast<int>(cell.height * s)),
                  cv::Scalar(204, 204, 204, 255));
    for (const auto& p : panel.placements) {
      BBox b = p.bbox;
      b.x += o.x;
      b.y += o.y + kTitleBand;
      draw(p.phrase, b, bgra(kPhraseColors[p.color_index % 8]));
    }
  }
  std::vector<uchar> buf;
  require(cv::imencode(".png", img, buf), ErrorKind::Io, "PNG encoding failed");
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(buf.data()), buf.size()));
}
#endif

}  // namespace

VisualFeatureSet compose_grid(std::vector<WordCloudPanel> panels, std::size_t k, const std::filesystem::path& svg_path,
                              std::optional<int> png_width) {
  VisualFeatureSet set;
  std::tie(set.rows, set.cols) = grid_shape(k);
  write_file_atomic(svg_path, render_grid_svg(panels, k));
  set.svg_path = svg_path;
  if (png_width) {
    require(*png_width > 0, ErrorKind::Validation, "PNG width must be positive");
#ifdef SILICO_HAVE_OPENCV
    auto png = svg_path;
    png.replace_extension(".png");
    render_png(panels, k, *png_width, png);
    set.png_path = png;
#else
    fail(ErrorKind::Validation, "this build has no PNG rasterizer; render SVG only");
#endif
  }
  set.panels = std::move(panels);
  return set;
}

}  // namespace silico
