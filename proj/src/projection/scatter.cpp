#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "silico/projection.hpp"
#include "silico/text.hpp"
#include "silico/util.hpp"

namespace silico {

std::vector<std::string> categorical_palette(std::size_t k) {
  static const char* kBase[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
                                "#8c6d31", "#843c39", "#7b4173", "#3182bd", "#e6550d", "#31a354",
                                "#756bb1", "#636363"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (i < std::size(kBase)) {
      out.emplace_back(kBase[i]);
      continue;
    }
    // Golden-angle hue walk past the fixed table.
    const double h = std::fmod(static_cast<double>(i) * 137.508, 360.0) / 60.0;
    const double s = 0.65, v = 0.85;
    const double c = v * s;
    const double xx = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
      case 0: r = c; g = xx; break;
      case 1: r = xx; g = c; break;
      case 2: g = c; b = xx; break;
      case 3: g = xx; b = c; break;
      case 4: r = xx; b = c; break;
      default: r = c; b = xx; break;
    }
    const double m = v - c;
    auto byte = [&](double t) { return static_cast<int>(std::lround((t + m) * 255.0)); };
    out.push_back(fmt::format("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b)));
  }
  return out;
}

std::string render_scatter_svg(const Projection2D& proj, const ClusterModel& model, const std::string& snapshot_id) {
  require(proj.record_ids.size() == model.record_ids.size(), ErrorKind::Validation,
          "projection and cluster model cover different records");
  std::unordered_map<std::string_view, std::uint32_t> cluster_of;
  for (std::size_t i = 0; i < model.record_ids.size(); ++i) cluster_of[model.record_ids[i]] = model.assignments[i];
  for (const auto& id : proj.record_ids) {
    require(cluster_of.contains(id), ErrorKind::Validation, "record " + id + " is missing from the cluster model");
  }

  constexpr double kWidth = 960, kHeight = 720, kPlot = 640, kLeft = 40, kTop = 60;
  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  if (proj.size() > 0) {
    minx = maxx = proj.x(0);
    miny = maxy = proj.y(0);
  }
  for (std::size_t i = 1; i < proj.size(); ++i) {
    minx = std::min(minx, proj.x(i));
    maxx = std::max(maxx, proj.x(i));
    miny = std::min(miny, proj.y(i));
    maxy = std::max(maxy, proj.y(i));
  }
  // Degenerate extents get a unit pad so every point lands mid-canvas.
  if (maxx - minx <= 0.0) {
    minx -= 1.0;
    maxx += 1.0;
  }
  if (maxy - miny <= 0.0) {
    miny -= 1.0;
    maxy += 1.0;
  }
  const double span = std::max(maxx - minx, maxy - miny);
  const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
  auto sx = [&](double v) { return kLeft + kPlot / 2 + (v - cx) / span * (kPlot - 20); };
  auto sy = [&](double v) { return kTop + kPlot / 2 - (v - cy) / span * (kPlot - 20); };

  const auto palette = categorical_palette(model.k);
  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n"
      "<text x=\"{2}\" y=\"30\" font-family=\"sans-serif\" font-size=\"18\">t-SNE of snapshot {3} (K={4})</text>\n"
      "<text x=\"{2}\" y=\"50\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#555555\">"
      "perplexity {5}, seed {6}, iterations {7}, KL {8:.4f}</text>\n"
      "<g id=\"points\">\n",
      kWidth, kHeight, kLeft, text::xml_escape(snapshot_id), model.k, proj.perplexity, proj.seed, proj.iterations,
      proj.final_kl);
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const auto c = cluster_of.at(proj.record_ids[i]);
    svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.8\"/>\n",
                       sx(proj.x(i)), sy(proj.y(i)), palette[c]);
  }
  svg += "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"13\">\n";
  for (std::size_t c = 0; c < model.k; ++c) {
    const double ly = kTop + 20 + 24 * static_cast<double>(c);
    svg += fmt::format(
        "<g class=\"legend-entry\"><rect x=\"{0}\" y=\"{1}\" width=\"12\" height=\"12\" fill=\"{2}\"/>"
        "<text x=\"{3}\" y=\"{4}\">Cluster {5}</text></g>\n",
        kLeft + kPlot + 34, ly - 6, palette[c], kLeft + kPlot + 54, ly + 4, c);
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

void scatter_svg(const Projection2D& proj, const ClusterModel& model, const std::string& snapshot_id,
                 const std::filesystem::path& path) {
  write_file_atomic(path, render_scatter_svg(proj, model, snapshot_id));
}

}  // namespace silico
