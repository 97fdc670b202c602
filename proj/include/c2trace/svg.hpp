#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c2trace/extension.hpp"
#include "c2trace/selection.hpp"

namespace c2trace {

enum class Layer { domain, cubes, anchors, pair_graph, field_heatmap, split_elements };

Layer parse_layer(const std::string& name);
std::string to_string(Layer layer);

struct RenderSpec {
  std::vector<Layer> layers{Layer::domain};
  std::optional<Box> viewport;  // defaults to the domain bounding box plus a margin
  int resolution = 512;         // pixels along the longer side, at most 8192
};

// Everything a layer may draw; layers whose data is absent fail with
// "layer data missing".
struct RenderArtifacts {
  const WhitneyDecomposition* decomposition = nullptr;
  std::span<const CubeAnchor> anchors;
  const PairGraph* graph = nullptr;
  const SmoothField* field = nullptr;  // sampled only inside the domain
  std::vector<SplitElement> elements;
};

// Field values on a pixel grid, row 0 at the top; NaN outside the domain.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  double lo = 0.0;
  double hi = 0.0;

  double at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

Heatmap rasterize_field(const PolygonalDomain& domain, const SmoothField& field, const Box& view, int width, int height);

std::string render_svg(const PolygonalDomain& domain, const RenderSpec& spec, const RenderArtifacts& artifacts);

}  // namespace c2trace
