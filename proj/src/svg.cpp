#include "c2trace/svg.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "c2trace/error.hpp"
#include "c2trace/io.hpp"

namespace c2trace {

namespace {

constexpr int kMaxResolution = 8192;

std::string base64(const std::vector<std::uint8_t>& bytes) {
  static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::uint32_t n = (std::uint32_t{bytes[i]} << 16) | (i + 1 < bytes.size() ? bytes[i + 1] << 8 : 0) |
                            (i + 2 < bytes.size() ? bytes[i + 2] : 0);
    out += table[(n >> 18) & 63];
    out += table[(n >> 12) & 63];
    out += i + 1 < bytes.size() ? table[(n >> 6) & 63] : '=';
    out += i + 2 < bytes.size() ? table[n & 63] : '=';
  }
  return out;
}

void put_le(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v, int n) {
  for (int k = 0; k < n; ++k) b[at + k] = static_cast<std::uint8_t>(v >> (8 * k));
}

// Uncompressed 24-bit BMP, rows bottom-up.
std::vector<std::uint8_t> bmp(int w, int h, const std::vector<std::array<std::uint8_t, 3>>& rgb) {
  const std::size_t stride = (3 * static_cast<std::size_t>(w) + 3) / 4 * 4;
  const std::size_t size = 54 + stride * h;
  std::vector<std::uint8_t> b(size, 0);
  b[0] = 'B';
  b[1] = 'M';
  put_le(b, 2, static_cast<std::uint32_t>(size), 4);
  put_le(b, 10, 54, 4);
  put_le(b, 14, 40, 4);
  put_le(b, 18, static_cast<std::uint32_t>(w), 4);
  put_le(b, 22, static_cast<std::uint32_t>(h), 4);
  put_le(b, 26, 1, 2);
  put_le(b, 28, 24, 2);
  put_le(b, 34, static_cast<std::uint32_t>(stride * h), 4);
  for (int row = 0; row < h; ++row) {
    const std::size_t base = 54 + stride * (h - 1 - row);
    for (int col = 0; col < w; ++col) {
      const auto& c = rgb[static_cast<std::size_t>(row) * w + col];
      b[base + 3 * col] = c[2];
      b[base + 3 * col + 1] = c[1];
      b[base + 3 * col + 2] = c[0];
    }
  }
  return b;
}

// Blue to yellow through teal.
std::array<std::uint8_t, 3> ramp(double u) {
  u = std::clamp(u, 0.0, 1.0);
  auto mix = [](double a, double b, double t) { return static_cast<std::uint8_t>(std::lround(a + (b - a) * t)); };
  if (u < 0.5) return {mix(59, 33, 2 * u), mix(76, 145, 2 * u), mix(192, 140, 2 * u)};
  return {mix(33, 253, 2 * u - 1), mix(145, 231, 2 * u - 1), mix(140, 37, 2 * u - 1)};
}

std::string depth_color(int depth) {
  static constexpr const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                            "#66a61e", "#e6ab02", "#a6761d", "#666666"};
  return palette[depth % 8];
}

class Canvas {
public:
  Canvas(const Box& view, int resolution) : view_(view) {
    const double w = view.hi.x - view.lo.x, h = view.hi.y - view.lo.y;
    scale_ = resolution / std::max(w, h);
    width_ = std::max(1, static_cast<int>(std::lround(w * scale_)));
    height_ = std::max(1, static_cast<int>(std::lround(h * scale_)));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double scale() const { return scale_; }
  std::string x(double v) const { return format_number(round3((v - view_.lo.x) * scale_)); }
  std::string y(double v) const { return format_number(round3((view_.hi.y - v) * scale_)); }
  std::string len(double v) const { return format_number(round3(v * scale_)); }
  std::string xy(Point p) const { return x(p.x) + "," + y(p.y); }

private:
  static double round3(double v) { return std::round(v * 1000.0) / 1000.0; }
  Box view_;
  double scale_ = 1.0;
  int width_ = 0;
  int height_ = 0;
};

std::string ring_path(const Canvas& c, std::span<const Point> ring, bool closed) {
  std::string d;
  for (std::size_t i = 0; i < ring.size(); ++i) d += (i ? " L" : "M") + c.xy(ring[i]);
  if (closed) d += " Z";
  return d;
}

Box default_view(const PolygonalDomain& domain) {
  const Box b = domain.bbox();
  const double m = 0.05 * std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y);
  return {{b.lo.x - m, b.lo.y - m}, {b.hi.x + m, b.hi.y + m}};
}

}  // namespace

Layer parse_layer(const std::string& name) {
  if (name == "domain") return Layer::domain;
  if (name == "cubes") return Layer::cubes;
  if (name == "anchors") return Layer::anchors;
  if (name == "pair-graph") return Layer::pair_graph;
  if (name == "field-heatmap") return Layer::field_heatmap;
  if (name == "split-elements") return Layer::split_elements;
  throw ValidationError("unknown layer '" + name + "'");
}

std::string to_string(Layer layer) {
  switch (layer) {
    case Layer::domain: return "domain";
    case Layer::cubes: return "cubes";
    case Layer::anchors: return "anchors";
    case Layer::pair_graph: return "pair-graph";
    case Layer::field_heatmap: return "field-heatmap";
    case Layer::split_elements: return "split-elements";
  }
  return "unknown";
}

Heatmap rasterize_field(const PolygonalDomain& domain, const SmoothField& field, const Box& view, int width, int height) {
  Heatmap h;
  h.width = width;
  h.height = height;
  h.values.assign(static_cast<std::size_t>(width) * height, std::numeric_limits<double>::quiet_NaN());
  bool any = false;
  for (int row = 0; row < height; ++row)
    for (int col = 0; col < width; ++col) {
      const Point p{view.lo.x + (col + 0.5) * (view.hi.x - view.lo.x) / width,
                    view.hi.y - (row + 0.5) * (view.hi.y - view.lo.y) / height};
      if (!contains(domain, p)) continue;
      double v;
      try {
        v = field.eval(p).value;
      } catch (const ValidationError&) {
        continue;  // uncovered by a truncated decomposition
      }
      h.values[static_cast<std::size_t>(row) * width + col] = v;
      h.lo = any ? std::min(h.lo, v) : v;
      h.hi = any ? std::max(h.hi, v) : v;
      any = true;
    }
  return h;
}

std::string render_svg(const PolygonalDomain& domain, const RenderSpec& spec, const RenderArtifacts& art) {
  if (spec.resolution < 1 || spec.resolution > kMaxResolution)
    throw ValidationError("resolution must be between 1 and 8192");
  const Box view = spec.viewport.value_or(default_view(domain));
  if (!(view.hi.x > view.lo.x) || !(view.hi.y > view.lo.y)) throw ValidationError("empty viewport");
  const Canvas c(view, spec.resolution);
  const std::string stroke = c.len(std::max(view.hi.x - view.lo.x, view.hi.y - view.lo.y) / 800.0);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width() << "\" height=\"" << c.height()
     << "\" viewBox=\"0 0 " << c.width() << " " << c.height() << "\">\n";
  for (Layer layer : spec.layers) {
    os << "<g id=\"" << to_string(layer) << "\">\n";
    switch (layer) {
      case Layer::domain: {
        std::string d = ring_path(c, domain.outer(), true);
        for (const auto& h : domain.holes()) d += " " + ring_path(c, h, true);
        os << "<path d=\"" << d << "\" fill=\"#f4f1ea\" fill-rule=\"evenodd\" stroke=\"#222\" stroke-width=\"" << stroke
           << "\"/>\n";
        for (const auto& s : domain.slits())
          os << "<path d=\"" << ring_path(c, s, false) << "\" fill=\"none\" stroke=\"#c00\" stroke-width=\"" << stroke
             << "\"/>\n";
        break;
      }
      case Layer::cubes: {
        if (!art.decomposition) throw ValidationError("layer data missing: cubes");
        const auto& dec = *art.decomposition;
        for (std::size_t i = 0; i < dec.size(); ++i) {
          const Cube& q = dec.cube(i);
          os << "<rect x=\"" << c.x(q.lo().x) << "\" y=\"" << c.y(q.hi().y) << "\" width=\"" << c.len(q.diam())
             << "\" height=\"" << c.len(q.diam()) << "\" fill=\"none\" stroke=\"" << depth_color(dec.depth(i))
             << "\" stroke-width=\"" << stroke << "\"/>\n";
        }
        break;
      }
      case Layer::anchors: {
        if (art.anchors.empty()) throw ValidationError("layer data missing: anchors");
        for (const auto& a : art.anchors)
          os << "<circle cx=\"" << c.x(a.a.point.x) << "\" cy=\"" << c.y(a.a.point.y) << "\" r=\"2\" fill=\"#333\"/>\n";
        break;
      }
      case Layer::pair_graph: {
        if (!art.graph || !art.decomposition) throw ValidationError("layer data missing: pair-graph");
        const auto& dec = *art.decomposition;
        auto pos = [&](int n) {
          const auto& node = art.graph->nodes()[n];
          return 0.5 * (dec.cube(node.q0).center + dec.cube(node.q1).center);
        };
        for (const auto& e : art.graph->edges())
          os << "<line x1=\"" << c.x(pos(e.a).x) << "\" y1=\"" << c.y(pos(e.a).y) << "\" x2=\"" << c.x(pos(e.b).x)
             << "\" y2=\"" << c.y(pos(e.b).y) << "\" stroke=\"#88a\" stroke-opacity=\"0.4\" stroke-width=\"" << stroke
             << "\"/>\n";
        for (std::size_t n = 0; n < art.graph->size(); ++n)
          os << "<circle cx=\"" << c.x(pos(static_cast<int>(n)).x) << "\" cy=\"" << c.y(pos(static_cast<int>(n)).y)
             << "\" r=\"1\" fill=\"#336\"/>\n";
        break;
      }
      case Layer::field_heatmap: {
        if (!art.field) throw ValidationError("layer data missing: field-heatmap");
        const Heatmap h = rasterize_field(domain, *art.field, view, c.width(), c.height());
        std::vector<std::array<std::uint8_t, 3>> rgb(h.values.size(), {255, 255, 255});
        const double span = h.hi > h.lo ? h.hi - h.lo : 1.0;
        for (std::size_t i = 0; i < h.values.size(); ++i)
          if (!std::isnan(h.values[i])) rgb[i] = ramp((h.values[i] - h.lo) / span);
        os << "<image x=\"0\" y=\"0\" width=\"" << c.width() << "\" height=\"" << c.height()
           << "\" preserveAspectRatio=\"none\" data-min=\"" << format_number(h.lo) << "\" data-max=\""
           << format_number(h.hi) << "\" href=\"data:image/bmp;base64," << base64(bmp(h.width, h.height, rgb))
           << "\"/>\n";
        break;
      }
      case Layer::split_elements: {
        if (art.elements.empty()) throw ValidationError("layer data missing: split-elements");
        const double rad = 6.0 / c.scale();
        for (const auto& e : art.elements) {
          const Point a = e.anchor.point;
          os << "<circle cx=\"" << c.x(a.x) << "\" cy=\"" << c.y(a.y) << "\" r=\"2.5\" fill=\"#000\"/>\n";
          // Arc slightly inside the sector so that neighboring sectors stay apart.
          const double gap = std::min(0.15, 0.1 * e.sector.width());
          const double t0 = e.sector.theta0 + gap, t1 = e.sector.theta1 - gap;
          const Point p0 = a + rad * Point{std::cos(t0), std::sin(t0)};
          const Point p1 = a + rad * Point{std::cos(t1), std::sin(t1)};
          const bool large = t1 - t0 > std::numbers::pi;
          // Screen y points down, so counterclockwise in the plane is sweep 0.
          os << "<path class=\"sector\" d=\"M" << c.xy(p0) << " A" << c.len(rad) << "," << c.len(rad) << " 0 "
             << (large ? 1 : 0) << " 0 " << c.xy(p1) << "\" fill=\"none\" stroke=\"" << depth_color(e.sector_id)
             << "\" stroke-width=\"" << stroke << "\"/>\n";
        }
        break;
      }
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace c2trace
