#include "c2trace/extension.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>

#include "c2trace/error.hpp"

namespace c2trace {

namespace {

// a b^T + b a^T
Sym2 outer_sym(Point a, Point b) { return {2.0 * a.x * b.x, a.x * b.y + a.y * b.x, 2.0 * a.y * b.y}; }

Sym2& operator+=(Sym2& h, const Sym2& o) {
  h.xx += o.xx;
  h.xy += o.xy;
  h.yy += o.yy;
  return h;
}

Sym2 scaled(const Sym2& h, double s) { return {s * h.xx, s * h.xy, s * h.yy}; }

double sym_max(const Sym2& h) { return std::max({std::abs(h.xx), std::abs(h.xy), std::abs(h.yy)}); }

constexpr double kStarFactor = 9.0 / 8.0;

void lattice(const Cube& q, int m, std::vector<Point>& out) {
  const Point lo = q.lo();
  const double step = q.diam() / (m - 1);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) out.push_back({lo.x + i * step, lo.y + j * step});
}

}  // namespace

Smoothstep smoothstep(double u) {
  if (u <= 0.0) return {0.0, 0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0, 0.0};
  const double u2 = u * u;
  return {u2 * u * (10.0 - 15.0 * u + 6.0 * u2), 30.0 * u2 * (1.0 - u) * (1.0 - u), 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)};
}

PartitionOfUnity::PartitionOfUnity(std::shared_ptr<const WhitneyDecomposition> dec) : dec_(std::move(dec)) {
  if (!dec_) throw ValidationError("decomposition required");
}

Jet2 PartitionOfUnity::bump(int cube, Point x) const {
  const Cube& q = dec_->cube(static_cast<std::size_t>(cube));
  const double r = q.half_side;
  const double rs = kStarFactor * r;
  const double inv = 1.0 / (rs - r);
  auto profile = [&](double xi, double ci) {
    const double d = xi - ci;
    const Smoothstep s = smoothstep((rs - std::abs(d)) * inv);
    const double du = (d < 0.0 ? inv : -inv);
    return std::array<double, 3>{s.s, s.ds * du, s.dds * inv * inv};
  };
  const auto px = profile(x.x, q.center.x);
  const auto py = profile(x.y, q.center.y);
  Jet2 j;
  j.value = px[0] * py[0];
  j.grad = {px[1] * py[0], px[0] * py[1]};
  j.hess = {px[2] * py[0], px[1] * py[1], px[0] * py[2]};
  return j;
}

std::vector<BumpValue> PartitionOfUnity::evaluate(Point x) const {
  int covering = -1;
  return evaluate(x, covering);
}

std::vector<BumpValue> PartitionOfUnity::evaluate(Point x, int& covering) const {
  const auto k = dec_->locate(x);
  if (!k) throw ValidationError("uncovered point");
  covering = *k;
  std::vector<BumpValue> out;
  double total = 0.0;
  Point tg;
  Sym2 th;
  for (int j : dec_->neighbors(*k)) {
    const Jet2 b = bump(j, x);
    if (b.value == 0.0 && b.grad == Point{} && b.hess.xx == 0.0 && b.hess.xy == 0.0 && b.hess.yy == 0.0) continue;
    out.push_back({j, b.value, b.grad, b.hess});
    total += b.value;
    tg += b.grad;
    th += b.hess;
  }
  if (total <= 0.0) throw ConvergenceError("normalization vanishes");
  const double inv = 1.0 / total;
  for (auto& v : out) {
    const double psi = v.phi;
    const Point g = v.grad;
    const Sym2 h = v.hess;
    v.phi = psi * inv;
    v.grad = inv * g - (psi * inv * inv) * tg;
    Sym2 hh = scaled(h, inv);
    // -(g tg^T + tg g^T)/T^2 - psi H_T/T^2 + 2 psi tg tg^T/T^3
    hh += scaled(outer_sym(g, tg), -inv * inv);
    hh += scaled(th, -psi * inv * inv);
    hh += scaled(outer_sym(tg, tg), psi * inv * inv * inv);
    v.hess = hh;
  }
  return out;
}

JetCompatReport check_jet_compat(const BoundaryJet& jet, const WhitneyDecomposition& dec,
                                 std::span<const CubeAnchor> anchors, double tol) {
  if (jet.f.size() != dec.size() || jet.g.size() != dec.size() || anchors.size() != dec.size())
    throw ValidationError("missing cube data");
  JetCompatReport rep;
  rep.cube_worst.assign(dec.size(), 0.0);
  std::vector<PairResidual> all;
  for (std::size_t k = 0; k < dec.size(); ++k) {
    for (int j : dec.neighbors(k)) {
      if (j == static_cast<int>(k)) continue;
      const double dsum = dec.cube(k).diam() + dec.cube(j).diam();
      const Point ak = anchors[k].a.point, aj = anchors[j].a.point;
      const double fg = std::abs(jet.f[k] - jet.f[j] - dot(jet.g[j], ak - aj)) / (dsum * dsum);
      const double gg = norm_inf(jet.g[k] - jet.g[j]) / dsum;
      rep.max_fg_ratio = std::max(rep.max_fg_ratio, fg);
      rep.max_g_ratio = std::max(rep.max_g_ratio, gg);
      rep.cube_worst[k] = std::max({rep.cube_worst[k], fg, gg});
      rep.cube_worst[j] = std::max({rep.cube_worst[j], fg, gg});
      all.push_back({static_cast<int>(k), j, fg, gg});
    }
  }
  rep.eta_min = std::max(rep.max_fg_ratio, rep.max_g_ratio);
  rep.pass = rep.eta_min <= jet.eta + tol;
  const auto key = [](const PairResidual& p) { return std::max(p.fg_ratio, p.g_ratio); };
  const std::size_t keep = std::min<std::size_t>(8, all.size());
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), [&](const auto& a, const auto& b) {
    if (key(a) != key(b)) return key(a) > key(b);
    return std::pair(a.q, a.q2) < std::pair(b.q, b.q2);
  });
  rep.worst.assign(all.begin(), all.begin() + keep);
  return rep;
}

ExtensionField::ExtensionField(std::shared_ptr<const WhitneyDecomposition> dec, std::vector<AffinePolynomial> polys)
    : pou_(std::move(dec)), polys_(std::move(polys)) {
  if (polys_.size() != pou_.decomposition().size()) throw ValidationError("missing cube data");
}

Jet2 ExtensionField::eval(Point x) const {
  int k = -1;
  const auto bumps = pou_.evaluate(x, k);
  const AffinePolynomial& pk = polys_[k];
  // F = P_K + sum phi_Q (P_Q - P_K), with each difference an affine D_Q.
  Jet2 out;
  out.value = pk(x);
  out.grad = pk.gradient;
  for (const auto& b : bumps) {
    if (b.cube == k) continue;
    const AffinePolynomial& pq = polys_[b.cube];
    const Point dg = pq.gradient - pk.gradient;
    const double d = (pq.value - pk.value) + dot(pq.gradient, pk.anchor - pq.anchor) + dot(dg, x - pk.anchor);
    out.value += b.phi * d;
    out.grad += d * b.grad + b.phi * dg;
    out.hess += scaled(b.hess, d);
    out.hess += outer_sym(b.grad, dg);
  }
  return out;
}

ExtensionField whitney_extend(std::shared_ptr<const WhitneyDecomposition> dec, std::span<const CubeAnchor> anchors,
                              const BoundaryJet& jet) {
  if (!dec) throw ValidationError("decomposition required");
  if (jet.f.size() != dec->size() || jet.g.size() != dec->size() || anchors.size() != dec->size())
    throw ValidationError("missing cube data");
  std::vector<AffinePolynomial> polys;
  polys.reserve(dec->size());
  for (std::size_t k = 0; k < dec->size(); ++k) polys.push_back({jet.f[k], jet.g[k], anchors[k].a.point});
  return ExtensionField(std::move(dec), std::move(polys));
}

std::vector<Point> sample_points(const WhitneyDecomposition& dec, const GridSampler& sampler) {
  if (sampler.per_side < 2 || sampler.band < 0) throw ValidationError("sampler needs at least 2 points per side");
  std::vector<Point> out;
  std::vector<double> axis;
  for (std::size_t k = 0; k < dec.size(); ++k) {
    const Cube& q = dec.cube(k);
    const double r = q.half_side;
    axis.clear();
    for (int i = 0; i < sampler.per_side; ++i) axis.push_back(-r + 2.0 * r * i / (sampler.per_side - 1));
    for (int i = 1; i <= sampler.band; ++i) {
      const double off = r + (kStarFactor - 1.0) * r * i / (sampler.band + 1);
      axis.push_back(-off);
      axis.push_back(off);
    }
    for (double dy : axis)
      for (double dx : axis) {
        const Point x{q.center.x + dx, q.center.y + dy};
        if (dec.locate(x)) out.push_back(x);
      }
  }
  return out;
}

SeminormEstimate seminorm_estimate(const ExtensionField& field, const GridSampler& sampler) {
  SeminormEstimate est;
  for (Point x : sample_points(field.decomposition(), sampler)) {
    const Jet2 j = field.eval(x);
    est.dxx = std::max(est.dxx, std::abs(j.hess.xx));
    est.dxy = std::max(est.dxy, std::abs(j.hess.xy));
    est.dyy = std::max(est.dyy, std::abs(j.hess.yy));
    ++est.samples;
  }
  est.value = est.dxx + est.dxy + est.dyy;
  return est;
}

PartitionBounds partition_bounds(const PartitionOfUnity& pou, int per_side) {
  if (per_side < 2) throw ValidationError("sampler needs at least 2 points per side");
  const WhitneyDecomposition& dec = pou.decomposition();
  PartitionBounds out;
  std::vector<Point> pts;
  for (std::size_t k = 0; k < dec.size(); ++k) {
    const Cube& q = dec.cube(k);
    pts.clear();
    lattice(dilate(q, kStarFactor), per_side, pts);
    for (Point x : pts) {
      if (!dec.locate(x)) continue;
      const auto bumps = pou.evaluate(x);
      double sum = 0.0;
      for (const auto& b : bumps) {
        sum += b.phi;
        if (b.cube != static_cast<int>(k)) continue;
        out.c0 = std::max(out.c0, b.phi);
        out.c1 = std::max(out.c1, norm_inf(b.grad) * q.diam());
        out.c2 = std::max(out.c2, sym_max(b.hess) * q.diam() * q.diam());
      }
      out.max_sum_error = std::max(out.max_sum_error, std::abs(sum - 1.0));
      ++out.samples;
    }
  }
  return out;
}

TaylorReport verify_taylor(const SmoothField& field, const IntrinsicMetric& metric,
                           std::span<const std::pair<Point, Point>> pairs, double seminorm, double tol) {
  constexpr double n = 2.0;
  TaylorReport rep;
  rep.seminorm = seminorm;
  for (const auto& [x, y] : pairs) {
    const double d = metric.distance(x, y);
    const Jet2 jx = field.eval(x);
    const Jet2 jy = field.eval(y);
    const double rem = std::abs(jx.value - jy.value - dot(jy.grad, x - y));
    const double gap = norm_inf(jx.grad - jy.grad);
    const double rb = n * seminorm * d * d;
    const double gb = seminorm * d;
    ++rep.pairs;
    if (rb > 0.0) rep.max_remainder_ratio = std::max(rep.max_remainder_ratio, rem / rb);
    if (gb > 0.0) rep.max_gradient_ratio = std::max(rep.max_gradient_ratio, gap / gb);
    if (rem > rb + tol || gap > gb + tol) rep.violations.push_back({x, y, rem, rb, gap, gb});
  }
  return rep;
}

TraceProbe trace_probe(const SmoothField& field, const SplitElement& omega, const TraceOptions& opts) {
  if (opts.first < 0 || opts.steps < opts.first) throw ValidationError("trace probe needs at least one step");
  const auto* ext = dynamic_cast<const ExtensionField*>(&field);
  const Point l = omega.anchor.point;
  const Point dir = omega.witness - l;
  TraceProbe probe;
  for (int i = opts.first; i <= opts.steps; ++i) {
    const double t = std::ldexp(1.0, -i);
    const Point x = l + t * dir;
    if (ext != nullptr && !ext->covers(x)) {
      if (opts.stop_at_skirt && !probe.samples.empty()) {
        probe.truncated = true;
        break;
      }
      throw ConvergenceError("ray exits covered region");
    }
    const Jet2 j = field.eval(x);
    probe.samples.push_back({t, j.value, j.grad});
  }
  const auto& s = probe.samples;
  probe.limit = s.back().value;
  probe.limit_grad = s.back().grad;
  if (s.size() >= 2) {
    const auto& a = s[s.size() - 2];
    const auto& b = s.back();
    probe.extrapolated = 2.0 * b.value - a.value;
    probe.extrapolated_grad = 2.0 * b.grad - a.grad;
  } else {
    probe.extrapolated = probe.limit;
    probe.extrapolated_grad = probe.limit_grad;
  }
  // Gaps may stall at rounding level; allow that much slack.
  bool decreasing = true;
  double prev_gap = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < s.size(); ++i) {
    gap = std::abs(s[i].value - s[i - 1].value);
    const double slack = 1e-13 * (1.0 + std::abs(s[i].value));
    if (gap > prev_gap + slack) decreasing = false;
    prev_gap = gap;
  }
  probe.converged = s.size() >= 2 && decreasing && gap < opts.tol;
  return probe;
}

}  // namespace c2trace
