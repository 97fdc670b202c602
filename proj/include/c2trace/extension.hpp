#pragma once

#include <memory>
#include <span>
#include <vector>

#include "c2trace/geometry.hpp"
#include "c2trace/intrinsic_metric.hpp"
#include "c2trace/whitney.hpp"

namespace c2trace {

struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

// Value, gradient and Hessian of a C^2 function at a point.
struct Jet2 {
  double value = 0.0;
  Point grad;
  Sym2 hess;
};

class SmoothField {
public:
  virtual ~SmoothField() = default;
  virtual Jet2 eval(Point x) const = 0;
};

// Quintic smoothstep s(u) = u^3 (10 - 15u + 6u^2), clamped to [0, 1].
struct Smoothstep {
  double s, ds, dds;
};
Smoothstep smoothstep(double u);

struct BumpValue {
  int cube = -1;
  double phi = 0.0;
  Point grad;
  Sym2 hess;
};

class PartitionOfUnity {
public:
  explicit PartitionOfUnity(std::shared_ptr<const WhitneyDecomposition> dec);

  const WhitneyDecomposition& decomposition() const { return *dec_; }
  // Unnormalized tensor bump psi_Q: 1 on Q, 0 outside Q* = (9/8)Q.
  Jet2 bump(int cube, Point x) const;
  // The phi_Q that do not vanish at x, with derivatives.
  // Throws "uncovered point" outside the union of accepted cubes.
  std::vector<BumpValue> evaluate(Point x) const;
  // Same, plus the index of the covering cube used as reference.
  std::vector<BumpValue> evaluate(Point x, int& covering) const;

private:
  std::shared_ptr<const WhitneyDecomposition> dec_;
};

struct AffinePolynomial {
  double value = 0.0;  // f(omega_Q)
  Point gradient;      // g(Q)
  Point anchor;        // a_Q

  double operator()(Point x) const { return value + dot(gradient, x - anchor); }
};

struct BoundaryJet {
  std::vector<double> f;  // per cube
  std::vector<Point> g;   // per cube
  double eta = 0.0;
};

struct PairResidual {
  int q = -1;
  int q2 = -1;
  double fg_ratio = 0.0;
  double g_ratio = 0.0;
};

struct JetCompatReport {
  double max_fg_ratio = 0.0;
  double max_g_ratio = 0.0;
  double eta_min = 0.0;
  bool pass = true;
  std::vector<double> cube_worst;   // per cube, max of both ratios over its pairs
  std::vector<PairResidual> worst;  // largest few pair residuals
};

JetCompatReport check_jet_compat(const BoundaryJet& jet, const WhitneyDecomposition& dec,
                                 std::span<const CubeAnchor> anchors, double tol = 1e-12);

class ExtensionField : public SmoothField {
public:
  ExtensionField(std::shared_ptr<const WhitneyDecomposition> dec, std::vector<AffinePolynomial> polys);

  Jet2 eval(Point x) const override;
  bool covers(Point x) const { return pou_.decomposition().locate(x).has_value(); }
  const WhitneyDecomposition& decomposition() const { return pou_.decomposition(); }
  const PartitionOfUnity& partition() const { return pou_; }
  std::span<const AffinePolynomial> polynomials() const { return polys_; }

private:
  PartitionOfUnity pou_;
  std::vector<AffinePolynomial> polys_;
};

ExtensionField whitney_extend(std::shared_ptr<const WhitneyDecomposition> dec, std::span<const CubeAnchor> anchors,
                              const BoundaryJet& jet);
inline Jet2 eval_field(const SmoothField& f, Point x) { return f.eval(x); }

// Per-axis sample coordinates of a cube Q: `per_side` lattice points across
// Q plus `band` points inside each transition band between Q and Q*.
struct GridSampler {
  int per_side = 5;
  int band = 3;

  // Nested refinement: every old coordinate is kept.
  GridSampler refined() const { return {2 * per_side - 1, 2 * band + 1}; }
};

struct SeminormEstimate {
  double value = 0.0;
  double dxx = 0.0;
  double dxy = 0.0;
  double dyy = 0.0;
  std::size_t samples = 0;
};

// Sum over the second-order multi-indices of the sampled sup |D^alpha F|.
SeminormEstimate seminorm_estimate(const ExtensionField& field, const GridSampler& sampler = {});
// Covered sample points only.
std::vector<Point> sample_points(const WhitneyDecomposition& dec, const GridSampler& sampler);

struct PartitionBounds {
  double max_sum_error = 0.0;
  double c0 = 0.0;  // max phi
  double c1 = 0.0;  // max |D phi| diam
  double c2 = 0.0;  // max |D^2 phi| diam^2
  std::size_t samples = 0;
};

// Samples an m x m lattice over every Q* and measures the scaled derivative
// bounds of the partition.
PartitionBounds partition_bounds(const PartitionOfUnity& pou, int per_side = 9);

struct TaylorViolation {
  Point x;
  Point y;
  double remainder = 0.0;
  double remainder_bound = 0.0;
  double grad_gap = 0.0;
  double grad_bound = 0.0;
};

struct TaylorReport {
  std::size_t pairs = 0;
  double seminorm = 0.0;
  double max_remainder_ratio = 0.0;  // remainder / (n S d^2)
  double max_gradient_ratio = 0.0;   // |grad gap| / (S d)
  std::vector<TaylorViolation> violations;
};

TaylorReport verify_taylor(const SmoothField& field, const IntrinsicMetric& metric,
                           std::span<const std::pair<Point, Point>> pairs, double seminorm, double tol = 1e-8);

struct TraceSample {
  double t = 0.0;
  double value = 0.0;
  Point grad;
};

struct TraceProbe {
  std::vector<TraceSample> samples;
  double limit = 0.0;  // last value
  Point limit_grad;
  double extrapolated = 0.0;  // Richardson limit at t = 0
  Point extrapolated_grad;
  bool converged = false;
  bool truncated = false;  // stopped at the skirt
};

struct TraceOptions {
  int first = 1;  // samples at t = 2^-first .. 2^-steps
  int steps = 16;
  double tol = 1e-5;
  bool stop_at_skirt = false;
};

TraceProbe trace_probe(const SmoothField& field, const SplitElement& omega, const TraceOptions& opts = {});

}  // namespace c2trace
