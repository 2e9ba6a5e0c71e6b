#pragma once
// Node-chain curves on the torus with analytically tracked tangents and
// signed curvature, exact jet pushforward under diffeomorphisms, arclength
// cutting, and the transversality / expansion bookkeeping used by the
// curve-measure pipeline.

#include <functional>
#include <vector>

#include "rdslab/dynamics.hpp"

namespace rdslab {

// One node of a curve: position of the lift (unwrapped plane coordinates,
// consecutive nodes less than 1/2 apart), unit tangent, signed curvature,
// and the log of a transported density weight (used by curve measures;
// plain geometry leaves it at 0).
struct CurveNode {
  Vec2 pos;
  Vec2 tangent;       // unit
  double curvature = 0.0;
  double log_density = 0.0;
};

class Curve {
 public:
  Curve() = default;
  explicit Curve(std::vector<CurveNode> nodes, double h_max = 1e-3);

  size_t size() const { return nodes_.size(); }
  const CurveNode& node(size_t i) const { return nodes_[i]; }
  CurveNode& node(size_t i) { return nodes_[i]; }
  const std::vector<CurveNode>& nodes() const { return nodes_; }
  double h_max() const { return h_max_; }

  TorusPoint point(size_t i) const { return wrap(nodes_[i].pos); }
  double length() const;
  // cumulative chord arclength up to node i
  double arclength_at(size_t i) const;
  double max_abs_curvature() const;
  double max_spacing() const;

  // Split segments (never merge) until every chord is at most h. New nodes
  // come from the local quadratic arc model, second-order accurate.
  void refine_to(double h);

  // Contiguous sub-curve covering chord-arclength [s0, s1], endpoints
  // interpolated on the local arc model.
  Curve subcurve(double s0, double s1) const;

 private:
  std::vector<CurveNode> nodes_;
  double h_max_ = 1e-3;
};

// Parametric constructor with analytic derivatives: gamma(t), gamma'(t),
// gamma''(t) on [t0, t1]; sampled finely enough that chords are <= h_max.
Curve make_parametric(const std::function<Vec2(double)>& g,
                      const std::function<Vec2(double)>& dg,
                      const std::function<Vec2(double)>& ddg, double t0, double t1,
                      double h_max = 1e-3);

Curve make_segment(const Vec2& a, const Vec2& b, double h_max = 1e-3);
Curve make_circle(const Vec2& center, double radius, double h_max = 1e-3);

// Image of the curve: pre-refines so image chords stay below h_max, then maps
// each node through the jet. Tangent and curvature transform exactly:
//   t' = Dt/|Dt|,  k' = (k det D + det(Dt, D2F(t,t))) / |Dt|^3,
// and the density weight picks up -ln|Dt| (mass transport along the curve).
Curve push_curve(const Diffeo& f, const Curve& c);
Curve push_curve(const DrivingMeasure& mu, const Word& w, const Curve& c);

// All intermediate images gamma_j = f^j gamma, j = 0..n, for inspection.
std::vector<Curve> push_curve_stages(const DrivingMeasure& mu, const Word& w,
                                     const Curve& c);

// Cut a curve of length l into ceil-regular pieces of length l/floor(l/a)
// when l > 2a; otherwise return the curve unchanged. Pieces partition the
// curve, each with length in [a, 2a).
std::vector<Curve> cut_pieces(const Curve& c, double a);

// Component-length check: every connected component of the curve inside the
// closed ball B(x, rho) has chord length at most 4 rho. Valid when
// |curvature| <= K and rho < min(1/(4K), 1/4). Returns worst component
// length found over the given centers.
struct ComponentLengthReport {
  double worst_component = 0.0;
  double bound = 0.0;  // 4 rho
  size_t violations = 0;
};
ComponentLengthReport component_length_check(const Curve& c, double rho,
                                             const std::vector<TorusPoint>& centers);

// Block-wise non-concentration and expansion tallies along a pushed curve.
// The word has length m*p0. For each anchor k in 1..m, count later blocks
// j in k+1..m where some test point t (nodes and midpoints of gamma_0) has
//   NCT: |ln Jac f^{j p0} - ln Jac f^{(j-1) p0}|(t) > C0 + 2 eps0 p0
//   ET:  |d/dt gamma_{j p0}| / |d/dt gamma_{(j-1) p0}| (t) < e^{c p0}
// The condition holds when every anchor sees fewer than (m-k) eta such
// blocks.
struct BlockTallyReport {
  bool nct_ok = true;
  bool et_ok = true;
  std::vector<size_t> nct_counts;  // per anchor k = 1..m
  std::vector<size_t> et_counts;
};
BlockTallyReport block_tallies(const DrivingMeasure& mu, const Word& w,
                               const Curve& c, const Constants& cst);

// Curvature growth audit: pushes the curve through the word and verifies at
// every intermediate step j that max |curvature| <= bound(j) with
// bound(j) = K1(p0; c) (K+1) e^{8 (n-j) eta C0'}. Reports the max ratio
// observed (<= 1 means the bound held everywhere).
struct GrowthAudit {
  double worst_ratio = 0.0;
  size_t worst_step = 0;
  bool ok = false;
};
GrowthAudit curvature_growth_audit(const DrivingMeasure& mu, const Word& w,
                                   const Curve& c, const Constants& cst);
// Same for the density log-Lipschitz seminorm against
// K2(p0; c) (L+1) (K+1) e^{11 (n-j) eta C0'}.
GrowthAudit density_growth_audit(const DrivingMeasure& mu, const Word& w,
                                 const Curve& c, const Constants& cst);

// Discrete log-Lipschitz seminorm of the density channel:
// max |log_density_i - log_density_j| / arclength gap over adjacent nodes.
double density_log_lipschitz(const Curve& c);

}  // namespace rdslab
