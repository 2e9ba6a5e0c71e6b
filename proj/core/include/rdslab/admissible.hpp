#pragma once
// Measures carried by families of curves with log-Lipschitz densities:
// pushforward, cutting, projection to point clouds, good-word
// classification, and the filtered convolution pipeline that retains mass
// through alternating good/bad stages with exact ledger accounting.

#include <string>
#include <vector>

#include "rdslab/curves.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/seminorm.hpp"

namespace rdslab {

// One atom: a curve with a transported density (the curve's log_density
// channel) carrying total mass `mass`.
struct CurveMeasureAtom {
  Curve curve;
  double mass = 0.0;
};

struct AdmissibleMeasure {
  std::vector<CurveMeasureAtom> atoms;
  double total_mass() const;
  double max_abs_curvature() const;
  double max_density_log_lipschitz() const;
  double min_length() const;
};

// Uniform-density measure on a single curve.
AdmissibleMeasure make_admissible(const Curve& c, double mass = 1.0);

AdmissibleMeasure push_admissible(const Diffeo& f, const AdmissibleMeasure& m);
AdmissibleMeasure push_admissible(const DrivingMeasure& mu, const Word& w,
                                  const AdmissibleMeasure& m);

// Cut every atom into pieces of comparable length in [a, 2a); mass splits by
// the density-weighted length of each piece. Projection commutes with this.
AdmissibleMeasure cut_admissible(const AdmissibleMeasure& m, double a);

// Projection to a weighted point cloud: one sample per curve segment
// midpoint, weight = density-weighted segment length, rescaled so each atom
// keeps its mass exactly.
PointCloudMeasure project(const AdmissibleMeasure& m);

// Good-word test relative to a curve, with word length n = w.size():
//   (1) uniform expansion of the tangent:  |Df^n gamma'(t)| >= 2 e^{lambdabar n}
//   (2) transversality to the word's stable direction at gamma(t):
//       angle(gamma'(t), E^s_w(gamma(t))) >= 2 e^{-eta n}
//   (3) word-wide Jacobian control on a point grid:
//       |ln Jac f^n(x)| < C0 + 2 n eps0.
// Conditions (1)-(2) are checked on an evenly spaced cover of at most
// `cover` nodes; margins below report how far from the thresholds the worst
// cover point sits (>= 1 means the condition held).
struct GoodWordReport {
  bool good = false;
  bool expansion_ok = false;
  bool angle_ok = false;
  bool jac_ok = false;
  double expansion_margin = 0.0;
  double angle_margin = 0.0;
};
GoodWordReport good_word(const DrivingMeasure& mu, const Word& w, const Curve& c,
                         const Constants& cst, size_t cover = 64);

// Weighted fraction of good words of length n for the curve; exact
// enumeration when arity^n <= enum_cap, Monte Carlo otherwise.
struct GoodFraction {
  double fraction = 0.0;
  size_t words = 0;
  bool exact = false;
};
GoodFraction good_word_fraction(const DrivingMeasure& mu, const Curve& c, size_t n,
                                const Constants& cst, uint64_t seed,
                                size_t enum_cap = 4096, size_t mc_words = 4096);

// All good/bad patterns of length m whose every prefix carries at most
// (prefix length) * eta bad stages: the admissible filter on stage patterns.
std::vector<std::vector<bool>> stage_patterns(size_t m, double eta);  // true = bad

// Filtered convolution pipeline. Starting from nu (optionally convolved with
// d unfiltered letters), run m stages of length p0; at each stage every atom
// is pushed by all words of its class (good or bad per the pattern branch),
// cut at the stage cut length, and the branch set follows stage_patterns.
// Mass is conserved: retained + discarded + dropped = initial, where
// discarded is mass sent to pattern branches that violate the prefix filter
// and dropped collects atoms below the mass floor.
struct LedgerRow {
  size_t stage = 0;
  std::string kind;  // retained | discarded | dropped | resampled
  double mass = 0.0;
};

struct PipelineOptions {
  size_t m = 4;             // number of filtered stages
  size_t d = 0;             // unfiltered warm-up letters
  double cut_scale = 1.0;   // multiplies the theoretical cut lengths
  double cut_floor = 0.0;   // explicit override; > 0 wins over the schedule
  size_t atom_cap = 1024;   // per-branch resampling cap
  double mass_floor = 1e-12;
  size_t cover = 64;
  uint64_t seed = 1;
};

struct PipelineResult {
  AdmissibleMeasure final_measure;
  std::vector<LedgerRow> ledger;
  double initial_mass = 0.0;
  double retained_mass = 0.0;
  double discarded_mass = 0.0;
  double dropped_mass = 0.0;
  std::vector<double> stage_good_fraction;  // mass-weighted, per stage
};

PipelineResult filtered_pipeline(const DrivingMeasure& mu, const AdmissibleMeasure& nu,
                                 const Constants& cst, const PipelineOptions& opt);

// Theoretical cut length for stage k (1-based) given the pipeline constants;
// underflows quickly, hence the cut_scale / cut_floor overrides above.
double stage_cut_length(const Constants& cst, size_t k, double extra_log = 0.0);

// Exact binomial tail comparisons behind the pattern filter:
//   head: sum_{k <= floor(n eta)} C(n,k) <= Cpp4 * n eta * (eta^-eta (1-eta)^-(1-eta))^n
//   weighted: for b >= a - ln(eta^eta (1-eta)^{1-eta})/eta,
//             sum_{k > floor(n eta)} C(n,k) e^{-bk} <= Cpp4 e^{-a n eta}/(1-e^{-a})
struct TailCheck {
  double head_sum = 0.0;
  double head_bound = 0.0;
  double weighted_sum = 0.0;
  double weighted_bound = 0.0;
  bool head_ok = false;
  bool weighted_ok = false;
};
TailCheck binom_tail_check(size_t n, double eta, double a, double Cpp4 = 5.0);

}  // namespace rdslab
