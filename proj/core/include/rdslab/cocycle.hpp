#pragma once
// Finite-time hyperbolicity diagnostics for i.i.d. matrix cocycles over
// torus diffeomorphisms: singular values, stable/unstable directions,
// expansion certificates, moment decay and angle-tail statistics.

#include <optional>
#include <vector>

#include "rdslab/dynamics.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

// Finite-time singular data of the word product Df^n(p).
struct SingularData {
  double lambda_u = 1.0;  // |Df^n|
  double lambda_s = 1.0;  // |(Df^n)^{-1}|^{-1}
  ProjectiveDirection e_u;  // most-expanded input direction
  ProjectiveDirection e_s;  // least-expanded input direction
  bool defined = false;     // singular values separated beyond tolerance
};

SingularData singular_data(const Mat2& product);
SingularData singular_data(const DrivingMeasure& mu, const Word& w, const TorusPoint& p);

// Pulled-back unstable direction at x for the word w:
// image of the most-expanded direction computed along the preimage orbit,
// V^u(x) = Df^n(f^{-n} x) . E^u(f^{-n} x).
std::optional<ProjectiveDirection> pulled_unstable(const DrivingMeasure& mu,
                                                   const Word& w,
                                                   const TorusPoint& x);

// Uniform expansion certificate: for given N, the quantity
//   inf over (p, v) of (1/N) E_w[ ln |Df^N(p) v| ].
// Exact enumeration over the 2^N (arity^N) words at each sample pair.
struct ExpansionReport {
  double worst = 0.0;        // infimum of the averaged log-expansion found
  TorusPoint worst_point;
  ProjectiveDirection worst_dir;
  size_t pairs_checked = 0;
  bool positive = false;
};

// Deterministic grid scan: nx*ny base points times ndir directions.
ExpansionReport certify_uef(const DrivingMeasure& mu, size_t N, size_t nx, size_t ny,
                            size_t ndir);
// Same for the inverse cocycle (uniform expansion of preimages).
ExpansionReport certify_uep(const DrivingMeasure& mu, size_t N, size_t nx, size_t ny,
                            size_t ndir);

// Single-pair exact average at (p, v); building block and oracle hook.
double uef_value(const DrivingMeasure& mu, size_t N, const TorusPoint& p, const Vec2& v);
double uep_value(const DrivingMeasure& mu, size_t N, const TorusPoint& p, const Vec2& v);

// delta-moment decay: sup over sampled (p,v) of E_w |Df^n(p) v|^{-delta},
// tracked for n = 1..n_max. A fitted decay rate chi_hat > 0 certifies the
// exponential contraction of the delta-moment.
struct MomentDecayResult {
  std::vector<double> sup_moment;  // index n-1 -> sup_p,v E |Df^n v|^{-delta}
  double chi_hat = 0.0;            // least-squares slope of -ln(sup)/n
  double chi_hat_lo = 0.0;         // bootstrap CI over the sample pool
  double chi_hat_hi = 0.0;
};

MomentDecayResult moment_decay(const DrivingMeasure& mu, double delta, size_t n_max,
                               size_t n_pairs, uint64_t seed, size_t n_boot = 200);

// One-step Markov identity probe: E|Df^{n+1} v|^{-delta} computed directly
// versus via conditioning on the first letter. Returns max abs discrepancy.
double moment_markov_residual(const DrivingMeasure& mu, double delta, size_t n,
                              const TorusPoint& p, const Vec2& v);

// Angle-tail statistics: distribution of the angle between a fixed direction
// and the word's stable direction at a point. Estimates P(angle < e^{-eta n})
// and a power-law exponent beta1_hat from tail counts at dyadic thresholds.
struct AngleTailResult {
  size_t samples = 0;
  size_t undefined = 0;             // words with unresolved singular split
  std::vector<double> thresholds;   // angle thresholds (decreasing)
  std::vector<double> tail_prob;    // P(angle < threshold)
  double beta1_hat = 0.0;           // fitted exponent: tail ~ thr^{beta1_hat}
  double beta1_lo = 0.0;
  double beta1_hi = 0.0;
};

enum class AngleMode {
  kFixedDirection,  // angle(v0, E^s_w(p)) for fixed (p, v0), random w
  kPulledBack       // angle(v0, pulled-back unstable V^u_{-w}(p)) for fixed
                    // (p, v0), random w
};

AngleTailResult angle_tail(const DrivingMeasure& mu, size_t n, size_t samples,
                           AngleMode mode, uint64_t seed, size_t n_boot = 200);

// Frequency of words whose pointwise Jacobian log-range stays within
// (-C0 - 2 n eps0, C0 + 2 n eps0) on an nx*ny grid; the "no concentration"
// word set used by the good-word filter.
double jac_range_freq(const DrivingMeasure& mu, size_t n, double C0, double eps0,
                      size_t nx, size_t ny, size_t samples, uint64_t seed);

}  // namespace rdslab
