#pragma once
// Orbit-level experiments: Cesaro averages of pushforwards, equidistribution
// against Lebesgue, stationarity residuals, and orbit-closure classification
// (exact on rational points of unperturbed systems).

#include <vector>

#include "rdslab/dynamics.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/seminorm.hpp"

namespace rdslab {

// (1/n) sum_{k=0}^{n-1} mu^{*k} * delta_x, estimated from `orbits` random
// words; the cloud keeps every visited orbit point with uniform weight.
struct CesaroResult {
  PointCloudMeasure cloud;
  GridDensity grid;                       // binned on nx * ny cells
  std::vector<double> tv_checkpoints_n;   // horizons where TV was recorded
  std::vector<double> tv_to_lebesgue;     // TV(cesaro_n, uniform) at those n
};

CesaroResult cesaro(const DrivingMeasure& mu, const TorusPoint& start, size_t n,
                    size_t orbits, size_t nx, size_t ny, uint64_t seed);

// TV distance between the binned cloud and its exact one-letter average
// pushforward; small for nearly stationary measures.
double stationary_residual(const DrivingMeasure& mu, const PointCloudMeasure& cloud,
                           size_t nx, size_t ny);

enum class OrbitKind { kFinite, kDense, kUndetermined };

struct OrbitReport {
  OrbitKind kind = OrbitKind::kUndetermined;
  size_t orbit_size = 0;      // visited states (exact for rational orbits)
  bool exact = false;         // rational arithmetic was used
  double covering_radius = 0.0;  // max distance from the torus to the orbit
  size_t depth = 0;
};

// Forward orbit of p under the generated semigroup. If p has small rational
// coordinates and every generator is an unperturbed integer-matrix map, the
// orbit lives in (Z/q)^2 and is enumerated exactly. Otherwise a breadth-first
// expansion to `depth` letters measures how densely the orbit fills the
// torus; it is reported dense when the covering radius is at most eps.
struct OrbitOptions {
  size_t depth = 20;
  double eps = 0.05;
  size_t max_rational_den = 1000;
  size_t max_points = 4u << 20;
};
OrbitReport orbit_classify(const DrivingMeasure& mu, const TorusPoint& p,
                           const OrbitOptions& opt = {});

}  // namespace rdslab
