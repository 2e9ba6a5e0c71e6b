#pragma once
// Correlation semi-norms for measures on the torus, evaluated on weighted
// point clouds: <nu, nu'>_rho = rho^-4 Int nu(B(z,rho)) nu'(B(z,rho)) dz,
// the variable-radius variant, and grid densities with a simple binary
// container format.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rdslab/torus.hpp"

namespace rdslab {

struct WeightedPoint {
  TorusPoint p;
  double w = 1.0;
};

// A measure represented by weighted sample points.
struct PointCloudMeasure {
  std::vector<WeightedPoint> atoms;
  double total_mass() const;
};

// Uniform-cell spatial index over the torus; cells at least as wide as the
// query radius so a wrapped 9-neighborhood covers any ball.
class SpatialHash {
 public:
  SpatialHash(const PointCloudMeasure& cloud, double rho);
  // total weight inside the closed ball B(center, r), r <= rho
  double ball_mass(const TorusPoint& center, double r) const;

 private:
  const PointCloudMeasure& cloud_;
  size_t nc_;  // cells per axis
  std::vector<std::vector<uint32_t>> cells_;
};

// <nu, nu'>_rho on a midpoint z-grid with cells of side <= rho/refine.
// refine >= 4; singular measures (atoms, curves) need larger values.
double rho_inner(const PointCloudMeasure& a, const PointCloudMeasure& b, double rho,
                 int refine = 4);
double rho_norm(const PointCloudMeasure& a, double rho, int refine = 4);

// |nu|_delta^2 = Int nu(B(x, delta(x)))^2 / delta(x)^4 dx for a radius field
// with values in [dmin, dmax]; the integration grid resolves dmin.
double var_norm_sq(const PointCloudMeasure& a,
                   const std::function<double(const TorusPoint&)>& delta, double dmin,
                   double dmax, int refine = 4);

// |nu|_rho as a function of dyadic radii rho0 / 2^k, k = 0..levels-1, with a
// log-log slope fit. Absolutely continuous measures stay bounded (slope near
// 0); a point mass blows up like rho^-1.
struct NormTrace {
  std::vector<double> rho;
  std::vector<double> norm;
  double slope = 0.0;  // d ln(norm) / d ln(rho)
};
NormTrace rho_norm_trace(const PointCloudMeasure& a, double rho0, int levels,
                         int refine = 4);

// Row-major scalar field on an nx*ny midpoint grid.
struct GridDensity {
  size_t nx = 0, ny = 0;
  std::vector<double> data;  // data[iy*nx + ix]

  double& at(size_t ix, size_t iy) { return data[iy * nx + ix]; }
  double at(size_t ix, size_t iy) const { return data[iy * nx + ix]; }
  double sum() const;
  void normalize();  // scale to sum 1; no-op on an all-zero grid
};

GridDensity bin_cloud(const PointCloudMeasure& a, size_t nx, size_t ny);

// Total-variation distance between cell mass vectors (both normalized).
double tv_distance(const GridDensity& a, const GridDensity& b);
// TV distance to the uniform (Lebesgue) cell masses.
double tv_to_uniform(const GridDensity& a);

// "rdsgrid v1 <nx> <ny>\n" followed by row-major little-endian float64.
void write_rdsgrid(const std::string& path, const GridDensity& g);
GridDensity read_rdsgrid(const std::string& path);

}  // namespace rdslab
