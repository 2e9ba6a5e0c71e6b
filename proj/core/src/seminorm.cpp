#include "rdslab/seminorm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rdslab {

double PointCloudMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.w;
  return s;
}

SpatialHash::SpatialHash(const PointCloudMeasure& cloud, double rho) : cloud_(cloud) {
  if (rho <= 0.0) throw std::invalid_argument("spatial hash needs rho > 0");
  nc_ = std::max<size_t>(1, size_t(1.0 / rho));  // cell side 1/nc >= rho
  cells_.assign(nc_ * nc_, {});
  for (uint32_t i = 0; i < cloud_.atoms.size(); ++i) {
    const TorusPoint& p = cloud_.atoms[i].p;
    size_t ix = std::min(nc_ - 1, size_t(p.x * nc_));
    size_t iy = std::min(nc_ - 1, size_t(p.y * nc_));
    cells_[iy * nc_ + ix].push_back(i);
  }
}

double SpatialHash::ball_mass(const TorusPoint& center, double r) const {
  size_t cx = std::min(nc_ - 1, size_t(center.x * nc_));
  size_t cy = std::min(nc_ - 1, size_t(center.y * nc_));
  double mass = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      size_t ix = (cx + nc_ + dx) % nc_;
      size_t iy = (cy + nc_ + dy) % nc_;
      for (uint32_t i : cells_[iy * nc_ + ix]) {
        if (dist(cloud_.atoms[i].p, center) <= r) mass += cloud_.atoms[i].w;
      }
    }
  }
  return mass;
}

double rho_inner(const PointCloudMeasure& a, const PointCloudMeasure& b, double rho,
                 int refine) {
  if (refine < 4) throw std::invalid_argument("rho_inner needs refine >= 4");
  SpatialHash ha(a, rho);
  SpatialHash hb(b, rho);
  size_t nz = size_t(std::ceil(double(refine) / rho));
  double cell = 1.0 / double(nz);
  double acc = 0.0;
  for (size_t iy = 0; iy < nz; ++iy) {
    for (size_t ix = 0; ix < nz; ++ix) {
      TorusPoint z((ix + 0.5) * cell, (iy + 0.5) * cell);
      double ma = ha.ball_mass(z, rho);
      if (ma == 0.0) continue;
      acc += ma * hb.ball_mass(z, rho);
    }
  }
  return acc * cell * cell / (rho * rho * rho * rho);
}

double rho_norm(const PointCloudMeasure& a, double rho, int refine) {
  return std::sqrt(rho_inner(a, a, rho, refine));
}

double var_norm_sq(const PointCloudMeasure& a,
                   const std::function<double(const TorusPoint&)>& delta, double dmin,
                   double dmax, int refine) {
  if (!(0.0 < dmin && dmin <= dmax))
    throw std::invalid_argument("need 0 < dmin <= dmax");
  SpatialHash h(a, dmax);
  size_t nz = size_t(std::ceil(double(refine) / dmin));
  double cell = 1.0 / double(nz);
  double acc = 0.0;
  for (size_t iy = 0; iy < nz; ++iy) {
    for (size_t ix = 0; ix < nz; ++ix) {
      TorusPoint x((ix + 0.5) * cell, (iy + 0.5) * cell);
      double d = delta(x);
      if (!(d >= dmin && d <= dmax))
        throw std::invalid_argument("radius field leaves [dmin, dmax]");
      double m = h.ball_mass(x, d);
      acc += m * m / (d * d * d * d);
    }
  }
  return acc * cell * cell;
}

NormTrace rho_norm_trace(const PointCloudMeasure& a, double rho0, int levels,
                         int refine) {
  NormTrace tr;
  double r = rho0;
  for (int k = 0; k < levels; ++k, r *= 0.5) {
    tr.rho.push_back(r);
    tr.norm.push_back(rho_norm(a, r, refine));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < levels; ++k) {
    double x = std::log(tr.rho[k]);
    double y = std::log(std::max(tr.norm[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  tr.slope = (levels * sxy - sx * sy) / (levels * sxx - sx * sx);
  return tr;
}

double GridDensity::sum() const {
  double s = 0.0;
  for (double v : data) s += v;
  return s;
}

void GridDensity::normalize() {
  double s = sum();
  if (s <= 0.0) return;
  for (double& v : data) v /= s;
}

GridDensity bin_cloud(const PointCloudMeasure& a, size_t nx, size_t ny) {
  GridDensity g;
  g.nx = nx;
  g.ny = ny;
  g.data.assign(nx * ny, 0.0);
  for (const auto& wp : a.atoms) {
    size_t ix = std::min(nx - 1, size_t(wp.p.x * nx));
    size_t iy = std::min(ny - 1, size_t(wp.p.y * ny));
    g.at(ix, iy) += wp.w;
  }
  return g;
}

double tv_distance(const GridDensity& a, const GridDensity& b) {
  if (a.nx != b.nx || a.ny != b.ny)
    throw std::invalid_argument("grid shapes differ");
  double sa = a.sum(), sb = b.sum();
  if (sa <= 0.0 || sb <= 0.0) throw std::invalid_argument("empty grid");
  double d = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i)
    d += std::abs(a.data[i] / sa - b.data[i] / sb);
  return 0.5 * d;
}

double tv_to_uniform(const GridDensity& a) {
  double sa = a.sum();
  if (sa <= 0.0) throw std::invalid_argument("empty grid");
  double u = 1.0 / double(a.data.size());
  double d = 0.0;
  for (double v : a.data) d += std::abs(v / sa - u);
  return 0.5 * d;
}

void write_rdsgrid(const std::string& path, const GridDensity& g) {
  static_assert(std::endian::native == std::endian::little,
                "container is little-endian");
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    f << "rdsgrid v1 " << g.nx << " " << g.ny << "\n";
    f.write(reinterpret_cast<const char*>(g.data.data()),
            std::streamsize(g.data.size() * sizeof(double)));
    if (!f) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

GridDensity read_rdsgrid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(f, header);
  std::istringstream hs(header);
  std::string magic, version;
  GridDensity g;
  hs >> magic >> version >> g.nx >> g.ny;
  if (magic != "rdsgrid" || version != "v1" || g.nx == 0 || g.ny == 0)
    throw std::runtime_error("bad rdsgrid header in " + path);
  g.data.assign(g.nx * g.ny, 0.0);
  f.read(reinterpret_cast<char*>(g.data.data()),
         std::streamsize(g.data.size() * sizeof(double)));
  if (!f) throw std::runtime_error("truncated rdsgrid file " + path);
  return g;
}

}  // namespace rdslab
