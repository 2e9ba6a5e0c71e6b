#include "rdslab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace rdslab {

CesaroResult cesaro(const DrivingMeasure& mu, const TorusPoint& start, size_t n,
                    size_t orbits, size_t nx, size_t ny, uint64_t seed) {
  if (n == 0 || orbits == 0) throw std::invalid_argument("cesaro needs n, orbits > 0");
  Xoshiro256pp rng(derive_seed(seed, "cesaro"));
  CesaroResult res;
  res.cloud.atoms.reserve(n * orbits);
  double w = 1.0 / double(n * orbits);
  // running grid so TV checkpoints come from prefixes of the same run
  GridDensity run;
  run.nx = nx;
  run.ny = ny;
  run.data.assign(nx * ny, 0.0);
  std::vector<TorusPoint> state(orbits, start);
  for (size_t o = 0; o < orbits; ++o) {
    size_t ix = std::min(nx - 1, size_t(start.x * nx));
    size_t iy = std::min(ny - 1, size_t(start.y * ny));
    run.at(ix, iy) += 1.0;
    res.cloud.atoms.push_back({start, w});
  }
  size_t next_cp = 1;
  for (size_t k = 1; k <= n; ++k) {
    if (k == next_cp || k == n) {
      res.tv_checkpoints_n.push_back(double(k));
      res.tv_to_lebesgue.push_back(tv_to_uniform(run));
      next_cp *= 2;
    }
    if (k == n) break;
    for (size_t o = 0; o < orbits; ++o) {
      uint32_t a = uint32_t(rng.next_below(mu.arity()));  // flagship is uniform;
      // general probabilities:
      if (mu.arity() > 1) {
        double u = rng.next_double(), acc = 0.0;
        for (uint32_t i = 0; i < mu.arity(); ++i) {
          acc += mu.probs()[i];
          if (u < acc) {
            a = i;
            break;
          }
        }
      }
      state[o] = mu.atom(a).eval(state[o]);
      size_t ix = std::min(nx - 1, size_t(state[o].x * nx));
      size_t iy = std::min(ny - 1, size_t(state[o].y * ny));
      run.at(ix, iy) += 1.0;
      res.cloud.atoms.push_back({state[o], w});
    }
  }
  res.grid = std::move(run);
  return res;
}

double stationary_residual(const DrivingMeasure& mu, const PointCloudMeasure& cloud,
                           size_t nx, size_t ny) {
  PointCloudMeasure pushed;
  pushed.atoms.reserve(cloud.atoms.size() * mu.arity());
  for (const auto& a : cloud.atoms) {
    for (uint32_t i = 0; i < mu.arity(); ++i)
      pushed.atoms.push_back({mu.atom(i).eval(a.p), a.w * mu.probs()[i]});
  }
  return tv_distance(bin_cloud(cloud, nx, ny), bin_cloud(pushed, nx, ny));
}

namespace {

// continued-fraction rational recovery with bounded denominator
bool to_rational(double x, size_t max_den, int64_t* num, int64_t* den) {
  for (size_t q = 1; q <= max_den; ++q) {
    double p = std::round(x * double(q));
    if (std::abs(x - p / double(q)) < 1e-9) {
      *num = int64_t(p);
      *den = int64_t(q);
      return true;
    }
  }
  return false;
}

bool integer_matrix(const Mat2& m) {
  auto is_int = [](double v) { return std::abs(v - std::round(v)) < 1e-12; };
  return is_int(m.a) && is_int(m.b) && is_int(m.c) && is_int(m.d);
}

}  // namespace

OrbitReport orbit_classify(const DrivingMeasure& mu, const TorusPoint& p,
                           const OrbitOptions& opt) {
  OrbitReport rep;
  rep.depth = opt.depth;

  // exact route: rational point, pure integer-matrix generators
  int64_t nx, dx, ny, dy;
  bool linear = true;
  for (uint32_t i = 0; i < mu.arity(); ++i)
    linear = linear && mu.atom(i).modes().empty() && integer_matrix(mu.atom(i).linear());
  if (linear && to_rational(p.x, opt.max_rational_den, &nx, &dx) &&
      to_rational(p.y, opt.max_rational_den, &ny, &dy)) {
    int64_t q = dx / std::gcd(dx, dy) * dy;
    int64_t ax = nx * (q / dx), ay = ny * (q / dy);
    auto key = [q](int64_t a, int64_t b) { return uint64_t(a) * uint64_t(q) + uint64_t(b); };
    std::unordered_set<uint64_t> seen;
    std::queue<std::pair<int64_t, int64_t>> bfs;
    auto push = [&](int64_t a, int64_t b) {
      a = ((a % q) + q) % q;
      b = ((b % q) + q) % q;
      if (seen.insert(key(a, b)).second) bfs.push({a, b});
    };
    push(ax, ay);
    while (!bfs.empty()) {
      auto [a, b] = bfs.front();
      bfs.pop();
      for (uint32_t i = 0; i < mu.arity(); ++i) {
        const Mat2& M = mu.atom(i).linear();
        push(int64_t(std::llround(M.a)) * a + int64_t(std::llround(M.b)) * b,
             int64_t(std::llround(M.c)) * a + int64_t(std::llround(M.d)) * b);
      }
    }
    rep.exact = true;
    rep.orbit_size = seen.size();
    rep.kind = OrbitKind::kFinite;
    // covering radius of the finite orbit
    double worst = 0.0;
    const int probe = 40;
    for (int i = 0; i < probe; ++i)
      for (int j = 0; j < probe; ++j) {
        TorusPoint z((i + 0.5) / probe, (j + 0.5) / probe);
        double best = 1.0;
        for (uint64_t k : seen) {
          TorusPoint o(double(k / uint64_t(q)) / double(q),
                       double(k % uint64_t(q)) / double(q));
          best = std::min(best, dist(z, o));
        }
        worst = std::max(worst, best);
      }
    rep.covering_radius = worst;
    return rep;
  }

  // floating breadth-first expansion with grid deduplication
  const double cell = 1.0 / 4096.0;
  auto grid_key = [&](const TorusPoint& t) {
    return (uint64_t(t.x / cell) << 32) | uint64_t(t.y / cell);
  };
  std::unordered_set<uint64_t> seen;
  std::vector<TorusPoint> points{p}, frontier{p};
  seen.insert(grid_key(p));
  for (size_t d = 0; d < opt.depth && points.size() < opt.max_points; ++d) {
    std::vector<TorusPoint> next;
    next.reserve(frontier.size() * mu.arity());
    for (const auto& x : frontier) {
      for (uint32_t i = 0; i < mu.arity(); ++i) {
        TorusPoint y = mu.atom(i).eval(x);
        if (seen.insert(grid_key(y)).second) {
          next.push_back(y);
          points.push_back(y);
        }
      }
    }
    if (next.empty()) break;
    frontier = std::move(next);
  }
  rep.orbit_size = points.size();

  PointCloudMeasure cloud;
  cloud.atoms.reserve(points.size());
  for (const auto& x : points) cloud.atoms.push_back({x, 1.0});
  SpatialHash hash(cloud, opt.eps);
  double worst = 0.0;
  const int probe = int(std::ceil(2.0 / opt.eps));
  for (int i = 0; i < probe && worst <= opt.eps; ++i)
    for (int j = 0; j < probe; ++j) {
      TorusPoint z((i + 0.5) / probe, (j + 0.5) / probe);
      if (hash.ball_mass(z, opt.eps) == 0.0) {
        worst = opt.eps * 1.01;  // some cell has no orbit point within eps
        break;
      }
      // refine: nearest point within the ball is at most eps away already
    }
  rep.covering_radius = worst > opt.eps ? worst : opt.eps;
  rep.kind = worst <= opt.eps ? OrbitKind::kDense : OrbitKind::kUndetermined;
  return rep;
}

}  // namespace rdslab
