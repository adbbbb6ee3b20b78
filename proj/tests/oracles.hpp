// Independent oracles used to freeze expected values. Everything here avoids
// the library's optimized code paths: duals come from exhaustive sphere
// sampling, lengths from dense Riemann sums, shortest paths from Bellman-Ford
// relaxation sweeps.
#ifndef FINSLER_TESTS_ORACLES_HPP
#define FINSLER_TESTS_ORACLES_HPP

#include <vector>

#include "finsler/distance.hpp"
#include "finsler/grid.hpp"
#include "finsler/structure.hpp"

namespace oracles {

using finsler::Box;
using finsler::GridDomain;
using finsler::Point;
using finsler::Stencil;
using finsler::Vec;

/// sup <w,v>/F(x,v) by plain maximization over `samples` sphere directions.
inline double brute_force_dual(const finsler::FinslerStructure& f, const Point& x,
                               const Vec& w, long samples = 1000000) {
  if (finsler::norm_sq(w) == 0) return 0.0;
  double best = 0.0;
  if (f.dim == 2) {
    for (long i = 0; i < samples; ++i) {
      double t = 6.283185307179586 * static_cast<double>(i) / samples;
      Vec v{std::cos(t), std::sin(t)};
      best = std::max(best, finsler::dot(w, v) / f.eval(x, v));
    }
    return best;
  }
  finsler::Rng rng(0x02ac1e5ULL);
  for (long i = 0; i < samples; ++i) {
    Vec v = rng.unit_vector(f.dim);
    best = std::max(best, finsler::dot(w, v) / f.eval(x, v));
  }
  return best;
}

/// Dense midpoint Riemann sum of F*(gamma, gamma') over one segment.
template <typename DualFn>
double dense_segment_length(const DualFn& dual, const Point& a, const Point& b,
                            long samples = 200000) {
  Vec d = b - a;
  double sum = 0;
  for (long j = 0; j < samples; ++j) {
    double t = (j + 0.5) / static_cast<double>(samples);
    sum += dual(a + t * d, d);
  }
  return sum / static_cast<double>(samples);
}

/// Central finite differences for gradient checks.
template <typename ValueFn>
Vec central_gradient(const ValueFn& u, const Point& x, double h = 1e-6) {
  Vec g = Vec::zero(x.dim());
  for (int a = 0; a < x.dim(); ++a) {
    Point p = x, m = x;
    p[a] += h;
    m[a] -= h;
    g[a] = (u(p) - u(m)) / (2 * h);
  }
  return g;
}

/// Bellman-Ford sweeps over the same stencil graph: an independent shortest
/// path algorithm to audit the label-setting engine on small grids.
inline std::vector<double> bellman_ford_distances(const finsler::DualField& field,
                                                  const GridDomain& grid,
                                                  const Stencil& stencil, long source,
                                                  const finsler::QuadratureSpec& quad = {}) {
  std::vector<double> dist(static_cast<std::size_t>(grid.node_count()),
                           std::numeric_limits<double>::infinity());
  dist[static_cast<std::size_t>(source)] = 0.0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (long u = 0; u < grid.node_count(); ++u) {
      double du = dist[static_cast<std::size_t>(u)];
      if (!std::isfinite(du)) continue;
      auto ix = grid.node_index(u);
      for (const auto& off : stencil.offsets) {
        std::array<int, 3> jx{ix[0] + off[0], ix[1] + off[1], ix[2] + off[2]};
        if (!grid.index_valid(jx)) continue;
        long v = grid.node_id(jx);
        double w = du + finsler::detail::edge_weight(field, grid, quad, u, v);
        if (w < dist[static_cast<std::size_t>(v)] - 1e-15) {
          dist[static_cast<std::size_t>(v)] = w;
          changed = true;
        }
      }
    }
  }
  return dist;
}

}  // namespace oracles

#endif  // FINSLER_TESTS_ORACLES_HPP
