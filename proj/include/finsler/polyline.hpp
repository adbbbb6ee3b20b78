#ifndef FINSLER_POLYLINE_HPP
#define FINSLER_POLYLINE_HPP

#include <functional>
#include <vector>

#include "finsler/core.hpp"

namespace finsler {

/// Lipschitz curve as an ordered vertex list with a per-segment quadrature
/// order. Consecutive vertices must differ.
struct Polyline {
  std::vector<Point> vertices;
  int quadrature_order = 5;

  Polyline() = default;
  Polyline(std::vector<Point> vs, int order = 5)
      : vertices(std::move(vs)), quadrature_order(order) {
    if (vertices.size() < 2) throw UsageError("Polyline: need at least 2 vertices");
    if (quadrature_order < 1) throw UsageError("Polyline: quadrature order >= 1");
    for (std::size_t i = 1; i < vertices.size(); ++i) {
      if (vertices[i].dim() != vertices[0].dim())
        throw UsageError("Polyline: mixed dimensions");
      if (norm_sq(vertices[i] - vertices[i - 1]) == 0.0)
        throw UsageError("Polyline: consecutive vertices coincide");
    }
  }
};

/// Length of one straight segment under the dual integrand, composite
/// midpoint rule: (1/m) sum_j F*(a + (j+1/2)/m (b-a), b-a).
template <typename DualFn>
double segment_length(const DualFn& dual, const Point& a, const Point& b, int order) {
  Vec d = b - a;
  double sum = 0;
  for (int j = 0; j < order; ++j) {
    double t = (j + 0.5) / order;
    sum += dual(a + t * d, d);
  }
  return sum / order;
}

/// integral of F*(gamma, gamma') over the polyline; additive over
/// concatenation by construction.
template <typename DualFn>
double curve_length(const DualFn& dual, const Polyline& curve, const Box& domain) {
  for (const Point& p : curve.vertices)
    if (!domain.contains(p, 1e-12))
      throw DomainError("curve_length: vertex outside domain");
  double total = 0;
  for (std::size_t i = 1; i < curve.vertices.size(); ++i)
    total += segment_length(dual, curve.vertices[i - 1], curve.vertices[i],
                            curve.quadrature_order);
  return total;
}

inline double curve_length(
    const std::function<double(const Point&, const Vec&)>& dual,
    const Polyline& curve, const Box& domain) {
  return curve_length<std::function<double(const Point&, const Vec&)>>(dual, curve,
                                                                       domain);
}

}  // namespace finsler

#endif  // FINSLER_POLYLINE_HPP
