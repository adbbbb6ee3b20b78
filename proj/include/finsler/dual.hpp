#ifndef FINSLER_DUAL_HPP
#define FINSLER_DUAL_HPP

#include <functional>

#include "finsler/core.hpp"
#include "finsler/rng.hpp"
#include "finsler/structure.hpp"

namespace finsler {

/// Tuning for the direction search behind dual_eval. Defaults reach relative
/// accuracy ~1e-6 (documented as tol_dual) on convex norms, including kinked
/// ones like L1/Linf, and far better on smooth ones.
struct DualOptions {
  int coarse_2d = 256;
  int coarse_nd = 2048;
  int golden_iterations = 64;
  int nd_refine_steps = 80;
  bool refine = true;
  double tol = 1e-6;  // advertised relative tolerance (per evaluation)
};

namespace detail {

inline Vec angle_dir(double theta) { return Vec{std::cos(theta), std::sin(theta)}; }

/// sup over unit directions of <w,v>/rho(v) for a convex 1-homogeneous rho.
/// The superlevel sets {<w,v> >= t rho(v)} are convex cones, so the objective
/// is quasi-concave on the sphere and a bracketed local search is global.
template <typename Rho>
double support_2d(const Rho& rho, const Vec& w, const DualOptions& opt) {
  const double two_pi = 6.283185307179586476925286766559;
  auto value = [&](double theta) {
    Vec e = angle_dir(theta);
    double r = rho(e);
    if (!(r > 1e-14)) throw IllPosedError("dual_eval: norm vanishes on a unit vector");
    return dot(w, e) / r;
  };

  int m = opt.coarse_2d;
  double best = -1e300, best_theta = 0;
  for (int i = 0; i < m; ++i) {
    double theta = two_pi * i / m;
    double g = value(theta);
    if (g > best) {
      best = g;
      best_theta = theta;
    }
  }
  if (!opt.refine) return best;

  // Golden-section on the bracket around the best coarse sample.
  const double gr = 0.61803398874989484820;
  double lo = best_theta - two_pi / m, hi = best_theta + two_pi / m;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  for (int it = 0; it < opt.golden_iterations; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = value(x1);
    }
    best = std::max(best, std::max(f1, f2));
  }
  return best;
}

template <typename Rho>
double support_nd(const Rho& rho, const Vec& w, int dim, const DualOptions& opt) {
  auto value = [&](const Vec& e) {
    double r = rho(e);
    if (!(r > 1e-14)) throw IllPosedError("dual_eval: norm vanishes on a unit vector");
    return dot(w, e) / r;
  };

  Rng rng(0xd1a1ull);  // fixed: the search pattern is part of the algorithm
  Vec best_dir = Vec::zero(dim);
  best_dir[0] = 1.0;
  double best = value(best_dir);
  for (int i = 0; i < opt.coarse_nd; ++i) {
    Vec e = rng.unit_vector(dim);
    double g = value(e);
    if (g > best) {
      best = g;
      best_dir = e;
    }
  }
  if (!opt.refine) return best;

  double radius = 0.5;
  for (int step = 0; step < opt.nd_refine_steps; ++step) {
    bool improved = false;
    for (int k = 0; k < 4 * dim; ++k) {
      Vec e = normalized(best_dir + radius * rng.unit_vector(dim));
      double g = value(e);
      if (g > best) {
        best = g;
        best_dir = e;
        improved = true;
      }
    }
    if (!improved) radius *= 0.7;
  }
  return best;
}

/// Generic entry point used for F*, for (F*)*, and for duals of approximants.
template <typename Rho>
double support_of_unit_ball(const Rho& rho, int dim, const Vec& w,
                            const DualOptions& opt) {
  if (norm_sq(w) == 0.0) return 0.0;
  if (dim == 2) return support_2d(rho, w, opt);
  return support_nd(rho, w, dim, opt);
}

}  // namespace detail

/// F*(x,w) = sup{ <v,w> : F(x,v) <= 1 } = max_{v != 0} <w, v/F(x,v)>.
inline double dual_eval(const FinslerStructure& f, const Point& x, const Vec& w,
                        const DualOptions& opt = {}) {
  if (x.dim() != f.dim || w.dim() != f.dim)
    throw UsageError("dual_eval: dimension mismatch");
  if (!f.domain.contains(x, 1e-12)) throw DomainError("dual_eval: point outside domain");
  return detail::support_of_unit_ball(
      [&](const Vec& v) { return f.eval(x, v); }, f.dim, w, opt);
}

/// The dual structure, carrying the same ellipticity function as its base.
struct DualNorm {
  FinslerStructure base;
  std::function<double(const Point&, const Vec&)> eval;
};

inline DualNorm make_dual_norm(const FinslerStructure& f, const DualOptions& opt = {}) {
  DualNorm d;
  d.base = f;
  d.eval = [f, opt](const Point& x, const Vec& w) { return dual_eval(f, x, w, opt); };
  return d;
}

/// (F*)*(x,v), numerically: the support function of the computed dual's unit
/// ball. Agrees with F within 2 tol_dual relative error for admissible F.
inline double bidual_eval(const FinslerStructure& f, const Point& x, const Vec& v,
                          const DualOptions& opt = {}) {
  if (x.dim() != f.dim || v.dim() != f.dim)
    throw UsageError("bidual_eval: dimension mismatch");
  if (!f.domain.contains(x, 1e-12))
    throw DomainError("bidual_eval: point outside domain");
  return detail::support_of_unit_ball(
      [&](const Vec& w) { return dual_eval(f, x, w, opt); }, f.dim, v, opt);
}

}  // namespace finsler

#endif  // FINSLER_DUAL_HPP
