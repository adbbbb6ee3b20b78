#ifndef FINSLER_STRUCTURE_HPP
#define FINSLER_STRUCTURE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finsler/core.hpp"
#include "finsler/rng.hpp"

namespace finsler {

/// Declared spatial regularity of F(.,v). "Weak" means the property holds at
/// almost every point of the domain.
enum class Regularity { kContinuous, kWeakUsc, kWeakLsc, kMeasurable };

inline const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::kContinuous: return "continuous";
    case Regularity::kWeakUsc: return "weak-usc";
    case Regularity::kWeakLsc: return "weak-lsc";
    default: return "measurable";
  }
}

/// Where a catalog structure is discontinuous in x, declared up front so the
/// engine can refine quadrature near it, exclude sample bands around it, and
/// (for nowhere dense sets) offer the limit-from-complement representative.
struct DiscontinuitySet {
  std::function<bool(const Point&)> contains;
  std::function<double(const Point&)> distance;  // Euclidean distance to the set
};

/// Measurable Finsler structure F : domain x R^n -> [0, inf).
///
/// Contract (checked samplewise by check_axioms):
///   F(x, s v) = |s| F(x, v);  F(x, .) convex;
///   |v| / lambda(x) <= F(x, v) <= lambda(x) |v| with lambda continuous >= 1.
///
/// Values on a declared discontinuity set follow the entry's stated
/// representative; the objects are only defined up to null sets, so the
/// representative is part of the structure.
struct FinslerStructure {
  int dim = 2;
  Box domain;
  std::function<double(const Point&, const Vec&)> eval;
  std::function<double(const Point&)> lambda;
  Regularity regularity = Regularity::kContinuous;
  std::optional<DiscontinuitySet> discontinuity;
};

/// Validating evaluation: domain and dimension checks, exact zero at v = 0.
inline double eval_finsler(const FinslerStructure& f, const Point& x, const Vec& v) {
  if (x.dim() != f.dim || v.dim() != f.dim)
    throw UsageError("eval_finsler: dimension mismatch");
  if (!x.finite() || !v.finite()) throw UsageError("eval_finsler: non-finite input");
  if (!f.domain.contains(x, 1e-12))
    throw DomainError("eval_finsler: point outside domain box");
  if (norm_sq(v) == 0.0) return 0.0;
  return f.eval(x, v);
}

/// Samplewise verdict on the definitional axioms. Violations are reported as
/// maxima over the drawn tuples; relative where a natural scale exists.
struct AxiomReport {
  int samples = 0;
  double homogeneity = 0.0;   // |F(x,sv)| vs |s| F(x,v), relative to F(x,v)
  double convexity = 0.0;     // midpoint excess, relative
  double ellipticity = 0.0;   // excursion outside [|v|/lambda, lambda |v|]
  double positivity = 0.0;    // max(0, -min unit value) -- 0 when positive

  bool passed(double tol) const {
    return homogeneity <= tol && convexity <= tol && ellipticity <= tol &&
           positivity <= tol;
  }
};

inline AxiomReport check_axioms(const FinslerStructure& f, int samples,
                                std::uint64_t seed = 0x5eedf1d5u) {
  if (samples < 1) throw UsageError("check_axioms: samples must be >= 1");
  AxiomReport rep;
  rep.samples = samples;
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    Point x = rng.point_in(f.domain);
    Vec v = rng.unit_vector(f.dim) * rng.uniform(0.1, 3.0);
    double fv = f.eval(x, v);
    double nv = norm(v);

    double lam = rng.uniform(-3.0, 3.0);
    double fsv = f.eval(x, lam * v);
    rep.homogeneity = std::max(rep.homogeneity, std::abs(fsv - std::abs(lam) * fv) / fv);

    Vec u = rng.unit_vector(f.dim) * rng.uniform(0.1, 3.0);
    double fu = f.eval(x, u);
    double fm = f.eval(x, 0.5 * (u + v));
    rep.convexity = std::max(rep.convexity, (fm - 0.5 * (fu + fv)) / (0.5 * (fu + fv)));

    double L = f.lambda(x);
    double low = nv / L, high = L * nv;
    rep.ellipticity = std::max(rep.ellipticity,
                               std::max(low - fv, fv - high) / nv);

    double funit = f.eval(x, (1.0 / nv) * v);
    rep.positivity = std::max(rep.positivity, 1e-12 - funit);
  }
  rep.positivity = std::max(rep.positivity, 0.0);
  return rep;
}

/// Probe the uniform upper-semicontinuity modulus at x: the largest probed
/// radius d such that F(y,v) <= (1+eps) F(x,v) for all sampled y in B(x,d)
/// and sampled unit v. nullopt signals that even the smallest radius fails,
/// i.e. usc is violated at x at this probe resolution.
inline std::optional<double> usc_modulus(const FinslerStructure& f, const Point& x,
                                         double eps, std::vector<double> probe_radii,
                                         int directions,
                                         std::uint64_t seed = 0xa5c0ull) {
  if (eps <= 0) throw UsageError("usc_modulus: eps must be positive");
  if (probe_radii.empty()) throw UsageError("usc_modulus: no probe radii");
  for (std::size_t i = 1; i < probe_radii.size(); ++i)
    if (!(probe_radii[i] < probe_radii[i - 1]) || probe_radii[i] <= 0)
      throw UsageError("usc_modulus: radii must be positive decreasing");

  Rng rng(seed);
  std::vector<Vec> dirs;
  dirs.reserve(directions);
  for (int i = 0; i < directions; ++i) dirs.push_back(rng.unit_vector(f.dim));

  const int y_samples = 4 * directions;
  for (double radius : probe_radii) {
    bool ok = true;
    Rng yr = rng.fork(static_cast<std::uint64_t>(radius * 1e9));
    for (int i = 0; i < y_samples && ok; ++i) {
      Point y = x;
      Vec off = yr.unit_vector(f.dim) * (radius * std::pow(yr.uniform(), 1.0 / f.dim));
      y = y + off;
      if (!f.domain.contains(y)) continue;
      const Vec& v = dirs[static_cast<std::size_t>(i) % dirs.size()];
      if (f.eval(y, v) > (1.0 + eps) * f.eval(x, v)) ok = false;
    }
    if (ok) return radius;
  }
  return std::nullopt;
}

}  // namespace finsler

#endif  // FINSLER_STRUCTURE_HPP
