#ifndef FINSLER_CATALOG_HPP
#define FINSLER_CATALOG_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "finsler/cantor.hpp"
#include "finsler/core.hpp"
#include "finsler/dual.hpp"
#include "finsler/structure.hpp"

namespace finsler {

/// Dense symmetric matrix for Riemannian structures, dimension 2 or 3.
class Mat {
 public:
  explicit Mat(int n) : n_(n) {
    if (n < 2 || n > 3) throw UsageError("Mat: dimension must be 2 or 3");
  }
  static Mat identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
  static Mat diag(std::initializer_list<double> d) {
    Mat m(static_cast<int>(d.size()));
    int i = 0;
    for (double x : d) {
      m.at(i, i) = x;
      ++i;
    }
    return m;
  }

  int dim() const { return n_; }
  double& at(int i, int j) { return a_[i * n_ + j]; }
  double at(int i, int j) const { return a_[i * n_ + j]; }

  Vec apply(const Vec& v) const {
    Vec r = Vec::zero(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r[i] += at(i, j) * v[j];
    return r;
  }

  double quad(const Vec& v) const { return dot(v, apply(v)); }

  double det() const {
    if (n_ == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
    return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
           at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
           at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
  }

  Mat inverse() const {
    double d = det();
    if (std::abs(d) < 1e-300) throw UsageError("Mat::inverse: singular");
    Mat r(n_);
    if (n_ == 2) {
      r.at(0, 0) = at(1, 1) / d;
      r.at(1, 1) = at(0, 0) / d;
      r.at(0, 1) = -at(0, 1) / d;
      r.at(1, 0) = -at(1, 0) / d;
      return r;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
        r.at(j, i) = (at(i1, j1) * at(i2, j2) - at(i1, j2) * at(i2, j1)) / d;
      }
    return r;
  }

  bool symmetric(double tol = 1e-12) const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (std::abs(at(i, j) - at(j, i)) > tol) return false;
    return true;
  }

  /// [lower bound on smallest eig, upper bound on largest eig]; exact for 2x2,
  /// Gershgorin for 3x3.
  std::pair<double, double> sym_eig_bounds() const {
    if (n_ == 2) {
      double tr = at(0, 0) + at(1, 1);
      double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det()));
      return {(tr - disc) / 2, (tr + disc) / 2};
    }
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < n_; ++i) {
      double off = 0;
      for (int j = 0; j < n_; ++j)
        if (j != i) off += std::abs(at(i, j));
      lo = std::min(lo, at(i, i) - off);
      hi = std::max(hi, at(i, i) + off);
    }
    return {lo, hi};
  }

 private:
  int n_;
  std::array<double, 9> a_{};
};

/// Plain vs essential evaluation of a structure's dual along curves. The
/// essential mode substitutes the declared limit-from-complement value at
/// quadrature samples that land on the discontinuity set, numerically
/// standing in for the transversality sup over removed null sets.
enum class EvalMode { kPlain, kEssential };

/// A region on which the dual takes the constant scalar factor g, i.e.
/// F*(y, xi) = g * rho(xi) for y in the region, with a computable Euclidean
/// distance function. Feeds the exact inf-convolution in approximate().
struct WeightRegion {
  double g;
  std::function<double(const Point&)> distance;
};

/// Catalog entry: a concrete admissible structure together with the analytic
/// side data the oracles and the distance engine can exploit.
struct CatalogEntry {
  std::string id;
  FinslerStructure structure;
  bool expected_coincidence = true;  // true iff regularity is continuous/weak-usc
  double lambda_max = 1.0;

  std::function<double(const Point&, const Vec&)> analytic_dual;      // optional
  std::function<double(const Point&, const Point&)> analytic_distance;  // optional
  std::function<double(const Point&, const Vec&)> essential_dual;     // optional

  // Scalar-weight decomposition of the dual (optional): F* = g_i rho on region i.
  std::function<double(const Vec&)> dual_direction_norm;
  std::vector<WeightRegion> dual_regions;

  // Draws points of the discontinuity set (only meaningful when it has
  // positive measure, as for the fat-Cantor entry).
  std::function<Point(Rng&)> sample_discontinuity;
};

/// The dual evaluator the distance engine should use: analytic when declared,
/// numeric fallback otherwise, with the essential-representative override.
inline std::function<double(const Point&, const Vec&)> dual_evaluator(
    const CatalogEntry& e, EvalMode mode = EvalMode::kPlain,
    const DualOptions& opt = {}) {
  std::function<double(const Point&, const Vec&)> plain = e.analytic_dual;
  if (!plain) {
    FinslerStructure f = e.structure;
    plain = [f, opt](const Point& x, const Vec& w) { return dual_eval(f, x, w, opt); };
  }
  if (mode == EvalMode::kPlain || !e.essential_dual || !e.structure.discontinuity)
    return plain;
  auto on_set = e.structure.discontinuity->contains;
  auto essential = e.essential_dual;
  return [plain, essential, on_set](const Point& x, const Vec& w) {
    return on_set(x) ? essential(x, w) : plain(x, w);
  };
}

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

inline CatalogEntry make_euclidean(int n) {
  if (n < 2) throw UsageError("make_euclidean: dimension must be >= 2");
  CatalogEntry e;
  e.id = "euclidean";
  e.structure.dim = n;
  e.structure.domain = Box::unit(n);
  e.structure.eval = [](const Point&, const Vec& v) { return norm(v); };
  e.structure.lambda = [](const Point&) { return 1.0; };
  e.structure.regularity = Regularity::kContinuous;
  e.expected_coincidence = true;
  e.lambda_max = 1.0;
  e.analytic_dual = [](const Point&, const Vec& w) { return norm(w); };
  e.analytic_distance = [](const Point& x, const Point& y) { return distance(x, y); };
  e.dual_direction_norm = [](const Vec& w) { return norm(w); };
  e.dual_regions = {{1.0, [](const Point&) { return 0.0; }}};
  return e;
}

/// F(x,v) = sqrt(<A(x) v, v>). The ellipticity function comes from pointwise
/// eigenvalue bounds of A(x); construction fails on a non-SPD sample.
inline CatalogEntry make_riemannian(std::function<Mat(const Point&)> field,
                                    Regularity reg, std::string id,
                                    int dim = 2, Box domain = Box::unit(2)) {
  CatalogEntry e;
  e.id = std::move(id);
  e.structure.dim = dim;
  e.structure.domain = domain;
  e.structure.regularity = reg;
  e.expected_coincidence =
      reg == Regularity::kContinuous || reg == Regularity::kWeakUsc;

  Rng rng(0x51dc4ec4ull);
  double lam_max = 1.0;
  for (int s = 0; s < 256; ++s) {
    Point x = rng.point_in(domain);
    Mat a = field(x);
    if (!a.symmetric(1e-9)) throw UsageError("make_riemannian: non-symmetric sample");
    auto [lo, hi] = a.sym_eig_bounds();
    if (!(lo > 0)) throw UsageError("make_riemannian: non-SPD sample detected");
    lam_max = std::max(lam_max, std::max(std::sqrt(hi), 1.0 / std::sqrt(lo)));
  }
  e.lambda_max = lam_max;

  e.structure.eval = [field](const Point& x, const Vec& v) {
    return std::sqrt(std::max(0.0, field(x).quad(v)));
  };
  e.structure.lambda = [field](const Point& x) {
    auto [lo, hi] = field(x).sym_eig_bounds();
    return std::max({1.0, std::sqrt(hi), 1.0 / std::sqrt(lo)});
  };
  e.analytic_dual = [field](const Point& x, const Vec& w) {
    return std::sqrt(std::max(0.0, field(x).inverse().quad(w)));
  };
  return e;
}

/// Constant-matrix convenience: adds the straight-line analytic distance and
/// the single-region dual decomposition.
inline CatalogEntry make_riemannian_const(const Mat& a, std::string id) {
  Mat ainv = a.inverse();
  CatalogEntry e = make_riemannian([a](const Point&) { return a; },
                                   Regularity::kContinuous, std::move(id), a.dim(),
                                   Box::unit(a.dim()));
  e.analytic_distance = [ainv](const Point& x, const Point& y) {
    return std::sqrt(std::max(0.0, ainv.quad(y - x)));
  };
  e.dual_direction_norm = [ainv](const Vec& w) {
    return std::sqrt(std::max(0.0, ainv.quad(w)));
  };
  e.dual_regions = {{1.0, [](const Point&) { return 0.0; }}};
  return e;
}

/// F(x,v) = (sum_i w(x) |v_i|^p)^(1/p) = w(x)^(1/p) |v|_p with weight bounds
/// 0 < c <= w <= C. The dual is w^(-1/p) |.|_q with 1/p + 1/q = 1; p = 1 uses
/// the explicit max-norm branch.
inline CatalogEntry make_weighted_lp(double p, std::function<double(const Point&)> weight,
                                     double c, double C, Regularity reg, std::string id,
                                     int dim = 2, Box domain = Box::unit(2)) {
  if (p < 1.0) throw UsageError("make_weighted_lp: p must be >= 1");
  if (!(c > 0) || !(C >= c) || !std::isfinite(C))
    throw UsageError("make_weighted_lp: weight bounds must satisfy 0 < c <= C < inf");

  CatalogEntry e;
  e.id = std::move(id);
  e.structure.dim = dim;
  e.structure.domain = domain;
  e.structure.regularity = reg;
  e.expected_coincidence =
      reg == Regularity::kContinuous || reg == Regularity::kWeakUsc;

  const double nd = static_cast<double>(dim);
  const double m_hi = std::pow(nd, std::max(0.0, 1.0 / p - 0.5));
  const double m_lo = std::pow(nd, std::min(0.0, 1.0 / p - 0.5));
  const double lam = std::max(std::pow(C, 1.0 / p) * m_hi,
                              1.0 / (std::pow(c, 1.0 / p) * m_lo));
  e.lambda_max = std::max(1.0, lam);
  e.structure.lambda = [lam](const Point&) { return std::max(1.0, lam); };

  if (p == 1.0) {
    e.structure.eval = [weight](const Point& x, const Vec& v) {
      double s = 0;
      for (int i = 0; i < v.dim(); ++i) s += std::abs(v[i]);
      return weight(x) * s;
    };
    e.analytic_dual = [weight](const Point& x, const Vec& w) {
      return norm_inf(w) / weight(x);
    };
    e.dual_direction_norm = [](const Vec& w) { return norm_inf(w); };
  } else {
    const double q = p / (p - 1.0);
    e.structure.eval = [weight, p](const Point& x, const Vec& v) {
      return std::pow(weight(x), 1.0 / p) * norm_p(v, p);
    };
    e.analytic_dual = [weight, p, q](const Point& x, const Vec& w) {
      return std::pow(weight(x), -1.0 / p) * norm_p(w, q);
    };
    e.dual_direction_norm = [q](const Vec& w) { return norm_p(w, q); };
  }
  return e;
}

/// Weighted-L2 structure whose weight is 4 on a closed disk and 1 outside:
/// upper semicontinuous (the larger value sits on the closed set), with the
/// circle as declared discontinuity set. Ids: see catalog().
inline CatalogEntry make_usc_disk_entry(Point center = {0.5, 0.5}, double radius = 0.25) {
  auto weight = [center, radius](const Point& x) {
    return distance(x, center) <= radius ? 4.0 : 1.0;
  };
  CatalogEntry e = make_weighted_lp(2.0, weight, 1.0, 4.0, Regularity::kWeakUsc,
                                    "wlp-usc-disk");
  DiscontinuitySet disc;
  disc.contains = [center, radius](const Point& x) {
    return std::abs(distance(x, center) - radius) <= 1e-12;
  };
  disc.distance = [center, radius](const Point& x) {
    return std::abs(distance(x, center) - radius);
  };
  e.structure.discontinuity = disc;
  // Limit from the complement of the circle, outer side.
  e.essential_dual = [](const Point&, const Vec& w) { return norm(w); };
  e.dual_direction_norm = [](const Vec& w) { return norm(w); };
  e.dual_regions = {
      {0.5, [center, radius](const Point& x) {
         return std::max(0.0, distance(x, center) - radius);
       }},
      {1.0, [center, radius](const Point& x) {
         return std::max(0.0, radius - distance(x, center));
       }}};
  return e;
}

/// The coincidence counterexample: F(x,v) = w(x) |v| with w = 1/2 on the fat
/// Cantor product set S (positive measure, empty interior) and w = 1 off S.
/// w is lower semicontinuous but fails upper semicontinuity at every point
/// of S, so the structure is not weak usc.
inline CatalogEntry make_nonusc_counterexample() {
  auto sq = std::make_shared<const FatCantorSquare>();
  auto weight = [sq](const Point& x) {
    thread_local double mx0 = -1, mx1 = -1;
    thread_local bool min0 = false, min1 = false;
    if (x[0] != mx0) {
      mx0 = x[0];
      min0 = sq->axis().contains(x[0]);
    }
    if (x[1] != mx1) {
      mx1 = x[1];
      min1 = sq->axis().contains(x[1]);
    }
    return (min0 && min1) ? 0.5 : 1.0;
  };

  CatalogEntry e;
  e.id = "nonusc-cantor";
  e.structure.dim = 2;
  e.structure.domain = Box::unit(2);
  e.structure.regularity = Regularity::kWeakLsc;
  e.expected_coincidence = false;
  e.lambda_max = 2.0;
  e.structure.lambda = [](const Point&) { return 2.0; };
  e.structure.eval = [weight](const Point& x, const Vec& v) {
    return weight(x) * norm(v);
  };
  e.analytic_dual = [weight](const Point& x, const Vec& w) {
    return norm(w) / weight(x);
  };
  // Off S the weight is locally constant 1; the limit from the (dense, open)
  // complement is 1 everywhere on S.
  e.essential_dual = [](const Point&, const Vec& w) { return norm(w); };

  DiscontinuitySet disc;
  disc.contains = [sq](const Point& x) { return sq->contains(x); };
  disc.distance = [sq](const Point& x) { return sq->distance(x); };
  e.structure.discontinuity = disc;

  e.dual_direction_norm = [](const Vec& w) { return norm(w); };
  e.dual_regions = {{2.0, [sq](const Point& x) { return sq->distance(x); }},
                    {1.0, [](const Point&) { return 0.0; }}};

  e.sample_discontinuity = [sq](Rng& rng) {
    for (;;) {
      Point p = rng.point_in(Box::unit(2));
      if (sq->contains(p)) return p;
    }
  };
  return e;
}

// ---------------------------------------------------------------------------
// Monotone continuous approximation F_n (dual-side Lipschitz regularization)
// ---------------------------------------------------------------------------

/// Continuous member of the approximating sequence: F_n* is the n|v|-Lipschitz
/// inf-convolution of F* in x, F_n is its dual.
struct ApproximationMember {
  int index = 1;
  double lipschitz_scale = 1.0;  // F_n*(.,v) is (lipschitz_scale |v|)-Lipschitz
  FinslerStructure norm;         // F_n, continuous in x
  std::function<double(const Point&, const Vec&)> dual;  // F_n*
};

/// F_n*(x,v) = inf_y [ F*(y,v) + n |x-y| |v| ].
///
/// Entries with a declared scalar-weight region decomposition get the exact
/// infimum, min_i [ g_i rho(v) + n dist(x, region_i) |v| ]; other entries fall
/// back to a minimum over a grid of step h (h <= 1/(4 n lambda_max) keeps the
/// discretized value within the documented bracket of the continuum one).
inline std::function<double(const Point&, const Vec&)> approximate_dual(
    const CatalogEntry& e, int n, double h) {
  if (n < 1) throw UsageError("approximate_dual: n must be >= 1");
  if (!e.dual_regions.empty() && e.dual_direction_norm) {
    auto rho = e.dual_direction_norm;
    auto regions = e.dual_regions;
    double nn = n;
    return [rho, regions, nn](const Point& x, const Vec& v) {
      double rv = rho(v), ev = norm(v);
      double best = 1e300;
      for (const auto& r : regions)
        best = std::min(best, r.g * rv + nn * r.distance(x) * ev);
      return best;
    };
  }

  if (!(h > 0)) throw UsageError("approximate_dual: grid step must be positive");
  auto dual = dual_evaluator(e);
  const Box& box = e.structure.domain;
  std::vector<Point> table;
  std::vector<int> counts(box.dim());
  long total = 1;
  for (int a = 0; a < box.dim(); ++a) {
    counts[a] = std::max(2, static_cast<int>(std::ceil(box.extent(a) / h)) + 1);
    total *= counts[a];
  }
  for (long id = 0; id < total; ++id) {
    long rest = id;
    Point y = Vec::zero(box.dim());
    for (int a = box.dim() - 1; a >= 0; --a) {
      int i = static_cast<int>(rest % counts[a]);
      rest /= counts[a];
      y[a] = box.lo[a] + box.extent(a) * i / (counts[a] - 1);
    }
    table.push_back(y);
  }
  double lam = e.lambda_max;
  double nn = n;
  return [dual, table, nn, lam](const Point& x, const Vec& v) {
    double ev = norm(v);
    if (ev == 0) return 0.0;
    double best = 1e300;
    for (const Point& y : table) {
      double penalty = nn * distance(x, y) * ev;
      if (penalty + ev / lam >= best) continue;  // value lower bound
      best = std::min(best, dual(y, v) + penalty);
    }
    return best;
  };
}

inline ApproximationMember approximate(const CatalogEntry& e, int n, double h,
                                       const DualOptions& opt = {}) {
  ApproximationMember m;
  m.index = n;
  m.lipschitz_scale = n;
  m.dual = approximate_dual(e, n, h);

  auto dual_n = m.dual;
  int dim = e.structure.dim;
  m.norm.dim = dim;
  m.norm.domain = e.structure.domain;
  m.norm.regularity = Regularity::kContinuous;
  double lam_n = e.lambda_max * (1.0 + n * h * e.lambda_max);
  m.norm.lambda = [lam_n](const Point&) { return lam_n; };
  m.norm.eval = [dual_n, dim, opt](const Point& x, const Vec& v) {
    return detail::support_of_unit_ball(
        [&](const Vec& w) { return dual_n(x, w); }, dim, v, opt);
  };
  return m;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// The built-in entries, addressable by id from the CLI and config files.
inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;
    v.push_back(make_euclidean(2));
    v.push_back(make_riemannian_const(Mat::diag({4.0, 1.0}), "riem-diag-4-1"));
    v.push_back(make_weighted_lp(1.0, [](const Point&) { return 1.0; }, 1.0, 1.0,
                                 Regularity::kContinuous, "wlp-p1"));
    v.push_back(make_usc_disk_entry());
    v.push_back(make_nonusc_counterexample());
    return v;
  }();
  return entries;
}

inline const CatalogEntry& find_entry(const std::string& id) {
  for (const auto& e : catalog())
    if (e.id == id) return e;
  throw UsageError("unknown structure id: " + id);
}

inline std::vector<std::string> catalog_ids() {
  std::vector<std::string> ids;
  for (const auto& e : catalog()) ids.push_back(e.id);
  return ids;
}

}  // namespace finsler

#endif  // FINSLER_CATALOG_HPP
