#ifndef FINSLER_DISTANCE_HPP
#define FINSLER_DISTANCE_HPP

#include <cstring>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "finsler/catalog.hpp"
#include "finsler/core.hpp"
#include "finsler/grid.hpp"
#include "finsler/polyline.hpp"

namespace finsler {

/// The distance engine's view of a structure: the dual integrand F*(x, xi)
/// plus the metadata needed for quadrature refinement and sampling bands.
struct DualField {
  int dim = 2;
  Box domain;
  std::function<double(const Point&, const Vec&)> eval;
  std::function<double(const Point&)> disc_distance;  // null when no declared set
  double lambda_max = 1.0;
  std::string structure_id;
};

inline DualField dual_field(const CatalogEntry& e, EvalMode mode = EvalMode::kPlain,
                            const DualOptions& opt = {}) {
  DualField f;
  f.dim = e.structure.dim;
  f.domain = e.structure.domain;
  f.eval = dual_evaluator(e, mode, opt);
  if (e.structure.discontinuity) f.disc_distance = e.structure.discontinuity->distance;
  f.lambda_max = e.lambda_max;
  f.structure_id = e.id + (mode == EvalMode::kEssential ? ":essential" : "");
  return f;
}

/// Field for a non-catalog dual evaluator (e.g. an approximation member).
inline DualField dual_field_from(std::function<double(const Point&, const Vec&)> eval,
                                 int dim, Box domain, double lambda_max,
                                 std::string id) {
  DualField f;
  f.dim = dim;
  f.domain = domain;
  f.eval = std::move(eval);
  f.lambda_max = lambda_max;
  f.structure_id = std::move(id);
  return f;
}

struct QuadratureSpec {
  int order = 5;
  bool refine_crossing = true;  // double the order on edges near the declared set
};

/// Single-source geodesic distances on the stencil graph. Unreached nodes
/// (outside a cutoff) carry +inf.
struct DistanceMap {
  GridDomain grid;
  long source = -1;
  std::vector<double> values;
  std::string structure_id;

  double at(long id) const { return values[static_cast<std::size_t>(id)]; }
  bool reached(long id) const { return std::isfinite(at(id)); }
};

namespace detail {

/// Weight of the straight edge between two nodes: midpoint quadrature of
/// F*(., b-a). Evaluated in canonical (lower id first) orientation so both
/// traversal directions share the exact same value; F*(x,-v) = F*(x,v) since
/// F*(x,.) is a norm.
inline double edge_weight(const DualField& field, const GridDomain& grid,
                          const QuadratureSpec& quad, long u, long v) {
  if (v < u) std::swap(u, v);
  Point a = grid.node_point(u), b = grid.node_point(v);
  Vec d = b - a;
  int order = quad.order;
  if (quad.refine_crossing && field.disc_distance) {
    double len = norm(d);
    if (std::min(field.disc_distance(a), field.disc_distance(b)) <= len) order *= 2;
  }
  double sum = 0;
  for (int j = 0; j < order; ++j) {
    double t = (j + 0.5) / order;
    sum += field.eval(a + t * d, d);
  }
  return sum / order;
}

}  // namespace detail

/// Label-setting shortest path from `source` (snapped to the nearest node).
/// Ties break on node id through the (distance, id) heap ordering, so runs
/// are bit-reproducible. With a finite `cutoff` the search stops once every
/// node within that distance is settled.
inline DistanceMap distance_map(const DualField& field, const GridDomain& grid,
                                const Stencil& stencil, const Point& source,
                                const QuadratureSpec& quad = {},
                                double cutoff = std::numeric_limits<double>::infinity(),
                                long target = -1) {
  if (field.dim != grid.dim()) throw UsageError("distance_map: dimension mismatch");
  if (!grid.box.contains(source, 1e-9))
    throw DomainError("distance_map: source outside box");

  DistanceMap map;
  map.grid = grid;
  map.structure_id = field.structure_id;
  map.source = grid.snap(source);
  map.values.assign(static_cast<std::size_t>(grid.node_count()),
                    std::numeric_limits<double>::infinity());
  map.values[static_cast<std::size_t>(map.source)] = 0.0;

  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, map.source});

  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > map.values[static_cast<std::size_t>(u)]) continue;  // stale entry
    if (du > cutoff) break;
    if (u == target) break;
    auto ix = grid.node_index(u);
    for (const auto& off : stencil.offsets) {
      std::array<int, 3> jx{ix[0] + off[0], ix[1] + off[1], ix[2] + off[2]};
      if (!grid.index_valid(jx)) continue;
      long v = grid.node_id(jx);
      double w = du + detail::edge_weight(field, grid, quad, u, v);
      if (w < map.values[static_cast<std::size_t>(v)]) {
        map.values[static_cast<std::size_t>(v)] = w;
        heap.push({w, v});
      }
    }
  }
  return map;
}

/// d(x, y): distance map from x, early exit once the node nearest y settles.
inline double point_distance(const DualField& field, const GridDomain& grid,
                             const Stencil& stencil, const Point& x, const Point& y,
                             const QuadratureSpec& quad = {}) {
  if (!grid.box.contains(y, 1e-9))
    throw DomainError("point_distance: target outside box");
  long target = grid.snap(y);
  DistanceMap map = distance_map(field, grid, stencil, x, quad,
                                 std::numeric_limits<double>::infinity(), target);
  return map.at(target);
}

/// Probe record and limsup proxy for the metric derivative
/// Delta(x, v) = limsup_{t -> 0+} d(x, x+tv) / t.
struct MetricDerivative {
  double value = 0.0;
  std::vector<std::pair<double, double>> probes;  // (t_effective, d / t_effective)
};

/// Probe an existing map from its source node. Probes snap to grid nodes: the
/// ratio at each t uses the effective step |y_node - x_node| / |v|, exact
/// whenever t v is a whole-node offset. The value is the max over the two
/// smallest probes.
inline MetricDerivative metric_derivative_from_map(const DistanceMap& map, const Vec& v,
                                                   const std::vector<double>& t_list) {
  const GridDomain& grid = map.grid;
  long xn = map.source;
  Point xp = grid.node_point(xn);
  double nv = norm(v);

  MetricDerivative out;
  for (double t : t_list) {
    Point y = xp + t * v;
    if (!grid.box.contains(y, 1e-12))
      throw DomainError("metric_derivative: probe exits box");
    long yn = grid.snap(y);
    if (yn == xn) throw UsageError("metric_derivative: probe below grid resolution");
    double t_eff = distance(grid.node_point(yn), xp) / nv;
    out.probes.push_back({t_eff, map.at(yn) / t_eff});
  }
  std::size_t m = out.probes.size();
  out.value = out.probes[m - 1].second;
  if (m >= 2) out.value = std::max(out.value, out.probes[m - 2].second);
  return out;
}

inline MetricDerivative metric_derivative(const DualField& field, const GridDomain& grid,
                                          const Stencil& stencil, const Point& x,
                                          const Vec& v, std::vector<double> t_list = {},
                                          const QuadratureSpec& quad = {}) {
  if (norm_sq(v) == 0) throw UsageError("metric_derivative: zero direction");
  double h = grid.max_spacing();
  if (t_list.empty()) t_list = {16 * h, 8 * h, 4 * h};

  Point xp = grid.node_point(grid.snap(x));
  double cutoff = field.lambda_max * t_list.front() * norm(v) * 1.05;
  DistanceMap map = distance_map(field, grid, stencil, xp, quad, cutoff);
  return metric_derivative_from_map(map, v, t_list);
}

/// Samplewise check of Delta_{d}(x,v) <= F*(x,v), with the equality gap
/// reported for entries where the usc hypothesis makes it an equality.
struct DensityCheckRecord {
  Point x;
  Vec v;
  double delta = 0;
  double f_star = 0;
  double ratio = 0;       // delta / f_star
  bool in_gap_band = false;  // far enough from the declared set to judge the gap
};

struct DensityCheckReport {
  std::vector<DensityCheckRecord> records;
  double max_ratio = 0.0;
  double max_gap_in_band = 0.0;  // max |1 - ratio| over banded records
  int banded = 0;
};

/// Probe directions are whole-node offsets so d(x, x+tv) needs no snapping
/// correction; the pool mixes stencil and non-stencil directions and the step
/// count scales inversely with the offset size, keeping the probe footprint
/// near 8-16 cells. Samples stay clear of any declared discontinuity set by
/// the full probe reach plus two cells (the positive a.e. assertion is tested
/// away from the set). Four directions share one bounded map per point.
inline DensityCheckReport check_metric_density_inequality(
    const DualField& field, const GridDomain& grid, const Stencil& stencil,
    int samples, std::uint64_t seed, const QuadratureSpec& quad = {},
    int workers = 1) {
  static const std::vector<std::array<int, 3>> kOffsets2d = {
      {1, 0, 0},  {0, 1, 0},  {1, 1, 0},  {1, -1, 0}, {2, 1, 0},  {1, 2, 0},
      {2, -1, 0}, {1, -2, 0}, {3, 2, 0},  {2, 3, 0},  {4, 3, 0},  {3, -4, 0}};
  static const std::vector<std::array<int, 3>> kOffsets3d = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1},
      {0, 1, 1}, {1, 1, 1}, {2, 1, 1}, {1, 2, -1}};
  const auto& pool = grid.dim() == 2 ? kOffsets2d : kOffsets3d;
  constexpr int kDirsPerPoint = 4;

  const Rng base(seed);
  const double h = grid.max_spacing();
  const int points = (samples + kDirsPerPoint - 1) / kDirsPerPoint;
  std::vector<std::vector<DensityCheckRecord>> slots(points);

  parallel_for(points, workers, [&](int s) {
    Rng r = base.fork(s);

    struct Probe {
      Vec v;
      int k0 = 1;
      double reach = 0, footprint = 0;
    };
    std::array<Probe, kDirsPerPoint> probes;
    double band = 0, margin = 0, max_reach = 0;
    for (auto& p : probes) {
      auto off = pool[r.below(pool.size())];
      p.v = Vec::zero(grid.dim());
      double max_comp = 0;
      for (int a = 0; a < grid.dim(); ++a) {
        p.v[a] = off[a];
        max_comp = std::max(max_comp, std::abs(p.v[a]));
      }
      p.k0 = std::max(1, static_cast<int>(std::lround(4.0 / max_comp)));
      p.reach = 2.0 * p.k0 * h * norm(p.v);
      p.footprint = 2.0 * p.k0 * h * max_comp;
      band = std::max(band, p.reach + 2 * h);
      margin = std::max(margin, p.footprint + 2 * h);
      max_reach = std::max(max_reach, p.reach);
    }

    Point xp;
    bool found = false;
    for (int attempt = 0; attempt < 400 && !found; ++attempt) {
      xp = grid.node_point(grid.snap(r.point_in(grid.box, margin)));
      found = !field.disc_distance || field.disc_distance(xp) > band;
    }
    if (!found) return;

    double cutoff = field.lambda_max * max_reach * 1.05;
    DistanceMap map = distance_map(field, grid, stencil, xp, quad, cutoff);

    for (const auto& p : probes) {
      MetricDerivative md =
          metric_derivative_from_map(map, p.v, {2.0 * p.k0 * h, 1.0 * p.k0 * h});
      DensityCheckRecord rec;
      rec.x = xp;
      rec.v = p.v;
      rec.in_gap_band = true;
      rec.delta = md.value;
      rec.f_star = field.eval(xp, p.v);
      rec.ratio = rec.delta / rec.f_star;
      slots[static_cast<std::size_t>(s)].push_back(rec);
    }
  });

  DensityCheckReport rep;
  for (auto& group : slots)
    for (auto& rec : group) {
      if (static_cast<int>(rep.records.size()) >= samples) break;
      rep.max_ratio = std::max(rep.max_ratio, rec.ratio);
      rep.max_gap_in_band = std::max(rep.max_gap_in_band, std::abs(1.0 - rec.ratio));
      ++rep.banded;
      rep.records.push_back(rec);
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization: flat binary (header: dims, resolution, box; payload: 64-bit
// floats, row-major with axis 0 slowest) and CSV (node coords + value).
// ---------------------------------------------------------------------------

inline std::string distance_map_to_binary(const DistanceMap& map) {
  std::string out;
  auto put = [&out](const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
  };
  const char magic[8] = {'F', 'D', 'M', 'A', 'P', '0', '0', '1'};
  put(magic, 8);
  std::uint32_t dim = static_cast<std::uint32_t>(map.grid.dim());
  put(&dim, 4);
  for (int a = 0; a < map.grid.dim(); ++a) {
    std::uint32_t r = static_cast<std::uint32_t>(map.grid.res[a]);
    put(&r, 4);
  }
  for (int a = 0; a < map.grid.dim(); ++a) {
    double lo = map.grid.box.lo[a];
    put(&lo, 8);
  }
  for (int a = 0; a < map.grid.dim(); ++a) {
    double hi = map.grid.box.hi[a];
    put(&hi, 8);
  }
  for (double v : map.values) put(&v, 8);
  return out;
}

inline DistanceMap distance_map_from_binary(const std::string& bytes) {
  std::size_t pos = 0;
  auto get = [&](void* p, std::size_t n) {
    if (pos + n > bytes.size()) throw UsageError("distance map binary: truncated");
    std::memcpy(p, bytes.data() + pos, n);
    pos += n;
  };
  char magic[8];
  get(magic, 8);
  if (std::string(magic, 8) != "FDMAP001")
    throw UsageError("distance map binary: bad magic");
  std::uint32_t dim = 0;
  get(&dim, 4);
  if (dim < 2 || dim > 3) throw UsageError("distance map binary: bad dimension");
  std::vector<int> res(dim);
  for (auto& r : res) {
    std::uint32_t v = 0;
    get(&v, 4);
    r = static_cast<int>(v);
  }
  Vec lo = Vec::zero(dim), hi = Vec::zero(dim);
  for (std::uint32_t a = 0; a < dim; ++a) get(&lo[a], 8);
  for (std::uint32_t a = 0; a < dim; ++a) get(&hi[a], 8);
  DistanceMap map;
  map.grid = GridDomain(Box(lo, hi), res);
  map.values.resize(static_cast<std::size_t>(map.grid.node_count()));
  for (auto& v : map.values) get(&v, 8);
  return map;
}

inline std::string distance_map_to_csv(const DistanceMap& map) {
  std::string out = map.grid.dim() == 2 ? "x0,x1,value\n" : "x0,x1,x2,value\n";
  char line[160];
  for (long id = 0; id < map.grid.node_count(); ++id) {
    Point p = map.grid.node_point(id);
    if (map.grid.dim() == 2)
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p[0], p[1], map.at(id));
    else
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", p[0], p[1], p[2],
                    map.at(id));
    out += line;
  }
  return out;
}

}  // namespace finsler

#endif  // FINSLER_DISTANCE_HPP
