#ifndef FINSLER_GRID_HPP
#define FINSLER_GRID_HPP

#include <array>
#include <string>
#include <vector>

#include "finsler/core.hpp"

namespace finsler {

/// Uniform node grid over an axis-aligned box, dimension 2 or 3. Node ids are
/// row-major with axis 0 slowest and the last axis fastest.
struct GridDomain {
  Box box;
  std::array<int, 3> res{1, 1, 1};

  GridDomain() = default;
  GridDomain(Box b, std::vector<int> resolution) : box(b) {
    if (b.dim() < 2 || b.dim() > 3)
      throw UsageError("GridDomain: dimension must be 2 or 3");
    if (static_cast<int>(resolution.size()) != b.dim())
      throw UsageError("GridDomain: resolution list does not match dimension");
    for (int a = 0; a < b.dim(); ++a) {
      if (resolution[a] < 3) throw UsageError("GridDomain: resolution must be >= 3");
      res[a] = resolution[a];
    }
  }
  GridDomain(Box b, int resolution)
      : GridDomain(b, std::vector<int>(b.dim(), resolution)) {}

  int dim() const { return box.dim(); }

  long node_count() const {
    long n = 1;
    for (int a = 0; a < dim(); ++a) n *= res[a];
    return n;
  }

  double spacing(int axis) const { return box.extent(axis) / (res[axis] - 1); }

  double max_spacing() const {
    double h = 0;
    for (int a = 0; a < dim(); ++a) h = std::max(h, spacing(a));
    return h;
  }

  long node_id(const std::array<int, 3>& ix) const {
    long id = 0;
    for (int a = 0; a < dim(); ++a) id = id * res[a] + ix[a];
    return id;
  }

  std::array<int, 3> node_index(long id) const {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = dim() - 1; a >= 0; --a) {
      ix[a] = static_cast<int>(id % res[a]);
      id /= res[a];
    }
    return ix;
  }

  Point node_point(const std::array<int, 3>& ix) const {
    Point p = Vec::zero(dim());
    for (int a = 0; a < dim(); ++a) p[a] = box.lo[a] + spacing(a) * ix[a];
    return p;
  }
  Point node_point(long id) const { return node_point(node_index(id)); }

  bool index_valid(const std::array<int, 3>& ix) const {
    for (int a = 0; a < dim(); ++a)
      if (ix[a] < 0 || ix[a] >= res[a]) return false;
    return true;
  }

  /// Nearest node to p (p must lie in the box).
  long snap(const Point& p) const {
    if (!box.contains(p, 1e-9)) throw DomainError("GridDomain::snap: point outside box");
    std::array<int, 3> ix{0, 0, 0};
    for (int a = 0; a < dim(); ++a) {
      int i = static_cast<int>(std::lround((p[a] - box.lo[a]) / spacing(a)));
      ix[a] = std::min(std::max(i, 0), res[a] - 1);
    }
    return node_id(ix);
  }
};

/// Neighbor offset set for the shortest-path graph, symmetric under negation.
///
/// 2D presets ("neighbors" names follow the config schema):
///   8  - axis and diagonal steps; worst-case Euclidean overestimate 8.24%.
///   16 - the coprime direction family up to components (4,1); 40 offsets.
///        Worst-case Euclidean overestimate 0.76%, and 2.76% under the 2:1
///        anisotropy of diag(4,1) metrics (largest inscribed-polygon gap).
/// 3D preset: 26 (full unit cube neighborhood), overestimate <= 12%.
struct Stencil {
  std::string name;
  std::vector<std::array<int, 3>> offsets;
  double anisotropy_bound = 0.0;  // worst-case relative overestimate, Euclidean
};

inline Stencil make_stencil(int dim, int preset) {
  auto with_negations = [](std::vector<std::array<int, 3>> half) {
    std::vector<std::array<int, 3>> all;
    for (const auto& o : half) {
      all.push_back(o);
      all.push_back({-o[0], -o[1], -o[2]});
    }
    return all;
  };

  Stencil s;
  if (dim == 2 && preset == 8) {
    s.name = "8";
    s.offsets = with_negations({{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, -1, 0}});
    s.anisotropy_bound = 0.0824;  // 1/cos(22.5 deg) - 1
    return s;
  }
  if (dim == 2 && preset == 16) {
    s.name = "16";
    s.offsets = with_negations({{1, 0, 0},  {0, 1, 0},  {1, 1, 0},  {1, -1, 0},
                                {2, 1, 0},  {2, -1, 0}, {1, 2, 0},  {1, -2, 0},
                                {3, 1, 0},  {3, -1, 0}, {1, 3, 0},  {1, -3, 0},
                                {3, 2, 0},  {3, -2, 0}, {2, 3, 0},  {2, -3, 0},
                                {4, 1, 0},  {4, -1, 0}, {1, 4, 0},  {1, -4, 0}});
    s.anisotropy_bound = 0.0076;  // 1/cos(atan(1/4)/2) - 1
    return s;
  }
  if (dim == 3 && preset == 26) {
    s.name = "26";
    std::vector<std::array<int, 3>> half;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          if (i == 0 && j == 0 && k == 0) continue;
          if (std::array<int, 3>{i, j, k} > std::array<int, 3>{-i, -j, -k})
            half.push_back({i, j, k});
        }
    s.offsets = with_negations(half);
    s.anisotropy_bound = 0.12;
    return s;
  }
  throw UsageError("make_stencil: unsupported (dim, preset) combination");
}

}  // namespace finsler

#endif  // FINSLER_GRID_HPP
