#ifndef FINSLER_RNG_HPP
#define FINSLER_RNG_HPP

#include <cstdint>

#include "finsler/core.hpp"

namespace finsler {

/// SplitMix64 generator. Standard-library distributions are implementation
/// defined, so all sampling goes through this to keep reports byte-identical
/// across platforms and runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Marsaglia polar method on top of uniform(); used only for directions.
  double gaussian() {
    for (;;) {
      double u = 2 * uniform() - 1, v = 2 * uniform() - 1;
      double s = u * u + v * v;
      if (s > 0 && s < 1) return u * std::sqrt(-2 * std::log(s) / s);
    }
  }

  Vec unit_vector(int dim) {
    for (;;) {
      Vec v = Vec::zero(dim);
      for (int i = 0; i < dim; ++i) v[i] = gaussian();
      double m = norm(v);
      if (m > 1e-12) return (1.0 / m) * v;
    }
  }

  Point point_in(const Box& box, double margin = 0.0) {
    Point p = Vec::zero(box.dim());
    for (int i = 0; i < box.dim(); ++i)
      p[i] = uniform(box.lo[i] + margin, box.hi[i] - margin);
    return p;
  }

  /// Derive an independent stream, e.g. one per sample index.
  Rng fork(std::uint64_t tag) const {
    Rng r(state_ ^ (0x9e3779b97f4a7c15ULL * (tag + 0x632be59bd9b4e019ULL)));
    r.next();
    return r;
  }

 private:
  std::uint64_t state_;
};

}  // namespace finsler

#endif  // FINSLER_RNG_HPP
