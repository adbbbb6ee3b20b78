#ifndef FINSLER_CANTOR_HPP
#define FINSLER_CANTOR_HPP

#include <cstdint>

#include "finsler/core.hpp"

namespace finsler {

/// Fat (Smith-Volterra-Cantor) set S1 in [0,1]: at step k, each remaining
/// interval loses its open middle piece of absolute length 4^-k. Total length
/// removed is sum 2^(k-1) 4^-k = 1/2, so S1 is closed, nowhere dense, and has
/// Lebesgue measure 1/2.
///
/// Membership is decided to a finite depth with exact integer arithmetic:
/// every interval endpoint at step k is an integer multiple of 2^-62, so the
/// classification is reproducible bit for bit. Points that survive all
/// `depth` steps are classified as members; the misclassified residue has
/// measure sum_{k>depth} 2^(k-1) 4^-k = 2^-(depth+1).
class FatCantor {
 public:
  static constexpr int kDefaultDepth = 30;
  static constexpr int kScaleBits = 62;

  struct Classification {
    bool in_set = false;   // survived all probed steps
    int exit_depth = 0;    // step whose gap swallowed the point (0 if in_set)
    double gap_lo = 0.0;   // enclosing gap; endpoints belong to the set
    double gap_hi = 0.0;
  };

  explicit FatCantor(int depth = kDefaultDepth) : depth_(depth) {
    if (depth < 1 || 2 * depth + 1 > kScaleBits)
      throw UsageError("FatCantor: depth out of range");
  }

  int depth() const { return depth_; }

  Classification classify(double x) const {
    Classification r;
    if (x < 0.0 || x > 1.0) {
      r.in_set = false;
      r.exit_depth = 0;
      r.gap_lo = r.gap_hi = x < 0.0 ? 0.0 : 1.0;  // nearest set point
      return r;
    }
    const std::int64_t unit = std::int64_t{1} << kScaleBits;
    std::int64_t p = static_cast<std::int64_t>(std::llround(std::ldexp(x, kScaleBits)));
    if (p < 0) p = 0;
    if (p > unit) p = unit;
    std::int64_t a = 0, b = unit;
    for (int k = 1; k <= depth_; ++k) {
      const std::int64_t gap = std::int64_t{1} << (kScaleBits - 2 * k);
      const std::int64_t m1 = a + ((b - a) - gap) / 2;
      const std::int64_t m2 = m1 + gap;
      if (p > m1 && p < m2) {
        r.in_set = false;
        r.exit_depth = k;
        r.gap_lo = std::ldexp(static_cast<double>(m1), -kScaleBits);
        r.gap_hi = std::ldexp(static_cast<double>(m2), -kScaleBits);
        return r;
      }
      if (p <= m1)
        b = m1;
      else
        a = m2;
    }
    r.in_set = true;
    return r;
  }

  bool contains(double x) const { return classify(x).in_set; }

  /// Distance from x to S1. Gap endpoints persist through every later step,
  /// so for a point inside a gap the nearest set points are the gap ends.
  double distance(double x) const {
    Classification c = classify(x);
    if (c.in_set) return 0.0;
    if (x < 0.0) return -x;
    if (x > 1.0) return x - 1.0;
    return std::min(x - c.gap_lo, c.gap_hi - x);
  }

 private:
  int depth_;
};

/// Product set S = S1 x S1 in [0,1]^2, measure 1/4. Every point of S is a
/// limit of complement points (the complement is open and dense), which is
/// what breaks upper semicontinuity of weights that drop on S.
class FatCantorSquare {
 public:
  explicit FatCantorSquare(int depth = FatCantor::kDefaultDepth) : axis_(depth) {}

  bool contains(const Point& p) const {
    return axis_.contains(p[0]) && axis_.contains(p[1]);
  }

  /// dist(p, S1 x S1) = |(dist(p0,S1), dist(p1,S1))| since coordinates are
  /// independent.
  double distance(const Point& p) const {
    double d0 = axis_.distance(p[0]);
    double d1 = axis_.distance(p[1]);
    return std::sqrt(d0 * d0 + d1 * d1);
  }

  const FatCantor& axis() const { return axis_; }

 private:
  FatCantor axis_;
};

}  // namespace finsler

#endif  // FINSLER_CANTOR_HPP
