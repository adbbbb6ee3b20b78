#ifndef FINSLER_CORE_HPP
#define FINSLER_CORE_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace finsler {

/// Thrown when a point lies outside the structure's domain box.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on malformed arguments (dimension mismatch, bad configuration).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a dual norm is requested for a degenerate (non-elliptic) norm.
class IllPosedError : public std::runtime_error {
 public:
  explicit IllPosedError(const std::string& what) : std::runtime_error(what) {}
};

/// Small dense vector with inline storage. Used for both domain points and
/// tangent/cotangent vectors; dimension fixed at construction, 2..kMaxDim.
class Vec {
 public:
  static constexpr int kMaxDim = 8;

  Vec() = default;
  Vec(std::initializer_list<double> xs) {
    if (xs.size() > static_cast<std::size_t>(kMaxDim))
      throw UsageError("Vec: dimension above " + std::to_string(kMaxDim));
    n_ = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }
  static Vec zero(int n) {
    Vec v;
    if (n < 0 || n > kMaxDim) throw UsageError("Vec::zero: bad dimension");
    v.n_ = n;
    return v;
  }

  int dim() const { return n_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  const double* begin() const { return c_.data(); }
  const double* end() const { return c_.data() + n_; }

  bool finite() const {
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

  friend Vec operator+(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.n_; ++i) r.c_[i] += b.c_[i];
    return r;
  }
  friend Vec operator-(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.n_; ++i) r.c_[i] -= b.c_[i];
    return r;
  }
  friend Vec operator*(double s, const Vec& a) {
    Vec r = a;
    for (int i = 0; i < a.n_; ++i) r.c_[i] *= s;
    return r;
  }
  friend Vec operator*(const Vec& a, double s) { return s * a; }
  friend Vec operator-(const Vec& a) { return -1.0 * a; }
  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int n_ = 0;
};

/// Domain points share the vector representation.
using Point = Vec;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& v) { return dot(v, v); }
inline double norm(const Vec& v) { return std::sqrt(norm_sq(v)); }

inline double norm_inf(const Vec& v) {
  double m = 0;
  for (int i = 0; i < v.dim(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

inline double norm_p(const Vec& v, double p) {
  double s = 0;
  for (int i = 0; i < v.dim(); ++i) s += std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

inline double distance(const Point& a, const Point& b) { return norm(a - b); }

inline Vec normalized(const Vec& v) {
  double m = norm(v);
  if (m == 0) throw UsageError("normalized: zero vector");
  return (1.0 / m) * v;
}

/// Axis-aligned box, the computational domain.
struct Box {
  Vec lo, hi;

  Box() = default;
  Box(Vec lo_, Vec hi_) : lo(lo_), hi(hi_) {
    if (lo.dim() != hi.dim()) throw UsageError("Box: corner dimensions differ");
    for (int i = 0; i < lo.dim(); ++i)
      if (!(lo[i] < hi[i])) throw UsageError("Box: lo must be below hi");
  }
  static Box unit(int n) {
    Vec lo = Vec::zero(n), hi = Vec::zero(n);
    for (int i = 0; i < n; ++i) hi[i] = 1.0;
    return Box(lo, hi);
  }

  int dim() const { return lo.dim(); }

  bool contains(const Point& p, double tol = 0.0) const {
    if (p.dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i)
      if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    return true;
  }

  double extent(int axis) const { return hi[axis] - lo[axis]; }

  Point clamp(const Point& p) const {
    Point q = p;
    for (int i = 0; i < dim(); ++i) q[i] = std::min(std::max(q[i], lo[i]), hi[i]);
    return q;
  }
};

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw UsageError("median: empty sample");
  std::sort(xs.begin(), xs.end());
  std::size_t m = xs.size() / 2;
  if (xs.size() % 2 == 1) return xs[m];
  return 0.5 * (xs[m - 1] + xs[m]);
}

inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw UsageError("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  double rank = q * static_cast<double>(xs.size() - 1);
  std::size_t i = static_cast<std::size_t>(rank);
  if (i + 1 >= xs.size()) return xs.back();
  double f = rank - static_cast<double>(i);
  return xs[i] * (1 - f) + xs[i + 1] * f;
}

/// Index-sliced parallel loop with deterministic result slots; the first
/// exception is rethrown after all workers join.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int k = std::min(workers, n);
  pool.reserve(static_cast<std::size_t>(k));
  for (int w = 0; w < k; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace finsler

#endif  // FINSLER_CORE_HPP
