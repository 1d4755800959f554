#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace lcgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Extended-real convention used throughout: potentials live in [0, +inf],
// +inf marks points outside the effective domain. -inf and NaN are invalid.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool valid_extended(double v) { return !std::isnan(v) && v > -kInf; }

struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks so output
// slots are written by exactly one thread; results are bit-identical to the
// serial loop.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned workers = std::min<std::size_t>(hw, (n + 255) / 256);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double fa,
                      double b, double fb, double fm) {
  return (b - a) * (fa + 4.0 * fm + fb) / 6.0;
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double fa, double b, double fb, double m, double fm,
                                   double whole, double eps, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, flm);
  double right = simpson(f, m, fm, b, fb, frm);
  double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) < 15.0 * eps)
    return left + right + diff / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b]; eps is an absolute target.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, int max_depth = 40) {
  if (!(b > a)) return 0.0;
  // seed with a few panels so narrow features are not missed by the first split
  const int panels = 8;
  double h = (b - a) / panels, total = 0.0;
  for (int k = 0; k < panels; ++k) {
    double x0 = a + k * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    double f0 = f(x0), f1 = f(x1), fm = f(xm);
    double whole = detail::simpson(f, x0, f0, x1, f1, fm);
    total += detail::adaptive_simpson_rec(f, x0, f0, x1, f1, xm, fm, whole,
                                          eps / panels, max_depth);
  }
  return total;
}

// Maximizes a unimodal function on [a, b] by golden-section search.
// Returns the abscissa of the maximum; *value receives f there.
inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double xtol, double* value = nullptr) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  double xm = 0.5 * (a + b);
  if (value) *value = f(xm);
  return xm;
}

// Finds the threshold r in [lo, hi] where pred flips from true to false.
// Requires pred(lo) == true; pred monotone along the interval.
inline double bisect_last_true(const std::function<bool(double)>& pred, double lo,
                               double hi, double rel_tol) {
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(lo))) break;
  }
  return lo;
}

}  // namespace lcgeo
