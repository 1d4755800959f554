#pragma once

// Independent brute-force oracles used by the test suites. These deliberately
// avoid the library's fast paths: exhaustive maxima, dense quadrature, and
// basis enumeration, so a regression in a fast kernel cannot hide.

#include <cmath>
#include <functional>
#include <vector>

#include "lcgeo/grid.hpp"
#include "lcgeo/util.hpp"

namespace oracles {

using lcgeo::GridPotential;
using lcgeo::GridSpec;
using lcgeo::kInf;
using lcgeo::Vec;

// (L phi)(y) by literal exhaustive max over the primal lattice.
inline GridPotential legendre_bruteforce(const GridPotential& phi, const GridSpec& dual) {
  std::vector<double> out(dual.node_count(), -kInf);
  for (std::size_t j = 0; j < out.size(); ++j) {
    Vec y = dual.node(j);
    double best = -kInf;
    for (std::size_t i = 0; i < phi.grid.node_count(); ++i) {
      if (phi.values[i] == kInf) continue;
      Vec x = phi.grid.node(i);
      best = std::max(best, x.dot(y) - phi.values[i]);
    }
    out[j] = best == -kInf ? kInf : best;
  }
  return GridPotential(dual, std::move(out));
}

// sup over a fine 1d lattice of (x y - 1) / phi(y), the A-transform oracle.
inline double polar_1d_bruteforce(const std::function<double(double)>& phi, double x,
                                  double ymax, int samples = 2'000'000) {
  double best = 0.0;
  for (int k = -samples; k <= samples; ++k) {
    double y = ymax * double(k) / samples;
    double p = phi(y);
    if (p == kInf) continue;
    double num = x * y - 1.0;
    if (p <= 0.0) {
      if (num > 0.0) return kInf;
      continue;
    }
    best = std::max(best, num / p);
  }
  return best;
}

// dense trapezoid on [a, b]
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  double h = (b - a) / n, acc = 0.5 * (f(a) + f(b));
  for (int k = 1; k < n; ++k) acc += f(a + k * h);
  return acc * h;
}

}  // namespace oracles
