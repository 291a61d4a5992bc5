// Internal quadrature helpers shared by the measure and geometry code.
#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace fraclab::quadrature {

struct Rule1D {
  std::vector<double> nodes;   // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on the Legendre recurrence.
inline Rule1D gauss_legendre(int n) {
  Rule1D r;
  r.nodes.resize(static_cast<size_t>(n));
  r.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[static_cast<size_t>(i)] = x;
    r.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Rescale a [-1,1] rule to [a,b].
inline Rule1D rescale(const Rule1D& r, double a, double b) {
  Rule1D out = r;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (size_t i = 0; i < out.nodes.size(); ++i) {
    out.nodes[i] = mid + half * r.nodes[i];
    out.weights[i] = half * r.weights[i];
  }
  return out;
}

}  // namespace fraclab::quadrature
