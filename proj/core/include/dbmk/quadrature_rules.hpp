#pragma once

#include <functional>
#include <vector>

namespace dbmk::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1].
Rule gauss_legendre(int n);
// Gauss-Legendre mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);
// Gauss-Hermite for the weight e^{-x^2}.
Rule gauss_hermite(int n);

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b]; either end may be infinite.
AdaptiveResult integrate(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-11);

// integrate() with the interval split at the given interior points, for
// integrands with kinks or narrow peaks.
AdaptiveResult integrate_split(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> breaks, double tol = 1e-11);

}  // namespace dbmk::quad
