#include "dbmk/quadrature_rules.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dbmk/errors.hpp"

namespace dbmk::quad {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come from
// the first eigenvector components.
Rule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag(i);
    J(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    double v = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v * v;
  }
  return rule;
}

}  // namespace

Rule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre needs at least one node", "nodes");
  if (n == 1) return {{0.0}, {2.0}};
  Eigen::VectorXd b(n - 1);
  for (int k = 1; k < n; ++k) b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  Rule r = golub_welsch(b, 2.0);
  // Christoffel weights 1 / sum_k p_k(x)^2 with orthonormal Legendre p_k.
  for (int i = 0; i < n; ++i) {
    double x = r.nodes[i];
    double p0 = 1.0, p1 = x, sum = 0.5 + 1.5 * x * x;
    for (int k = 1; k + 1 < n; ++k) {
      double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
      sum += (2.0 * (k + 1) + 1.0) / 2.0 * p2 * p2;
    }
    r.weights[i] = 1.0 / sum;
  }
  // Symmetrise to remove eigen-solver noise.
  for (int i = 0; i < n / 2; ++i) {
    int j = n - 1 - i;
    double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

Rule gauss_legendre(int n, double a, double b) {
  Rule r = gauss_legendre(n);
  double half = 0.5 * (b - a);
  double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

Rule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("Gauss-Hermite needs at least one node", "nodes");
  if (n == 1) return {{0.0}, {std::sqrt(std::numbers::pi)}};
  Eigen::VectorXd b(n - 1);
  for (int k = 1; k < n; ++k) b(k - 1) = std::sqrt(k / 2.0);
  Rule r = golub_welsch(b, std::sqrt(std::numbers::pi));
  // Christoffel weights e^{-x^2} / sum_k psi_k(x)^2, accurate in the tails.
  for (int i = 0; i < n; ++i) {
    double x = r.nodes[i];
    double a = 1.0, c = std::sqrt(2.0) * x, sum = 1.0 + c * c;
    for (int k = 1; k + 1 < n; ++k) {
      double d = std::sqrt(2.0 / (k + 1)) * x * c - std::sqrt(static_cast<double>(k) / (k + 1)) * a;
      a = c;
      c = d;
      sum += d * d;
    }
    // The recursion above is for h*_k * pi^{1/4}; restore the normalisation.
    r.weights[i] = std::sqrt(std::numbers::pi) / sum;
  }
  return r;
}

AdaptiveResult integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  AdaptiveResult res;
  if (a == b) return res;
  res.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol,
                                                                             &res.error);
  return res;
}

AdaptiveResult integrate_split(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> breaks, double tol) {
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [a, b](double x) { return !(x > a && x < b); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  AdaptiveResult total;
  double lo = a;
  breaks.push_back(b);
  for (double hi : breaks) {
    AdaptiveResult part = integrate(f, lo, hi, tol);
    total.value += part.value;
    total.error += part.error;
    lo = hi;
  }
  return total;
}

}  // namespace dbmk::quad
