#pragma once

#include <vector>

namespace dbmk::sf {

enum class Family { Star, TimeIndexed };

// h*_n (Star) or h^{(t)}_n(x) = h*_n(x / sqrt(t)) (TimeIndexed).
struct HermiteBasis {
  int max_degree = 0;
  Family family = Family::Star;
  double t = 1.0;

  static HermiteBasis star(int max_degree) { return {max_degree, Family::Star, 1.0}; }
  static HermiteBasis time_indexed(int max_degree, double t);
};

double hermite_eval(const HermiteBasis& basis, int n, double x);
double leading_coefficient(const HermiteBasis& basis, int n);
double weight(const HermiteBasis& basis, double x);

// Hermite functions psi_k(x) = h*_k(x) e^{-x^2/2} for k = 0..max_degree, kept
// as (sign, log|psi_k|) so that levels of several hundred at |x| ~ 40 neither
// overflow nor underflow.
class HermiteFunctions {
 public:
  HermiteFunctions(int max_degree, double x);

  int max_degree() const { return static_cast<int>(log_abs_.size()) - 1; }
  double x() const { return x_; }
  // Negative degrees are zero by convention.
  double value(int k) const;
  double log_abs(int k) const;
  int sign(int k) const;

 private:
  double x_;
  std::vector<double> log_abs_;
  std::vector<int> sign_;
};

// log sqrt(a! / b!) through lgamma.
double log_sqrt_factorial_ratio(int a, int b);

// H^n(x) = x^{n-1}/(n-1)! for x >= 0, 0 otherwise; n >= 1.
double heaviside_power(int n, double x);

enum class Process { OU, BM };

// p*_t(x,y) for OU, p_t(x,y) (variance t/2) for BM.
double transition_density(Process kind, double t, double x, double y);

enum class ScaleKind { Star, Warren };
enum class ScaleWhich { q, r, sigma };

// The q, r, sigma algebra together with the h, w, p members of one family, so
// that identities can be written once for both families.
struct ScaleAlgebra {
  ScaleKind kind = ScaleKind::Star;

  // q_s with base time `base` (ignored for Star).
  double q(double s, double base) const;
  double r(double s) const;
  double sigma(double t) const;

  double h(int n, double t, double x) const;
  double w(double t, double x) const;
  double p(double s, double x, double y) const;
};

double scale_factor(const ScaleAlgebra& alg, ScaleWhich which, double s, double base = 1.0);

// Airey's Hh_m(x) = (1/m!) int_x^inf (s - x)^m phi(s) ds with phi the standard
// normal density; Hh_{-1} = phi.
double hh(int m, double x);

// int_z^inf (y - z)^m e^{-y^2/t} dy.
double gauss_incomplete_moment(int m, double z, double t);

// int H^k(x - y) g(y) dy for g the normal density N(mean, sd^2); k >= 1.
double heaviside_gaussian(int k, double x, double mean, double sd);

}  // namespace dbmk::sf
