#include "dbmk/special_functions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "dbmk/errors.hpp"

namespace dbmk::sf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogPiQuarter = 0.28618247146235004;  // log(pi) / 4

double standard_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

}  // namespace

HermiteBasis HermiteBasis::time_indexed(int max_degree, double t) {
  if (!(t > 0.0)) throw DomainError("time-indexed Hermite basis needs t > 0", "t");
  return {max_degree, Family::TimeIndexed, t};
}

HermiteFunctions::HermiteFunctions(int max_degree, double x) : x_(x) {
  if (max_degree < 0) max_degree = 0;
  log_abs_.resize(max_degree + 1);
  sign_.resize(max_degree + 1);

  // Values are stored as v * exp(scale); v is renormalised whenever it grows.
  double scale = -0.5 * x * x - kLogPiQuarter;
  double prev = 0.0;
  double cur = 1.0;
  auto store = [&](int k, double v) {
    if (v == 0.0) {
      log_abs_[k] = -std::numeric_limits<double>::infinity();
      sign_[k] = 0;
    } else {
      log_abs_[k] = std::log(std::abs(v)) + scale;
      sign_[k] = v > 0 ? 1 : -1;
    }
  };
  store(0, cur);
  for (int k = 0; k < max_degree; ++k) {
    double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    store(k + 1, cur);
    double m = std::abs(cur);
    if (m > 1e100 || (m < 1e-100 && m > 0.0)) {
      prev /= m;
      cur /= m;
      scale += std::log(m);
    }
  }
}

double HermiteFunctions::value(int k) const {
  if (k < 0) return 0.0;
  if (sign_.at(k) == 0) return 0.0;
  return sign_[k] * std::exp(log_abs_[k]);
}

double HermiteFunctions::log_abs(int k) const {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  return log_abs_.at(k);
}

int HermiteFunctions::sign(int k) const {
  if (k < 0) return 0;
  return sign_.at(k);
}

double hermite_eval(const HermiteBasis& basis, int n, double x) {
  if (n > basis.max_degree) throw DegreeOverflowError("Hermite degree exceeds basis max_degree");
  if (n < 0) return 0.0;
  double y = x;
  if (basis.family == Family::TimeIndexed) y = x / std::sqrt(basis.t);
  HermiteFunctions psi(n, y);
  if (psi.sign(n) == 0) return 0.0;
  return psi.sign(n) * std::exp(psi.log_abs(n) + 0.5 * y * y);
}

double leading_coefficient(const HermiteBasis& basis, int n) {
  if (n < 0) return 0.0;
  double sigma = basis.family == Family::Star ? 1.0 / std::sqrt(2.0) : std::sqrt(basis.t / 2.0);
  return std::exp(-n * std::log(sigma) - 0.5 * (std::lgamma(n + 1.0) + 0.5 * std::log(kPi)));
}

double weight(const HermiteBasis& basis, double x) {
  double t = basis.family == Family::Star ? 1.0 : basis.t;
  return std::exp(-x * x / t);
}

double log_sqrt_factorial_ratio(int a, int b) {
  return 0.5 * (std::lgamma(a + 1.0) - std::lgamma(b + 1.0));
}

double heaviside_power(int n, double x) {
  if (n < 1) throw DomainError("H^0 is the Dirac delta and is never evaluated pointwise", "n");
  if (x < 0.0) return 0.0;
  if (n == 1) return 1.0;
  return std::exp((n - 1) * std::log(x) - std::lgamma(static_cast<double>(n)));
}

double transition_density(Process kind, double t, double x, double y) {
  if (!(t > 0.0)) throw DomainError("transition density needs t > 0", "t");
  if (kind == Process::BM) {
    double d = y - x;
    return std::exp(-d * d / t) / std::sqrt(kPi * t);
  }
  double q = std::exp(-t);
  double v = -std::expm1(-2.0 * t);  // 1 - q^2 without cancellation
  double d = y - q * x;
  return std::exp(-d * d / v) / std::sqrt(kPi * v);
}

double ScaleAlgebra::q(double s, double base) const {
  if (kind == ScaleKind::Star) return std::exp(-s);
  if (!(base > 0.0)) throw DomainError("Warren q needs a positive base time", "t");
  if (!(s + base > 0.0)) throw DomainError("Warren q needs s + t > 0", "s");
  return std::sqrt(base / (s + base));
}

double ScaleAlgebra::r(double s) const { return kind == ScaleKind::Star ? std::exp(-s) : 1.0; }

double ScaleAlgebra::sigma(double t) const {
  if (kind == ScaleKind::Star) return 1.0 / std::sqrt(2.0);
  if (!(t > 0.0)) throw DomainError("Warren sigma needs t > 0", "t");
  return std::sqrt(t / 2.0);
}

double ScaleAlgebra::h(int n, double t, double x) const {
  if (kind == ScaleKind::Star) return hermite_eval(HermiteBasis::star(n), n, x);
  return hermite_eval(HermiteBasis::time_indexed(n, t), n, x);
}

double ScaleAlgebra::w(double t, double x) const {
  if (kind == ScaleKind::Star) return std::exp(-x * x);
  return std::exp(-x * x / t);
}

double ScaleAlgebra::p(double s, double x, double y) const {
  return transition_density(kind == ScaleKind::Star ? Process::OU : Process::BM, s, x, y);
}

double scale_factor(const ScaleAlgebra& alg, ScaleWhich which, double s, double base) {
  switch (which) {
    case ScaleWhich::q: return alg.q(s, base);
    case ScaleWhich::r: return alg.r(s);
    case ScaleWhich::sigma: return alg.sigma(s);
  }
  return 0.0;
}

double hh(int m, double x) {
  if (m < -1) throw DomainError("Hh order must be >= -1", "m");
  if (m == -1) return standard_normal_pdf(x);
  if (m == 0) return 0.5 * boost::math::erfc(x / std::numbers::sqrt2);
  if (x <= 0.0) {
    // Forward recurrence: every term is nonnegative here, so it is stable.
    double a = standard_normal_pdf(x);
    double b = 0.5 * boost::math::erfc(x / std::numbers::sqrt2);
    for (int k = 1; k <= m; ++k) {
      double c = (a - x * b) / k;
      a = b;
      b = c;
    }
    return b;
  }
  // Positive argument: (phi(x)/m!) int_0^inf s^m exp(-x s - s^2/2) ds.
  auto f = [m, x](double s) { return std::pow(s, m) * std::exp(-x * s - 0.5 * s * s); };
  double err = 0.0;
  double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14, &err);
  return standard_normal_pdf(x) * integral / std::tgamma(m + 1.0);
}

double gauss_incomplete_moment(int m, double z, double t) {
  if (m < 0) throw DomainError("incomplete moment order must be >= 0", "m");
  if (!(t > 0.0)) throw DomainError("incomplete moment needs t > 0", "t");
  double s = std::sqrt(t / 2.0);
  return std::pow(s, m + 1) * std::sqrt(2.0 * kPi) * std::tgamma(m + 1.0) * hh(m, z / s);
}

double heaviside_gaussian(int k, double x, double mean, double sd) {
  if (k < 1) throw DomainError("heaviside_gaussian needs k >= 1", "k");
  if (!(sd > 0.0)) throw DomainError("heaviside_gaussian needs sd > 0", "sd");
  double z0 = (x - mean) / sd;
  return std::pow(sd, k - 1) * hh(k - 1, -z0);
}

}  // namespace dbmk::sf
