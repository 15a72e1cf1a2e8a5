#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "dbmk/contour.hpp"
#include "dbmk/errors.hpp"
#include "dbmk/kernels.hpp"
#include "dbmk/quadrature_rules.hpp"
#include "dbmk/special_functions.hpp"
#include "oracles.hpp"

using namespace dbmk;
using namespace dbmk::contour;

namespace {

const double kPi = std::acos(-1.0);
const cplx I(0.0, 1.0);

// First representation, prefactor 2^{n/2} (the printed (2t)^{n/2} gives
// t^{n/2} h^{(t)}_n).
double rep_line(int n, double t, double x) {
  const double b = x / std::sqrt(t);
  auto f = [&](cplx v) { return std::pow(v, n) * std::exp(v * v - 2.0 * v * b); };
  // Through the real part of the saddle points of v^n e^{v^2 - 2vb}.
  const double c = b / 2.0;
  VerticalLine line{c, std::sqrt(2.0 * n + 40.0) + 4.0};
  cplx val = integrate_vertical(f, line, 2048, 1e-12);
  val *= std::pow(kPi, 0.25) * std::exp(b * b) * std::pow(2.0, n / 2.0) / (I * kPi * std::sqrt(std::tgamma(n + 1.0)));
  return val.real();
}

// Second representation, prefactor (1/2)^{n/2}.
double rep_circle(int n, double t, double x) {
  const double b = x / std::sqrt(t);
  auto f = [&](cplx u) { return std::pow(u, -n - 1) * std::exp(-u * u + 2.0 * u * b); };
  // Radius near the saddle of u^{-n} e^{2ub} keeps the cancellation small.
  const double r = std::sqrt((n + 1) / 2.0);
  cplx val = integrate_circle(f, Circle{r}, 512) / (2.0 * kPi * I);
  return (val * std::pow(0.5, n / 2.0) * std::sqrt(std::tgamma(n + 1.0)) / std::pow(kPi, 0.25)).real();
}

}  // namespace

TEST(Circle, Residues) {
  cplx v = integrate_circle([](cplx z) { return 1.0 / z; }, Circle{1.0});
  EXPECT_NEAR(std::abs(v - 2.0 * kPi * I), 0.0, 1e-12);
  for (double r : {0.3, 1.0, 2.5}) {
    EXPECT_LE(std::abs(integrate_circle([](cplx z) { return z; }, Circle{r})), 1e-12);
    EXPECT_LE(std::abs(integrate_circle([](cplx z) { return 3.0 + z * z - 2.0 * std::pow(z, 5); }, Circle{r})), 1e-12);
    for (int k = 2; k <= 6; ++k) {
      EXPECT_LE(std::abs(integrate_circle([&](cplx z) { return std::pow(z, -k); }, Circle{r})), 1e-12) << k;
    }
  }
  EXPECT_THROW(integrate_circle([](cplx z) { return z; }, Circle{1.0}, 7), ConfigError);
}

TEST(Line, GaussianIntegral) {
  for (double c : {-0.5, 0.0, 1.0, 2.0}) {
    VerticalLine line{c, default_half_height(c)};
    cplx v = integrate_vertical([](cplx z) { return std::exp(z * z); }, line) / (I * kPi);
    EXPECT_NEAR(v.real(), 1.0 / std::sqrt(kPi), 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  }
}

TEST(Line, TruncationGuard) {
  VerticalLine short_line{1.0, 1.5};
  EXPECT_THROW(integrate_vertical([](cplx z) { return std::exp(z * z); }, short_line), ConfigError);
}

TEST(Line, DefaultHalfHeight) {
  EXPECT_NEAR(default_half_height(1.0), std::sqrt(1.0 + std::log(1e14)) + 2.0, 1e-12);
}

TEST(Representations, Examples) {
  EXPECT_NEAR(rep_circle(2, 1.0, 0.0), -0.5311259660135984, 1e-10);
  EXPECT_NEAR(rep_line(1, 1.0, 0.5), sf::hermite_eval(sf::HermiteBasis::star(1), 1, 0.5), 1e-10);
}

TEST(Representations, AgreeWithRecurrence) {
  for (double t : {0.5, 1.0, 2.0}) {
    for (int n = 0; n <= 20; ++n) {
      for (double x : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
        double ref = sf::hermite_eval(sf::HermiteBasis::time_indexed(20, t), n, x);
        double tol = 1e-9 * std::max(1.0, std::abs(ref));
        EXPECT_NEAR(rep_circle(n, t, x), ref, tol) << "circle n=" << n << " t=" << t << " x=" << x;
        EXPECT_NEAR(rep_line(n, t, x), ref, tol) << "line n=" << n << " t=" << t << " x=" << x;
      }
    }
  }
}

TEST(Representations, NegativePowerLine) {
  const int n = 2;
  const double t = 1.0, x = 0.3;
  auto f = [&](cplx v) { return std::pow(v, -n) * std::exp(v * v - 2.0 * v * x / std::sqrt(t)); };
  VerticalLine line{1.0, default_half_height(1.0) + 1.0};
  double lhs = (integrate_vertical(f, line, 2048) / (kPi * I)).real();
  auto rhs = quad::integrate([&](double y) { return sf::heaviside_power(n, y - x) * std::exp(-y * y / t); }, x, INFINITY);
  EXPECT_NEAR(lhs, std::pow(2.0, n) / (std::sqrt(kPi) * std::pow(t, n / 2.0)) * rhs.value, 1e-8);
}

TEST(Segment, Examples) {
  Segment seg{-I, I};
  cplx one = integrate_segment([](cplx) { return cplx(1.0); }, seg) / (2.0 * kPi * I);
  EXPECT_NEAR(one.real(), 1.0 / kPi, 1e-14);
  for (double s : {0.3, kPi / 2, 2.0, 5.0}) {
    cplx v = integrate_segment([&](cplx u) { return std::exp(u * s); }, seg) / (2.0 * kPi * I);
    EXPECT_NEAR(v.real(), oracle::sine_kernel(s), 1e-13);
  }
  cplx half_pi = integrate_segment([&](cplx u) { return std::exp(u * kPi / 2.0); }, seg) / (2.0 * kPi * I);
  EXPECT_NEAR(half_pi.real(), 2.0 / (kPi * kPi), 1e-14);
  EXPECT_THROW(integrate_segment([](cplx) { return cplx(1.0); }, seg, 3), ConfigError);

  kernels::BeadParam b(0.6);
  EXPECT_NEAR(std::abs(b.u_plus() - cplx(0.6, 0.8)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b.u_minus() - cplx(0.6, -0.8)), 0.0, 1e-15);
}

TEST(Dispatch, ContourSpecVariant) {
  ContourSpec c{Circle{1.0}, 64};
  EXPECT_NEAR(std::abs(integrate([](cplx z) { return 1.0 / z; }, c) - 2.0 * kPi * I), 0.0, 1e-12);
  ContourSpec s{Segment{cplx(0.0), cplx(2.0)}, 16};
  EXPECT_NEAR(integrate([](cplx z) { return z; }, s).real(), 2.0, 1e-14);
}

TEST(DoubleContour, DiagonalAndReality) {
  auto r = double_contour(1, 1, 0.0, 0.0, 1.0);
  EXPECT_NEAR(r.value.real(), 1.0 / std::sqrt(kPi), 1e-10);
  EXPECT_LE(std::abs(r.value.imag()), 1e-10);
  for (int n : {1, 2, 4}) {
    for (int np : {1, 3}) {
      auto v = double_contour(n, np, 0.4, -0.7, std::exp(-0.6));
      EXPECT_LE(std::abs(v.value.imag()), 1e-10);
    }
  }
}

TEST(DoubleContour, SeparationEnforced) {
  DoubleContourOptions o;
  o.abscissa = 1.0;
  o.radius = 2.0;
  o.search_abscissa = false;
  EXPECT_THROW(double_contour(1, 1, 0.0, 0.0, 1.0, {1.0, 1.0}, o), ConfigError);
  EXPECT_THROW(double_contour(1, 1, 0.0, 0.0, -1.0), ConfigError);
}

TEST(DoubleContour, InvariantUnderContourChoice) {
  const double decay = std::exp(-0.4);
  DoubleContourOptions base;
  base.search_abscissa = false;
  auto ref = double_contour(2, 1, 0.3, -0.2, decay, {1.0, 1.0}, base);
  for (double c : {0.8, 1.2, 1.8}) {
    for (double frac : {0.2, 0.5, 0.8}) {
      DoubleContourOptions o = base;
      o.abscissa = c;
      o.radius = frac * c * decay;
      o.line_nodes = 1024;
      auto v = double_contour(2, 1, 0.3, -0.2, decay, {1.0, 1.0}, o);
      EXPECT_NEAR(v.value.real(), ref.value.real(), 1e-10) << c << " " << frac;
    }
  }
}

TEST(DoubleContour, NodeDoublingWithinEstimate) {
  DoubleContourOptions o;
  auto a = double_contour(3, 2, -0.5, 0.8, std::exp(-0.3), {1.0, 1.0}, o);
  o.circle_nodes *= 2;
  o.line_nodes *= 2;
  auto b = double_contour(3, 2, -0.5, 0.8, std::exp(-0.3), {1.0, 1.0}, o);
  EXPECT_LE(std::abs(a.value - b.value), a.error_estimate + 1e-14);
}

TEST(DoubleContour, DefaultSizing) {
  EXPECT_DOUBLE_EQ(default_abscissa(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(default_abscissa(9, 4), 3.0);
}
