#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <variant>

namespace dbmk::contour {

using cplx = std::complex<double>;
using ComplexFn = std::function<cplx(cplx)>;

struct Circle {
  double radius = 1.0;
};
struct VerticalLine {
  double real_part = 1.0;
  double half_height = 8.0;
};
struct Segment {
  cplx start;
  cplx end;
};

struct ContourSpec {
  std::variant<Circle, VerticalLine, Segment> shape;
  int nodes = 256;
};

// Positively oriented trapezoid rule on |u| = radius; returns the integral
// of f du (not divided by 2 pi i).
cplx integrate_circle(const ComplexFn& f, const Circle& c, int nodes = 256);

// Trapezoid rule on [c - iY, c + iY], oriented upwards; throws ConfigError
// if the integrand at the ends is not negligible against `tol`.
cplx integrate_vertical(const ComplexFn& f, const VerticalLine& line, int nodes = 512,
                        double tol = 1e-14);

// Gauss-Legendre along the straight segment.
cplx integrate_segment(const ComplexFn& f, const Segment& seg, int nodes = 64);

cplx integrate(const ComplexFn& f, const ContourSpec& spec);

// Line truncation height for the default tail bound |e^{v^2}| = e^{c^2 - y^2}.
double default_half_height(double abscissa, double eps = 1e-14);

struct DoubleContourOptions {
  int circle_nodes = 256;
  int line_nodes = 512;
  // Overrides the automatic sizing when positive.
  double abscissa = 0.0;
  double radius = 0.0;
  // Try smaller/larger admissible abscissas and keep the best conditioned one.
  bool search_abscissa = true;
  // Relative tolerance of the node-halving self-consistency check.
  double self_tol = 1e-12;
};

struct DoubleContourResult {
  cplx value;
  double error_estimate = 0.0;
  double abscissa = 0.0;
  double radius = 0.0;
  double half_height = 0.0;
  int circle_nodes = 0;
  int line_nodes = 0;
  bool doubled = false;
  // Sum of absolute node contributions (roundoff scale), with the prefactor.
  double magnitude = 0.0;
};

// (2/(2 pi i)^2) int_gamma du int_Gamma dv v^{n'} u^{-n}
//   exp(-u^2 + 2 u x s1 + v^2 - 2 v x' s2) / (decay v - u),
// with (s1, s2) = scale_pair, gamma a circle around 0 and Gamma a vertical
// line from -i inf to +i inf, sized so that |u| < decay |v| on all nodes.
DoubleContourResult double_contour(int n, int np, double x, double xp, double decay,
                                   std::pair<double, double> scale_pair = {1.0, 1.0},
                                   const DoubleContourOptions& opts = {});

// Default abscissa max(1, sqrt(max(n, n', 1))).
double default_abscissa(int n, int np);

}  // namespace dbmk::contour
