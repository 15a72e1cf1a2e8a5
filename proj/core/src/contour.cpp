#include "dbmk/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dbmk/errors.hpp"
#include "dbmk/quadrature_rules.hpp"

namespace dbmk::contour {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct NodeSet {
  std::vector<cplx> points;
  std::vector<cplx> weights;  // integrand times dz, without the coupling term
  double abs_sum = 0.0;
};

NodeSet circle_nodes(int n, double X, double r, int M) {
  NodeSet s;
  s.points.resize(M);
  s.weights.resize(M);
  const double dtheta = 2.0 * kPi / M;
  const double logr = std::log(r);
  for (int j = 0; j < M; ++j) {
    double theta = j * dtheta;
    cplx u = std::polar(r, theta);
    cplx logu{logr, theta};
    cplx val = std::exp(-static_cast<double>(n) * logu - u * u + 2.0 * u * X);
    s.points[j] = u;
    s.weights[j] = val * kI * u * dtheta;
    s.abs_sum += std::abs(s.weights[j]);
  }
  return s;
}

double line_log_abs(int np, double c, double Xp, double y) {
  double lv = np > 0 ? 0.5 * np * std::log(c * c + y * y) : 0.0;
  return lv + c * c - y * y - 2.0 * c * Xp;
}

double line_half_height(int np, double c, double Xp, double eps) {
  double y_peak = 0.0;
  if (np > 0 && 0.5 * np > c * c) y_peak = std::sqrt(0.5 * np - c * c);
  double peak = line_log_abs(np, c, Xp, y_peak);
  double Y = std::max(default_half_height(c, eps), y_peak + 1.0);
  while (line_log_abs(np, c, Xp, Y) > peak + std::log(eps)) Y += 0.25;
  return Y;
}

NodeSet line_nodes(int np, double Xp, double c, double Y, int M) {
  NodeSet s;
  s.points.resize(M + 1);
  s.weights.resize(M + 1);
  const double h = 2.0 * Y / M;
  for (int k = 0; k <= M; ++k) {
    double y = -Y + k * h;
    cplx v{c, y};
    cplx val = std::exp(static_cast<double>(np) * std::log(v) + v * v - 2.0 * v * Xp);
    double w = (k == 0 || k == M) ? 0.5 * h : h;
    s.points[k] = v;
    s.weights[k] = val * kI * w;
    s.abs_sum += std::abs(s.weights[k]);
  }
  return s;
}

struct Sums {
  cplx full;
  cplx half;
  double magnitude = 0.0;
};

Sums couple(const NodeSet& U, const NodeSet& V, double decay) {
  Sums s;
  const std::size_t nu = U.points.size();
  const std::size_t nv = V.points.size();
  for (std::size_t j = 0; j < nu; ++j) {
    cplx row{0.0, 0.0};
    cplx row_half{0.0, 0.0};
    double row_abs = 0.0;
    const cplx u = U.points[j];
    for (std::size_t k = 0; k < nv; ++k) {
      cplx term = V.weights[k] / (decay * V.points[k] - u);
      row += term;
      row_abs += std::abs(term);
      // Halved rule: every other node with doubled weight (ends included).
      if (k % 2 == 0) row_half += 2.0 * term;
    }
    s.full += U.weights[j] * row;
    s.magnitude += std::abs(U.weights[j]) * row_abs;
    if (j % 2 == 0) s.half += 2.0 * U.weights[j] * row_half;
  }
  return s;
}

}  // namespace

double default_half_height(double abscissa, double eps) {
  return std::sqrt(abscissa * abscissa + std::log(1.0 / eps)) + 2.0;
}

double default_abscissa(int n, int np) {
  int m = std::max({n, np, 1});
  return std::max(1.0, std::sqrt(static_cast<double>(m)));
}

cplx integrate_circle(const ComplexFn& f, const Circle& c, int nodes) {
  if (nodes < 8) throw ConfigError("circle quadrature needs at least 8 nodes", "nodes");
  if (!(c.radius > 0.0)) throw ConfigError("circle radius must be positive", "radius");
  const double dtheta = 2.0 * kPi / nodes;
  cplx sum{0.0, 0.0};
  for (int j = 0; j < nodes; ++j) {
    cplx u = std::polar(c.radius, j * dtheta);
    sum += f(u) * kI * u;
  }
  return sum * dtheta;
}

cplx integrate_vertical(const ComplexFn& f, const VerticalLine& line, int nodes, double tol) {
  if (nodes < 8) throw ConfigError("line quadrature needs at least 8 nodes", "nodes");
  if (!(line.half_height > 0.0)) throw ConfigError("half height must be positive", "half_height");
  const double Y = line.half_height;
  const double h = 2.0 * Y / nodes;
  cplx sum{0.0, 0.0};
  double peak = 0.0;
  for (int k = 0; k <= nodes; ++k) {
    double y = -Y + k * h;
    cplx val = f(cplx{line.real_part, y});
    peak = std::max(peak, std::abs(val));
    sum += ((k == 0 || k == nodes) ? 0.5 : 1.0) * val;
  }
  sum *= kI * h;
  double tail = std::abs(f(cplx{line.real_part, Y})) + std::abs(f(cplx{line.real_part, -Y}));
  if (tail > tol * std::max(1.0, peak)) {
    throw ConfigError("vertical line truncated above tolerance; increase half_height",
                      "half_height");
  }
  return sum;
}

cplx integrate_segment(const ComplexFn& f, const Segment& seg, int nodes) {
  if (nodes < 4) throw ConfigError("segment quadrature needs at least 4 nodes", "nodes");
  quad::Rule rule = quad::gauss_legendre(nodes, 0.0, 1.0);
  cplx d = seg.end - seg.start;
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(seg.start + rule.nodes[i] * d);
  }
  return sum * d;
}

cplx integrate(const ComplexFn& f, const ContourSpec& spec) {
  if (auto* c = std::get_if<Circle>(&spec.shape)) return integrate_circle(f, *c, spec.nodes);
  if (auto* l = std::get_if<VerticalLine>(&spec.shape)) {
    return integrate_vertical(f, *l, spec.nodes);
  }
  return integrate_segment(f, std::get<Segment>(spec.shape), spec.nodes);
}

DoubleContourResult double_contour(int n, int np, double x, double xp, double decay,
                                   std::pair<double, double> scale_pair,
                                   const DoubleContourOptions& opts) {
  if (!(decay > 0.0) || !std::isfinite(decay)) {
    throw ConfigError("double contour needs a positive finite decay", "decay");
  }
  if (opts.circle_nodes < 8 || opts.line_nodes < 8) {
    throw ConfigError("double contour needs at least 8 nodes per contour", "nodes");
  }
  const double X = x * scale_pair.first;
  const double Xp = xp * scale_pair.second;
  const double eps = 1e-14;

  double c = opts.abscissa > 0.0 ? opts.abscissa : default_abscissa(n, np);
  double r = opts.radius > 0.0 ? opts.radius : 0.5 * c * decay;
  if (!(r < decay * c)) {
    throw ConfigError("contour separation |u| < decay |v| violated", "radius");
  }

  if (opts.abscissa <= 0.0 && opts.radius <= 0.0 && opts.search_abscissa) {
    // Keep the default unless another admissible abscissa has a clearly
    // smaller roundoff scale; the trapezoid needs the pole at v = u/decay to
    // stay several line steps away from the line.
    const double c0 = c;
    auto scale_of = [&](double cc) {
      double rr = 0.5 * cc * decay;
      double Y = line_half_height(np, cc, Xp, eps);
      double h = 2.0 * Y / opts.line_nodes;
      if (cc < 12.0 * h && cc != c0) return std::numeric_limits<double>::infinity();
      NodeSet U = circle_nodes(n, X, rr, 64);
      NodeSet V = line_nodes(np, Xp, cc, Y, 128);
      return std::log(U.abs_sum) + std::log(V.abs_sum) - std::log(0.5 * decay * cc);
    };
    double best = scale_of(c0);
    for (double f : {0.5, 0.25, 0.125, 0.0625, 2.0, 4.0}) {
      double cc = c0 * f;
      double s = scale_of(cc);
      if (s < best - std::log(4.0)) {
        best = s;
        c = cc;
      }
    }
    r = 0.5 * c * decay;
  }

  const double Y = line_half_height(np, c, Xp, eps);
  int mc = opts.circle_nodes;
  int ml = opts.line_nodes;
  if (ml % 2) ++ml;
  if (mc % 2) ++mc;

  const double pref = 2.0 / std::pow(2.0 * kPi, 2) * -1.0;  // 2 / (2 pi i)^2
  auto run = [&](int cn, int ln) {
    NodeSet U = circle_nodes(n, X, r, cn);
    NodeSet V = line_nodes(np, Xp, c, Y, ln);
    return couple(U, V, decay);
  };

  Sums s = run(mc, ml);
  double diff = std::abs(s.full - s.half);
  bool doubled = false;
  auto consistent = [&](const Sums& ss, double d) {
    return d <= opts.self_tol * std::abs(ss.full) + 1e3 * kEps * ss.magnitude;
  };
  if (!consistent(s, diff)) {
    Sums s2 = run(2 * mc, 2 * ml);
    diff = std::abs(s2.full - s.full);
    s = s2;
    mc *= 2;
    ml *= 2;
    doubled = true;
  }

  DoubleContourResult res;
  res.value = pref * s.full;
  res.magnitude = std::abs(pref) * s.magnitude;
  res.error_estimate = std::abs(pref) * diff + 64.0 * kEps * res.magnitude;
  res.abscissa = c;
  res.radius = r;
  res.half_height = Y;
  res.circle_nodes = mc;
  res.line_nodes = ml;
  res.doubled = doubled;
  return res;
}

}  // namespace dbmk::contour
