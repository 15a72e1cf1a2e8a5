#include "dbmk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dbmk/errors.hpp"
#include "dbmk/quadrature_rules.hpp"

namespace dbmk::kernels {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
// Cramer: |psi_k(x)| <= 1.0865 pi^{-1/4}; squared bound on psi_k psi_j.
constexpr double kCramerSq = 1.0865 * 1.0865 / 1.7724538509055159;

using sf::HermiteFunctions;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(std::string(name) + " must be finite", name);
}

void validate_level(const SpaceTimePoint& p, const char* name) {
  if (p.n < 1) throw DomainError(std::string(name) + " level must be >= 1", name);
  require_finite(p.t, "t");
  require_finite(p.x, "x");
}

// Signed term sign * exp(log_mag).
double signed_exp(int sign, double log_mag) {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_mag);
}

// log|H_k(x)/k!| and sign, through psi_k.
void hermite_over_factorial(const HermiteFunctions& psi, int k, double x, int& sign,
                            double& log_mag) {
  sign = psi.sign(k);
  log_mag = psi.log_abs(k) + 0.5 * x * x +
            0.5 * (0.5 * std::log(kPi) + k * kLn2 - std::lgamma(k + 1.0));
}

}  // namespace

Order spacelike_compare(const SpaceTimePoint& p, const SpaceTimePoint& pp) {
  if (p.n > pp.n) return Order::Less;
  if (p.n == pp.n && p.t < pp.t) return Order::Less;
  return Order::GeqOrEqual;
}

std::string to_string(Representation r) {
  switch (r) {
    case Representation::Auto: return "auto";
    case Representation::Series: return "series";
    case Representation::Contour: return "contour";
  }
  return "?";
}

std::string to_string(ContourMethod m) {
  switch (m) {
    case ContourMethod::Auto: return "auto";
    case ContourMethod::Quadrature: return "quadrature";
    case ContourMethod::Residue: return "residue";
  }
  return "?";
}

namespace detail {

KernelValue dbm_series(int n, double x, int np, double xp, double dt, bool less,
                       const KernelEvalConfig& cfg) {
  if (cfg.l_max < 1) throw ConfigError("l_max must be >= 1", "l_max");
  if (!(cfg.term_tol > 0.0)) throw ConfigError("term_tol must be positive", "term_tol");
  const double gauge = 0.5 * (x * x - xp * xp);
  KernelValue out;
  out.used = Representation::Series;

  if (!less) {
    const int lo = std::min(n, np);
    HermiteFunctions px(n, x), pxp(np, xp);
    double sum = 0.0;
    for (int l = -lo; l <= -1; ++l) {
      int a = n + l, b = np + l;
      double lm = sf::log_sqrt_factorial_ratio(b, a) - l * dt + px.log_abs(a) + pxp.log_abs(b) + gauge;
      sum += signed_exp(px.sign(a) * pxp.sign(b), lm);
    }
    out.value = sum;
    out.terms = lo;
    return out;
  }

  const int L = cfg.l_max;
  HermiteFunctions px(n + L, x), pxp(np + L, xp);
  double sum = 0.0;
  double run_max = 0.0;
  double small_run = 0;
  double tail = std::numeric_limits<double>::infinity();
  const double q = std::exp(-dt);
  for (int l = 0; l < L; ++l) {
    int a = n + l, b = np + l;
    double lr = sf::log_sqrt_factorial_ratio(b, a);
    double lm = lr - l * dt + px.log_abs(a) + pxp.log_abs(b) + gauge;
    double term = signed_exp(px.sign(a) * pxp.sign(b), lm);
    sum += term;
    run_max = std::max(run_max, std::abs(term));
    small_run = std::abs(term) < cfg.term_tol * run_max ? small_run + 1 : 0;
    // Geometric bound on the terms l+1, l+2, ... (factorial ratio nonincreasing).
    if (q < 1.0) {
      double lr_next = sf::log_sqrt_factorial_ratio(b + 1, a + 1);
      tail = kCramerSq * std::exp(gauge + lr_next - (l + 1) * dt) / (1.0 - q);
    }
    out.terms = l + 1;
    double scale = std::max(std::abs(sum), run_max);
    if (small_run >= 3 && tail < cfg.term_tol * scale) {
      out.value = -sum;
      out.error_estimate = tail;
      return out;
    }
    if (q >= 1.0 && l >= 8) break;  // no geometric decay: hand over to the contour form
  }
  throw ConvergenceError("kernel series did not reach the tail tolerance", -sum, tail);
}

double dbm_phi(int n, double x, int np, double xp, double dt) {
  const int k = n - np;
  if (k < 0) throw DomainError("phi term needs n >= n'", "n");
  if (dt < 0.0) throw DomainError("phi term needs t <= t'", "t");
  if (dt == 0.0) {
    if (k == 0) throw DomainError("phi term at equal points is not defined", "t");
    return std::exp(0.5 * k * kLn2) * sf::heaviside_power(k, x - xp);
  }
  if (k == 0) return std::exp(np * dt) * sf::transition_density(sf::Process::OU, dt, x, xp);
  // p*_dt(y, x') in y is (1/q) N(x'/q, s^2), s^2 = (1 - q^2) / (2 q^2).
  const double q = std::exp(-dt);
  const double s = std::sqrt(-std::expm1(-2.0 * dt) / 2.0) / q;
  return std::exp(0.5 * k * kLn2 + (np + 1) * dt) * sf::heaviside_gaussian(k, x, xp / q, s);
}

double dbm_residue(int n, double x, int np, double xp, double dt, bool less) {
  // Geometric expansion of 1/(q v - u) leaves m = 0..n-1; the v-integrals
  // are Hermite functions (j >= 0) or Gaussian incomplete moments (j < 0).
  HermiteFunctions px(n, x), pxp(std::max(np, 0), xp);
  const double gauge = 0.5 * (x * x - xp * xp);
  double sum = 0.0;
  for (int m = 0; m < n; ++m) {
    int k = n - m - 1;
    int j = np - m - 1;
    if (j >= 0) {
      double lm = sf::log_sqrt_factorial_ratio(j, k) + px.log_abs(k) + pxp.log_abs(j) + gauge +
                  (m + 1) * dt;
      sum += signed_exp(px.sign(k) * pxp.sign(j), lm);
    } else {
      int kappa = -j;
      double J = sf::gauss_incomplete_moment(kappa - 1, xp, 1.0);
      if (J == 0.0) continue;
      int sh;
      double lh;
      hermite_over_factorial(px, k, x, sh, lh);
      // 2^{(n'-n)/2} prefactor applied termwise to keep magnitudes in range.
      double lm = lh + (m + 1) * dt + kappa * kLn2 - 0.5 * std::log(kPi) + std::log(J) -
                  std::lgamma(static_cast<double>(kappa)) + 0.5 * (np - n) * kLn2;
      sum += signed_exp(sh, lm);
    }
  }
  double phi = less ? dbm_phi(n, x, np, xp, dt) : 0.0;
  return sum - phi;
}

KernelValue dbm_contour_quadrature(int n, double x, int np, double xp, double dt, bool less,
                                   const contour::DoubleContourOptions& opts) {
  contour::DoubleContourResult dc = contour::double_contour(n, np, x, xp, std::exp(-dt), {1.0, 1.0}, opts);
  const double pref = std::exp(0.5 * (np - n) * kLn2);
  double phi = less ? dbm_phi(n, x, np, xp, dt) : 0.0;
  KernelValue out;
  out.value = -phi + pref * dc.value.real();
  out.imag = pref * dc.value.imag();
  out.error_estimate = pref * dc.error_estimate;
  out.used = Representation::Contour;
  out.method = ContourMethod::Quadrature;
  out.terms = dc.circle_nodes * (dc.line_nodes + 1);
  return out;
}

}  // namespace detail

namespace {

ContourMethod resolve_method(const KernelEvalConfig& cfg, int n, int np) {
  if (cfg.contour_method != ContourMethod::Auto) return cfg.contour_method;
  return std::max(n, np) <= cfg.quadrature_level_limit ? ContourMethod::Quadrature
                                                       : ContourMethod::Residue;
}

// Common driver: `series` and `contour` evaluate the two representations.
template <class SeriesFn, class ContourFn>
KernelValue drive(bool less, const KernelEvalConfig& cfg, SeriesFn series, ContourFn contour_eval) {
  if (cfg.representation == Representation::Contour) return contour_eval();
  if (!less) return series();
  try {
    return series();
  } catch (const ConvergenceError&) {
    if (!cfg.fallback_to_contour) throw;
  }
  return contour_eval();
}

}  // namespace

KernelValue eval_dbm(const SpaceTimePoint& p, const SpaceTimePoint& pp, const KernelEvalConfig& cfg) {
  validate_level(p, "point");
  validate_level(pp, "point2");
  if (p.t < 0.0 || pp.t < 0.0) throw DomainError("DBM times must be >= 0", "t");
  const bool less = spacelike_compare(p, pp) == Order::Less;
  const double dt = pp.t - p.t;
  if (less && dt < 0.0) {
    throw DomainError("Less-ordered pair with t > t' is not on a space-like path", "t");
  }
  auto series = [&] { return detail::dbm_series(p.n, p.x, pp.n, pp.x, dt, less, cfg); };
  auto contour_eval = [&] {
    ContourMethod m = resolve_method(cfg, p.n, pp.n);
    if (m == ContourMethod::Quadrature) {
      return detail::dbm_contour_quadrature(p.n, p.x, pp.n, pp.x, dt, less, cfg.contour);
    }
    KernelValue v;
    v.value = detail::dbm_residue(p.n, p.x, pp.n, pp.x, dt, less);
    v.used = Representation::Contour;
    v.method = ContourMethod::Residue;
    v.terms = p.n;
    return v;
  };
  return drive(less, cfg, series, contour_eval);
}

double kernel_dbm(const SpaceTimePoint& p, const SpaceTimePoint& pp, const KernelEvalConfig& cfg) {
  return eval_dbm(p, pp, cfg).value;
}

namespace {

double warren_phi(int n, double x, double t, int np, double xp, double tp) {
  const int k = n - np;
  const double dt = tp - t;
  if (k < 0) throw DomainError("phi term needs n >= n'", "n");
  if (dt < 0.0) throw DomainError("phi term needs t <= t'", "t");
  // 2^{n-n'} sqrt(t'^{n'+1} / t^{n+1}) int H^k(x - y) p_{t'-t}(y, x') dy
  const double lpref = k * kLn2 + 0.5 * ((np + 1) * std::log(tp) - (n + 1) * std::log(t));
  if (dt == 0.0) {
    if (k == 0) throw DomainError("phi term at equal points is not defined", "t");
    return std::exp(lpref) * sf::heaviside_power(k, x - xp);
  }
  if (k == 0) return std::exp(lpref) * sf::transition_density(sf::Process::BM, dt, x, xp);
  return std::exp(lpref) * sf::heaviside_gaussian(k, x, xp, std::sqrt(dt / 2.0));
}

}  // namespace

KernelValue eval_warren(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                        const KernelEvalConfig& cfg) {
  validate_level(p, "point");
  validate_level(pp, "point2");
  if (!(p.t > 0.0)) throw DomainError("Warren times must be > 0", "t");
  if (!(pp.t > 0.0)) throw DomainError("Warren times must be > 0", "t'");
  const bool less = spacelike_compare(p, pp) == Order::Less;
  if (less && pp.t < p.t) {
    throw DomainError("Less-ordered pair with t > t' is not on a space-like path", "t");
  }
  const double st = std::sqrt(p.t), stp = std::sqrt(pp.t);
  const double ds = 0.5 * std::log(pp.t / p.t);
  auto series = [&] {
    KernelValue v = detail::dbm_series(p.n, p.x / st, pp.n, pp.x / stp, ds, less, cfg);
    v.value /= st;
    v.error_estimate /= st;
    return v;
  };
  auto contour_eval = [&] {
    ContourMethod m = resolve_method(cfg, p.n, pp.n);
    KernelValue v;
    v.used = Representation::Contour;
    v.method = m;
    if (m == ContourMethod::Quadrature) {
      contour::DoubleContourResult dc = contour::double_contour(
          p.n, pp.n, p.x, pp.x, st / stp, {1.0 / st, 1.0 / stp}, cfg.contour);
      double phi = less ? warren_phi(p.n, p.x, p.t, pp.n, pp.x, pp.t) : 0.0;
      const double g = std::exp(-0.5 * (p.n - pp.n) * kLn2);
      v.value = g * (-phi + dc.value.real() / st);
      v.imag = g * dc.value.imag() / st;
      v.error_estimate = g * dc.error_estimate / st;
      v.terms = dc.circle_nodes * (dc.line_nodes + 1);
      return v;
    }
    v.value = detail::dbm_residue(p.n, p.x / st, pp.n, pp.x / stp, ds, less) / st;
    v.terms = p.n;
    return v;
  };
  return drive(less, cfg, series, contour_eval);
}

double kernel_warren(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                     const KernelEvalConfig& cfg) {
  return eval_warren(p, pp, cfg).value;
}

KernelValue eval_adbm(const SpaceTimePoint& p, const SpaceTimePoint& pp, const KernelEvalConfig& cfg) {
  validate_level(p, "point");
  validate_level(pp, "point2");
  if (p.t < 0.0 || pp.t < 0.0) throw DomainError("A-DBM times must be >= 0", "t");
  if (cfg.representation == Representation::Contour) {
    throw ConfigError("the anti-symmetric kernel has no contour representation", "representation");
  }
  const bool less = spacelike_compare(p, pp) == Order::Less;
  const double dt = pp.t - p.t;
  if (less && dt < 0.0) {
    throw DomainError("Less-ordered pair with t > t' is not on a space-like path", "t");
  }
  const int n = p.n, np = pp.n;
  const double gauge = 0.5 * (p.x * p.x - pp.x * pp.x);
  KernelValue out;
  out.used = Representation::Series;
  if (!less) {
    HermiteFunctions px(n, p.x), pxp(np, pp.x);
    double sum = 0.0;
    int terms = 0;
    for (int l = -1; n + 2 * l >= 0 && np + 2 * l >= 0; --l) {
      int a = n + 2 * l, b = np + 2 * l;
      double lm = sf::log_sqrt_factorial_ratio(b, a) - 2.0 * l * dt + px.log_abs(a) +
                  pxp.log_abs(b) + gauge;
      sum += signed_exp(px.sign(a) * pxp.sign(b), lm);
      ++terms;
    }
    out.value = sum;
    out.terms = terms;
    return out;
  }
  const int L = cfg.l_max;
  HermiteFunctions px(n + 2 * L, p.x), pxp(np + 2 * L, pp.x);
  const double q2 = std::exp(-2.0 * dt);
  double sum = 0.0, run_max = 0.0, tail = std::numeric_limits<double>::infinity();
  int small_run = 0;
  for (int l = 0; l < L; ++l) {
    int a = n + 2 * l, b = np + 2 * l;
    double lm = sf::log_sqrt_factorial_ratio(b, a) - 2.0 * l * dt + px.log_abs(a) +
                pxp.log_abs(b) + gauge;
    double term = signed_exp(px.sign(a) * pxp.sign(b), lm);
    sum += term;
    run_max = std::max(run_max, std::abs(term));
    small_run = std::abs(term) < cfg.term_tol * run_max ? small_run + 1 : 0;
    if (q2 < 1.0) {
      double lr_next = sf::log_sqrt_factorial_ratio(b + 2, a + 2);
      tail = kCramerSq * std::exp(gauge + lr_next - 2.0 * (l + 1) * dt) / (1.0 - q2);
    }
    out.terms = l + 1;
    if (small_run >= 3 && tail < cfg.term_tol * std::max(std::abs(sum), run_max)) {
      out.value = -sum;
      out.error_estimate = tail;
      return out;
    }
    if (q2 >= 1.0 && l >= 8) break;
  }
  throw ConvergenceError("anti-symmetric kernel series did not converge", -sum, tail);
}

double kernel_adbm(const SpaceTimePoint& p, const SpaceTimePoint& pp, const KernelEvalConfig& cfg) {
  return eval_adbm(p, pp, cfg).value;
}

BeadParam::BeadParam(double a_) : a(a_) {
  if (!(a_ > -1.0 && a_ < 1.0)) throw DomainError("bead parameter must lie in (-1, 1)", "a");
}

std::complex<double> BeadParam::u_plus() const { return {a, std::sqrt(1.0 - a * a)}; }
std::complex<double> BeadParam::u_minus() const { return {a, -std::sqrt(1.0 - a * a)}; }

double bead_segment(const BeadParam& bp, const SpaceTimePoint& p, const SpaceTimePoint& pp,
                    int nodes) {
  using cplx = std::complex<double>;
  const int pw = pp.n - p.n;
  const double dt = pp.t - p.t;
  const double d = p.x - pp.x;
  const double a = bp.a;
  auto f = [=](cplx u) {
    cplx e = 0.5 * dt * (u * u - 2.0 * a * u) + u * d;
    if (pw != 0) e += static_cast<double>(pw) * std::log(u);
    return std::exp(e);
  };
  cplx integral{0.0, 0.0};
  if (pw < 0 && a < 0.5) {
    // The pole at 0 must stay to the left of the path; the straight segment
    // runs through it (a = 0), left of it (a < 0) or too close to it.
    const cplx corners[] = {bp.u_minus(), {a, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {a, 1.0}, bp.u_plus()};
    for (int i = 0; i < 5; ++i) {
      if (std::abs(corners[i + 1] - corners[i]) < 1e-15) continue;
      integral += contour::integrate_segment(f, {corners[i], corners[i + 1]}, nodes);
    }
  } else {
    integral = contour::integrate_segment(f, {bp.u_minus(), bp.u_plus()}, nodes);
  }
  return (integral / cplx{0.0, 2.0 * kPi}).real();
}

double kernel_bead(const BeadParam& a, const SpaceTimePoint& p, const SpaceTimePoint& pp, int nodes) {
  require_finite(p.t, "t");
  require_finite(pp.t, "t'");
  require_finite(p.x, "x");
  require_finite(pp.x, "x'");
  double phi = phi_term(PhiKind::Bead, p, pp, a.a);
  return -phi + bead_segment(a, p, pp, nodes);
}

double phi_term(PhiKind kind, const SpaceTimePoint& p, const SpaceTimePoint& pp, double a) {
  if (spacelike_compare(p, pp) != Order::Less) return 0.0;
  const double dt = pp.t - p.t;
  switch (kind) {
    case PhiKind::DBM:
      return detail::dbm_phi(p.n, p.x, pp.n, pp.x, dt);
    case PhiKind::Warren:
      if (!(p.t > 0.0)) throw DomainError("Warren times must be > 0", "t");
      return warren_phi(p.n, p.x, p.t, pp.n, pp.x, pp.t);
    case PhiKind::Bead: {
      BeadParam bp(a);
      const int k = p.n - pp.n;
      if (dt < 0.0) throw DomainError("bead phi term needs t <= t'", "t");
      if (dt == 0.0) return sf::heaviside_power(k, p.x - pp.x);
      const double mean = pp.x + bp.a * dt;
      const double sd = std::sqrt(dt);
      if (k == 0) {
        double z = (p.x - mean) / sd;
        return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
      }
      return sf::heaviside_gaussian(k, p.x, mean, sd);
    }
  }
  return 0.0;
}

std::vector<PointPair> representation_grid(std::vector<double> times) {
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.size() < 2) throw DomainError("representation grid needs two distinct times", "times");
  const int T = static_cast<int>(times.size());
  const double pos[8][2] = {{-1.0, 0.7}, {0.7, -1.0}, {0.0, 0.7}, {0.7, 0.0},
                            {-1.0, 0.0}, {0.0, -1.0}, {0.7, 0.7}, {-1.0, -1.0}};
  std::vector<PointPair> grid;
  for (int i = 0; i < 15; ++i) {
    int n = 1 + i % 6;
    int np = 1 + (7 * i + 3) % n;
    int ti = i % (T - 1);
    int tj = ti + 1 + (i / (T - 1)) % (T - 1 - ti);
    grid.push_back({{n, times[ti], pos[i % 8][0]}, {np, times[tj], pos[i % 8][1]}});
  }
  for (int i = 0; i < 15; ++i) {
    int n = 1 + (i + 2) % 6;
    int np = n + (5 * i + 1) % (7 - n);
    int ti = (i + 1) % T;
    int tj = (ti * (i + 3)) % (ti + 1);
    grid.push_back({{n, times[ti], pos[(i + 3) % 8][0]}, {np, times[tj], pos[(i + 3) % 8][1]}});
  }
  return grid;
}

StepExpansionResult step_expansion(sf::ScaleKind kind, int n, double s, double t, double x, double z,
                                   int K, double tol) {
  if (n < 1) throw DomainError("step expansion needs n >= 1", "n");
  const bool star = kind == sf::ScaleKind::Star;
  if (star ? !(t > s && s >= 0.0) : !(t > s && s > 0.0)) {
    throw DomainError("step expansion needs t > s (s > 0 for Warren)", "t");
  }
  sf::ScaleAlgebra alg{kind};
  const double q = alg.q(t - s, s);
  const double r = alg.r(t - s);
  const double sig_s = alg.sigma(s), sig_t = alg.sigma(t);
  const double tw = star ? 1.0 : t;   // w^{(t)} = e^{-y^2/tw}
  const double xs = star ? x : x / std::sqrt(s);
  const double zs = star ? z : z / std::sqrt(t);
  // The Warren time-step identity carries one more power of q than the
  // starred one, and so does the whole expansion.
  const double family_factor = star ? 1.0 : q;

  HermiteFunctions hx(n + K, xs), hz(K + 1, zs);
  double finite = 0.0;
  for (int k = 0; k < n; ++k) {
    int m = n - k;  // H^m, m >= 1
    double integral = sf::gauss_incomplete_moment(m - 1, z, tw) / std::tgamma(static_cast<double>(m));
    double hk = hx.value(k) * std::exp(0.5 * xs * xs);
    finite += hk * std::pow(sig_t, k) * std::pow(q, k) /
              (std::pow(r, n) * sig_s * std::sqrt(2.0 * std::tgamma(k + 1.0)) * std::pow(kPi, 0.25)) *
              integral;
  }

  const double lpre = n * std::log(sig_t) - std::log(std::sqrt(2.0) * sig_s) - n * std::log(r);
  const double lgauge = 0.5 * xs * xs - 0.5 * zs * zs;
  double inf_sum = 0.0, run_max = 0.0;
  double tail = std::numeric_limits<double>::infinity();
  StepExpansionResult res;
  int k = n;
  for (; k < n + K; ++k) {
    double lm = lpre + sf::log_sqrt_factorial_ratio(k - n, k) + k * std::log(q) + hx.log_abs(k) +
                hz.log_abs(k - n) + lgauge;
    double term = signed_exp(hx.sign(k) * hz.sign(k - n), lm);
    inf_sum += term;
    run_max = std::max(run_max, std::abs(term));
    if (q < 1.0) {
      tail = kCramerSq * std::exp(lpre + lgauge + (k + 1) * std::log(q)) / (1.0 - q);
    }
    if (tail < tol * std::max({std::abs(inf_sum), std::abs(finite), run_max})) {
      ++k;
      break;
    }
  }
  res.terms = k - n;
  res.tail_estimate = family_factor * tail;
  res.value = family_factor * (finite + inf_sum);
  if (!(tail < 1e3 * tol * std::max({std::abs(inf_sum), std::abs(finite), run_max, 1e-300}))) {
    throw ConvergenceError("step expansion did not converge within K terms", res.value,
                           res.tail_estimate);
  }
  return res;
}

}  // namespace dbmk::kernels
