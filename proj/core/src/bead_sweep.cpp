#include "dbmk/bead_sweep.hpp"

#include <cmath>
#include <numbers>

#include "dbmk/errors.hpp"

namespace dbmk::bead {

double scaled_dbm(double a, int size, const kernels::SpaceTimePoint& p,
                  const kernels::SpaceTimePoint& pp) {
  kernels::BeadParam bp(a);
  if (size < 1) throw DomainError("N must be >= 1", "N");
  const int n = size + p.n, np = size + pp.n;
  if (n < 1 || np < 1) throw DomainError("N + relative level must be >= 1", "levels");
  const bool less = kernels::spacelike_compare(p, pp) == kernels::Order::Less;
  const double dt = pp.t - p.t;
  if (less && dt < 0.0) throw DomainError("bead-Less pair needs t <= t'", "t");
  const double two_n = 2.0 * size;
  const double sq = std::sqrt(two_n);
  const double x = sq * bp.a + p.x / sq;
  const double xp = sq * bp.a + pp.x / sq;
  // The kernel depends on the times only through their difference.
  const double k = kernels::detail::dbm_residue(n, x, np, xp, dt / two_n, less);
  const double pref = std::exp(-0.5 * dt + 0.5 * (p.n - pp.n) * std::log(static_cast<double>(size)) -
                               0.5 * std::log(two_n));
  return pref * k;
}

double window_half_width(double a) { return std::numbers::pi / std::sqrt(1.0 - a * a); }

std::vector<SweepRow> bead_limit_sweep(const SweepConfig& cfg) {
  kernels::BeadParam bp(cfg.a);
  if (cfg.sizes.empty()) throw DomainError("at least one N is required", "N");
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (cfg.sizes[i] < 1) throw DomainError("N values must be positive", "N");
    if (i > 0 && cfg.sizes[i] <= cfg.sizes[i - 1]) throw DomainError("N values must increase", "N");
  }
  if (cfg.centers < 1) throw DomainError("centers must be >= 1", "centers");
  kernels::SpaceTimePoint p{cfg.n, cfg.t, cfg.x}, pp{cfg.np, cfg.tp, cfg.xp};
  if (kernels::spacelike_compare(p, pp) == kernels::Order::Less && cfg.tp < cfg.t) {
    throw DomainError("bead-Less pair needs t <= t'", "t");
  }
  const double L = window_half_width(cfg.a);
  std::vector<double> shifts;
  if (cfg.centers == 1) {
    shifts.push_back(0.0);
  } else {
    for (int i = 0; i < cfg.centers; ++i) shifts.push_back(-L + 2.0 * L * i / (cfg.centers - 1));
  }
  std::vector<double> limits;
  for (double c : shifts) {
    kernels::SpaceTimePoint q{p.n, p.t, p.x + c}, qp{pp.n, pp.t, pp.x + c};
    limits.push_back(kernels::kernel_bead(bp, q, qp));
  }
  std::vector<SweepRow> rows;
  for (int size : cfg.sizes) {
    SweepRow r;
    r.size = size;
    r.scaled = scaled_dbm(cfg.a, size, p, pp);
    r.limit = kernels::kernel_bead(bp, p, pp);
    r.pointwise_error = std::abs(r.scaled - r.limit);
    for (std::size_t i = 0; i < shifts.size(); ++i) {
      kernels::SpaceTimePoint q{p.n, p.t, p.x + shifts[i]}, qp{pp.n, pp.t, pp.x + shifts[i]};
      r.error = std::max(r.error, std::abs(scaled_dbm(cfg.a, size, q, qp) - limits[i]));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dbmk::bead
