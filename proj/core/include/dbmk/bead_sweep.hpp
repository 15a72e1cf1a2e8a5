#pragma once

#include <complex>
#include <vector>

#include "dbmk/kernels.hpp"

namespace dbmk::bead {

struct SweepConfig {
  double a = 0.0;
  int n = 0;       // relative levels
  int np = 0;
  double t = 0.0;
  double tp = 0.0;
  double x = 0.0;
  double xp = 0.0;
  std::vector<int> sizes{50, 100, 200, 400};
  // Window of centers c in [-L, L], L = pi / sqrt(1 - a^2), over which the
  // error is measured (both positions shifted by c).
  int centers = 49;
};

struct SweepRow {
  int size = 0;
  double scaled = 0.0;        // scaled DBM kernel at the requested positions
  double limit = 0.0;         // bead kernel at the requested positions
  double error = 0.0;         // sup over the window of |scaled - limit|
  double pointwise_error = 0.0;
};

// e^{-(t'-t)/2} N^{(n-n')/2} (2N)^{-1/2}
//   K^DBM((N+n, t/(2N), sqrt(2N) a + x/sqrt(2N)), (N+n', t'/(2N), sqrt(2N) a + x'/sqrt(2N))).
double scaled_dbm(double a, int size, const kernels::SpaceTimePoint& p,
                  const kernels::SpaceTimePoint& pp);

double window_half_width(double a);

std::vector<SweepRow> bead_limit_sweep(const SweepConfig& cfg);

}  // namespace dbmk::bead
