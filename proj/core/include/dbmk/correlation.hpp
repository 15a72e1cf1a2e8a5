#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dbmk/kernels.hpp"

namespace dbmk::corr {

using kernels::SpaceTimePoint;

struct PathNode {
  int level = 1;
  double time = 0.0;
};

struct SpacelikeReport {
  bool ok = true;
  int index = -1;  // first offending index
  std::string reason;
};

// Times nondecreasing and levels nonincreasing along the sequence.
SpacelikeReport validate_spacelike(const std::vector<PathNode>& nodes);

// Same check on the (level, time) projection of an unordered point set:
// the points are sorted by time (ties: higher level first) before checking.
SpacelikeReport validate_point_set(const std::vector<SpaceTimePoint>& points);

using KernelFn = std::function<double(const SpaceTimePoint&, const SpaceTimePoint&)>;

enum class Family { DBM, Warren, Bead, ADBM };

Family parse_family(const std::string& name);
std::string to_string(Family f);

// Kernel closure for one family; `a` is the bead parameter.
KernelFn make_kernel(Family f, const kernels::KernelEvalConfig& cfg = {}, double a = 0.0);

struct CorrelationQuery {
  KernelFn kernel;
  std::vector<SpaceTimePoint> points;
};

struct DensityResult {
  double value = 0.0;
  double raw = 0.0;
  bool clamped = false;
};

// det[K(p_i, p_j)]; values in [-1e-9, 0) are reported as 0 and counted.
DensityResult correlation_density(const CorrelationQuery& q);

// Determinant with long double partial-pivot LU for k <= 8, Eigen above.
double small_determinant(const std::vector<std::vector<double>>& m);

long clamp_warning_count();
void reset_clamp_warning_count();

struct GaugeReport {
  bool pass = true;
  double max_deviation = 0.0;
  int comparisons = 0;
};

// Compares every k x k determinant over subsets of `points` (k <= max_k)
// and the products K(p,p')K(p',p).
GaugeReport gauge_compare(const KernelFn& k1, const KernelFn& k2,
                          const std::vector<SpaceTimePoint>& points, double tol, int max_k = 3);

enum class GapFamily { DBM, Warren };

// det(I - K) on (a, b) at fixed (n, t) by Nystrom with Gauss-Legendre nodes;
// one endpoint may be infinite.
double gap_probability(int n, double t, double a, double b, int nodes,
                       GapFamily family = GapFamily::DBM);

}  // namespace dbmk::corr
