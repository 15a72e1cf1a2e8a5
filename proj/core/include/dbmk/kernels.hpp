#pragma once

#include <complex>
#include <string>
#include <vector>

#include "dbmk/contour.hpp"
#include "dbmk/special_functions.hpp"

namespace dbmk::kernels {

struct SpaceTimePoint {
  int n = 1;
  double t = 0.0;
  double x = 0.0;
};

enum class Order { Less, GeqOrEqual };

// Less iff n > n', or n = n' and t < t'.
Order spacelike_compare(const SpaceTimePoint& p, const SpaceTimePoint& pp);

enum class Representation { Auto, Series, Contour };
enum class ContourMethod { Auto, Quadrature, Residue };

struct KernelEvalConfig {
  Representation representation = Representation::Auto;
  int l_max = 500;
  double term_tol = 1e-14;
  // Series mode: switch to the contour form when the tail does not close.
  bool fallback_to_contour = true;
  ContourMethod contour_method = ContourMethod::Auto;
  // Auto contour method: quadrature up to this level, residues above.
  int quadrature_level_limit = 16;
  contour::DoubleContourOptions contour{};
};

struct KernelValue {
  double value = 0.0;
  Representation used = Representation::Series;
  ContourMethod method = ContourMethod::Auto;
  int terms = 0;
  double error_estimate = 0.0;
  // Imaginary part of the double-contour value (quadrature only).
  double imag = 0.0;
};

std::string to_string(Representation r);
std::string to_string(ContourMethod m);

KernelValue eval_dbm(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                     const KernelEvalConfig& cfg = {});
KernelValue eval_warren(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                        const KernelEvalConfig& cfg = {});
KernelValue eval_adbm(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                      const KernelEvalConfig& cfg = {});

double kernel_dbm(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                  const KernelEvalConfig& cfg = {});
double kernel_warren(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                     const KernelEvalConfig& cfg = {});
double kernel_adbm(const SpaceTimePoint& p, const SpaceTimePoint& pp,
                   const KernelEvalConfig& cfg = {});

struct BeadParam {
  double a = 0.0;

  explicit BeadParam(double a_);
  std::complex<double> u_plus() const;
  std::complex<double> u_minus() const;
};

// Segment integral (1/2 pi i) int_{u-}^{u+} u^{n'-n} e^{(t'-t)(u^2 - 2au)/2 + u(x-x')} du.
// For n > n' the integrand has a pole at 0, which must lie to the left of
// the path: for a < 0.5 the segment is replaced by the rectangular detour
// u- -> a - i -> 1 - i -> 1 + i -> a + i -> u+.
double bead_segment(const BeadParam& a, const SpaceTimePoint& p, const SpaceTimePoint& pp,
                    int nodes = 64);
double kernel_bead(const BeadParam& a, const SpaceTimePoint& p, const SpaceTimePoint& pp,
                   int nodes = 64);

enum class PhiKind { DBM, Warren, Bead };

// One-sided term; 0 unless spacelike_compare(p, pp) is Less.
double phi_term(PhiKind kind, const SpaceTimePoint& p, const SpaceTimePoint& pp, double a = 0.0);

struct StepExpansionResult {
  double value = 0.0;
  double tail_estimate = 0.0;
  int terms = 0;
};

// int H^n(x - y) p_{t-s}(y, z) dy through the finite k < n part plus the
// k >= n Hermite series truncated at K terms.
StepExpansionResult step_expansion(sf::ScaleKind kind, int n, double s, double t, double x,
                                   double z, int K = 500, double tol = 1e-14);

struct PointPair {
  SpaceTimePoint p;
  SpaceTimePoint pp;
};

// Fixed admissible grid for representation cross-checks: 15 Less pairs
// (n >= n', t < t') and 15 GeqOrEqual pairs (n <= n', t >= t'), levels in
// 1..6, times drawn from `times` (at least two distinct values), positions
// from {-1, 0, 0.7} with x = x' = 0 excluded.
std::vector<PointPair> representation_grid(std::vector<double> times = {0.1, 0.5, 1.0, 2.0});

// Building blocks shared with the Warren kernel and the bead sweep: the DBM
// kernel depends on the times only through dt = t' - t.
namespace detail {
KernelValue dbm_series(int n, double x, int np, double xp, double dt, bool less,
                       const KernelEvalConfig& cfg);
double dbm_residue(int n, double x, int np, double xp, double dt, bool less);
KernelValue dbm_contour_quadrature(int n, double x, int np, double xp, double dt, bool less,
                                   const contour::DoubleContourOptions& opts);
double dbm_phi(int n, double x, int np, double xp, double dt);
}  // namespace detail

}  // namespace dbmk::kernels
