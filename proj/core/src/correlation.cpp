#include "dbmk/correlation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "dbmk/errors.hpp"
#include "dbmk/quadrature_rules.hpp"

namespace dbmk::corr {

namespace {

std::atomic<long> g_clamped{0};

constexpr double kClampFloor = -1e-9;

}  // namespace

SpacelikeReport validate_spacelike(const std::vector<PathNode>& nodes) {
  SpacelikeReport r;
  if (nodes.empty()) {
    r.ok = false;
    r.index = 0;
    r.reason = "empty path";
    return r;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].level < 1) {
      r = {false, static_cast<int>(i), "level must be >= 1"};
      return r;
    }
    if (i == 0) continue;
    if (nodes[i].time < nodes[i - 1].time) {
      r = {false, static_cast<int>(i), "time decreased"};
      return r;
    }
    if (nodes[i].level > nodes[i - 1].level) {
      r = {false, static_cast<int>(i), "level increased"};
      return r;
    }
  }
  return r;
}

SpacelikeReport validate_point_set(const std::vector<SpaceTimePoint>& points) {
  std::vector<int> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
    if (points[i].t != points[j].t) return points[i].t < points[j].t;
    return points[i].n > points[j].n;
  });
  std::vector<PathNode> nodes;
  for (int i : idx) nodes.push_back({points[i].n, points[i].t});
  SpacelikeReport r = validate_spacelike(nodes);
  if (!r.ok) r.index = idx[r.index];
  return r;
}

Family parse_family(const std::string& name) {
  if (name == "dbm") return Family::DBM;
  if (name == "warren") return Family::Warren;
  if (name == "bead") return Family::Bead;
  if (name == "adbm") return Family::ADBM;
  throw DomainError("unknown kernel family '" + name + "'", "family");
}

std::string to_string(Family f) {
  switch (f) {
    case Family::DBM: return "dbm";
    case Family::Warren: return "warren";
    case Family::Bead: return "bead";
    case Family::ADBM: return "adbm";
  }
  return "?";
}

KernelFn make_kernel(Family f, const kernels::KernelEvalConfig& cfg, double a) {
  switch (f) {
    case Family::DBM:
      return [cfg](const SpaceTimePoint& p, const SpaceTimePoint& q) {
        return kernels::kernel_dbm(p, q, cfg);
      };
    case Family::Warren:
      return [cfg](const SpaceTimePoint& p, const SpaceTimePoint& q) {
        return kernels::kernel_warren(p, q, cfg);
      };
    case Family::ADBM:
      return [cfg](const SpaceTimePoint& p, const SpaceTimePoint& q) {
        return kernels::kernel_adbm(p, q, cfg);
      };
    case Family::Bead: {
      kernels::BeadParam bp(a);
      return [bp](const SpaceTimePoint& p, const SpaceTimePoint& q) {
        return kernels::kernel_bead(bp, p, q);
      };
    }
  }
  throw DomainError("unknown kernel family", "family");
}

double small_determinant(const std::vector<std::vector<double>>& m) {
  const std::size_t k = m.size();
  if (k == 0) return 1.0;
  if (k > 8) {
    Eigen::MatrixXd a(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) a(i, j) = m[i][j];
    return a.partialPivLu().determinant();
  }
  long double a[8][8];
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a[i][j] = m[i][j];
  long double det = 1.0L;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0L) return 0.0;
    if (piv != c) {
      for (std::size_t j = 0; j < k; ++j) std::swap(a[c][j], a[piv][j]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < k; ++r) {
      long double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return static_cast<double>(det);
}

DensityResult correlation_density(const CorrelationQuery& q) {
  if (!q.kernel) throw ConfigError("correlation query has no kernel", "kernel");
  for (const auto& p : q.points) {
    if (!std::isfinite(p.x)) throw DomainError("query positions must be finite", "x");
  }
  SpacelikeReport rep = validate_point_set(q.points);
  if (!rep.ok) {
    throw DomainError("query points are not on a space-like path (index " +
                          std::to_string(rep.index) + ": " + rep.reason + ")",
                      "points");
  }
  const std::size_t k = q.points.size();
  std::vector<std::vector<double>> m(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m[i][j] = q.kernel(q.points[i], q.points[j]);
  DensityResult r;
  r.raw = small_determinant(m);
  r.value = r.raw;
  if (r.raw < 0.0 && r.raw >= kClampFloor) {
    r.value = 0.0;
    r.clamped = true;
    g_clamped.fetch_add(1, std::memory_order_relaxed);
  }
  return r;
}

long clamp_warning_count() { return g_clamped.load(); }
void reset_clamp_warning_count() { g_clamped.store(0); }

GaugeReport gauge_compare(const KernelFn& k1, const KernelFn& k2,
                          const std::vector<SpaceTimePoint>& points, double tol, int max_k) {
  GaugeReport rep;
  const int m = static_cast<int>(points.size());
  std::vector<std::vector<double>> a(m, std::vector<double>(m)), b(m, std::vector<double>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      a[i][j] = k1(points[i], points[j]);
      b[i][j] = k2(points[i], points[j]);
    }
  auto note = [&](double d) {
    rep.max_deviation = std::max(rep.max_deviation, d);
    ++rep.comparisons;
  };
  // Subsets by bitmask; sizes up to max_k.
  const int kmax = std::min(max_k, m);
  std::vector<int> sel;
  std::function<void(int)> rec = [&](int start) {
    if (!sel.empty()) {
      const std::size_t k = sel.size();
      std::vector<std::vector<double>> sa(k, std::vector<double>(k)), sb = sa;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
          sa[i][j] = a[sel[i]][sel[j]];
          sb[i][j] = b[sel[i]][sel[j]];
        }
      note(std::abs(small_determinant(sa) - small_determinant(sb)));
    }
    if (static_cast<int>(sel.size()) == kmax) return;
    for (int i = start; i < m; ++i) {
      sel.push_back(i);
      rec(i + 1);
      sel.pop_back();
    }
  };
  rec(0);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) note(std::abs(a[i][j] * a[j][i] - b[i][j] * b[j][i]));
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

double gap_probability(int n, double t, double a, double b, int nodes, GapFamily family) {
  if (nodes < 4) throw ConfigError("gap probability needs at least 4 nodes", "nodes");
  if (n < 1) throw DomainError("level must be >= 1", "n");
  if (family == GapFamily::Warren ? !(t > 0.0) : !(t >= 0.0)) {
    throw DomainError("time outside the family's domain", "t");
  }
  if (std::isnan(a) || std::isnan(b) || !(a < b)) {
    throw DomainError("gap interval must satisfy a < b", "interval");
  }
  if (std::isinf(a) && std::isinf(b)) {
    throw DomainError("gap interval needs at least one finite endpoint", "interval");
  }
  // Nodes y_i and weights w_i on (a, b).
  std::vector<double> y(nodes), w(nodes);
  quad::Rule rule = quad::gauss_legendre(nodes, 0.0, 1.0);
  for (int i = 0; i < nodes; ++i) {
    double u = rule.nodes[i];
    if (std::isinf(b)) {
      y[i] = a + u / (1.0 - u);
      w[i] = rule.weights[i] / ((1.0 - u) * (1.0 - u));
    } else if (std::isinf(a)) {
      y[i] = b - u / (1.0 - u);
      w[i] = rule.weights[i] / ((1.0 - u) * (1.0 - u));
    } else {
      y[i] = a + (b - a) * u;
      w[i] = (b - a) * rule.weights[i];
    }
  }
  // Symmetric fixed-slice kernel sum_{k<n} psi_k(x) psi_k(y) (scaled for Warren).
  const double s = family == GapFamily::Warren ? std::sqrt(t) : 1.0;
  Eigen::MatrixXd psi(nodes, n);
  for (int i = 0; i < nodes; ++i) {
    sf::HermiteFunctions hf(n - 1, y[i] / s);
    for (int k = 0; k < n; ++k) psi(i, k) = hf.value(k) * std::sqrt(w[i] / s);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(nodes, nodes) - psi * psi.transpose();
  return m.partialPivLu().determinant();
}

}  // namespace dbmk::corr
