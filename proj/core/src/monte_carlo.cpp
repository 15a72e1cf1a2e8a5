#include "dbmk/monte_carlo.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dbmk/correlation.hpp"
#include "dbmk/errors.hpp"
#include "dbmk/quadrature_rules.hpp"

namespace dbmk::mc {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
  std::uint64_t s = mix64(seed + kGolden);
  s = mix64(s ^ (path * 0xd1b54a32d192ed03ULL + 1));
  s = mix64(s ^ (step * 0x8cb92ba72f3d8dd7ULL + 2));
  state_ = s;
}

CounterRng::result_type CounterRng::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

HermitianState::HermitianState(int dim)
    : n(dim), diag(dim, 0.0), upper(dim > 1 ? dim * (dim - 1) / 2 : 0) {}

std::size_t HermitianState::upper_index(int i, int j) const {
  // Row i holds n-1-i entries; rows before it hold sum_{r<i} (n-1-r).
  return static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::complex<double> HermitianState::at(int i, int j) const {
  if (i == j) return diag[i];
  if (i < j) return upper[upper_index(i, j)];
  return std::conj(upper[upper_index(j, i)]);
}

HermitianState sample_gue(int n, CounterRng& rng) {
  if (n < 1) throw DomainError("GUE size must be >= 1", "N");
  HermitianState s(n);
  const double sd_diag = std::sqrt(0.5);
  for (int i = 0; i < n; ++i) s.diag[i] = sd_diag * rng.normal();
  for (auto& z : s.upper) {
    double re = 0.5 * rng.normal();
    double im = 0.5 * rng.normal();
    z = {re, im};
  }
  return s;
}

void evolve_ou(HermitianState& state, double dt, CounterRng& rng) {
  if (!(dt > 0.0)) throw DomainError("OU step needs dt > 0", "dt");
  const double q = std::exp(-dt);
  const double s = std::sqrt(-std::expm1(-2.0 * dt));
  const double sd_diag = std::sqrt(0.5);
  for (auto& d : state.diag) d = q * d + s * sd_diag * rng.normal();
  for (auto& z : state.upper) {
    double re = q * z.real() + s * 0.5 * rng.normal();
    double im = q * z.imag() + s * 0.5 * rng.normal();
    z = {re, im};
  }
}

Levels minor_eigenvalues(const HermitianState& state) {
  Levels out(state.n);
  double radius = 0.0;
  for (int k = 1; k <= state.n; ++k) {
    if (k == 1) {
      out[0] = {state.diag[0]};
      radius = std::max(radius, std::abs(state.diag[0]));
      continue;
    }
    // [[X, -Y], [Y, X]] has the spectrum of X + iY, each value twice.
    Eigen::MatrixXd a(2 * k, 2 * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        std::complex<double> z = state.at(i, j);
        a(i, j) = z.real();
        a(i + k, j + k) = z.real();
        a(i, j + k) = -z.imag();
        a(i + k, j) = z.imag();
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
    const auto& ev = es.eigenvalues();
    out[k - 1].resize(k);
    for (int i = 0; i < k; ++i) out[k - 1][i] = 0.5 * (ev[2 * i] + ev[2 * i + 1]);
    radius = std::max({radius, std::abs(ev[0]), std::abs(ev[2 * k - 1])});
  }
  if (!interlaced(out, 1e-10 * std::max(1.0, radius))) {
    throw NumericalError("minor eigenvalues failed the interlacing check");
  }
  return out;
}

bool interlaced(const Levels& levels, double tol) {
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const auto& lo = levels[k];
    const auto& hi = levels[k + 1];
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (hi[i] > lo[i] + tol || lo[i] > hi[i + 1] + tol) return false;
    }
  }
  return true;
}

void SimConfig::validate(Process p) const {
  if (n < 1) throw DomainError("number of levels must be >= 1", "N");
  if (p == Process::DBM && n > 64) throw DomainError("matrix size is capped at 64", "N");
  if (paths < 1) throw DomainError("paths must be >= 1", "paths");
  if (times.empty()) throw DomainError("at least one observation time is required", "times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw DomainError("times must be finite", "times");
    if (i > 0 && times[i] < times[i - 1]) throw DomainError("times must be nondecreasing", "times");
  }
  if (p == Process::DBM && times.front() < 0.0) throw DomainError("times must be >= 0", "times");
  if (p == Process::Warren) {
    if (!(times.front() > 0.0)) throw DomainError("Warren observation times must be > 0", "times");
    if (!(euler_step > 0.0)) throw DomainError("euler_step must be positive", "euler_step");
    double prev = 0.0;
    for (double t : times) {
      if (t > prev && euler_step > t - prev + 1e-12) {
        throw DomainError("euler_step exceeds the spacing of observation times", "euler_step");
      }
      prev = t;
    }
  }
  if (threads < 0) throw DomainError("threads must be >= 0", "threads");
}

namespace {

std::vector<Levels> simulate_dbm(const SimConfig& cfg, long path) {
  std::vector<Levels> snaps;
  snaps.reserve(cfg.times.size());
  CounterRng rng0(cfg.seed, path, 0);
  HermitianState s = sample_gue(cfg.n, rng0);
  snaps.push_back(minor_eigenvalues(s));
  for (std::size_t k = 1; k < cfg.times.size(); ++k) {
    double dt = cfg.times[k] - cfg.times[k - 1];
    if (dt > 0.0) {
      CounterRng rng(cfg.seed, path, k);
      evolve_ou(s, dt, rng);
      snaps.push_back(minor_eigenvalues(s));
    } else {
      snaps.push_back(snaps.back());
    }
  }
  return snaps;
}

double reflect_into(double v, double lo, double hi) {
  if (v < lo) v = 2.0 * lo - v;
  if (v > hi) v = 2.0 * hi - v;
  return std::clamp(v, lo, hi);
}

}  // namespace

std::vector<Levels> simulate_warren(int n_max, const std::vector<double>& times, double euler_step,
                                    std::uint64_t seed, long path) {
  Levels x(n_max);
  for (int k = 0; k < n_max; ++k) x[k].assign(k + 1, 0.0);
  std::vector<Levels> snaps;
  snaps.reserve(times.size());
  double t = 0.0;
  std::uint64_t step = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (double target : times) {
    while (t < target) {
      double dt = std::min(euler_step, target - t);
      if (target - (t + dt) < 1e-12 * std::max(1.0, target)) dt = target - t;
      CounterRng rng(seed, path, step++);
      const double sd = std::sqrt(0.5 * dt);
      for (int k = 0; k < n_max; ++k)
        for (auto& v : x[k]) v += sd * rng.normal();
      // Level k+1 particle i lives in [x[k-1][i-1], x[k-1][i]].
      for (int k = 1; k < n_max; ++k) {
        for (int i = 0; i <= k; ++i) {
          double lo = i > 0 ? x[k - 1][i - 1] : -inf;
          double hi = i < k ? x[k - 1][i] : inf;
          x[k][i] = reflect_into(x[k][i], lo, hi);
        }
      }
      t += dt;
    }
    snaps.push_back(x);
  }
  return snaps;
}

std::vector<Levels> simulate_path(Process p, const SimConfig& cfg, long path) {
  if (p == Process::DBM) return simulate_dbm(cfg, path);
  return simulate_warren(cfg.n, cfg.times, cfg.euler_step, cfg.seed, path);
}

double nonintersecting_density(int n, double t, const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (n < 1) throw DomainError("n must be >= 1", "n");
  if (!(t > 0.0)) throw DomainError("t must be > 0", "t");
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n) {
    throw DomainError("x and y must have n coordinates", "x");
  }
  double vx = 1.0, vy = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      vx *= x[j] - x[i];
      vy *= y[j] - y[i];
    }
  if (vx == 0.0) throw DomainError("coincident coordinates in x", "x");
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = std::exp(-(x[i] - y[j]) * (x[i] - y[j]) / t);
  return vy / vx * corr::small_determinant(m);
}

double EmpiricalHistogram::density(std::size_t b) const {
  return static_cast<double>(counts[b]) / (static_cast<double>(paths) * width(b));
}

double EmpiricalHistogram::standard_error(std::size_t b) const {
  return std::sqrt(density(b) / (static_cast<double>(paths) * width(b)));
}

namespace {

std::size_t time_index(const SimConfig& cfg, double time) {
  for (std::size_t k = 0; k < cfg.times.size(); ++k)
    if (cfg.times[k] == time) return k;
  throw DomainError("time is not an observation time", "time");
}

}  // namespace

EmpiricalHistogram histogram(Process p, const SimConfig& cfg, int level, double time,
                             const std::vector<double>& edges) {
  cfg.validate(p);
  if (level < 1 || level > cfg.n) throw DomainError("level outside 1..N", "level");
  if (edges.size() < 2) throw DomainError("histogram needs at least 2 edges", "edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw DomainError("edges must increase", "edges");
  const std::size_t ti = time_index(cfg, time);
  const std::size_t nb = edges.size() - 1;
  using Acc = std::vector<std::uint64_t>;
  Acc counts = parallel_paths<Acc>(
      cfg.paths, cfg.threads, [nb] { return Acc(nb, 0); },
      [&](Acc& acc, long path) {
        auto snaps = simulate_path(p, cfg, path);
        for (double v : snaps[ti][level - 1]) {
          auto it = std::upper_bound(edges.begin(), edges.end(), v);
          if (it == edges.begin() || it == edges.end()) continue;
          ++acc[it - edges.begin() - 1];
        }
      },
      [](Acc& a, const Acc& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
      });
  EmpiricalHistogram h;
  h.level = level;
  h.time = time;
  h.edges = edges;
  h.counts = std::move(counts);
  h.paths = cfg.paths;
  return h;
}

std::vector<EmpiricalEstimate> empirical_correlation(Process p, const SimConfig& cfg,
                                                     const std::vector<BinQuery>& queries) {
  cfg.validate(p);
  struct Loc {
    std::size_t ti;
    int level;
    double lo, hi;
  };
  std::vector<std::vector<Loc>> locs;
  for (const auto& q : queries) {
    if (q.points.size() != q.widths.size() || q.points.empty()) {
      throw DomainError("each query needs one width per point", "widths");
    }
    corr::SpacelikeReport rep = corr::validate_point_set(q.points);
    if (!rep.ok) throw DomainError("query points are not on a space-like path", "points");
    std::vector<Loc> l;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      if (!(q.widths[i] > 0.0)) throw DomainError("bin widths must be positive", "widths");
      if (q.points[i].n < 1 || q.points[i].n > cfg.n) throw DomainError("level outside 1..N", "level");
      l.push_back({time_index(cfg, q.points[i].t), q.points[i].n, q.points[i].x,
                   q.points[i].x + q.widths[i]});
    }
    for (std::size_t i = 0; i < l.size(); ++i)
      for (std::size_t j = i + 1; j < l.size(); ++j)
        if (l[i].ti == l[j].ti && l[i].level == l[j].level && l[i].lo < l[j].hi && l[j].lo < l[i].hi) {
          throw DomainError("bins overlap at one space-time location", "widths");
        }
    locs.push_back(std::move(l));
  }
  struct Acc {
    std::vector<std::uint64_t> sum, sum_sq, hits;
  };
  const std::size_t nq = queries.size();
  Acc acc = parallel_paths<Acc>(
      cfg.paths, cfg.threads, [nq] { return Acc{std::vector<std::uint64_t>(nq, 0), std::vector<std::uint64_t>(nq, 0), std::vector<std::uint64_t>(nq, 0)}; },
      [&](Acc& a, long path) {
        auto snaps = simulate_path(p, cfg, path);
        for (std::size_t q = 0; q < nq; ++q) {
          std::uint64_t prod = 1;
          for (const Loc& l : locs[q]) {
            std::uint64_t c = 0;
            for (double v : snaps[l.ti][l.level - 1])
              if (v >= l.lo && v < l.hi) ++c;
            prod *= c;
            if (prod == 0) break;
          }
          a.sum[q] += prod;
          a.sum_sq[q] += prod * prod;
          a.hits[q] += prod > 0;
        }
      },
      [](Acc& a, const Acc& b) {
        for (std::size_t i = 0; i < a.sum.size(); ++i) {
          a.sum[i] += b.sum[i];
          a.sum_sq[i] += b.sum_sq[i];
          a.hits[i] += b.hits[i];
        }
      });
  std::vector<EmpiricalEstimate> out(nq);
  const double n = static_cast<double>(cfg.paths);
  for (std::size_t q = 0; q < nq; ++q) {
    double vol = 1.0;
    for (double w : queries[q].widths) vol *= w;
    EmpiricalEstimate& e = out[q];
    e.hits = acc.hits[q];
    if (acc.hits[q] == 0) {
      e.value = 0.0;
      e.standard_error = 3.0 / (n * vol);
      e.one_sided = true;
      continue;
    }
    double mean = static_cast<double>(acc.sum[q]) / n;
    double var = static_cast<double>(acc.sum_sq[q]) / n - mean * mean;
    if (cfg.paths > 1) var *= n / (n - 1.0);
    e.value = mean / vol;
    e.standard_error = std::sqrt(std::max(var, 0.0) / n) / vol;
  }
  return out;
}

double bin_averaged_density(const std::function<double(const kernels::SpaceTimePoint&,
                                                       const kernels::SpaceTimePoint&)>& kernel,
                            const BinQuery& q, int nodes) {
  const std::size_t k = q.points.size();
  if (k == 0 || k != q.widths.size()) throw DomainError("each point needs a width", "widths");
  quad::Rule rule = quad::gauss_legendre(nodes, 0.0, 1.0);
  std::vector<int> idx(k, 0);
  double total = 0.0;
  std::vector<kernels::SpaceTimePoint> pts = q.points;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      pts[i].x = q.points[i].x + q.widths[i] * rule.nodes[idx[i]];
      w *= rule.weights[idx[i]];
    }
    std::vector<std::vector<double>> m(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m[i][j] = kernel(pts[i], pts[j]);
    total += w * corr::small_determinant(m);
    std::size_t d = 0;
    while (d < k && ++idx[d] == nodes) idx[d++] = 0;
    if (d == k) break;
  }
  return total;
}

double kolmogorov_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  if (lam <= 0.0) return 1.0;
  if (lam < 1.0) {
    // P(K <= lam) = sqrt(2 pi)/lam sum exp(-(2k-1)^2 pi^2 / (8 lam^2)).
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      double a = (2 * k - 1) * std::numbers::pi;
      s += std::exp(-a * a / (8.0 * lam * lam));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lam * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lam * lam);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("KS test needs samples", "samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, kolmogorov_p_value(d, samples.size())};
}

std::vector<ObservationRecord> observation_records(Process p, const SimConfig& cfg) {
  cfg.validate(p);
  using Acc = std::vector<ObservationRecord>;
  return parallel_paths<Acc>(
      cfg.paths, cfg.threads, [] { return Acc{}; },
      [&](Acc& acc, long path) {
        auto snaps = simulate_path(p, cfg, path);
        for (std::size_t k = 0; k < snaps.size(); ++k)
          for (int lvl = 1; lvl <= cfg.n; ++lvl)
            for (int i = 0; i < lvl; ++i)
              acc.push_back({path, lvl, cfg.times[k], i, snaps[k][lvl - 1][i]});
      },
      [](Acc& a, const Acc& b) { a.insert(a.end(), b.begin(), b.end()); }, 64);
}

void write_records_csv(std::ostream& os, const std::vector<ObservationRecord>& records) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << "path_id,level,time,index,position\n";
  for (const auto& r : records) {
    buf << r.path_id << ',' << r.level << ',' << r.time << ',' << r.index << ',' << r.position << '\n';
  }
  os << buf.str();
}

std::string records_to_json(const std::vector<ObservationRecord>& records) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records) {
    j.push_back({{"path_id", r.path_id},
                 {"level", r.level},
                 {"time", r.time},
                 {"index", r.index},
                 {"position", r.position}});
  }
  return j.dump();
}

void write_histogram_csv(std::ostream& os, const EmpiricalHistogram& h) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << "level,time,bin_lo,bin_hi,count,density,standard_error\n";
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    buf << h.level << ',' << h.time << ',' << h.edges[b] << ',' << h.edges[b + 1] << ','
        << h.counts[b] << ',' << h.density(b) << ',' << h.standard_error(b) << '\n';
  }
  os << buf.str();
}

}  // namespace dbmk::mc
