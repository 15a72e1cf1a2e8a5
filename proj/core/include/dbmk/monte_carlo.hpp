#pragma once

#include <algorithm>
#include <atomic>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dbmk/kernels.hpp"

namespace dbmk::mc {

// SplitMix64 stream keyed by (seed, path, step); streams for different keys
// are independent of scheduling.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t path, std::uint64_t step);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();
  double normal() { return normal_(*this); }

 private:
  std::uint64_t state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct HermitianState {
  int n = 0;
  std::vector<double> diag;
  std::vector<std::complex<double>> upper;  // (i, j), i < j, row-major

  explicit HermitianState(int dim = 0);
  std::complex<double> at(int i, int j) const;
  std::size_t upper_index(int i, int j) const;
};

HermitianState sample_gue(int n, CounterRng& rng);

// Exact OU transition over dt > 0; each real component c -> q c + sqrt(1-q^2) sigma Z.
void evolve_ou(HermitianState& state, double dt, CounterRng& rng);

// Ascending eigenvalues of every top-left n x n block, n = 1..N.
using Levels = std::vector<std::vector<double>>;
Levels minor_eigenvalues(const HermitianState& state);

// True if level k interlaces with level k+1 for all k, up to `tol`.
bool interlaced(const Levels& levels, double tol = 0.0);

enum class Process { DBM, Warren };

struct SimConfig {
  int n = 2;                   // matrix size / number of levels
  std::vector<double> times;   // observation times, nondecreasing
  long paths = 1;
  std::uint64_t seed = 0;
  double euler_step = 1e-3;    // Warren only
  int threads = 1;             // 0: hardware concurrency

  void validate(Process p) const;
};

// One path: snapshots at cfg.times.
std::vector<Levels> simulate_path(Process p, const SimConfig& cfg, long path);

// Warren system started from the origin at t = 0; Euler increments of
// variance step/2 with mirror reflection from level 1 upward.
std::vector<Levels> simulate_warren(int n_max, const std::vector<double>& times, double euler_step,
                                    std::uint64_t seed, long path);

// Delta(y)/Delta(x) det[exp(-(x_i - y_j)^2 / t)] (unnormalised).
double nonintersecting_density(int n, double t, const std::vector<double>& x,
                               const std::vector<double>& y);

// Per-chunk accumulation merged in chunk order, so results do not depend
// on the thread count.
template <class Acc, class Make, class Work, class Merge>
Acc parallel_paths(long paths, int threads, Make make, Work work, Merge merge, long chunk = 2048) {
  const long nchunks = (paths + chunk - 1) / chunk;
  std::vector<Acc> parts;
  parts.reserve(nchunks);
  for (long c = 0; c < nchunks; ++c) parts.push_back(make());
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::max(1, std::min<int>(nt, static_cast<int>(std::max<long>(nchunks, 1))));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (long c = next++; c < nchunks && !failed; c = next++) {
        long lo = c * chunk, hi = std::min(paths, lo + chunk);
        for (long p = lo; p < hi; ++p) work(parts[c], p);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  Acc total = make();
  for (auto& part : parts) merge(total, part);
  return total;
}

struct EmpiricalHistogram {
  int level = 1;
  double time = 0.0;
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  long paths = 0;

  double width(std::size_t b) const { return edges[b + 1] - edges[b]; }
  double density(std::size_t b) const;
  double standard_error(std::size_t b) const;
};

EmpiricalHistogram histogram(Process p, const SimConfig& cfg, int level, double time,
                             const std::vector<double>& edges);

// Bins [x_i, x_i + width_i) at the space-time locations of `points`.
struct BinQuery {
  std::vector<kernels::SpaceTimePoint> points;
  std::vector<double> widths;
};

struct EmpiricalEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::uint64_t hits = 0;   // paths with a nonzero product
  bool one_sided = false;   // no hits: standard_error is an upper bound
};

std::vector<EmpiricalEstimate> empirical_correlation(Process p, const SimConfig& cfg,
                                                     const std::vector<BinQuery>& queries);

// Bin average of det[K(p_i, p_j)] with a tensor Gauss-Legendre rule.
double bin_averaged_density(const std::function<double(const kernels::SpaceTimePoint&,
                                                       const kernels::SpaceTimePoint&)>& kernel,
                            const BinQuery& q, int nodes = 8);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov tail with the small-sample correction.
double kolmogorov_p_value(double d, std::size_t n);

struct ObservationRecord {
  long path_id = 0;
  int level = 1;
  double time = 0.0;
  int index = 0;
  double position = 0.0;
};

std::vector<ObservationRecord> observation_records(Process p, const SimConfig& cfg);

// path_id,level,time,index,position with 17 significant digits.
void write_records_csv(std::ostream& os, const std::vector<ObservationRecord>& records);
std::string records_to_json(const std::vector<ObservationRecord>& records);
void write_histogram_csv(std::ostream& os, const EmpiricalHistogram& h);

}  // namespace dbmk::mc
