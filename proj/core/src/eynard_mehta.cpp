#include "dbmk/eynard_mehta.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "dbmk/errors.hpp"
#include "dbmk/special_functions.hpp"

namespace dbmk::em {

namespace {

constexpr int kMaxDimension = 2000;
constexpr double kMinRcond = 1e-14;

Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& a, double* cond_out = nullptr) {
  Eigen::PartialPivLU<Matrix> lu(a);
  double rc = lu.rcond();
  if (cond_out) *cond_out = rc > 0.0 ? 1.0 / rc : INFINITY;
  if (!(rc > kMinRcond)) {
    throw ConditioningError("linear system is numerically singular", rc > 0.0 ? 1.0 / rc : INFINITY);
  }
  return lu;
}

}  // namespace

double principal_minor(const Matrix& m, const std::vector<int>& idx) {
  if (idx.empty()) return 1.0;
  Matrix s(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = m(idx[i], idx[j]);
  return s.determinant();
}

FredholmCheck fredholm_expansion_check(const Matrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("matrix must be square", "matrix");
  const int n = static_cast<int>(m.rows());
  if (n > 12) throw ConfigError("subset enumeration refused above size 12", "matrix");
  FredholmCheck c;
  c.lhs = (Matrix::Identity(n, n) + m).determinant();
  std::vector<int> idx;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    idx.clear();
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    c.rhs += principal_minor(m, idx);
  }
  return c;
}

Matrix projected_kernel(const Matrix& l, const std::vector<int>& retained) {
  if (l.rows() != l.cols()) throw ConfigError("L must be square", "L");
  const int n = static_cast<int>(l.rows());
  Matrix a = l;
  for (int i : retained) {
    if (i < 0 || i >= n) throw ConfigError("retained index out of range", "retained");
    a(i, i) += 1.0;
  }
  auto lu = checked_lu(a);
  const int r = static_cast<int>(retained.size());
  // Only the retained columns of the inverse are needed.
  Matrix rhs = Matrix::Zero(n, r);
  for (int j = 0; j < r; ++j) rhs(retained[j], j) = 1.0;
  Matrix cols = lu.solve(rhs);
  Matrix k(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) k(i, j) = (i == j ? 1.0 : 0.0) - cols(retained[i], j);
  return k;
}

Matrix assemble_l(const Matrix& phi, const std::vector<Matrix>& w, const Matrix& psi) {
  const int p = static_cast<int>(phi.rows());
  const int layers = static_cast<int>(w.size()) + 1;
  std::vector<int> sizes(layers);
  sizes[0] = static_cast<int>(phi.cols());
  for (std::size_t m = 0; m < w.size(); ++m) {
    if (w[m].rows() != sizes[m]) throw ConfigError("W blocks are not conformable", "W");
    sizes[m + 1] = static_cast<int>(w[m].cols());
  }
  if (psi.rows() != sizes.back() || psi.cols() != p) throw ConfigError("Psi has the wrong shape", "Psi");
  std::vector<int> off(layers + 1, p);
  for (int m = 0; m < layers; ++m) off[m + 1] = off[m] + sizes[m];
  Matrix l = Matrix::Zero(off.back(), off.back());
  l.block(0, off[0], p, sizes[0]) = phi;
  for (int m = 0; m + 1 < layers; ++m) l.block(off[m], off[m + 1], sizes[m], sizes[m + 1]) = -w[m];
  l.block(off[layers - 1], 0, sizes.back(), p) = psi;
  return l;
}

Matrix w_range(const std::vector<Matrix>& w, int n, int m) {
  const int N = static_cast<int>(w.size());
  auto rows = [&](int k) { return k < N ? w[k].rows() : w[N - 1].cols(); };
  if (n >= m) return Matrix::Zero(rows(n), rows(m));
  Matrix r = w[n];
  for (int k = n + 1; k < m; ++k) r = r * w[k];
  return r;
}

std::vector<std::vector<Matrix>> em_block_kernel(const Matrix& phi, const std::vector<Matrix>& w,
                                                 const Matrix& psi) {
  const int N = static_cast<int>(w.size());
  if (N == 0) throw ConfigError("at least one W block is required", "W");
  // Products with the empty product read as the identity.
  auto prod = [&](int n, int m) {
    if (n == m) {
      Eigen::Index d = n < N ? w[n].rows() : w[N - 1].cols();
      return Matrix(Matrix::Identity(d, d));
    }
    return w_range(w, n, m);
  };
  Matrix full = phi * prod(0, N) * psi;
  auto lu = checked_lu(full);
  Matrix minv_phi = lu.solve(phi);
  std::vector<Matrix> right(N + 1), left(N + 1);
  for (int n = 0; n <= N; ++n) {
    left[n] = prod(n, N) * psi;
    right[n] = minv_phi * prod(0, n);
  }
  std::vector<std::vector<Matrix>> k(N + 1, std::vector<Matrix>(N + 1));
  for (int n = 0; n <= N; ++n)
    for (int m = 0; m <= N; ++m) k[n][m] = left[n] * right[m] - w_range(w, n, m);
  return k;
}

Grid Grid::uniform(double lo, double hi, int count) {
  if (count < 2) throw ConfigError("grid needs at least 2 points", "grid");
  if (!(hi > lo)) throw ConfigError("grid bounds must satisfy lo < hi", "grid");
  Grid g;
  g.points.resize(count);
  const double h = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) g.points[i] = lo + i * h;
  g.points.back() = hi;
  g.cell_weight = h;
  return g;
}

void Grid::validate() const {
  if (points.size() < 2) throw ConfigError("grid needs at least 2 points", "grid");
  if (!(cell_weight > 0.0)) throw ConfigError("cell weight must be positive", "grid");
  for (std::size_t i = 1; i < points.size(); ++i) {
    double d = points[i] - points[i - 1];
    if (!(d > 0.0)) throw ConfigError("grid points must be strictly increasing", "grid");
    if (std::abs(d - cell_weight) > 1e-12 * std::max(1.0, std::abs(points[i]))) {
      throw ConfigError("grid spacing must be uniform", "grid");
    }
  }
}

std::vector<StepKind> PathDescriptor::steps() const {
  std::vector<StepKind> s(levels.size());
  for (std::size_t m = 0; m < levels.size(); ++m) {
    int next = m + 1 < levels.size() ? levels[m + 1] : 0;
    s[m] = levels[m] == next ? StepKind::Time : StepKind::Space;
  }
  return s;
}

std::vector<int> PathDescriptor::down_steps() const {
  std::vector<int> tau;
  auto s = steps();
  for (std::size_t m = 0; m < s.size(); ++m)
    if (s[m] == StepKind::Space) tau.push_back(static_cast<int>(m));
  return tau;
}

void PathDescriptor::validate() const {
  if (levels.empty()) throw DomainError("path must be nonempty", "levels");
  if (levels.size() != times.size()) throw DomainError("levels and times differ in length", "times");
  if (levels.back() != 1) throw DomainError("path must end at level 1", "levels");
  for (std::size_t m = 0; m < levels.size(); ++m) {
    if (!std::isfinite(times[m])) throw DomainError("times must be finite", "times");
    if (m == 0) continue;
    int drop = levels[m - 1] - levels[m];
    if (drop != 0 && drop != 1) throw DomainError("levels must drop by 0 or 1 per step", "levels");
    if (drop == 1 && times[m] != times[m - 1]) {
      throw DomainError("a level drop must happen at a fixed time", "times");
    }
    if (drop == 0 && !(times[m] > times[m - 1])) {
      throw DomainError("a step at a fixed level must advance time", "times");
    }
  }
}

BlockLEnsemble BlockLEnsemble::assemble(const PathDescriptor& path, const Grid& grid, double u,
                                        OracleFamily family) {
  path.validate();
  grid.validate();
  if (!(u <= grid.points.front() - 2.0)) {
    throw DomainError("virtual particle must sit at least 2 below the grid", "u");
  }
  if (family == OracleFamily::Warren && !(path.times.front() > 0.0)) {
    throw DomainError("Warren oracle needs t > 0", "times");
  }
  BlockLEnsemble e;
  e.grid = grid;
  e.path = path;
  e.u = u;
  e.family = family;
  const int M = static_cast<int>(grid.points.size());
  const int N = static_cast<int>(path.levels.size());
  const int n0 = path.levels.front();
  e.phantoms = n0;
  const long dim = n0 + static_cast<long>(N) * M;
  if (dim > kMaxDimension) throw ConfigError("oracle dimension exceeds 2000", "grid");
  e.l = Matrix::Zero(dim, dim);
  const double h = grid.cell_weight;
  const auto& x = grid.points;

  // Phi: rows h_{n0-l}(x) w(x) h at the initial time.
  const double t0 = path.times.front();
  for (int l = 1; l <= n0; ++l) {
    for (int i = 0; i < M; ++i) {
      double v;
      if (family == OracleFamily::OU) {
        v = sf::hermite_eval(sf::HermiteBasis::star(n0), n0 - l, x[i]) * std::exp(-x[i] * x[i]);
      } else {
        v = sf::hermite_eval(sf::HermiteBasis::time_indexed(n0, t0), n0 - l, x[i]) *
            std::exp(-x[i] * x[i] / t0);
      }
      e.l(l - 1, e.offset(0) + i) = v * h;
    }
  }
  auto steps = path.steps();
  auto tau = path.down_steps();  // tau[k-1] is the k-th down step
  for (int m = 0; m < N; ++m) {
    // F: virtual-particle columns H(x - u).
    for (int l = 1; l <= n0; ++l) {
      int k = n0 - l + 1;
      if (tau[k - 1] != m) continue;
      for (int i = 0; i < M; ++i) e.l(e.offset(m) + i, l - 1) = x[i] - u >= 0.0 ? 1.0 : 0.0;
    }
    if (m + 1 >= N) continue;
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        double w;
        if (steps[m] == StepKind::Space) {
          w = x[i] - x[j] >= 0.0 ? 1.0 : 0.0;
        } else {
          double dt = path.times[m + 1] - path.times[m];
          w = sf::transition_density(
              family == OracleFamily::OU ? sf::Process::OU : sf::Process::BM, dt, x[i], x[j]);
        }
        e.l(e.offset(m) + i, e.offset(m + 1) + j) = -w * h;
      }
    }
  }
  return e;
}

double DiscreteKernel::at(int m, int i, int mp, int j) const {
  const int M = static_cast<int>(grid.points.size());
  return k(m * M + i, mp * M + j);
}

std::vector<double> DiscreteKernel::rho1(int m) const {
  const int M = static_cast<int>(grid.points.size());
  std::vector<double> r(M);
  for (int i = 0; i < M; ++i) r[i] = at(m, i, m, i);
  return r;
}

double DiscreteKernel::rho2(int m, int i, int mp, int j) const {
  return at(m, i, m, i) * at(mp, j, mp, j) - at(m, i, mp, j) * at(mp, j, m, i);
}

int DiscreteKernel::index_of(double x) const {
  const double h = grid.cell_weight;
  double f = (x - grid.points.front()) / h;
  long i = std::lround(f);
  if (i < 0 || i >= static_cast<long>(grid.points.size()) ||
      std::abs(grid.points[i] - x) > 1e-9 * h) {
    throw DomainError("position is not a grid point", "x");
  }
  return static_cast<int>(i);
}

int DiscreteKernel::path_index(int level, double time) const {
  for (std::size_t m = 0; m < path.levels.size(); ++m)
    if (path.levels[m] == level && path.times[m] == time) return static_cast<int>(m);
  throw DomainError("(level, time) is not on the oracle path", "point");
}

double DiscreteKernel::kernel(const kernels::SpaceTimePoint& p,
                              const kernels::SpaceTimePoint& q) const {
  return at(path_index(p.n, p.t), index_of(p.x), path_index(q.n, q.t), index_of(q.x));
}

DiscreteKernel discretized_minor_kernel(const PathDescriptor& path, const Grid& grid, double u,
                                        OracleFamily family) {
  BlockLEnsemble e = BlockLEnsemble::assemble(path, grid, u, family);
  const int dim = static_cast<int>(e.l.rows());
  std::vector<int> retained;
  for (int i = e.phantoms; i < dim; ++i) retained.push_back(i);
  Matrix a = e.l;
  for (int i : retained) a(i, i) += 1.0;
  DiscreteKernel dk;
  dk.grid = grid;
  dk.path = path;
  auto lu = checked_lu(a, &dk.condition_estimate);
  Matrix inv = lu.inverse();
  dk.k = -inv.bottomRightCorner(dim - e.phantoms, dim - e.phantoms);
  dk.k.diagonal().array() += 1.0;
  dk.k /= grid.cell_weight;
  return dk;
}

std::string to_json(const PathDescriptor& path, const Grid& grid, double u, OracleFamily family,
                    const DiscreteKernel& k) {
  nlohmann::json j;
  j["path"] = {{"levels", path.levels}, {"times", path.times}};
  j["grid"] = {{"lo", grid.points.front()},
               {"hi", grid.points.back()},
               {"points", grid.points.size()},
               {"cell_weight", grid.cell_weight}};
  j["u"] = u;
  j["family"] = family == OracleFamily::OU ? "ou" : "warren";
  j["condition_estimate"] = k.condition_estimate;
  nlohmann::json rho = nlohmann::json::array();
  for (std::size_t m = 0; m < path.levels.size(); ++m) {
    rho.push_back({{"level", path.levels[m]}, {"time", path.times[m]}, {"rho1", k.rho1(m)}});
  }
  j["rho1"] = rho;
  return j.dump(2);
}

}  // namespace dbmk::em
