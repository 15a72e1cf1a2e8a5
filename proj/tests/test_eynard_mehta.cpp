#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "dbmk/correlation.hpp"
#include "dbmk/errors.hpp"
#include "dbmk/eynard_mehta.hpp"
#include "dbmk/kernels.hpp"

using namespace dbmk;
using namespace dbmk::em;

namespace {

const double kPi = std::acos(-1.0);

Matrix random_matrix(int r, int c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

std::vector<int> subset(unsigned mask, const std::vector<int>& from) {
  std::vector<int> out;
  for (std::size_t i = 0; i < from.size(); ++i)
    if (mask & (1u << i)) out.push_back(from[i]);
  return out;
}

std::vector<int> join(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double max_abs_error_rho1(const DiscreteKernel& k, int m, double (*ref)(double)) {
  auto rho = k.rho1(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) worst = std::max(worst, std::abs(rho[i] - ref(k.grid.points[i])));
  return worst;
}

double gauss_density(double x) { return std::exp(-x * x) / std::sqrt(kPi); }
double gue2_density(double x) { return (1.0 + 2.0 * x * x) * std::exp(-x * x) / std::sqrt(kPi); }

}  // namespace

TEST(Fredholm, Examples) {
  auto id = fredholm_expansion_check(Matrix::Identity(2, 2));
  EXPECT_NEAR(id.lhs, 4.0, 1e-14);
  EXPECT_NEAR(id.rhs, 4.0, 1e-14);
  for (int n : {1, 3, 5}) {
    auto z = fredholm_expansion_check(Matrix::Zero(n, n));
    EXPECT_EQ(z.lhs, 1.0);
    EXPECT_EQ(z.rhs, 1.0);
  }
  std::mt19937_64 rng(1);
  auto r = fredholm_expansion_check(random_matrix(3, 3, rng));
  EXPECT_NEAR(r.lhs, r.rhs, 1e-12);
  EXPECT_THROW(fredholm_expansion_check(Matrix::Zero(13, 13)), ConfigError);
  EXPECT_THROW(fredholm_expansion_check(Matrix::Zero(2, 3)), ConfigError);
  EXPECT_EQ(principal_minor(Matrix::Identity(3, 3), {}), 1.0);
}

TEST(Fredholm, RandomUpToEight) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + trial % 8;
    auto c = fredholm_expansion_check(random_matrix(n, n, rng));
    EXPECT_NEAR(c.lhs, c.rhs, 1e-12 * std::max(1.0, std::abs(c.lhs)));
  }
}

TEST(Projected, TwoPointExample) {
  Matrix phi = Matrix::Ones(1, 2), psi = Matrix::Ones(2, 1);
  Matrix l = assemble_l(phi, {}, psi);
  ASSERT_EQ(l.rows(), 3);
  Matrix k = projected_kernel(l, {1, 2});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(k(i, j), 0.5, 1e-14);
}

TEST(Projected, MatchesSubsetEnumeration) {
  std::mt19937_64 rng(3);
  const std::vector<int> phantoms{0, 1}, retained{2, 3, 4, 5};
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a = random_matrix(6, 6, rng);
    Matrix l = a * a.transpose();
    double z = 0.0;
    std::vector<double> weight(16);
    for (unsigned y = 0; y < 16; ++y) z += weight[y] = principal_minor(l, join(phantoms, subset(y, retained)));
    Matrix one_n = Matrix::Zero(6, 6);
    for (int i : retained) one_n(i, i) = 1.0;
    EXPECT_NEAR(z, (one_n + l).determinant(), 1e-10 * z);
    Matrix k = projected_kernel(l, retained);
    const std::vector<int> local{0, 1, 2, 3};
    double total = 0.0;
    for (unsigned x = 0; x < 16; ++x) {
      double pr = weight[x] / z;
      EXPECT_GE(pr, -1e-9);
      EXPECT_LE(pr, 1.0 + 1e-9);
      total += pr;
      double sup = 0.0;
      for (unsigned y = 0; y < 16; ++y)
        if ((y & x) == x) sup += weight[y] / z;
      EXPECT_NEAR(principal_minor(k, subset(x, local)), sup, 1e-10) << x;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Projected, SingularThrows) {
  Matrix l = Matrix::Zero(2, 2);
  l(0, 1) = 1.0;
  l(1, 0) = 0.0;
  // Phantom row is zero: 1_N + L has a zero row.
  EXPECT_THROW(projected_kernel(l, {1}), ConditioningError);
}

TEST(BlockKernel, AgreesWithProjectedKernel) {
  std::mt19937_64 rng(4);
  Matrix phi = random_matrix(2, 3, rng), psi = random_matrix(3, 2, rng);
  std::vector<Matrix> w{random_matrix(3, 3, rng)};
  auto blocks = em_block_kernel(phi, w, psi);
  ASSERT_EQ(blocks.size(), 2u);
  Matrix l = assemble_l(phi, w, psi);
  Matrix k = projected_kernel(l, {2, 3, 4, 5, 6, 7});
  for (int n = 0; n < 2; ++n) {
    for (int m = 0; m < 2; ++m) {
      ASSERT_EQ(blocks[n][m].rows(), 3);
      ASSERT_EQ(blocks[n][m].cols(), 3);
      EXPECT_LE((blocks[n][m] - k.block(3 * n, 3 * m, 3, 3)).cwiseAbs().maxCoeff(), 1e-9) << n << m;
    }
  }
}

TEST(BlockKernel, ShapesAndWRange) {
  std::mt19937_64 rng(5);
  Matrix phi = random_matrix(2, 3, rng), psi = random_matrix(4, 2, rng);
  std::vector<Matrix> w{random_matrix(3, 5, rng), random_matrix(5, 4, rng)};
  auto blocks = em_block_kernel(phi, w, psi);
  const int sizes[] = {3, 5, 4};
  for (int n = 0; n < 3; ++n)
    for (int m = 0; m < 3; ++m) {
      EXPECT_EQ(blocks[n][m].rows(), sizes[n]);
      EXPECT_EQ(blocks[n][m].cols(), sizes[m]);
    }
  EXPECT_EQ(w_range(w, 1, 1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(w_range(w, 2, 0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((w_range(w, 0, 2) - w[0] * w[1]).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(em_block_kernel(phi, {}, psi), ConfigError);
  EXPECT_THROW(assemble_l(phi, {random_matrix(4, 4, rng)}, psi), ConfigError);
}

TEST(LinearAlgebra, BlockInverseIdentity) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    int k = 1 + trial % 5, m = 1 + (trial / 5) % 5;
    Matrix a = random_matrix(k, k, rng), b = random_matrix(k, m, rng), c = random_matrix(m, k, rng);
    Matrix d = random_matrix(m, m, rng) + 3.0 * Matrix::Identity(m, m);
    Matrix di = d.inverse();
    Matrix mm = b * di * c - a;
    if (std::abs(mm.determinant()) < 1e-3) continue;
    Matrix mi = mm.inverse();
    Matrix full(k + m, k + m), inv(k + m, k + m);
    full << a, b, c, d;
    inv << -mi, mi * b * di, di * c * mi, di - di * c * mi * b * di;
    EXPECT_LE((inv * full - Matrix::Identity(k + m, k + m)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LinearAlgebra, DInverseIsWRangeArray) {
  std::mt19937_64 rng(7);
  std::vector<Matrix> w{random_matrix(3, 2, rng), random_matrix(2, 4, rng), random_matrix(4, 3, rng)};
  const std::vector<int> sizes{3, 2, 4, 3};
  std::vector<int> off{0};
  for (int s : sizes) off.push_back(off.back() + s);
  const int dim = off.back();
  Matrix d = Matrix::Identity(dim, dim);
  for (int n = 0; n < 3; ++n) d.block(off[n], off[n + 1], sizes[n], sizes[n + 1]) = -w[n];
  Matrix di = d.triangularView<Eigen::Upper>().solve(Matrix::Identity(dim, dim));
  for (int n = 0; n < 4; ++n) {
    for (int m = 0; m < 4; ++m) {
      Matrix blk = di.block(off[n], off[m], sizes[n], sizes[m]);
      if (n > m) {
        EXPECT_EQ(blk.cwiseAbs().maxCoeff(), 0.0);
      } else if (n == m) {
        EXPECT_LE((blk - Matrix::Identity(sizes[n], sizes[n])).cwiseAbs().maxCoeff(), 1e-12);
      } else {
        EXPECT_LE((blk - w_range(w, n, m)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(Oracle, SingleLevel) {
  PathDescriptor path{{1}, {0.5}};
  auto coarse = discretized_minor_kernel(path, Grid::uniform(-5, 5, 200), -8.0, OracleFamily::OU);
  double e1 = max_abs_error_rho1(coarse, 0, gauss_density);
  EXPECT_LE(e1, 2e-2);
  auto fine = discretized_minor_kernel(path, Grid::uniform(-5, 5, 399), -8.0, OracleFamily::OU);
  double e2 = max_abs_error_rho1(fine, 0, gauss_density);
  // The one-level instance is a Riemann sum of a Gaussian, already at roundoff.
  EXPECT_TRUE(e1 < 1e-9 || e1 / e2 >= 1.7) << e1 << " " << e2;
  auto far = discretized_minor_kernel(path, Grid::uniform(-5, 5, 200), -10.0, OracleFamily::OU);
  auto r8 = coarse.rho1(0), r10 = far.rho1(0);
  for (std::size_t i = 0; i < r8.size(); ++i) EXPECT_LT(std::abs(r8[i] - r10[i]), 1e-6);
}

TEST(Oracle, TwoLevelGue2AndRefinement) {
  PathDescriptor path{{2, 1}, {0.5, 0.5}};
  auto coarse = discretized_minor_kernel(path, Grid::uniform(-5, 5, 200), -8.0, OracleFamily::OU);
  double e1 = max_abs_error_rho1(coarse, 0, gue2_density);
  EXPECT_LE(e1, 2e-2);
  // Level 2 is again a smooth Riemann sum; the O(h) error sits below the
  // level drop, where the Heaviside block enters.
  double d1 = max_abs_error_rho1(coarse, 1, gauss_density);
  EXPECT_LE(d1, 2e-2);
  auto fine = discretized_minor_kernel(path, Grid::uniform(-5, 5, 399), -8.0, OracleFamily::OU);
  double d2 = max_abs_error_rho1(fine, 1, gauss_density);
  EXPECT_GE(d1 / d2, 1.7) << d1 << " " << d2;
  EXPECT_LE(max_abs_error_rho1(fine, 0, gue2_density), 2e-2);
}

TEST(Oracle, GaugeAgainstAnalyticKernel) {
  PathDescriptor path{{2, 2, 1}, {0.3, 0.8, 0.8}};
  auto dk = discretized_minor_kernel(path, Grid::uniform(-5, 5, 200), -8.0, OracleFamily::OU);
  corr::KernelFn discrete = [&](const kernels::SpaceTimePoint& p, const kernels::SpaceTimePoint& q) {
    return dk.kernel(p, q);
  };
  auto analytic = corr::make_kernel(corr::Family::DBM);
  auto x = [&](int i) { return dk.grid.points[i]; };
  std::vector<kernels::SpaceTimePoint> pts{{2, 0.3, x(90)}, {2, 0.8, x(110)}, {1, 0.8, x(100)}};
  auto rep = corr::gauge_compare(discrete, analytic, pts, 2e-2, 2);
  EXPECT_TRUE(rep.pass) << rep.max_deviation;
}

TEST(Oracle, Validation) {
  auto g = Grid::uniform(-5, 5, 50);
  EXPECT_THROW((PathDescriptor{{1, 2}, {0.1, 0.1}}.validate()), DomainError);
  EXPECT_THROW((PathDescriptor{{2, 2}, {0.1, 0.1}}.validate()), DomainError);
  EXPECT_THROW((PathDescriptor{{3, 1}, {0.1, 0.1}}.validate()), DomainError);
  EXPECT_THROW((PathDescriptor{{2, 1}, {0.1, 0.3}}.validate()), DomainError);
  EXPECT_THROW((PathDescriptor{{1}, {}}.validate()), DomainError);
  EXPECT_THROW(discretized_minor_kernel({{1}, {0.5}}, g, -6.0, OracleFamily::OU), DomainError);
  EXPECT_THROW(discretized_minor_kernel({{1}, {0.0}}, g, -8.0, OracleFamily::Warren), DomainError);
  EXPECT_THROW(discretized_minor_kernel({{2, 2, 2, 1}, {0.1, 0.2, 0.3, 0.3}}, Grid::uniform(-5, 5, 600), -8.0,
                                        OracleFamily::OU),
               ConfigError);
  EXPECT_THROW(Grid::uniform(1, 0, 10), ConfigError);
  EXPECT_THROW(Grid::uniform(0, 1, 1), ConfigError);
  auto dk = discretized_minor_kernel({{1}, {0.5}}, g, -8.0, OracleFamily::OU);
  EXPECT_THROW(dk.index_of(0.01234), DomainError);
  EXPECT_THROW(dk.path_index(2, 0.5), DomainError);
}

TEST(Oracle, Json) {
  PathDescriptor path{{1}, {0.5}};
  auto g = Grid::uniform(-5, 5, 20);
  auto dk = discretized_minor_kernel(path, g, -8.0, OracleFamily::OU);
  auto j = nlohmann::json::parse(to_json(path, g, -8.0, OracleFamily::OU, dk));
  EXPECT_EQ(j["family"], "ou");
  EXPECT_EQ(j["u"], -8.0);
  EXPECT_EQ(j["path"]["levels"][0], 1);
  EXPECT_TRUE(j.contains("condition_estimate"));
  EXPECT_TRUE(j.contains("rho1"));
}
