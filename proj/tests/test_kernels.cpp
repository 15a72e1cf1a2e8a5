#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dbmk/errors.hpp"
#include "dbmk/kernels.hpp"
#include "oracles.hpp"

using namespace dbmk;
using namespace dbmk::kernels;

namespace {

const double kPi = std::acos(-1.0);
const double kInvSqrtPi = 1.0 / std::sqrt(kPi);

KernelEvalConfig with(Representation r, ContourMethod m = ContourMethod::Auto) {
  KernelEvalConfig c;
  c.representation = r;
  c.contour_method = m;
  c.fallback_to_contour = false;
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Spacelike, Compare) {
  EXPECT_EQ(spacelike_compare({3, 1, 0}, {3, 1, 5}), Order::GeqOrEqual);
  EXPECT_EQ(spacelike_compare({2, 1, 0}, {1, 2, 0}), Order::Less);
  EXPECT_EQ(spacelike_compare({1, 2, 0}, {2, 1, 0}), Order::GeqOrEqual);
  EXPECT_EQ(spacelike_compare({2, 0.5, 0}, {2, 1, 0}), Order::Less);
  EXPECT_EQ(spacelike_compare({2, 1, 0}, {2, 0.5, 0}), Order::GeqOrEqual);
}

TEST(Dbm, DiagonalExamples) {
  for (double t : {0.0, 0.4, 3.0}) {
    EXPECT_NEAR(kernel_dbm({1, t, 0}, {1, t, 0}), kInvSqrtPi, 1e-14);
    EXPECT_NEAR(kernel_dbm({2, t, 0}, {2, t, 0}), kInvSqrtPi, 1e-14);
  }
  for (int n = 1; n <= 4; ++n) {
    for (double x : {-2.5, -1.0, 0.0, 0.3, 1.7}) {
      EXPECT_NEAR(kernel_dbm({n, 0.7, x}, {n, 0.7, x}), oracle::gue_level_density(n, x), 1e-12);
    }
  }
}

TEST(Dbm, SeriesMatchesContour) {
  SpaceTimePoint p{2, 0.1, 0.3}, pp{1, 0.5, -0.2};
  auto s = eval_dbm(p, pp, with(Representation::Series));
  auto q = eval_dbm(p, pp, with(Representation::Contour, ContourMethod::Quadrature));
  auto r = eval_dbm(p, pp, with(Representation::Contour, ContourMethod::Residue));
  EXPECT_EQ(s.used, Representation::Series);
  EXPECT_EQ(q.used, Representation::Contour);
  EXPECT_LE(std::abs(s.value - q.value), 1e-8 * std::abs(s.value));
  EXPECT_LE(std::abs(s.value - r.value), 1e-8 * std::abs(s.value));
  EXPECT_LE(std::abs(q.imag), 1e-10);
}

TEST(Dbm, EqualTimesIsGueMinorKernel) {
  for (int n = 1; n <= 5; ++n) {
    for (int np = 1; np <= 5; ++np) {
      for (double x : {-1.2, 0.0, 0.9}) {
        for (double xp : {-0.4, 0.5, 1.5}) {
          double got = kernel_dbm({n, 0.6, x}, {np, 0.6, xp});
          double ref = oracle::gue_minor_kernel(n, x, np, xp);
          EXPECT_NEAR(got, ref, 1e-9) << n << " " << np << " " << x << " " << xp;
        }
      }
    }
  }
}

TEST(Dbm, EqualTimesGue2TwoLevelDensity) {
  for (double x : {-1.1, -0.2, 0.3, 0.8}) {
    for (double y : {-0.7, 0.0, 0.5, 1.2}) {
      SpaceTimePoint p{2, 0.5, x}, q{1, 0.5, y};
      double rho = kernel_dbm(p, p) * kernel_dbm(q, q) - kernel_dbm(p, q) * kernel_dbm(q, p);
      EXPECT_NEAR(rho, oracle::gue2_minor_pair_density(x, y), 1e-10) << x << " " << y;
    }
  }
}

TEST(Dbm, EqualLevelsIsExtendedOu) {
  for (int n = 1; n <= 5; ++n) {
    for (double t : {0.0, 0.3, 1.0}) {
      for (double tp : {0.0, 0.2, 1.5}) {
        for (double x : {-0.8, 0.4}) {
          for (double xp : {-1.1, 0.0, 0.6}) {
            double got = kernel_dbm({n, t, x}, {n, tp, xp});
            double ref = oracle::extended_ou_kernel(n, t, x, tp, xp);
            EXPECT_NEAR(got, ref, 1e-9) << n << " " << t << " " << tp << " " << x << " " << xp;
          }
        }
      }
    }
  }
}

TEST(Dbm, DiagonalPositive) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-4.0, 4.0), ut(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    int n = 1 + static_cast<int>(rng() % 12);
    SpaceTimePoint p{n, ut(rng), ux(rng)};
    EXPECT_GE(kernel_dbm(p, p), 0.0);
    EXPECT_GE(kernel_warren({n, p.t + 0.1, p.x}, {n, p.t + 0.1, p.x}), 0.0);
  }
}

TEST(Dbm, DomainErrors) {
  EXPECT_THROW(kernel_dbm({0, 0.0, 0.0}, {1, 0.0, 0.0}), DomainError);
  EXPECT_THROW(kernel_dbm({1, -0.1, 0.0}, {1, 0.0, 0.0}), DomainError);
  // Less with t > t' is not on a space-like path.
  EXPECT_THROW(kernel_dbm({2, 1.0, 0.0}, {1, 0.5, 0.0}), DomainError);
  KernelEvalConfig bad;
  bad.l_max = 0;
  EXPECT_THROW(kernel_dbm({2, 0.0, 0.0}, {1, 1.0, 0.0}, bad), ConfigError);
}

TEST(Dbm, EqualTimeLessFallsBackToContour) {
  auto v = eval_dbm({3, 0.5, 0.2}, {1, 0.5, -0.3});
  EXPECT_EQ(v.used, Representation::Contour);
  EXPECT_NEAR(v.value, oracle::gue_minor_kernel(3, 0.2, 1, -0.3), 1e-9);
  KernelEvalConfig strict = with(Representation::Series);
  EXPECT_THROW(eval_dbm({3, 0.5, 0.2}, {1, 0.5, -0.3}, strict), ConvergenceError);
}

TEST(Warren, Examples) {
  EXPECT_NEAR(kernel_warren({1, 1, 0}, {1, 1, 0}), kInvSqrtPi, 1e-14);
  SpaceTimePoint p{2, 1.0, 0.3}, pp{1, 2.0, -0.1};
  auto s = eval_warren(p, pp, with(Representation::Series));
  auto q = eval_warren(p, pp, with(Representation::Contour, ContourMethod::Quadrature));
  auto r = eval_warren(p, pp, with(Representation::Contour, ContourMethod::Residue));
  EXPECT_LE(rel(q.value, s.value), 1e-8);
  EXPECT_LE(rel(r.value, s.value), 1e-8);
  EXPECT_THROW(kernel_warren({1, 0.0, 0}, {1, 1, 0}), DomainError);
  EXPECT_THROW(kernel_warren({1, 1.0, 0}, {1, -1, 0}), DomainError);
}

TEST(Warren, ChangeOfVariables) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), ut(1.0, 4.0);
  int checked = 0;
  while (checked < 5) {
    int n = 1 + static_cast<int>(rng() % 4), np = 1 + static_cast<int>(rng() % 4);
    double t = ut(rng), tp = ut(rng), x = ux(rng), xp = ux(rng);
    SpaceTimePoint a{n, t, 0}, b{np, tp, 0};
    bool less = spacelike_compare(a, b) == Order::Less;
    if (less && tp <= t) continue;
    if (!less && (n > np || tp > t)) continue;
    double w = kernel_warren({n, t, x * std::sqrt(t)}, {np, tp, xp * std::sqrt(tp)});
    double d = kernel_dbm({n, 0.5 * std::log(t), x}, {np, 0.5 * std::log(tp), xp});
    EXPECT_NEAR(w, d / std::sqrt(t), 1e-9) << n << " " << t << " " << np << " " << tp;
    ++checked;
  }
}

TEST(Representations, GridAgreement) {
  auto grid = representation_grid();
  ASSERT_EQ(grid.size(), 30u);
  for (const auto& c : grid) {
    double s = kernel_dbm(c.p, c.pp, with(Representation::Series));
    double q = kernel_dbm(c.p, c.pp, with(Representation::Contour, ContourMethod::Quadrature));
    EXPECT_LE(rel(q, s), 1e-7) << c.p.n << "," << c.p.t << "," << c.p.x << " " << c.pp.n << "," << c.pp.t << ","
                               << c.pp.x;
    double sw = std::pow(2.0, 0.5 * (c.p.n - c.pp.n)) * kernel_warren(c.p, c.pp, with(Representation::Series));
    double qw = std::pow(2.0, 0.5 * (c.p.n - c.pp.n)) *
                kernel_warren(c.p, c.pp, with(Representation::Contour, ContourMethod::Quadrature));
    EXPECT_LE(rel(qw, sw), 1e-7);
  }
  EXPECT_THROW(representation_grid({1.0, 1.0}), DomainError);
  EXPECT_THROW(representation_grid({1.0}), DomainError);
}

TEST(Representations, CrossProducts) {
  for (const auto& c : representation_grid()) {
    if (spacelike_compare(c.p, c.pp) != Order::Less) continue;
    double s = kernel_dbm(c.p, c.pp, with(Representation::Series)) *
               kernel_dbm(c.pp, c.p, with(Representation::Series));
    double q = kernel_dbm(c.p, c.pp, with(Representation::Contour)) *
               kernel_dbm(c.pp, c.p, with(Representation::Contour));
    EXPECT_LE(rel(q, s), 1e-7);
  }
}

TEST(Bead, Examples) {
  BeadParam a0(0.0);
  EXPECT_NEAR(kernel_bead(a0, {0, 0, 0}, {0, 0, 0}), 1.0 / kPi, 1e-14);
  for (double s = -5.0; s <= 5.0; s += 0.125) {
    EXPECT_NEAR(kernel_bead(a0, {1, 0.3, s}, {1, 0.3, 0.0}), oracle::sine_kernel(s), 1e-9) << s;
  }
  BeadParam a(0.6);
  for (double s : {-2.0, 0.5, 3.0}) {
    double ref = std::exp(0.6 * s) * std::sin(0.8 * s) / (kPi * s);
    EXPECT_NEAR(kernel_bead(a, {2, 0, s}, {2, 0, 0}), ref, 1e-12);
  }
  EXPECT_THROW(BeadParam(1.0), DomainError);
  EXPECT_THROW(BeadParam(-1.5), DomainError);
}

TEST(Bead, TranslationInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), ut(0.0, 1.0), ua(-0.8, 0.8);
  for (int i = 0; i < 40; ++i) {
    BeadParam a(ua(rng));
    int n = static_cast<int>(rng() % 3), np = static_cast<int>(rng() % 3) - 1;
    double t = ut(rng), tp = t + ut(rng), x = ux(rng), xp = ux(rng);
    SpaceTimePoint p{n, t, x}, pp{np, tp, xp};
    if (spacelike_compare(p, pp) != Order::Less) std::swap(t, tp), p.t = t, pp.t = tp;
    double v0 = kernel_bead(a, p, pp);
    double v1 = kernel_bead(a, {p.n, p.t, p.x + 1.3}, {pp.n, pp.t, pp.x + 1.3});
    EXPECT_NEAR(v0, v1, 1e-12) << a.a << " " << n << " " << np;
  }
}

TEST(Adbm, Examples) {
  // Level 1 has no surviving term: every index n + 2l is negative.
  EXPECT_EQ(kernel_adbm({1, 0.4, 0}, {1, 0.4, 0}), 0.0);
  EXPECT_NEAR(kernel_adbm({2, 0.4, 0}, {2, 0.4, 0}), kInvSqrtPi, 1e-14);
  for (double x : {-1.0, 0.3, 2.0}) {
    double h0 = oracle::hermite_explicit(0, x), h2 = oracle::hermite_explicit(2, x);
    double h1 = oracle::hermite_explicit(1, x), h3 = oracle::hermite_explicit(3, x);
    EXPECT_NEAR(kernel_adbm({4, 1, x}, {4, 1, x}), (h0 * h0 + h2 * h2) * std::exp(-x * x), 1e-12);
    EXPECT_NEAR(kernel_adbm({5, 1, x}, {5, 1, x}), (h1 * h1 + h3 * h3) * std::exp(-x * x), 1e-12);
  }
}

TEST(Adbm, ParityAndPositivity) {
  for (int n = 1; n <= 6; ++n) {
    for (double x : {0.2, 0.9, 1.6}) {
      for (double xp : {-0.7, 0.4}) {
        EXPECT_NEAR(kernel_adbm({n, 0.5, x}, {n, 0.5, xp}), kernel_adbm({n, 0.5, -x}, {n, 0.5, -xp}), 1e-13);
      }
      EXPECT_GE(kernel_adbm({n, 0.5, x}, {n, 0.5, x}), 0.0);
    }
  }
  double less = kernel_adbm({3, 0.2, 0.1}, {2, 0.9, -0.3});
  EXPECT_TRUE(std::isfinite(less));
  EXPECT_THROW(kernel_adbm({1, 0, 0}, {1, 0, 0}, with(Representation::Contour)), ConfigError);
}

TEST(Phi, Examples) {
  EXPECT_EQ(phi_term(PhiKind::DBM, {2, 1, 0.4}, {3, 0.5, -0.2}), 0.0);
  double e2 = std::exp(2.0);
  EXPECT_NEAR(phi_term(PhiKind::DBM, {2, 0, 0}, {2, 1, 0}), e2 / std::sqrt(kPi * (1.0 - 1.0 / e2)), 1e-12);
  EXPECT_NEAR(phi_term(PhiKind::Bead, {0, 0, 0}, {0, 1, 0}, 0.0), 1.0 / std::sqrt(2.0 * kPi), 1e-12);
}

TEST(StepExpansion, MatchesQuadrature) {
  EXPECT_LE(oracle::step_expansion_max_error(3), 1e-7);
  auto r = step_expansion(sf::ScaleKind::Warren, 1, 1.0, 2.0, 0.5, -0.3);
  EXPECT_GT(r.terms, 0);
  EXPECT_THROW(step_expansion(sf::ScaleKind::Warren, 0, 1.0, 2.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(step_expansion(sf::ScaleKind::Warren, 1, 2.0, 1.0, 0.0, 0.0), DomainError);
}

TEST(Names, ToString) {
  EXPECT_EQ(to_string(Representation::Series), "series");
  EXPECT_EQ(to_string(ContourMethod::Residue), "residue");
}
