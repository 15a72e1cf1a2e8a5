#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "dbmk/kernels.hpp"

namespace dbmk::em {

using Matrix = Eigen::MatrixXd;

struct FredholmCheck {
  double lhs = 0.0;  // det(I + M)
  double rhs = 0.0;  // sum over subsets X of det M_X
};

// Refuses matrices larger than 12 x 12.
FredholmCheck fredholm_expansion_check(const Matrix& m);

// det of the principal submatrix on `idx` (1 for the empty set).
double principal_minor(const Matrix& m, const std::vector<int>& idx);

// K* = 1_N - (1_N + L)^{-1} restricted to the retained indices, where 1_N
// is the identity on the retained indices and 0 elsewhere. Throws
// ConditioningError when 1_N + L is numerically singular.
Matrix projected_kernel(const Matrix& l, const std::vector<int>& retained);

// Equal-count L matrix: phantom indices first, then layers 0..N with
// Phi : p x |X0|, W_n : |Xn| x |Xn+1|, Psi : |XN| x p.
Matrix assemble_l(const Matrix& phi, const std::vector<Matrix>& w, const Matrix& psi);

// Blocks K*_{n,m} = W_[n,N) Psi M^{-1} Phi W_[0,m) - W_[n,m) for the layers
// 0..N, with the empty product W_[N,N) read as the identity in the first
// term and W_[n,m) = 0 for n >= m in the second.
std::vector<std::vector<Matrix>> em_block_kernel(const Matrix& phi, const std::vector<Matrix>& w,
                                                 const Matrix& psi);

// W_[n,m) as defined above (n < m: product, otherwise zero of the right shape).
Matrix w_range(const std::vector<Matrix>& w, int n, int m);

struct Grid {
  std::vector<double> points;
  double cell_weight = 0.0;

  static Grid uniform(double lo, double hi, int count);
  void validate() const;
};

enum class StepKind { Space, Time };

struct PathDescriptor {
  std::vector<int> levels;
  std::vector<double> times;

  // steps[m] describes m -> m+1; the last index is always a down step to
  // level 0 (the virtual particles).
  std::vector<StepKind> steps() const;
  // tau[k-1] = index of the k-th down step, counted from the end.
  std::vector<int> down_steps() const;
  void validate() const;
};

enum class OracleFamily { OU, Warren };

struct BlockLEnsemble {
  Grid grid;
  PathDescriptor path;
  double u = -8.0;
  OracleFamily family = OracleFamily::OU;
  Matrix l;            // phantoms first, then one grid copy per path index
  int phantoms = 0;

  static BlockLEnsemble assemble(const PathDescriptor& path, const Grid& grid, double u,
                                 OracleFamily family);
  int offset(int m) const { return phantoms + m * static_cast<int>(grid.points.size()); }
};

struct DiscreteKernel {
  Grid grid;
  PathDescriptor path;
  Matrix k;  // grid part of K*, already divided by the cell weight
  double condition_estimate = 0.0;

  // Kernel value between path indices (m, i) and (mp, j).
  double at(int m, int i, int mp, int j) const;
  std::vector<double> rho1(int m) const;
  double rho2(int m, int i, int mp, int j) const;
  // Grid index of a position (must be a grid point up to 1e-9 spacing).
  int index_of(double x) const;
  // Path index for (level, time).
  int path_index(int level, double time) const;
  // Lookup for points on the path and grid; throws DomainError otherwise.
  double kernel(const kernels::SpaceTimePoint& p, const kernels::SpaceTimePoint& q) const;
};

// Total dimension is capped at 2000.
DiscreteKernel discretized_minor_kernel(const PathDescriptor& path, const Grid& grid, double u,
                                        OracleFamily family);

std::string to_json(const PathDescriptor& path, const Grid& grid, double u, OracleFamily family,
                    const DiscreteKernel& k);

}  // namespace dbmk::em
