#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "hoist/mesh.hpp"

namespace hoist {

using SpMat = Eigen::SparseMatrix<double>;

// planar boundary eta . x = c with unit outward normal eta
struct PlanarBoundary {
  Vec normal;
  double offset = 0;
};

struct PlanarBoundarySet {
  std::vector<PlanarBoundary> walls;
  double tol = 1e-8;  // absolute membership tolerance (scaled by caller)
};

// indices of the boundaries passing through X; throws on rank deficiency
std::vector<int> classify_node(const Vec& X, const PlanarBoundarySet& bset);

// greedy unconstrained-coordinate selection: directions closest to the null
// space of B, ties broken by lowest index; returns (iu, ic)
std::pair<std::vector<int>, std::vector<int>> select_unconstrained(const Mat& B);

struct NodeConstraint {
  std::vector<int> active;  // boundary ids
  std::vector<int> iu, ic;  // coordinate index partition
  Mat A;                    // d x (d - Nc)
  Vec b;                    // d
};

// Block-diagonal affine parametrization x = A y + b of the physical nodes.
// x is node-major (x[I*d + c]); y stacks the unconstrained components.
class ParamMap {
 public:
  ParamMap() = default;
  ParamMap(const SimplexMesh& mesh, const PlanarBoundarySet& bset);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int dim() const { return d_; }
  const NodeConstraint& node(int I) const { return nodes_[I]; }
  int y_offset(int I) const { return y_off_[I]; }

  Vec apply(const Vec& y) const;
  // component extraction; max constraint violation of x reported through
  // *residual when given (a violation is projected out, not fatal)
  Vec invert(const Vec& x, double* residual = nullptr) const;

  const SpMat& A() const { return A_; }
  const Vec& b() const { return b_; }

 private:
  int d_ = 0, nx_ = 0, ny_ = 0;
  std::vector<NodeConstraint> nodes_;
  std::vector<int> y_off_;
  SpMat A_;
  Vec b_;
  Mat ref_;  // reference node coordinates, for violation checks
  double tol_ = 1e-8;
};

// flatten / unflatten physical node coordinates
Vec flatten_nodes(const Mat& nodes);
Mat unflatten_nodes(const Vec& x, int d);

}  // namespace hoist
