#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hoist {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// number of nodes of a degree-k nodal basis on the d-simplex
int simplex_basis_size(int d, int k);

// Equispaced nodes on the unit d-simplex in the element-local layout used
// throughout: vertices first, then edge nodes per edge (ordered along the
// edge), then interior nodes. k = 0 places a single node at the centroid.
Mat simplex_nodes(int d, int k);

// quadrature on the unit d-simplex (collapsed tensor Gauss/Gauss-Jacobi);
// weights positive, sum to the simplex volume, exact for total degree
// <= exactness
struct QuadRule {
  Mat points;   // nq x d
  Vec weights;  // nq
  int exactness = 0;
};

QuadRule simplex_quadrature(int d, int exactness);
QuadRule gauss_legendre_01(int n);  // [0,1], exact to degree 2n-1

// Orthonormal polynomial basis on the unit d-simplex (shifted Legendre for
// d=1, Dubiner for d=2). Columns of eval() are basis functions.
struct OrthoBasis {
  int dim = 1;
  int degree = 0;
  int size() const { return simplex_basis_size(dim, degree); }
  Mat eval(const Mat& pts) const;                 // npts x n
  std::vector<Mat> grad(const Mat& pts) const;    // d matrices, npts x n
};

// Lagrange basis at equispaced simplex nodes, built on the orthonormal basis
class NodalBasis {
 public:
  NodalBasis() = default;
  NodalBasis(int d, int k);

  int dim() const { return ortho_.dim; }
  int degree() const { return ortho_.degree; }
  int size() const { return n_; }
  const Mat& nodes() const { return nodes_; }

  Mat eval(const Mat& pts) const;               // npts x n, psi_I(pt)
  std::vector<Mat> grad(const Mat& pts) const;  // d matrices, npts x n

 private:
  OrthoBasis ortho_;
  Mat nodes_;
  Mat coeff_;  // n x n, psi = coeff * phi
  int n_ = 0;
};

// ----- element-local topology helpers (unit simplex) ---------------------

// vertex ids (element-local, in the vertices-first layout) of local face f;
// d=2 faces are edges traversed counter-clockwise, d=1 faces are endpoints
std::vector<int> face_vertices(int d, int f);

// local node ids (degree-k layout) lying on local face f, ordered along the
// face parametrization s in [0,1]
std::vector<int> face_nodes(int d, int k, int f);

// map face parameter points (nfp x 1) to simplex coordinates (nfp x d)
Mat face_to_simplex(int d, int f, const Vec& s);

// outward Nanson vector of local face f of the unit simplex (constant);
// its norm is the face measure scale relative to the parameter s
Vec face_master_normal(int d, int f);

}  // namespace hoist
