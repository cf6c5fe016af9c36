#include "hoist/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace hoist {

namespace {

// Jacobi polynomial P_n^(alpha,beta) on [-1,1], standard three-term recurrence
double jacobi(int n, double alpha, double beta, double x) {
  if (n == 0) return 1.0;
  double pm1 = 1.0;
  double p = 0.5 * ((alpha + beta + 2.0) * x + (alpha - beta));
  for (int k = 1; k < n; ++k) {
    double a = 2.0 * (k + 1) * (k + alpha + beta + 1) * (2 * k + alpha + beta);
    double b = (2 * k + alpha + beta + 1) * (alpha * alpha - beta * beta);
    double c = (2 * k + alpha + beta) * (2 * k + alpha + beta + 1) * (2 * k + alpha + beta + 2);
    double d = 2.0 * (k + alpha) * (k + beta) * (2 * k + alpha + beta + 2);
    double pp = ((b + c * x) * p - d * pm1) / a;
    pm1 = p;
    p = pp;
  }
  return p;
}

// squared L2 norm of P_n^(alpha,beta) under the weight (1-x)^a (1+x)^b
double jacobi_norm2(int n, double alpha, double beta) {
  double num = std::lgamma(n + alpha + 1) + std::lgamma(n + beta + 1);
  double den = std::lgamma(n + alpha + beta + 1) + std::lgamma(n + 1.0);
  return std::pow(2.0, alpha + beta + 1) / (2 * n + alpha + beta + 1) * std::exp(num - den);
}

double jacobi_normalized(int n, double alpha, double beta, double x) {
  return jacobi(n, alpha, beta, x) / std::sqrt(jacobi_norm2(n, alpha, beta));
}

double grad_jacobi_normalized(int n, double alpha, double beta, double x) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + alpha + beta + 1)) * jacobi_normalized(n - 1, alpha + 1, beta + 1, x);
}

// Golub-Welsch nodes/weights for the weight (1-x)^alpha (1+x)^beta on [-1,1]
void gauss_jacobi(int n, double alpha, double beta, Vec& x, Vec& w) {
  Mat J = Mat::Zero(n, n);
  auto ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    double denom = (2 * k + ab) * (2 * k + ab + 2);
    J(k, k) = (k == 0 && ab == 0.0) ? 0.0 : (beta * beta - alpha * alpha) / denom;
  }
  for (int k = 1; k < n; ++k) {
    double b = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
               ((2 * k + ab) * (2 * k + ab) * (2 * k + ab + 1) * (2 * k + ab - 1));
    J(k, k - 1) = J(k - 1, k) = std::sqrt(b);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  x = es.eigenvalues();
  double mu0 = std::pow(2.0, ab + 1) *
               std::exp(std::lgamma(alpha + 1) + std::lgamma(beta + 1) - std::lgamma(ab + 2));
  w = Vec(n);
  for (int k = 0; k < n; ++k) {
    double v0 = es.eigenvectors()(0, k);
    w[k] = mu0 * v0 * v0;
  }
}

}  // namespace

int simplex_basis_size(int d, int k) {
  if (d == 1) return k + 1;
  return (k + 1) * (k + 2) / 2;
}

Mat simplex_nodes(int d, int k) {
  if (k == 0) {
    Mat n(1, d);
    for (int c = 0; c < d; ++c) n(0, c) = 1.0 / (d + 1);
    return n;
  }
  if (d == 1) {
    Mat n(k + 1, 1);
    n(0, 0) = 0.0;
    n(1, 0) = 1.0;
    for (int i = 1; i < k; ++i) n(1 + i, 0) = double(i) / k;
    return n;
  }
  Mat n(simplex_basis_size(2, k), 2);
  n.row(0) << 0, 0;
  n.row(1) << 1, 0;
  n.row(2) << 0, 1;
  int idx = 3;
  const double vx[3][2] = {{0, 0}, {1, 0}, {0, 1}};
  for (int e = 0; e < 3; ++e) {
    int a = e, b = (e + 1) % 3;
    for (int j = 1; j < k; ++j, ++idx) {
      double s = double(j) / k;
      n(idx, 0) = (1 - s) * vx[a][0] + s * vx[b][0];
      n(idx, 1) = (1 - s) * vx[a][1] + s * vx[b][1];
    }
  }
  for (int i = 1; i + 1 < k; ++i)
    for (int j = 1; i + j <= k - 1; ++j, ++idx) n.row(idx) << double(i) / k, double(j) / k;
  return n;
}

QuadRule gauss_legendre_01(int n) {
  Vec x, w;
  gauss_jacobi(n, 0.0, 0.0, x, w);
  QuadRule q;
  q.points = Mat(n, 1);
  q.weights = Vec(n);
  for (int i = 0; i < n; ++i) {
    q.points(i, 0) = 0.5 * (x[i] + 1.0);
    q.weights[i] = 0.5 * w[i];
  }
  q.exactness = 2 * n - 1;
  return q;
}

QuadRule simplex_quadrature(int d, int exactness) {
  int n = std::max(1, (exactness + 2) / 2);
  if (d == 1) return gauss_legendre_01(n);
  if (d != 2) throw std::invalid_argument("simplex_quadrature: d must be 1 or 2");
  // Duffy collapse of the unit square: x = u (1 - v), y = v; the (1 - v)
  // factor is absorbed by a Gauss-Jacobi rule in v
  QuadRule qu = gauss_legendre_01(n);
  Vec xv, wv;
  gauss_jacobi(n, 1.0, 0.0, xv, wv);
  QuadRule q;
  q.points = Mat(n * n, 2);
  q.weights = Vec(n * n);
  int idx = 0;
  for (int i = 0; i < n; ++i) {
    double v = 0.5 * (xv[i] + 1.0);
    double w_v = 0.25 * wv[i];
    for (int j = 0; j < n; ++j, ++idx) {
      q.points(idx, 0) = qu.points(j, 0) * (1.0 - v);
      q.points(idx, 1) = v;
      q.weights[idx] = qu.weights[j] * w_v;
    }
  }
  q.exactness = 2 * n - 1;
  return q;
}

// ----- orthonormal basis --------------------------------------------------

Mat OrthoBasis::eval(const Mat& pts) const {
  int np = int(pts.rows());
  Mat out(np, size());
  if (dim == 1) {
    for (int q = 0; q < np; ++q) {
      double x = 2.0 * pts(q, 0) - 1.0;
      for (int n = 0; n <= degree; ++n)
        out(q, n) = std::sqrt(2.0) * jacobi_normalized(n, 0, 0, x);
    }
    return out;
  }
  for (int q = 0; q < np; ++q) {
    double r = 2.0 * pts(q, 0) - 1.0, s = 2.0 * pts(q, 1) - 1.0;
    double b = s;
    double a = (std::abs(1.0 - s) < 1e-14) ? -1.0 : 2.0 * (1.0 + r) / (1.0 - s) - 1.0;
    int col = 0;
    for (int deg = 0; deg <= degree; ++deg)
      for (int i = deg; i >= 0; --i, ++col) {
        int j = deg - i;
        double fa = jacobi_normalized(i, 0, 0, a);
        double gb = jacobi_normalized(j, 2 * i + 1, 0, b);
        out(q, col) = 2.0 * std::sqrt(2.0) * fa * gb * std::pow(1.0 - b, i);
      }
  }
  return out;
}

std::vector<Mat> OrthoBasis::grad(const Mat& pts) const {
  int np = int(pts.rows());
  std::vector<Mat> out(dim, Mat(np, size()));
  if (dim == 1) {
    for (int q = 0; q < np; ++q) {
      double x = 2.0 * pts(q, 0) - 1.0;
      for (int n = 0; n <= degree; ++n)
        out[0](q, n) = 2.0 * std::sqrt(2.0) * grad_jacobi_normalized(n, 0, 0, x);
    }
    return out;
  }
  for (int q = 0; q < np; ++q) {
    double r = 2.0 * pts(q, 0) - 1.0, s = 2.0 * pts(q, 1) - 1.0;
    double b = s;
    double a = (std::abs(1.0 - s) < 1e-14) ? -1.0 : 2.0 * (1.0 + r) / (1.0 - s) - 1.0;
    int col = 0;
    for (int deg = 0; deg <= degree; ++deg)
      for (int i = deg; i >= 0; --i, ++col) {
        int j = deg - i;
        double fa = jacobi_normalized(i, 0, 0, a);
        double dfa = grad_jacobi_normalized(i, 0, 0, a);
        double gb = jacobi_normalized(j, 2 * i + 1, 0, b);
        double dgb = grad_jacobi_normalized(j, 2 * i + 1, 0, b);
        double pw = (i > 0) ? std::pow(0.5 * (1.0 - b), i - 1) : 0.0;
        double dmdr = dfa * gb * ((i > 0) ? pw : 1.0);
        double dmds = dfa * gb * 0.5 * (1.0 + a) * ((i > 0) ? pw : 1.0);
        double tmp = dgb * std::pow(0.5 * (1.0 - b), i);
        if (i > 0) tmp -= 0.5 * i * gb * pw;
        dmds += fa * tmp;
        double scale = std::pow(2.0, i + 0.5);
        // unit-triangle basis is 2x biunit value, chain rule adds another 2x
        out[0](q, col) = 4.0 * scale * dmdr;
        out[1](q, col) = 4.0 * scale * dmds;
      }
  }
  return out;
}

// ----- nodal basis ---------------------------------------------------------

NodalBasis::NodalBasis(int d, int k) {
  ortho_.dim = d;
  ortho_.degree = k;
  nodes_ = simplex_nodes(d, k);
  n_ = simplex_basis_size(d, k);
  Mat V = ortho_.eval(nodes_);  // V(I, j) = phi_j(node_I)
  coeff_ = V.inverse().transpose();
}

Mat NodalBasis::eval(const Mat& pts) const {
  return ortho_.eval(pts) * coeff_.transpose();
}

std::vector<Mat> NodalBasis::grad(const Mat& pts) const {
  auto g = ortho_.grad(pts);
  for (auto& gd : g) gd = (gd * coeff_.transpose()).eval();
  return g;
}

// ----- face topology -------------------------------------------------------

std::vector<int> face_vertices(int d, int f) {
  if (d == 1) return {f};
  switch (f) {
    case 0: return {0, 1};
    case 1: return {1, 2};
    case 2: return {2, 0};
  }
  throw std::invalid_argument("face_vertices: bad face");
}

std::vector<int> face_nodes(int d, int k, int f) {
  if (d == 1) return {f};
  auto fv = face_vertices(2, f);
  std::vector<int> ids;
  ids.push_back(fv[0]);
  for (int j = 1; j < k; ++j) ids.push_back(3 + f * (k - 1) + (j - 1));
  ids.push_back(fv[1]);
  return ids;
}

Mat face_to_simplex(int d, int f, const Vec& s) {
  if (d == 1) {
    Mat pts(1, 1);
    pts(0, 0) = (f == 0) ? 0.0 : 1.0;
    return pts;
  }
  Mat pts(s.size(), 2);
  const double vx[3][2] = {{0, 0}, {1, 0}, {0, 1}};
  auto fv = face_vertices(2, f);
  for (int i = 0; i < s.size(); ++i) {
    pts(i, 0) = (1 - s[i]) * vx[fv[0]][0] + s[i] * vx[fv[1]][0];
    pts(i, 1) = (1 - s[i]) * vx[fv[0]][1] + s[i] * vx[fv[1]][1];
  }
  return pts;
}

Vec face_master_normal(int d, int f) {
  Vec n(d);
  if (d == 1) {
    n[0] = (f == 0) ? -1.0 : 1.0;
    return n;
  }
  switch (f) {
    case 0: n << 0, -1; break;
    case 1: n << 1, 1; break;
    case 2: n << -1, 0; break;
    default: throw std::invalid_argument("face_master_normal: bad face");
  }
  return n;
}

}  // namespace hoist
