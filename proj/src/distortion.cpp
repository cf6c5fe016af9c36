#include "hoist/distortion.hpp"

namespace hoist {

namespace {

// smooth positive part and its derivative
double pos_part(double x, double delta, double* dpos = nullptr) {
  double s = std::sqrt(x * x + delta * delta);
  if (dpos) *dpos = 0.5 * (1.0 + x / s);
  return 0.5 * (x + s);
}

// master -> ideal affine jacobian for the regular simplex of unit volume
Mat regular_simplex_map(int d) {
  if (d == 1) return Mat::Identity(1, 1);
  double a = 2.0 / std::pow(3.0, 0.25);  // side of the unit-area equilateral
  Mat T(2, 2);
  T << a, 0.5 * a, 0.0, 0.5 * std::sqrt(3.0) * a;
  return T;
}

struct PointWork {
  double val = 0;
  Mat dval_dJ;  // derivative wrt the master->physical jacobian
};

// integrand (|W|_F^2 / (d det(W)_+^{2/d}))^2 with W = J M^{-1}
void integrand(const Mat& J, const Mat& Minv, double delta, bool want_grad,
               PointWork& out) {
  int d = int(J.rows());
  Mat W = J * Minv;
  double a = W.squaredNorm();
  double dpos;
  double b = pos_part(W.determinant(), delta, &dpos);
  double bp = std::pow(b, 2.0 / d);
  double r = a / (d * bp);
  out.val = r * r;
  if (!want_grad) return;
  // dI/dW = 2r [ 2W/(d b^{2/d}) - (2/d) a adj(W)^T pos' / (d b^{2/d+1}) ]
  Mat adjT = W.determinant() * W.inverse().transpose();  // d(det)/dW
  Mat dI_dW =
      2.0 * r * (2.0 * W / (d * bp) - (2.0 / d) * a * dpos * adjT / (d * bp * b));
  out.dval_dJ = dI_dW * Minv.transpose();
}

}  // namespace

double element_distortion(const SimplexMesh& mesh, int e, const DistortionOptions& opt) {
  Vec Rmsh;
  // reuse the assembled path on a single element by evaluating directly
  int d = mesh.dim(), q = mesh.degree();
  QuadRule rule = simplex_quadrature(d, 4 * q);
  NodalBasis geo(d, q);
  auto dgeo = geo.grad(rule.points);
  const auto& en = mesh.elem_nodes(e);

  double vol_master = (d == 1) ? 1.0 : 0.5;
  double acc = 0, wsum = 0;
  Mat Treg = regular_simplex_map(d);
  Mat Treg_inv = Treg.inverse();
  for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
    Mat J = Mat::Zero(d, d), JX = Mat::Zero(d, d);
    for (int i = 0; i < mesh.nodes_per_elem(); ++i)
      for (int c = 0; c < d; ++c)
        for (int k = 0; k < d; ++k) {
          J(c, k) += mesh.phys_nodes()(en[i], c) * dgeo[k](qpt, i);
          JX(c, k) += mesh.ref_nodes()(en[i], c) * dgeo[k](qpt, i);
        }
    PointWork pw;
    if (opt.ideal == IdealElement::regular) {
      integrand(J, Treg_inv, opt.smoothing, false, pw);
      acc += rule.weights[qpt] / vol_master * pw.val;
    } else {
      integrand(J, JX.inverse(), opt.smoothing, false, pw);
      double detX = JX.determinant();
      acc += rule.weights[qpt] * detX * pw.val;
      wsum += rule.weights[qpt] * detX;
    }
  }
  double val = (opt.ideal == IdealElement::regular) ? acc : acc / wsum;
  return std::min(val, opt.cap);
}

void assemble_distortion(const SimplexMesh& mesh, const DistortionOptions& opt, Vec* Rmsh,
                         SpMat* dRmsh_dx) {
  int d = mesh.dim(), q = mesh.degree();
  int ngeo = mesh.nodes_per_elem();
  QuadRule rule = simplex_quadrature(d, 4 * q);
  NodalBasis geo(d, q);
  auto dgeo = geo.grad(rule.points);
  double vol_master = (d == 1) ? 1.0 : 0.5;
  Mat Treg_inv = regular_simplex_map(d).inverse();
  bool want_grad = dRmsh_dx != nullptr;

  Vec vals = Vec::Zero(mesh.n_elems());
  std::vector<std::vector<Eigen::Triplet<double>>> trips(mesh.n_elems());

#pragma omp parallel for schedule(static)
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& en = mesh.elem_nodes(e);
    double acc = 0, wsum = 0;
    Mat grad = Mat::Zero(ngeo, d);
    for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
      Mat J = Mat::Zero(d, d), JX = Mat::Zero(d, d);
      for (int i = 0; i < ngeo; ++i)
        for (int c = 0; c < d; ++c)
          for (int k = 0; k < d; ++k) {
            J(c, k) += mesh.phys_nodes()(en[i], c) * dgeo[k](qpt, i);
            JX(c, k) += mesh.ref_nodes()(en[i], c) * dgeo[k](qpt, i);
          }
      PointWork pw;
      double w;
      if (opt.ideal == IdealElement::regular) {
        integrand(J, Treg_inv, opt.smoothing, want_grad, pw);
        w = rule.weights[qpt] / vol_master;
      } else {
        double detX = JX.determinant();
        integrand(J, JX.inverse(), opt.smoothing, want_grad, pw);
        w = rule.weights[qpt] * detX;
        wsum += w;
      }
      acc += w * pw.val;
      if (want_grad)
        for (int i = 0; i < ngeo; ++i)
          for (int c = 0; c < d; ++c) {
            double s = 0;
            for (int k = 0; k < d; ++k) s += pw.dval_dJ(c, k) * dgeo[k](qpt, i);
            grad(i, c) += w * s;
          }
    }
    double denom = (opt.ideal == IdealElement::regular) ? 1.0 : wsum;
    double val = acc / denom;
    if (val >= opt.cap) {
      vals[e] = opt.cap;  // flat past the cap
      continue;
    }
    vals[e] = val;
    if (want_grad)
      for (int i = 0; i < ngeo; ++i)
        for (int c = 0; c < d; ++c) {
          double v = grad(i, c) / denom;
          if (v != 0.0) trips[e].push_back({e, en[i] * d + c, v});
        }
  }

  if (Rmsh) *Rmsh = vals;
  if (dRmsh_dx) {
    std::vector<Eigen::Triplet<double>> all;
    for (auto& tv : trips) all.insert(all.end(), tv.begin(), tv.end());
    dRmsh_dx->resize(mesh.n_elems(), mesh.n_nodes() * d);
    dRmsh_dx->setFromTriplets(all.begin(), all.end());
  }
}

}  // namespace hoist
