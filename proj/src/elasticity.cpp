#include "hoist/sqp.hpp"

namespace hoist {

// Isotropic linear elasticity stiffness on the reference mesh with modulus
// E_e = 1 / v0_e (plane strain for d = 2, bar stiffness for d = 1).
SpMat assemble_elasticity(const SimplexMesh& mesh, double nu) {
  int d = mesh.dim(), q = mesh.degree();
  int ngeo = mesh.nodes_per_elem();
  QuadRule rule = simplex_quadrature(d, 2 * q);
  NodalBasis geo(d, q);
  auto dgeo = geo.grad(rule.points);

  std::vector<Eigen::Triplet<double>> trips;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& en = mesh.elem_nodes(e);
    double v0 = mesh.element_measures(e).v0;
    double Emod = 1.0 / v0;
    Mat K = Mat::Zero(ngeo * d, ngeo * d);
    for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
      Mat JX = Mat::Zero(d, d);
      for (int i = 0; i < ngeo; ++i)
        for (int c = 0; c < d; ++c)
          for (int k = 0; k < d; ++k)
            JX(c, k) += mesh.ref_nodes()(en[i], c) * dgeo[k](qpt, i);
      double detX = JX.determinant();
      Mat JinvT = JX.inverse().transpose();
      // physical-gradient rows of the basis
      Mat G(ngeo, d);
      for (int i = 0; i < ngeo; ++i)
        for (int c = 0; c < d; ++c) {
          double s = 0;
          for (int k = 0; k < d; ++k) s += JinvT(c, k) * dgeo[k](qpt, i);
          G(i, c) = s;
        }
      double w = rule.weights[qpt] * detX * Emod;
      if (d == 1) {
        for (int i = 0; i < ngeo; ++i)
          for (int j = 0; j < ngeo; ++j) K(i, j) += w * G(i, 0) * G(j, 0);
      } else {
        double f = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu));
        double c11 = f * (1.0 - nu), c12 = f * nu, c33 = 0.5 / (1.0 + nu);
        auto Brow = [&](int i, int c, double* B) {
          B[0] = (c == 0) ? G(i, 0) : 0.0;        // eps_xx
          B[1] = (c == 1) ? G(i, 1) : 0.0;        // eps_yy
          B[2] = (c == 0) ? G(i, 1) : G(i, 0);    // gamma_xy
        };
        double Bi[3], Bj[3];
        for (int i = 0; i < ngeo; ++i)
          for (int ci = 0; ci < 2; ++ci) {
            Brow(i, ci, Bi);
            for (int j = 0; j < ngeo; ++j)
              for (int cj = 0; cj < 2; ++cj) {
                Brow(j, cj, Bj);
                double v = c11 * (Bi[0] * Bj[0] + Bi[1] * Bj[1]) +
                           c12 * (Bi[0] * Bj[1] + Bi[1] * Bj[0]) + c33 * Bi[2] * Bj[2];
                K(i * 2 + ci, j * 2 + cj) += w * v;
              }
          }
      }
    }
    for (int i = 0; i < ngeo * d; ++i)
      for (int j = 0; j < ngeo * d; ++j)
        if (K(i, j) != 0.0)
          trips.push_back({en[i / d] * d + (i % d), en[j / d] * d + (j % d), K(i, j)});
  }
  SpMat D(mesh.n_nodes() * d, mesh.n_nodes() * d);
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

}  // namespace hoist
