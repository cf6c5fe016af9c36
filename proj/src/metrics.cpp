#include <algorithm>
#include <set>

#include "hoist/driver.hpp"
#include "hoist/robustness.hpp"

namespace hoist {

namespace {

// roots of f on [0,1] by sampling + bisection (polynomial-ish f, q <= 3)
std::vector<double> curve_roots(const std::function<double(double)>& f, int samples = 64) {
  std::vector<double> roots;
  double prev = f(0.0);
  for (int i = 1; i <= samples; ++i) {
    double s = double(i) / samples;
    double cur = f(s);
    if (prev == 0.0) roots.push_back(double(i - 1) / samples);
    if ((prev < 0) != (cur < 0)) {
      double a = double(i - 1) / samples, b = s;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (a + b);
        ((f(a) < 0) != (f(mid) < 0) ? b : a) = mid;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  return roots;
}

}  // namespace

Mat face_sample_points(const SimplexMesh& mesh, int face_id, int n) {
  const auto& fi = mesh.faces()[face_id];
  int d = mesh.dim(), q = mesh.degree();
  if (d == 1) {
    auto chain = face_nodes(1, q, fi.face_l);
    Mat out(1, 1);
    out(0, 0) = mesh.phys_nodes()(mesh.elem_nodes(fi.elem_l)[chain[0]], 0);
    return out;
  }
  Vec s(n);
  for (int i = 0; i < n; ++i) s[i] = double(i) / (n - 1);
  Mat xi = face_to_simplex(2, fi.face_l, s);
  return mesh.map_phys(fi.elem_l, xi);
}

IburgMetrics error_metrics_iburg(const SimplexMesh& mesh, const DgSpace& space,
                                 const Vec& u, const IburgExactIface& exact,
                                 double jump_threshold) {
  IburgMetrics out;
  NodalBasis line(1, mesh.degree());

  // ---- E_phi: L1 error along the vertical line z = slice_z -------------------
  // breakpoints where element edges cross the slice line, plus the exact
  // shock time
  std::set<double> breaks = {0.0, exact.t_max};
  for (int e = 0; e < mesh.n_elems(); ++e) {
    for (int lf = 0; lf < 3; ++lf) {
      auto chain = face_nodes(2, mesh.degree(), lf);
      std::vector<Vec> pts;
      for (int loc : chain)
        pts.push_back(mesh.phys_nodes().row(mesh.elem_nodes(e)[loc]).transpose());
      auto zf = [&](double s) {
        Mat sp(1, 1);
        sp << s;
        Mat g1 = line.eval(sp);
        auto col = [&](int pos) {
          int qd = mesh.degree();
          return pos == 0 ? 0 : (pos == qd ? 1 : 1 + pos);
        };
        double z = 0;
        for (size_t k = 0; k < pts.size(); ++k) z += g1(0, col(int(k))) * pts[k][0];
        return z - exact.slice_z;
      };
      for (double s : curve_roots(zf)) {
        Mat sp(1, 1);
        sp << s;
        Mat g1 = line.eval(sp);
        auto col = [&](int pos) {
          int qd = mesh.degree();
          return pos == 0 ? 0 : (pos == qd ? 1 : 1 + pos);
        };
        double t = 0;
        for (size_t k = 0; k < pts.size(); ++k) t += g1(0, col(int(k))) * pts[k][1];
        if (t > 0.0 && t < exact.t_max) breaks.insert(t);
      }
    }
  }
  // exact shock crossing time of the slice line
  {
    auto f = [&](double t) { return exact.z_s(t) - exact.slice_z; };
    double prev = f(0.0);
    for (int i = 1; i <= 400; ++i) {
      double t = exact.t_max * i / 400.0;
      double cur = f(t);
      if ((prev < 0) != (cur < 0)) {
        double a = exact.t_max * (i - 1) / 400.0, b = t;
        for (int it = 0; it < 80; ++it) {
          double mid = 0.5 * (a + b);
          ((f(a) < 0) != (f(mid) < 0) ? b : a) = mid;
        }
        breaks.insert(0.5 * (a + b));
        break;
      }
      prev = cur;
    }
  }

  auto rule = gauss_legendre_01(10);
  std::vector<double> bk(breaks.begin(), breaks.end());
  double E = 0;
  for (size_t i = 0; i + 1 < bk.size(); ++i) {
    double a = bk[i], b = bk[i + 1];
    if (b - a < 1e-13) continue;
    for (int g = 0; g < rule.points.rows(); ++g) {
      double t = a + (b - a) * rule.points(g, 0);
      Vec x(2);
      x << exact.slice_z, t;
      int e;
      Vec xi;
      if (!mesh.locate(x, e, xi)) continue;
      double phi_h = eval_solution(mesh, space, u, e, xi.transpose())(0, 0);
      E += rule.weights[g] * (b - a) * std::abs(exact.phi(exact.slice_z, t) - phi_h);
    }
  }
  out.E_phi = E;

  // ---- E_zs: L2 distance of the tracked shock curve --------------------------
  double t_hi = std::min(exact.t_max, exact.shock_exit_time);
  double acc = 0, tlen = 0;
  auto rule8 = gauss_legendre_01(8);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const auto& fi = mesh.faces()[f];
    if (fi.boundary()) continue;
    if (std::abs(mean_face_jump(mesh, space, u, f)) <= jump_threshold) continue;
    out.shock_found = true;
    // integrate |z_s(t) - z(s)|^2 |dt/ds| ds over the face curve
    auto chain = face_nodes(2, mesh.degree(), fi.face_l);
    std::vector<Vec> pts;
    for (int loc : chain)
      pts.push_back(mesh.phys_nodes().row(mesh.elem_nodes(fi.elem_l)[loc]).transpose());
    for (int g = 0; g < rule8.points.rows(); ++g) {
      Mat sp(1, 1);
      sp << rule8.points(g, 0);
      Mat g1 = line.eval(sp), dg1 = line.grad(sp)[0];
      auto col = [&](int pos) {
        int qd = mesh.degree();
        return pos == 0 ? 0 : (pos == qd ? 1 : 1 + pos);
      };
      double z = 0, t = 0, dt = 0;
      for (size_t k = 0; k < pts.size(); ++k) {
        z += g1(0, col(int(k))) * pts[k][0];
        t += g1(0, col(int(k))) * pts[k][1];
        dt += dg1(0, col(int(k))) * pts[k][1];
      }
      if (t < 0.0 || t > t_hi) continue;
      double diff = exact.z_s(t) - z;
      acc += rule8.weights[g] * diff * diff * std::abs(dt);
      tlen += rule8.weights[g] * std::abs(dt);
    }
  }
  if (!out.shock_found || tlen < 0.5 * t_hi) {
    out.E_zs = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.E_zs = std::sqrt(acc);
  }
  return out;
}

NozzleMetrics error_metrics_nozzle(const SimplexMesh& mesh, const DgSpace& space,
                                   const Vec& u, const NozzleExactIface& exact) {
  NozzleMetrics out;
  // tracked shock: interior vertex with the largest density jump
  double best_jump = 0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const auto& fi = mesh.faces()[f];
    if (fi.boundary()) continue;
    double x = face_sample_points(mesh, f, 1)(0, 0);
    double jump = std::abs(mean_face_jump(mesh, space, u, f)) / exact.area(x);
    if (jump > best_jump) {
      best_jump = jump;
      out.xs_tracked = x;
      out.shock_found = true;
    }
  }
  out.E_xs = out.shock_found ? std::abs(out.xs_tracked - exact.x_s)
                             : std::numeric_limits<double>::quiet_NaN();

  // L1 density error with sub-splitting at the exact shock position
  auto rule = gauss_legendre_01(12);
  double E = 0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    double xa = mesh.phys_nodes()(mesh.elem_nodes(e)[0], 0);
    double xb = mesh.phys_nodes()(mesh.elem_nodes(e)[1], 0);
    if (xa > xb) std::swap(xa, xb);
    std::vector<double> seg = {xa, xb};
    if (exact.x_s > xa && exact.x_s < xb) seg = {xa, exact.x_s, xb};
    for (size_t si = 0; si + 1 < seg.size(); ++si) {
      for (int g = 0; g < rule.points.rows(); ++g) {
        double x = seg[si] + (seg[si + 1] - seg[si]) * rule.points(g, 0);
        Vec xv(1);
        xv << x;
        Vec xi;
        if (!mesh.invert_map(e, xv, true, xi, 1e-9)) continue;
        double U0 = eval_solution(mesh, space, u, e, xi.transpose())(0, 0);
        double rho_h = U0 / exact.area(x);
        E += rule.weights[g] * (seg[si + 1] - seg[si]) * std::abs(exact.rho(x) - rho_h);
      }
    }
  }
  out.E_rho = E;
  return out;
}

FeatureFaces extract_feature_faces(const SimplexMesh& mesh, const DgSpace& space,
                                   const Vec& u, double jump_tol, double grad_frac) {
  FeatureFaces out;
  NodalBasis trial(mesh.dim(), space.p), line(1, mesh.degree());
  auto rule = gauss_legendre_01(space.p + 2);
  std::vector<double> grad_jump(mesh.n_faces(), 0.0);
  double max_grad = 0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const auto& fi = mesh.faces()[f];
    if (fi.boundary()) continue;
    if (std::abs(mean_face_jump(mesh, space, u, f)) > jump_tol) out.jump_faces.push_back(f);
    // mean jump of the state gradient magnitude across the face
    double acc = 0, len = 0;
    for (int g = 0; g < rule.points.rows(); ++g) {
      Vec sp(1);
      sp << rule.points(g, 0);
      Mat xi_l = face_to_simplex(2, fi.face_l, sp);
      Vec sp_r(1);
      sp_r << 1.0 - rule.points(g, 0);
      Mat xi_r = face_to_simplex(2, fi.face_r, sp_r);
      auto grad_at = [&](int e, const Mat& xi) {
        auto dphi = trial.grad(xi);
        Mat G;
        double det;
        mesh.mapping_jacobian(e, xi.row(0).transpose(), G, det);
        // d(chi)/dx = J^{-T} d(chi)/dxi using the physical map
        Mat pt = xi;
        auto dgeo = mesh.geom_basis().grad(pt);
        Mat J = Mat::Zero(2, 2);
        for (int i = 0; i < mesh.nodes_per_elem(); ++i)
          for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 2; ++k)
              J(c, k) += mesh.phys_nodes()(mesh.elem_nodes(e)[i], c) * dgeo[k](0, i);
        Vec gxi = Vec::Zero(2);
        for (int j = 0; j < space.np; ++j)
          for (int k = 0; k < 2; ++k)
            gxi[k] += dphi[k](0, j) * u[space.dof(e, j, 0)];
        return Vec(J.inverse().transpose() * gxi);
      };
      Vec gl = grad_at(fi.elem_l, xi_l), gr = grad_at(fi.elem_r, xi_r);
      acc += rule.weights[g] * (gl - gr).norm();
      len += rule.weights[g];
    }
    grad_jump[f] = acc / len;
    max_grad = std::max(max_grad, grad_jump[f]);
  }
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (!mesh.faces()[f].boundary() && grad_jump[f] >= grad_frac * max_grad)
      out.kink_faces.push_back(f);
  return out;
}

}  // namespace hoist
