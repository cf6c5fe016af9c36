#include "hoist/assembly.hpp"

#include <atomic>
#include <map>
#include <mutex>

#include "assembly_detail.hpp"

namespace hoist {

namespace assembly_detail {

namespace {
std::map<std::tuple<int, int, int, int>, Tables> table_cache;
std::mutex table_mutex;
}  // namespace

const Tables& get_tables(int d, int q, int p_trial, int p_test) {
  std::lock_guard<std::mutex> lock(table_mutex);
  auto key = std::make_tuple(d, q, p_trial, p_test);
  auto it = table_cache.find(key);
  if (it != table_cache.end()) return it->second;

  Tables t;
  int exact = 2 * (p_test + q);
  t.vol = simplex_quadrature(d, exact);
  t.nq = int(t.vol.points.rows());
  NodalBasis trial(d, p_trial), test(d, p_test), geo(d, q);
  t.theta = trial.eval(t.vol.points);
  t.psi = test.eval(t.vol.points);
  t.dpsi = test.grad(t.vol.points);
  t.geo = geo.eval(t.vol.points);
  t.dgeo = geo.grad(t.vol.points);

  if (d == 1) {
    t.face.points = Mat::Zero(1, 1);
    t.face.weights = Vec::Ones(1);
    t.nfq = 1;
  } else {
    t.face = gauss_legendre_01((exact + 2) / 2);
    t.nfq = int(t.face.points.rows());
  }
  int nlf = d + 1;
  t.theta_f.resize(nlf);
  t.psi_f.resize(nlf);
  t.theta_f_rev.resize(nlf);
  t.psi_f_rev.resize(nlf);
  for (int lf = 0; lf < nlf; ++lf) {
    Vec s = t.face.points.col(0);
    Mat pts = face_to_simplex(d, lf, s);
    t.theta_f[lf] = trial.eval(pts);
    t.psi_f[lf] = test.eval(pts);
    Vec s_rev = Vec::Ones(s.size()) - s;
    Mat pts_rev = face_to_simplex(d, lf, s_rev);
    t.theta_f_rev[lf] = trial.eval(pts_rev);
    t.psi_f_rev[lf] = test.eval(pts_rev);
  }
  if (d == 2) {
    NodalBasis line(1, q);
    Mat raw = line.eval(t.face.points);
    Mat draw = line.grad(t.face.points)[0];
    // permute 1D basis columns into chain order (s = 0, 1/q, ..., 1)
    t.g1d = Mat(t.nfq, q + 1);
    t.dg1d = Mat(t.nfq, q + 1);
    auto chain_col = [&](int pos) { return pos == 0 ? 0 : (pos == q ? 1 : 1 + pos); };
    for (int pos = 0; pos <= q; ++pos) {
      t.g1d.col(pos) = raw.col(chain_col(pos));
      t.dg1d.col(pos) = draw.col(chain_col(pos));
    }
  }
  return table_cache.emplace(key, std::move(t)).first->second;
}

std::vector<int> face_chain(const SimplexMesh& mesh, int e, int lf) {
  std::vector<int> chain;
  for (int loc : face_nodes(mesh.dim(), mesh.degree(), lf))
    chain.push_back(mesh.elem_nodes(e)[loc]);
  return chain;
}

namespace {
struct FacePoint {
  Vec H;               // unit-normal numerical flux
  Mat dH_dUl, dH_dUr;  // m x m
  Mat dH_dn, dH_dx;    // m x d
};

void face_point_derivs(const ClawModel& model, FluxKind kind, bool boundary, int tag,
                       const Vec& Ul, const Vec& Ur_in, const Vec& n, const Vec& xf,
                       bool want_jac, FacePoint& out) {
  int m = model.m, d = model.d;
  out.H.resize(m);
  {
    Vec ur = Ur_in;
    if (boundary) {
      ur.resize(m);
      model.bc_state(tag, xf.data(), n.data(), Ul.data(), ur.data());
    }
    if (kind == FluxKind::upwind)
      model.numflux(Ul.data(), ur.data(), n.data(), xf.data(), out.H.data());
    else
      model.central_flux(Ul.data(), ur.data(), n.data(), xf.data(), out.H.data());
  }
  if (!want_jac) return;

  out.dH_dUl.resize(m, m);
  out.dH_dUr.setZero(m, m);
  out.dH_dn.resize(m, d);
  out.dH_dx.resize(m, d);
  std::vector<Dual> ul(m), ur(m), nn(d), xx(d), H(m), ub(m);
  auto seed = [&](int which, int idx) {
    for (int i = 0; i < m; ++i) {
      ul[i] = Dual(Ul[i], which == 0 && i == idx ? 1.0 : 0.0);
      if (!boundary) ur[i] = Dual(Ur_in[i], which == 1 && i == idx ? 1.0 : 0.0);
    }
    for (int k = 0; k < d; ++k) {
      nn[k] = Dual(n[k], which == 2 && k == idx ? 1.0 : 0.0);
      xx[k] = Dual(xf[k], which == 3 && k == idx ? 1.0 : 0.0);
    }
    if (boundary) {
      model.bc_state(tag, xx.data(), nn.data(), ul.data(), ub.data());
      for (int i = 0; i < m; ++i) ur[i] = ub[i];
    }
    if (kind == FluxKind::upwind)
      model.numflux(ul.data(), ur.data(), nn.data(), xx.data(), H.data());
    else
      model.central_flux(ul.data(), ur.data(), nn.data(), xx.data(), H.data());
  };
  for (int j = 0; j < m; ++j) {
    seed(0, j);
    for (int i = 0; i < m; ++i) out.dH_dUl(i, j) = H[i].d;
  }
  if (!boundary)
    for (int j = 0; j < m; ++j) {
      seed(1, j);
      for (int i = 0; i < m; ++i) out.dH_dUr(i, j) = H[i].d;
    }
  for (int k = 0; k < d; ++k) {
    seed(2, k);
    for (int i = 0; i < m; ++i) out.dH_dn(i, k) = H[i].d;
  }
  for (int k = 0; k < d; ++k) {
    seed(3, k);
    for (int i = 0; i < m; ++i) out.dH_dx(i, k) = H[i].d;
  }
}

}  // namespace

void assemble_face(const ClawModel& model, const SimplexMesh& mesh, const DgSpace& space,
                   const Tables& t, const Vec& u, int np_te, const FaceInfo& fi,
                   bool want_jac, FaceBlock& fb, FluxKind kind) {
  int d = mesh.dim(), m = space.m, np_tr = space.np;
  int el = fi.elem_l, lfl = fi.face_l;
  bool boundary = fi.boundary();
  int er = fi.elem_r, lfr = fi.face_r;

  fb.r_l = Vec::Zero(np_te * m);
  if (!boundary) fb.r_r = Vec::Zero(np_te * m);
  auto chain = face_chain(mesh, el, lfl);
  int nchain = int(chain.size());
  Mat A_ll, A_lr, A_rl, A_rr, Bx_l, Bx_r;
  if (want_jac) {
    A_ll = Mat::Zero(np_te * m, np_tr * m);
    Bx_l = Mat::Zero(np_te * m, nchain * d);
    if (!boundary) {
      A_lr = Mat::Zero(np_te * m, np_tr * m);
      A_rl = Mat::Zero(np_te * m, np_tr * m);
      A_rr = Mat::Zero(np_te * m, np_tr * m);
      Bx_r = Mat::Zero(np_te * m, nchain * d);
    }
  }

  Vec Ul(m), Ur(m), n(d), xf(d), nu(d);
  for (int s = 0; s < t.nfq; ++s) {
    double w = t.face.weights[s];
    double sigma;
    if (d == 1) {
      xf[0] = mesh.phys_nodes()(chain[0], 0);
      nu[0] = face_master_normal(1, lfl)[0];
      sigma = 1.0;
      n = nu;
    } else {
      Vec tan = Vec::Zero(2);
      xf.setZero();
      for (int k = 0; k < nchain; ++k) {
        xf += t.g1d(s, k) * mesh.phys_nodes().row(chain[k]).transpose();
        tan += t.dg1d(s, k) * mesh.phys_nodes().row(chain[k]).transpose();
      }
      nu[0] = tan[1];
      nu[1] = -tan[0];
      sigma = nu.norm();
      n = nu / sigma;
    }
    Ul.setZero();
    for (int j = 0; j < np_tr; ++j)
      for (int c = 0; c < m; ++c) Ul[c] += t.theta_f[lfl](s, j) * u[space.dof(el, j, c)];
    if (!boundary) {
      Ur.setZero();
      for (int j = 0; j < np_tr; ++j)
        for (int c = 0; c < m; ++c)
          Ur[c] += t.theta_f_rev[lfr](s, j) * u[space.dof(er, j, c)];
    }

    FacePoint fp;
    face_point_derivs(model, kind, boundary, fi.btag, Ul, Ur, n, xf, want_jac, fp);

    for (int i = 0; i < np_te; ++i)
      for (int c = 0; c < m; ++c) {
        fb.r_l[i * m + c] += w * t.psi_f[lfl](s, i) * sigma * fp.H[c];
        if (!boundary) fb.r_r[i * m + c] -= w * t.psi_f_rev[lfr](s, i) * sigma * fp.H[c];
      }
    if (!want_jac) continue;

    for (int i = 0; i < np_te; ++i)
      for (int c = 0; c < m; ++c)
        for (int j = 0; j < np_tr; ++j)
          for (int cc = 0; cc < m; ++cc) {
            double dl = w * sigma * fp.dH_dUl(c, cc) * t.theta_f[lfl](s, j);
            A_ll(i * m + c, j * m + cc) += t.psi_f[lfl](s, i) * dl;
            if (!boundary) {
              double dr = w * sigma * fp.dH_dUr(c, cc) * t.theta_f_rev[lfr](s, j);
              A_lr(i * m + c, j * m + cc) += t.psi_f[lfl](s, i) * dr;
              A_rl(i * m + c, j * m + cc) -= t.psi_f_rev[lfr](s, i) * dl;
              A_rr(i * m + c, j * m + cc) -= t.psi_f_rev[lfr](s, i) * dr;
            }
          }
    for (int k = 0; k < nchain; ++k)
      for (int cc = 0; cc < d; ++cc) {
        Vec dnu = Vec::Zero(d), dxf = Vec::Zero(d), dn = Vec::Zero(d);
        double dsigma = 0;
        if (d == 2) {
          if (cc == 0)
            dnu[1] = -t.dg1d(s, k);
          else
            dnu[0] = t.dg1d(s, k);
          dxf[cc] = t.g1d(s, k);
          dsigma = n.dot(dnu);
          dn = (dnu - n * dsigma) / sigma;
        } else {
          dxf[cc] = 1.0;  // the face point is the vertex itself
        }
        Vec dH = fp.dH_dn * dn + fp.dH_dx * dxf;
        for (int c = 0; c < m; ++c) {
          double val = w * (dsigma * fp.H[c] + sigma * dH[c]);
          for (int i = 0; i < np_te; ++i) {
            Bx_l(i * m + c, k * d + cc) += t.psi_f[lfl](s, i) * val;
            if (!boundary) Bx_r(i * m + c, k * d + cc) -= t.psi_f_rev[lfr](s, i) * val;
          }
        }
      }
  }

  if (!want_jac) return;
  auto emit = [&](const Mat& A, int e_row, int e_col) {
    for (int i = 0; i < np_te * m; ++i)
      for (int j = 0; j < np_tr; ++j)
        for (int cc = 0; cc < m; ++cc) {
          double v = A(i, j * m + cc);
          if (v != 0.0) fb.du.push_back({e_row * np_te * m + i, space.dof(e_col, j, cc), v});
        }
  };
  emit(A_ll, el, el);
  if (!boundary) {
    emit(A_lr, el, er);
    emit(A_rl, er, el);
    emit(A_rr, er, er);
  }
  auto emit_x = [&](const Mat& B, int e_row) {
    for (int i = 0; i < np_te * m; ++i)
      for (int k = 0; k < nchain; ++k)
        for (int cc = 0; cc < d; ++cc) {
          double v = B(i, k * d + cc);
          if (v != 0.0) fb.dx.push_back({e_row * np_te * m + i, chain[k] * d + cc, v});
        }
  };
  emit_x(Bx_l, el);
  if (!boundary) emit_x(Bx_r, er);
}

void assemble_volume(const ClawModel& model, const SimplexMesh& mesh, const DgSpace& space,
                     const Tables& t, const Vec& u, int np_te, int e, bool want_jac,
                     ElemBlock& eb) {
  int d = mesh.dim(), m = space.m, np_tr = space.np;
  int ngeo = mesh.nodes_per_elem();
  eb.r = Vec::Zero(np_te * m);
  Mat Au, Ax;
  if (want_jac) {
    Au = Mat::Zero(np_te * m, np_tr * m);
    Ax = Mat::Zero(np_te * m, ngeo * d);
  }
  const auto& en = mesh.elem_nodes(e);
  Mat xc(ngeo, d);
  for (int i = 0; i < ngeo; ++i) xc.row(i) = mesh.phys_nodes().row(en[i]);

  Vec U(m), xq(d), S(m), F(m * d);
  Mat J(d, d);
  std::vector<Dual> Ud(m), xd(d), Fd(m * d), Sd(m);
  for (int qpt = 0; qpt < t.nq; ++qpt) {
    double w = t.vol.weights[qpt];
    J.setZero();
    xq.setZero();
    for (int i = 0; i < ngeo; ++i)
      for (int c = 0; c < d; ++c) {
        xq[c] += t.geo(qpt, i) * xc(i, c);
        for (int k = 0; k < d; ++k) J(c, k) += xc(i, c) * t.dgeo[k](qpt, i);
      }
    double det = J.determinant();
    if (det <= 0.0) throw inverted_element_error{};
    Mat Jinv = J.inverse();
    Mat JinvT = Jinv.transpose();

    U.setZero();
    for (int j = 0; j < np_tr; ++j)
      for (int c = 0; c < m; ++c) U[c] += t.theta(qpt, j) * u[space.dof(e, j, c)];

    model.flux(U.data(), xq.data(), F.data());
    model.source(U.data(), xq.data(), S.data());
    Mat T(m, d);
    for (int c = 0; c < m; ++c)
      for (int k = 0; k < d; ++k) {
        double val = 0;
        for (int l = 0; l < d; ++l) val += F[c * d + l] * JinvT(l, k);
        T(c, k) = det * val;
      }
    for (int i = 0; i < np_te; ++i)
      for (int c = 0; c < m; ++c) {
        double acc = 0;
        for (int k = 0; k < d; ++k) acc += T(c, k) * t.dpsi[k](qpt, i);
        eb.r[i * m + c] -= w * (acc + det * t.psi(qpt, i) * S[c]);
      }
    if (!want_jac) continue;

    for (int jc = 0; jc < m; ++jc) {
      for (int i = 0; i < m; ++i) Ud[i] = Dual(U[i], i == jc ? 1.0 : 0.0);
      for (int k = 0; k < d; ++k) xd[k] = Dual(xq[k], 0.0);
      model.flux(Ud.data(), xd.data(), Fd.data());
      model.source(Ud.data(), xd.data(), Sd.data());
      Mat dT(m, d);
      for (int c = 0; c < m; ++c)
        for (int k = 0; k < d; ++k) {
          double val = 0;
          for (int l = 0; l < d; ++l) val += Fd[c * d + l].d * JinvT(l, k);
          dT(c, k) = det * val;
        }
      for (int i = 0; i < np_te; ++i)
        for (int c = 0; c < m; ++c) {
          double acc = 0;
          for (int k = 0; k < d; ++k) acc += dT(c, k) * t.dpsi[k](qpt, i);
          double src = det * t.psi(qpt, i) * Sd[c].d;
          for (int j = 0; j < np_tr; ++j)
            Au(i * m + c, j * m + jc) -= w * (acc + src) * t.theta(qpt, j);
        }
    }
    Mat dF_dx(m * d, d), dS_dx(m, d);
    for (int kc = 0; kc < d; ++kc) {
      for (int i = 0; i < m; ++i) Ud[i] = Dual(U[i], 0.0);
      for (int k = 0; k < d; ++k) xd[k] = Dual(xq[k], k == kc ? 1.0 : 0.0);
      model.flux(Ud.data(), xd.data(), Fd.data());
      model.source(Ud.data(), xd.data(), Sd.data());
      for (int i = 0; i < m * d; ++i) dF_dx(i, kc) = Fd[i].d;
      for (int i = 0; i < m; ++i) dS_dx(i, kc) = Sd[i].d;
    }
    for (int kn = 0; kn < ngeo; ++kn)
      for (int cc = 0; cc < d; ++cc) {
        double ddet = 0;
        for (int l = 0; l < d; ++l) ddet += Jinv(l, cc) * t.dgeo[l](qpt, kn);
        ddet *= det;
        // dJ = e_cc dgeo^T; dJ^{-T} = -J^{-T} dJ^T J^{-T}
        Mat dJinvT(d, d);
        for (int a = 0; a < d; ++a) {
          double acc = 0;
          for (int l = 0; l < d; ++l) acc += JinvT(a, l) * t.dgeo[l](qpt, kn);
          for (int b = 0; b < d; ++b) dJinvT(a, b) = -acc * JinvT(cc, b);
        }
        double dxq = t.geo(qpt, kn);
        Mat dT(m, d);
        for (int c = 0; c < m; ++c)
          for (int k = 0; k < d; ++k) {
            double v1 = 0, v2 = 0, v3 = 0;
            for (int l = 0; l < d; ++l) {
              v1 += F[c * d + l] * JinvT(l, k);
              v2 += F[c * d + l] * dJinvT(l, k);
              v3 += dF_dx(c * d + l, cc) * JinvT(l, k);
            }
            dT(c, k) = ddet * v1 + det * v2 + det * dxq * v3;
          }
        for (int i = 0; i < np_te; ++i)
          for (int c = 0; c < m; ++c) {
            double acc = 0;
            for (int k = 0; k < d; ++k) acc += dT(c, k) * t.dpsi[k](qpt, i);
            double dsrc = ddet * S[c] + det * dxq * dS_dx(c, cc);
            Ax(i * m + c, kn * d + cc) -= w * (acc + t.psi(qpt, i) * dsrc);
          }
      }
  }

  if (!want_jac) return;
  for (int i = 0; i < np_te * m; ++i) {
    int row = e * np_te * m + i;
    for (int j = 0; j < np_tr; ++j)
      for (int cc = 0; cc < m; ++cc) {
        double v = Au(i, j * m + cc);
        if (v != 0.0) eb.du.push_back({row, space.dof(e, j, cc), v});
      }
    for (int kn = 0; kn < ngeo; ++kn)
      for (int cc = 0; cc < d; ++cc) {
        double v = Ax(i, kn * d + cc);
        if (v != 0.0) eb.dx.push_back({row, en[kn] * d + cc, v});
      }
  }
}

}  // namespace assembly_detail

using namespace assembly_detail;

void assemble(const ClawModel& model, const SimplexMesh& mesh, const DgSpace& space,
              const Vec& u, int p_test, FluxKind flux, Vec* r, SpMat* dr_du,
              SpMat* dr_dx) {
  int d = mesh.dim(), m = space.m;
  const Tables& t = get_tables(d, mesh.degree(), space.p, p_test);
  int np_te = simplex_basis_size(d, p_test);
  int n_rows = mesh.n_elems() * np_te * m;
  bool want_jac = dr_du || dr_dx;

  std::vector<FaceBlock> fblocks(mesh.n_faces());
  std::vector<ElemBlock> eblocks(mesh.n_elems());
  std::atomic<int> err{0};

#pragma omp parallel for schedule(static)
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (err.load(std::memory_order_relaxed)) continue;
    try {
      assemble_face(model, mesh, space, t, u, np_te, mesh.faces()[f], want_jac,
                    fblocks[f], flux);
    } catch (const nonphysical_error&) {
      err.store(1);
    } catch (const inverted_element_error&) {
      err.store(2);
    }
  }
#pragma omp parallel for schedule(static)
  for (int e = 0; e < mesh.n_elems(); ++e) {
    if (err.load(std::memory_order_relaxed)) continue;
    try {
      assemble_volume(model, mesh, space, t, u, np_te, e, want_jac, eblocks[e]);
    } catch (const nonphysical_error&) {
      err.store(1);
    } catch (const inverted_element_error&) {
      err.store(2);
    }
  }
  if (err.load() == 1) throw nonphysical_error{};
  if (err.load() == 2) throw inverted_element_error{};

  if (r) {
    r->setZero(n_rows);
    for (int e = 0; e < mesh.n_elems(); ++e)
      r->segment(e * np_te * m, np_te * m) = eblocks[e].r;
    for (int f = 0; f < mesh.n_faces(); ++f) {
      const auto& fi = mesh.faces()[f];
      r->segment(fi.elem_l * np_te * m, np_te * m) += fblocks[f].r_l;
      if (!fi.boundary()) r->segment(fi.elem_r * np_te * m, np_te * m) += fblocks[f].r_r;
    }
  }
  if (dr_du || dr_dx) {
    std::vector<Trip> du, dx;
    for (auto& eb : eblocks) {
      du.insert(du.end(), eb.du.begin(), eb.du.end());
      dx.insert(dx.end(), eb.dx.begin(), eb.dx.end());
    }
    for (auto& fb : fblocks) {
      du.insert(du.end(), fb.du.begin(), fb.du.end());
      dx.insert(dx.end(), fb.dx.begin(), fb.dx.end());
    }
    if (dr_du) {
      dr_du->resize(n_rows, space.ndof());
      dr_du->setFromTriplets(du.begin(), du.end());
    }
    if (dr_dx) {
      dr_dx->resize(n_rows, mesh.n_nodes() * d);
      dr_dx->setFromTriplets(dx.begin(), dx.end());
    }
  }
}

Vec project_solution(const SimplexMesh& mesh, const Vec& u, int m, int from_p, int to_p) {
  int d = mesh.dim();
  int np_from = simplex_basis_size(d, from_p), np_to = simplex_basis_size(d, to_p);
  NodalBasis bf(d, from_p), bt(d, to_p);
  QuadRule rule = simplex_quadrature(d, from_p + to_p + 2 * mesh.degree());
  Mat pf = bf.eval(rule.points), pt = bt.eval(rule.points);
  NodalBasis geo(d, mesh.degree());
  auto dgeo = geo.grad(rule.points);

  Vec out(mesh.n_elems() * np_to * m);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    Vec detw(rule.points.rows());
    const auto& en = mesh.elem_nodes(e);
    for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
      Mat J = Mat::Zero(d, d);
      for (int i = 0; i < mesh.nodes_per_elem(); ++i)
        for (int c = 0; c < d; ++c)
          for (int k = 0; k < d; ++k)
            J(c, k) += mesh.ref_nodes()(en[i], c) * dgeo[k](qpt, i);
      detw[qpt] = rule.weights[qpt] * J.determinant();
    }
    Mat M = pt.transpose() * detw.asDiagonal() * pt;
    Eigen::LDLT<Mat> solver(M);
    for (int c = 0; c < m; ++c) {
      Vec uf(rule.points.rows());
      for (int qpt = 0; qpt < rule.points.rows(); ++qpt) {
        double val = 0;
        for (int j = 0; j < np_from; ++j) val += pf(qpt, j) * u[(e * np_from + j) * m + c];
        uf[qpt] = val;
      }
      Vec b = pt.transpose() * (detw.asDiagonal() * uf);
      Vec coeff = solver.solve(b);
      for (int j = 0; j < np_to; ++j) out[(e * np_to + j) * m + c] = coeff[j];
    }
  }
  return out;
}

Mat eval_solution(const SimplexMesh& mesh, const DgSpace& space, const Vec& u, int e,
                  const Mat& xi) {
  NodalBasis basis(mesh.dim(), space.p);
  Mat vals = basis.eval(xi);
  Mat out = Mat::Zero(xi.rows(), space.m);
  for (int i = 0; i < xi.rows(); ++i)
    for (int j = 0; j < space.np; ++j)
      for (int c = 0; c < space.m; ++c) out(i, c) += vals(i, j) * u[space.dof(e, j, c)];
  return out;
}

}  // namespace hoist
