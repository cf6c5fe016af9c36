#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "hoist/robustness.hpp"
#include "hoist/sqp.hpp"

using namespace hoist;

namespace {

SpMat dense_to_sparse(const Mat& A) {
  SpMat S(A.rows(), A.cols());
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0.0) t.push_back({i, j, A(i, j)});
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

}  // namespace

TEST_CASE("KKT toy example solves exactly") {
  SpMat B = dense_to_sparse(Mat::Identity(2, 2));
  Mat Jm(1, 2);
  Jm << 1, 0;
  SpMat J = dense_to_sparse(Jm);
  Vec g = Vec::Zero(2), r = Vec::Ones(1);
  Vec dz, eta;
  REQUIRE(solve_kkt(B, J, g, r, dz, eta));
  CHECK(dz[0] == -1.0);
  CHECK(dz[1] == 0.0);
  CHECK(eta[0] == 1.0);

  // r = 0, g = 0 -> dz = 0, eta = 0
  Vec dz0, eta0;
  REQUIRE(solve_kkt(B, J, Vec::Zero(2), Vec::Zero(1), dz0, eta0));
  CHECK(dz0.norm() == 0.0);
  CHECK(eta0.norm() == 0.0);
}

TEST_CASE("KKT with random SPD block satisfies the linearized constraint") {
  std::mt19937 rng(3);
  std::normal_distribution<double> g01;
  int n = 12, mcon = 4;
  Mat Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q(i, j) = g01(rng);
  Mat Bm = Q * Q.transpose() + 0.5 * Mat::Identity(n, n);
  Mat Jm(mcon, n);
  for (int i = 0; i < mcon; ++i)
    for (int j = 0; j < n; ++j) Jm(i, j) = g01(rng);
  Vec g(n), r(mcon);
  for (int i = 0; i < n; ++i) g[i] = g01(rng);
  for (int i = 0; i < mcon; ++i) r[i] = g01(rng);
  Vec dz, eta;
  REQUIRE(solve_kkt(dense_to_sparse(Bm), dense_to_sparse(Jm), g, r, dz, eta));
  CHECK((Jm * dz + r).lpNorm<Eigen::Infinity>() < 1e-10);
  // block residual of the full system
  CHECK((Bm * dz + Jm.transpose() * eta + g).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("merit penalty examples") {
  SqpParams par;  // varpi = 1.2, rho = 0.95
  // g'dz = 1, dz'Bdz = 2, |r|_1 = 1 -> mu_bar = 2/(0.05) = 40, mu = 48
  CHECK(merit_penalty(0.0, 1.0, 2.0, 1.0, par) == doctest::Approx(48.0));
  // monotone
  CHECK(merit_penalty(100.0, 1.0, 2.0, 1.0, par) == doctest::Approx(100.0));
  // cap
  par.mu_max = 30.0;
  CHECK(merit_penalty(0.0, 1.0, 2.0, 1.0, par) == doctest::Approx(30.0));
  // zero constraint: keep previous
  par.mu_max = 1e10;
  CHECK(merit_penalty(7.0, 1.0, 2.0, 0.0, par) == doctest::Approx(7.0));
}

TEST_CASE("line search cases") {
  SqpParams par;
  // quadratic with its minimum at the full step
  auto quad = [](double a) { return (a - 1.0) * (a - 1.0); };
  auto ls = line_search(quad, quad(0), -2.0, par);
  CHECK(ls.alpha == 1.0);
  CHECK(ls.backtracks == 0);

  // increase at alpha = 1, decrease at 1/2
  auto bump = [](double a) { return a > 0.75 ? 10.0 : 1.0 - 0.5 * a; };
  auto ls2 = line_search(bump, 1.0, -1.0, par);
  CHECK(ls2.alpha == 0.5);
  CHECK(ls2.backtracks == 1);

  // evaluation error at alpha = 1 rejects automatically
  auto blow = [](double a) {
    return a > 0.9 ? std::numeric_limits<double>::infinity() : 1.0 - 0.5 * a;
  };
  auto ls3 = line_search(blow, 1.0, -1.0, par);
  CHECK(ls3.alpha < 1.0);

  // non-descent direction falls back to alpha_min
  auto ls4 = line_search(quad, quad(0), +1.0, par);
  CHECK(!ls4.descent);
  CHECK(ls4.alpha == par.alpha_min);
}

TEST_CASE("gamma update branches") {
  SqpParams par;
  par.L = 1.0;
  par.tau = 2.0;
  par.gamma_min = 1e-6;
  CHECK(update_gamma(0.1, 0.0, par) == doctest::Approx(0.05));     // decrease
  CHECK(update_gamma(0.1, 1.0, par) == doctest::Approx(0.2));      // increase
  CHECK(update_gamma(0.1, 0.05, par) == doctest::Approx(0.1));     // middle band
  CHECK(update_gamma(1e-6, 0.0, par) == doctest::Approx(1e-6));    // floor
}

TEST_CASE("kappa update cases") {
  SqpParams par;
  par.upsilon = 0.75;
  par.xi = 1.0;
  par.kappa_min = 1e-10;
  par.M = 200;
  // f_err = 1 < xi kappa^2 f_msh = 4 -> shrink
  CHECK(update_kappa(2.0, 1.0, 1.0, 5, par) == doctest::Approx(1.5));
  // k > M -> frozen
  CHECK(update_kappa(2.0, 1.0, 1.0, 300, par) == doctest::Approx(2.0));
  // floor
  par.kappa_min = 1.9;
  CHECK(update_kappa(2.0, 1.0, 1.0, 5, par) == doctest::Approx(1.9));
}

TEST_CASE("Hessian symmetry and term isolation") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g01;
  Mat dRu(8, 5), dRy(8, 3), dM(4, 3), AtDA = Mat::Zero(3, 3);
  for (int i = 0; i < dRu.size(); ++i) dRu(i / 5, i % 5) = g01(rng);
  for (int i = 0; i < dRy.size(); ++i) dRy(i / 3, i % 3) = g01(rng);
  for (int i = 0; i < dM.size(); ++i) dM(i / 3, i % 3) = g01(rng);
  SpMat B = build_hessian(dense_to_sparse(dRu), dense_to_sparse(dRy), dense_to_sparse(dM),
                          0.0, 0.0, dense_to_sparse(AtDA));
  Mat Bd(B);
  CHECK((Bd - Bd.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // gamma = kappa = 0: B = J_F^T J_F with F = R only
  Mat JF(8, 8);
  JF << dRu, dRy;
  Mat expect = JF.transpose() * JF;
  CHECK((Bd - expect).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("elasticity: rigid modes, block pattern, single-element energy") {
  auto mesh = rect_tri_mesh(0, 1, 0, 1, 2, 2, 1);
  SpMat D = assemble_elasticity(mesh, 0.2);
  // rigid translation has zero strain energy
  Vec tx = Vec::Zero(mesh.n_nodes() * 2);
  for (int i = 0; i < mesh.n_nodes(); ++i) tx[2 * i] = 1.0;
  CHECK(std::abs(tx.dot(D * tx)) < 1e-12);
  // block pattern follows node adjacency
  std::set<std::pair<int, int>> adj;
  for (int e = 0; e < mesh.n_elems(); ++e)
    for (int a : mesh.elem_nodes(e))
      for (int b : mesh.elem_nodes(e)) adj.insert({a, b});
  for (int k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it)
      CHECK(adj.count({int(it.row()) / 2, int(it.col()) / 2}) == 1);

  // one-triangle stretch energy closed form (plane strain, E = 1/v0 = 2)
  Mat v(3, 2);
  v << 0, 0, 1, 0, 0, 1;
  std::vector<std::vector<int>> conn = {{0, 1, 2}};
  std::vector<std::array<int, 3>> bf = {{0, 0, 0}, {0, 1, 0}, {0, 2, 0}};
  SimplexMesh tri(2, 1, v, v, conn, bf, 1);
  SpMat Dt = assemble_elasticity(tri, 0.2);
  double a = 0.3, b = -0.2;
  Vec disp(6);
  disp << 0, 0, a, 0, 0, b;  // u(x,y) = (a x, b y)
  double nu = 0.2, f = 1.0 / ((1 + nu) * (1 - 2 * nu));
  double expect = 0.5 /*area*/ * 2.0 /*E*/ * f * ((1 - nu) * (a * a + b * b) + 2 * nu * a * b);
  CHECK(disp.dot(Dt * disp) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("multiplier estimate basics") {
  // df/du = 0 (objective independent of u) -> lambda = 0
  Mat A(3, 3);
  A << 2, 1, 0, 0, 3, 1, 0, 0, 4;
  Vec zero = Vec::Zero(3);
  CHECK(multiplier_estimate(dense_to_sparse(A), zero).norm() == 0.0);
  // 1x1 closed form: lambda = (df/du) / (dr/du)
  Mat a11(1, 1);
  a11 << 2.5;
  Vec f1(1);
  f1 << 5.0;
  CHECK(multiplier_estimate(dense_to_sparse(a11), f1)[0] == doctest::Approx(2.0));
}

TEST_CASE("optimality equals the frozen-multiplier y-gradient of f - lam'r") {
  // small Burgers configuration, p = 1
  auto mesh = rect_tri_mesh(-0.2, 1, 0, 1.2, 6, 2, 1);
  auto model = burgers_spacetime_model("acc");
  PlanarBoundarySet walls;
  auto add = [&](double nx, double ny, double c) {
    PlanarBoundary w;
    w.normal = (Vec(2) << nx, ny).finished();
    w.offset = c;
    walls.walls.push_back(w);
  };
  add(-1, 0, 0.2);
  add(0, -1, 0);
  add(1, 0, 1);
  add(0, 1, 1.2);
  walls.tol = 1e-9;
  HoistState st{mesh, walls, ParamMap(mesh, walls), DgSpace(2, 1, 1, mesh.n_elems())};
  st.y = st.pm.invert(flatten_nodes(mesh.ref_nodes()));
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> ur(1.0, 3.0);
  st.u = Vec(st.space.ndof());
  for (int i = 0; i < st.u.size(); ++i) st.u[i] = ur(rng);

  SqpParams par;
  par.distortion.ideal = IdealElement::regular;
  double kappa = 0.3;

  auto eval_pieces = [&](const Vec& y, Vec* r, double* f, SpMat* dr_du, SpMat* dr_dy,
                         Vec* g_y) {
    st.y = y;
    st.sync_mesh();
    Vec R, Rmsh;
    SpMat dr_dx, dR_du, dR_dx, dM_dx;
    assemble(*model, st.mesh, st.space, st.u, 1, FluxKind::upwind, r, dr_du, &dr_dx);
    assemble(*model, st.mesh, st.space, st.u, 2, FluxKind::central, &R,
             g_y ? &dR_du : nullptr, g_y ? &dR_dx : nullptr);
    assemble_distortion(st.mesh, par.distortion, &Rmsh, g_y ? &dM_dx : nullptr);
    if (f) *f = 0.5 * R.squaredNorm() + 0.5 * kappa * kappa * Rmsh.squaredNorm();
    if (dr_dy) *dr_dy = dr_dx * st.pm.A();
    if (g_y)
      *g_y = (dR_dx * st.pm.A()).transpose() * R +
             kappa * kappa * ((dM_dx * st.pm.A()).transpose() * Rmsh);
  };

  Vec y0 = st.pm.invert(flatten_nodes(st.mesh.ref_nodes()));
  Vec r0, g_y;
  double f0;
  SpMat dr_du, dr_dy;
  eval_pieces(y0, &r0, &f0, &dr_du, &dr_dy, &g_y);
  // frozen multiplier from the u-gradient of f
  Vec R0;
  SpMat dR_du0, dR_dx0;
  assemble(*model, st.mesh, st.space, st.u, 2, FluxKind::central, &R0, &dR_du0, &dR_dx0);
  Vec g_u = dR_du0.transpose() * R0;
  Vec lam = multiplier_estimate(dr_du, g_u);
  Vec c = optimality(g_y, dr_dy, lam);

  std::normal_distribution<double> g01;
  for (int t = 0; t < 4; ++t) {
    Vec dy(y0.size());
    for (int i = 0; i < dy.size(); ++i) dy[i] = g01(rng);
    double h = 1e-6;
    Vec rp, rm;
    double fp, fm;
    eval_pieces(y0 + h * dy, &rp, &fp, nullptr, nullptr, nullptr);
    eval_pieces(y0 - h * dy, &rm, &fm, nullptr, nullptr, nullptr);
    double fd = ((fp - lam.dot(rp)) - (fm - lam.dot(rm))) / (2 * h);
    double an = c.dot(dy);
    CHECK(std::abs(fd - an) < 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("LM Hessian is positive definite on the nozzle problem") {
  auto mesh = segment_mesh(0, 10, 12, 1);
  auto model = nozzle_model();
  PlanarBoundarySet walls;
  PlanarBoundary l, r;
  l.normal = (Vec(1) << -1).finished();
  l.offset = 0;
  r.normal = (Vec(1) << 1).finished();
  r.offset = 10;
  walls.walls = {l, r};
  walls.tol = 1e-8;
  ParamMap pm(mesh, walls);
  DgSpace space(1, 2, 3, mesh.n_elems());
  // smooth admissible initial field
  Vec u(space.ndof());
  for (int e = 0; e < mesh.n_elems(); ++e)
    for (int i = 0; i < space.np; ++i) {
      double A = 2.5, rho = 1.0, v = 0.3, P = 0.5;
      u[space.dof(e, i, 0)] = A * rho;
      u[space.dof(e, i, 1)] = A * rho * v;
      u[space.dof(e, i, 2)] = A * (P / 0.4 + 0.5 * rho * v * v);
    }
  Vec R;
  SpMat dR_du, dR_dx;
  assemble(*model, mesh, space, u, 3, FluxKind::central, &R, &dR_du, &dR_dx);
  SpMat dR_dy = dR_dx * pm.A();
  SpMat D = assemble_elasticity(mesh, 0.2);
  SpMat AtDA = SpMat(pm.A().transpose()) * D * pm.A();
  SpMat B = build_hessian(dR_du, dR_dy, SpMat(), 0.0, 10.0, AtDA);
  Mat Bdense(B);
  Eigen::SelfAdjointEigenSolver<Mat> es(Bdense);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}
