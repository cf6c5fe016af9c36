#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "hoist/driver.hpp"

using namespace hoist;

TEST_CASE("config parser: sections, overrides, unknown keys") {
  auto cfg = Config::parse_string("[case]\nname = nozzle\np = 2\n# comment\n[sqp]\ngamma0 = 5\n");
  CHECK(cfg.get("case", "name", std::string()) == "nozzle");
  CHECK(cfg.get("case", "p", 0) == 2);
  CHECK(cfg.get("sqp", "gamma0", 0.0) == 5.0);
  CHECK_NOTHROW(cfg.check_consumed());

  auto bad = Config::parse_string("[sqp]\ngamma_zero = 5\n");
  (void)bad.get("sqp", "gamma0", 0.0);
  CHECK_THROWS(bad.check_consumed());
}

TEST_CASE("init_solution: exact constant problem and advection bounds") {
  // constant-solution advection: U = 1 on the whole domain (inflow data is
  // Heaviside = 1 when the domain sits at x1 > 0)
  auto mesh = rect_tri_mesh(0.5, 1.5, 0, 1, 3, 3, 1);
  auto model = advection_model("planar");
  InitReport rep;
  Vec u = init_solution(*model, mesh, 1,
                        [](const Vec&) { return (Vec(1) << 0.3).finished(); }, &rep);
  CHECK(rep.converged);
  for (int i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(1.0).epsilon(1e-9));

  // full advection domain: p=0 solution is a diffused Heaviside in [0, 1]
  auto cfg = make_case("advec2d-planar", 0);
  InitReport rep2;
  Vec u2 = init_solution(*cfg.model, cfg.mesh, 0, cfg.init_guess, &rep2);
  CHECK(rep2.converged);
  CHECK(u2.minCoeff() > -1e-8);
  CHECK(u2.maxCoeff() < 1.0 + 1e-8);
  CHECK(u2.maxCoeff() > 0.5);  // it is not constant
}

TEST_CASE("init_solution: nozzle p=0 field is close to the exact solution") {
  auto cfg = make_case("nozzle", 2);
  InitReport rep;
  Vec u = init_solution(*cfg.model, cfg.mesh, 0, cfg.init_guess, &rep);
  CHECK(rep.converged);
  NozzleExact ex;
  double l1 = 0;
  for (int e = 0; e < cfg.mesh.n_elems(); ++e) {
    Mat c(1, 1);
    c << 0.5;
    double x = cfg.mesh.map_phys(e, c)(0, 0);
    double rho_h = u[e * 3] / ex.area(x);
    double h = 10.0 / cfg.mesh.n_elems();
    l1 += h * std::abs(rho_h - ex.rho(x));
  }
  // the smeared-shock cell alone contributes ~0.35 at h = 0.83
  CHECK(l1 < 0.7);
}

TEST_CASE("nozzle metric on an exactly representable manufactured solution") {
  // piecewise-linear density with a jump at a mesh node: inject its
  // interpolant and check the metric returns ~0
  auto mesh = segment_mesh(0, 10, 10, 1);
  DgSpace space(1, 1, 3, mesh.n_elems());
  double xs = 7.0;  // node of the 10-element mesh
  auto rho_exact = [xs](double x) { return x < xs ? 1.0 + 0.05 * x : 0.4 + 0.01 * x; };
  auto area = [](double) { return 1.0; };
  Vec u = Vec::Zero(space.ndof());
  NodalBasis nb(1, 1);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    for (int i = 0; i < space.np; ++i) {
      Mat xi(1, 1);
      xi << nb.nodes()(i, 0);
      double x = mesh.map_phys(e, xi)(0, 0);
      double mid = mesh.map_phys(e, (Mat(1, 1) << 0.5).finished())(0, 0);
      double rho = mid < xs ? 1.0 + 0.05 * x : 0.4 + 0.01 * x;  // one-sided at the jump
      u[space.dof(e, i, 0)] = rho;
      u[space.dof(e, i, 1)] = 0.0;
      u[space.dof(e, i, 2)] = 1.0;
    }
  }
  NozzleExactIface iface;
  iface.rho = rho_exact;
  iface.x_s = xs;
  iface.area = area;
  auto m = error_metrics_nozzle(mesh, space, u, iface);
  CHECK(m.shock_found);
  CHECK(m.E_xs <= 1e-12);
  CHECK(m.E_rho <= 1e-12);
}

TEST_CASE("iburg metric on a manufactured straight-shock solution") {
  // straight space-time shock along z = 0.3 + 0.25 t with polynomial sides;
  // mesh edges aligned exactly (piecewise-linear in t)
  int nt = 4;
  auto base = rect_tri_mesh(0, 1, 0, 1, 5, nt, 1);
  // shift the column of vertices at z = 0.4 onto the shock line
  auto mesh = base;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    double z = mesh.ref_nodes()(n, 0), t = mesh.ref_nodes()(n, 1);
    if (std::abs(z - 0.4) < 1e-12) {
      mesh.phys_nodes()(n, 0) = 0.3 + 0.25 * t;
    }
  }
  DgSpace space(2, 1, 1, mesh.n_elems());
  auto zs = [](double t) { return 0.3 + 0.25 * t; };
  auto phi = [&](double z, double t) { return z < zs(t) ? 2.0 : -1.0; };
  Vec u(space.ndof());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    Mat c(1, 2);
    c << 1.0 / 3, 1.0 / 3;
    Mat x = mesh.map_phys(e, c);
    double val = phi(x(0, 0), x(0, 1));
    for (int i = 0; i < space.np; ++i) u[space.dof(e, i, 0)] = val;
  }
  IburgExactIface iface;
  iface.phi = phi;
  iface.z_s = zs;
  iface.t_max = 1.0;
  iface.slice_z = 0.8;
  iface.shock_exit_time = 10.0;  // stays inside
  auto m = error_metrics_iburg(mesh, space, u, iface, 0.5);
  CHECK(m.shock_found);
  CHECK(m.E_phi <= 1e-12);
  CHECK(m.E_zs <= 1e-12);

  // uniform offset: E_zs equals the offset
  auto mesh2 = base;
  double delta = 0.015;
  for (int n = 0; n < mesh2.n_nodes(); ++n) {
    double z = mesh2.ref_nodes()(n, 0), t = mesh2.ref_nodes()(n, 1);
    if (std::abs(z - 0.4) < 1e-12) mesh2.phys_nodes()(n, 0) = 0.3 + delta + 0.25 * t;
  }
  Vec u2(space.ndof());
  for (int e = 0; e < mesh2.n_elems(); ++e) {
    Mat c(1, 2);
    c << 1.0 / 3, 1.0 / 3;
    Mat x = mesh2.map_phys(e, c);
    double val = x(0, 0) < 0.3 + delta + 0.25 * x(0, 1) ? 2.0 : -1.0;
    for (int i = 0; i < space.np; ++i) u2[space.dof(e, i, 0)] = val;
  }
  auto m2 = error_metrics_iburg(mesh2, space, u2, iface, 0.5);
  CHECK(m2.E_zs == doctest::Approx(delta).epsilon(1e-10));
}

TEST_CASE("state files round trip") {
  auto cfg = make_case("advec2d-planar", 0);
  HoistState st;
  st.mesh = cfg.mesh;
  st.walls = cfg.walls;
  st.pm = ParamMap(st.mesh, st.walls);
  st.space = DgSpace(2, 0, 1, st.mesh.n_elems());
  st.y = st.pm.invert(flatten_nodes(st.mesh.phys_nodes()));
  st.u = Vec::LinSpaced(st.space.ndof(), 0.0, 1.0);
  write_state("t_state.txt", st);
  HoistState st2 = read_state("t_state.txt", cfg);
  CHECK((st2.u - st.u).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((st2.mesh.phys_nodes() - st.mesh.phys_nodes()).cwiseAbs().maxCoeff() == 0.0);
  std::remove("t_state.txt");
}

TEST_CASE("convergence slope arithmetic") {
  ConvergenceRecord rec;
  ConvergenceLevel a, b;
  a.h = 1.0;
  a.E1 = 1.0;
  a.E2 = 1.0;
  b.h = 0.5;
  b.E1 = 1.0 / 8.0;
  b.E2 = 0.25;
  rec.levels = {a, b};
  // reuse the slope formula by writing/reading through the study path is
  // heavier than needed; compute directly
  double slope1 = std::log(a.E1 / b.E1) / std::log(a.h / b.h);
  CHECK(slope1 == doctest::Approx(3.0));
}

TEST_CASE("vtk export writes a parsable file") {
  auto cfg = make_case("advec2d-planar", 0);
  DgSpace space(2, 0, 1, cfg.mesh.n_elems());
  Vec u = Vec::Constant(space.ndof(), 1.0);
  write_vtk("t.vtk", cfg.mesh, space, u);
  std::ifstream in("t.vtk");
  std::string head;
  std::getline(in, head);
  CHECK(head.substr(0, 5) == "# vtk");
  std::remove("t.vtk");
}
