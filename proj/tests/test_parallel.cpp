#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "hoist/assembly.hpp"

using namespace hoist;

TEST_CASE("OpenMP assembly matches the serial reference") {
  for (int q : {1, 2}) {
    auto mesh = rect_tri_mesh(-0.2, 1, 0, 1.2, 4, 4, q);
    auto model = burgers_spacetime_model("acc");
    for (int p : {1, 2}) {
      DgSpace space(2, p, 1, mesh.n_elems());
      std::mt19937 rng(41 + p + q);
      std::uniform_real_distribution<double> u01(1.0, 4.0);
      Vec u(space.ndof());
      for (int i = 0; i < u.size(); ++i) u[i] = u01(rng);
      for (int p_test : {p, p + 1}) {
        FluxKind fk = p_test == p ? FluxKind::upwind : FluxKind::central;
        Vec r_par;
        assemble(*model, mesh, space, u, p_test, fk, &r_par, nullptr, nullptr);
        Vec r_ser = assemble_residual_serial(*model, mesh, space, u, p_test, fk);
        double scale = std::max(1.0, r_ser.lpNorm<Eigen::Infinity>());
        CHECK((r_par - r_ser).lpNorm<Eigen::Infinity>() / scale < 1e-13);
      }
    }
  }
}

TEST_CASE("assembly is deterministic run-to-run") {
  auto mesh = rect_tri_mesh(0, 1, 0, 0.2, 5, 3, 1);
  std::vector<EulerBc> bcs(4);
  bcs[0].kind = EulerBcKind::st_dirichlet;
  bcs[0].prim = (Vec(3) << 1, 0, 1).finished();
  bcs[1].kind = EulerBcKind::st_initial;
  bcs[1].x_jump = 0.5;
  bcs[1].prim_left = (Vec(3) << 1, 0, 1).finished();
  bcs[1].prim_right = (Vec(3) << 0.125, 0, 0.1).finished();
  bcs[2].kind = EulerBcKind::slip_wall;
  bcs[3].kind = EulerBcKind::supersonic_outflow;
  auto model = euler_model(1, true, bcs);
  DgSpace space(2, 2, 3, mesh.n_elems());
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> ur(0.6, 1.2);
  Vec u(space.ndof());
  for (int i = 0; i < u.size(); i += 3) {
    double rho = ur(rng), v = 0.2 * ur(rng), P = ur(rng);
    u[i] = rho;
    u[i + 1] = rho * v;
    u[i + 2] = P / 0.4 + 0.5 * rho * v * v;
  }
  Vec r1, r2;
  SpMat a1, a2, b1, b2;
  assemble(*model, mesh, space, u, 3, FluxKind::central, &r1, &a1, &b1);
  assemble(*model, mesh, space, u, 3, FluxKind::central, &r2, &a2, &b2);
  CHECK((r1 - r2).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((Mat(a1) - Mat(a2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((Mat(b1) - Mat(b2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inverted element raises the assembly error") {
  auto mesh = rect_tri_mesh(0, 1, 0, 1, 2, 2, 1);
  auto model = advection_model("planar");
  DgSpace space(2, 1, 1, mesh.n_elems());
  Vec u = Vec::Ones(space.ndof());
  // fold one interior vertex far across the domain
  int victim = -1;
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (mesh.ref_nodes()(n, 0) > 0.4 && mesh.ref_nodes()(n, 0) < 0.6 &&
        mesh.ref_nodes()(n, 1) > 0.4 && mesh.ref_nodes()(n, 1) < 0.6)
      victim = n;
  REQUIRE(victim >= 0);
  mesh.phys_nodes()(victim, 0) = 5.0;
  Vec r;
  CHECK_THROWS_AS(assemble(*model, mesh, space, u, 1, FluxKind::upwind, &r, nullptr, nullptr),
                  inverted_element_error);
}
