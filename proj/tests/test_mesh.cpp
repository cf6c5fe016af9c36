#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "hoist/mesh.hpp"

using namespace hoist;

namespace {

SimplexMesh single_triangle(int q = 1) {
  Mat v(3, 2);
  v << 0, 0, 1, 0, 0, 1;
  std::vector<std::vector<int>> conn = {{0, 1, 2}};
  std::vector<std::array<int, 3>> bf = {{0, 0, 0}, {0, 1, 0}, {0, 2, 0}};
  if (q == 1) return SimplexMesh(2, 1, v, v, conn, bf, 1);
  // q = 2: add edge midnodes
  Mat n(6, 2);
  n << 0, 0, 1, 0, 0, 1, 0.5, 0, 0.5, 0.5, 0, 0.5;
  return SimplexMesh(2, 2, n, n, {{0, 1, 2, 3, 4, 5}}, bf, 1);
}

// brute-force interior face count by matching sorted vertex tuples
int brute_force_interior_faces(const SimplexMesh& m) {
  std::map<std::vector<int>, int> count;
  for (int e = 0; e < m.n_elems(); ++e)
    for (int lf = 0; lf <= m.dim(); ++lf) {
      std::vector<int> key;
      for (int lv : face_vertices(m.dim(), lf)) key.push_back(m.elem_nodes(e)[lv]);
      std::sort(key.begin(), key.end());
      count[key]++;
    }
  int n = 0;
  for (auto& [k, c] : count)
    if (c == 2) ++n;
  return n;
}

}  // namespace

TEST_CASE("adjacency: single triangle and shared edge") {
  auto m1 = single_triangle();
  int interior = 0, boundary = 0;
  for (auto& f : m1.faces()) (f.boundary() ? boundary : interior)++;
  CHECK(interior == 0);
  CHECK(boundary == 3);

  Mat v(4, 2);
  v << 0, 0, 1, 0, 1, 1, 0, 1;
  std::vector<std::vector<int>> conn = {{0, 1, 2}, {0, 2, 3}};
  std::vector<std::array<int, 3>> bf = {{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 2, 0}};
  SimplexMesh m2(2, 1, v, v, conn, bf, 1);
  interior = boundary = 0;
  for (auto& f : m2.faces()) (f.boundary() ? boundary : interior)++;
  CHECK(interior == 1);
  CHECK(boundary == 4);
}

TEST_CASE("adjacency: structured 4x4 grid interior face count") {
  auto m = rect_tri_mesh(0, 1, 0, 1, 4, 4, 1);
  CHECK(m.n_elems() == 32);
  int interior = 0;
  for (auto& f : m.faces())
    if (!f.boundary()) ++interior;
  CHECK(interior == brute_force_interior_faces(m));
  CHECK(interior == 40);
}

TEST_CASE("adjacency errors") {
  Mat v(4, 2);
  v << 0, 0, 1, 0, 0, 1, 1, 1;
  // untagged boundary face
  CHECK_THROWS(SimplexMesh(2, 1, v, v, {{0, 1, 2}}, {{0, 0, 0}, {0, 1, 0}}, 1));
  // face shared by more than two elements
  std::vector<std::vector<int>> conn = {{0, 1, 2}, {0, 2, 3}, {2, 0, 3}};
  CHECK_THROWS(SimplexMesh(2, 1, v, v, conn, {}, 1));
}

TEST_CASE("mapping jacobian: identity and affine scaling") {
  auto m = single_triangle();
  Mat G;
  double g;
  Vec xi(2);
  xi << 0.3, 0.3;
  m.mapping_jacobian(0, xi, G, g);
  CHECK((G - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g == doctest::Approx(1.0));

  auto m2 = single_triangle();
  m2.phys_nodes() *= 2.0;
  m2.mapping_jacobian(0, xi, G, g);
  CHECK((G - 2.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g == doctest::Approx(4.0));
}

TEST_CASE("mapping jacobian matches finite differences on curved q<=3 elements") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int q : {2, 3}) {
    auto m = rect_tri_mesh(0, 1, 0, 1, 1, 1, q);
    for (int n = 0; n < m.n_nodes(); ++n)
      for (int c = 0; c < 2; ++c) m.phys_nodes()(n, c) += u(rng);
    for (auto xi_pair : {std::pair{0.21, 0.37}, {0.5, 0.25}, {0.1, 0.6}}) {
      Vec xi(2);
      xi << xi_pair.first, xi_pair.second;
      Mat G;
      double g;
      m.mapping_jacobian(0, xi, G, g);
      // central differences of the map G_h = phys o ref^{-1} along ref axes
      double h = 1e-6;
      Mat pt = xi.transpose();
      Vec Xc = m.map_ref(0, pt).row(0).transpose();
      for (int c = 0; c < 2; ++c) {
        Vec Xp = Xc, Xm = Xc;
        Xp[c] += h;
        Xm[c] -= h;
        Vec xip, xim;
        REQUIRE(m.invert_map(0, Xp, false, xip, 1e-3));
        REQUIRE(m.invert_map(0, Xm, false, xim, 1e-3));
        Vec fp = m.map_phys(0, xip.transpose()).row(0).transpose();
        Vec fm = m.map_phys(0, xim.transpose()).row(0).transpose();
        Vec fd = (fp - fm) / (2 * h);
        for (int r = 0; r < 2; ++r)
          CHECK(std::abs(G(r, c) - fd[r]) < 1e-7 * std::max(1.0, std::abs(G(r, c))));
      }
    }
  }
}

TEST_CASE("element measures: unit right triangle") {
  auto m = single_triangle();
  auto e = m.element_measures(0);
  CHECK(e.v == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(e.v0 == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(e.l_min == doctest::Approx(1.0));
  CHECK(e.l_max == doctest::Approx(std::sqrt(2.0)));
  CHECK(e.g_inf == doctest::Approx(1.0));
  CHECK(e.g_sup == doctest::Approx(1.0));

  m.phys_nodes() *= 2.0;
  auto e2 = m.element_measures(0);
  CHECK(e2.v == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(e2.v0 == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("element measures: strongly curved q=2 edge flags ill-conditioning") {
  auto m = single_triangle(2);
  // drag the hypotenuse midnode far inward
  m.phys_nodes()(4, 0) = 0.05;
  m.phys_nodes()(4, 1) = 0.05;
  auto e = m.element_measures(0);
  // dense sampling oracle of det(grad G_h)
  double ginf = 1e300, gsup = -1e300;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; i + j <= 60; ++j) {
      Vec xi(2);
      xi << i / 60.0, j / 60.0;
      Mat G;
      double g;
      m.mapping_jacobian(0, xi, G, g);
      ginf = std::min(ginf, g);
      gsup = std::max(gsup, g);
    }
  CHECK(e.g_inf <= ginf + 1e-10 + 0.05 * std::abs(ginf));
  CHECK(e.g_sup >= gsup - 1e-10 - 0.05 * std::abs(gsup));
  CHECK(e.g_inf / e.g_sup < 0.05);
}

TEST_CASE("collapse: four-triangle fan around an interior edge -> two triangles") {
  // vertices: a=0,b=1 interior edge; c,d apexes; outer square corners
  Mat v(6, 2);
  v << 0.3, 0.5, 0.7, 0.5, 0.5, 1.0, 0.5, 0.0, 0.0, 0.5, 1.0, 0.5;
  std::vector<std::vector<int>> conn = {
      {0, 1, 2}, {1, 0, 3}, {0, 2, 4}, {3, 0, 4}, {1, 5, 2}, {5, 1, 3}};
  // boundary: hull edges
  std::vector<std::array<int, 3>> bf = {{2, 1, 0}, {3, 2, 0}, {4, 1, 0}, {5, 2, 0},
                                        {2, 2, 0}, {3, 1, 0}, {4, 0, 0}, {5, 0, 0}};
  // adjust: enumerate hull edges programmatically instead
  bf.clear();
  {
    std::map<std::vector<int>, std::vector<std::pair<int, int>>> inc;
    for (int e = 0; e < int(conn.size()); ++e)
      for (int lf = 0; lf < 3; ++lf) {
        std::vector<int> key;
        for (int lv : face_vertices(2, lf)) key.push_back(conn[e][lv]);
        std::sort(key.begin(), key.end());
        inc[key].push_back({e, lf});
      }
    for (auto& [k, i] : inc)
      if (i.size() == 1) bf.push_back({i[0].first, i[0].second, 0});
  }
  SimplexMesh m(2, 1, v, v, conn, bf, 1);
  REQUIRE(m.n_elems() == 6);
  double v0_before = 0;
  for (int e = 0; e < m.n_elems(); ++e) v0_before += m.element_measures(e).v0;

  auto res = collapse_edge(m, 0, 1, 0);
  REQUIRE(res.has_value());
  CHECK(res->mesh.n_elems() == 4);  // fan of 4 around edge (0,1)? two per side
  res->mesh.validate();
  double v0_after = 0;
  for (int e = 0; e < res->mesh.n_elems(); ++e) v0_after += res->mesh.element_measures(e).v0;
  CHECK(v0_after == doctest::Approx(v0_before).epsilon(1e-12));
}

TEST_CASE("collapse: two-triangle mesh sharing the edge is rejected") {
  Mat v(4, 2);
  v << 0, 0, 1, 0, 1, 1, 0, 1;
  std::vector<std::vector<int>> conn = {{0, 2, 3}, {2, 0, 1}};
  std::vector<std::array<int, 3>> bf = {{0, 1, 0}, {0, 2, 0}, {1, 1, 0}, {1, 2, 0}};
  SimplexMesh m(2, 1, v, v, conn, bf, 1);
  CollapseError err;
  auto res = collapse_edge(m, 0, 2, 0, &err);
  CHECK(!res.has_value());
  CHECK(err == CollapseError::empty_mesh);
}

TEST_CASE("collapse: structured grid interior edge drops element count by two") {
  auto m = rect_tri_mesh(0, 1, 0, 1, 4, 4, 1);
  // find an interior edge: diagonal of an interior cell
  int a = -1, b = -1;
  for (auto& f : m.faces()) {
    if (f.boundary()) continue;
    auto fv = face_vertices(2, f.face_l);
    int u = m.elem_nodes(f.elem_l)[fv[0]], w = m.elem_nodes(f.elem_l)[fv[1]];
    bool u_int = m.ref_nodes()(u, 0) > 0.1 && m.ref_nodes()(u, 0) < 0.9 &&
                 m.ref_nodes()(u, 1) > 0.1 && m.ref_nodes()(u, 1) < 0.9;
    bool w_int = m.ref_nodes()(w, 0) > 0.1 && m.ref_nodes()(w, 0) < 0.9 &&
                 m.ref_nodes()(w, 1) > 0.1 && m.ref_nodes()(w, 1) < 0.9;
    if (u_int && w_int) {
      a = u;
      b = w;
      break;
    }
  }
  REQUIRE(a >= 0);
  int incident = 0;
  for (int e = 0; e < m.n_elems(); ++e) {
    const auto& en = m.elem_nodes(e);
    bool ha = false, hb = false;
    for (int vv = 0; vv < 3; ++vv) {
      if (en[vv] == a) ha = true;
      if (en[vv] == b) hb = true;
    }
    if (ha && hb) ++incident;
  }
  CHECK(incident == 2);  // oracle: enumerate incident elements
  auto res = collapse_edge(m, a, b, a);
  REQUIRE(res.has_value());
  CHECK(res->mesh.n_elems() == m.n_elems() - 2);
  res->mesh.validate();
  // watertightness: every interior face has two elements (validate checks
  // vertex sanity; adjacency construct enforces the rest)
  for (auto& f : res->mesh.faces())
    if (!f.boundary()) CHECK(f.elem_r >= 0);
}

TEST_CASE("collapse on q=2 mesh preserves watertightness and reference volume") {
  auto m = rect_tri_mesh(0, 1, 0, 1, 3, 3, 2);
  double v0_before = 0;
  for (int e = 0; e < m.n_elems(); ++e) v0_before += m.element_measures(e).v0;
  // collapse an interior-ish edge
  int a = -1, b = -1;
  for (auto& f : m.faces()) {
    if (f.boundary()) continue;
    auto fv = face_vertices(2, f.face_l);
    int u = m.elem_nodes(f.elem_l)[fv[0]], w = m.elem_nodes(f.elem_l)[fv[1]];
    bool ub = false, wb = false;
    for (auto& g : m.faces())
      if (g.boundary()) {
        auto gv = face_vertices(2, g.face_l);
        for (int lv : gv) {
          if (m.elem_nodes(g.elem_l)[lv] == u) ub = true;
          if (m.elem_nodes(g.elem_l)[lv] == w) wb = true;
        }
      }
    if (!ub && !wb) {
      a = u;
      b = w;
      break;
    }
  }
  REQUIRE(a >= 0);
  auto res = collapse_edge(m, a, b, a);
  REQUIRE(res.has_value());
  res->mesh.validate();
  double v0_after = 0;
  for (int e = 0; e < res->mesh.n_elems(); ++e) v0_after += res->mesh.element_measures(e).v0;
  // the stretched neighbors absorb the deleted elements' volume exactly:
  // the mesh keeps covering the reference domain
  CHECK(v0_after == doctest::Approx(v0_before).epsilon(1e-10));
}

TEST_CASE("straighten element is idempotent and exact") {
  auto m = single_triangle(2);
  Mat before = m.phys_nodes();
  m.straighten_element(0, true);
  CHECK((m.phys_nodes() - before).cwiseAbs().maxCoeff() < 1e-15);  // already straight

  m.phys_nodes()(3, 1) = 0.2;  // curve an edge
  m.straighten_element(0, true);
  CHECK(m.phys_nodes()(3, 1) == doctest::Approx(0.0));
  Mat after = m.phys_nodes();
  m.straighten_element(0, true);
  CHECK((m.phys_nodes() - after).cwiseAbs().maxCoeff() == 0.0);  // idempotent
}

TEST_CASE("straighten q=2 segment returns midpoint") {
  auto m = segment_mesh(0, 1, 1, 2);
  m.phys_nodes()(2, 0) = 0.61;
  m.straighten_element(0, true);
  CHECK(m.phys_nodes()(2, 0) == doctest::Approx(0.5));
}

TEST_CASE("mesh file round trip is bitwise identical") {
  auto m = single_triangle(2);
  m.phys_nodes()(3, 0) = 1.0 / 3.0;  // non-representable decimal
  m.set_fixed(0, true);
  write_mesh(m, "rt1.mesh");
  auto m2 = read_mesh("rt1.mesh");
  write_mesh(m2, "rt2.mesh");
  std::ifstream f1("rt1.mesh"), f2("rt2.mesh");
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  CHECK(m2.fixed()[0] == 1);
  std::remove("rt1.mesh");
  std::remove("rt2.mesh");
}

TEST_CASE("uniform refinement quadruples triangles, doubles segments") {
  auto m = rect_tri_mesh(0, 1, 0, 1, 3, 2, 1);
  auto r = refine_uniform(m);
  CHECK(r.n_elems() == 4 * m.n_elems());
  r.validate();
  int nb_coarse = 0, nb_fine = 0;
  for (auto& f : m.faces())
    if (f.boundary()) ++nb_coarse;
  for (auto& f : r.faces())
    if (f.boundary()) ++nb_fine;
  CHECK(nb_fine == 2 * nb_coarse);

  auto s = segment_mesh(0, 1, 4, 2);
  auto rs = refine_uniform(s);
  CHECK(rs.n_elems() == 8);
  rs.validate();
}

TEST_CASE("point location and inverse mapping") {
  auto m = rect_tri_mesh(0, 2, 0, 1, 4, 2, 2);
  Vec x(2);
  x << 1.234, 0.567;
  int e;
  Vec xi;
  REQUIRE(m.locate(x, e, xi));
  Vec back = m.map_phys(e, xi.transpose()).row(0).transpose();
  CHECK((back - x).norm() < 1e-12);
}
