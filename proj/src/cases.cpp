#include <stdexcept>

#include "hoist/driver.hpp"

namespace hoist {

namespace {

PlanarBoundary wall(std::initializer_list<double> n, double c) {
  PlanarBoundary w;
  w.normal = Vec(int(n.size()));
  int i = 0;
  for (double v : n) w.normal[i++] = v;
  w.offset = c;
  return w;
}

PlanarBoundarySet rect_walls(double x0, double x1, double y0, double y1) {
  PlanarBoundarySet bs;
  bs.walls = {wall({-1, 0}, -x0), wall({0, -1}, -y0), wall({1, 0}, x1), wall({0, 1}, y1)};
  return bs;
}

void pin_nodes(SimplexMesh& mesh, const std::vector<Vec>& coords) {
  double tol = 1e-8 * mesh.bbox_diameter();
  for (const Vec& x : coords) {
    int found = -1;
    for (int n = 0; n < mesh.n_nodes(); ++n)
      if ((mesh.ref_nodes().row(n).transpose() - x).norm() <= tol) {
        found = n;
        break;
      }
    if (found < 0) throw std::runtime_error("fixed-node coordinate not found in mesh");
    mesh.set_fixed(found, true);
  }
}

}  // namespace

CaseConfig make_case(const std::string& name, int p, int q) {
  CaseConfig c;
  c.name = name;
  c.p = p;
  auto& sqp = c.sqp;
  auto& rob = c.rob;

  if (name == "advec2d-planar" || name == "advec2d-trig") {
    bool trig = name == "advec2d-trig";
    c.q = (q > 0) ? q : (trig ? 2 : 1);
    c.model = advection_model(trig ? "trig" : "planar");
    c.mesh = rect_tri_mesh(-1, 1, 0, 1, 8, 4, c.q);
    c.walls = rect_walls(-1, 1, 0, 1);
    c.fixed_coords = {(Vec(2) << 0, 0).finished()};
    sqp.gamma0 = 1e-2;
    sqp.gamma_min = 1e-6;
    sqp.tau = 2.0;
    sqp.kappa0 = sqp.kappa_min = 1e-10;
    sqp.kappa_adapt = false;
    sqp.L = 2.0;
    rob.c1 = 0.2;
    rob.c2 = 1e-10;
    rob.c3 = 0.2;
    rob.c4 = 0.0;
    rob.c4p = trig ? 0.05 : 0.0;
    rob.reinit_enabled = false;  // p = 0 solution
    c.init_guess = [](const Vec&) { return (Vec(1) << 0.5).finished(); };
  } else if (name == "iburg-acc") {
    c.q = (q > 0) ? q : p;  // curved space-time shock: q = p
    c.model = burgers_spacetime_model("acc");
    c.mesh = rect_tri_mesh(-0.2, 1, 0, 1.2, 6, 6, c.q, +1);
    c.walls = rect_walls(-0.2, 1, 0, 1.2);
    c.fixed_coords = {(Vec(2) << 0, 0).finished()};
    sqp.gamma0 = (p == 1) ? 1.0 : 1e-2;
    sqp.gamma_min = (p == 1) ? 1.0 : 1e-2;
    sqp.tau = 2.0;
    sqp.kappa0 = 1e-2;
    sqp.kappa_min = 1e-10;
    sqp.upsilon = 0.75;
    sqp.xi = 1.0;
    sqp.L = 1.2;
    rob = RobustnessParams{};
    rob.c4p = 0.05;
    rob.c5 = 1e-1;
    rob.c6 = 1e-2;
    rob.c7 = 1.0;
    rob.c8 = 1e-2;
    c.metric_kind = "iburg";
    c.init_guess = [](const Vec& x) {
      return (Vec(1) << (x[0] < 0.0 ? 4.0 : 3.0 * (x[0] - 1.0))).finished();
    };
  } else if (name == "iburg-form") {
    c.q = (q > 0) ? q : p;
    c.model = burgers_spacetime_model("form");
    c.mesh = rect_tri_mesh(-1, 1, 0, 1, 20, 10, c.q, +1);
    c.walls = rect_walls(-1, 1, 0, 1);
    sqp.gamma0 = sqp.gamma_min = 1e-4;
    sqp.tau = 2.0;
    sqp.kappa0 = 1e-2;
    sqp.kappa_min = 1e-10;
    sqp.upsilon = 0.75;
    sqp.xi = 1.0;
    sqp.L = 2.0;
    rob = RobustnessParams{};
    rob.c3 = 0.33;
    rob.c4p = 0.01;
    rob.c5 = 1e-1;
    rob.c6 = 1e-2;
    rob.c7 = 0.2;
    rob.c8 = 1e-6;
    rob.straighten_reinit = true;
    c.init_guess = [](const Vec& x) {
      double z = x[0];
      double v = 1.2 * std::exp(-(z + 0.5) * (z + 0.5) / 0.025) -
                 std::exp(-(z - 0.5) * (z - 0.5) / 0.025);
      return (Vec(1) << v).finished();
    };
  } else if (name == "nozzle") {
    c.q = (q > 0) ? q : 1;
    NozzleExact ex;
    NozzleBc bc;
    bc.rho_in = ex.rho(0.0);
    bc.v_in = ex.velocity(0.0);
    bc.P_in = ex.pressure(0.0);
    bc.rho_out = ex.rho(10.0);
    bc.v_out = ex.velocity(10.0);
    bc.P_out = ex.pressure(10.0);
    c.model = nozzle_model(3.0, 1.0, 1.4, bc);
    c.mesh = segment_mesh(0, 10, 12, c.q);
    PlanarBoundarySet bs;
    bs.walls = {wall({-1}, 0), wall({1}, 10)};
    c.walls = bs;
    sqp.gamma0 = 10.0;
    sqp.gamma_min = 1e-2;
    sqp.tau = 2.0;
    sqp.kappa_enabled = false;  // no mesh-quality term in 1D
    sqp.L = 10.0;
    rob = RobustnessParams{};
    rob.c4p = 0.05;
    rob.c5 = 1e-2;
    rob.c6 = 1e-2;
    rob.c7 = 0.25;
    rob.c8 = (p == 1) ? 1e-1 : 1e-6;
    c.metric_kind = "nozzle";
    c.init_guess = [ex](const Vec& x) {
      // smooth subsonic profile: exact inflow state carried across
      Vec U = ex.state(0.0);
      double A = ex.area(x[0]);
      Vec out(3);
      out << U[0] / ex.area(0.0) * A, U[1] / ex.area(0.0) * A, U[2] / ex.area(0.0) * A;
      return out;
    };
  } else if (name == "sod") {
    c.q = (q > 0) ? q : 1;
    std::vector<EulerBc> bcs(4);
    bcs[0].kind = EulerBcKind::st_dirichlet;
    bcs[0].prim = (Vec(3) << 1, 0, 1).finished();
    bcs[1].kind = EulerBcKind::st_initial;
    bcs[1].x_jump = 0.5;
    bcs[1].prim_left = (Vec(3) << 1, 0, 1).finished();
    bcs[1].prim_right = (Vec(3) << 0.125, 0, 0.1).finished();
    bcs[2].kind = EulerBcKind::slip_wall;  // v = 0 prescribed at z = 1
    bcs[3].kind = EulerBcKind::supersonic_outflow;  // final time
    c.model = euler_model(1, true, bcs);
    c.mesh = read_mesh("data/sod108.mesh");
    if (c.q > c.mesh.degree()) c.mesh = elevate_mesh(c.mesh, c.q);
    c.walls = rect_walls(0, 1, 0, 0.2);
    c.fixed_coords = {(Vec(2) << 0.5, 0).finished()};
    sqp.gamma0 = 1e-5;
    sqp.gamma_min = 1e-8;
    sqp.tau = 1.2;
    sqp.kappa0 = 1e-6;
    sqp.kappa_min = 1e-10;
    sqp.upsilon = 0.75;
    sqp.xi = 2.0;
    sqp.L = 1.0;
    rob = RobustnessParams{};
    rob.c1 = 0.15;
    rob.c3 = 0.2;
    rob.c4 = 0.05;
    rob.c4p = 0.05;
    rob.c5 = 1e-2;
    rob.c6 = 1e-2;
    rob.c7 = 0.0;
    rob.c8 = 1e-6;
    // shock-agnostic start: the Riemann initial data only
    c.init_guess = [](const Vec& x) {
      Vec U(3);
      if (x[0] < 0.5)
        U << 1.0, 0.0, 1.0 / 0.4;
      else
        U << 0.125, 0.0, 0.1 / 0.4;
      return U;
    };
  } else if (name == "diamond") {
    c.q = (q > 0) ? q : 2;
    // Mach 2 tunnel flow; tags: 0 inflow, 1 bottom, 2 outflow, 3 top,
    // 4..7 diamond faces
    double gamma = 1.4;
    Vec inflow(4);
    inflow << 1.0, 2.0, 0.0, 1.0 / gamma;  // rho, vx, vy, P (c = 1, M = 2)
    std::vector<EulerBc> bcs(8);
    bcs[0].kind = EulerBcKind::supersonic_inflow;
    bcs[0].prim = inflow;
    bcs[1].kind = EulerBcKind::slip_wall;
    bcs[2].kind = EulerBcKind::supersonic_outflow;
    bcs[3].kind = EulerBcKind::slip_wall;
    for (int i = 4; i < 8; ++i) bcs[i].kind = EulerBcKind::slip_wall;
    c.model = euler_model(2, false, bcs, gamma);
    c.mesh = read_mesh("data/diamond220.mesh");
    if (c.q > c.mesh.degree()) c.mesh = elevate_mesh(c.mesh, c.q);
    PlanarBoundarySet bs = rect_walls(0, 5, 0, 1.5);
    // diamond (2,0.75) - (2.5,0.875) - (3,0.75) - (2.5,0.625), normals inward
    // to the flow domain (outward from the domain = into the diamond)
    auto face_wall = [&](double ax, double ay, double bx, double by) {
      Vec t = (Vec(2) << bx - ax, by - ay).finished();
      PlanarBoundary w;
      w.normal = (Vec(2) << t[1], -t[0]).finished().normalized();
      // orient outward with respect to the flow domain: away from the
      // diamond centroid (2.5, 0.75)
      Vec mid = (Vec(2) << 0.5 * (ax + bx), 0.5 * (ay + by)).finished();
      Vec cen = (Vec(2) << 2.5, 0.75).finished();
      if (w.normal.dot(cen - mid) > 0) w.normal = -w.normal;
      w.offset = w.normal.dot(mid);
      return w;
    };
    bs.walls.push_back(face_wall(2.0, 0.75, 2.5, 0.875));    // upper leading
    bs.walls.push_back(face_wall(2.5, 0.875, 3.0, 0.75));    // upper trailing
    bs.walls.push_back(face_wall(3.0, 0.75, 2.5, 0.625));    // lower trailing
    bs.walls.push_back(face_wall(2.5, 0.625, 2.0, 0.75));    // lower leading
    c.walls = bs;
    sqp.gamma0 = 1.0;
    sqp.gamma_min = 1e-2;
    sqp.tau = 1.2;
    sqp.kappa0 = 1e-3;
    sqp.kappa_min = 1e-8;
    sqp.upsilon = 0.5;
    sqp.xi = 0.5;
    sqp.L = 5.0;
    rob = RobustnessParams{};
    rob.c1 = 0.25;
    rob.c3 = 0.25;
    rob.c4 = 1e-3;
    rob.c4p = 0.0;
    rob.c5 = 1e-2;
    rob.c6 = 1e-2;
    rob.c7 = 0.5;
    rob.c8 = 1e-4;
    rob.straighten_reinit = true;
    c.init_guess = [inflow, gamma](const Vec&) {
      Vec U(4);
      double ke = inflow[1] * inflow[1] + inflow[2] * inflow[2];
      U << inflow[0], inflow[0] * inflow[1], inflow[0] * inflow[2],
          inflow[3] / (gamma - 1.0) + 0.5 * inflow[0] * ke;
      return U;
    };
  } else {
    throw std::runtime_error("unknown case: " + name);
  }

  c.walls.tol = 1e-8 * std::max(1.0, c.mesh.bbox_diameter());
  pin_nodes(c.mesh, c.fixed_coords);
  c.sqp.distortion.ideal = IdealElement::regular;  // K* everywhere in scope
  c.rob.force_backtracks = 5;
  return c;
}

CaseConfig load_config(const std::string& path) {
  Config cfg = Config::parse_file(path);
  std::string name = cfg.get("case", "name", std::string());
  if (name.empty()) throw std::runtime_error("config missing [case] name");
  int p = cfg.get("case", "p", 1);
  int q = cfg.get("case", "q", -1);
  CaseConfig c = make_case(name, p, q);
  c.out_dir = cfg.get("case", "out", std::string("out/") + name);
  c.study_levels = cfg.get("case", "levels", 0);
  if (cfg.has("case", "mesh")) {
    c.mesh = read_mesh(cfg.get("case", "mesh", std::string()));
    if (c.q > c.mesh.degree()) c.mesh = elevate_mesh(c.mesh, c.q);
    for (const Vec& x : c.fixed_coords) {
      double tol = 1e-8 * c.mesh.bbox_diameter();
      for (int n = 0; n < c.mesh.n_nodes(); ++n)
        if ((c.mesh.ref_nodes().row(n).transpose() - x).norm() <= tol)
          c.mesh.set_fixed(n, true);
    }
  }

  auto& s = c.sqp;
  s.gamma0 = cfg.get("sqp", "gamma0", s.gamma0);
  s.gamma_min = cfg.get("sqp", "gamma_min", s.gamma_min);
  s.tau = cfg.get("sqp", "tau", s.tau);
  s.sigma1 = cfg.get("sqp", "sigma1", s.sigma1);
  s.sigma2 = cfg.get("sqp", "sigma2", s.sigma2);
  s.kappa0 = cfg.get("sqp", "kappa0", s.kappa0);
  s.kappa_min = cfg.get("sqp", "kappa_min", s.kappa_min);
  s.upsilon = cfg.get("sqp", "upsilon", s.upsilon);
  s.xi = cfg.get("sqp", "xi", s.xi);
  s.kappa_enabled = cfg.get("sqp", "kappa_enabled", s.kappa_enabled);
  s.kappa_adapt = cfg.get("sqp", "kappa_adapt", s.kappa_adapt);
  s.varpi = cfg.get("sqp", "varpi", s.varpi);
  s.rho = cfg.get("sqp", "rho", s.rho);
  s.mu_max = cfg.get("sqp", "mu_max", s.mu_max);
  s.eps1 = cfg.get("sqp", "eps1", s.eps1);
  s.eps2 = cfg.get("sqp", "eps2", s.eps2);
  s.max_iters = cfg.get("sqp", "max_iters", s.max_iters);
  s.M = cfg.get("sqp", "M", s.M);
  s.L = cfg.get("sqp", "L", s.L);
  s.elast_nu = cfg.get("sqp", "elast_nu", s.elast_nu);
  s.alpha_min = cfg.get("sqp", "alpha_min", s.alpha_min);
  s.distortion.smoothing = cfg.get("sqp", "distortion_smoothing", s.distortion.smoothing);
  std::string ideal = cfg.get("sqp", "ideal", std::string("regular"));
  if (ideal == "regular")
    s.distortion.ideal = IdealElement::regular;
  else if (ideal == "reference")
    s.distortion.ideal = IdealElement::reference;
  else
    throw std::runtime_error("config [sqp] ideal: expected regular|reference");

  auto& r = c.rob;
  r.c1 = cfg.get("robustness", "c1", r.c1);
  r.c2 = cfg.get("robustness", "c2", r.c2);
  r.c3 = cfg.get("robustness", "c3", r.c3);
  r.c4 = cfg.get("robustness", "c4", r.c4);
  r.c4p = cfg.get("robustness", "c4p", r.c4p);
  r.c5 = cfg.get("robustness", "c5", r.c5);
  r.c6 = cfg.get("robustness", "c6", r.c6);
  r.c7 = cfg.get("robustness", "c7", r.c7);
  r.c8 = cfg.get("robustness", "c8", r.c8);
  r.enabled = cfg.get("robustness", "enabled", r.enabled);
  r.reinit_enabled = cfg.get("robustness", "reinit", r.reinit_enabled);
  r.straighten_reinit = cfg.get("robustness", "straighten_reinit", r.straighten_reinit);

  cfg.check_consumed();
  return c;
}

}  // namespace hoist
