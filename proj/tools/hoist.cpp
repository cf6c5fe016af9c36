#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>

#include "hoist/driver.hpp"

using namespace hoist;

namespace {

int do_run(const std::string& config_path) {
  CaseConfig cfg = load_config(config_path);
  std::cout << "case " << cfg.name << "  p=" << cfg.p << " q=" << cfg.q << "  |E|="
            << cfg.mesh.n_elems() << "\n";
  RunOutput out = run_case(cfg);
  std::cout << (out.init.converged ? "init: p=0 solve converged in "
                                   : "init: p=0 solve FELL BACK after ")
            << out.init.iterations << " iterations\n";
  std::cout << "status " << out.result.status << " after " << out.result.iterations
            << " iterations: |r| = " << out.result.norm_r
            << "  |c| = " << out.result.norm_c << "\n";
  if (!out.result.message.empty()) std::cout << out.result.message << "\n";
  if (cfg.metric_kind == "nozzle") {
    NozzleExact ex;
    NozzleExactIface iface;
    iface.rho = [ex](double x) { return ex.rho(x); };
    iface.x_s = ex.shock_position();
    iface.area = [ex](double x) { return ex.area(x); };
    auto m = error_metrics_nozzle(out.state.mesh, out.state.space, out.state.u, iface);
    std::cout << "tracked shock at " << m.xs_tracked << " (exact " << iface.x_s
              << "), E_rho = " << m.E_rho << ", E_xs = " << m.E_xs << "\n";
  } else if (cfg.metric_kind == "iburg") {
    BurgersAccExact ex;
    IburgExactIface iface;
    iface.phi = [ex](double z, double t) { return ex.phi(z, t); };
    iface.z_s = [ex](double t) { return ex.shock_position(t); };
    iface.shock_exit_time = ex.shock_exit_time();
    auto m = error_metrics_iburg(out.state.mesh, out.state.space, out.state.u, iface,
                                 cfg.rob.c7);
    std::cout << "E_phi = " << m.E_phi << ", E_zs = " << m.E_zs << "\n";
  }
  return out.result.status;
}

int do_study(const std::string& config_path, int levels) {
  CaseConfig cfg = load_config(config_path);
  if (levels <= 0) levels = std::max(1, cfg.study_levels);
  auto rec = run_convergence_study(cfg, levels);
  std::cout << "level  n_elems        h            E1       slope1          E2       slope2\n";
  for (const auto& l : rec.levels) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%3d  %8d  %10.4g  %12.5g  %8.3f  %12.5g  %8.3f\n",
                  l.level, l.n_elems, l.h, l.E1, l.slope1, l.E2, l.slope2);
    std::cout << buf;
  }
  for (const auto& l : rec.levels)
    if (l.status != 0) return 2;
  return 0;
}

int do_check_jacobians(const std::string& config_path) {
  CaseConfig cfg = load_config(config_path);
  HoistState st;
  st.mesh = cfg.mesh;
  st.walls = cfg.walls;
  st.pm = ParamMap(st.mesh, st.walls);
  st.space = DgSpace(st.mesh.dim(), cfg.p, cfg.model->m, st.mesh.n_elems());
  st.y = st.pm.invert(flatten_nodes(st.mesh.phys_nodes()));
  st.u = init_solution(*cfg.model, st.mesh, cfg.p, cfg.init_guess);

  std::mt19937 rng(1234);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int p_test : {cfg.p, cfg.p + 1}) {
    FluxKind fk = (p_test == cfg.p) ? FluxKind::upwind : FluxKind::central;
    Vec r;
    SpMat du, dx;
    assemble(*cfg.model, st.mesh, st.space, st.u, p_test, fk, &r, &du, &dx);
    for (int probe = 0; probe < 10; ++probe) {
      Vec dir_u(st.space.ndof());
      for (int i = 0; i < dir_u.size(); ++i) dir_u[i] = g(rng);
      double h = 1e-6;
      Vec rp, rm;
      Vec up = st.u + h * dir_u, um = st.u - h * dir_u;
      assemble(*cfg.model, st.mesh, st.space, up, p_test, fk, &rp, nullptr, nullptr);
      assemble(*cfg.model, st.mesh, st.space, um, p_test, fk, &rm, nullptr, nullptr);
      Vec fd = (rp - rm) / (2 * h), an = du * dir_u;
      worst = std::max(worst, (fd - an).lpNorm<Eigen::Infinity>() /
                                  std::max(1.0, fd.lpNorm<Eigen::Infinity>()));

      int nx = st.mesh.n_nodes() * st.mesh.dim();
      Vec dir_x(nx);
      for (int i = 0; i < nx; ++i) dir_x[i] = g(rng);
      double hx = 1e-7 * st.mesh.bbox_diameter();
      Mat saved = st.mesh.phys_nodes();
      st.mesh.phys_nodes() = saved + hx * unflatten_nodes(dir_x, st.mesh.dim());
      assemble(*cfg.model, st.mesh, st.space, st.u, p_test, fk, &rp, nullptr, nullptr);
      st.mesh.phys_nodes() = saved - hx * unflatten_nodes(dir_x, st.mesh.dim());
      assemble(*cfg.model, st.mesh, st.space, st.u, p_test, fk, &rm, nullptr, nullptr);
      st.mesh.phys_nodes() = saved;
      Vec fdx = (rp - rm) / (2 * hx), anx = dx * dir_x;
      worst = std::max(worst, (fdx - anx).lpNorm<Eigen::Infinity>() /
                                  std::max(1.0, fdx.lpNorm<Eigen::Infinity>()));
    }
  }
  std::cout << "max relative Jacobian mismatch vs finite differences: " << worst << "\n";
  std::cout << (worst < 1e-6 ? "PASS" : "FAIL") << " (tolerance 1e-6)\n";
  return worst < 1e-6 ? 0 : 3;
}

int do_export(const std::string& state_path, const std::string& config_path,
              const std::string& format, const std::string& out_path) {
  CaseConfig cfg = load_config(config_path);
  HoistState st = read_state(state_path, cfg);
  if (format == "mesh")
    write_mesh(st.mesh, out_path);
  else if (format == "vtk")
    write_vtk(out_path, st.mesh, st.space, st.u);
  else if (format == "csv") {
    std::ofstream out(out_path);
    out << "node";
    for (int c = 0; c < st.mesh.dim(); ++c) out << ",x" << c;
    out << "\n";
    for (int n = 0; n < st.mesh.n_nodes(); ++n) {
      out << n;
      for (int c = 0; c < st.mesh.dim(); ++c) out << "," << st.mesh.phys_nodes()(n, c);
      out << "\n";
    }
  } else {
    std::cerr << "unknown format: " << format << "\n";
    return 3;
  }
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"high-order implicit shock tracking"};
  app.require_subcommand(1);

  std::string config_path, state_path, format = "vtk", out_path = "export.out";
  int levels = 0;

  auto* run = app.add_subcommand("run", "solve one configuration");
  run->add_option("config", config_path, "config file")->required();

  auto* study = app.add_subcommand("study", "mesh convergence study");
  study->add_option("config", config_path, "config file")->required();
  study->add_option("--levels", levels, "number of refinement levels");

  auto* check = app.add_subcommand("check-jacobians", "finite-difference Jacobian check");
  check->add_option("config", config_path, "config file")->required();

  auto* exp = app.add_subcommand("export", "convert a saved state");
  exp->add_option("state", state_path, "state file from a run")->required();
  exp->add_option("--config", config_path, "config file of the case")->required();
  exp->add_option("--format", format, "mesh|vtk|csv");
  exp->add_option("--out", out_path, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(config_path);
    if (study->parsed()) return do_study(config_path, levels);
    if (check->parsed()) return do_check_jacobians(config_path);
    if (exp->parsed()) return do_export(state_path, config_path, format, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
