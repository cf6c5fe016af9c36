#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hoist/driver.hpp"

namespace hoist {

namespace {

std::string output_dir(const CaseConfig& cfg) {
  std::string root;
  if (const char* env = std::getenv("HOIST_OUTPUT_ROOT")) root = std::string(env) + "/";
  std::string dir = root + cfg.out_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

double mesh_h(const SimplexMesh& mesh) {
  double h = 0;
  for (int e = 0; e < mesh.n_elems(); ++e) h = std::max(h, mesh.element_measures(e).l_max);
  return h;
}

}  // namespace

RunOutput run_case(CaseConfig& cfg, bool write_outputs) {
  RunOutput out;
  HoistState& st = out.state;
  st.mesh = cfg.mesh;
  st.walls = cfg.walls;
  st.pm = ParamMap(st.mesh, st.walls);
  st.space = DgSpace(st.mesh.dim(), cfg.p, cfg.model->m, st.mesh.n_elems());
  st.y = st.pm.invert(flatten_nodes(st.mesh.phys_nodes()));
  st.u = init_solution(*cfg.model, st.mesh, cfg.p, cfg.init_guess, &out.init);

  std::ofstream events;
  EventLog log = nullptr;
  std::string dir;
  if (write_outputs) {
    dir = output_dir(cfg);
    events.open(dir + "/events.csv");
    events << "iter,event,id\n";
    log = [&events](int iter, const std::string& kind, int id) {
      if (kind != "iter") events << iter << "," << kind << "," << id << "\n";
    };
  }

  out.result = hoist_solve(*cfg.model, st, cfg.sqp, cfg.rob, log);

  if (write_outputs) {
    write_history_csv(dir + "/history.csv", out.result.history);
    write_mesh(st.mesh, dir + "/final.mesh");
    write_vtk(dir + "/solution.vtk", st.mesh, st.space, st.u);
    write_state(dir + "/state.txt", st);
  }
  return out;
}

ConvergenceRecord run_convergence_study(CaseConfig& cfg, int levels, bool write_outputs) {
  ConvergenceRecord rec;
  SimplexMesh base = cfg.mesh;
  for (int lev = 0; lev < levels; ++lev) {
    CaseConfig level_cfg = cfg;
    level_cfg.mesh = base;
    level_cfg.out_dir = cfg.out_dir + "/level" + std::to_string(lev);
    ConvergenceLevel cl;
    cl.level = lev;
    cl.n_elems = base.n_elems();
    cl.h = mesh_h(base);
    try {
      RunOutput run = run_case(level_cfg, write_outputs);
      cl.status = run.result.status;
      if (cfg.metric_kind == "iburg") {
        BurgersAccExact ex;
        IburgExactIface iface;
        iface.phi = [ex](double z, double t) { return ex.phi(z, t); };
        iface.z_s = [ex](double t) { return ex.shock_position(t); };
        iface.t_max = 1.0;
        iface.slice_z = 0.8;
        iface.shock_exit_time = ex.shock_exit_time();
        auto m = error_metrics_iburg(run.state.mesh, run.state.space, run.state.u, iface,
                                     cfg.rob.c7);
        cl.E1 = m.E_phi;
        cl.E2 = m.E_zs;
      } else if (cfg.metric_kind == "nozzle") {
        NozzleExact ex;
        NozzleExactIface iface;
        iface.rho = [ex](double x) { return ex.rho(x); };
        iface.x_s = ex.shock_position();
        iface.area = [ex](double x) { return ex.area(x); };
        auto m = error_metrics_nozzle(run.state.mesh, run.state.space, run.state.u, iface);
        cl.E1 = m.E_rho;
        cl.E2 = m.E_xs;
      }
    } catch (const std::exception&) {
      cl.status = 3;
    }
    rec.levels.push_back(cl);
    if (lev + 1 < levels) base = refine_uniform(base);
  }
  // segment-wise slopes
  for (size_t i = 1; i < rec.levels.size(); ++i) {
    auto& a = rec.levels[i - 1];
    auto& b = rec.levels[i];
    double lh = std::log(a.h / b.h);
    if (a.E1 > 0 && b.E1 > 0) b.slope1 = std::log(a.E1 / b.E1) / lh;
    if (a.E2 > 0 && b.E2 > 0) b.slope2 = std::log(a.E2 / b.E2) / lh;
  }
  if (write_outputs)
    write_convergence_csv(output_dir(cfg) + "/convergence.csv", cfg.p, cfg.q, rec);
  return rec;
}

}  // namespace hoist
