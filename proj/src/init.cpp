#include <Eigen/SparseLU>

#include "hoist/driver.hpp"

namespace hoist {

namespace {

struct P0Work {
  DgSpace space;
  std::vector<double> h_e, vol_e;
  std::vector<Vec> xc;
};

bool admissible_everywhere(const ClawModel& model, const P0Work& w, const Vec& u) {
  int m = model.m;
  for (int e = 0; e < w.space.n_elems; ++e)
    if (!model.admissible(u.data() + e * m)) return false;
  return true;
}

// explicit local-time-stepping march; robust through entropy-violating
// transients that stall damped Newton
void explicit_march(const ClawModel& model, const SimplexMesh& mesh, const P0Work& w,
                    Vec& u, double target_ratio, int max_steps) {
  int m = model.m;
  Vec r;
  try {
    assemble(model, mesh, w.space, u, 0, FluxKind::upwind, &r, nullptr, nullptr);
  } catch (const std::exception&) {
    return;
  }
  double r0 = std::max(r.norm(), 1e-300);
  double cfl = 0.5;
  for (int it = 0; it < max_steps; ++it) {
    if (r.norm() <= target_ratio * r0) break;
    Vec trial = u;
    for (int e = 0; e < w.space.n_elems; ++e) {
      double lam = model.max_wavespeed(u.data() + e * m, w.xc[e].data());
      double dtau = cfl * w.h_e[e] / std::max(lam, 1e-12);
      for (int c = 0; c < m; ++c)
        trial[e * m + c] -= dtau / w.vol_e[e] * r[e * m + c];
    }
    if (!admissible_everywhere(model, w, trial)) {
      cfl *= 0.5;
      if (cfl < 1e-6) break;
      continue;
    }
    Vec r_new;
    try {
      assemble(model, mesh, w.space, trial, 0, FluxKind::upwind, &r_new, nullptr, nullptr);
    } catch (const std::exception&) {
      cfl *= 0.5;
      continue;
    }
    u = trial;
    r = r_new;
    cfl = std::min(cfl * 1.02, 0.9);
  }
}

// damped Newton with pseudo-transient continuation
bool implicit_ptc(const ClawModel& model, const SimplexMesh& mesh, const P0Work& w, Vec& u,
                  int max_iters, InitReport& rep) {
  int m = model.m;
  double cfl = 1.0;
  Vec r;
  SpMat dr_du;
  try {
    assemble(model, mesh, w.space, u, 0, FluxKind::upwind, &r, &dr_du, nullptr);
  } catch (const std::exception&) {
    return false;
  }
  double r0 = std::max(r.norm(), 1e-300);
  for (int it = 0; it < max_iters; ++it) {
    ++rep.iterations;
    rep.final_residual = r.lpNorm<Eigen::Infinity>();
    if (rep.final_residual < 1e-11 * std::max(1.0, r0)) return true;
    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      SpMat K = dr_du;
      std::vector<Eigen::Triplet<double>> diag;
      for (int e = 0; e < w.space.n_elems; ++e) {
        double lam = model.max_wavespeed(u.data() + e * m, w.xc[e].data());
        double dtau = cfl * w.h_e[e] / std::max(lam, 1e-12);
        for (int c = 0; c < m; ++c)
          diag.push_back({e * m + c, e * m + c, w.vol_e[e] / dtau});
      }
      SpMat Mdt(w.space.ndof(), w.space.ndof());
      Mdt.setFromTriplets(diag.begin(), diag.end());
      K = K + Mdt;
      Eigen::SparseLU<SpMat> lu(K);
      if (lu.info() != Eigen::Success) {
        cfl *= 0.3;
        continue;
      }
      Vec du = lu.solve(-r);
      Vec trial = u + du;
      if (!admissible_everywhere(model, w, trial)) {
        cfl *= 0.3;
        continue;
      }
      Vec r_new;
      SpMat dr_new;
      try {
        assemble(model, mesh, w.space, trial, 0, FluxKind::upwind, &r_new, &dr_new, nullptr);
      } catch (const std::exception&) {
        cfl *= 0.3;
        continue;
      }
      if (r_new.norm() > 3.0 * r.norm() && cfl > 1e-3) {
        cfl *= 0.3;
        continue;
      }
      cfl = std::min(cfl * (r_new.norm() < r.norm() ? 2.0 : 1.0), 1e14);
      u = trial;
      r = r_new;
      dr_du = dr_new;
      accepted = true;
    }
    if (!accepted) return false;  // wedged; caller may try the explicit march
  }
  return false;
}

}  // namespace

// First-order (p = 0) DG solve: damped Newton with pseudo-transient
// continuation, with an explicit local-time-stepping rescue phase when the
// implicit transient wedges (entropy-violating intermediate states)
Vec init_solution(const ClawModel& model, const SimplexMesh& mesh, int p,
                  const std::function<Vec(const Vec&)>& guess, InitReport* report) {
  int m = model.m, d = mesh.dim();
  P0Work w{DgSpace(d, 0, m, mesh.n_elems()), {}, {}, {}};
  Mat centroid(1, d);
  for (int c = 0; c < d; ++c) centroid(0, c) = 1.0 / (d + 1);

  Vec u0(w.space.ndof());
  w.h_e.resize(mesh.n_elems());
  w.vol_e.resize(mesh.n_elems());
  w.xc.resize(mesh.n_elems());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    w.xc[e] = mesh.map_phys(e, centroid).row(0).transpose();
    Vec g = guess(w.xc[e]);
    for (int c = 0; c < m; ++c) u0[w.space.dof(e, 0, c)] = g[c];
    auto meas = mesh.element_measures(e);
    w.h_e[e] = meas.l_min;
    w.vol_e[e] = std::abs(meas.v);
  }

  InitReport rep;
  Vec u = u0;
  rep.converged = implicit_ptc(model, mesh, w, u, 300, rep);
  if (!rep.converged) {
    Vec u2 = u0;
    explicit_march(model, mesh, w, u2, 1e-3, 20000);
    rep.converged = implicit_ptc(model, mesh, w, u2, 300, rep);
    if (rep.converged) u = u2;
  }
  if (!rep.converged) u = u0;  // fall back to the initial guess field
  if (report) *report = rep;

  // constant injection into degree p
  DgSpace space(d, p, m, mesh.n_elems());
  Vec up(space.ndof());
  for (int e = 0; e < mesh.n_elems(); ++e)
    for (int i = 0; i < space.np; ++i)
      for (int c = 0; c < m; ++c) up[space.dof(e, i, c)] = u[w.space.dof(e, 0, c)];
  return up;
}

}  // namespace hoist
