#include "hoist/sqp.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

#include "hoist/robustness.hpp"

namespace hoist {

Vec multiplier_estimate(const SpMat& dr_du, const Vec& df_du) {
  Eigen::SparseLU<SpMat> lu;
  SpMat At = SpMat(dr_du.transpose());
  lu.compute(At);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("multiplier estimate: singular dr/du");
  return lu.solve(df_du);
}

Vec optimality(const Vec& df_dy, const SpMat& dr_dy, const Vec& lambda) {
  return df_dy - dr_dy.transpose() * lambda;
}

SpMat build_hessian(const SpMat& dR_du, const SpMat& dR_dy, const SpMat& dRmsh_dy,
                    double kappa, double gamma, const SpMat& AtDA) {
  int nu = int(dR_du.cols()), ny = int(dR_dy.cols());
  SpMat Buu = SpMat(dR_du.transpose()) * dR_du;
  SpMat Buy = SpMat(dR_du.transpose()) * dR_dy;
  SpMat Byy = SpMat(dR_dy.transpose()) * dR_dy;
  if (kappa != 0.0 && dRmsh_dy.rows() > 0)
    Byy = Byy + SpMat((kappa * kappa) * (SpMat(dRmsh_dy.transpose()) * dRmsh_dy));
  if (gamma != 0.0 && AtDA.rows() > 0) Byy = Byy + SpMat(gamma * AtDA);

  std::vector<Eigen::Triplet<double>> trips;
  auto add_block = [&](const SpMat& Mb, int r0, int c0) {
    for (int k = 0; k < Mb.outerSize(); ++k)
      for (SpMat::InnerIterator it(Mb, k); it; ++it)
        trips.push_back({int(it.row()) + r0, int(it.col()) + c0, it.value()});
  };
  add_block(Buu, 0, 0);
  add_block(Buy, 0, nu);
  add_block(SpMat(Buy.transpose()), nu, 0);
  add_block(Byy, nu, nu);
  SpMat B(nu + ny, nu + ny);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

bool solve_kkt(const SpMat& B, const SpMat& J, const Vec& g, const Vec& r, Vec& dz,
               Vec& eta) {
  int nz = int(B.rows()), nr = int(J.rows());
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it)
      trips.push_back({int(it.row()), int(it.col()), it.value()});
  for (int k = 0; k < J.outerSize(); ++k)
    for (SpMat::InnerIterator it(J, k); it; ++it) {
      trips.push_back({nz + int(it.row()), int(it.col()), it.value()});
      trips.push_back({int(it.col()), nz + int(it.row()), it.value()});
    }
  SpMat K(nz + nr, nz + nr);
  K.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) return false;
  Vec rhs(nz + nr);
  rhs << -g, -r;
  Vec sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  dz = sol.head(nz);
  eta = sol.tail(nr);
  return true;
}

double merit_penalty(double mu_prev, double gT_dz, double dzT_B_dz, double norm_r_l1,
                     const SqpParams& par) {
  if (norm_r_l1 == 0.0) return mu_prev;
  double mu_bar = (gT_dz + 0.5 * dzT_B_dz) / ((1.0 - par.rho) * norm_r_l1);
  return std::min(std::max(par.varpi * mu_bar, mu_prev), par.mu_max);
}

LineSearchResult line_search(const std::function<double(double)>& phi, double phi0,
                             double dphi0, const SqpParams& par) {
  LineSearchResult out;
  if (!(dphi0 < 0.0)) {
    out.descent = false;
    out.sufficient = false;
    out.alpha = par.alpha_min;
    return out;
  }
  double alpha = 1.0;
  for (int bt = 0; bt <= par.ls_max_backtracks; ++bt) {
    double val = phi(alpha);
    if (val <= phi0 + par.ls_c * alpha * dphi0) {
      out.alpha = alpha;
      out.backtracks = bt;
      return out;
    }
    // remember any raw decrease for the exhausted-backtracking fallback
    if (bt == par.ls_max_backtracks) {
      out.alpha = alpha;
      out.backtracks = bt;
      out.sufficient = false;
      if (!(val < phi0)) out.alpha = par.alpha_min;
      return out;
    }
    alpha *= par.ls_backtrack;
  }
  return out;
}

double update_gamma(double gamma, double dx_norm, const SqpParams& par) {
  double bar = gamma;
  if (dx_norm < par.sigma1 * par.L)
    bar = gamma / par.tau;
  else if (dx_norm > par.sigma2 * par.L)
    bar = gamma * par.tau;
  return std::max(bar, par.gamma_min);
}

double update_kappa(double kappa_prev, double f_err, double f_msh, int k,
                    const SqpParams& par) {
  if (k <= par.M && f_err < par.xi * kappa_prev * kappa_prev * f_msh)
    return std::max(par.upsilon * kappa_prev, par.kappa_min);
  return kappa_prev;
}

// ----- full solve ---------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Eval {
  Vec r, R, Rmsh;
  SpMat dr_du, dr_dy, dR_du, dR_dy, dRmsh_dy;
  double f_err = 0, f_msh = 0;
  bool has_jac = false;
};

// evaluate residuals (and optionally Jacobians) at the state's (u, y)
bool evaluate(const ClawModel& model, HoistState& st, const SqpParams& par, bool want_jac,
              Eval& ev) {
  try {
    st.sync_mesh();
    SpMat dr_dx, dR_dx, dRmsh_dx;
    assemble(model, st.mesh, st.space, st.u, st.space.p, FluxKind::upwind, &ev.r,
             want_jac ? &ev.dr_du : nullptr, want_jac ? &dr_dx : nullptr);
    assemble(model, st.mesh, st.space, st.u, st.p_enriched(), FluxKind::central, &ev.R,
             want_jac ? &ev.dR_du : nullptr, want_jac ? &dR_dx : nullptr);
    if (par.kappa_enabled)
      assemble_distortion(st.mesh, par.distortion, &ev.Rmsh,
                          want_jac ? &dRmsh_dx : nullptr);
    else
      ev.Rmsh = Vec();
    if (want_jac) {
      ev.dr_dy = dr_dx * st.pm.A();
      ev.dR_dy = dR_dx * st.pm.A();
      if (par.kappa_enabled) ev.dRmsh_dy = dRmsh_dx * st.pm.A();
    }
    ev.f_err = 0.5 * ev.R.squaredNorm();
    ev.f_msh = par.kappa_enabled ? 0.5 * ev.Rmsh.squaredNorm() : 0.0;
    ev.has_jac = want_jac;
    return true;
  } catch (const nonphysical_error&) {
    return false;
  } catch (const inverted_element_error&) {
    return false;
  }
}

}  // namespace

HoistResult hoist_solve(const ClawModel& model, HoistState& state, SqpParams par,
                        const RobustnessParams& rob, EventLog log) {
  HoistResult result;
  double gamma = par.gamma0, kappa = par.kappa_enabled ? par.kappa0 : 0.0;
  double mu = 0.0;
  SpMat D = assemble_elasticity(state.mesh, par.elast_nu);
  SpMat AtDA = SpMat(state.pm.A().transpose()) * D * state.pm.A();
  bool elasticity_dirty = false;

  Eval ev;
  if (!evaluate(model, state, par, true, ev)) {
    result.message = "initial state not evaluable";
    return result;
  }

  for (int k = 0; k < par.max_iters; ++k) {
    if (elasticity_dirty) {
      D = assemble_elasticity(state.mesh, par.elast_nu);
      AtDA = SpMat(state.pm.A().transpose()) * D * state.pm.A();
      elasticity_dirty = false;
    }
    if (par.kappa_enabled && par.kappa_adapt)
      kappa = update_kappa(kappa, ev.f_err, ev.f_msh, k, par);

    // objective gradient and Gauss-Newton Hessian with the current kappa
    Vec g_u = ev.dR_du.transpose() * ev.R;
    Vec g_y = ev.dR_dy.transpose() * ev.R;
    if (par.kappa_enabled) g_y += (kappa * kappa) * (ev.dRmsh_dy.transpose() * ev.Rmsh);
    Vec g(g_u.size() + g_y.size());
    g << g_u, g_y;
    SpMat B = build_hessian(ev.dR_du, ev.dR_dy, ev.dRmsh_dy, kappa, gamma, AtDA);
    SpMat J(ev.dr_du.rows(), ev.dr_du.cols() + ev.dr_dy.cols());
    {
      std::vector<Eigen::Triplet<double>> trips;
      for (int kk = 0; kk < ev.dr_du.outerSize(); ++kk)
        for (SpMat::InnerIterator it(ev.dr_du, kk); it; ++it)
          trips.push_back({int(it.row()), int(it.col()), it.value()});
      for (int kk = 0; kk < ev.dr_dy.outerSize(); ++kk)
        for (SpMat::InnerIterator it(ev.dr_dy, kk); it; ++it)
          trips.push_back({int(it.row()), int(it.col()) + int(ev.dr_du.cols()), it.value()});
      J.setFromTriplets(trips.begin(), trips.end());
    }

    Vec dz, eta;
    if (!solve_kkt(B, J, g, ev.r, dz, eta)) {
      gamma *= par.tau;
      B = build_hessian(ev.dR_du, ev.dR_dy, ev.dRmsh_dy, kappa, gamma, AtDA);
      if (!solve_kkt(B, J, g, ev.r, dz, eta)) {
        result.message = "singular KKT system";
        result.history.push_back({k, ev.r.norm(), ev.R.norm(), 0.0,
                                  par.kappa_enabled ? kappa * ev.Rmsh.norm() : 0.0, 0.0,
                                  gamma, kappa, mu, 0, 0, 0, 0});
        return result;
      }
    }

    int nu = int(state.u.size()), ny = int(state.y.size());
    Vec du = dz.head(nu), dy = dz.tail(ny);

    double gT_dz = g.dot(dz);
    double dzT_B_dz = dz.dot(B * dz);
    mu = merit_penalty(mu, gT_dz, dzT_B_dz, ev.r.lpNorm<1>(), par);

    double f0 = ev.f_err + kappa * kappa * ev.f_msh;
    double phi0 = f0 + mu * ev.r.lpNorm<1>();
    double dphi0 = gT_dz - mu * ev.r.lpNorm<1>();

    // trial evaluation cache so the accepted step's residuals are reused
    Eval trial;
    HoistState trial_state = state;
    auto phi = [&](double alpha) -> double {
      trial_state.u = state.u + alpha * du;
      trial_state.y = state.y + alpha * dy;
      if (!evaluate(model, trial_state, par, false, trial)) return kInf;
      double f = trial.f_err + kappa * kappa * trial.f_msh;
      return f + mu * trial.r.lpNorm<1>();
    };
    LineSearchResult ls = line_search(phi, phi0, dphi0, par);
    // ensure the trial cache matches the chosen alpha
    double phival = phi(ls.alpha);
    if (phival == kInf) {
      // even the fallback step is not evaluable; shrink until it is
      double a = ls.alpha;
      int guard = 0;
      while (phival == kInf && guard++ < 60) {
        a *= 0.5;
        phival = phi(a);
      }
      ls.alpha = a;
      if (phival == kInf) {
        result.message = "line search could not find an evaluable state";
        return result;
      }
    }

    // mesh motion of the accepted SQP step, for the gamma update
    double dx_norm = (state.pm.A() * (trial_state.y - state.y)).norm();

    IterRecord rec{k,
                   ev.r.norm(),
                   ev.R.norm(),
                   0.0,
                   par.kappa_enabled ? kappa * ev.Rmsh.norm() : 0.0,
                   ls.alpha,
                   gamma,
                   kappa,
                   mu,
                   ls.backtracks,
                   0,
                   0,
                   0};

    // accepted step
    state.u = trial_state.u;
    state.y = trial_state.y;
    state.sync_mesh();

    // convergence check at the new iterate (needs Jacobians for c)
    Eval ev_new;
    if (!evaluate(model, state, par, true, ev_new)) {
      result.message = "post-step state not evaluable";
      result.history.push_back(rec);
      return result;
    }
    double norm_r_new = ev_new.r.norm();
    Vec gu_new = ev_new.dR_du.transpose() * ev_new.R;
    Vec gy_new = ev_new.dR_dy.transpose() * ev_new.R;
    if (par.kappa_enabled)
      gy_new += (kappa * kappa) * (ev_new.dRmsh_dy.transpose() * ev_new.Rmsh);
    double norm_c_new = kInf;
    try {
      Vec lam = multiplier_estimate(ev_new.dr_du, gu_new);
      norm_c_new = optimality(gy_new, ev_new.dr_dy, lam).norm();
    } catch (const std::exception&) {
      // singular dr/du away from convergence: keep iterating
    }
    rec.norm_c = norm_c_new;
    result.history.push_back(rec);
    if (log) log(k, "iter", 0);

    if (norm_r_new <= par.eps1 && norm_c_new <= par.eps2) {
      result.status = 0;
      result.iterations = k + 1;
      result.norm_r = norm_r_new;
      result.norm_c = norm_c_new;
      return result;
    }

    // robustness modification of the accepted step
    bool modified = false;
    if (rob.enabled && k + 1 <= par.M) {
      UpsilonReport rep = apply_upsilon(state, rob, k + 1, par.M, norm_r_new,
                                        ls.backtracks > rob.force_backtracks);
      result.history.back().n_removed = rep.removal.n_removed_elems;
      result.history.back().n_reinit = int(rep.reinitialized.size());
      result.history.back().n_straightened = int(rep.straightened.size());
      if (log) {
        for (const auto& c : rep.removal.collapses) log(k + 1, "collapse", c.elem);
        for (int e : rep.straightened) log(k + 1, "straighten", e);
        for (int e : rep.reinitialized) log(k + 1, "reinit", e);
      }
      modified = rep.modified;
      if (modified) {
        elasticity_dirty = true;
        // rebalance the mesh-quality weight after a structural change
        Eval ev_post;
        if (!evaluate(model, state, par, true, ev_post)) {
          result.message = "state not evaluable after robustness step";
          return result;
        }
        if (par.kappa_enabled && par.kappa_adapt && ev_post.f_msh > 0.0)
          kappa = std::max(par.upsilon * std::sqrt(ev_post.f_err / ev_post.f_msh),
                           par.kappa_min);
        ev = std::move(ev_post);
      }
    }
    if (!modified) ev = std::move(ev_new);

    gamma = update_gamma(gamma, dx_norm, par);
  }

  result.status = 2;
  result.iterations = par.max_iters;
  if (!result.history.empty()) {
    result.norm_r = result.history.back().norm_r;
    result.norm_c = result.history.back().norm_c;
  }
  result.message = "maximum iterations reached";
  return result;
}

}  // namespace hoist
