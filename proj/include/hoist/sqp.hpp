#pragma once

#include <functional>

#include "hoist/assembly.hpp"
#include "hoist/distortion.hpp"
#include "hoist/param.hpp"

namespace hoist {

struct SqpParams {
  double gamma0 = 1e-2, gamma_min = 1e-6, tau = 2.0, sigma1 = 1e-2, sigma2 = 1e-1;
  double kappa0 = 1e-2, kappa_min = 1e-10, upsilon = 0.75, xi = 1.0;
  bool kappa_enabled = true;  // mesh-quality objective term present at all
  bool kappa_adapt = true;    // periodic decrease rule active
  double varpi = 1.2, rho = 0.95, mu_max = 1e10;
  double ls_c = 1e-4, ls_backtrack = 0.5;
  int ls_max_backtracks = 20;
  double alpha_min = 1e-4;  // fallback when the direction is not descent
  double eps1 = 1e-8, eps2 = 1e-6;
  int max_iters = 500;
  int M = 200;      // robustness / adaptation freeze iteration
  double L = 1.0;   // domain reference length for the gamma update
  double elast_nu = 0.2;
  DistortionOptions distortion;
};

// solution state threaded through the SQP loop and the robustness measures
struct HoistState {
  SimplexMesh mesh;
  PlanarBoundarySet walls;
  ParamMap pm;
  DgSpace space;
  Vec u, y;
  int p_enriched() const { return space.p + 1; }
  // push y through the parametrization into the mesh
  void sync_mesh() { mesh.phys_nodes() = unflatten_nodes(pm.apply(y), mesh.dim()); }
};

struct IterRecord {
  int k = 0;
  double norm_r = 0, norm_R = 0, norm_c = 0, norm_kRmsh = 0;
  double alpha = 0, gamma = 0, kappa = 0, mu = 0;
  int backtracks = 0, n_removed = 0, n_reinit = 0, n_straightened = 0;
};

struct HoistResult {
  int status = 3;  // 0 converged, 2 max iterations, 3 error
  std::string message;
  std::vector<IterRecord> history;
  double norm_r = 0, norm_c = 0;
  int iterations = 0;
};

// ----- individual SQP operations (unit-testable pieces) ----------------------

// solves (dr/du)^T lambda = df_du
Vec multiplier_estimate(const SpMat& dr_du, const Vec& df_du);

// c = df_dy - (dr/dy)^T lambda, with dr/dy = dr_dx * A
Vec optimality(const Vec& df_dy, const SpMat& dr_dy, const Vec& lambda);

// Levenberg-Marquardt Hessian blocks assembled into one (Nu+Ny) matrix;
// F = [R; kappa Rmsh], elasticity term gamma A^T D A enters the y block
SpMat build_hessian(const SpMat& dR_du, const SpMat& dR_dy, const SpMat& dRmsh_dy,
                    double kappa, double gamma, const SpMat& AtDA);

// KKT solve of [[B, J^T], [J, 0]] [dz; eta] = -[g; r]; returns false when the
// factorization fails
bool solve_kkt(const SpMat& B, const SpMat& J, const Vec& g, const Vec& r, Vec& dz,
               Vec& eta);

// l1 merit penalty update
double merit_penalty(double mu_prev, double gT_dz, double dzT_B_dz, double norm_r_l1,
                     const SqpParams& par);

struct LineSearchResult {
  double alpha = 1.0;
  int backtracks = 0;
  bool descent = true;       // phi'(0) < 0 held
  bool sufficient = true;    // Armijo condition satisfied
};
// phi(alpha) may return +inf for rejected (nonphysical/inverted) states
LineSearchResult line_search(const std::function<double(double)>& phi, double phi0,
                             double dphi0, const SqpParams& par);

double update_gamma(double gamma, double dx_norm, const SqpParams& par);
double update_kappa(double kappa_prev, double f_err, double f_msh, int k,
                    const SqpParams& par);

// isotropic linear elasticity stiffness on the reference mesh, E_e = 1/v0_e
SpMat assemble_elasticity(const SimplexMesh& mesh, double nu);

// ----- full solve -------------------------------------------------------------

struct RobustnessParams {
  double c1 = 0.2, c2 = 1e-10, c3 = 0.2, c4 = 0.0, c4p = 0.05;
  double c5 = 1e-2, c6 = 1e-2, c7 = 0.25, c8 = 1e-6;
  bool enabled = true;           // whole Upsilon stage
  bool reinit_enabled = true;
  bool straighten_reinit = false;
  int force_backtracks = 5;      // line-search count that forces re-init
};

// event sink for run logs (CSV rows of removal/re-init events)
using EventLog = std::function<void(int iter, const std::string& kind, int id)>;

HoistResult hoist_solve(const ClawModel& model, HoistState& state, SqpParams par,
                        const RobustnessParams& rob, EventLog log = nullptr);

}  // namespace hoist
