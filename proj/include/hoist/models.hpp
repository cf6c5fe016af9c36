#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoist/basis.hpp"
#include "hoist/dual.hpp"

namespace hoist {

// thrown when a flux/boundary evaluation reaches a nonphysical state; the
// line search treats it as merit = +inf rather than aborting
struct nonphysical_error : std::runtime_error {
  nonphysical_error() : std::runtime_error("nonphysical state") {}
};

// One conservation-law instance. Pointwise callbacks are provided for plain
// doubles and for forward-mode duals; Jacobians are obtained by seeding one
// direction at a time. Array conventions: U has m entries, x and n have d,
// the flux F is m x d row-major.
class ClawModel {
 public:
  virtual ~ClawModel() = default;

  int m = 1;  // state dimension
  int d = 1;  // space(-time) dimension

  virtual void flux(const double* U, const double* x, double* F) const = 0;
  virtual void flux(const Dual* U, const Dual* x, Dual* F) const = 0;
  virtual void source(const double* U, const double* x, double* S) const = 0;
  virtual void source(const Dual* U, const Dual* x, Dual* S) const = 0;
  // smoothed upwind / smoothed Roe interior flux, n the unit physical normal
  virtual void numflux(const double* Ul, const double* Ur, const double* n,
                       const double* x, double* H) const = 0;
  virtual void numflux(const Dual* Ul, const Dual* Ur, const Dual* n, const Dual* x,
                       Dual* H) const = 0;
  virtual void bc_state(int tag, const double* x, const double* n, const double* Uin,
                        double* Ubc) const = 0;
  virtual void bc_state(int tag, const Dual* x, const Dual* n, const Dual* Uin,
                        Dual* Ubc) const = 0;

  virtual bool admissible(const double* U) const { return true; }
  virtual double max_wavespeed(const double* U, const double* x) const = 0;

  // central flux used by the enriched residual
  template <class T>
  void central_flux(const T* Ul, const T* Ur, const T* n, const T* x, T* H) const {
    std::vector<T> Fl(m * d), Fr(m * d);
    flux(Ul, x, Fl.data());
    flux(Ur, x, Fr.data());
    for (int i = 0; i < m; ++i) {
      H[i] = T(0.0);
      for (int k = 0; k < d; ++k) H[i] += T(0.5) * (Fl[i * d + k] + Fr[i * d + k]) * n[k];
    }
  }
};

// ideal-gas pressure from primitive quantities
double ideal_gas_pressure(double rho, double v2, double rhoE, double gamma);

// ----- model factories ------------------------------------------------------

// steady linear scalar advection on a 2D domain; variant "planar" uses
// beta = (-1.25, 1), "trig" uses beta = (-sin(pi x2), 1); inflow data is the
// Heaviside of x1 on every boundary (upwinding selects where it applies)
std::unique_ptr<ClawModel> advection_model(const std::string& variant,
                                           double smooth_eps = 1e-2);

// space-time inviscid Burgers; bc variant "acc" (accelerating shock) or
// "form" (shock formation), carrying the matching initial/boundary data
std::unique_ptr<ClawModel> burgers_spacetime_model(const std::string& variant,
                                                   double mu1 = 4.0, double mu2 = 3.0,
                                                   double smooth_eps = 1e-2);

// quasi-1D Euler nozzle, A(x) = mu1 + (mu2-mu1)(10-x)x/25. Boundary states
// are full primitive end states applied through the upwinded flux (the
// characteristic content selects 2 conditions at the subsonic inlet, 1 at
// the subsonic exit); defaults are the 0.7 back-pressure solution values.
struct NozzleBc {
  double rho_in = 1.0, v_in = 0.196683478, P_in = 0.708759373;
  double rho_out = 0.705549945, v_out = 0.278766202, P_out = 0.496131574;
};
std::unique_ptr<ClawModel> nozzle_model(double mu1 = 3.0, double mu2 = 1.0,
                                        double gamma = 1.4, NozzleBc bc = {},
                                        double smooth_eps = 1e-2);

// Euler equations with smoothed Roe flux (Harten-Hyman fix on the acoustic
// waves). d_space = 1 with spacetime = true gives the 2D space-time system
// (Sod); d_space = 2 with spacetime = false the steady 2D system (diamond).
enum class EulerBcKind {
  supersonic_inflow,  // full prescribed primitive state
  supersonic_outflow, // interior state
  slip_wall,          // mirror spatial normal velocity
  st_initial,         // space-time t=0 face: prescribed primitive data(x)
  st_dirichlet,       // prescribed primitive state (space-time lateral)
};
struct EulerBc {
  EulerBcKind kind = EulerBcKind::supersonic_outflow;
  Vec prim;  // (rho, v_1..v_ds, P) where needed
  // piecewise-constant Riemann data for st_initial: value left/right of x_jump
  double x_jump = 0;
  Vec prim_left, prim_right;
};
std::unique_ptr<ClawModel> euler_model(int d_space, bool spacetime,
                                       std::vector<EulerBc> bcs, double gamma = 1.4,
                                       double smooth_eps = 1e-2);

}  // namespace hoist
