#pragma once

#include <functional>

#include "hoist/basis.hpp"

namespace hoist {

// ----- quasi-1D transonic nozzle with a normal shock -------------------------
// Normalization: rho(0) = 1 and stagnation sound speed c0 = 1 (so the inflow
// stagnation enthalpy is 1/(gamma-1)). The shock position is the root of
// P(10)/P(0) = p_ratio_exit; the exit density of that solution is what the
// boundary state imposes (0.70555 for the 0.7 back-pressure case).
class NozzleExact {
 public:
  NozzleExact(double mu1 = 3.0, double mu2 = 1.0, double gamma = 1.4,
              double p_ratio_exit = 0.7);

  double area(double x) const;
  double shock_position() const { return xs_; }
  double stagnation_enthalpy() const;  // imposed at the inflow
  // primitive fields
  double rho(double x) const;
  double velocity(double x) const;
  double pressure(double x) const;
  // conservative state (A rho, A rho v, A rho E)
  Vec state(double x) const;

  double mach_from_area_ratio(double ratio, bool supersonic) const;

 private:
  double mach(double x) const;
  double exit_pressure(double xs) const;
  double mu1_, mu2_, g_, p_ratio_exit_;
  double rho0_, p0_, c0_ = 1.0;
  double xs_ = 0, p0_post_ = 0, astar_post_ = 0;
};

// ----- exact Riemann problem for the 1D Euler equations ----------------------
struct RiemannExact {
  RiemannExact(Vec prim_left, Vec prim_right, double gamma = 1.4, double x0 = 0.5);

  double p_star = 0, v_star = 0;
  double rho_star_l = 0, rho_star_r = 0;
  double speed_head = 0, speed_tail = 0;  // left rarefaction
  double speed_contact = 0, speed_shock = 0;

  // primitive state (rho, v, P) at similarity ratio (x - x0) / t
  Vec sample(double x, double t) const;

  Vec left, right;
  double gamma_, x0_;
};

// weak oblique-shock angle beta for Mach M and deflection theta (radians)
double theta_beta_mach(double M, double theta, double gamma = 1.4);

// ----- accelerating Burgers shock (space-time analytic solution) -------------
struct BurgersAccExact {
  double mu1 = 4.0, mu2 = 3.0;
  double shock_position(double t) const;  // z_s(t)
  double shock_exit_time() const;         // time at which z_s reaches z = 1
  double phi(double z, double t) const;
};

// exact 2D advection solution (planar variant): Heaviside across the line
// through the origin with direction beta = (-1.25, 1)
double advec_planar_exact(double x1, double x2);

}  // namespace hoist
