#include "hoist/exact.hpp"

#include <cmath>
#include <stdexcept>

namespace hoist {

namespace {

double area_ratio_of_mach(double M, double g) {
  return (1.0 / M) *
         std::pow(2.0 / (g + 1.0) * (1.0 + 0.5 * (g - 1.0) * M * M),
                  (g + 1.0) / (2.0 * (g - 1.0)));
}

double bisect(std::function<double(double)> f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int i = 0; i < iters; ++i) {
    double m = 0.5 * (a + b), fm = f(m);
    if ((fa <= 0) == (fm <= 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

NozzleExact::NozzleExact(double mu1, double mu2, double gamma, double p_ratio_exit)
    : mu1_(mu1), mu2_(mu2), g_(gamma), p_ratio_exit_(p_ratio_exit) {
  double M_in = mach_from_area_ratio(area(0.0) / mu2_, false);
  rho0_ = std::pow(1.0 + 0.5 * (g_ - 1.0) * M_in * M_in, 1.0 / (g_ - 1.0));
  p0_ = rho0_ * c0_ * c0_ / g_;
  double p_in = p0_ * std::pow(1.0 + 0.5 * (g_ - 1.0) * M_in * M_in, -g_ / (g_ - 1.0));
  xs_ = bisect([&](double xs) { return exit_pressure(xs) - p_ratio_exit_ * p_in; },
               5.0 + 1e-6, 10.0 - 1e-6);
  // cache post-shock stagnation state
  double M1 = mach_from_area_ratio(area(xs_) / mu2_, true);
  double t1 = 1.0 + 0.5 * (g_ - 1.0) * M1 * M1;
  double p_ratio = std::pow((g_ + 1.0) * M1 * M1 / 2.0 / t1, g_ / (g_ - 1.0)) *
                   std::pow((g_ + 1.0) / (2.0 * g_ * M1 * M1 - (g_ - 1.0)), 1.0 / (g_ - 1.0));
  p0_post_ = p0_ * p_ratio;
  astar_post_ = mu2_ * p0_ / p0_post_;
}

double NozzleExact::area(double x) const {
  return mu1_ + (mu2_ - mu1_) * (10.0 - x) * x / 25.0;
}

double NozzleExact::stagnation_enthalpy() const { return c0_ * c0_ / (g_ - 1.0); }

double NozzleExact::mach_from_area_ratio(double ratio, bool supersonic) const {
  if (ratio < 1.0) ratio = 1.0;
  auto f = [&](double M) { return area_ratio_of_mach(M, g_) - ratio; };
  if (supersonic) return bisect(f, 1.0 + 1e-12, 50.0);
  return bisect(f, 1e-10, 1.0 - 1e-12);
}

double NozzleExact::exit_pressure(double xs) const {
  double M1 = mach_from_area_ratio(area(xs) / mu2_, true);
  double t1 = 1.0 + 0.5 * (g_ - 1.0) * M1 * M1;
  double p_ratio = std::pow((g_ + 1.0) * M1 * M1 / 2.0 / t1, g_ / (g_ - 1.0)) *
                   std::pow((g_ + 1.0) / (2.0 * g_ * M1 * M1 - (g_ - 1.0)), 1.0 / (g_ - 1.0));
  double p0p = p0_ * p_ratio;
  double astar_p = mu2_ * p0_ / p0p;
  double M_exit = mach_from_area_ratio(area(10.0) / astar_p, false);
  return p0p * std::pow(1.0 + 0.5 * (g_ - 1.0) * M_exit * M_exit, -g_ / (g_ - 1.0));
}

double NozzleExact::mach(double x) const {
  if (x < xs_) {
    bool sup = x > 5.0;
    return mach_from_area_ratio(area(x) / mu2_, sup);
  }
  return mach_from_area_ratio(area(x) / astar_post_, false);
}

double NozzleExact::rho(double x) const {
  double M = mach(x);
  double rho0 = (x < xs_) ? rho0_ : rho0_ * p0_post_ / p0_;
  return rho0 * std::pow(1.0 + 0.5 * (g_ - 1.0) * M * M, -1.0 / (g_ - 1.0));
}

double NozzleExact::pressure(double x) const {
  double M = mach(x);
  double p0 = (x < xs_) ? p0_ : p0_post_;
  return p0 * std::pow(1.0 + 0.5 * (g_ - 1.0) * M * M, -g_ / (g_ - 1.0));
}

double NozzleExact::velocity(double x) const {
  double M = mach(x);
  double c = c0_ / std::sqrt(1.0 + 0.5 * (g_ - 1.0) * M * M);
  return M * c;
}

Vec NozzleExact::state(double x) const {
  double A = area(x), r = rho(x), v = velocity(x), P = pressure(x);
  Vec U(3);
  U << A * r, A * r * v, A * (P / (g_ - 1.0) + 0.5 * r * v * v);
  return U;
}

// ----- Riemann ----------------------------------------------------------------

RiemannExact::RiemannExact(Vec prim_left, Vec prim_right, double gamma, double x0)
    : left(std::move(prim_left)), right(std::move(prim_right)), gamma_(gamma), x0_(x0) {
  double g = gamma_;
  double rl = left[0], vl = left[1], pl = left[2];
  double rr = right[0], vr = right[1], pr = right[2];
  double cl = std::sqrt(g * pl / rl), cr = std::sqrt(g * pr / rr);

  auto fK = [&](double p, double rk, double pk, double ck, double& f, double& df) {
    if (p > pk) {  // shock
      double A = 2.0 / ((g + 1.0) * rk), B = (g - 1.0) / (g + 1.0) * pk;
      f = (p - pk) * std::sqrt(A / (p + B));
      df = std::sqrt(A / (B + p)) * (1.0 - (p - pk) / (2.0 * (B + p)));
    } else {  // rarefaction
      f = 2.0 * ck / (g - 1.0) * (std::pow(p / pk, (g - 1.0) / (2.0 * g)) - 1.0);
      df = 1.0 / (rk * ck) * std::pow(p / pk, -(g + 1.0) / (2.0 * g));
    }
  };
  double p = std::max(1e-8, 0.5 * (pl + pr));
  for (int it = 0; it < 100; ++it) {
    double f_l, df_l, f_r, df_r;
    fK(p, rl, pl, cl, f_l, df_l);
    fK(p, rr, pr, cr, f_r, df_r);
    double f = f_l + f_r + (vr - vl);
    double dp = f / (df_l + df_r);
    p = std::max(1e-10, p - dp);
    if (std::abs(dp) < 1e-15 * p) break;
  }
  p_star = p;
  {
    double f_l, df_l, f_r, df_r;
    fK(p, rl, pl, cl, f_l, df_l);
    fK(p, rr, pr, cr, f_r, df_r);
    v_star = 0.5 * (vl + vr) + 0.5 * (f_r - f_l);
  }
  if (p_star <= pl) {  // left rarefaction
    rho_star_l = rl * std::pow(p_star / pl, 1.0 / g);
    double c_star_l = cl * std::pow(p_star / pl, (g - 1.0) / (2.0 * g));
    speed_head = vl - cl;
    speed_tail = v_star - c_star_l;
  } else {  // left shock
    rho_star_l = rl * ((p_star / pl + (g - 1.0) / (g + 1.0)) /
                       ((g - 1.0) / (g + 1.0) * p_star / pl + 1.0));
    speed_head = speed_tail = vl - cl * std::sqrt((g + 1.0) / (2.0 * g) * p_star / pl +
                                                  (g - 1.0) / (2.0 * g));
  }
  if (p_star > pr) {  // right shock
    rho_star_r = rr * ((p_star / pr + (g - 1.0) / (g + 1.0)) /
                       ((g - 1.0) / (g + 1.0) * p_star / pr + 1.0));
    speed_shock =
        vr + cr * std::sqrt((g + 1.0) / (2.0 * g) * p_star / pr + (g - 1.0) / (2.0 * g));
  } else {
    rho_star_r = rr * std::pow(p_star / pr, 1.0 / g);
    speed_shock = vr + cr;  // right rarefaction head (not the Sod case)
  }
  speed_contact = v_star;
}

Vec RiemannExact::sample(double x, double t) const {
  double g = gamma_;
  Vec out(3);
  if (t <= 0) return (x < x0_) ? left : right;
  double xi = (x - x0_) / t;
  double rl = left[0], vl = left[1], pl = left[2];
  double cl = std::sqrt(g * pl / rl);
  if (xi <= speed_head) return left;
  if (xi <= speed_tail) {  // inside the left rarefaction fan
    double v = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * vl + xi);
    double c = cl - 0.5 * (g - 1.0) * (v - vl);
    double r = rl * std::pow(c / cl, 2.0 / (g - 1.0));
    double P = pl * std::pow(c / cl, 2.0 * g / (g - 1.0));
    out << r, v, P;
    return out;
  }
  if (xi <= speed_contact) {
    out << rho_star_l, v_star, p_star;
    return out;
  }
  if (xi <= speed_shock) {
    out << rho_star_r, v_star, p_star;
    return out;
  }
  return right;
}

double theta_beta_mach(double M, double theta, double gamma) {
  auto f = [&](double beta) {
    double mn2 = M * M * std::sin(beta) * std::sin(beta);
    return std::tan(theta) -
           2.0 / std::tan(beta) * (mn2 - 1.0) / (M * M * (gamma + std::cos(2 * beta)) + 2.0);
  };
  double lo = std::asin(1.0 / M) + 1e-10, hi = M_PI / 2.0 - 1e-10;
  double prev = f(lo);
  int steps = 2000;
  for (int i = 1; i <= steps; ++i) {
    double b = lo + (hi - lo) * i / steps;
    double cur = f(b);
    if ((prev <= 0) != (cur <= 0))
      return bisect(f, lo + (hi - lo) * (i - 1) / steps, b);
    prev = cur;
  }
  throw std::runtime_error("theta_beta_mach: no attached shock solution");
}

// ----- Burgers -----------------------------------------------------------------

double BurgersAccExact::shock_position(double t) const {
  return (mu1 / mu2 + 1.0) * (1.0 - std::sqrt(1.0 + mu2 * t)) + mu1 * t;
}

double BurgersAccExact::shock_exit_time() const {
  double lo = 0, hi = 2.0;
  while (shock_position(hi) < 1.0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (lo + hi);
    (shock_position(m) < 1.0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

double BurgersAccExact::phi(double z, double t) const {
  return z < shock_position(t) ? mu1 : mu2 * (z - 1.0) / (1.0 + mu2 * t);
}

double advec_planar_exact(double x1, double x2) {
  // characteristics run along beta = (-1.25, 1); the jump line passes through
  // the origin, U = 1 on its right
  return (x1 + 1.25 * x2 > 0.0) ? 1.0 : 0.0;
}

}  // namespace hoist
