#include "hoist/models.hpp"

#include <cmath>

namespace hoist {

double ideal_gas_pressure(double rho, double v2, double rhoE, double gamma) {
  return (gamma - 1.0) * (rhoE - 0.5 * rho * v2);
}

namespace {

using std::exp;
using std::sin;
using std::cos;
using std::sqrt;
using std::tanh;

// smooth |a|: vanishes at a = 0 so aligned discontinuities carry no
// dissipation through the numerical flux
template <class T>
T smooth_abs(T a, T eps) {
  return a * tanh(a / eps);
}

// Harten-Hyman entropy floor: delta > 0 only across expansions, where the
// dissipation must not vanish; compression shocks keep delta = 0 so tracked
// shocks still see zero acoustic dissipation
template <class T>
T fixed_abs(T a, T eps, T delta) {
  T base = smooth_abs(a, eps);
  T floor = T(0.5) * delta;
  return sqrt(base * base + floor * floor);
}

template <class T>
T vmax(T a, T b) {
  using std::max;
  return max(a, b);
}

// dispatches the double/Dual virtual pairs to one templated implementation
template <class Derived>
class ModelBase : public ClawModel {
 public:
  void flux(const double* U, const double* x, double* F) const override {
    self().template flux_t<double>(U, x, F);
  }
  void flux(const Dual* U, const Dual* x, Dual* F) const override {
    self().template flux_t<Dual>(U, x, F);
  }
  void source(const double* U, const double* x, double* S) const override {
    self().template source_t<double>(U, x, S);
  }
  void source(const Dual* U, const Dual* x, Dual* S) const override {
    self().template source_t<Dual>(U, x, S);
  }
  void numflux(const double* Ul, const double* Ur, const double* n, const double* x,
               double* H) const override {
    self().template numflux_t<double>(Ul, Ur, n, x, H);
  }
  void numflux(const Dual* Ul, const Dual* Ur, const Dual* n, const Dual* x,
               Dual* H) const override {
    self().template numflux_t<Dual>(Ul, Ur, n, x, H);
  }
  void bc_state(int tag, const double* x, const double* n, const double* Uin,
                double* Ubc) const override {
    self().template bc_state_t<double>(tag, x, n, Uin, Ubc);
  }
  void bc_state(int tag, const Dual* x, const Dual* n, const Dual* Uin,
                Dual* Ubc) const override {
    self().template bc_state_t<Dual>(tag, x, n, Uin, Ubc);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// ----- linear advection -----------------------------------------------------

class AdvectionModel : public ModelBase<AdvectionModel> {
 public:
  AdvectionModel(bool trig, double eps) : trig_(trig), eps_(eps) {
    m = 1;
    d = 2;
  }

  template <class T>
  void beta(const T* x, T* b) const {
    if (trig_)
      b[0] = -sin(T(M_PI) * x[1]);
    else
      b[0] = T(-1.25);
    b[1] = T(1.0);
  }

  template <class T>
  void flux_t(const T* U, const T* x, T* F) const {
    T b[2];
    beta(x, b);
    F[0] = U[0] * b[0];
    F[1] = U[0] * b[1];
  }

  template <class T>
  void source_t(const T*, const T*, T* S) const {
    S[0] = T(0.0);
  }

  template <class T>
  void numflux_t(const T* Ul, const T* Ur, const T* n, const T* x, T* H) const {
    T b[2];
    beta(x, b);
    T a = b[0] * n[0] + b[1] * n[1];
    H[0] = T(0.5) * a * (Ul[0] + Ur[0]) + T(0.5) * smooth_abs(a, T(eps_)) * (Ul[0] - Ur[0]);
  }

  template <class T>
  void bc_state_t(int, const T* x, const T* n, const T* Uin, T* Ubc) const {
    T b[2];
    beta(x, b);
    if (value(b[0] * n[0] + b[1] * n[1]) < 0.0)
      Ubc[0] = value(x[0]) > 0.0 ? T(1.0) : T(0.0);  // inflow data H(x1)
    else
      Ubc[0] = Uin[0];
  }

  double max_wavespeed(const double* /*U*/, const double* x) const override {
    double b[2];
    beta(x, b);
    return std::sqrt(b[0] * b[0] + b[1] * b[1]);
  }

 private:
  bool trig_;
  double eps_;
};

// ----- space-time Burgers ---------------------------------------------------

class BurgersModel : public ModelBase<BurgersModel> {
 public:
  BurgersModel(bool form, double mu1, double mu2, double eps)
      : form_(form), mu1_(mu1), mu2_(mu2), eps_(eps) {
    m = 1;
    d = 2;
  }

  template <class T>
  T initial(T z) const {
    if (form_)
      return T(1.2) * exp(-(z + T(0.5)) * (z + T(0.5)) / T(0.025)) -
             exp(-(z - T(0.5)) * (z - T(0.5)) / T(0.025));
    // accelerating-shock data consistent with the analytic solution
    return value(z) < 0.0 ? T(mu1_) : T(mu2_) * (z - T(1.0));
  }

  template <class T>
  void flux_t(const T* U, const T*, T* F) const {
    F[0] = T(0.5) * U[0] * U[0];
    F[1] = U[0];
  }

  template <class T>
  void source_t(const T*, const T*, T* S) const {
    S[0] = T(0.0);
  }

  template <class T>
  void numflux_t(const T* Ul, const T* Ur, const T* n, const T*, T* H) const {
    T lam = T(0.5) * (Ul[0] + Ur[0]) * n[0] + n[1];  // Roe speed in space-time
    T laml = Ul[0] * n[0] + n[1], lamr = Ur[0] * n[0] + n[1];
    T delta = vmax(vmax(T(0.0), lam - laml), lamr - lam);
    T central = T(0.25) * (Ul[0] * Ul[0] + Ur[0] * Ur[0]) * n[0] +
                T(0.5) * (Ul[0] + Ur[0]) * n[1];
    H[0] = central + T(0.5) * fixed_abs(lam, T(eps_), delta) * (Ul[0] - Ur[0]);
  }

  template <class T>
  void bc_state_t(int tag, const T* x, const T*, const T* Uin, T* Ubc) const {
    switch (tag) {
      case 0: Ubc[0] = initial(T(form_ ? -1.0 : -0.2)); break;  // left inflow
      case 1: Ubc[0] = initial(x[0]); break;                    // t = 0
      case 2: Ubc[0] = initial(T(1.0)); break;                  // right
      default: Ubc[0] = Uin[0];                                 // final time
    }
  }

  double max_wavespeed(const double* U, const double*) const override {
    return std::sqrt(U[0] * U[0] / 4.0 + 1.0) + 1e-8;
  }

 private:
  bool form_;
  double mu1_, mu2_, eps_;
};

// ----- quasi-1D Euler nozzle --------------------------------------------------

class NozzleModel : public ModelBase<NozzleModel> {
 public:
  NozzleModel(double mu1, double mu2, double gamma, NozzleBc bc, double eps)
      : mu1_(mu1), mu2_(mu2), g_(gamma), bc_(bc), eps_(eps) {
    m = 3;
    d = 1;
  }

  template <class T>
  T area(T x) const {
    return T(mu1_) + T(mu2_ - mu1_) * (T(10.0) - x) * x / T(25.0);
  }
  template <class T>
  T darea(T x) const {
    return T(mu2_ - mu1_) * (T(10.0) - T(2.0) * x) / T(25.0);
  }

  // "area pressure" A*P, expressible in the conservative variables alone
  template <class T>
  T api(const T* U) const {
    if (value(U[0]) <= 0.0) throw nonphysical_error{};
    T p = T(g_ - 1.0) * (U[2] - T(0.5) * U[1] * U[1] / U[0]);
    if (value(p) <= 0.0) throw nonphysical_error{};
    return p;
  }

  template <class T>
  void flux_t(const T* U, const T*, T* F) const {
    T ap = api(U);
    F[0] = U[1];
    F[1] = U[1] * U[1] / U[0] + ap;
    F[2] = (U[2] + ap) * U[1] / U[0];
  }

  template <class T>
  void source_t(const T* U, const T* x, T* S) const {
    S[0] = T(0.0);
    S[1] = api(U) * darea(x[0]) / area(x[0]);
    S[2] = T(0.0);
  }

  template <class T>
  void numflux_t(const T* Ul, const T* Ur, const T* n, const T*, T* H) const {
    // smoothed Roe flux for the 1D Euler structure with pressure A*P
    T apl = api(Ul), apr = api(Ur);
    T rl = Ul[0], rr = Ur[0];
    T vl = Ul[1] / rl, vr = Ur[1] / rr;
    T hl = (Ul[2] + apl) / rl, hr = (Ur[2] + apr) / rr;
    T sl = sqrt(rl), sr = sqrt(rr);
    T v = (sl * vl + sr * vr) / (sl + sr);
    T h = (sl * hl + sr * hr) / (sl + sr);
    T c2 = T(g_ - 1.0) * (h - T(0.5) * v * v);
    if (value(c2) <= 0.0) throw nonphysical_error{};
    T c = sqrt(c2);
    T rho = sl * sr;

    T dr = rr - rl, dp = apr - apl, dv = vr - vl;
    T a1 = (dp - rho * c * dv) / (T(2.0) * c2);
    T a2 = dr - dp / c2;
    T a4 = (dp + rho * c * dv) / (T(2.0) * c2);

    T cl = sqrt(T(g_) * apl / rl), cr = sqrt(T(g_) * apr / rr);
    T lam1 = (v - c) * n[0], lam2 = v * n[0], lam4 = (v + c) * n[0];
    T d1 = vmax(vmax(T(0.0), lam1 - (vl - cl) * n[0]), (vr - cr) * n[0] - lam1);
    T d4 = vmax(vmax(T(0.0), lam4 - (vl + cl) * n[0]), (vr + cr) * n[0] - lam4);
    T m1 = fixed_abs(lam1, T(eps_), d1);
    T m2 = smooth_abs(lam2, T(eps_));
    T m4 = fixed_abs(lam4, T(eps_), d4);

    T fl[3], fr[3];
    flux_t<T>(Ul, nullptr, fl);
    flux_t<T>(Ur, nullptr, fr);
    T diss[3];
    diss[0] = m1 * a1 + m2 * a2 + m4 * a4;
    diss[1] = m1 * a1 * (v - c) + m2 * a2 * v + m4 * a4 * (v + c);
    diss[2] = m1 * a1 * (h - v * c) + m2 * a2 * (T(0.5) * v * v) + m4 * a4 * (h + v * c);
    for (int i = 0; i < 3; ++i) H[i] = T(0.5) * (fl[i] + fr[i]) * n[0] - T(0.5) * diss[i];
  }

  template <class T>
  void bc_state_t(int tag, const T* x, const T*, const T*, T* Ubc) const {
    T A = area(x[0]);
    T rho_b = T(tag == 0 ? bc_.rho_in : bc_.rho_out);
    T v_b = T(tag == 0 ? bc_.v_in : bc_.v_out);
    T P_b = T(tag == 0 ? bc_.P_in : bc_.P_out);
    Ubc[0] = A * rho_b;
    Ubc[1] = A * rho_b * v_b;
    Ubc[2] = A * (P_b / T(g_ - 1.0) + T(0.5) * rho_b * v_b * v_b);
  }

  bool admissible(const double* U) const override {
    if (U[0] <= 0.0) return false;
    return (g_ - 1.0) * (U[2] - 0.5 * U[1] * U[1] / U[0]) > 0.0;
  }

  double max_wavespeed(const double* U, const double*) const override {
    double ap = (g_ - 1.0) * (U[2] - 0.5 * U[1] * U[1] / U[0]);
    double c = std::sqrt(g_ * ap / U[0]);
    return std::abs(U[1] / U[0]) + c;
  }

 private:
  double mu1_, mu2_, g_;
  NozzleBc bc_;
  double eps_;
};

// ----- Euler (steady 2D or 1D space-time) --------------------------------------

class EulerModel : public ModelBase<EulerModel> {
 public:
  EulerModel(int ds, bool spacetime, std::vector<EulerBc> bcs, double gamma, double eps)
      : ds_(ds), st_(spacetime), bcs_(std::move(bcs)), g_(gamma), eps_(eps) {
    m = ds + 2;
    d = ds + (spacetime ? 1 : 0);
  }

  template <class T>
  T pressure(const T* U) const {
    if (value(U[0]) <= 0.0) throw nonphysical_error{};
    T ke = T(0.0);
    for (int i = 0; i < ds_; ++i) ke += U[1 + i] * U[1 + i];
    T p = T(g_ - 1.0) * (U[m - 1] - T(0.5) * ke / U[0]);
    if (value(p) <= 0.0) throw nonphysical_error{};
    return p;
  }

  template <class T>
  void flux_t(const T* U, const T*, T* F) const {
    T p = pressure(U);
    T vi[2];
    for (int i = 0; i < ds_; ++i) vi[i] = U[1 + i] / U[0];
    for (int k = 0; k < ds_; ++k) {
      F[0 * d + k] = U[1 + k];
      for (int i = 0; i < ds_; ++i)
        F[(1 + i) * d + k] = U[1 + i] * vi[k] + (i == k ? p : T(0.0));
      F[(m - 1) * d + k] = (U[m - 1] + p) * vi[k];
    }
    if (st_)
      for (int i = 0; i < m; ++i) F[i * d + ds_] = U[i];
  }

  template <class T>
  void source_t(const T*, const T*, T* S) const {
    for (int i = 0; i < m; ++i) S[i] = T(0.0);
  }

  template <class T>
  void numflux_t(const T* Ul, const T* Ur, const T* n, const T*, T* H) const {
    T fl[4 * 3], fr[4 * 3];
    flux_t<T>(Ul, nullptr, fl);
    flux_t<T>(Ur, nullptr, fr);
    for (int i = 0; i < m; ++i) {
      H[i] = T(0.0);
      for (int k = 0; k < d; ++k) H[i] += T(0.5) * (fl[i * d + k] + fr[i * d + k]) * n[k];
    }
    T nt = st_ ? n[ds_] : T(0.0);
    T s2 = T(0.0);
    for (int k = 0; k < ds_; ++k) s2 += n[k] * n[k];
    // regularized spatial direction: keeps the dissipation smooth through
    // purely temporal faces (s -> 0), where it limits to |nt| dU
    T s = sqrt(s2 + T(1e-16));
    T nh[2];
    for (int k = 0; k < ds_; ++k) nh[k] = n[k] / s;

    T rl = Ul[0], rr = Ur[0];
    T pl = pressure(Ul), pr = pressure(Ur);
    T vl[2], vr[2];
    for (int i = 0; i < ds_; ++i) {
      vl[i] = Ul[1 + i] / rl;
      vr[i] = Ur[1 + i] / rr;
    }
    T hl = (Ul[m - 1] + pl) / rl, hr = (Ur[m - 1] + pr) / rr;
    T sl = sqrt(rl), sr = sqrt(rr);
    T v[2], vn = T(0.0), v2 = T(0.0);
    for (int i = 0; i < ds_; ++i) {
      v[i] = (sl * vl[i] + sr * vr[i]) / (sl + sr);
      vn += v[i] * nh[i];
      v2 += v[i] * v[i];
    }
    T h = (sl * hl + sr * hr) / (sl + sr);
    T c2 = T(g_ - 1.0) * (h - T(0.5) * v2);
    if (value(c2) <= 0.0) throw nonphysical_error{};
    T c = sqrt(c2);
    T rho = sl * sr;

    T dp = pr - pl, drho = rr - rl;
    T vnl = T(0.0), vnr = T(0.0);
    for (int i = 0; i < ds_; ++i) {
      vnl += vl[i] * nh[i];
      vnr += vr[i] * nh[i];
    }
    T dvn = vnr - vnl;
    T a1 = (dp - rho * c * dvn) / (T(2.0) * c2);
    T a2 = drho - dp / c2;
    T a4 = (dp + rho * c * dvn) / (T(2.0) * c2);

    T lam1 = s * (vn - c) + nt, lam2 = s * vn + nt, lam4 = s * (vn + c) + nt;
    T cl = sqrt(T(g_) * pl / rl), cr = sqrt(T(g_) * pr / rr);
    T d1 = vmax(vmax(T(0.0), lam1 - (s * (vnl - cl) + nt)), (s * (vnr - cr) + nt) - lam1);
    T d4 = vmax(vmax(T(0.0), lam4 - (s * (vnl + cl) + nt)), (s * (vnr + cr) + nt) - lam4);
    T m1 = fixed_abs(lam1, T(eps_), d1);
    T m2 = smooth_abs(lam2, T(eps_));
    T m4 = fixed_abs(lam4, T(eps_), d4);

    T acc[4];
    for (int i = 0; i < m; ++i) acc[i] = T(0.0);
    acc[0] += m1 * a1 + m4 * a4;
    for (int i = 0; i < ds_; ++i)
      acc[1 + i] += m1 * a1 * (v[i] - c * nh[i]) + m4 * a4 * (v[i] + c * nh[i]);
    acc[m - 1] += m1 * a1 * (h - c * vn) + m4 * a4 * (h + c * vn);
    acc[0] += m2 * a2;
    for (int i = 0; i < ds_; ++i) acc[1 + i] += m2 * a2 * v[i];
    acc[m - 1] += m2 * a2 * T(0.5) * v2;
    // velocity-difference content orthogonal to nh (shear waves for ds = 2,
    // and the temporal-face completion as nh -> 0)
    {
      T dv[2], dvnh = T(0.0);
      for (int i = 0; i < ds_; ++i) dv[i] = vr[i] - vl[i];
      for (int i = 0; i < ds_; ++i) dvnh += dv[i] * nh[i];
      T vdv = T(0.0), vn_nh = vn;
      for (int i = 0; i < ds_; ++i) vdv += v[i] * dv[i];
      for (int i = 0; i < ds_; ++i) acc[1 + i] += m2 * rho * (dv[i] - dvnh * nh[i]);
      acc[m - 1] += m2 * rho * (vdv - dvnh * vn_nh);
    }
    for (int i = 0; i < m; ++i) H[i] -= T(0.5) * acc[i];
  }

  template <class T>
  void pack(const T* prim, T* U) const {
    T rho = prim[0], P = prim[ds_ + 1];
    T ke = T(0.0);
    U[0] = rho;
    for (int i = 0; i < ds_; ++i) {
      U[1 + i] = rho * prim[1 + i];
      ke += prim[1 + i] * prim[1 + i];
    }
    U[m - 1] = P / T(g_ - 1.0) + T(0.5) * rho * ke;
  }

  template <class T>
  void bc_state_t(int tag, const T* x, const T* n, const T* Uin, T* Ubc) const {
    const EulerBc& bc = bcs_.at(tag);
    switch (bc.kind) {
      case EulerBcKind::supersonic_inflow:
      case EulerBcKind::st_dirichlet: {
        T prim[4];
        for (int i = 0; i < m; ++i) prim[i] = T(bc.prim[i]);
        pack(prim, Ubc);
        break;
      }
      case EulerBcKind::supersonic_outflow:
        for (int i = 0; i < m; ++i) Ubc[i] = Uin[i];
        break;
      case EulerBcKind::slip_wall: {
        T s2 = T(0.0);
        for (int k = 0; k < ds_; ++k) s2 += n[k] * n[k];
        T s = sqrt(s2 + T(1e-300));
        T nh[2];
        for (int k = 0; k < ds_; ++k) nh[k] = n[k] / s;
        T vn = T(0.0);
        for (int i = 0; i < ds_; ++i) vn += Uin[1 + i] * nh[i];
        Ubc[0] = Uin[0];
        for (int i = 0; i < ds_; ++i) Ubc[1 + i] = Uin[1 + i] - T(2.0) * vn * nh[i];
        Ubc[m - 1] = Uin[m - 1];
        break;
      }
      case EulerBcKind::st_initial: {
        T prim[4];
        const Vec& p = value(x[0]) < bc.x_jump ? bc.prim_left : bc.prim_right;
        for (int i = 0; i < m; ++i) prim[i] = T(p[i]);
        pack(prim, Ubc);
        break;
      }
    }
  }

  bool admissible(const double* U) const override {
    if (U[0] <= 0.0) return false;
    double ke = 0;
    for (int i = 0; i < ds_; ++i) ke += U[1 + i] * U[1 + i];
    return (g_ - 1.0) * (U[m - 1] - 0.5 * ke / U[0]) > 0.0;
  }

  double max_wavespeed(const double* U, const double*) const override {
    double ke = 0;
    for (int i = 0; i < ds_; ++i) ke += U[1 + i] * U[1 + i];
    double p = (g_ - 1.0) * (U[m - 1] - 0.5 * ke / U[0]);
    double c = std::sqrt(g_ * p / U[0]);
    return std::sqrt(ke) / U[0] + c + (st_ ? 1.0 : 0.0);
  }

 private:
  int ds_;
  bool st_;
  std::vector<EulerBc> bcs_;
  double g_, eps_;
};

}  // namespace

std::unique_ptr<ClawModel> advection_model(const std::string& variant, double eps) {
  return std::make_unique<AdvectionModel>(variant == "trig", eps);
}

std::unique_ptr<ClawModel> burgers_spacetime_model(const std::string& variant, double mu1,
                                                   double mu2, double eps) {
  return std::make_unique<BurgersModel>(variant == "form", mu1, mu2, eps);
}

std::unique_ptr<ClawModel> nozzle_model(double mu1, double mu2, double gamma, NozzleBc bc,
                                        double eps) {
  return std::make_unique<NozzleModel>(mu1, mu2, gamma, bc, eps);
}

std::unique_ptr<ClawModel> euler_model(int d_space, bool spacetime, std::vector<EulerBc> bcs,
                                       double gamma, double eps) {
  return std::make_unique<EulerModel>(d_space, spacetime, std::move(bcs), gamma, eps);
}

}  // namespace hoist
