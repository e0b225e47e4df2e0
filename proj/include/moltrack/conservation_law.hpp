#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <variant>
#include <vector>

#include "moltrack/dual.hpp"
#include "moltrack/errors.hpp"

namespace moltrack {

// Smooth approximation of |x|; pointwise limit |x| as k -> infinity.
template <class T>
inline T smoothed_abs(const T& x, double k) {
  using std::tanh;
  return x * tanh(k * x);
}

// Scalar advection with velocity field beta(x) = c0 + c1*sin(w*x)^2.
// Flux kernels are templated so derivative propagation (Dual) reuses the
// same code path as plain evaluation.
struct Advection {
  double beta_const = 1.0;
  double beta_sin2_amp = 0.0;
  double beta_sin2_freq = 0.0;
  double smooth_k = 100.0;

  int m() const { return 1; }
  int dim() const { return 1; }

  template <class T>
  T beta(const T& x) const {
    if (beta_sin2_amp == 0.0) return T(beta_const);
    using std::sin;
    T s = sin(beta_sin2_freq * x);
    return beta_const + beta_sin2_amp * s * s;
  }

  template <class T>
  void flux(const T* U, const T* x, T* F) const {
    F[0] = U[0] * beta(x[0]);
  }

  // Smoothed upwind flux of the modified flux F - U v.
  template <class T>
  void num_flux_mod(const T* Up, const T* Um, const T* n, const T* v,
                    const T* x, T* H) const {
    T lam = (beta(x[0]) - v[0]) * n[0];
    H[0] = 0.5 * (lam * (Up[0] + Um[0]) +
                  smoothed_abs(lam, smooth_k) * (Up[0] - Um[0]));
  }

  template <class T>
  T wave_speed(const T* U, const T* n, const T* x) const {
    (void)U;
    return beta(x[0]) * n[0];
  }
};

// Inviscid Burgers flux 0.5 U^2 beta with constant direction beta.
struct Burgers {
  double beta = 1.0;
  double smooth_k = 100.0;

  int m() const { return 1; }
  int dim() const { return 1; }

  template <class T>
  void flux(const T* U, const T* x, T* F) const {
    (void)x;
    F[0] = 0.5 * U[0] * U[0] * beta;
  }

  // Scalar Roe flux with the eigenvalue shifted by the domain velocity and
  // the absolute value smoothed.
  template <class T>
  void num_flux_mod(const T* Up, const T* Um, const T* n, const T* v,
                    const T* x, T* H) const {
    (void)x;
    T fmodp = (0.5 * Up[0] * Up[0] * beta - Up[0] * v[0]) * n[0];
    T fmodm = (0.5 * Um[0] * Um[0] * beta - Um[0] * v[0]) * n[0];
    T lam = (0.5 * (Up[0] + Um[0]) * beta - v[0]) * n[0];
    H[0] = 0.5 * (fmodp + fmodm + smoothed_abs(lam, smooth_k) * (Up[0] - Um[0]));
  }

  template <class T>
  T wave_speed(const T* U, const T* n, const T* x) const {
    (void)x;
    return U[0] * beta * n[0];
  }
};

// Compressible Euler equations for a calorically ideal gas, d = 1 or 2.
struct Euler {
  double gamma = 1.4;
  int d = 1;
  double smooth_k = 100.0;

  int m() const { return d + 2; }
  int dim() const { return d; }

  template <class T>
  T pressure(const T* U) const {
    T ke(0.0);
    for (int k = 0; k < d; ++k) ke += U[1 + k] * U[1 + k];
    return (gamma - 1.0) * (U[d + 1] - 0.5 * ke / U[0]);
  }

  template <class T>
  void check_admissible(const T* U) const {
    if (!(val(U[0]) > 0.0))
      throw AdmissibilityError("nonpositive density", 0);
    if (!(val(pressure(U)) > 0.0))
      throw AdmissibilityError("nonpositive pressure", d + 1);
  }

  template <class T>
  void flux(const T* U, const T* x, T* F) const {
    (void)x;
    check_admissible(U);
    const int mm = d + 2;
    T P = pressure(U);
    for (int k = 0; k < d; ++k) {
      T vk = U[1 + k] / U[0];
      F[0 + mm * k] = U[1 + k];
      for (int i = 0; i < d; ++i) F[1 + i + mm * k] = U[1 + i] * vk;
      F[1 + k + mm * k] += P;
      F[d + 1 + mm * k] = (U[d + 1] + P) * vk;
    }
  }

  // Roe flux of the modified system: Roe-averaged decomposition of the
  // physical Jacobian, eigenvalues shifted by -v.n, smoothed absolute value.
  template <class T>
  void num_flux_mod(const T* Up, const T* Um, const T* n, const T* v,
                    const T* x, T* H) const {
    (void)x;
    using std::sqrt;
    check_admissible(Up);
    check_admissible(Um);
    const int mm = d + 2;

    T rhoL = Up[0], rhoR = Um[0];
    T vL[2], vR[2], dv[2], vb[2];
    T unL(0.0), unR(0.0), vn_dom(0.0);
    for (int k = 0; k < d; ++k) {
      vL[k] = Up[1 + k] / rhoL;
      vR[k] = Um[1 + k] / rhoR;
      unL += vL[k] * n[k];
      unR += vR[k] * n[k];
      vn_dom += v[k] * n[k];
    }
    T PL = pressure(Up), PR = pressure(Um);
    T HL = (Up[d + 1] + PL) / rhoL;
    T HR = (Um[d + 1] + PR) / rhoR;

    // Roe averages.
    T sL = sqrt(rhoL), sR = sqrt(rhoR);
    T wsum = sL + sR;
    T ubn(0.0), q2(0.0);
    for (int k = 0; k < d; ++k) {
      vb[k] = (sL * vL[k] + sR * vR[k]) / wsum;
      dv[k] = vR[k] - vL[k];
      ubn += vb[k] * n[k];
      q2 += vb[k] * vb[k];
    }
    T Hb = (sL * HL + sR * HR) / wsum;
    T a2 = (gamma - 1.0) * (Hb - 0.5 * q2);
    if (!(val(a2) > 0.0))
      throw AdmissibilityError("Roe average undefined", -1);
    T a = sqrt(a2);
    T rhob = sL * sR;

    T drho = rhoR - rhoL;
    T dP = PR - PL;
    T dvn(0.0), vbdv(0.0);
    for (int k = 0; k < d; ++k) {
      dvn += dv[k] * n[k];
      vbdv += vb[k] * dv[k];
    }
    T alpha1 = (dP - rhob * a * dvn) / (2.0 * a2);
    T alpha3 = (dP + rhob * a * dvn) / (2.0 * a2);
    T alpha2 = drho - dP / a2;

    T lam1 = smoothed_abs(ubn - a - vn_dom, smooth_k);
    T lam2 = smoothed_abs(ubn - vn_dom, smooth_k);
    T lam3 = smoothed_abs(ubn + a - vn_dom, smooth_k);

    T diss[4];
    diss[0] = lam1 * alpha1 + lam2 * alpha2 + lam3 * alpha3;
    for (int i = 0; i < d; ++i)
      diss[1 + i] = lam1 * alpha1 * (vb[i] - a * n[i]) +
                    lam2 * (alpha2 * vb[i] + rhob * (dv[i] - dvn * n[i])) +
                    lam3 * alpha3 * (vb[i] + a * n[i]);
    diss[d + 1] = lam1 * alpha1 * (Hb - a * ubn) +
                  lam2 * (alpha2 * 0.5 * q2 + rhob * (vbdv - ubn * dvn)) +
                  lam3 * alpha3 * (Hb + a * ubn);

    // Modified physical fluxes dotted with n.
    T FLn[4], FRn[4];
    FLn[0] = rhoL * unL;
    FRn[0] = rhoR * unR;
    for (int i = 0; i < d; ++i) {
      FLn[1 + i] = Up[1 + i] * unL + PL * n[i];
      FRn[1 + i] = Um[1 + i] * unR + PR * n[i];
    }
    FLn[d + 1] = (Up[d + 1] + PL) * unL;
    FRn[d + 1] = (Um[d + 1] + PR) * unR;

    for (int c = 0; c < mm; ++c)
      H[c] = 0.5 * (FLn[c] + FRn[c] - vn_dom * (Up[c] + Um[c])) - 0.5 * diss[c];
  }

  template <class T>
  T wave_speed(const T* U, const T* n, const T* x) const {
    (void)x;
    T un(0.0);
    for (int k = 0; k < d; ++k) un += U[1 + k] / U[0] * n[k];
    return un;
  }
};

using ConservationLaw = std::variant<Advection, Burgers, Euler>;

int ncomp(const ConservationLaw& law);
int law_dim(const ConservationLaw& law);

// Transformed flux [(det G) F((det G)^{-1} W_X) - W_X (x) v] G^{-T}.
// Kernel form shared by plain evaluation and derivative propagation;
// g must equal det(G) and be positive.
template <class Law, class T>
void transformed_flux_kernel(const Law& law, const T* WX, const T* G,
                             const T& g, const T* v, const T* x, T* FX) {
  const int m = law.m();
  const int d = law.dim();
  if (!(val(g) > 0.0)) throw InvertedElementError("nonpositive mapping Jacobian");
  T U[4];
  for (int c = 0; c < m; ++c) U[c] = WX[c] / g;
  T F[8];
  law.flux(U, x, F);
  // Ginvt = G^{-T} (d x d); for d = 1 this is 1/G.
  T Ginvt[4];
  if (d == 1) {
    Ginvt[0] = 1.0 / G[0];
  } else {
    T det = G[0] * G[3] - G[1] * G[2];
    Ginvt[0] = G[3] / det;
    Ginvt[1] = -G[2] / det;
    Ginvt[2] = -G[1] / det;
    Ginvt[3] = G[0] / det;
  }
  for (int k = 0; k < d; ++k) {
    for (int c = 0; c < m; ++c) {
      T acc(0.0);
      for (int l = 0; l < d; ++l)
        acc += (g * F[c + m * l] - WX[c] * v[l]) * Ginvt[l + d * k];
      FX[c + m * k] = acc;
    }
  }
}

// Convenience wrappers operating on Eigen types (library API surface).
Eigen::MatrixXd physical_flux(const ConservationLaw& law,
                              const Eigen::VectorXd& U,
                              const Eigen::VectorXd& x);
std::vector<Eigen::MatrixXd> flux_jacobian(const ConservationLaw& law,
                                           const Eigen::VectorXd& U,
                                           const Eigen::VectorXd& x);
Eigen::MatrixXd modified_flux(const ConservationLaw& law,
                              const Eigen::VectorXd& U,
                              const Eigen::VectorXd& v,
                              const Eigen::VectorXd& x);
Eigen::VectorXd numerical_flux_modified(const ConservationLaw& law,
                                        const Eigen::VectorXd& Up,
                                        const Eigen::VectorXd& Um,
                                        const Eigen::VectorXd& n,
                                        const Eigen::VectorXd& v,
                                        const Eigen::VectorXd& x);
Eigen::MatrixXd transformed_flux(const ConservationLaw& law,
                                 const Eigen::VectorXd& WX,
                                 const Eigen::MatrixXd& G,
                                 const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& x);
// Each trace is scaled by its own side's Jacobian determinant.
Eigen::VectorXd reference_numerical_flux(const ConservationLaw& law,
                                         const Eigen::VectorXd& UXp,
                                         const Eigen::VectorXd& UXm,
                                         const Eigen::VectorXd& N,
                                         const Eigen::MatrixXd& G,
                                         double gp, double gm,
                                         const Eigen::VectorXd& v,
                                         const Eigen::VectorXd& x);

// Least-squares projection of the jump conditions onto a single speed;
// exact for scalar laws. Throws DegenerateJumpError for a vanishing jump.
double rankine_hugoniot_speed(const ConservationLaw& law,
                              const Eigen::VectorXd& UL,
                              const Eigen::VectorXd& UR,
                              const Eigen::VectorXd& n,
                              const Eigen::VectorXd& x);

// Advective characteristic speed of a smooth field (fallback when the
// jump across a tracked face degenerates).
double advective_speed(const ConservationLaw& law, const Eigen::VectorXd& U,
                       const Eigen::VectorXd& n, const Eigen::VectorXd& x);

// Primitive variables for the Euler system.
struct PrimitiveState {
  double rho;
  Eigen::VectorXd v;
  double P;
};
Eigen::VectorXd to_conservative(const Euler& law, const PrimitiveState& prim);
PrimitiveState to_primitive(const Euler& law, const Eigen::VectorXd& U);

}  // namespace moltrack
