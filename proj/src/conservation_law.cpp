#include "moltrack/conservation_law.hpp"

namespace moltrack {

int ncomp(const ConservationLaw& law) {
  return std::visit([](const auto& l) { return l.m(); }, law);
}

int law_dim(const ConservationLaw& law) {
  return std::visit([](const auto& l) { return l.dim(); }, law);
}

Eigen::MatrixXd physical_flux(const ConservationLaw& law,
                              const Eigen::VectorXd& U,
                              const Eigen::VectorXd& x) {
  const int m = ncomp(law), d = law_dim(law);
  Eigen::MatrixXd F(m, d);
  std::visit(
      [&](const auto& l) {
        double Fbuf[8];
        l.flux(U.data(), x.data(), Fbuf);
        for (int k = 0; k < d; ++k)
          for (int c = 0; c < m; ++c) F(c, k) = Fbuf[c + m * k];
      },
      law);
  return F;
}

std::vector<Eigen::MatrixXd> flux_jacobian(const ConservationLaw& law,
                                           const Eigen::VectorXd& U,
                                           const Eigen::VectorXd& x) {
  const int m = ncomp(law), d = law_dim(law);
  std::vector<Eigen::MatrixXd> A(d, Eigen::MatrixXd(m, m));
  std::visit(
      [&](const auto& l) {
        using D = Dual<4>;
        D Ud[4], xd[2], Fd[8];
        for (int c = 0; c < m; ++c) Ud[c] = D::seed(U[c], c);
        for (int k = 0; k < d; ++k) xd[k] = x[k];
        l.flux(Ud, xd, Fd);
        for (int k = 0; k < d; ++k)
          for (int c = 0; c < m; ++c)
            for (int j = 0; j < m; ++j) A[k](c, j) = Fd[c + m * k].d[j];
      },
      law);
  return A;
}

Eigen::MatrixXd modified_flux(const ConservationLaw& law,
                              const Eigen::VectorXd& U,
                              const Eigen::VectorXd& v,
                              const Eigen::VectorXd& x) {
  Eigen::MatrixXd F = physical_flux(law, U, x);
  return F - U * v.transpose();
}

Eigen::VectorXd numerical_flux_modified(const ConservationLaw& law,
                                        const Eigen::VectorXd& Up,
                                        const Eigen::VectorXd& Um,
                                        const Eigen::VectorXd& n,
                                        const Eigen::VectorXd& v,
                                        const Eigen::VectorXd& x) {
  const int m = ncomp(law);
  Eigen::VectorXd H(m);
  std::visit(
      [&](const auto& l) {
        double Hbuf[4];
        l.num_flux_mod(Up.data(), Um.data(), n.data(), v.data(), x.data(),
                       Hbuf);
        for (int c = 0; c < m; ++c) H[c] = Hbuf[c];
      },
      law);
  return H;
}

Eigen::MatrixXd transformed_flux(const ConservationLaw& law,
                                 const Eigen::VectorXd& WX,
                                 const Eigen::MatrixXd& G,
                                 const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& x) {
  const int m = ncomp(law), d = law_dim(law);
  const double g = G.determinant();
  Eigen::MatrixXd FX(m, d);
  std::visit(
      [&](const auto& l) {
        double Gbuf[4], FXbuf[8];
        for (int k = 0; k < d; ++k)
          for (int i = 0; i < d; ++i) Gbuf[i + d * k] = G(i, k);
        transformed_flux_kernel(l, WX.data(), Gbuf, g, v.data(), x.data(),
                                FXbuf);
        for (int k = 0; k < d; ++k)
          for (int c = 0; c < m; ++c) FX(c, k) = FXbuf[c + m * k];
      },
      law);
  return FX;
}

Eigen::VectorXd reference_numerical_flux(const ConservationLaw& law,
                                         const Eigen::VectorXd& UXp,
                                         const Eigen::VectorXd& UXm,
                                         const Eigen::VectorXd& N,
                                         const Eigen::MatrixXd& G,
                                         double gp, double gm,
                                         const Eigen::VectorXd& v,
                                         const Eigen::VectorXd& x) {
  if (!(gp > 0.0) || !(gm > 0.0))
    throw InvertedElementError("nonpositive mapping Jacobian at face");
  // Nanson scaling g G^{-T} N and the physical unit normal.
  Eigen::VectorXd w = gp * G.inverse().transpose() * N;
  const double nrm = w.norm();
  Eigen::VectorXd n = w / nrm;
  Eigen::VectorXd Up = UXp / gp, Um = UXm / gm;
  return nrm * numerical_flux_modified(law, Up, Um, n, v, x);
}

double rankine_hugoniot_speed(const ConservationLaw& law,
                              const Eigen::VectorXd& UL,
                              const Eigen::VectorXd& UR,
                              const Eigen::VectorXd& n,
                              const Eigen::VectorXd& x) {
  const Eigen::VectorXd dU = UL - UR;
  const double tol = 1e-8 * std::max(1.0, UL.lpNorm<Eigen::Infinity>());
  if (dU.lpNorm<Eigen::Infinity>() < tol)
    throw DegenerateJumpError("jump across face below tolerance");
  const Eigen::VectorXd dF =
      (physical_flux(law, UL, x) - physical_flux(law, UR, x)) * n;
  return dU.dot(dF) / dU.dot(dU);
}

double advective_speed(const ConservationLaw& law, const Eigen::VectorXd& U,
                       const Eigen::VectorXd& n, const Eigen::VectorXd& x) {
  return std::visit(
      [&](const auto& l) {
        return l.wave_speed(U.data(), n.data(), x.data());
      },
      law);
}

Eigen::VectorXd to_conservative(const Euler& law, const PrimitiveState& prim) {
  const int d = law.d;
  Eigen::VectorXd U(d + 2);
  U[0] = prim.rho;
  double ke = 0.0;
  for (int k = 0; k < d; ++k) {
    U[1 + k] = prim.rho * prim.v[k];
    ke += prim.v[k] * prim.v[k];
  }
  U[d + 1] = prim.P / (law.gamma - 1.0) + 0.5 * prim.rho * ke;
  return U;
}

PrimitiveState to_primitive(const Euler& law, const Eigen::VectorXd& U) {
  const int d = law.d;
  PrimitiveState prim;
  prim.rho = U[0];
  prim.v.resize(d);
  for (int k = 0; k < d; ++k) prim.v[k] = U[1 + k] / U[0];
  prim.P = law.pressure(U.data());
  return prim;
}

}  // namespace moltrack
