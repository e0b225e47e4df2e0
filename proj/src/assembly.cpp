#include "moltrack/assembly.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <type_traits>

#include "moltrack/dual.hpp"

namespace moltrack {

namespace {

template <class T>
T seed_if(double v, int slot) {
  if constexpr (std::is_same_v<T, double>) {
    (void)slot;
    return v;
  } else {
    return T::seed(v, slot);
  }
}

}  // namespace

DgSystem::DgSystem(ConservationLaw law, MovingMesh mesh, int p,
                   BoundarySpec left, BoundarySpec right)
    : law_(std::move(law)),
      mesh_(std::move(mesh)),
      p_(p),
      left_bc_(std::move(left)),
      right_bc_(std::move(right)) {
  if (mesh_.dim != 1)
    throw SetupError("DgSystem: only d=1 meshes are assembled end-to-end");
  if (law_dim(law_) != 1) throw SetupError("DgSystem: law dimension mismatch");
  m_ = ncomp(law_);
  np_ = p_ + 1;
  nmap_ = mesh_.q + 1;
  n_u_ = mesh_.n_elems() * np_ * m_;
  n_enr_ = mesh_.n_elems() * (np_ + 1) * m_;

  ref_p_ = build_reference_element(p_, 1);
  ref_q_ = build_reference_element(mesh_.q, 1);

  std_tab_.vals = ref_p_.basis_vals;
  std_tab_.grads = ref_p_.basis_grads[0];
  std_tab_.face_vals = ref_p_.face_vals;
  std_tab_.n_test = np_;

  // Hierarchical enriched test basis: the degree-p nodal functions followed
  // by the Legendre polynomial of degree p+1, so the p-subspace rows of the
  // enriched residual coincide with the standard residual.
  const int nq = ref_p_.n_quad();
  enr_tab_.n_test = np_ + 1;
  enr_tab_.vals.resize(nq, np_ + 1);
  enr_tab_.grads.resize(nq, np_ + 1);
  enr_tab_.vals.leftCols(np_) = std_tab_.vals;
  enr_tab_.grads.leftCols(np_) = std_tab_.grads;
  for (int qp = 0; qp < nq; ++qp) {
    double pv, dv;
    legendre_eval(p_ + 1, ref_p_.quad_points(qp, 0), pv, dv);
    enr_tab_.vals(qp, np_) = pv;
    enr_tab_.grads(qp, np_) = dv;
  }
  enr_tab_.face_vals.resize(2, np_ + 1);
  enr_tab_.face_vals.leftCols(np_) = std_tab_.face_vals;
  enr_tab_.face_vals(0, np_) = (p_ + 1) % 2 == 0 ? 1.0 : -1.0;
  enr_tab_.face_vals(1, np_) = 1.0;

  map_vals_ = ref_q_.eval_basis(ref_p_.quad_points);
  map_grads_ = ref_q_.eval_basis_grad(ref_p_.quad_points)[0];
  map_face_vals_ = ref_q_.face_vals;
  map_face_grads_ = ref_q_.face_grads;
  map_node_vals_ = ref_q_.eval_basis(ref_p_.nodes);
  map_node_grads_ = ref_q_.eval_basis_grad(ref_p_.nodes)[0];

  const int K = mesh_.n_elems();
  jref_.resize(K);
  for (int e = 0; e < K; ++e) {
    double j = 0.0;
    for (int b = 0; b < nmap_; ++b)
      j += mesh_.ref_coords(mesh_.connectivity(e, b), 0) * map_grads_(0, b);
    if (!(j > 0.0)) throw SetupError("DgSystem: inverted reference element");
    jref_[e] = j;
  }

  left_nbr_.assign(K, -1);
  right_nbr_.assign(K, -1);
  for (int e = 0; e < K; ++e) {
    left_nbr_[e] = e > 0 ? e - 1 : (mesh_.periodic ? K - 1 : -1);
    right_nbr_[e] = e < K - 1 ? e + 1 : (mesh_.periodic ? 0 : -1);
  }
  if (mesh_.periodic) {
    if (left_bc_.kind != BoundarySpec::Kind::periodic ||
        right_bc_.kind != BoundarySpec::Kind::periodic)
      throw SetupError("DgSystem: periodic mesh requires periodic boundaries");
  } else {
    if (left_bc_.kind == BoundarySpec::Kind::periodic ||
        right_bc_.kind == BoundarySpec::Kind::periodic)
      throw SetupError("DgSystem: periodic boundary on non-periodic mesh");
    for (const BoundarySpec* bc : {&left_bc_, &right_bc_}) {
      if (bc->kind == BoundarySpec::Kind::dirichlet &&
          bc->state.size() != m_)
        throw SetupError("DgSystem: boundary state has wrong size");
      if (bc->kind == BoundarySpec::Kind::velocity_only &&
          !std::holds_alternative<Euler>(law_))
        throw SetupError("DgSystem: velocity-only boundary needs Euler");
    }
  }

  // Reference-domain mass matrices (independent of the mesh motion).
  std::vector<Eigen::Triplet<double>> tm, tM;
  for (int e = 0; e < K; ++e) {
    for (int i = 0; i < np_; ++i) {
      for (int j = 0; j < np_; ++j) {
        double v = 0.0;
        for (int qp = 0; qp < nq; ++qp)
          v += ref_p_.quad_weights[qp] * std_tab_.vals(qp, i) *
               std_tab_.vals(qp, j);
        v *= jref_[e];
        for (int c = 0; c < m_; ++c)
          tm.emplace_back(dof(e, i, c), dof(e, j, c), v);
      }
    }
    for (int i = 0; i < np_ + 1; ++i) {
      for (int j = 0; j < np_; ++j) {
        double v = 0.0;
        for (int qp = 0; qp < nq; ++qp)
          v += ref_p_.quad_weights[qp] * enr_tab_.vals(qp, i) *
               std_tab_.vals(qp, j);
        v *= jref_[e];
        for (int c = 0; c < m_; ++c)
          tM.emplace_back((e * (np_ + 1) + i) * m_ + c, dof(e, j, c), v);
      }
    }
  }
  mass_.resize(n_u_, n_u_);
  mass_.setFromTriplets(tm.begin(), tm.end());
  enriched_mass_.resize(n_enr_, n_u_);
  enriched_mass_.setFromTriplets(tM.begin(), tM.end());

  std_layout_ = build_layout(np_);
  enr_layout_ = build_layout(np_ + 1);
}

DgSystem::JacLayout DgSystem::build_layout(int n_test) const {
  JacLayout lay;
  const int K = mesh_.n_elems();
  lay.du_off.resize(K);
  lay.dx_off.resize(K);
  lay.dv_off.resize(K);
  std::ptrdiff_t du = 0, dx = 0, dv = 0;
  for (int e = 0; e < K; ++e) {
    const int ng = 1 + (left_nbr_[e] >= 0) + (right_nbr_[e] >= 0);
    lay.du_off[e] = du;
    lay.dx_off[e] = dx;
    lay.dv_off[e] = dv;
    du += static_cast<std::ptrdiff_t>(n_test) * m_ * np_ * m_ * ng;
    dx += static_cast<std::ptrdiff_t>(n_test) * m_ * nmap_ * ng;
    dv += static_cast<std::ptrdiff_t>(n_test) * m_ * nmap_ * ng;
  }
  lay.du_total = du;
  lay.dx_total = dx;
  lay.dv_total = dv;
  return lay;
}

template <class Law, bool WithJac>
void DgSystem::assemble_elements(const Law& law, const TestTab& test,
                                 const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& xdot,
                                 Eigen::VectorXd& out,
                                 SpatialJacobians* jac) const {
  const int K = mesh_.n_elems();
  const int nt = test.n_test;
  const int nrows = nt * m_;
  const int nq = ref_p_.n_quad();
  out.setZero(static_cast<Eigen::Index>(K) * nrows);

  const JacLayout& lay = (nt == np_) ? std_layout_ : enr_layout_;
  std::vector<Eigen::Triplet<double>> trip_u, trip_x, trip_v;
  if constexpr (WithJac) {
    trip_u.resize(lay.du_total);
    trip_x.resize(lay.dx_total);
    trip_v.resize(lay.dv_total);
  }

  std::exception_ptr eptr = nullptr;

#pragma omp parallel for schedule(static)
  for (int e = 0; e < K; ++e) {
    try {
      Eigen::VectorXd rows = Eigen::VectorXd::Zero(nrows);
      Eigen::MatrixXd Ju, Jx, Jv;
      if constexpr (WithJac) {
        Ju.setZero(nrows, 3 * np_ * m_);
        Jx.setZero(nrows, 3 * nmap_);
        Jv.setZero(nrows, 3 * nmap_);
      }
      const double jref = jref_[e];

      // Volume term: - int F_X : grad psi (local gradients; the affine
      // reference factors cancel in 1D).
      using TV = std::conditional_t<WithJac, Dual<6>, double>;
      for (int qp = 0; qp < nq; ++qp) {
        TV WX[4], FX[4];
        for (int c = 0; c < m_; ++c) {
          double wv = 0.0;
          for (int a = 0; a < np_; ++a)
            wv += u[dof(e, a, c)] * ref_p_.basis_vals(qp, a);
          WX[c] = seed_if<TV>(wv, c);
        }
        double Gv = 0.0, vv = 0.0, xv = 0.0;
        for (int b = 0; b < nmap_; ++b) {
          const int node = mesh_.connectivity(e, b);
          Gv += x[node] * map_grads_(qp, b) / jref;
          vv += xdot[node] * map_vals_(qp, b);
          xv += x[node] * map_vals_(qp, b);
        }
        if (!(Gv > 0.0))
          throw InvertedElementError("inverted element in volume term", e);
        TV G = seed_if<TV>(Gv, m_);
        TV v = seed_if<TV>(vv, m_ + 1);
        TV xp = seed_if<TV>(xv, m_ + 2);
        TV g = G;
        transformed_flux_kernel(law, WX, &G, g, &v, &xp, FX);

        const double wq = ref_p_.quad_weights[qp];
        for (int i = 0; i < nt; ++i) {
          const double tg = wq * test.grads(qp, i);
          if (tg == 0.0) continue;
          for (int c = 0; c < m_; ++c) {
            const int r = i * m_ + c;
            rows[r] -= tg * val(FX[c]);
            if constexpr (WithJac) {
              for (int a = 0; a < np_; ++a) {
                const double phi = ref_p_.basis_vals(qp, a);
                for (int c2 = 0; c2 < m_; ++c2)
                  Ju(r, a * m_ + c2) -= tg * FX[c].d[c2] * phi;
              }
              for (int b = 0; b < nmap_; ++b) {
                Jx(r, b) -= tg * (FX[c].d[m_] * map_grads_(qp, b) / jref +
                                  FX[c].d[m_ + 2] * map_vals_(qp, b));
                Jv(r, b) -= tg * FX[c].d[m_ + 1] * map_vals_(qp, b);
              }
            }
          }
        }
      }

      // Face terms: each element evaluates both of its faces with its own
      // interior trace, so rows stay element-owned.
      using TF = std::conditional_t<WithJac, Dual<10>, double>;
      for (int side = 0; side < 2; ++side) {
        const int srow = side;
        const double N = side == 0 ? -1.0 : 1.0;
        const int nbr = side == 0 ? left_nbr_[e] : right_nbr_[e];
        const int orow = 1 - srow;

        TF UXp[4], Up[4], Um[4], H[4];
        for (int c = 0; c < m_; ++c) {
          double tv = 0.0;
          for (int a = 0; a < np_; ++a)
            tv += u[dof(e, a, c)] * ref_p_.face_vals(srow, a);
          UXp[c] = seed_if<TF>(tv, c);
        }
        double gpv = 0.0, vv = 0.0, xv = 0.0;
        for (int b = 0; b < nmap_; ++b) {
          const int node = mesh_.connectivity(e, b);
          gpv += x[node] * map_face_grads_(srow, b) / jref;
          vv += xdot[node] * map_face_vals_(srow, b);
          xv += x[node] * map_face_vals_(srow, b);
        }
        if (!(gpv > 0.0))
          throw InvertedElementError("inverted element at face", e);
        TF gp = seed_if<TF>(gpv, 2 * m_);
        TF vf = seed_if<TF>(vv, 2 * m_ + 2);
        TF xf = seed_if<TF>(xv, 2 * m_ + 3);
        for (int c = 0; c < m_; ++c) Up[c] = UXp[c] / gp;
        TF n = N;

        bool have_nbr = nbr >= 0;
        if (have_nbr) {
          for (int c = 0; c < m_; ++c) {
            double tv = 0.0;
            for (int a = 0; a < np_; ++a)
              tv += u[dof(nbr, a, c)] * ref_p_.face_vals(orow, a);
            Um[c] = seed_if<TF>(tv, m_ + c);
          }
          double gmv = 0.0;
          for (int b = 0; b < nmap_; ++b)
            gmv += x[mesh_.connectivity(nbr, b)] * map_face_grads_(orow, b) /
                   jref_[nbr];
          if (!(gmv > 0.0))
            throw InvertedElementError("inverted neighbor at face", nbr);
          TF gm = seed_if<TF>(gmv, 2 * m_ + 1);
          for (int c = 0; c < m_; ++c) Um[c] = Um[c] / gm;
        } else {
          const BoundarySpec& bc = side == 0 ? left_bc_ : right_bc_;
          if (bc.kind == BoundarySpec::Kind::dirichlet) {
            for (int c = 0; c < m_; ++c) Um[c] = TF(bc.state[c]);
          } else {  // velocity_only: interior trace with prescribed velocity
            for (int c = 0; c < m_; ++c) Um[c] = Up[c];
            Um[1] = Up[0] * bc.velocity;
          }
        }
        law.num_flux_mod(Up, Um, &n, &vf, &xf, H);

        for (int i = 0; i < nt; ++i) {
          const double tv = test.face_vals(srow, i);
          if (tv == 0.0) continue;
          for (int c = 0; c < m_; ++c) {
            const int r = i * m_ + c;
            rows[r] += tv * val(H[c]);
            if constexpr (WithJac) {
              for (int a = 0; a < np_; ++a) {
                const double phs = ref_p_.face_vals(srow, a);
                const double pho = ref_p_.face_vals(orow, a);
                for (int c2 = 0; c2 < m_; ++c2) {
                  Ju(r, a * m_ + c2) += tv * H[c].d[c2] * phs;
                  if (have_nbr) {
                    const int grp = side == 0 ? 1 : 2;
                    Ju(r, grp * np_ * m_ + a * m_ + c2) +=
                        tv * H[c].d[m_ + c2] * pho;
                  }
                }
              }
              for (int b = 0; b < nmap_; ++b) {
                Jx(r, b) +=
                    tv * (H[c].d[2 * m_] * map_face_grads_(srow, b) / jref +
                          H[c].d[2 * m_ + 3] * map_face_vals_(srow, b));
                Jv(r, b) += tv * H[c].d[2 * m_ + 2] * map_face_vals_(srow, b);
                if (have_nbr) {
                  const int grp = side == 0 ? 1 : 2;
                  Jx(r, grp * nmap_ + b) += tv * H[c].d[2 * m_ + 1] *
                                            map_face_grads_(orow, b) /
                                            jref_[nbr];
                }
              }
            }
          }
        }
      }

      out.segment(static_cast<Eigen::Index>(e) * nrows, nrows) = rows;

      if constexpr (WithJac) {
        std::ptrdiff_t ou = lay.du_off[e], ox = lay.dx_off[e],
                       ov = lay.dv_off[e];
        const int grp_elems[3] = {e, left_nbr_[e], right_nbr_[e]};
        for (int g = 0; g < 3; ++g) {
          const int eg = grp_elems[g];
          if (eg < 0) continue;
          for (int r = 0; r < nrows; ++r) {
            const int grow = e * nrows + r;
            for (int a = 0; a < np_; ++a)
              for (int c2 = 0; c2 < m_; ++c2)
                trip_u[ou++] = {grow, dof(eg, a, c2),
                                Ju(r, g * np_ * m_ + a * m_ + c2)};
            for (int b = 0; b < nmap_; ++b) {
              const int col = mesh_.connectivity(eg, b);
              trip_x[ox++] = {grow, col, Jx(r, g * nmap_ + b)};
              trip_v[ov++] = {grow, col, Jv(r, g * nmap_ + b)};
            }
          }
        }
      }
    } catch (...) {
#pragma omp critical
      if (!eptr) eptr = std::current_exception();
    }
  }
  if (eptr) std::rethrow_exception(eptr);

  if constexpr (WithJac) {
    const Eigen::Index nr = static_cast<Eigen::Index>(K) * nrows;
    jac->f = out;
    jac->du.resize(nr, n_u_);
    jac->du.setFromTriplets(trip_u.begin(), trip_u.end());
    jac->dx.resize(nr, n_x());
    jac->dx.setFromTriplets(trip_x.begin(), trip_x.end());
    jac->dxdot.resize(nr, n_x());
    jac->dxdot.setFromTriplets(trip_v.begin(), trip_v.end());
  }
}

template <class Law>
void DgSystem::assemble_serial(const Law& law, const TestTab& test,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& x,
                               const Eigen::VectorXd& xdot,
                               Eigen::VectorXd& out) const {
  const int K = mesh_.n_elems();
  const int nt = test.n_test;
  const int nrows = nt * m_;
  const int nq = ref_p_.n_quad();
  out.setZero(static_cast<Eigen::Index>(K) * nrows);

  // Volume loop.
  for (int e = 0; e < K; ++e) {
    const double jref = jref_[e];
    for (int qp = 0; qp < nq; ++qp) {
      double WX[4], FX[4];
      for (int c = 0; c < m_; ++c) {
        WX[c] = 0.0;
        for (int a = 0; a < np_; ++a)
          WX[c] += u[dof(e, a, c)] * ref_p_.basis_vals(qp, a);
      }
      double G = 0.0, v = 0.0, xp = 0.0;
      for (int b = 0; b < nmap_; ++b) {
        const int node = mesh_.connectivity(e, b);
        G += x[node] * map_grads_(qp, b) / jref;
        v += xdot[node] * map_vals_(qp, b);
        xp += x[node] * map_vals_(qp, b);
      }
      transformed_flux_kernel(law, WX, &G, G, &v, &xp, FX);
      const double wq = ref_p_.quad_weights[qp];
      for (int i = 0; i < nt; ++i)
        for (int c = 0; c < m_; ++c)
          out[e * nrows + i * m_ + c] -= wq * test.grads(qp, i) * FX[c];
    }
  }

  // Face loop: each physical flux is evaluated once and scattered to both
  // sides using conservativity.
  auto trace = [&](int e, int row, double* UX, double& g, double& v,
                   double& xp) {
    for (int c = 0; c < m_; ++c) {
      UX[c] = 0.0;
      for (int a = 0; a < np_; ++a)
        UX[c] += u[dof(e, a, c)] * ref_p_.face_vals(row, a);
    }
    g = v = xp = 0.0;
    for (int b = 0; b < nmap_; ++b) {
      const int node = mesh_.connectivity(e, b);
      g += x[node] * map_face_grads_(row, b) / jref_[e];
      v += xdot[node] * map_face_vals_(row, b);
      xp += x[node] * map_face_vals_(row, b);
    }
  };

  const int f_begin = mesh_.periodic ? 0 : 1;
  for (int f = f_begin; f < K; ++f) {
    const int eL = f == 0 ? K - 1 : f - 1;
    const int eR = f == 0 ? 0 : f;
    double UXL[4], UXR[4], UL[4], UR[4], H[4];
    double gL, gR, vL, vR, xL, xR;
    trace(eL, 1, UXL, gL, vL, xL);
    trace(eR, 0, UXR, gR, vR, xR);
    for (int c = 0; c < m_; ++c) {
      UL[c] = UXL[c] / gL;
      UR[c] = UXR[c] / gR;
    }
    const double n = 1.0;
    law.num_flux_mod(UL, UR, &n, &vL, &xL, H);
    for (int i = 0; i < nt; ++i)
      for (int c = 0; c < m_; ++c) {
        out[eL * nrows + i * m_ + c] += test.face_vals(1, i) * H[c];
        out[eR * nrows + i * m_ + c] -= test.face_vals(0, i) * H[c];
      }
  }

  if (!mesh_.periodic) {
    for (int side = 0; side < 2; ++side) {
      const int e = side == 0 ? 0 : K - 1;
      const int row = side == 0 ? 0 : 1;
      const double n = side == 0 ? -1.0 : 1.0;
      const BoundarySpec& bc = side == 0 ? left_bc_ : right_bc_;
      double UX[4], Up[4], Um[4], H[4];
      double g, v, xp;
      trace(e, row, UX, g, v, xp);
      for (int c = 0; c < m_; ++c) Up[c] = UX[c] / g;
      if (bc.kind == BoundarySpec::Kind::dirichlet) {
        for (int c = 0; c < m_; ++c) Um[c] = bc.state[c];
      } else {
        for (int c = 0; c < m_; ++c) Um[c] = Up[c];
        Um[1] = Up[0] * bc.velocity;
      }
      law.num_flux_mod(Up, Um, &n, &v, &xp, H);
      for (int i = 0; i < nt; ++i)
        for (int c = 0; c < m_; ++c)
          out[e * nrows + i * m_ + c] += test.face_vals(row, i) * H[c];
    }
  }
}

void DgSystem::spatial_term(const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& xdot, Eigen::VectorXd& out,
                            bool enriched) const {
  std::visit(
      [&](const auto& law) {
        assemble_elements<std::decay_t<decltype(law)>, false>(
            law, test_tab(enriched), u, x, xdot, out, nullptr);
      },
      law_);
}

void DgSystem::spatial_term_serial(const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& xdot,
                                   Eigen::VectorXd& out, bool enriched) const {
  std::visit(
      [&](const auto& law) {
        assemble_serial(law, test_tab(enriched), u, x, xdot, out);
      },
      law_);
}

void DgSystem::spatial_jacobians(const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& xdot,
                                 SpatialJacobians& out, bool enriched) const {
  Eigen::VectorXd f;
  std::visit(
      [&](const auto& law) {
        assemble_elements<std::decay_t<decltype(law)>, true>(
            law, test_tab(enriched), u, x, xdot, f, &out);
      },
      law_);
}

void DgSystem::residual(const Eigen::VectorXd& udot, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& xdot, const Eigen::VectorXd& x,
                        Eigen::VectorXd& out, bool enriched) const {
  spatial_term(u, x, xdot, out, enriched);
  out += (enriched ? enriched_mass_ : mass_) * udot;
}

Eigen::VectorXd DgSystem::solution_node_positions(
    const Eigen::VectorXd& x) const {
  const int K = mesh_.n_elems();
  Eigen::VectorXd pos(K * np_);
  for (int e = 0; e < K; ++e)
    for (int a = 0; a < np_; ++a) {
      double xa = 0.0;
      for (int b = 0; b < nmap_; ++b)
        xa += x[mesh_.connectivity(e, b)] * map_node_vals_(a, b);
      pos[e * np_ + a] = xa;
    }
  return pos;
}

Eigen::VectorXd DgSystem::solution_node_jacobians(
    const Eigen::VectorXd& x) const {
  const int K = mesh_.n_elems();
  Eigen::VectorXd g(K * np_);
  for (int e = 0; e < K; ++e)
    for (int a = 0; a < np_; ++a) {
      double ga = 0.0;
      for (int b = 0; b < nmap_; ++b)
        ga += x[mesh_.connectivity(e, b)] * map_node_grads_(a, b) / jref_[e];
      g[e * np_ + a] = ga;
    }
  return g;
}

Eigen::VectorXd DgSystem::interpolate_physical(
    const std::function<Eigen::VectorXd(double, double)>& U0,
    const Eigen::VectorXd& x) const {
  const int K = mesh_.n_elems();
  Eigen::VectorXd u(n_u_);
  const Eigen::VectorXd pos = solution_node_positions(x);
  const Eigen::VectorXd jac = solution_node_jacobians(x);
  for (int e = 0; e < K; ++e) {
    const double xc = 0.5 * (x[mesh_.connectivity(e, 0)] +
                             x[mesh_.connectivity(e, nmap_ - 1)]);
    for (int a = 0; a < np_; ++a) {
      const Eigen::VectorXd U = U0(pos[e * np_ + a], xc);
      for (int c = 0; c < m_; ++c)
        u[dof(e, a, c)] = jac[e * np_ + a] * U[c];
    }
  }
  return u;
}

Eigen::VectorXd DgSystem::component_integrals(const Eigen::VectorXd& u) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(m_);
  const int nq = ref_p_.n_quad();
  for (int e = 0; e < mesh_.n_elems(); ++e)
    for (int qp = 0; qp < nq; ++qp) {
      const double w = ref_p_.quad_weights[qp] * jref_[e];
      for (int c = 0; c < m_; ++c) {
        double wx = 0.0;
        for (int a = 0; a < np_; ++a)
          wx += u[dof(e, a, c)] * ref_p_.basis_vals(qp, a);
        total[c] += w * wx;
      }
    }
  return total;
}

void DgSystem::face_traces(const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                           int face, Eigen::VectorXd& UL,
                           Eigen::VectorXd& UR) const {
  const int K = mesh_.n_elems();
  int eL, eR;
  if (face == 0 || face == K) {
    if (!mesh_.periodic) throw SetupError("face_traces: boundary face");
    eL = K - 1;
    eR = 0;
  } else {
    eL = face - 1;
    eR = face;
  }
  UL.resize(m_);
  UR.resize(m_);
  for (int pass = 0; pass < 2; ++pass) {
    const int e = pass == 0 ? eL : eR;
    const int row = pass == 0 ? 1 : 0;
    double g = 0.0;
    for (int b = 0; b < nmap_; ++b)
      g += x[mesh_.connectivity(e, b)] * map_face_grads_(row, b) / jref_[e];
    for (int c = 0; c < m_; ++c) {
      double ux = 0.0;
      for (int a = 0; a < np_; ++a)
        ux += u[dof(e, a, c)] * ref_p_.face_vals(row, a);
      (pass == 0 ? UL : UR)[c] = ux / g;
    }
  }
}

}  // namespace moltrack
