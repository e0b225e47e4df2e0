#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "moltrack/assembly.hpp"

namespace moltrack {

enum class DirkScheme { dirk1, dirk2, dirk3 };

DirkScheme parse_scheme(const std::string& name);
std::string scheme_name(DirkScheme scheme);

struct ButcherTableau {
  int s = 1;
  Eigen::MatrixXd A;     // lower triangular, nonzero diagonal
  Eigen::VectorXd b, c;
  Eigen::MatrixXd Ainv;  // exact forward substitution of A
};

ButcherTableau dirk_tableau(DirkScheme scheme);

// Frozen step/stage context exposing the fully discrete stage residual
// r_{n,i}(w, y) = m xi(w) + dt f(w, y, zeta(y)) and its Jacobians.
struct StageProblem {
  const DgSystem* sys = nullptr;
  const ButcherTableau* tableau = nullptr;
  int step = 0;
  int stage = 0;  // 0-based
  double dt = 0.0;
  double t_n = 0.0;
  Eigen::VectorXd u_n, x_n;
  std::vector<Eigen::VectorXd> prev_u, prev_x;

  double aii_inv = 1.0;
  Eigen::VectorXd xi_const, zeta_const;
};

StageProblem make_stage_problem(const DgSystem& sys,
                                const ButcherTableau& tableau, int step,
                                int stage, double dt, double t_n,
                                const Eigen::VectorXd& u_n,
                                const Eigen::VectorXd& x_n,
                                const std::vector<Eigen::VectorXd>& prev_u,
                                const std::vector<Eigen::VectorXd>& prev_x);

// Maps the stage state to its update k^u; affine in w.
Eigen::VectorXd stage_update_xi(const StageProblem& sp,
                                const Eigen::VectorXd& w);
// Maps the stage mesh to the stage-consistent velocity; affine in y.
Eigen::VectorXd stage_velocity_zeta(const StageProblem& sp,
                                    const Eigen::VectorXd& y);

void stage_residual(const StageProblem& sp, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& y, Eigen::VectorXd& out,
                    bool enriched = false);

struct StageJacobians {
  Eigen::VectorXd r;
  SpMat dw, dy;
};
void stage_jacobians(const StageProblem& sp, const Eigen::VectorXd& w,
                     const Eigen::VectorXd& y, StageJacobians& out,
                     bool enriched = false);

// Stiffly-accurate step advance; also forms the general sum u_n + sum b_j k_j
// and checks agreement as a runtime self-check.
struct StepResult {
  Eigen::VectorXd u, x;
};
StepResult advance_step(const ButcherTableau& tableau,
                        const Eigen::VectorXd& u_n, const Eigen::VectorXd& x_n,
                        const std::vector<Eigen::VectorXd>& stage_u,
                        const std::vector<Eigen::VectorXd>& stage_x);

}  // namespace moltrack
