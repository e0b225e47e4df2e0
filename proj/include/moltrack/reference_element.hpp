#pragma once

#include <Eigen/Dense>
#include <vector>

namespace moltrack {

// Gauss-Legendre rule on [-1,1], exact for polynomials of degree 2n-1.
void gauss_legendre(int n, Eigen::VectorXd& pts, Eigen::VectorXd& wts);

// Gauss-Jacobi rule on [-1,1] with weight (1-x)^a (1+x)^b.
void gauss_jacobi(int n, double a, double b, Eigen::VectorXd& pts,
                  Eigen::VectorXd& wts);

// n Gauss-Lobatto-Legendre points on [-1,1] (n >= 2), endpoints included.
Eigen::VectorXd lobatto_points(int n);

// Legendre polynomial P_n and derivative at x (unnormalized, P_n(1)=1).
void legendre_eval(int n, double x, double& p, double& dp);

// Tabulated nodal element data on the reference interval [-1,1] (dim 1) or
// the reference simplex with vertices (-1,-1),(1,-1),(-1,1) (dim 2).
struct ReferenceElement {
  int dim = 1;
  int degree = 1;
  Eigen::MatrixXd nodes;        // n_nodes x dim, Lagrange node coordinates
  Eigen::MatrixXd quad_points;  // n_quad x dim
  Eigen::VectorXd quad_weights; // sums to the reference measure
  Eigen::MatrixXd basis_vals;   // n_quad x n_nodes
  std::vector<Eigen::MatrixXd> basis_grads;  // dim entries, n_quad x n_nodes

  // 1D only: basis values at the endpoints -1 (row 0) and +1 (row 1).
  Eigen::MatrixXd face_vals;   // 2 x n_nodes
  Eigen::MatrixXd face_grads;  // 2 x n_nodes

  // Inverse generalized Vandermonde (modal -> nodal), used by eval_basis.
  Eigen::MatrixXd vinv;

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int n_quad() const { return static_cast<int>(quad_points.rows()); }

  // Basis evaluation at arbitrary points (rows of pts).
  Eigen::MatrixXd eval_basis(const Eigen::MatrixXd& pts) const;
  std::vector<Eigen::MatrixXd> eval_basis_grad(const Eigen::MatrixXd& pts) const;
};

// 1D: Gauss-Lobatto nodes, Gauss-Legendre volume rule with degree+3 points.
// 2D: warp&blend nodes on the simplex, collapsed-coordinate rule exact for
// total degree 2*degree+3.
ReferenceElement build_reference_element(int degree, int dim);

}  // namespace moltrack
