#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "moltrack/conservation_law.hpp"
#include "moltrack/mesh.hpp"

namespace moltrack {

using SpMat = Eigen::SparseMatrix<double>;

// Boundary treatment at a 1D domain end. The exterior trace is built from
// the interior one: fixed physical state (dirichlet), interior state with
// the fluid velocity overwritten (velocity_only), or the wrapped neighbor
// element (periodic).
struct BoundarySpec {
  enum class Kind { periodic, dirichlet, velocity_only };
  Kind kind = Kind::periodic;
  Eigen::VectorXd state;   // physical conservative state (dirichlet)
  double velocity = 0.0;   // prescribed fluid velocity (velocity_only)
};

struct SpatialJacobians {
  Eigen::VectorXd f;  // spatial term assembled alongside the derivatives
  SpMat du, dx, dxdot;
};

// Nodal DG semi-discretization of the transformed conservation law on the
// reference mesh: mass matrices, spatial term f(u, x, xdot), the enriched
// variants tested against degree p+1, and exact Jacobians.
//
// The element loop is elementwise-pure: every element owns its residual
// rows and evaluates its own face fluxes, so the OpenMP path is
// deterministic independent of scheduling. A serial face-loop reference
// implementation is kept for testing and benchmarking.
class DgSystem {
 public:
  DgSystem(ConservationLaw law, MovingMesh mesh, int p, BoundarySpec left,
           BoundarySpec right);

  const ConservationLaw& law() const { return law_; }
  const MovingMesh& mesh() const { return mesh_; }
  int p() const { return p_; }
  int n_comp() const { return m_; }
  int n_u() const { return n_u_; }
  int n_enriched() const { return n_enr_; }
  int n_x() const { return static_cast<int>(mesh_.n_nodes()); }
  int nodes_per_elem() const { return np_; }
  const ReferenceElement& solution_element() const { return ref_p_; }
  const ReferenceElement& mapping_element() const { return ref_q_; }

  const SpMat& mass() const { return mass_; }
  const SpMat& enriched_mass() const { return enriched_mass_; }

  // Production (OpenMP) assembly of the spatial term.
  void spatial_term(const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& xdot, Eigen::VectorXd& out,
                    bool enriched = false) const;
  // Serial face-loop reference assembly (independent loop order).
  void spatial_term_serial(const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& xdot, Eigen::VectorXd& out,
                           bool enriched = false) const;
  // Spatial term plus exact Jacobians with respect to u, x and xdot.
  void spatial_jacobians(const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& xdot, SpatialJacobians& out,
                         bool enriched = false) const;

  // Semi-discrete residual  m*udot + f(u, x, xdot)  (enriched: M, F).
  void residual(const Eigen::VectorXd& udot, const Eigen::VectorXd& u,
                const Eigen::VectorXd& xdot, const Eigen::VectorXd& x,
                Eigen::VectorXd& out, bool enriched = false) const;

  // DOF index of component c at solution node a of element e.
  int dof(int e, int a, int c) const { return (e * np_ + a) * m_ + c; }

  // Physical positions / mapping Jacobians at the solution nodes.
  Eigen::VectorXd solution_node_positions(const Eigen::VectorXd& x) const;
  Eigen::VectorXd solution_node_jacobians(const Eigen::VectorXd& x) const;

  // Transformed coefficients g * U0(x_node, elem_center) interpolating a
  // physical state function.
  Eigen::VectorXd interpolate_physical(
      const std::function<Eigen::VectorXd(double, double)>& U0,
      const Eigen::VectorXd& x) const;

  // Integral of the physical state over the domain, one entry per component.
  Eigen::VectorXd component_integrals(const Eigen::VectorXd& u) const;

  // Physical one-sided traces at an interior face (face index = vertex node
  // index / q; the periodic seam is face 0).
  void face_traces(const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                   int face, Eigen::VectorXd& UL, Eigen::VectorXd& UR) const;

 private:
  struct TestTab {
    Eigen::MatrixXd vals;       // n_quad x n_test
    Eigen::MatrixXd grads;      // n_quad x n_test (local coordinate)
    Eigen::MatrixXd face_vals;  // 2 x n_test
    int n_test = 0;
  };

  template <class Law, bool WithJac>
  void assemble_elements(const Law& law, const TestTab& test,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& xdot, Eigen::VectorXd& out,
                         SpatialJacobians* jac) const;
  template <class Law>
  void assemble_serial(const Law& law, const TestTab& test,
                       const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& xdot,
                       Eigen::VectorXd& out) const;

  const TestTab& test_tab(bool enriched) const {
    return enriched ? enr_tab_ : std_tab_;
  }

  ConservationLaw law_;
  MovingMesh mesh_;
  int p_, m_, np_, nmap_, n_u_, n_enr_;
  BoundarySpec left_bc_, right_bc_;
  ReferenceElement ref_p_, ref_q_;

  TestTab std_tab_, enr_tab_;
  Eigen::MatrixXd map_vals_, map_grads_;            // at volume quad points
  Eigen::MatrixXd map_face_vals_, map_face_grads_;  // at the two endpoints
  Eigen::MatrixXd map_node_vals_, map_node_grads_;  // at solution nodes
  Eigen::VectorXd jref_;                            // per element

  std::vector<int> left_nbr_, right_nbr_;  // -1 at physical boundaries

  SpMat mass_, enriched_mass_;

  // Triplet layout offsets for deterministic parallel Jacobian assembly.
  struct JacLayout {
    std::vector<std::ptrdiff_t> du_off, dx_off, dv_off;
    std::ptrdiff_t du_total = 0, dx_total = 0, dv_total = 0;
  };
  JacLayout std_layout_, enr_layout_;
  JacLayout build_layout(int n_test) const;
};

}  // namespace moltrack
