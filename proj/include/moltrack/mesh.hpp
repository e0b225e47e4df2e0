#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "moltrack/reference_element.hpp"

namespace moltrack {

// Reference mesh: fixed topology and reference coordinates. Physical nodal
// coordinates live in MeshConfiguration and evolve in time.
struct MovingMesh {
  int dim = 1;
  int q = 1;  // mapping polynomial degree
  Eigen::MatrixXd ref_coords;    // n_nodes x dim
  Eigen::MatrixXi connectivity;  // n_elems x nodes_per_elem (degree-q Lagrange)
  std::vector<int> shock_nodes;  // node ids on tracked discontinuity faces

  // 1D boundary description. With periodic = true the two end nodes are
  // identified up to the coordinate offset `period` and move as one degree
  // of freedom.
  int left_node = -1;
  int right_node = -1;
  bool periodic = false;
  double period = 0.0;

  int n_nodes() const { return static_cast<int>(ref_coords.rows()); }
  int n_elems() const { return static_cast<int>(connectivity.rows()); }
  int nodes_per_elem() const { return static_cast<int>(connectivity.cols()); }
};

struct MeshConfiguration {
  Eigen::MatrixXd coords;    // n_nodes x dim
  Eigen::MatrixXd velocity;  // n_nodes x dim
};

// Uniform 1D mesh of [a,b] with n elements of mapping degree q.
MovingMesh make_line_mesh(double a, double b, int n_elems, int q,
                          bool periodic = false);
// Two bands [a,mid] and [mid,b], each uniformly divided.
MovingMesh make_line_mesh_two_bands(double a, double mid, double b, int n_left,
                                    int n_right, int q);
// 2D simplex mesh from vertex coordinates and triangles; degree-q nodes are
// generated as affine images of the reference nodes and deduplicated.
MovingMesh make_simplex_mesh(const Eigen::MatrixXd& vertices,
                             const Eigen::MatrixXi& triangles, int q);

struct MappingQuantities {
  std::vector<Eigen::MatrixXd> G;  // per point, d x d deformation gradient
  Eigen::VectorXd g;               // per point, det G
  Eigen::MatrixXd v;               // n_pts x d mapping velocity
  Eigen::MatrixXd x;               // n_pts x d physical position
};

// Evaluate G, g, v and physical position at local points of one element.
// `shape` must be the degree-q reference element of the mesh dimension.
MappingQuantities mapping_quantities(const MovingMesh& mesh,
                                     const ReferenceElement& shape,
                                     const MeshConfiguration& config, int elem,
                                     const Eigen::MatrixXd& local_pts);

// Quadrature approximation of int (|G|_F^2 / (d (det G)_+^(2/d)))^2 dv.
// Returns +inf if det G <= 0 at any point.
double distortion_metric(const std::vector<Eigen::MatrixXd>& G,
                         const Eigen::VectorXd& weights);
// Same with det replaced by 0.5*(det + sqrt(det^2 + 4 delta^2)).
double regularized_distortion(const std::vector<Eigen::MatrixXd>& G,
                              const Eigen::VectorXd& weights, double delta);

// Total (optionally regularized) distortion of a configuration; delta < 0
// selects the unregularized metric. Per-element delta is scaled by the
// reference element measure when delta_rel is used by smoothing.
double mesh_distortion(const MovingMesh& mesh, const ReferenceElement& shape,
                       const Eigen::MatrixXd& coords, double delta);

struct ValidityReport {
  bool valid;
  double min_det;
  int worst_element;
};
ValidityReport check_validity(const MovingMesh& mesh,
                              const ReferenceElement& shape,
                              const Eigen::MatrixXd& coords);

// Move shock nodes by velocity * dt; velocities are rows of `speeds` in the
// order of mesh.shock_nodes. All other nodes are unchanged.
Eigen::MatrixXd advect_shock_nodes(const MovingMesh& mesh,
                                   const Eigen::MatrixXd& coords,
                                   const Eigen::MatrixXd& speeds, double dt);

// Mesh smoothing with the given nodes held fixed.
// 1D: nodes between consecutive fixed nodes are equidistributed (interior
// degree-q nodes at affine images of their reference positions); on a
// periodic mesh the arcs wrap around the seam.
// 2D: gradient descent on the regularized distortion metric until relative
// decrease < 1e-8 or 200 iterations. Throws UntanglingFailureError if the
// result is invalid.
Eigen::MatrixXd smooth_mesh(const MovingMesh& mesh,
                            const ReferenceElement& shape,
                            const Eigen::MatrixXd& predicted,
                            const std::vector<int>& fixed_nodes);

// Plain-text mesh format: dimensions, node count + coordinates, element
// connectivity, boundary markers, periodicity, shock-node id list.
void write_mesh(std::ostream& os, const MovingMesh& mesh);
MovingMesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const MovingMesh& mesh);
MovingMesh read_mesh_file(const std::string& path);

}  // namespace moltrack
