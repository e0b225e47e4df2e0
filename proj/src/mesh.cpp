#include "moltrack/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "moltrack/dual.hpp"
#include "moltrack/errors.hpp"

namespace moltrack {

namespace {

// Per-element affine map of the straight reference mesh: J_ref, its inverse
// and determinant (constant over the element).
struct RefFrame {
  Eigen::MatrixXd J, Jinv;
  double det;
};

RefFrame reference_frame(const MovingMesh& mesh, const ReferenceElement& shape,
                         int elem) {
  const int d = mesh.dim;
  const int nn = mesh.nodes_per_elem();
  RefFrame fr;
  fr.J.setZero(d, d);
  // Gradients at the first quadrature point suffice; the frame is affine.
  for (int a = 0; a < nn; ++a) {
    const int node = mesh.connectivity(elem, a);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        fr.J(k, l) += mesh.ref_coords(node, k) * shape.basis_grads[l](0, a);
  }
  fr.det = fr.J.determinant();
  fr.Jinv = fr.J.inverse();
  return fr;
}

double simplex_local_measure(int dim) { return dim == 1 ? 2.0 : 2.0; }

}  // namespace

MovingMesh make_line_mesh(double a, double b, int n_elems, int q,
                          bool periodic) {
  MovingMesh mesh;
  mesh.dim = 1;
  mesh.q = q;
  mesh.periodic = periodic;
  mesh.period = periodic ? (b - a) : 0.0;
  const int n_nodes = n_elems * q + 1;
  mesh.ref_coords.resize(n_nodes, 1);
  mesh.connectivity.resize(n_elems, q + 1);
  const Eigen::VectorXd t = lobatto_points(q + 1);
  const double h = (b - a) / n_elems;
  for (int e = 0; e < n_elems; ++e) {
    const double xl = a + e * h;
    for (int l = 0; l <= q; ++l) {
      const int node = e * q + l;
      mesh.connectivity(e, l) = node;
      mesh.ref_coords(node, 0) = xl + 0.5 * (t[l] + 1.0) * h;
    }
  }
  mesh.ref_coords(n_nodes - 1, 0) = b;
  mesh.left_node = 0;
  mesh.right_node = n_nodes - 1;
  return mesh;
}

MovingMesh make_line_mesh_two_bands(double a, double mid, double b, int n_left,
                                    int n_right, int q) {
  MovingMesh left = make_line_mesh(a, mid, n_left, q, false);
  MovingMesh right = make_line_mesh(mid, b, n_right, q, false);
  MovingMesh mesh;
  mesh.dim = 1;
  mesh.q = q;
  const int n_nodes = (n_left + n_right) * q + 1;
  mesh.ref_coords.resize(n_nodes, 1);
  mesh.connectivity.resize(n_left + n_right, q + 1);
  mesh.ref_coords.topRows(left.n_nodes()) = left.ref_coords;
  mesh.ref_coords.bottomRows(right.n_nodes() - 1) =
      right.ref_coords.bottomRows(right.n_nodes() - 1);
  for (int e = 0; e < n_left + n_right; ++e)
    for (int l = 0; l <= q; ++l) mesh.connectivity(e, l) = e * q + l;
  mesh.left_node = 0;
  mesh.right_node = n_nodes - 1;
  return mesh;
}

MovingMesh make_simplex_mesh(const Eigen::MatrixXd& vertices,
                             const Eigen::MatrixXi& triangles, int q) {
  MovingMesh mesh;
  mesh.dim = 2;
  mesh.q = q;
  const ReferenceElement shape = build_reference_element(q, 2);
  const int nn = shape.n_nodes();
  const int nt = static_cast<int>(triangles.rows());
  mesh.connectivity.resize(nt, nn);

  std::vector<Eigen::Vector2d> coords;
  std::map<std::pair<long long, long long>, int> lookup;
  const double scale = vertices.cwiseAbs().maxCoeff() + 1.0;
  auto key = [&](const Eigen::Vector2d& p) {
    return std::make_pair(
        static_cast<long long>(std::llround(p.x() / scale * 1e9)),
        static_cast<long long>(std::llround(p.y() / scale * 1e9)));
  };

  for (int t = 0; t < nt; ++t) {
    Eigen::Vector2d v0 = vertices.row(triangles(t, 0));
    Eigen::Vector2d v1 = vertices.row(triangles(t, 1));
    Eigen::Vector2d v2 = vertices.row(triangles(t, 2));
    for (int a = 0; a < nn; ++a) {
      const double r = shape.nodes(a, 0), s = shape.nodes(a, 1);
      const double l1 = 0.5 * (1.0 + r), l2 = 0.5 * (1.0 + s);
      const double l0 = -0.5 * (r + s);
      Eigen::Vector2d p = l0 * v0 + l1 * v1 + l2 * v2;
      auto it = lookup.find(key(p));
      int id;
      if (it == lookup.end()) {
        id = static_cast<int>(coords.size());
        coords.push_back(p);
        lookup.emplace(key(p), id);
      } else {
        id = it->second;
      }
      mesh.connectivity(t, a) = id;
    }
  }
  mesh.ref_coords.resize(static_cast<int>(coords.size()), 2);
  for (size_t i = 0; i < coords.size(); ++i)
    mesh.ref_coords.row(static_cast<int>(i)) = coords[i];
  return mesh;
}

MappingQuantities mapping_quantities(const MovingMesh& mesh,
                                     const ReferenceElement& shape,
                                     const MeshConfiguration& config, int elem,
                                     const Eigen::MatrixXd& local_pts) {
  const int d = mesh.dim;
  const int nn = mesh.nodes_per_elem();
  const int np = static_cast<int>(local_pts.rows());
  const RefFrame fr = reference_frame(mesh, shape, elem);
  const Eigen::MatrixXd vals = shape.eval_basis(local_pts);
  const std::vector<Eigen::MatrixXd> grads = shape.eval_basis_grad(local_pts);

  MappingQuantities out;
  out.G.assign(np, Eigen::MatrixXd::Zero(d, d));
  out.g.resize(np);
  out.v.setZero(np, d);
  out.x.setZero(np, d);
  for (int p = 0; p < np; ++p) {
    Eigen::MatrixXd Gl = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < nn; ++a) {
      const int node = mesh.connectivity(elem, a);
      for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l)
          Gl(k, l) += config.coords(node, k) * grads[l](p, a);
        out.v(p, k) += config.velocity(node, k) * vals(p, a);
        out.x(p, k) += config.coords(node, k) * vals(p, a);
      }
    }
    out.G[p] = Gl * fr.Jinv;
    out.g[p] = out.G[p].determinant();
  }
  return out;
}

double distortion_metric(const std::vector<Eigen::MatrixXd>& G,
                         const Eigen::VectorXd& weights) {
  double total = 0.0;
  for (size_t p = 0; p < G.size(); ++p) {
    const int d = static_cast<int>(G[p].rows());
    const double det = G[p].determinant();
    if (!(det > 0.0)) return std::numeric_limits<double>::infinity();
    const double fro2 = G[p].squaredNorm();
    const double r = fro2 / (d * std::pow(det, 2.0 / d));
    total += weights[static_cast<int>(p)] * r * r;
  }
  return total;
}

double regularized_distortion(const std::vector<Eigen::MatrixXd>& G,
                              const Eigen::VectorXd& weights, double delta) {
  double total = 0.0;
  for (size_t p = 0; p < G.size(); ++p) {
    const int d = static_cast<int>(G[p].rows());
    const double det = G[p].determinant();
    const double dreg = 0.5 * (det + std::sqrt(det * det + 4.0 * delta * delta));
    const double fro2 = G[p].squaredNorm();
    const double r = fro2 / (d * std::pow(dreg, 2.0 / d));
    total += weights[static_cast<int>(p)] * r * r;
  }
  return total;
}

double mesh_distortion(const MovingMesh& mesh, const ReferenceElement& shape,
                       const Eigen::MatrixXd& coords, double delta) {
  MeshConfiguration cfg;
  cfg.coords = coords;
  cfg.velocity = Eigen::MatrixXd::Zero(coords.rows(), coords.cols());
  double total = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const RefFrame fr = reference_frame(mesh, shape, e);
    MappingQuantities mq =
        mapping_quantities(mesh, shape, cfg, e, shape.quad_points);
    const Eigen::VectorXd w = shape.quad_weights * std::abs(fr.det);
    total += (delta < 0.0) ? distortion_metric(mq.G, w)
                           : regularized_distortion(mq.G, w, delta);
  }
  return total;
}

ValidityReport check_validity(const MovingMesh& mesh,
                              const ReferenceElement& shape,
                              const Eigen::MatrixXd& coords) {
  MeshConfiguration cfg;
  cfg.coords = coords;
  cfg.velocity = Eigen::MatrixXd::Zero(coords.rows(), coords.cols());
  ValidityReport rep{true, std::numeric_limits<double>::infinity(), -1};
  for (int e = 0; e < mesh.n_elems(); ++e) {
    MappingQuantities mq =
        mapping_quantities(mesh, shape, cfg, e, shape.quad_points);
    const double mn = mq.g.minCoeff();
    if (mn < rep.min_det) {
      rep.min_det = mn;
      rep.worst_element = e;
    }
  }
  rep.valid = rep.min_det > 0.0;
  return rep;
}

Eigen::MatrixXd advect_shock_nodes(const MovingMesh& mesh,
                                   const Eigen::MatrixXd& coords,
                                   const Eigen::MatrixXd& speeds, double dt) {
  Eigen::MatrixXd out = coords;
  for (size_t i = 0; i < mesh.shock_nodes.size(); ++i)
    out.row(mesh.shock_nodes[i]) += dt * speeds.row(static_cast<int>(i));
  return out;
}

namespace {

Eigen::MatrixXd smooth_mesh_1d(const MovingMesh& mesh,
                               const ReferenceElement& shape,
                               const Eigen::MatrixXd& predicted,
                               const std::vector<int>& fixed_nodes) {
  const int q = mesh.q;
  const int K = mesh.n_elems();
  Eigen::MatrixXd out = predicted;

  std::vector<int> fixed_vertices;
  for (int node : fixed_nodes) {
    if (node % q != 0)
      throw SetupError("fixed node is not an element vertex");
    if (mesh.periodic && node == K * q) continue;  // seam alias of vertex 0
    fixed_vertices.push_back(node / q);
  }
  std::sort(fixed_vertices.begin(), fixed_vertices.end());
  fixed_vertices.erase(
      std::unique(fixed_vertices.begin(), fixed_vertices.end()),
      fixed_vertices.end());

  auto place_interior = [&](int e) {
    const double xl = out(mesh.connectivity(e, 0), 0);
    const double xr = out(mesh.connectivity(e, q), 0);
    for (int l = 1; l < q; ++l)
      out(mesh.connectivity(e, l), 0) =
          xl + 0.5 * (shape.nodes(l, 0) + 1.0) * (xr - xl);
  };

  if (!mesh.periodic) {
    fixed_vertices.push_back(0);
    fixed_vertices.push_back(K);
    std::sort(fixed_vertices.begin(), fixed_vertices.end());
    fixed_vertices.erase(
        std::unique(fixed_vertices.begin(), fixed_vertices.end()),
        fixed_vertices.end());
    for (size_t f = 0; f + 1 < fixed_vertices.size(); ++f) {
      const int i1 = fixed_vertices[f], i2 = fixed_vertices[f + 1];
      const double a = out(i1 * q, 0), b = out(i2 * q, 0);
      if (!(b > a))
        throw UntanglingFailureError("fixed nodes out of order", i1);
      const double h = (b - a) / (i2 - i1);
      for (int s = 1; s < i2 - i1; ++s) out((i1 + s) * q, 0) = a + s * h;
    }
  } else {
    const double L = mesh.period;
    if (fixed_vertices.empty()) fixed_vertices.push_back(0);
    // Work on the periodic cover starting at the first fixed vertex; store
    // back with the appropriate period shift to keep coordinates monotone.
    const int j0 = fixed_vertices.front();
    const int nf = static_cast<int>(fixed_vertices.size());
    auto cover_coord_of_fixed = [&](int idx) {
      const int v = fixed_vertices[idx % nf];
      return out(v * q, 0) + L * (idx / nf);
    };
    for (int f = 0; f < nf; ++f) {
      const int w1 = fixed_vertices[f];
      const int w2 =
          (f + 1 < nf) ? fixed_vertices[f + 1] : fixed_vertices[0] + K;
      const double a = cover_coord_of_fixed(f);
      const double b = cover_coord_of_fixed(f + 1);
      if (!(b > a))
        throw UntanglingFailureError("fixed nodes out of order on ring", w1);
      const int nseg = w2 - w1;
      const double h = b == a ? 0.0 : (b - a) / nseg;
      for (int s = 1; s < nseg; ++s) {
        const int w = w1 + s;
        const double c = a + s * h;
        if (w <= K - 1)
          out(w * q, 0) = c;
        else
          out((w - K) * q, 0) = c - L;
      }
    }
    (void)j0;
    out(K * q, 0) = out(0, 0) + L;
  }

  for (int e = 0; e < K; ++e) place_interior(e);
  return out;
}

// Regularized distortion of one 2D element and its gradient with respect to
// the element's node coordinates, via forward-mode duals.
template <int NS>
double element_metric_grad_2d(const MovingMesh& mesh,
                              const ReferenceElement& shape,
                              const Eigen::MatrixXd& coords, int elem,
                              double delta, Eigen::MatrixXd* grad) {
  using D = Dual<NS>;
  const int nn = mesh.nodes_per_elem();
  const RefFrame fr = reference_frame(mesh, shape, elem);
  D xy[NS];
  for (int a = 0; a < nn; ++a)
    for (int k = 0; k < 2; ++k)
      xy[a * 2 + k] =
          D::seed(coords(mesh.connectivity(elem, a), k), a * 2 + k);

  D total(0.0);
  for (int p = 0; p < shape.n_quad(); ++p) {
    D Gl[4] = {D(0.0), D(0.0), D(0.0), D(0.0)};
    for (int a = 0; a < nn; ++a)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          Gl[k + 2 * l] += xy[a * 2 + k] * shape.basis_grads[l](p, a);
    // G = Gl * Jinv
    D G[4];
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        G[k + 2 * l] = Gl[k + 2 * 0] * fr.Jinv(0, l) + Gl[k + 2 * 1] * fr.Jinv(1, l);
    D det = G[0] * G[3] - G[2] * G[1];
    D dreg = 0.5 * (det + sqrt(det * det + 4.0 * delta * delta));
    D fro2 = G[0] * G[0] + G[1] * G[1] + G[2] * G[2] + G[3] * G[3];
    D r = fro2 / (2.0 * dreg);
    total += (shape.quad_weights[p] * std::abs(fr.det)) * r * r;
  }
  if (grad) {
    grad->setZero(nn, 2);
    for (int a = 0; a < nn; ++a)
      for (int k = 0; k < 2; ++k) (*grad)(a, k) = total.d[a * 2 + k];
  }
  return total.v;
}

Eigen::MatrixXd smooth_mesh_2d(const MovingMesh& mesh,
                               const ReferenceElement& shape,
                               const Eigen::MatrixXd& predicted,
                               const std::vector<int>& fixed_nodes) {
  const int nn = mesh.nodes_per_elem();
  if (nn * 2 > 12) throw SetupError("smooth_mesh: mapping degree too high");
  Eigen::MatrixXd out = predicted;
  std::vector<bool> fixed(mesh.n_nodes(), false);
  for (int node : fixed_nodes) fixed[node] = true;

  std::vector<double> delta_e(mesh.n_elems());
  double min_h = std::numeric_limits<double>::infinity();
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const RefFrame fr = reference_frame(mesh, shape, e);
    const double vol = std::abs(fr.det) * simplex_local_measure(2);
    delta_e[e] = 1e-3 * vol;
    min_h = std::min(min_h, std::sqrt(vol));
  }

  auto total_metric = [&](const Eigen::MatrixXd& c, Eigen::MatrixXd* grad) {
    if (grad) grad->setZero(mesh.n_nodes(), 2);
    double f = 0.0;
    Eigen::MatrixXd eg;
    for (int e = 0; e < mesh.n_elems(); ++e) {
      f += element_metric_grad_2d<12>(mesh, shape, c, e, delta_e[e],
                                      grad ? &eg : nullptr);
      if (grad)
        for (int a = 0; a < nn; ++a)
          grad->row(mesh.connectivity(e, a)) += eg.row(a);
    }
    if (grad)
      for (int node = 0; node < mesh.n_nodes(); ++node)
        if (fixed[node]) grad->row(node).setZero();
    return f;
  };

  double f = total_metric(out, nullptr);
  Eigen::MatrixXd grad;
  for (int iter = 0; iter < 200; ++iter) {
    total_metric(out, &grad);
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (gmax == 0.0) break;
    double alpha = 0.2 * min_h / gmax;
    double fnew = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd trial;
    while (alpha > 1e-16) {
      trial = out - alpha * grad;
      fnew = total_metric(trial, nullptr);
      if (fnew < f) break;
      alpha *= 0.5;
    }
    if (!(fnew < f)) break;
    out = trial;
    const double rel = (f - fnew) / std::max(std::abs(f), 1e-300);
    f = fnew;
    if (rel < 1e-8) break;
  }

  const ValidityReport rep = check_validity(mesh, shape, out);
  if (!rep.valid)
    throw UntanglingFailureError("smoothing failed to untangle",
                                 rep.worst_element);
  return out;
}

}  // namespace

Eigen::MatrixXd smooth_mesh(const MovingMesh& mesh,
                            const ReferenceElement& shape,
                            const Eigen::MatrixXd& predicted,
                            const std::vector<int>& fixed_nodes) {
  if (mesh.dim == 1) return smooth_mesh_1d(mesh, shape, predicted, fixed_nodes);
  return smooth_mesh_2d(mesh, shape, predicted, fixed_nodes);
}

void write_mesh(std::ostream& os, const MovingMesh& mesh) {
  os.precision(17);
  os << "dim " << mesh.dim << " q " << mesh.q << "\n";
  os << "nodes " << mesh.n_nodes() << "\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    for (int k = 0; k < mesh.dim; ++k)
      os << (k ? " " : "") << mesh.ref_coords(i, k);
    os << "\n";
  }
  os << "elements " << mesh.n_elems() << "\n";
  for (int e = 0; e < mesh.n_elems(); ++e) {
    for (int a = 0; a < mesh.nodes_per_elem(); ++a)
      os << (a ? " " : "") << mesh.connectivity(e, a);
    os << "\n";
  }
  os << "boundary " << mesh.left_node << " " << mesh.right_node << "\n";
  os << "periodic " << (mesh.periodic ? 1 : 0) << " " << mesh.period << "\n";
  os << "shock " << mesh.shock_nodes.size() << "\n";
  for (size_t i = 0; i < mesh.shock_nodes.size(); ++i)
    os << (i ? " " : "") << mesh.shock_nodes[i];
  os << "\n";
}

MovingMesh read_mesh(std::istream& is) {
  MovingMesh mesh;
  std::string tag;
  int n;
  is >> tag >> mesh.dim >> tag >> mesh.q;
  is >> tag >> n;
  mesh.ref_coords.resize(n, mesh.dim);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < mesh.dim; ++k) is >> mesh.ref_coords(i, k);
  is >> tag >> n;
  const int nn = mesh.dim == 1
                     ? mesh.q + 1
                     : (mesh.q + 1) * (mesh.q + 2) / 2;
  mesh.connectivity.resize(n, nn);
  for (int e = 0; e < n; ++e)
    for (int a = 0; a < nn; ++a) is >> mesh.connectivity(e, a);
  is >> tag >> mesh.left_node >> mesh.right_node;
  int per;
  is >> tag >> per >> mesh.period;
  mesh.periodic = per != 0;
  is >> tag >> n;
  mesh.shock_nodes.resize(n);
  for (int i = 0; i < n; ++i) is >> mesh.shock_nodes[i];
  if (!is) throw SetupError("malformed mesh file");
  return mesh;
}

void write_mesh_file(const std::string& path, const MovingMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw SetupError("cannot open mesh file for writing: " + path);
  write_mesh(os, mesh);
}

MovingMesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SetupError("cannot open mesh file: " + path);
  return read_mesh(is);
}

}  // namespace moltrack
