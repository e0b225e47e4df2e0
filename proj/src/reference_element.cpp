#include "moltrack/reference_element.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace moltrack {

namespace {

// Golub-Welsch on the symmetric Jacobi matrix of the weight
// (1-x)^a (1+x)^b.
void golub_welsch_jacobi(int n, double a, double b, Eigen::VectorXd& pts,
                         Eigen::VectorXd& wts) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) *
                     std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);
  for (int k = 0; k < n; ++k) {
    double alpha;
    if (k == 0) {
      alpha = (b - a) / (a + b + 2.0);
    } else {
      const double h = 2.0 * k + a + b;
      alpha = (b * b - a * a) / (h * (h + 2.0));
    }
    J(k, k) = alpha;
    if (k >= 1) {
      const double h = 2.0 * k + a + b;
      const double beta = 4.0 * k * (k + a) * (k + b) * (k + a + b) /
                          (h * h * (h + 1.0) * (h - 1.0));
      J(k, k - 1) = J(k - 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  pts = es.eigenvalues();
  wts.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    wts[i] = mu0 * v0 * v0;
  }
}

// Orthonormal Jacobi polynomial values P~_0..P~_n at x.
Eigen::VectorXd jacobi_p_all(double x, double a, double b, int n) {
  Eigen::VectorXd p(n + 1);
  const double gamma0 = std::pow(2.0, a + b + 1.0) / (a + b + 1.0) *
                        std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                        std::tgamma(a + b + 1.0);
  p[0] = 1.0 / std::sqrt(gamma0);
  if (n == 0) return p;
  const double gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
  p[1] = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / std::sqrt(gamma1);
  double aold = 2.0 / (2.0 + a + b) *
                std::sqrt((a + 1.0) * (b + 1.0) / (a + b + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + a + b;
    const double anew =
        2.0 / (h1 + 2.0) *
        std::sqrt((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) *
                  (i + 1.0 + b) / ((h1 + 1.0) * (h1 + 3.0)));
    const double bnew = -(a * a - b * b) / (h1 * (h1 + 2.0));
    p[i + 1] = ((x - bnew) * p[i] - aold * p[i - 1]) / anew;
    aold = anew;
  }
  return p;
}

double jacobi_p(double x, double a, double b, int n) {
  return jacobi_p_all(x, a, b, n)[n];
}

double grad_jacobi_p(double x, double a, double b, int n) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + a + b + 1.0)) * jacobi_p(x, a + 1.0, b + 1.0, n - 1);
}

// Dubiner mode (i,j) and its (r,s) gradient on the reference simplex.
void simplex_mode_2d(double r, double s, int i, int j, double& val,
                     double& dr, double& ds) {
  // Collapsed coordinates; the a-limit at s = 1 is taken as -1.
  const double b = s;
  const double a = (std::abs(1.0 - s) > 1e-14) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0
                                               : -1.0;
  const double fa = jacobi_p(a, 0.0, 0.0, i);
  const double dfa = grad_jacobi_p(a, 0.0, 0.0, i);
  const double gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
  const double dgb = grad_jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
  const double half1mb = 0.5 * (1.0 - b);

  double pow_i = 1.0, pow_im1 = 1.0;
  if (i > 0) {
    pow_im1 = std::pow(half1mb, i - 1);
    pow_i = pow_im1 * half1mb;
  }
  val = std::sqrt(2.0) * fa * gb * std::pow(1.0 - b, i);

  dr = dfa * gb;
  if (i > 0) dr *= pow_im1;
  ds = dfa * (0.5 * (1.0 + a)) * gb;
  if (i > 0) ds *= pow_im1;
  double tmp = dgb * pow_i;
  if (i > 0) tmp -= 0.5 * i * gb * pow_im1;
  ds += fa * tmp;
  const double scale = std::pow(2.0, i + 0.5);
  dr *= scale;
  ds *= scale;
}

// Modal basis values (and optional gradients) at a set of points.
void modal_basis(int dim, int degree, const Eigen::MatrixXd& pts,
                 Eigen::MatrixXd& vals, std::vector<Eigen::MatrixXd>* grads) {
  const int npts = static_cast<int>(pts.rows());
  if (dim == 1) {
    const int nm = degree + 1;
    vals.resize(npts, nm);
    if (grads) {
      grads->assign(1, Eigen::MatrixXd(npts, nm));
    }
    for (int q = 0; q < npts; ++q) {
      for (int k = 0; k <= degree; ++k) {
        vals(q, k) = jacobi_p(pts(q, 0), 0.0, 0.0, k);
        if (grads) (*grads)[0](q, k) = grad_jacobi_p(pts(q, 0), 0.0, 0.0, k);
      }
    }
  } else if (dim == 2) {
    const int nm = (degree + 1) * (degree + 2) / 2;
    vals.resize(npts, nm);
    if (grads) grads->assign(2, Eigen::MatrixXd(npts, nm));
    for (int q = 0; q < npts; ++q) {
      int sk = 0;
      for (int i = 0; i <= degree; ++i) {
        for (int j = 0; j <= degree - i; ++j, ++sk) {
          double v, dr, ds;
          simplex_mode_2d(pts(q, 0), pts(q, 1), i, j, v, dr, ds);
          vals(q, sk) = v;
          if (grads) {
            (*grads)[0](q, sk) = dr;
            (*grads)[1](q, sk) = ds;
          }
        }
      }
    }
  } else {
    throw std::invalid_argument("modal_basis: unsupported dimension");
  }
}

// Warp function used by the warp&blend node construction.
Eigen::VectorXd warp_factor(int n, const Eigen::VectorXd& rout) {
  Eigen::VectorXd lgl = lobatto_points(n + 1);
  Eigen::VectorXd req(n + 1);
  for (int i = 0; i <= n; ++i) req[i] = -1.0 + 2.0 * i / n;

  Eigen::MatrixXd veq;
  modal_basis(1, n, req, veq, nullptr);
  Eigen::MatrixXd pmat;
  Eigen::MatrixXd routm(rout.size(), 1);
  routm.col(0) = rout;
  modal_basis(1, n, routm, pmat, nullptr);
  // Lagrange basis (on equidistant nodes) evaluated at rout.
  Eigen::MatrixXd lmat = veq.transpose().fullPivLu().solve(pmat.transpose());

  Eigen::VectorXd warp = lmat.transpose() * (lgl - req);
  for (int i = 0; i < rout.size(); ++i) {
    const bool interior = std::abs(rout[i]) < 1.0 - 1e-10;
    const double sf = 1.0 - (interior ? rout[i] * rout[i] : 0.0);
    warp[i] = interior ? warp[i] / sf : 0.0;
  }
  return warp;
}

Eigen::MatrixXd warp_blend_nodes(int p) {
  static const double alpopt[15] = {0.0000, 0.0000, 1.4152, 0.1001, 0.2751,
                                    0.9800, 1.0999, 1.2832, 1.3648, 1.4773,
                                    1.4959, 1.5743, 1.5770, 1.6223, 1.6258};
  const double alpha = (p < 16) ? alpopt[p - 1] : 5.0 / 3.0;
  const int np = (p + 1) * (p + 2) / 2;

  Eigen::VectorXd l1(np), l2(np), l3(np);
  int sk = 0;
  for (int n = 0; n <= p; ++n) {
    for (int m = 0; m <= p - n; ++m, ++sk) {
      l1[sk] = static_cast<double>(n) / p;
      l3[sk] = static_cast<double>(m) / p;
    }
  }
  l2 = Eigen::VectorXd::Ones(np) - l1 - l3;

  Eigen::VectorXd x = -l2 + l3;
  Eigen::VectorXd y = (-l2 - l3 + 2.0 * l1) / std::sqrt(3.0);

  const Eigen::VectorXd blend1 = 4.0 * l2.cwiseProduct(l3);
  const Eigen::VectorXd blend2 = 4.0 * l1.cwiseProduct(l3);
  const Eigen::VectorXd blend3 = 4.0 * l1.cwiseProduct(l2);

  Eigen::VectorXd warpf1 = warp_factor(p, l3 - l2);
  Eigen::VectorXd warpf2 = warp_factor(p, l1 - l3);
  Eigen::VectorXd warpf3 = warp_factor(p, l2 - l1);

  for (int i = 0; i < np; ++i) {
    const double w1 = blend1[i] * warpf1[i] * (1.0 + std::pow(alpha * l1[i], 2));
    const double w2 = blend2[i] * warpf2[i] * (1.0 + std::pow(alpha * l2[i], 2));
    const double w3 = blend3[i] * warpf3[i] * (1.0 + std::pow(alpha * l3[i], 2));
    x[i] += 1.0 * w1 + std::cos(2.0 * M_PI / 3.0) * w2 + std::cos(4.0 * M_PI / 3.0) * w3;
    y[i] += 0.0 * w1 + std::sin(2.0 * M_PI / 3.0) * w2 + std::sin(4.0 * M_PI / 3.0) * w3;
  }

  // Equilateral (x,y) back to the reference right simplex (r,s).
  Eigen::MatrixXd rs(np, 2);
  for (int i = 0; i < np; ++i) {
    const double L1 = (std::sqrt(3.0) * y[i] + 1.0) / 3.0;
    const double L2 = (-3.0 * x[i] - std::sqrt(3.0) * y[i] + 2.0) / 6.0;
    const double L3 = (3.0 * x[i] - std::sqrt(3.0) * y[i] + 2.0) / 6.0;
    rs(i, 0) = -L2 + L3 - L1;
    rs(i, 1) = -L2 - L3 + L1;
  }
  return rs;
}

}  // namespace

void gauss_legendre(int n, Eigen::VectorXd& pts, Eigen::VectorXd& wts) {
  golub_welsch_jacobi(n, 0.0, 0.0, pts, wts);
}

void gauss_jacobi(int n, double a, double b, Eigen::VectorXd& pts,
                  Eigen::VectorXd& wts) {
  golub_welsch_jacobi(n, a, b, pts, wts);
}

Eigen::VectorXd lobatto_points(int n) {
  if (n < 2) throw std::invalid_argument("lobatto_points: need n >= 2");
  Eigen::VectorXd pts(n);
  pts[0] = -1.0;
  pts[n - 1] = 1.0;
  if (n > 2) {
    Eigen::VectorXd gj, w;
    gauss_jacobi(n - 2, 1.0, 1.0, gj, w);
    pts.segment(1, n - 2) = gj;
  }
  return pts;
}

void legendre_eval(int n, double x, double& p, double& dp) {
  double pkm1 = 1.0, dpkm1 = 0.0;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  double pk = x, dpk = 1.0;
  for (int k = 1; k < n; ++k) {
    const double pkp1 = ((2.0 * k + 1.0) * x * pk - k * pkm1) / (k + 1.0);
    const double dpkp1 = dpkm1 + (2.0 * k + 1.0) * pk;
    pkm1 = pk;
    dpkm1 = dpk;
    pk = pkp1;
    dpk = dpkp1;
  }
  p = pk;
  dp = dpk;
}

Eigen::MatrixXd ReferenceElement::eval_basis(const Eigen::MatrixXd& pts) const {
  Eigen::MatrixXd m;
  modal_basis(dim, degree, pts, m, nullptr);
  return m * vinv;
}

std::vector<Eigen::MatrixXd> ReferenceElement::eval_basis_grad(
    const Eigen::MatrixXd& pts) const {
  Eigen::MatrixXd m;
  std::vector<Eigen::MatrixXd> g;
  modal_basis(dim, degree, pts, m, &g);
  for (auto& gd : g) gd = gd * vinv;
  return g;
}

ReferenceElement build_reference_element(int degree, int dim) {
  if (degree < 1) throw std::invalid_argument("build_reference_element: degree >= 1");
  ReferenceElement re;
  re.dim = dim;
  re.degree = degree;

  if (dim == 1) {
    re.nodes.resize(degree + 1, 1);
    re.nodes.col(0) = lobatto_points(degree + 1);
    Eigen::VectorXd qp, qw;
    gauss_legendre(degree + 3, qp, qw);
    re.quad_points.resize(qp.size(), 1);
    re.quad_points.col(0) = qp;
    re.quad_weights = qw;
  } else if (dim == 2) {
    re.nodes = (degree == 1)
                   ? (Eigen::MatrixXd(3, 2) << -1, -1, 1, -1, -1, 1).finished()
                   : warp_blend_nodes(degree);
    // Collapsed-coordinate rule, exact for total degree 2*degree+3.
    const int n1 = degree + 2;
    Eigen::VectorXd pa, wa, pb, wb;
    gauss_legendre(n1, pa, wa);
    gauss_jacobi(n1, 1.0, 0.0, pb, wb);
    re.quad_points.resize(n1 * n1, 2);
    re.quad_weights.resize(n1 * n1);
    int k = 0;
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n1; ++j, ++k) {
        const double a = pa[i], b = pb[j];
        re.quad_points(k, 0) = 0.5 * (1.0 + a) * (1.0 - b) - 1.0;
        re.quad_points(k, 1) = b;
        re.quad_weights[k] = 0.5 * wa[i] * wb[j];
      }
    }
  } else {
    throw std::invalid_argument("build_reference_element: unsupported (p, d)");
  }

  Eigen::MatrixXd v;
  modal_basis(dim, degree, re.nodes, v, nullptr);
  re.vinv = v.fullPivLu().inverse();

  re.basis_vals = re.eval_basis(re.quad_points);
  re.basis_grads = re.eval_basis_grad(re.quad_points);

  if (dim == 1) {
    Eigen::MatrixXd ends(2, 1);
    ends << -1.0, 1.0;
    re.face_vals = re.eval_basis(ends);
    re.face_grads = re.eval_basis_grad(ends)[0];
  }
  return re;
}

}  // namespace moltrack
