#include "fraclab/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "quadrature.hpp"

namespace fraclab::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return e;
}

// Factor pi = L Q via the QR decomposition of pi^T, signs normalized so the
// diagonal of L is positive.
void factor_frame(ProjectionFrame& f) {
  const int n = f.pi.rows;
  Eigen::MatrixXd pt = to_eigen(f.pi).transpose();  // (n+1) x n
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(pt);
  Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(n + 1, n);
  Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) *= -1.0;
      thin_q.col(i) *= -1.0;
    }
  }
  f.lower = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f.lower(i, j) = r(j, i);  // L = R^T
  f.q = Mat(n, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n + 1; ++j) f.q(i, j) = thin_q(j, i);  // Q = thin_q^T
}

}  // namespace

FrameResiduals frame_residuals(const ProjectionFrame& f) {
  FrameResiduals r;
  r.factorization = max_abs_diff(f.pi, matmul(f.lower, f.q));
  Mat qqt(f.q.rows, f.q.rows);
  for (int i = 0; i < f.q.rows; ++i)
    for (int j = 0; j < f.q.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < f.q.cols; ++k) s += f.q(i, k) * f.q(j, k);
      qqt(i, j) = s;
    }
  r.orthonormality = max_abs_diff(qqt, Mat::identity(f.q.rows));
  Vec pg = apply(f.pi, f.kernel);
  for (int i = 0; i < pg.dim; ++i) r.kernel = std::max(r.kernel, std::abs(pg[i]));
  r.kernel_norm = std::abs(norm(f.kernel) - 1.0);
  return r;
}

ProjectionFrame parabolic_frame(const Vec& theta) {
  if (!all_finite(theta)) throw std::invalid_argument("parabolic_frame: non-finite theta");
  const int n = theta.dim;
  ProjectionFrame f;
  f.theta = theta;
  f.pi = Mat(n, n + 1);
  for (int i = 0; i < n; ++i) {
    f.pi(i, i) = 1.0;
    f.pi(i, n) = -2.0 * theta[i];
  }
  f.kernel = Vec(n + 1);
  const double c = 1.0 / std::sqrt(4.0 * norm2(theta) + 1.0);
  for (int i = 0; i < n; ++i) f.kernel[i] = 2.0 * theta[i] * c;
  f.kernel[n] = c;
  factor_frame(f);
  return f;
}

spectral::SpaceTimePoint galilean_shear(const Vec& theta, const spectral::SpaceTimePoint& p) {
  spectral::SpaceTimePoint out = p;
  for (int i = 0; i < theta.dim; ++i) out.x[i] = p.x[i] + (-2.0 * theta[i]) * p.t;
  return out;
}

spectral::SpaceTimePoint parabolic_dilation(double lambda, const spectral::SpaceTimePoint& p) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("parabolic_dilation: lambda must be >= 1");
  return {p.x, p.t / lambda};
}

Vec paraboloid_chart(const Vec& theta) {
  Vec g(theta.dim + 1);
  const double c = 1.0 / std::sqrt(4.0 * norm2(theta) + 1.0);
  for (int i = 0; i < theta.dim; ++i) g[i] = 2.0 * theta[i] * c;
  g[theta.dim] = c;
  return g;
}

Vec paraboloid_chart_inverse(const Vec& point) {
  const int d = point.dim;
  if (d < 2) throw std::invalid_argument("paraboloid_chart_inverse: point must live in R^{n+1}");
  if (!(point[d - 1] > 0.0))
    throw std::invalid_argument("paraboloid_chart_inverse: last coordinate must be positive");
  Vec theta(d - 1);
  for (int i = 0; i < d - 1; ++i) theta[i] = point[i] / (2.0 * point[d - 1]);
  return theta;
}

Vec cone_rotation(const Vec& xi) {
  const int d = xi.dim;
  if (d < 2) throw std::invalid_argument("cone_rotation: needs dimension >= 2");
  Vec eta = xi;
  eta[0] = (xi[0] + xi[d - 1]) / kSqrt2;
  eta[d - 1] = (-xi[0] + xi[d - 1]) / kSqrt2;
  return eta;
}

Vec cone_rotation_inverse(const Vec& eta) {
  const int d = eta.dim;
  if (d < 2) throw std::invalid_argument("cone_rotation_inverse: needs dimension >= 2");
  Vec xi = eta;
  xi[0] = (eta[0] - eta[d - 1]) / kSqrt2;
  xi[d - 1] = (eta[0] + eta[d - 1]) / kSqrt2;
  return xi;
}

double cone_jacobian(double eta1, const Vec& eta_prime) {
  const double p2 = norm2(eta_prime);
  if (!(eta1 > 0.0) || eta1 * kSqrt2 < std::sqrt(p2) * (1.0 - 1e-12))
    throw std::invalid_argument("cone_jacobian: need eta_1 >= |eta'|/sqrt(2)");
  return (1.0 / kSqrt2) * (1.0 + p2 / (2.0 * eta1 * eta1));
}

ProjectionFrame cone_frame(int n, double lambda, const Vec& theta) {
  if (n < 1 || theta.dim != n - 1) throw std::invalid_argument("cone_frame: theta must have dim n-1");
  if (lambda == 0.0) throw std::invalid_argument("cone_frame: lambda must be nonzero");
  const double t2 = norm2(theta);
  ProjectionFrame f;
  f.lambda = lambda;
  f.theta = theta;
  f.in_domain = lambda >= 1.0 + std::sqrt(t2) / kSqrt2;

  f.pi = Mat(n, n + 1);
  f.pi(0, 0) = 0.5 * (lambda + 1.0 / lambda) - t2 / (4.0 * lambda);
  for (int j = 0; j < n - 1; ++j) f.pi(0, 1 + j) = theta[j] / (lambda * kSqrt2);
  f.pi(0, n) = -0.5 * (lambda - 1.0 / lambda) + t2 / (4.0 * lambda);
  for (int i = 1; i < n; ++i) {
    f.pi(i, 0) = -theta[i - 1] / kSqrt2;
    f.pi(i, i) = 1.0;
    f.pi(i, n) = theta[i - 1] / kSqrt2;
  }

  // kernel formula, sign as written
  f.kernel = Vec(n + 1);
  const double a = 0.5 - t2 / 4.0 - lambda * lambda / 2.0;
  const double b = -0.5 - t2 / 4.0 - lambda * lambda / 2.0;
  double nrm2 = a * a + t2 / 2.0 + b * b;
  const double c = 1.0 / std::sqrt(nrm2);
  f.kernel[0] = a * c;
  for (int j = 0; j < n - 1; ++j) f.kernel[1 + j] = theta[j] / kSqrt2 * c;
  f.kernel[n] = b * c;

  factor_frame(f);
  return f;
}

Mat cone_transport(int n, double lambda, const Vec& theta) {
  if (n < 1 || theta.dim != n - 1)
    throw std::invalid_argument("cone_transport: theta must have dim n-1");
  if (lambda == 0.0) throw std::invalid_argument("cone_transport: lambda must be nonzero");
  const double t2 = norm2(theta);
  Mat T(n + 1, n + 1);
  // first row = first row of the projected frame
  T(0, 0) = 0.5 * (lambda + 1.0 / lambda) - t2 / (4.0 * lambda);
  for (int j = 0; j < n - 1; ++j) T(0, 1 + j) = theta[j] / (lambda * kSqrt2);
  T(0, n) = -0.5 * (lambda - 1.0 / lambda) + t2 / (4.0 * lambda);
  for (int i = 1; i < n; ++i) {
    T(i, 0) = -theta[i - 1] / kSqrt2;
    T(i, i) = 1.0;
    T(i, n) = theta[i - 1] / kSqrt2;
  }
  T(n, 0) = -0.5 * (lambda - 1.0 / lambda) - t2 / (4.0 * lambda);
  for (int j = 0; j < n - 1; ++j) T(n, 1 + j) = theta[j] / (lambda * kSqrt2);
  T(n, n) = 0.5 * (lambda + 1.0 / lambda) + t2 / (4.0 * lambda);
  return T;
}

spectral::ConeAtomFunction cone_reparam(const spectral::ConeAtomFunction& f, double lambda,
                                        const Vec& theta) {
  const int n = f.dim();
  if (theta.dim != n - 1) throw std::invalid_argument("cone_reparam: theta must have dim n-1");
  if (!(lambda >= 1.0 + norm(theta) / kSqrt2))
    throw std::invalid_argument("cone_reparam: (lambda, theta) outside the admissible domain");

  std::vector<spectral::Atom> atoms;
  atoms.reserve(f.atoms().size());
  double r_lo = std::numeric_limits<double>::infinity(), r_hi = 0.0;
  for (const spectral::Atom& a : f.atoms()) {
    // lift, rotate
    Vec lift(n + 1);
    for (int k = 0; k < n; ++k) lift[k] = a.node[k];
    lift[n] = norm(a.node);
    Vec eta = cone_rotation(lift);
    const double eta1 = eta[0];
    Vec eta_prime(n - 1);
    for (int k = 0; k < n - 1; ++k) eta_prime[k] = eta[1 + k];
    const double jac_in = cone_jacobian(eta1, eta_prime);

    // (eta1, eta') -> (lambda eta1, eta' - theta eta1)
    const double eta1_new = lambda * eta1;
    Vec eta_prime_new = eta_prime;
    for (int k = 0; k < n - 1; ++k) eta_prime_new[k] -= theta[k] * eta1;
    const double jac_out = cone_jacobian(eta1_new, eta_prime_new);

    // back to cone coordinates
    Vec eta_new(n + 1);
    eta_new[0] = eta1_new;
    for (int k = 0; k < n - 1; ++k) eta_new[1 + k] = eta_prime_new[k];
    eta_new[n] = norm2(eta_prime_new) / (2.0 * eta1_new);
    Vec lift_new = cone_rotation_inverse(eta_new);
    Vec node_new(n);
    for (int k = 0; k < n; ++k) node_new[k] = lift_new[k];

    spectral::Atom out;
    out.node = node_new;
    out.weight = a.weight * jac_out * lambda / jac_in;
    out.value = a.value * jac_in / (lambda * jac_out);
    atoms.push_back(out);
    const double r = norm(node_new);
    r_lo = std::min(r_lo, r);
    r_hi = std::max(r_hi, r);
  }
  return spectral::ConeAtomFunction::with_relaxed_annulus(n, std::move(atoms), r_lo, r_hi);
}

double cone_chart_min_singular(int n, double lambda, const Vec& theta, double h) {
  auto chart = [&](double lam, const Vec& th) { return cone_frame(n, lam, th).kernel; };
  Eigen::MatrixXd jac(n + 1, n);
  for (int p = 0; p < n; ++p) {
    Vec th_hi = theta, th_lo = theta;
    double lam_hi = lambda, lam_lo = lambda;
    if (p < n - 1) {
      th_hi[p] += h;
      th_lo[p] -= h;
    } else {
      lam_hi += h;
      lam_lo -= h;
    }
    Vec g_hi = chart(lam_hi, th_hi), g_lo = chart(lam_lo, th_lo);
    for (int i = 0; i <= n; ++i) jac(i, p) = (g_hi[i] - g_lo[i]) / (2.0 * h);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  return svd.singularValues().minCoeff();
}

SphereQuadrature sphere_quadrature(int m, int order) {
  if (order < 4) throw std::invalid_argument("sphere_quadrature: order must be >= 4");
  SphereQuadrature q;
  q.m = m;
  if (m == 1) {
    const int n = 2 * (order + 1);
    for (int j = 0; j < n; ++j) {
      const double phi = kTwoPi * (j + 0.5) / n;
      q.nodes.push_back(Vec{std::cos(phi), std::sin(phi)});
      q.weights.push_back(kTwoPi / n);
    }
    return q;
  }
  if (m == 2) {
    const int n_u = order + 1;
    const int n_phi = 2 * (order + 1);
    const auto gl = quadrature::gauss_legendre(n_u);
    for (int i = 0; i < n_u; ++i) {
      const double u = gl.nodes[static_cast<size_t>(i)];
      const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int j = 0; j < n_phi; ++j) {
        const double phi = kTwoPi * (j + 0.5) / n_phi;
        q.nodes.push_back(Vec{su * std::cos(phi), su * std::sin(phi), u});
        q.weights.push_back(gl.weights[static_cast<size_t>(i)] * kTwoPi / n_phi);
      }
    }
    return q;
  }
  throw std::invalid_argument("sphere_quadrature: only S^1 and S^2 are supported");
}

Mat basis_of_complement(const Vec& v) {
  const int d = v.dim;
  const double nv = norm(v);
  if (!(std::abs(nv - 1.0) < 1e-10))
    throw std::invalid_argument("basis_of_complement: v must be a unit vector");
  // Householder reflection sending v to +-e_d; its first d-1 images of the
  // coordinate vectors form an orthonormal basis of the complement.
  Vec u = v;
  u[d - 1] += (v[d - 1] >= 0.0 ? 1.0 : -1.0);
  const double u2 = norm2(u);
  Mat b(d - 1, d);
  for (int i = 0; i < d - 1; ++i) {
    for (int j = 0; j < d; ++j) {
      const double h = (i == j ? 1.0 : 0.0) - 2.0 * u[j] * u[i] / u2;
      b(i, j) = h;
    }
  }
  return b;
}

SolmonResult solmon_check(const std::function<double(const Vec&)>& density, int d,
                          const SphereQuadrature& sphere, const LineQuadSpec& line) {
  if (d != 2 && d != 3) throw std::invalid_argument("solmon_check: d must be 2 or 3");
  if (sphere.m != d - 1) throw std::invalid_argument("solmon_check: sphere dimension mismatch");
  if (!(line.half_width > 0.0) || line.order < 4)
    throw std::invalid_argument("solmon_check: bad line quadrature spec");

  const auto gl = quadrature::rescale(quadrature::gauss_legendre(line.order), -line.half_width,
                                      line.half_width);
  // The weight |x| has a kink at the hyperplane origin, so the plane integral
  // is done in radial form where the integrand is smooth.
  const auto radial =
      quadrature::rescale(quadrature::gauss_legendre(line.order), 0.0, line.half_width);
  SolmonResult out;
  for (size_t k = 0; k < sphere.nodes.size(); ++k) {
    const Mat b = basis_of_complement(sphere.nodes[k]);
    double plane = 0.0;
    if (d == 2) {
      // two half-lines: int_0^inf r (f(r b) + f(-r b)) dr
      for (size_t i = 0; i < radial.nodes.size(); ++i) {
        const double r = radial.nodes[i];
        Vec xp{r * b(0, 0), r * b(0, 1)};
        Vec xm{-r * b(0, 0), -r * b(0, 1)};
        plane += radial.weights[i] * r * (density(xp) + density(xm));
      }
    } else {
      // polar in the plane: int |x| f dH^2 = int_0^{2pi} int_0^inf r^2 f dr dphi
      const int n_phi = std::max(32, line.order);
      for (int j = 0; j < n_phi; ++j) {
        const double phi = kTwoPi * (j + 0.5) / n_phi;
        const double c1 = std::cos(phi), c2 = std::sin(phi);
        double ray = 0.0;
        for (size_t i = 0; i < radial.nodes.size(); ++i) {
          const double r = radial.nodes[i];
          Vec x(3);
          for (int c = 0; c < 3; ++c) x[c] = r * (c1 * b(0, c) + c2 * b(1, c));
          ray += radial.weights[i] * r * r * density(x);
        }
        plane += ray * kTwoPi / n_phi;
      }
    }
    out.lhs += sphere.weights[k] * plane;
  }

  // full-space integral on the same tensor window
  if (d == 2) {
    for (size_t i = 0; i < gl.nodes.size(); ++i)
      for (size_t j = 0; j < gl.nodes.size(); ++j) {
        Vec x{gl.nodes[i], gl.nodes[j]};
        out.rhs_integral += gl.weights[i] * gl.weights[j] * density(x);
      }
  } else {
    for (size_t i = 0; i < gl.nodes.size(); ++i)
      for (size_t j = 0; j < gl.nodes.size(); ++j)
        for (size_t k2 = 0; k2 < gl.nodes.size(); ++k2) {
          Vec x{gl.nodes[i], gl.nodes[j], gl.nodes[k2]};
          out.rhs_integral += gl.weights[i] * gl.weights[j] * gl.weights[k2] * density(x);
        }
  }
  if (out.rhs_integral == 0.0) throw std::invalid_argument("solmon_check: density integrates to zero");
  out.constant = out.lhs / out.rhs_integral;
  return out;
}

}  // namespace fraclab::geometry
