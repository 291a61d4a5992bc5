// Projection frames for the parabolic and conic changes of variables, the
// cone rotation/reparametrization, sphere quadrature, and the X-ray
// transform identity checker.
#pragma once

#include <functional>
#include <vector>

#include "fraclab/small_linalg.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab::geometry {

// A rank-n map R^{n+1} -> R^n together with its lower-triangular/coisometry
// factorization and unit kernel vector:  pi = L * Q,  pi * kernel = 0.
struct ProjectionFrame {
  Mat pi;      // n x (n+1)
  Mat lower;   // n x n, lower triangular, positive diagonal
  Mat q;       // n x (n+1), orthonormal rows
  Vec kernel;  // unit vector spanning ker(pi)
  double lambda = 0.0;  // cone frames only
  Vec theta;            // parameter record
  bool in_domain = true;  // cone frames: lambda >= 1 + |theta|/sqrt(2)
};

struct FrameResiduals {
  double factorization = 0.0;  // ||pi - L Q||_max
  double orthonormality = 0.0; // ||Q Q^T - I||_max
  double kernel = 0.0;         // |pi(kernel)|_inf
  double kernel_norm = 0.0;    // | |kernel| - 1 |
};

FrameResiduals frame_residuals(const ProjectionFrame& f);

// pi_theta = [ I_n | -2 theta ], kernel (2 theta, 1)/sqrt(4|theta|^2 + 1).
ProjectionFrame parabolic_frame(const Vec& theta);

// T_theta(x,t) = (x - 2 t theta, t); written so that applying the frame
// matrix of parabolic_frame agrees bit-for-bit with the sheared x.
spectral::SpaceTimePoint galilean_shear(const Vec& theta, const spectral::SpaceTimePoint& p);

// D_{1/lambda}(x,t) = (x, t/lambda), lambda >= 1.
spectral::SpaceTimePoint parabolic_dilation(double lambda, const spectral::SpaceTimePoint& p);

// G(theta) = (2 theta, 1)/sqrt(4|theta|^2+1): chart of the upper hemisphere.
Vec paraboloid_chart(const Vec& theta);

// F(x, x_{d}) = x / (2 x_d), the inverse chart; x_d > 0 required.
Vec paraboloid_chart_inverse(const Vec& point);

// eta_1 = (xi_1 + xi_{n+1})/sqrt(2), eta_{n+1} = (-xi_1 + xi_{n+1})/sqrt(2),
// middle coordinates fixed.
Vec cone_rotation(const Vec& xi);
Vec cone_rotation_inverse(const Vec& eta);

// J = (1/sqrt(2)) (1 + |eta'|^2/(2 eta_1^2)), in [1/sqrt(2), sqrt(2)] on the
// admissible region eta_1 >= |eta'|/sqrt(2).
double cone_jacobian(double eta1, const Vec& eta_prime);

// The projected cone transport as an explicit n x (n+1) matrix; theta has
// dimension n-1 and lambda must be nonzero.
ProjectionFrame cone_frame(int n, double lambda, const Vec& theta);

// Full space-time transport T_{lambda,theta} on R^{n+1} (linear).
Mat cone_transport(int n, double lambda, const Vec& theta);

// Atom-level reparametrization f -> f_{lambda,theta}: nodes move through the
// rotated coordinates, weights and values carry the Jacobian bookkeeping so
// that Ef(x,t) = Ef_{lambda,theta}(T_{lambda,theta}(x,t)) holds term by term.
spectral::ConeAtomFunction cone_reparam(const spectral::ConeAtomFunction& f, double lambda,
                                        const Vec& theta);

// Smallest singular value of the central-difference Jacobian of
// (theta, lambda) -> G(theta, lambda); positive where the chart is a local
// diffeomorphism.
double cone_chart_min_singular(int n, double lambda, const Vec& theta, double h = 1e-5);

struct SphereQuadrature {
  int m = 1;  // sphere S^m
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

// S^1: uniform angles; S^2: Gauss-Legendre in the polar cosine x uniform
// azimuth. Exact for spherical polynomials of degree <= order.
SphereQuadrature sphere_quadrature(int m, int order);

// Orthonormal basis of the complement of the unit vector v, as rows.
Mat basis_of_complement(const Vec& v);

struct SolmonResult {
  double lhs = 0.0;           // int_{S^{d-1}} int_{v^perp} |x| f dH^{d-1} dv
  double rhs_integral = 0.0;  // int_{R^d} f
  double constant = 0.0;      // lhs / rhs
};

struct LineQuadSpec {
  int order = 48;
  double half_width = 8.0;  // integration window per hyperplane coordinate
};

// Empirical constant of the X-ray transform identity for a rapidly decaying
// test density on R^d, d in {2,3}.
SolmonResult solmon_check(const std::function<double(const Vec&)>& density, int d,
                          const SphereQuadrature& sphere, const LineQuadSpec& line);

}  // namespace fraclab::geometry
