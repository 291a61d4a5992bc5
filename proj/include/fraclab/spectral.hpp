// Band-limited initial data as frequency atoms, and the dispersive
// evolutions / maximal functions / norms evaluated from them.
//
// Transform convention, fixed project-wide:
//   * forward transform  f^(xi) = integral e^{-i<x,xi>} f(x) dx  (no 2*pi in
//     the exponent),
//   * Schroedinger evolution carries the prefactor (2*pi)^{-n/2}:
//       u(x,t) = (2*pi)^{-n/2} * sum_j w_j a_j exp(i(<x,xi_j> + (t/rho)|xi_j|^2)),
//   * the cone extension carries no prefactor; any absorbed constant lives in
//     the atom weights:
//       Ef(x,t) = sum_j w_j a_j exp(i(<x,xi_j> + t|xi_j|)).
// Under this (unitary-style) convention the L^2 norm of the data equals the
// L^2 norm of its transform, so the conversion constant between l2_norm and
// h_s_norm at s = 0 is exactly 1.
#pragma once

#include <complex>
#include <vector>

#include "fraclab/small_linalg.hpp"

namespace fraclab::spectral {

using Complex = std::complex<double>;

struct Atom {
  Vec node;        // xi_j in R^n
  double weight;   // w_j > 0 (quadrature mass)
  Complex value;   // a_j
};

// Quadrature discretization of a band-limited function's transform.
// Invariants: |xi_j| <= band_radius, weights finite and > 0, nodes pairwise
// distinct, at least one atom.
class FrequencyAtomFunction {
 public:
  FrequencyAtomFunction(int dim, std::vector<Atom> atoms, double band_radius);

  int dim() const { return dim_; }
  double band_radius() const { return band_radius_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double max_node_norm2() const { return max_node_norm2_; }

 private:
  int dim_;
  std::vector<Atom> atoms_;
  double band_radius_;
  double max_node_norm2_;
};

// Atoms on the light cone, parameterized by base nodes xi in R^n with
// xi_1 >= 0 and r_min <= |xi| <= r_max (annulus with r_max <= 2 r_min).
// The lift is xi -> (xi, |xi|).
class ConeAtomFunction {
 public:
  ConeAtomFunction(int dim, std::vector<Atom> atoms, double r_min, double r_max);

  // Same validation except the annulus-width condition r_max <= 2 r_min;
  // needed for reparametrized outputs, whose support is genuinely wider.
  static ConeAtomFunction with_relaxed_annulus(int dim, std::vector<Atom> atoms, double r_min,
                                               double r_max);

  int dim() const { return dim_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  ConeAtomFunction() = default;
  int dim_ = 0;
  std::vector<Atom> atoms_;
  double r_min_ = 0.0, r_max_ = 0.0;
};

struct SpaceTimePoint {
  Vec x;      // in R^n
  double t;
};

struct SampledField {
  std::vector<SpaceTimePoint> points;
  std::vector<Complex> values;
};

// u(x,t) = (2*pi)^{-n/2} sum_j w_j a_j exp(i(<x,xi_j> + (t/time_scale)|xi_j|^2)).
// Exact finite phase sum; atom order is the summation order.
SampledField schrodinger_evolve(const FrequencyAtomFunction& f,
                                const std::vector<SpaceTimePoint>& points,
                                double time_scale = 1.0, int workers = 1);

Complex schrodinger_eval(const FrequencyAtomFunction& f, const Vec& x, double t,
                         double time_scale = 1.0);

// Nodes shifted by theta; band radius grows to lambda + |theta|.
FrequencyAtomFunction translate_frequency(const FrequencyAtomFunction& f, const Vec& theta);

// Ef(x,t) = sum_j w_j a_j exp(i(<x,xi_j> + t|xi_j|)).
SampledField wave_extension(const ConeAtomFunction& f, const std::vector<SpaceTimePoint>& points,
                            int workers = 1);

Complex wave_eval(const ConeAtomFunction& f, const Vec& x, double t);

// Max of |u(x, k dt)| over k dt <= t_max (at least the single sample dt).
// Requires dt * max|xi|^2 / time_scale <= 0.1 so that the grid max captures
// the supremum to within (dt/2) * max|xi|^2/time_scale * (2pi)^{-n/2} sum w|a|.
double maximal_in_time(const FrequencyAtomFunction& f, const Vec& x, double t_max, double dt,
                       double time_scale = 1.0);

// (sum_j w_j (1+|xi_j|^2)^s |a_j|^2)^{1/2}; l2_norm is the s = 0 case.
double h_s_norm(const FrequencyAtomFunction& f, double s);
double l2_norm(const FrequencyAtomFunction& f);

double l2_norm(const ConeAtomFunction& f);

// M * (total weight at points where |u| > M).
double weak_l1_level(const SampledField& u, const std::vector<double>& weights, double level);

}  // namespace fraclab::spectral
