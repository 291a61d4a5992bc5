// Compactly supported measures as unions of constant-density axis-aligned
// boxes, with closed-form Fourier transforms, ball masses, growth constants,
// and the alpha-dimensional energies (Fourier and Riesz side).
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/small_linalg.hpp"

namespace fraclab::measures {

using Complex = std::complex<double>;

struct Box {
  Vec lo, hi;  // [lo, hi], lo <= hi componentwise
};

inline double box_volume(const Box& b) {
  double v = 1.0;
  for (int k = 0; k < b.lo.dim; ++k) v *= b.hi[k] - b.lo[k];
  return v;
}

struct Cell {
  Box box;
  double density = 0.0;
};

// Congruent translates of `base` along one or more step directions
// (a tensor lattice of cells); transforms use closed-form geometric sums,
// so the cell count never needs to be materialized.
struct Family {
  Cell base;
  struct Axis {
    Vec step;
    long count = 1;
  };
  std::vector<Axis> axes;

  double virtual_count() const {
    double c = 1.0;
    for (const auto& a : axes) c *= static_cast<double>(a.count);
    return c;
  }
};

class BoxMeasure {
 public:
  BoxMeasure(int dim, std::vector<Cell> cells, std::vector<Family> families, double r_supp);

  int dim() const { return dim_; }
  double r_supp() const { return r_supp_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Family>& families() const { return families_; }
  double total_mass() const { return total_mass_; }
  double max_density() const { return max_density_; }
  double min_cell_side() const { return min_cell_side_; }
  double virtual_cell_count() const;

  // Declares this measure as the tensor product of 1-d factors along the
  // coordinate axes (enables the separable energy path; validated in tests).
  void annotate_product(std::vector<BoxMeasure> factors);
  const std::vector<BoxMeasure>& product_factors() const { return factors_; }

  // Scaled copy: x -> scale * x (densities adjusted so cell masses are kept).
  BoxMeasure scaled(double scale) const;

 private:
  int dim_;
  std::vector<Cell> cells_;
  std::vector<Family> families_;
  double r_supp_;
  double total_mass_ = 0.0;
  double max_density_ = 0.0;
  double min_cell_side_ = 0.0;
  std::vector<BoxMeasure> factors_;
};

// nu^(xi) = sum_cells rho * prod_k (e^{-i xi_k b_k} - e^{-i xi_k a_k})/(-i xi_k),
// progression families summed in closed form.
Complex fourier_transform(const BoxMeasure& nu, const Vec& xi);

// (P_sharp nu)^(eta) = nu^(P^T eta), evaluated without forming the image.
Complex pushforward_transform(const BoxMeasure& nu, const Mat& P, const Vec& eta);

// nu(B(x,r)) by recursive box/ball subdivision; relative error <= tol.
// Throws if a progression family would require enumerating more than
// `enumeration_budget` cells near the ball.
double ball_mass(const BoxMeasure& nu, const Vec& x, double r, double tol,
                 long enumeration_budget = 400000);

// Closed-form sandwich nu(B_inf(x, r/sqrt(d))) <= nu(B(x,r)) <= nu(B_inf(x,r))
// for product-annotated measures; any cell count.
struct MassBracket {
  double lower = 0.0, upper = 0.0;
  double mid() const { return std::sqrt(std::max(lower, 1e-300) * std::max(upper, 1e-300)); }
};
MassBracket ball_mass_bracket(const BoxMeasure& nu, const Vec& x, double r);

// Exact mass of the axis box [lo, hi] for a product-annotated measure.
double box_mass_product(const BoxMeasure& nu, const Vec& lo, const Vec& hi);

struct CAlphaResult {
  double value = 0.0;
  Vec argmax_x;
  double argmax_r = 0.0;
};

// Grid supremum of r^{-alpha} nu(B(x,r)): a certified lower bound for the
// true Frostman constant.
CAlphaResult c_alpha(const BoxMeasure& nu, double alpha, const std::vector<Vec>& centers,
                     const std::vector<double>& radii, double ball_tol = 1e-6);

std::vector<Vec> default_c_alpha_centers(const BoxMeasure& nu, size_t cap = 4096);
std::vector<double> default_c_alpha_radii(const BoxMeasure& nu);

struct EnergyGrid {
  int points_per_decade = 48;
  int angular_order = 16;
  double r_min = 0.0;          // 0 = auto
  bool allow_separable = true; // use the tensor path when factors are declared
};

struct EnergyResult {
  double value = 0.0;
  double tail_bound = 0.0;  // analytic bound on the |xi| > cutoff remainder
  bool cutoff_adequate = true;  // tail_bound <= value
  double cutoff = 0.0;
};

// I_alpha(nu) = int |nu^|^2 |xi|^{alpha-d} dxi over |xi| <= cutoff, with an
// analytic tail bound; value-tail <= I_alpha <= value+tail.
EnergyResult fourier_energy(const BoxMeasure& nu, double alpha, const EnergyGrid& grid,
                            double cutoff);

// n-dimensional energy of the pushforward under a general n x d matrix:
// int |nu^(P^T eta)|^2 |eta|^{alpha-n} d eta.
EnergyResult projected_energy(const BoxMeasure& nu, const Mat& P, double alpha,
                              const EnergyGrid& grid, double cutoff);

// Same integral with rows required orthonormal (the hyperplane reading).
EnergyResult hyperplane_energy(const BoxMeasure& nu, const Mat& B, double alpha,
                               const EnergyGrid& grid, double cutoff);

struct RieszResult {
  double value = 0.0;
  double std_error = 0.0;
  double self_value = 0.0;  // diagonal (same-cell) part, quadrature not MC
};

// Monte Carlo double integral of |x-y|^{-alpha}, stratified per cell pair,
// deterministic for a fixed seed. Requires alpha < d.
RieszResult riesz_energy(const BoxMeasure& nu, double alpha, long sample_budget,
                         std::uint64_t seed);

// Closed-form Gaussian ratio I_alpha / Riesz_alpha for this transform
// convention; calibrates cross-checks between the two energy routes.
double energy_constant(int d, double alpha);

enum class Surface { kParaboloid, kCone };

// Quadrature on the parameter domain (ball for the paraboloid, annulus
// B(0,1) \ B(0,1/2) for the cone); weights are plain Lebesgue weights, and
// their sum equals the parameter-domain volume exactly.
struct SurfaceQuadrature {
  Surface surface;
  int param_dim = 1;
  std::vector<Vec> nodes;
  std::vector<double> weights;
  double max_spacing = 0.0;  // for oscillation-resolution checks
};

SurfaceQuadrature paraboloid_quadrature(int n, int order);
SurfaceQuadrature cone_quadrature(int n, int order);

// int |nu^(R(xi,|xi|^2))|^2 dxi over the parameter ball (paraboloid), or the
// lift (xi,|xi|) over the annulus (cone).
double parabolic_decay(const BoxMeasure& nu, double R, const SurfaceQuadrature& quad,
                       int workers = 1);
double cone_decay(const BoxMeasure& nu, double R, const SurfaceQuadrature& quad, int workers = 1);

// Plain-text serialization; bit-exact round trip.
std::string to_text(const BoxMeasure& nu);
BoxMeasure from_text(const std::string& text);
void save_text(const BoxMeasure& nu, const std::string& path);
BoxMeasure load_text(const std::string& path);

}  // namespace fraclab::measures
