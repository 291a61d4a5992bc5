// Composite experiments: change-of-variables identity sweeps, the averaged
// projection bound, the lattice counterexample with exponent extraction,
// the maximal-inequality pipeline, and decay-exponent fits.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/geometry.hpp"
#include "fraclab/measures.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab::experiments {

// Least-squares fit of log Q against log R.
struct ExponentFit {
  std::vector<double> log_r, log_q;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

ExponentFit fit_loglog(const std::vector<double>& r_values, const std::vector<double>& q_values);

// Max over the sample points of the relative modulus mismatch between
// e^{i(t/lambda)Delta} f at (x,t) and the sheared evaluation of the
// frequency-translated data; zero in exact arithmetic.
double galilean_identity_check(const spectral::FrequencyAtomFunction& f, const Vec& theta,
                               const std::vector<spectral::SpaceTimePoint>& points,
                               double lambda = 1.0);

// Max relative deviation of Ef at (x,t) from Ef_{lambda,theta} at
// T_{lambda,theta}(x,t).
double wave_identity_check(const spectral::ConeAtomFunction& f, double lambda, const Vec& theta,
                           const std::vector<spectral::SpaceTimePoint>& points);

struct ProjectionAverageReport {
  double i_alpha = 0.0;       // I_alpha(nu)
  double i_alpha_tail = 0.0;
  double lhs_average = 0.0;   // average over theta of I_alpha(Pi_theta nu)
  double ratio = 0.0;         // lhs_average / i_alpha
  double theta_spread = 0.0;  // (max - min)/mean of the per-theta energies
  double solmon_constant = 0.0;
  std::vector<double> per_theta;
};

// theta grid on B_n(0,1); uses the frame projections Pi_theta = [I | -2theta].
ProjectionAverageReport averaged_projection_check(const measures::BoxMeasure& nu, double alpha,
                                                  const std::vector<Vec>& theta_grid,
                                                  double cutoff, int points_per_decade = 48);

// Uniform theta grids over B_n(0, radius) (n = 1: symmetric line grid; n = 2:
// tensor grid masked to the disc; always includes the origin).
std::vector<Vec> theta_grid(int n, int per_axis, double radius = 1.0);

struct LatticeAxis {
  double spacing = 0.0;
  long count = 0;
  double halfwidth = 0.0;  // cell half-width
  double origin = 0.0;     // smallest lattice center
};

// The assembled lattice counterexample: frequency data whose evolution is
// large on a product lattice region, and the matching product measure.
struct BourgainExample {
  int n = 1;
  double R = 0.0;
  double epsilon = 0.0;
  double sigma = 0.0;   // 1/(2(n+1))
  double scale = 0.25;  // normalization pulling the measure into B(0,1)
  spectral::FrequencyAtomFunction f;
  measures::BoxMeasure nu;
  double h_omega = 1.0;       // H^{n-1}(Omega)
  double x1_half_width = 0.0; // R^{-1/2}
  std::vector<double> omega_centers;  // n = 2 only
  double omega_halfwidth = 0.0;
  std::vector<LatticeAxis> lambda_axes;  // x' axes first, t axis last
  double field_at_origin = 0.0;          // |u(0,0)|, anchors the weak-type level
};

// Assembles the example; n in {1,2}. For n = 2 the Omega lattice must have
// at least 3 points per axis, otherwise an infeasibility error reports the
// minimal usable R.
BourgainExample build_bourgain(int n, double R, double epsilon, int atoms_per_cell,
                               std::uint64_t lambda_seed);

struct LowerBoundResult {
  double min_ratio = 0.0;  // min |u| / H^{n-1}(Omega) over the sampled region
  spectral::SpaceTimePoint argmin;
};

// Min of the evolved field over seeded samples of the region
// |x_1| <= R^{-1/2}, (x', t) in Lambda.
LowerBoundResult verify_lower_bound(const BourgainExample& ex, long sample_budget,
                                    std::uint64_t seed);

struct ProfileRange {
  double r_lo = 0.0, r_hi = 0.0;  // range of r (pre-normalization units)
  double sampled_r = 0.0;
  double sup_ratio = 0.0;  // grid sup of r^{-n} nu(B(x,r)) at the sampled r
  bool much_smaller = false;
};

struct ProfileReport {
  std::vector<ProfileRange> ranges;  // the five ranges cut by the breakpoints
  double reference_ratio = 0.0;      // ratio at r = R^{-1/2}
};

// Ball-growth profile across the breakpoints {R^{-1}, R^{-1+sigma},
// R^{-1+2sigma}, R^{-1/2}}; the three interior ranges are flagged when their
// ratio falls below 0.1x the reference.
ProfileReport measure_profile(const BourgainExample& ex, int x_samples, std::uint64_t seed);

struct EnergyLogCheck {
  std::vector<double> r_values, i_values, tail_bounds;
  ExponentFit fit;  // I_n vs log R (affine)
  double max_residual = 0.0;  // relative, per point
};

// I_n(nu_R) against log R over a geometric R list; energies must carry
// certificates with tail <= 20% of the value.
EnergyLogCheck energy_log_check(const std::vector<BourgainExample>& examples,
                                double cutoff_multiplier = 25.0);

struct BourgainRow {
  double R = 0.0;
  double weak_level = 0.0;
  double level_m = 0.0;
  double i_n = 0.0;
  double i_n_tail = 0.0;
  double f_l2 = 0.0;
  double q_value = 0.0;  // weak / (sqrt(I_n) ||f||_2)
};

struct NecessaryExponentReport {
  std::vector<BourgainRow> rows;
  ExponentFit fit;
  double s_lower_estimate = 0.0;
  double norm_band = 0.0;    // max/min of ||f||_2 R^{1/4}
  double energy_band = 0.0;  // max/min of I_n / log R
};

// Quantitative n = 1 extraction: measures every factor of the weak-type
// inequality and fits the R-exponent of the forced lower bound.
NecessaryExponentReport necessary_exponent_fit(const std::vector<double>& r_values,
                                               double epsilon, int atoms_per_cell,
                                               std::uint64_t seed,
                                               double cutoff_multiplier = 25.0);

struct PipelineStep {
  std::string name;
  double value = 0.0;
};

struct PipelineReport {
  std::vector<PipelineStep> steps;  // nondecreasing up to 1e-3 relative slack
  std::vector<double> per_theta_maximal;
  std::vector<double> per_theta_energy;
  double kappa = 0.0;        // max_theta M_theta / (sqrt(I_theta) ||f||_2)
  double c_geometry = 0.0;   // avg_theta I_theta / I_alpha(nu)
  double k_observed = 0.0;   // kappa * sqrt(c_geometry)
  bool monotone = true;
};

// Witnesses the chain from the space-time integral through the projected
// maximal bounds to the averaged-energy bound closed by the X-ray identity.
PipelineReport equivalence_pipeline(const measures::BoxMeasure& nu,
                                    const spectral::FrequencyAtomFunction& f, double lambda,
                                    double alpha, const std::vector<Vec>& theta_grid,
                                    double cutoff, int workers = 1);

// Fit of log(surface-average decay) against log R; beta estimate = -slope.
ExponentFit decay_exponent(const measures::BoxMeasure& nu, measures::Surface surface,
                           const std::vector<double>& r_values, int order, int workers = 1);

// s = (n - beta)/2 and beta = n - 2s (paraboloid and cone share the form).
double beta_to_s(double beta, int n);
double s_to_beta(double s, int n);

struct MinProjectedEnergy {
  double min_value = 0.0;
  Vec argmin_v;
  double value_at_pole = 0.0;  // v = e_{n+1}
  std::vector<double> per_v;
};

// Grid minimum of the hyperplane energy I_alpha(P_{v^perp} nu) over unit
// vectors v with |v - e_{n+1}| < 1/2.
MinProjectedEnergy min_projected_energy(const measures::BoxMeasure& nu, double alpha,
                                        const std::vector<Vec>& v_grid, double cutoff);

// v-grid builder through the hemisphere chart (always includes the pole).
std::vector<Vec> pole_v_grid(int n, int per_axis, double max_dist = 0.45);

// Deterministic measure suite for the projection-average experiments.
struct NamedMeasure {
  std::string name;
  measures::BoxMeasure measure;
  bool spherically_symmetric = false;
};
std::vector<NamedMeasure> projection_suite(int dim, std::uint64_t seed);

}  // namespace fraclab::experiments
