#include "fraclab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fraclab/parallel.hpp"

namespace fraclab::experiments {

using measures::BoxMeasure;
using measures::Cell;
using measures::EnergyGrid;
using measures::Family;
using spectral::Atom;
using spectral::ConeAtomFunction;
using spectral::FrequencyAtomFunction;
using spectral::SpaceTimePoint;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct AffineFit {
  double slope = 0.0, intercept = 0.0, slope_std_error = 0.0;
};

AffineFit affine_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t m = x.size();
  double sx = 0.0, sy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(m), my = sy / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  AffineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (m > 2) {
    double ss = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      ss += r * r;
    }
    f.slope_std_error = std::sqrt(ss / (static_cast<double>(m) - 2.0) / sxx);
  }
  return f;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ExponentFit fit_loglog(const std::vector<double>& r_values, const std::vector<double>& q_values) {
  if (r_values.size() != q_values.size() || r_values.size() < 3)
    throw std::invalid_argument("fit_loglog: need at least 3 aligned samples");
  for (size_t i = 1; i < r_values.size(); ++i)
    if (!(r_values[i] > r_values[i - 1]))
      throw std::invalid_argument("fit_loglog: R values must be strictly increasing");
  ExponentFit fit;
  for (size_t i = 0; i < r_values.size(); ++i) {
    if (!(q_values[i] > 0.0)) throw std::invalid_argument("fit_loglog: values must be positive");
    fit.log_r.push_back(std::log(r_values[i]));
    fit.log_q.push_back(std::log(q_values[i]));
  }
  const AffineFit f = affine_fit(fit.log_r, fit.log_q);
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.slope_std_error = f.slope_std_error;
  return fit;
}

double galilean_identity_check(const FrequencyAtomFunction& f, const Vec& theta,
                               const std::vector<SpaceTimePoint>& points, double lambda) {
  const FrequencyAtomFunction f_theta = spectral::translate_frequency(f, theta);
  double max_u = 0.0, max_err = 0.0;
  for (const SpaceTimePoint& p : points) {
    const double lhs = std::abs(spectral::schrodinger_eval(f, p.x, p.t, lambda));
    const double tau = p.t / lambda;
    Vec x_sheared = p.x;
    for (int k = 0; k < theta.dim; ++k) x_sheared[k] -= 2.0 * tau * theta[k];
    const double rhs = std::abs(spectral::schrodinger_eval(f_theta, x_sheared, p.t, lambda));
    max_u = std::max(max_u, lhs);
    max_err = std::max(max_err, std::abs(lhs - rhs));
  }
  return max_u > 0.0 ? max_err / max_u : 0.0;
}

double wave_identity_check(const ConeAtomFunction& f, double lambda, const Vec& theta,
                           const std::vector<SpaceTimePoint>& points) {
  const ConeAtomFunction g = geometry::cone_reparam(f, lambda, theta);
  const Mat t_map = geometry::cone_transport(f.dim(), lambda, theta);
  double max_u = 0.0, max_err = 0.0;
  const int n = f.dim();
  for (const SpaceTimePoint& p : points) {
    const auto a = spectral::wave_eval(f, p.x, p.t);
    Vec xt(n + 1);
    for (int k = 0; k < n; ++k) xt[k] = p.x[k];
    xt[n] = p.t;
    Vec moved = apply(t_map, xt);
    Vec x_new(n);
    for (int k = 0; k < n; ++k) x_new[k] = moved[k];
    const auto b = spectral::wave_eval(g, x_new, moved[n]);
    max_u = std::max(max_u, std::abs(a));
    max_err = std::max(max_err, std::abs(a - b));
  }
  return max_u > 0.0 ? max_err / max_u : 0.0;
}

std::vector<Vec> theta_grid(int n, int per_axis, double radius) {
  if (per_axis < 1) throw std::invalid_argument("theta_grid: per_axis must be positive");
  if (per_axis % 2 == 0) ++per_axis;  // keep the origin on the grid
  std::vector<Vec> grid;
  if (n == 1) {
    for (int i = 0; i < per_axis; ++i) {
      const double t =
          per_axis == 1 ? 0.0 : -radius + 2.0 * radius * i / static_cast<double>(per_axis - 1);
      grid.push_back(Vec{t});
    }
    return grid;
  }
  if (n == 2) {
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j) {
        const double a =
            per_axis == 1 ? 0.0 : -radius + 2.0 * radius * i / static_cast<double>(per_axis - 1);
        const double b =
            per_axis == 1 ? 0.0 : -radius + 2.0 * radius * j / static_cast<double>(per_axis - 1);
        if (a * a + b * b <= radius * radius * (1.0 + 1e-12)) grid.push_back(Vec{a, b});
      }
    return grid;
  }
  throw std::invalid_argument("theta_grid: n must be 1 or 2");
}

ProjectionAverageReport averaged_projection_check(const BoxMeasure& nu, double alpha,
                                                  const std::vector<Vec>& grid, double cutoff,
                                                  int points_per_decade) {
  if (grid.empty()) throw std::invalid_argument("averaged_projection_check: empty theta grid");
  const int d = nu.dim();
  const int n = d - 1;
  EnergyGrid egrid;
  egrid.points_per_decade = points_per_decade;

  ProjectionAverageReport rep;
  const auto full = measures::fourier_energy(nu, alpha, egrid, cutoff);
  if (!full.cutoff_adequate)
    throw std::invalid_argument("averaged_projection_check: divergent energy certificate");
  rep.i_alpha = full.value;
  rep.i_alpha_tail = full.tail_bound;

  double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Vec& theta : grid) {
    if (theta.dim != n)
      throw std::invalid_argument("averaged_projection_check: theta dimension mismatch");
    const auto frame = geometry::parabolic_frame(theta);
    const auto proj = measures::projected_energy(nu, frame.pi, alpha, egrid, cutoff);
    rep.per_theta.push_back(proj.value);
    sum += proj.value;
    lo = std::min(lo, proj.value);
    hi = std::max(hi, proj.value);
  }
  rep.lhs_average = sum / static_cast<double>(grid.size());
  rep.ratio = rep.lhs_average / rep.i_alpha;
  rep.theta_spread = (hi - lo) / rep.lhs_average;

  auto gaussian = [](const Vec& x) { return std::exp(-norm2(x)); };
  rep.solmon_constant =
      geometry::solmon_check(gaussian, d, geometry::sphere_quadrature(d - 1, 16), {32, 6.0})
          .constant;
  return rep;
}

// ---------------------------------------------------------------------------
// lattice counterexample

namespace {

// smooth bump on [-2,2], normalized offline so that its integral is 1
double bump_raw(double u) {
  const double v = u / 2.0;
  if (std::abs(v) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - v * v));
}

double bump_normalizer() {
  // dense Simpson rule; the profile is fixed, so this is a one-time constant
  static const double z = [] {
    const int n = 20000;
    const double h = 4.0 / n;
    double s = bump_raw(-2.0) + bump_raw(2.0);
    for (int i = 1; i < n; ++i) s += bump_raw(-2.0 + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
  }();
  return z;
}

LatticeAxis half_open_axis(double spacing, double window, double halfwidth) {
  LatticeAxis ax;
  ax.spacing = spacing;
  ax.halfwidth = halfwidth;
  const long m_lo = static_cast<long>(std::ceil(-window / spacing));
  const long m_hi = static_cast<long>(std::ceil(window / spacing)) - 1;
  ax.count = m_hi - m_lo + 1;
  ax.origin = static_cast<double>(m_lo) * spacing;
  return ax;
}

}  // namespace

BourgainExample build_bourgain(int n, double R, double epsilon, int atoms_per_cell,
                               std::uint64_t lambda_seed) {
  if (n != 1 && n != 2) throw std::invalid_argument("build_bourgain: n must be 1 or 2");
  if (!(R >= 16.0)) throw std::invalid_argument("build_bourgain: R must be >= 16");
  if (!(epsilon > 0.0 && epsilon <= 0.05))
    throw std::invalid_argument("build_bourgain: epsilon must lie in (0, 0.05]");
  if (atoms_per_cell < 8) throw std::invalid_argument("build_bourgain: atoms_per_cell must be >= 8");

  const double sigma = 1.0 / (2.0 * (n + 1));
  const double scale = 0.25;

  // frequency atoms of the x_1 profile: transform R^{-1/2} eps^{-1}
  // phi(R^{-1/2} eps^{-1} xi) with phi the normalized bump on [-2,2]
  const double z = bump_normalizer();
  const double xi_scale = epsilon * std::sqrt(R);
  const int n1 = 4 * atoms_per_cell;
  std::vector<double> nodes1(n1), values1(n1);
  const double du = 4.0 / n1;
  for (int i = 0; i < n1; ++i) {
    const double u = -2.0 + (i + 0.5) * du;
    nodes1[i] = u * xi_scale;
    values1[i] = bump_raw(u) / (z * xi_scale);
  }
  const double w1 = du * xi_scale;

  std::vector<Atom> atoms;
  std::vector<double> omega_centers;
  double h_omega = 1.0;
  if (n == 1) {
    for (int i = 0; i < n1; ++i) atoms.push_back({Vec{nodes1[i]}, w1, values1[i]});
  } else {
    const double omega_spacing = kTwoPi * std::pow(R, 1.0 - sigma);
    const long k_lo = static_cast<long>(std::ceil(-R / omega_spacing));
    const long k_hi = static_cast<long>(std::ceil(R / omega_spacing)) - 1;
    if (k_hi - k_lo + 1 < 3) {
      const double min_r = std::pow(kTwoPi, 1.0 / sigma);
      throw std::invalid_argument(
          "build_bourgain: empty frequency lattice at this R; need R >= " +
          std::to_string(min_r));
    }
    for (long k = k_lo; k <= k_hi; ++k)
      omega_centers.push_back(static_cast<double>(k) * omega_spacing);
    h_omega = static_cast<double>(omega_centers.size()) * 2.0 * epsilon;
    const double w2 = 2.0 * epsilon / atoms_per_cell;
    for (int i = 0; i < n1; ++i) {
      for (double c : omega_centers) {
        for (int j = 0; j < atoms_per_cell; ++j) {
          const double xi2 = c - epsilon + (j + 0.5) * w2;
          atoms.push_back({Vec{nodes1[i], xi2}, w1 * w2, values1[i]});
        }
      }
    }
  }
  double band = 0.0;
  for (const Atom& a : atoms) band = std::max(band, norm(a.node));
  FrequencyAtomFunction f(n, std::move(atoms), band);

  // lattice axes of the region Lambda in (x', t)
  std::vector<LatticeAxis> axes;
  const double cell_hw = epsilon / R;
  if (n == 2) {
    axes.push_back(half_open_axis(std::pow(R, sigma - 1.0), 2.0, cell_hw));
    // the paper's t-spacing R^{2 sigma - 1}, carrying the 1/(2 pi) that makes
    // the quadratic phase land on multiples of 2 pi
    axes.push_back(half_open_axis(std::pow(R, 2.0 * sigma - 1.0) / kTwoPi, 2.0, cell_hw));
  } else {
    axes.push_back(half_open_axis(std::pow(R, 2.0 * sigma - 1.0), 2.0, cell_hw));
  }

  // the product measure: uniform x_1 interval times the Lambda cell lattice,
  // each factor of mass one, then pulled into the unit ball by `scale`
  const double x1hw = 1.0 / std::sqrt(R);
  const int d = n + 1;
  std::vector<BoxMeasure> factors;
  {
    Cell c;
    c.box.lo = Vec{-x1hw};
    c.box.hi = Vec{x1hw};
    c.density = 0.5 / x1hw;
    factors.emplace_back(1, std::vector<Cell>{c}, std::vector<Family>{}, x1hw * 1.01);
  }
  for (const LatticeAxis& ax : axes) {
    Family fam;
    fam.base.box.lo = Vec{ax.origin - ax.halfwidth};
    fam.base.box.hi = Vec{ax.origin + ax.halfwidth};
    fam.base.density = 1.0 / (static_cast<double>(ax.count) * 2.0 * ax.halfwidth);
    fam.axes.push_back({Vec{ax.spacing}, ax.count});
    factors.emplace_back(1, std::vector<Cell>{}, std::vector<Family>{fam}, 2.1);
  }
  // assemble the d-dimensional tensor: one family stepping in every lattice axis
  Family big;
  big.base.box.lo = Vec(d);
  big.base.box.hi = Vec(d);
  big.base.box.lo[0] = -x1hw;
  big.base.box.hi[0] = x1hw;
  big.base.density = factors[0].cells()[0].density;
  for (int k = 1; k < d; ++k) {
    const LatticeAxis& ax = axes[static_cast<size_t>(k - 1)];
    big.base.box.lo[k] = ax.origin - ax.halfwidth;
    big.base.box.hi[k] = ax.origin + ax.halfwidth;
    big.base.density *= factors[static_cast<size_t>(k)].families()[0].base.density;
    Vec step(d);
    step[k] = ax.spacing;
    big.axes.push_back({step, ax.count});
  }
  BoxMeasure nu(d, {}, {big}, 2.9);
  nu.annotate_product(std::move(factors));

  BourgainExample ex{.n = n,
                     .R = R,
                     .epsilon = epsilon,
                     .sigma = sigma,
                     .scale = scale,
                     .f = std::move(f),
                     .nu = nu.scaled(scale),
                     .h_omega = h_omega,
                     .x1_half_width = x1hw,
                     .omega_centers = std::move(omega_centers),
                     .omega_halfwidth = epsilon,
                     .lambda_axes = std::move(axes),
                     .field_at_origin = 0.0};
  ex.field_at_origin = std::abs(spectral::schrodinger_eval(ex.f, Vec(n), 0.0, R));
  (void)lambda_seed;
  return ex;
}

LowerBoundResult verify_lower_bound(const BourgainExample& ex, long sample_budget,
                                    std::uint64_t seed) {
  if (sample_budget < 1) throw std::invalid_argument("verify_lower_bound: empty sample budget");
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = ex.n;
  LowerBoundResult res;
  res.min_ratio = std::numeric_limits<double>::infinity();
  for (long s = 0; s < sample_budget; ++s) {
    Vec x(n);
    x[0] = (2.0 * unif(rng) - 1.0) * ex.x1_half_width;
    double t = 0.0;
    for (size_t a = 0; a < ex.lambda_axes.size(); ++a) {
      const LatticeAxis& ax = ex.lambda_axes[a];
      const long m = std::min<long>(ax.count - 1,
                                    static_cast<long>(unif(rng) * static_cast<double>(ax.count)));
      const double coord =
          ax.origin + static_cast<double>(m) * ax.spacing + (2.0 * unif(rng) - 1.0) * ax.halfwidth;
      if (a + 1 < static_cast<size_t>(n)) {
        x[static_cast<int>(a) + 1] = coord;
      } else {
        t = coord;
      }
    }
    const double v = std::abs(spectral::schrodinger_eval(ex.f, x, t, ex.R)) / ex.h_omega;
    if (v < res.min_ratio) {
      res.min_ratio = v;
      res.argmin = {x, t};
    }
  }
  return res;
}

namespace {

// Ball growth ratio at radius r (pre-normalization units): the query runs on
// the normalized measure; for lattice scales too dense to enumerate, the
// product-measure sandwich midpoint stands in for the exact mass.
double profile_ratio(const BourgainExample& ex, const Vec& x_orig, double r_orig) {
  const double r = r_orig * ex.scale;
  Vec x = x_orig;
  x *= ex.scale;
  double mass;
  try {
    mass = measures::ball_mass(ex.nu, x, r, 5e-3, 300000);
  } catch (const std::runtime_error&) {
    mass = measures::ball_mass_bracket(ex.nu, x, r).mid();
  }
  return mass / std::pow(r, ex.n);
}

}  // namespace

// The three interior ranges are sampled strictly inside the open window
// (R^{-1}, R^{-1/2}); a range is flagged as `much_smaller` when its ratio
// falls below one third of the n-regular log-log interpolation between the
// anchors at r = R^{-1} and r = R^{-1/2}, where growth of exact order r^n
// holds. (An absolute threshold cannot work here: the two anchor constants
// themselves differ by a dimensional factor.)
ProfileReport measure_profile(const BourgainExample& ex, int x_samples, std::uint64_t seed) {
  const double R = ex.R, sigma = ex.sigma;
  const std::vector<double> breaks = {1.0 / R, std::pow(R, sigma - 1.0),
                                      std::pow(R, 2.0 * sigma - 1.0), 1.0 / std::sqrt(R)};
  // sample centers on the support lattice
  std::mt19937_64 rng(splitmix64(seed ^ 0xabcdefULL));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> centers;
  const int n = ex.n;
  for (int s = 0; s < x_samples; ++s) {
    Vec x(n + 1);
    x[0] = 0.0;
    for (size_t a = 0; a < ex.lambda_axes.size(); ++a) {
      const LatticeAxis& ax = ex.lambda_axes[a];
      long m;
      if (s == 0) {
        m = ax.count / 2;
      } else {
        m = std::min<long>(ax.count - 1,
                           static_cast<long>(unif(rng) * static_cast<double>(ax.count)));
      }
      x[static_cast<int>(a) + 1] = ax.origin + static_cast<double>(m) * ax.spacing;
    }
    centers.push_back(x);
  }

  auto sup_ratio_at = [&](double r) {
    double best = 0.0;
    for (const Vec& c : centers) best = std::max(best, profile_ratio(ex, c, r));
    return best;
  };

  ProfileReport rep;
  rep.reference_ratio = sup_ratio_at(breaks[3]);
  const double anchor_lo = sup_ratio_at(breaks[0]);
  // exponent of the regular interpolation between the two anchors
  const double gamma = std::log(rep.reference_ratio / anchor_lo) / std::log(breaks[3] / breaks[0]);
  auto interpolated = [&](double r) {
    return anchor_lo * std::pow(r / breaks[0], gamma);
  };

  ProfileRange r0{0.0, breaks[0], breaks[0], anchor_lo, false};
  rep.ranges.push_back(r0);
  for (int k = 0; k < 3; ++k) {
    ProfileRange pr;
    pr.r_lo = breaks[static_cast<size_t>(k)];
    pr.r_hi = breaks[static_cast<size_t>(k) + 1];
    // ranges 2 and 3 dip at their middles; the last one near its lower end
    pr.sampled_r = (k < 2) ? std::sqrt(pr.r_lo * pr.r_hi)
                           : pr.r_lo * std::pow(pr.r_hi / pr.r_lo, 0.1);
    pr.sup_ratio = sup_ratio_at(pr.sampled_r);
    pr.much_smaller = pr.sup_ratio < interpolated(pr.sampled_r) / 3.0;
    rep.ranges.push_back(pr);
  }
  ProfileRange top{breaks[3], 1.0, breaks[3], 0.0, false};
  // the unit-radius ball contains the normalized support, so the upper
  // endpoint contributes the total mass
  const double at_top = std::max(rep.reference_ratio, ex.nu.total_mass());
  top.sup_ratio = at_top;
  rep.ranges.push_back(top);
  return rep;
}

EnergyLogCheck energy_log_check(const std::vector<BourgainExample>& examples,
                                double cutoff_multiplier) {
  if (examples.size() < 3)
    throw std::invalid_argument("energy_log_check: need at least 3 examples");
  EnergyLogCheck out;
  std::vector<double> lnr;
  for (const BourgainExample& ex : examples) {
    if (!out.r_values.empty() && !(ex.R > out.r_values.back()))
      throw std::invalid_argument("energy_log_check: R values must increase");
    EnergyGrid grid;
    const double cutoff = cutoff_multiplier / ex.nu.min_cell_side();
    const auto e =
        measures::fourier_energy(ex.nu, static_cast<double>(ex.n), grid, cutoff);
    if (e.tail_bound > 0.2 * e.value) {
      const double needed =
          cutoff * std::sqrt(e.tail_bound / (0.2 * e.value));
      throw std::invalid_argument("energy_log_check: energy certificate too loose; need cutoff ~ " +
                                  std::to_string(needed));
    }
    out.r_values.push_back(ex.R);
    out.i_values.push_back(e.value);
    out.tail_bounds.push_back(e.tail_bound);
    lnr.push_back(std::log(ex.R));
  }
  const AffineFit f = affine_fit(lnr, out.i_values);
  out.fit.log_r = lnr;
  out.fit.log_q = out.i_values;
  out.fit.slope = f.slope;
  out.fit.intercept = f.intercept;
  out.fit.slope_std_error = f.slope_std_error;
  for (size_t i = 0; i < lnr.size(); ++i) {
    const double fitted = f.intercept + f.slope * lnr[i];
    out.max_residual = std::max(out.max_residual, std::abs(out.i_values[i] - fitted) /
                                                      std::abs(out.i_values[i]));
  }
  return out;
}

NecessaryExponentReport necessary_exponent_fit(const std::vector<double>& r_values,
                                               double epsilon, int atoms_per_cell,
                                               std::uint64_t seed, double cutoff_multiplier) {
  if (r_values.size() < 4)
    throw std::invalid_argument("necessary_exponent_fit: need at least 4 values of R");
  NecessaryExponentReport rep;
  std::vector<double> qs, norm_r14, i_over_log;
  for (double R : r_values) {
    BourgainExample ex = build_bourgain(1, R, epsilon, atoms_per_cell, seed);
    BourgainRow row;
    row.R = R;

    // field samples over the region: every Lambda cell center with a small
    // x_1 stencil; weights partition the measure's mass
    const LatticeAxis& ax = ex.lambda_axes[0];
    std::vector<SpaceTimePoint> pts;
    std::vector<double> wts;
    const double cell_mass = 1.0 / static_cast<double>(ax.count);
    for (long m = 0; m < ax.count; ++m) {
      const double t = ax.origin + static_cast<double>(m) * ax.spacing;
      for (int j = -1; j <= 1; ++j) {
        pts.push_back({Vec{0.5 * ex.x1_half_width * j}, t});
        wts.push_back(cell_mass / 3.0);
      }
    }
    auto field = spectral::schrodinger_evolve(ex.f, pts, R);
    row.level_m = 0.5 * ex.field_at_origin * ex.h_omega;
    row.weak_level = spectral::weak_l1_level(field, wts, row.level_m);

    EnergyGrid grid;
    const double cutoff = cutoff_multiplier / ex.nu.min_cell_side();
    const auto e = measures::fourier_energy(ex.nu, 1.0, grid, cutoff);
    if (e.tail_bound > 0.2 * e.value)
      throw std::invalid_argument("necessary_exponent_fit: energy certificate too loose");
    row.i_n = e.value;
    row.i_n_tail = e.tail_bound;
    row.f_l2 = spectral::l2_norm(ex.f);
    row.q_value = row.weak_level / (std::sqrt(row.i_n) * row.f_l2);
    rep.rows.push_back(row);
    qs.push_back(row.q_value);
    norm_r14.push_back(row.f_l2 * std::pow(R, 0.25));
    i_over_log.push_back(row.i_n / std::log(R));
  }
  rep.fit = fit_loglog(r_values, qs);
  rep.s_lower_estimate = rep.fit.slope;
  rep.norm_band = *std::max_element(norm_r14.begin(), norm_r14.end()) /
                  *std::min_element(norm_r14.begin(), norm_r14.end());
  rep.energy_band = *std::max_element(i_over_log.begin(), i_over_log.end()) /
                    *std::min_element(i_over_log.begin(), i_over_log.end());
  return rep;
}

PipelineReport equivalence_pipeline(const BoxMeasure& nu, const FrequencyAtomFunction& f,
                                    double lambda, double alpha, const std::vector<Vec>& grid,
                                    double cutoff, int workers) {
  const int d = nu.dim();
  const int n = d - 1;
  if (f.dim() != n) throw std::invalid_argument("equivalence_pipeline: dimension mismatch");
  if (!(lambda >= 1.0) || f.band_radius() > lambda * (1.0 + 1e-12))
    throw std::invalid_argument("equivalence_pipeline: band radius must fit within lambda");
  if (nu.r_supp() > 1.0 + 1e-12)
    throw std::invalid_argument("equivalence_pipeline: measure must live in the unit ball");
  if (grid.empty()) throw std::invalid_argument("equivalence_pipeline: empty theta grid");

  // tensor-midpoint quadrature nodes over the measure cells
  std::vector<SpaceTimePoint> nodes;
  std::vector<double> wts;
  auto add_cell = [&](const Cell& c) {
    std::array<int, kMaxDim> m{};
    std::array<double, kMaxDim> h{};
    double cell_w = c.density;
    for (int k = 0; k < d; ++k) {
      const double side = c.box.hi[k] - c.box.lo[k];
      m[static_cast<size_t>(k)] =
          std::clamp(static_cast<int>(std::ceil(side * lambda * 0.7)) + 4, 4, 48);
      h[static_cast<size_t>(k)] = side / m[static_cast<size_t>(k)];
      cell_w *= h[static_cast<size_t>(k)];
    }
    std::array<int, kMaxDim> idx{};
    while (true) {
      Vec x(n);
      double t = 0.0;
      for (int k = 0; k < d; ++k) {
        const double coord = c.box.lo[k] + (idx[static_cast<size_t>(k)] + 0.5) * h[static_cast<size_t>(k)];
        if (k < n)
          x[k] = coord;
        else
          t = coord;
      }
      nodes.push_back({x, t});
      wts.push_back(cell_w);
      int k = 0;
      for (; k < d; ++k) {
        if (++idx[static_cast<size_t>(k)] < m[static_cast<size_t>(k)]) break;
        idx[static_cast<size_t>(k)] = 0;
      }
      if (k == d) break;
    }
  };
  for (const Cell& c : nu.cells()) add_cell(c);
  for (const Family& fam : nu.families()) {
    if (fam.virtual_count() > 512.0)
      throw std::invalid_argument("equivalence_pipeline: measure has too many cells");
    std::vector<long> idx(fam.axes.size(), 0);
    while (true) {
      Cell c = fam.base;
      for (size_t a = 0; a < fam.axes.size(); ++a) {
        Vec shift = static_cast<double>(idx[a]) * fam.axes[a].step;
        c.box.lo += shift;
        c.box.hi += shift;
      }
      add_cell(c);
      size_t a = 0;
      for (; a < fam.axes.size(); ++a) {
        if (++idx[a] < fam.axes[a].count) break;
        idx[a] = 0;
      }
      if (a == fam.axes.size()) break;
    }
  }

  PipelineReport rep;
  // (a) the space-time integral of the modulus
  std::vector<double> lhs_vals(nodes.size());
  parallel_for(nodes.size(), workers, [&](size_t i) {
    lhs_vals[i] = std::abs(spectral::schrodinger_eval(f, nodes[i].x, nodes[i].t, lambda));
  });
  double lhs = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) lhs += wts[i] * lhs_vals[i];
  rep.steps.push_back({"space_time_integral", lhs});

  // (b) per-theta projected maximal integrals; the per-node supremum always
  // includes the node's own time so the domination is structural
  const double f_l2 = spectral::l2_norm(f);
  EnergyGrid egrid;
  double sum_m = 0.0, sum_i = 0.0;
  rep.kappa = 0.0;
  for (const Vec& g : grid) {
    Vec theta_big(n);
    for (int k = 0; k < n; ++k) theta_big[k] = lambda * g[k];
    const auto f_theta = spectral::translate_frequency(f, theta_big);
    const double max_xi2 =
        f_theta.max_node_norm2();
    const double dt = 0.02 / std::max(max_xi2, 1.0);
    const long steps = std::max(1L, static_cast<long>(std::floor(1.0 / (lambda * dt))));
    std::vector<double> sup_vals(nodes.size());
    parallel_for(nodes.size(), workers, [&](size_t i) {
      // Pi_g(x,t) = x - 2 t g; the node's own time t/lambda joins the
      // supremum candidates, which makes the domination structural
      Vec x = nodes[i].x;
      const double tau = nodes[i].t / lambda;
      for (int k = 0; k < n; ++k) x[k] -= 2.0 * nodes[i].t * g[k];
      double best = std::abs(spectral::schrodinger_eval(f_theta, x, tau));
      for (long s = 1; s <= steps; ++s)
        best = std::max(best,
                        std::abs(spectral::schrodinger_eval(f_theta, x, static_cast<double>(s) * dt)));
      sup_vals[i] = best;
    });
    double m_g = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) m_g += wts[i] * sup_vals[i];

    const auto frame = geometry::parabolic_frame(g);
    const auto proj = measures::projected_energy(nu, frame.pi, alpha, egrid, cutoff);
    if (proj.tail_bound > 0.1 * proj.value)
      throw std::invalid_argument("equivalence_pipeline: projected-energy certificate looser than 10%");
    rep.per_theta_maximal.push_back(m_g);
    rep.per_theta_energy.push_back(proj.value);
    sum_m += m_g;
    sum_i += proj.value;
    rep.kappa = std::max(rep.kappa, m_g / (std::sqrt(proj.value) * f_l2));
  }
  const double avg_m = sum_m / static_cast<double>(grid.size());
  const double avg_i = sum_i / static_cast<double>(grid.size());
  rep.steps.push_back({"avg_projected_maximal", avg_m});

  double avg_sqrt_i = 0.0;
  for (double v : rep.per_theta_energy) avg_sqrt_i += std::sqrt(v);
  avg_sqrt_i /= static_cast<double>(grid.size());
  rep.steps.push_back({"avg_energy_bound", rep.kappa * f_l2 * avg_sqrt_i});
  rep.steps.push_back({"cauchy_schwarz_bound", rep.kappa * f_l2 * std::sqrt(avg_i)});

  const auto full = measures::fourier_energy(nu, alpha, egrid, cutoff);
  if (full.tail_bound > 0.1 * full.value)
    throw std::invalid_argument("equivalence_pipeline: full-energy certificate looser than 10%");
  rep.c_geometry = avg_i / full.value;
  rep.steps.push_back(
      {"xray_closed_bound", rep.kappa * f_l2 * std::sqrt(rep.c_geometry * full.value)});
  rep.k_observed = rep.kappa * std::sqrt(rep.c_geometry);

  rep.monotone = true;
  for (size_t i = 1; i < rep.steps.size(); ++i)
    if (rep.steps[i].value < rep.steps[i - 1].value * (1.0 - 1e-3)) rep.monotone = false;
  return rep;
}

ExponentFit decay_exponent(const BoxMeasure& nu, measures::Surface surface,
                           const std::vector<double>& r_values, int order, int workers) {
  if (r_values.size() < 4)
    throw std::invalid_argument("decay_exponent: need at least 4 values of R");
  const int n = nu.dim() - 1;
  auto quad = surface == measures::Surface::kParaboloid ? measures::paraboloid_quadrature(n, order)
                                                        : measures::cone_quadrature(n, order);
  const double r_max = r_values.back();
  const double required = kTwoPi / (4.0 * 3.0 * r_max * nu.r_supp());
  if (quad.max_spacing > required) {
    const int needed =
        static_cast<int>(std::ceil(order * quad.max_spacing / required)) + 1;
    throw std::invalid_argument("decay_exponent: quadrature does not resolve oscillations; need order ~ " +
                                std::to_string(needed));
  }
  std::vector<double> vals;
  for (double R : r_values) {
    const double v = surface == measures::Surface::kParaboloid
                         ? measures::parabolic_decay(nu, R, quad, workers)
                         : measures::cone_decay(nu, R, quad, workers);
    vals.push_back(v);
  }
  return fit_loglog(r_values, vals);
}

double beta_to_s(double beta, int n) { return 0.5 * (static_cast<double>(n) - beta); }
double s_to_beta(double s, int n) { return static_cast<double>(n) - 2.0 * s; }

MinProjectedEnergy min_projected_energy(const BoxMeasure& nu, double alpha,
                                        const std::vector<Vec>& v_grid, double cutoff) {
  if (v_grid.empty()) throw std::invalid_argument("min_projected_energy: empty grid");
  MinProjectedEnergy out;
  out.min_value = std::numeric_limits<double>::infinity();
  EnergyGrid grid;
  const int d = nu.dim();
  Vec pole(d);
  pole[d - 1] = 1.0;
  out.value_at_pole =
      measures::hyperplane_energy(nu, geometry::basis_of_complement(pole), alpha, grid, cutoff)
          .value;
  for (const Vec& v : v_grid) {
    const auto e =
        measures::hyperplane_energy(nu, geometry::basis_of_complement(v), alpha, grid, cutoff);
    out.per_v.push_back(e.value);
    if (e.value < out.min_value) {
      out.min_value = e.value;
      out.argmin_v = v;
    }
  }
  return out;
}

std::vector<Vec> pole_v_grid(int n, int per_axis, double max_dist) {
  // choose the theta radius so that |G(theta) - pole| stays under max_dist
  double radius = 0.05;
  while (radius < 1.0) {
    Vec theta(n);
    theta[0] = radius;
    Vec g = geometry::paraboloid_chart(theta);
    g[n] -= 1.0;
    if (norm(g) > max_dist) break;
    radius += 0.01;
  }
  radius -= 0.01;
  std::vector<Vec> out;
  for (const Vec& theta : theta_grid(n, per_axis, radius))
    out.push_back(geometry::paraboloid_chart(theta));
  return out;
}

std::vector<NamedMeasure> projection_suite(int dim, std::uint64_t seed) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("projection_suite: dim must be 2 or 3");
  std::vector<NamedMeasure> suite;
  const int d = dim;

  // radially symmetric boxed Gaussian
  {
    std::vector<Cell> cells;
    const int g = d == 2 ? 20 : 8;
    const double span = 1.4, h = span / g;
    for (int i = 0; i < (d == 2 ? g * g : g * g * g); ++i) {
      std::array<int, 3> id{};
      int rem = i;
      for (int k = 0; k < d; ++k) {
        id[static_cast<size_t>(k)] = rem % g;
        rem /= g;
      }
      Vec lo(d), hi(d), mid(d);
      for (int k = 0; k < d; ++k) {
        lo[k] = -0.7 + id[static_cast<size_t>(k)] * h;
        hi[k] = lo[k] + h;
        mid[k] = 0.5 * (lo[k] + hi[k]);
      }
      const double rho = std::exp(-norm2(mid) / (2.0 * 0.22 * 0.22));
      if (rho > 1e-6) cells.push_back({{lo, hi}, rho});
    }
    BoxMeasure m(d, cells, {}, 1.0);
    suite.push_back({"gauss_symmetric", m, true});
  }
  // thin slab orthogonal to the time axis
  {
    Vec lo(d), hi(d);
    for (int k = 0; k < d - 1; ++k) {
      lo[k] = -0.6;
      hi[k] = 0.6;
    }
    lo[d - 1] = -0.02;
    hi[d - 1] = 0.02;
    suite.push_back({"slab_flat", BoxMeasure(d, {{{lo, hi}, 1.0}}, {}, 1.0), false});
  }
  // staircase approximation of a tilted slab
  {
    std::vector<Cell> cells;
    const int steps = 8;
    for (int i = 0; i < steps; ++i) {
      Vec lo(d), hi(d);
      const double x0 = -0.6 + 1.2 * i / steps;
      lo[0] = x0;
      hi[0] = x0 + 1.2 / steps;
      for (int k = 1; k < d - 1; ++k) {
        lo[k] = -0.3;
        hi[k] = 0.3;
      }
      lo[d - 1] = -0.35 + 0.6 * i / steps;
      hi[d - 1] = lo[d - 1] + 0.05;
      cells.push_back({{lo, hi}, 1.0});
    }
    suite.push_back({"slab_tilted", BoxMeasure(d, cells, {}, 1.0), false});
  }
  // two separated clusters
  {
    std::vector<Cell> cells;
    Vec lo1(d), hi1(d), lo2(d), hi2(d);
    for (int k = 0; k < d; ++k) {
      lo1[k] = -0.55;
      hi1[k] = -0.35;
      lo2[k] = 0.3;
      hi2[k] = 0.5;
    }
    cells.push_back({{lo1, hi1}, 1.0});
    cells.push_back({{lo2, hi2}, 1.5});
    suite.push_back({"two_clusters", BoxMeasure(d, cells, {}, 1.0), false});
  }
  // seeded random boxes
  {
    std::mt19937_64 rng(splitmix64(seed ^ 0x5151ULL));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Cell> cells;
    for (int i = 0; i < 6; ++i) {
      Vec lo(d), hi(d);
      for (int k = 0; k < d; ++k) {
        const double c = -0.45 + 0.9 * unif(rng);
        const double s = 0.08 + 0.22 * unif(rng);
        lo[k] = c - 0.5 * s;
        hi[k] = c + 0.5 * s;
      }
      cells.push_back({{lo, hi}, 0.3 + unif(rng)});
    }
    suite.push_back({"random_boxes", BoxMeasure(d, cells, {}, 1.0), false});
  }
  return suite;
}

}  // namespace fraclab::experiments
