// Energy integrals, decay averages, and the Riesz-side Monte Carlo estimator.
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fraclab/measures.hpp"
#include "fraclab/parallel.hpp"
#include "quadrature.hpp"

namespace fraclab::measures {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double sphere_surface(int d) {
  switch (d) {
    case 1: return 2.0;        // S^0: two points
    case 2: return kTwoPi;     // S^1
    case 3: return 4.0 * kPi;  // S^2
    default: throw std::invalid_argument("sphere_surface: unsupported dimension");
  }
}

// Flattened cell view (families contribute their base geometry with a count).
struct CellView {
  const Cell* cell;
  double count;
};

std::vector<CellView> cell_views(const BoxMeasure& nu) {
  std::vector<CellView> v;
  v.reserve(nu.cells().size() + nu.families().size());
  for (const Cell& c : nu.cells()) v.push_back({&c, 1.0});
  for (const Family& f : nu.families()) v.push_back({&f.base, f.virtual_count()});
  return v;
}

// Total variation of a 1-d box density: |nu^(xi)| <= TV / |xi|. Adjacent
// explicit cells only contribute their density jump; family cells are
// counted as disjoint.
double total_variation_1d(const BoxMeasure& one_d) {
  struct Seg {
    double lo, hi, rho;
  };
  std::vector<Seg> segs;
  for (const Cell& c : one_d.cells()) segs.push_back({c.box.lo[0], c.box.hi[0], c.density});
  std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.lo < b.lo; });
  double tv = 0.0, level = 0.0;
  double prev_hi = -std::numeric_limits<double>::infinity();
  const double glue = 1e-9 * std::max(1.0, one_d.r_supp());
  for (const Seg& s : segs) {
    if (s.lo - prev_hi > glue) {
      tv += level;  // close the previous block down to zero
      level = 0.0;
    }
    tv += std::abs(s.rho - level);
    level = s.rho;
    prev_hi = s.hi;
  }
  tv += level;
  for (const Family& f : one_d.families()) tv += 2.0 * f.base.density * f.virtual_count();
  return tv;
}

// U_k = sum over cells of rho * prod_{l != k} side_l  (per-axis decay mass).
std::vector<double> axis_decay_masses(const BoxMeasure& nu) {
  const int d = nu.dim();
  std::vector<double> U(static_cast<size_t>(d), 0.0);
  for (const CellView& cv : cell_views(nu)) {
    for (int k = 0; k < d; ++k) {
      double p = cv.cell->density * cv.count;
      for (int l = 0; l < d; ++l) {
        if (l == k) continue;
        p *= cv.cell->box.hi[l] - cv.cell->box.lo[l];
      }
      U[static_cast<size_t>(k)] += p;
    }
  }
  return U;
}

// W_k = min over l != k of sum rho * prod_{m not in {k,l}} side_m.
std::vector<double> two_axis_decay_masses(const BoxMeasure& nu) {
  const int d = nu.dim();
  std::vector<double> W(static_cast<size_t>(d), std::numeric_limits<double>::infinity());
  if (d < 2) return W;
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      if (l == k) continue;
      double s = 0.0;
      for (const CellView& cv : cell_views(nu)) {
        double p = cv.cell->density * cv.count;
        for (int m = 0; m < d; ++m) {
          if (m == k || m == l) continue;
          p *= cv.cell->box.hi[m] - cv.cell->box.lo[m];
        }
        s += p;
      }
      W[static_cast<size_t>(k)] = std::min(W[static_cast<size_t>(k)], s);
    }
  }
  return W;
}

// Union bound on int_{|xi|>cutoff} |nu^|^2 |xi|^{alpha-d} dxi from the
// per-axis decay |box factor| <= 2/|xi_k| (single- and two-axis variants).
double full_space_tail_bound(const BoxMeasure& nu, double alpha, double cutoff) {
  const int d = nu.dim();
  const double T = cutoff / std::sqrt(static_cast<double>(d));
  if (d == 1) {
    const double tv = total_variation_1d(nu);
    return 2.0 * tv * tv * std::pow(T, alpha - 2.0) / (2.0 - alpha);
  }
  const auto U = axis_decay_masses(nu);
  const auto W = two_axis_decay_masses(nu);
  double tail = 0.0;
  for (int k = 0; k < d; ++k) {
    double best = std::numeric_limits<double>::infinity();
    if (alpha < 2.0) {
      best = std::min(best, std::pow(2.0, d) * 4.0 * U[static_cast<size_t>(k)] *
                                U[static_cast<size_t>(k)] * std::pow(T, alpha - 2.0) /
                                (2.0 - alpha));
    }
    if (d >= 2 && alpha < 3.0) {
      best = std::min(best, std::pow(2.0, d + 3) * W[static_cast<size_t>(k)] *
                                U[static_cast<size_t>(k)] * std::pow(T, alpha - 3.0) /
                                (3.0 - alpha));
    }
    if (!std::isfinite(best))
      throw std::invalid_argument("fourier_energy: no convergent tail bound for this alpha");
    tail += best;
  }
  return tail;
}

struct RadialGrid {
  std::vector<double> r, w;  // midpoint log grid
};

RadialGrid log_radial_grid(double r_lo, double r_hi, int points_per_decade) {
  RadialGrid g;
  const double span = std::log(r_hi / r_lo);
  const long n = std::max(4L, static_cast<long>(std::ceil(span / std::numbers::ln10 *
                                                          points_per_decade)));
  const double dl = span / static_cast<double>(n);
  g.r.reserve(static_cast<size_t>(n));
  g.w.reserve(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double r = r_lo * std::exp((static_cast<double>(i) + 0.5) * dl);
    g.r.push_back(r);
    g.w.push_back(r * dl);
  }
  return g;
}

// Angular average of |nu^(r omega)|^2 against surface measure on S^{d-1},
// with node counts that track the oscillation scale r * r_supp.
double angular_integral(const BoxMeasure& nu, double r, int order) {
  const int d = nu.dim();
  const double rr = r * nu.r_supp();
  if (d == 1) {
    Vec xi{r};
    return 2.0 * std::norm(fourier_transform(nu, xi));
  }
  if (d == 2) {
    const long m = std::max<long>(order, static_cast<long>(std::ceil(4.0 * rr)));
    double s = 0.0;
    for (long j = 0; j < m; ++j) {
      const double phi = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
      Vec xi{r * std::cos(phi), r * std::sin(phi)};
      s += std::norm(fourier_transform(nu, xi));
    }
    return s * kTwoPi / static_cast<double>(m);
  }
  // d == 3: Gauss-Legendre in the polar cosine x uniform azimuth.
  const int m = std::max<int>(std::max(order / 2, 6),
                              static_cast<int>(std::ceil(0.75 * rr)) + 4);
  static thread_local int cached_m = -1;
  static thread_local quadrature::Rule1D cached_rule;
  if (m != cached_m) {
    cached_rule = quadrature::gauss_legendre(m);
    cached_m = m;
  }
  const int n_az = 2 * m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double u = cached_rule.nodes[static_cast<size_t>(i)];
    const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
    double ring = 0.0;
    for (int j = 0; j < n_az; ++j) {
      const double phi = kTwoPi * (static_cast<double>(j) + 0.5) / n_az;
      Vec xi{r * su * std::cos(phi), r * su * std::sin(phi), r * u};
      ring += std::norm(fourier_transform(nu, xi));
    }
    s += cached_rule.weights[static_cast<size_t>(i)] * ring * kTwoPi / n_az;
  }
  return s;
}

EnergyResult polar_energy(const BoxMeasure& nu, double alpha, const EnergyGrid& grid,
                          double cutoff) {
  const int d = nu.dim();
  const double mass = nu.total_mass();
  const double r_supp = nu.r_supp();
  const double r_min =
      grid.r_min > 0.0 ? grid.r_min : std::min(1e-3 / std::max(1.0, r_supp), cutoff * 1e-4);

  EnergyResult out;
  out.cutoff = cutoff;

  // Analytic head over [0, r_min]: |nu^| = mass * (1 + O(r * r_supp)).
  const double head = mass * mass * sphere_surface(d) * std::pow(r_min, alpha) / alpha;
  double head_slack = head * std::min(1.0, 2.0 * r_min * r_supp + r_min * r_supp * r_min * r_supp);

  double value = head;
  const RadialGrid rg = log_radial_grid(r_min, cutoff, grid.points_per_decade);
  for (size_t i = 0; i < rg.r.size(); ++i) {
    value += rg.w[i] * std::pow(rg.r[i], alpha - 1.0) *
             angular_integral(nu, rg.r[i], grid.angular_order);
  }
  out.value = value;
  out.tail_bound = full_space_tail_bound(nu, alpha, cutoff) + head_slack;
  out.cutoff_adequate = out.tail_bound <= out.value;
  return out;
}

// --- separable (tensor-product) path -------------------------------------

double measure_range(const BoxMeasure& one_d) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const CellView& cv : cell_views(one_d)) {
    lo = std::min(lo, cv.cell->box.lo[0]);
    hi = std::max(hi, cv.cell->box.hi[0]);
  }
  for (const Family& f : one_d.families()) {
    for (const auto& ax : f.axes) {
      const double shift = ax.step[0] * static_cast<double>(ax.count - 1);
      lo = std::min(lo, std::min(f.base.box.lo[0], f.base.box.lo[0] + shift));
      hi = std::max(hi, std::max(f.base.box.hi[0], f.base.box.hi[0] + shift));
    }
  }
  return hi - lo;
}

double l2_density_integral(const BoxMeasure& one_d) {
  // int f^2 dx for the 1-d density (cells assumed disjoint).
  double s = 0.0;
  for (const CellView& cv : cell_views(one_d))
    s += cv.cell->density * cv.cell->density * (cv.cell->box.hi[0] - cv.cell->box.lo[0]) * cv.count;
  return s;
}

double transform_sq_1d(const BoxMeasure& one_d, double xi) {
  Vec v{xi};
  return std::norm(fourier_transform(one_d, v));
}

// I_alpha over the square [-T,T]^2 as an iterated integral: the smooth inner
// profile J(y) = int |A^(x)|^2 (x^2+y^2)^{(alpha-2)/2} dx is tabulated on a
// log grid and the oscillatory outer factor |B^|^2 is swept on a linear grid
// finer than its fastest frequency.
EnergyResult separable_energy(const BoxMeasure& nu, double alpha, const EnergyGrid& grid,
                              double cutoff) {
  const BoxMeasure& A = nu.product_factors()[0];
  const BoxMeasure& B = nu.product_factors()[1];
  const double T = cutoff;

  const double freq_a = std::max(measure_range(A), 1e-12);
  const double step_a = (kTwoPi / freq_a) / 4.371;

  auto inner_j = [&](double y) {
    double s = 0.0;
    // decade panels from near zero to T, each sampled at least 24 times and
    // finely enough for the oscillation of |A^|^2
    double lo = std::max(1e-12, T * 1e-15);
    while (lo < T) {
      double hi = std::min(T, lo * 10.0);
      const long n = std::max<long>(24, static_cast<long>(std::ceil((hi - lo) / step_a)));
      const double h = (hi - lo) / static_cast<double>(n);
      for (long i = 0; i < n; ++i) {
        const double x = lo + (static_cast<double>(i) + 0.5) * h;
        s += h * transform_sq_1d(A, x) * std::pow(x * x + y * y, 0.5 * (alpha - 2.0));
      }
      lo = hi;
    }
    return 2.0 * s;
  };

  // J on a log grid in y, linearly interpolated in log y.
  const double y_lo = std::max(1e-9, T * 1e-13);
  const int per_decade = std::max(24, grid.points_per_decade / 2);
  const double log_lo = std::log(y_lo), log_hi = std::log(T);
  const long n_j = std::max<long>(8, static_cast<long>(std::ceil(
                                         (log_hi - log_lo) / std::numbers::ln10 * per_decade)));
  const double dlog = (log_hi - log_lo) / static_cast<double>(n_j);
  std::vector<double> jtab(static_cast<size_t>(n_j) + 1);
  for (long i = 0; i <= n_j; ++i)
    jtab[static_cast<size_t>(i)] = inner_j(std::exp(log_lo + dlog * static_cast<double>(i)));
  auto j_interp = [&](double y) {
    const double t = (std::log(std::max(y, y_lo)) - log_lo) / dlog;
    const long i = std::min<long>(n_j - 1, std::max<long>(0, static_cast<long>(t)));
    const double f = std::min(1.0, std::max(0.0, t - static_cast<double>(i)));
    return jtab[static_cast<size_t>(i)] * (1.0 - f) + jtab[static_cast<size_t>(i + 1)] * f;
  };

  const double freq_b = std::max(measure_range(B), 1e-12);
  const double step_b = (kTwoPi / freq_b) / 5.371;

  double value = 0.0;
  // refined segment near y = 0 where J varies logarithmically
  const double y_split = std::min(T, 8.0 * kTwoPi / freq_b);
  {
    const double h = step_b / 16.0;
    const long n = static_cast<long>(std::ceil(y_split / h));
    for (long i = 0; i < n; ++i) {
      const double y = (static_cast<double>(i) + 0.5) * h;
      if (y >= y_split) break;
      value += h * transform_sq_1d(B, y) * j_interp(y);
    }
  }
  if (y_split < T) {
    const long n = static_cast<long>(std::ceil((T - y_split) / step_b));
    const double h = (T - y_split) / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
      const double y = y_split + (static_cast<double>(i) + 0.5) * h;
      value += h * transform_sq_1d(B, y) * j_interp(y);
    }
  }
  value *= 2.0;

  // Union tail over the complement of the square: for each coordinate,
  // total-variation decay on that coordinate times exact Plancherel on the
  // other.
  const double tva = total_variation_1d(A), tvb = total_variation_1d(B);
  const double ea = kTwoPi * l2_density_integral(A);
  const double eb = kTwoPi * l2_density_integral(B);
  double tail = 0.0;
  tail += 2.0 * tva * tva * std::pow(T, alpha - 3.0) / (3.0 - alpha) * eb;
  tail += 2.0 * tvb * tvb * std::pow(T, alpha - 3.0) / (3.0 - alpha) * ea;

  EnergyResult out;
  out.value = value;
  out.tail_bound = tail;
  out.cutoff = cutoff;
  out.cutoff_adequate = tail <= value;
  return out;
}

}  // namespace

EnergyResult fourier_energy(const BoxMeasure& nu, double alpha, const EnergyGrid& grid,
                            double cutoff) {
  const int d = nu.dim();
  if (!(alpha > 0.0) || alpha > static_cast<double>(d))
    throw std::invalid_argument("fourier_energy: alpha must lie in (0, d]");
  if (!(cutoff >= 10.0 / nu.min_cell_side()))
    throw std::invalid_argument("fourier_energy: cutoff below 10x reciprocal smallest cell side");
  if (grid.allow_separable && d == 2 && nu.product_factors().size() == 2 && alpha <= 2.0)
    return separable_energy(nu, alpha, grid, cutoff);
  return polar_energy(nu, alpha, grid, cutoff);
}

EnergyResult hyperplane_energy(const BoxMeasure& nu, const Mat& B, double alpha,
                               const EnergyGrid& grid, double cutoff) {
  const int n = B.rows, d = B.cols;
  if (d != nu.dim() || n < 1 || n > 2)
    throw std::invalid_argument("hyperplane_energy: bad hyperplane basis shape");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += B(i, k) * B(j, k);
      if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-10)
        throw std::invalid_argument("hyperplane_energy: rows must be orthonormal");
    }
  return projected_energy(nu, B, alpha, grid, cutoff);
}

EnergyResult projected_energy(const BoxMeasure& nu, const Mat& B, double alpha,
                              const EnergyGrid& grid, double cutoff) {
  const int n = B.rows, d = B.cols;
  if (d != nu.dim() || n < 1 || n > 2)
    throw std::invalid_argument("projected_energy: bad projection shape");
  if (!(alpha > 0.0) || alpha > static_cast<double>(n))
    throw std::invalid_argument("projected_energy: alpha must lie in (0, n]");

  const double mass = nu.total_mass();
  // support radius of the pushforward, via the Frobenius norm of P
  double fro = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) fro += B(i, j) * B(i, j);
  const double r_supp = nu.r_supp() * std::sqrt(fro);
  const double r_min =
      grid.r_min > 0.0 ? grid.r_min : std::min(1e-3 / std::max(1.0, r_supp), cutoff * 1e-4);

  auto eval_sq = [&](const Vec& eta) { return std::norm(pushforward_transform(nu, B, eta)); };

  double value = mass * mass * sphere_surface(n) * std::pow(r_min, alpha) / alpha;
  double head_slack =
      value * std::min(1.0, 2.0 * r_min * r_supp + r_min * r_supp * r_min * r_supp);

  const RadialGrid rg = log_radial_grid(r_min, cutoff, grid.points_per_decade);
  for (size_t i = 0; i < rg.r.size(); ++i) {
    const double r = rg.r[i];
    double ang;
    if (n == 1) {
      Vec eta{r};
      ang = 2.0 * eval_sq(eta);
    } else {
      const long m = std::max<long>(grid.angular_order,
                                    static_cast<long>(std::ceil(4.0 * r * r_supp)));
      double s = 0.0;
      for (long j = 0; j < m; ++j) {
        const double phi = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
        Vec eta{r * std::cos(phi), r * std::sin(phi)};
        s += eval_sq(eta);
      }
      ang = s * kTwoPi / static_cast<double>(m);
    }
    value += rg.w[i] * std::pow(r, alpha - 1.0) * ang;
  }

  // Direction-resolved envelope tail: env(r, omega) from per-axis decay of
  // the transform along xi = B^T(r omega), integrated on a log grid with a
  // power-law extrapolation for the far tail.
  const auto views = cell_views(nu);
  auto envelope = [&](double r, const Vec& omega) {
    Vec xi = apply_transpose(B, omega);
    double s = 0.0;
    for (const CellView& cv : views) {
      double p = cv.cell->density * cv.count;
      for (int k = 0; k < d; ++k) {
        const double side = cv.cell->box.hi[k] - cv.cell->box.lo[k];
        const double decay = std::abs(r * xi[k]) > 1e-300 ? 2.0 / std::abs(r * xi[k]) : side;
        p *= std::min(side, decay);
      }
      s += p;
    }
    return s;
  };
  const int n_dirs = (n == 1) ? 1 : 64;
  double tail = 0.0;
  for (int jd = 0; jd < n_dirs; ++jd) {
    Vec omega(n);
    double wdir;
    if (n == 1) {
      omega[0] = 1.0;
      wdir = 2.0;
    } else {
      const double phi = kTwoPi * (jd + 0.5) / n_dirs;
      omega[0] = std::cos(phi);
      omega[1] = std::sin(phi);
      wdir = kTwoPi / n_dirs;
    }
    const RadialGrid tg = log_radial_grid(cutoff, cutoff * 1e5, 16);
    double acc = 0.0;
    double f_prev = 0.0, r_prev = 0.0;
    for (size_t i = 0; i < tg.r.size(); ++i) {
      const double r = tg.r[i];
      const double e = envelope(r, omega);
      const double f = e * e * std::pow(r, alpha - 1.0);
      acc += tg.w[i] * f;
      f_prev = f;
      r_prev = r;
    }
    // extrapolate the remainder assuming the last-step power law
    const double r0 = tg.r[tg.r.size() - 2];
    const double f0 = envelope(r0, omega) * envelope(r0, omega) * std::pow(r0, alpha - 1.0);
    double rest = 0.0;
    if (f_prev > 0.0 && f0 > 0.0) {
      const double p = std::log(f_prev / f0) / std::log(r_prev / r0);
      rest = (p < -1.05) ? f_prev * r_prev / (-p - 1.0) : f_prev * r_prev * 20.0;
    }
    tail += wdir * (acc + rest);
  }
  tail *= 1.25;

  EnergyResult out;
  out.value = value;
  out.tail_bound = tail + head_slack;
  out.cutoff = cutoff;
  out.cutoff_adequate = out.tail_bound <= out.value;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Cell> expanded_cells(const BoxMeasure& nu, size_t cap) {
  if (nu.virtual_cell_count() > static_cast<double>(cap))
    throw std::invalid_argument("riesz_energy: too many cells to expand");
  std::vector<Cell> cells(nu.cells().begin(), nu.cells().end());
  for (const Family& f : nu.families()) {
    std::vector<long> idx(f.axes.size(), 0);
    while (true) {
      Cell c = f.base;
      for (size_t a = 0; a < f.axes.size(); ++a) {
        Vec shift = static_cast<double>(idx[a]) * f.axes[a].step;
        c.box.lo += shift;
        c.box.hi += shift;
      }
      cells.push_back(c);
      size_t a = 0;
      for (; a < f.axes.size(); ++a) {
        if (++idx[a] < f.axes[a].count) break;
        idx[a] = 0;
      }
      if (a == f.axes.size()) break;
    }
  }
  return cells;
}

// int over box x box of |x-y|^{-alpha} for one box against itself, as the
// correlation integral int |z|^{-alpha} prod_k (w_k - |z_k|)_+ dz.
double self_pair_integral(const Box& b, double alpha) {
  const int d = b.lo.dim;
  std::vector<double> w(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) w[static_cast<size_t>(k)] = b.hi[k] - b.lo[k];
  if (d == 1) {
    // 2 w^{2-alpha} / ((1-alpha)(2-alpha)), alpha < 1
    return 2.0 * std::pow(w[0], 2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha));
  }
  const auto gl = quadrature::gauss_legendre(32);
  if (d == 2) {
    double s = 0.0;
    const int n_phi = 64;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = kTwoPi * (j + 0.5) / n_phi;
      const double c = std::cos(phi), sn = std::sin(phi);
      double rmax = std::numeric_limits<double>::infinity();
      if (std::abs(c) > 1e-15) rmax = std::min(rmax, w[0] / std::abs(c));
      if (std::abs(sn) > 1e-15) rmax = std::min(rmax, w[1] / std::abs(sn));
      const auto rq = quadrature::rescale(gl, 0.0, rmax);
      double sr = 0.0;
      for (size_t i = 0; i < rq.nodes.size(); ++i) {
        const double r = rq.nodes[i];
        sr += rq.weights[i] * std::pow(r, 1.0 - alpha) * (w[0] - r * std::abs(c)) *
              (w[1] - r * std::abs(sn));
      }
      s += sr * kTwoPi / n_phi;
    }
    return s;
  }
  // d == 3
  double s = 0.0;
  const auto glu = quadrature::gauss_legendre(16);
  const int n_phi = 32;
  for (size_t iu = 0; iu < glu.nodes.size(); ++iu) {
    const double u = glu.nodes[iu];
    const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = kTwoPi * (j + 0.5) / n_phi;
      Vec dir{su * std::cos(phi), su * std::sin(phi), u};
      double rmax = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k)
        if (std::abs(dir[k]) > 1e-15)
          rmax = std::min(rmax, w[static_cast<size_t>(k)] / std::abs(dir[k]));
      const auto rq = quadrature::rescale(gl, 0.0, rmax);
      double sr = 0.0;
      for (size_t i = 0; i < rq.nodes.size(); ++i) {
        const double r = rq.nodes[i];
        double tent = 1.0;
        for (int k = 0; k < 3; ++k) tent *= w[static_cast<size_t>(k)] - r * std::abs(dir[k]);
        sr += rq.weights[i] * std::pow(r, 2.0 - alpha) * tent;
      }
      s += glu.weights[iu] * sr * kTwoPi / n_phi;
    }
  }
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RieszResult riesz_energy(const BoxMeasure& nu, double alpha, long sample_budget,
                         std::uint64_t seed) {
  const int d = nu.dim();
  if (!(alpha > 0.0) || alpha >= static_cast<double>(d))
    throw std::invalid_argument("riesz_energy: alpha must lie in (0, d)");
  const auto cells = expanded_cells(nu, 20000);
  const size_t n = cells.size();

  RieszResult out;
  for (const Cell& c : cells)
    out.self_value += c.density * c.density * self_pair_integral(c.box, alpha);

  const size_t pairs = n * (n - 1) / 2;
  const long k_per =
      pairs == 0 ? 0 : std::max<long>(8, sample_budget / static_cast<long>(pairs));
  double cross = 0.0, var_sum = 0.0;
  size_t pair_index = 0;
  for (size_t i = 0; i < n; ++i) {
    const double m_i = cells[i].density * box_volume(cells[i].box);
    for (size_t j = i + 1; j < n; ++j, ++pair_index) {
      const double m_j = cells[j].density * box_volume(cells[j].box);
      if (m_i * m_j == 0.0) continue;
      std::mt19937_64 rng(splitmix64(seed ^ (0x1234'5678ULL + pair_index)));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      double s = 0.0, s2 = 0.0;
      for (long k = 0; k < k_per; ++k) {
        Vec x(d), y(d);
        for (int t = 0; t < d; ++t)
          x[t] = cells[i].box.lo[t] + unif(rng) * (cells[i].box.hi[t] - cells[i].box.lo[t]);
        for (int t = 0; t < d; ++t)
          y[t] = cells[j].box.lo[t] + unif(rng) * (cells[j].box.hi[t] - cells[j].box.lo[t]);
        const double g = std::pow(norm(x - y), -alpha);
        s += g;
        s2 += g * g;
      }
      const double mean = s / static_cast<double>(k_per);
      const double var =
          std::max(0.0, s2 / static_cast<double>(k_per) - mean * mean) / static_cast<double>(k_per);
      cross += 2.0 * m_i * m_j * mean;
      var_sum += 4.0 * m_i * m_j * m_i * m_j * var;
    }
  }
  out.value = out.self_value + cross;
  out.std_error = std::sqrt(var_sum);
  return out;
}

double energy_constant(int d, double alpha) {
  if (d < 1 || d > 3 || !(alpha > 0.0) || !(alpha < static_cast<double>(d)))
    throw std::invalid_argument("energy_constant: need d in {1,2,3}, 0 < alpha < d");
  const double sigma = sphere_surface(d);
  const double i_gauss = std::pow(kPi, d) * sigma * std::pow(2.0, 0.5 * alpha - 1.0) *
                         std::tgamma(0.5 * alpha);
  const double e_gauss = std::pow(0.5 * kPi, 0.5 * d) * sigma *
                         std::pow(2.0, 0.5 * (d - alpha) - 1.0) *
                         std::tgamma(0.5 * (d - alpha));
  return i_gauss / e_gauss;
}

// ---------------------------------------------------------------------------
// surface quadratures and decay averages

namespace {

SurfaceQuadrature disc_polar_quadrature(Surface surface, double u_lo, double u_hi, int order) {
  // area element r dr dphi = du dphi with u = r^2/2; exact weight sum.
  SurfaceQuadrature q;
  q.surface = surface;
  q.param_dim = 2;
  const int m_r = order;
  const int m_phi = 2 * order;
  const double du = (u_hi - u_lo) / m_r;
  const double dphi = kTwoPi / m_phi;
  for (int i = 0; i < m_r; ++i) {
    const double u = u_lo + (i + 0.5) * du;
    const double r = std::sqrt(2.0 * u);
    for (int j = 0; j < m_phi; ++j) {
      const double phi = dphi * (j + 0.5);
      q.nodes.push_back(Vec{r * std::cos(phi), r * std::sin(phi)});
      q.weights.push_back(du * dphi);
    }
    q.max_spacing = std::max(q.max_spacing, std::max(du / std::max(r, 1e-9), r * dphi));
  }
  return q;
}

}  // namespace

SurfaceQuadrature paraboloid_quadrature(int n, int order) {
  if (order < 4) throw std::invalid_argument("surface quadrature: order must be >= 4");
  SurfaceQuadrature q;
  q.surface = Surface::kParaboloid;
  if (n == 1) {
    q.param_dim = 1;
    const double h = 2.0 / order;
    for (int i = 0; i < order; ++i) {
      q.nodes.push_back(Vec{-1.0 + (i + 0.5) * h});
      q.weights.push_back(h);
    }
    q.max_spacing = h;
    return q;
  }
  if (n == 2) return disc_polar_quadrature(Surface::kParaboloid, 0.0, 0.5, order);
  throw std::invalid_argument("surface quadrature: n must be 1 or 2");
}

SurfaceQuadrature cone_quadrature(int n, int order) {
  if (order < 4) throw std::invalid_argument("surface quadrature: order must be >= 4");
  SurfaceQuadrature q;
  q.surface = Surface::kCone;
  if (n == 1) {
    q.param_dim = 1;
    const double h = 0.5 / order;
    for (int side = 0; side < 2; ++side) {
      const double lo = side == 0 ? -1.0 : 0.5;
      for (int i = 0; i < order; ++i) {
        q.nodes.push_back(Vec{lo + (i + 0.5) * h});
        q.weights.push_back(h);
      }
    }
    q.max_spacing = h;
    return q;
  }
  if (n == 2) return disc_polar_quadrature(Surface::kCone, 0.125, 0.5, order);
  throw std::invalid_argument("surface quadrature: n must be 1 or 2");
}

namespace {

double surface_decay(const BoxMeasure& nu, double R, const SurfaceQuadrature& quad, bool cone,
                     int workers) {
  if (!(R >= 1.0)) throw std::invalid_argument("surface decay: R must be >= 1");
  if (nu.dim() != quad.param_dim + 1)
    throw std::invalid_argument("surface decay: measure dimension must be param_dim + 1");
  std::vector<double> vals(quad.nodes.size());
  parallel_for(quad.nodes.size(), workers, [&](size_t i) {
    const Vec& p = quad.nodes[i];
    Vec xi(nu.dim());
    for (int k = 0; k < quad.param_dim; ++k) xi[k] = R * p[k];
    xi[quad.param_dim] = R * (cone ? norm(p) : norm2(p));
    vals[i] = std::norm(fourier_transform(nu, xi));
  });
  double s = 0.0;
  for (size_t i = 0; i < vals.size(); ++i) s += quad.weights[i] * vals[i];
  return s;
}

}  // namespace

double parabolic_decay(const BoxMeasure& nu, double R, const SurfaceQuadrature& quad,
                       int workers) {
  return surface_decay(nu, R, quad, false, workers);
}

double cone_decay(const BoxMeasure& nu, double R, const SurfaceQuadrature& quad, int workers) {
  return surface_decay(nu, R, quad, true, workers);
}

}  // namespace fraclab::measures
