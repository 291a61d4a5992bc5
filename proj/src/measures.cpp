#include "fraclab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fraclab::measures {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce(double phase) { return std::remainder(phase, kTwoPi); }

Complex cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

// One axis factor of a box transform around its center:
//   int_{c-h}^{c+h} e^{-i xi x} dx = e^{-i xi c} * 2 sin(xi h)/xi.
Complex axis_factor(double xi, double c, double h) {
  double mag;
  const double u = xi * h;
  if (std::abs(u) < 1e-8) {
    mag = 2.0 * h * (1.0 - u * u / 6.0);
  } else {
    mag = 2.0 * std::sin(u) / xi;
  }
  return mag * cis(-reduce(xi * c));
}

// sum_{m=0}^{count-1} e^{-i m phi}  (Dirichlet form). All half-angles are
// reduced mod 2*pi only, which the periodicity of sin/cos permits.
Complex geometric_sum(double phi, long count) {
  const double psi = reduce(phi);
  const double s2 = std::sin(0.5 * psi);
  const double half_span = reduce(0.5 * (static_cast<double>(count) - 1.0) * psi);
  if (std::abs(s2) < 1e-12) return static_cast<double>(count) * cis(-half_span);
  const double mag = std::sin(reduce(0.5 * static_cast<double>(count) * psi)) / s2;
  return mag * cis(-half_span);
}

void validate_box(const Box& b, int dim) {
  if (b.lo.dim != dim || b.hi.dim != dim || !all_finite(b.lo) || !all_finite(b.hi))
    throw std::invalid_argument("box measure: bad box");
  for (int k = 0; k < dim; ++k)
    if (!(b.hi[k] > b.lo[k])) throw std::invalid_argument("box measure: box sides must be positive");
}

double corner_radius(const Box& b) {
  double s = 0.0;
  for (int k = 0; k < b.lo.dim; ++k) {
    double m = std::max(std::abs(b.lo[k]), std::abs(b.hi[k]));
    s += m * m;
  }
  return std::sqrt(s);
}

}  // namespace

BoxMeasure::BoxMeasure(int dim, std::vector<Cell> cells, std::vector<Family> families,
                       double r_supp)
    : dim_(dim), cells_(std::move(cells)), families_(std::move(families)), r_supp_(r_supp) {
  if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("box measure: bad dimension");
  if (!(r_supp_ > 0.0) || !std::isfinite(r_supp_))
    throw std::invalid_argument("box measure: bad support radius");
  if (cells_.empty() && families_.empty())
    throw std::invalid_argument("box measure: needs at least one cell");

  min_cell_side_ = std::numeric_limits<double>::infinity();
  auto take_cell = [&](const Cell& c, double count) {
    validate_box(c.box, dim_);
    if (!(c.density >= 0.0) || !std::isfinite(c.density))
      throw std::invalid_argument("box measure: bad density");
    total_mass_ += c.density * box_volume(c.box) * count;
    max_density_ = std::max(max_density_, c.density);
    for (int k = 0; k < dim_; ++k)
      min_cell_side_ = std::min(min_cell_side_, c.box.hi[k] - c.box.lo[k]);
  };

  for (const Cell& c : cells_) {
    take_cell(c, 1.0);
    if (corner_radius(c.box) > r_supp_ * (1.0 + 1e-12))
      throw std::invalid_argument("box measure: cell outside declared support ball");
  }
  for (const Family& f : families_) {
    take_cell(f.base, f.virtual_count());
    if (f.axes.empty()) throw std::invalid_argument("box measure: family needs a step axis");
    for (const auto& ax : f.axes) {
      if (ax.step.dim != dim_ || !all_finite(ax.step) || ax.count < 1)
        throw std::invalid_argument("box measure: bad family axis");
    }
    // All extreme translates must stay inside the support ball.
    const size_t n_axes = f.axes.size();
    for (size_t mask = 0; mask < (size_t{1} << n_axes); ++mask) {
      Box b = f.base.box;
      for (size_t a = 0; a < n_axes; ++a) {
        if (mask & (size_t{1} << a)) {
          Vec shift = static_cast<double>(f.axes[a].count - 1) * f.axes[a].step;
          b.lo += shift;
          b.hi += shift;
        }
      }
      if (corner_radius(b) > r_supp_ * (1.0 + 1e-12))
        throw std::invalid_argument("box measure: family cell outside declared support ball");
    }
  }
  if (!(total_mass_ > 0.0) || !std::isfinite(total_mass_))
    throw std::invalid_argument("box measure: total mass must be positive and finite");
}

double BoxMeasure::virtual_cell_count() const {
  double n = static_cast<double>(cells_.size());
  for (const Family& f : families_) n += f.virtual_count();
  return n;
}

void BoxMeasure::annotate_product(std::vector<BoxMeasure> factors) {
  if (static_cast<int>(factors.size()) != dim_)
    throw std::invalid_argument("product annotation: need one 1-d factor per axis");
  for (const auto& f : factors)
    if (f.dim() != 1) throw std::invalid_argument("product annotation: factors must be 1-d");
  factors_ = std::move(factors);
}

BoxMeasure BoxMeasure::scaled(double scale) const {
  if (!(scale > 0.0)) throw std::invalid_argument("scaled: scale must be positive");
  auto scale_cell = [&](Cell c) {
    c.box.lo *= scale;
    c.box.hi *= scale;
    c.density /= std::pow(scale, dim_);
    return c;
  };
  std::vector<Cell> cells;
  cells.reserve(cells_.size());
  for (const Cell& c : cells_) cells.push_back(scale_cell(c));
  std::vector<Family> families = families_;
  for (Family& f : families) {
    f.base = scale_cell(f.base);
    for (auto& ax : f.axes) ax.step *= scale;
  }
  BoxMeasure out(dim_, std::move(cells), std::move(families), r_supp_ * scale);
  if (!factors_.empty()) {
    std::vector<BoxMeasure> fs;
    fs.reserve(factors_.size());
    for (const auto& f : factors_) fs.push_back(f.scaled(scale));
    // 1-d factor densities each picked up 1/scale; the product changed by
    // scale^{-d} as required.
    out.annotate_product(std::move(fs));
  }
  return out;
}

Complex fourier_transform(const BoxMeasure& nu, const Vec& xi) {
  if (xi.dim != nu.dim()) throw std::invalid_argument("fourier_transform: dimension mismatch");
  const int d = nu.dim();
  Complex sum = 0.0;
  for (const Cell& c : nu.cells()) {
    Complex f = c.density;
    for (int k = 0; k < d; ++k)
      f *= axis_factor(xi[k], 0.5 * (c.box.lo[k] + c.box.hi[k]), 0.5 * (c.box.hi[k] - c.box.lo[k]));
    sum += f;
  }
  for (const Family& fam : nu.families()) {
    Complex f = fam.base.density;
    for (int k = 0; k < d; ++k)
      f *= axis_factor(xi[k], 0.5 * (fam.base.box.lo[k] + fam.base.box.hi[k]),
                       0.5 * (fam.base.box.hi[k] - fam.base.box.lo[k]));
    for (const auto& ax : fam.axes) f *= geometric_sum(dot(xi, ax.step), ax.count);
    sum += f;
  }
  return sum;
}

Complex pushforward_transform(const BoxMeasure& nu, const Mat& P, const Vec& eta) {
  if (P.cols != nu.dim() || P.rows != eta.dim)
    throw std::invalid_argument("pushforward_transform: dimension mismatch");
  return fourier_transform(nu, apply_transpose(P, eta));
}

namespace {

struct WorkBox {
  Box box;
  double mass;
};

// squared min/max distance from x to box
void box_ball_distances(const Box& b, const Vec& x, double& min2, double& max2) {
  min2 = 0.0;
  max2 = 0.0;
  for (int k = 0; k < b.lo.dim; ++k) {
    const double lo = b.lo[k] - x[k];
    const double hi = b.hi[k] - x[k];
    const double mn = (lo > 0.0) ? lo : ((hi < 0.0) ? -hi : 0.0);
    const double mx = std::max(std::abs(lo), std::abs(hi));
    min2 += mn * mn;
    max2 += mx * mx;
  }
}

// Enumerate the cells of `nu` whose boxes can intersect B(x, r); families are
// restricted to the index ranges near the ball.
template <typename Fn>
void for_each_cell_near(const BoxMeasure& nu, const Vec& x, double r, long budget, Fn&& fn) {
  for (const Cell& c : nu.cells()) fn(c);
  const int d = nu.dim();
  for (const Family& fam : nu.families()) {
    // Per-axis admissible index windows from the projections onto each step
    // direction (steps here are axis-aligned or at least independent; the
    // window test below is conservative via per-coordinate intervals).
    std::vector<long> lo_idx(fam.axes.size()), hi_idx(fam.axes.size());
    double total = 1.0;
    for (size_t a = 0; a < fam.axes.size(); ++a) {
      const auto& ax = fam.axes[a];
      long lo = 0, hi = ax.count - 1;
      // Find a coordinate along which this axis actually moves.
      int kk = -1;
      double sk = 0.0;
      for (int k = 0; k < d; ++k) {
        if (std::abs(ax.step[k]) > sk) {
          sk = std::abs(ax.step[k]);
          kk = k;
        }
      }
      if (kk >= 0) {
        // Range of m with base.box + m*step within r of x along coordinate kk,
        // padded by the spread the other axes can contribute.
        double other = 0.0;
        for (size_t b2 = 0; b2 < fam.axes.size(); ++b2) {
          if (b2 == a) continue;
          other += std::abs(fam.axes[b2].step[kk]) * static_cast<double>(fam.axes[b2].count - 1);
        }
        const double w = fam.base.box.hi[kk] - fam.base.box.lo[kk];
        const double c0 = 0.5 * (fam.base.box.lo[kk] + fam.base.box.hi[kk]);
        const double slack = r + 0.5 * w + other;
        const double m_lo = (x[kk] - slack - c0) / ax.step[kk];
        const double m_hi = (x[kk] + slack - c0) / ax.step[kk];
        lo = static_cast<long>(std::floor(std::min(m_lo, m_hi)));
        hi = static_cast<long>(std::ceil(std::max(m_lo, m_hi)));
        lo = std::max(lo, 0L);
        hi = std::min(hi, ax.count - 1);
      }
      if (lo > hi) {
        total = 0.0;
        break;
      }
      lo_idx[a] = lo;
      hi_idx[a] = hi;
      total *= static_cast<double>(hi - lo + 1);
    }
    if (total == 0.0) continue;
    if (total > static_cast<double>(budget))
      throw std::runtime_error("ball_mass: family enumeration exceeds budget");
    // Odometer over the admissible index windows.
    std::vector<long> idx = lo_idx;
    while (true) {
      Cell c = fam.base;
      for (size_t a = 0; a < fam.axes.size(); ++a) {
        Vec shift = static_cast<double>(idx[a]) * fam.axes[a].step;
        c.box.lo += shift;
        c.box.hi += shift;
      }
      fn(c);
      size_t a = 0;
      for (; a < fam.axes.size(); ++a) {
        if (++idx[a] <= hi_idx[a]) break;
        idx[a] = lo_idx[a];
      }
      if (a == fam.axes.size()) break;
    }
  }
}

}  // namespace

double ball_mass(const BoxMeasure& nu, const Vec& x, double r, double tol,
                 long enumeration_budget) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_mass: radius must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("ball_mass: tol must be in (0,1)");
  if (x.dim != nu.dim()) throw std::invalid_argument("ball_mass: dimension mismatch");

  const double r2 = r * r;
  double inside = 0.0;
  std::deque<WorkBox> undecided;
  double undecided_mass = 0.0;

  auto classify = [&](const Box& b, double mass) {
    double mn2, mx2;
    box_ball_distances(b, x, mn2, mx2);
    if (mx2 <= r2) {
      inside += mass;
    } else if (mn2 < r2) {
      undecided.push_back({b, mass});
      undecided_mass += mass;
    }
  };

  for_each_cell_near(nu, x, r, enumeration_budget,
                     [&](const Cell& c) { classify(c.box, c.density * box_volume(c.box)); });

  long iterations = 0;
  const long max_iterations = 4'000'000;
  while (!undecided.empty() && undecided_mass > tol * std::max(inside, 1e-300) &&
         iterations < max_iterations) {
    WorkBox wb = undecided.front();
    undecided.pop_front();
    undecided_mass -= wb.mass;
    // split along the longest side
    int k_split = 0;
    double longest = 0.0;
    for (int k = 0; k < nu.dim(); ++k) {
      const double s = wb.box.hi[k] - wb.box.lo[k];
      if (s > longest) {
        longest = s;
        k_split = k;
      }
    }
    const double mid = 0.5 * (wb.box.lo[k_split] + wb.box.hi[k_split]);
    Box left = wb.box, right = wb.box;
    left.hi[k_split] = mid;
    right.lo[k_split] = mid;
    const double lv = box_volume(left), rv = box_volume(right);
    const double denom = lv + rv;
    classify(left, wb.mass * lv / denom);
    classify(right, wb.mass * rv / denom);
    ++iterations;
  }
  return inside + 0.5 * undecided_mass;
}

double box_mass_product(const BoxMeasure& nu, const Vec& lo, const Vec& hi) {
  const auto& factors = nu.product_factors();
  if (factors.empty()) throw std::invalid_argument("box_mass_product: measure is not product-annotated");
  double mass = 1.0;
  for (int k = 0; k < nu.dim(); ++k) {
    const BoxMeasure& f = factors[static_cast<size_t>(k)];
    double m = 0.0;
    auto interval_overlap = [&](double a, double b, double density) {
      const double l = std::max(a, lo[k]);
      const double h = std::min(b, hi[k]);
      if (h > l) m += density * (h - l);
    };
    for (const Cell& c : f.cells()) interval_overlap(c.box.lo[0], c.box.hi[0], c.density);
    for (const Family& fam : f.families()) {
      const auto& ax = fam.axes.at(0);
      const double step = ax.step[0];
      const double a0 = fam.base.box.lo[0];
      const double b0 = fam.base.box.hi[0];
      // indices whose translate [a0,b0]+m*step can meet [lo,hi]
      double m_lo = (lo[k] - b0) / step;
      double m_hi = (hi[k] - a0) / step;
      if (step < 0.0) std::swap(m_lo, m_hi);
      long i0 = std::max(0L, static_cast<long>(std::floor(std::min(m_lo, m_hi))) - 1);
      long i1 = std::min(ax.count - 1, static_cast<long>(std::ceil(std::max(m_lo, m_hi))) + 1);
      if (i1 < i0) continue;
      // full interior cells in one stroke, partial ends explicitly
      const double w = b0 - a0;
      long full_lo = i0, full_hi = i1;
      // tighten to fully-contained range
      while (full_lo <= i1) {
        const double a = a0 + static_cast<double>(full_lo) * step;
        if (a >= lo[k] && a + w <= hi[k]) break;
        interval_overlap(a, a + w, fam.base.density);
        ++full_lo;
      }
      while (full_hi >= full_lo) {
        const double a = a0 + static_cast<double>(full_hi) * step;
        if (a >= lo[k] && a + w <= hi[k]) break;
        interval_overlap(a, a + w, fam.base.density);
        --full_hi;
      }
      if (full_hi >= full_lo)
        m += fam.base.density * w * static_cast<double>(full_hi - full_lo + 1);
    }
    mass *= m;
    if (mass == 0.0) break;
  }
  return mass;
}

MassBracket ball_mass_bracket(const BoxMeasure& nu, const Vec& x, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_mass_bracket: radius must be positive");
  const double d = static_cast<double>(nu.dim());
  Vec lo_in(nu.dim()), hi_in(nu.dim()), lo_out(nu.dim()), hi_out(nu.dim());
  const double rin = r / std::sqrt(d);
  for (int k = 0; k < nu.dim(); ++k) {
    lo_in[k] = x[k] - rin;
    hi_in[k] = x[k] + rin;
    lo_out[k] = x[k] - r;
    hi_out[k] = x[k] + r;
  }
  return {box_mass_product(nu, lo_in, hi_in), box_mass_product(nu, lo_out, hi_out)};
}

CAlphaResult c_alpha(const BoxMeasure& nu, double alpha, const std::vector<Vec>& centers,
                     const std::vector<double>& radii, double ball_tol) {
  if (!(alpha > 0.0)) throw std::invalid_argument("c_alpha: alpha must be positive");
  if (centers.empty() || radii.empty())
    throw std::invalid_argument("c_alpha: centers and radii must be nonempty");
  CAlphaResult best;
  best.value = -1.0;
  for (const Vec& x : centers) {
    for (double r : radii) {
      const double v = std::pow(r, -alpha) * ball_mass(nu, x, r, ball_tol);
      if (v > best.value) {
        best.value = v;
        best.argmax_x = x;
        best.argmax_r = r;
      }
    }
  }
  return best;
}

std::vector<Vec> default_c_alpha_centers(const BoxMeasure& nu, size_t cap) {
  std::vector<Vec> out;
  const int d = nu.dim();
  auto add_cell_points = [&](const Cell& c) {
    Vec center(d);
    for (int k = 0; k < d; ++k) center[k] = 0.5 * (c.box.lo[k] + c.box.hi[k]);
    out.push_back(center);
    for (size_t mask = 0; mask < (size_t{1} << d); ++mask) {
      Vec corner(d);
      for (int k = 0; k < d; ++k)
        corner[k] = (mask & (size_t{1} << k)) ? c.box.hi[k] : c.box.lo[k];
      out.push_back(corner);
    }
  };
  for (const Cell& c : nu.cells()) add_cell_points(c);
  for (const Family& fam : nu.families()) {
    // Deterministic stride through each family so the total stays under cap.
    const double total = fam.virtual_count();
    const long stride = std::max(1L, static_cast<long>(total / 64.0));
    // enumerate along the first axis only, center indices of the rest
    std::vector<long> mid(fam.axes.size());
    for (size_t a = 1; a < fam.axes.size(); ++a) mid[a] = fam.axes[a].count / 2;
    for (long m = 0; m < fam.axes[0].count; m += stride) {
      Cell cc = fam.base;
      Vec shift = static_cast<double>(m) * fam.axes[0].step;
      for (size_t a = 1; a < fam.axes.size(); ++a)
        shift += static_cast<double>(mid[a]) * fam.axes[a].step;
      cc.box.lo += shift;
      cc.box.hi += shift;
      add_cell_points(cc);
    }
  }
  if (out.size() > cap) out.resize(cap);
  return out;
}

std::vector<double> default_c_alpha_radii(const BoxMeasure& nu) {
  // dyadic between the smallest cell side and the support diameter, extended
  // a few octaves below the cell scale where the density sup is attained
  std::vector<double> radii;
  const double r_lo = std::max(nu.min_cell_side() / 64.0, 1e-12);
  const double r_hi = 2.0 * nu.r_supp();
  for (double r = r_lo; r < r_hi; r *= 2.0) radii.push_back(r);
  radii.push_back(r_hi);
  return radii;
}

// ---------------------------------------------------------------------------
// serialization

std::string to_text(const BoxMeasure& nu) {
  std::ostringstream os;
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ' ' << buf;
  };
  os << "dim " << nu.dim() << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", nu.r_supp());
  os << "r_supp " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", nu.max_density());
  os << "rho_max " << buf << '\n';
  const int d = nu.dim();
  for (const Cell& c : nu.cells()) {
    os << "cell";
    for (int k = 0; k < d; ++k) put(c.box.lo[k]);
    for (int k = 0; k < d; ++k) put(c.box.hi[k]);
    put(c.density);
    os << '\n';
  }
  for (const Family& f : nu.families()) {
    os << "family " << f.axes.size() << '\n';
    os << "base";
    for (int k = 0; k < d; ++k) put(f.base.box.lo[k]);
    for (int k = 0; k < d; ++k) put(f.base.box.hi[k]);
    put(f.base.density);
    os << '\n';
    for (const auto& ax : f.axes) {
      os << "step";
      for (int k = 0; k < d; ++k) put(ax.step[k]);
      os << " count " << ax.count << '\n';
    }
  }
  return os.str();
}

BoxMeasure from_text(const std::string& text) {
  std::istringstream is(text);
  std::string key;
  int dim = 0;
  double r_supp = 0.0;
  std::vector<Cell> cells;
  std::vector<Family> families;
  auto read_cell = [&](std::istream& in) {
    Cell c;
    c.box.lo = Vec(dim);
    c.box.hi = Vec(dim);
    for (int k = 0; k < dim; ++k) in >> c.box.lo[k];
    for (int k = 0; k < dim; ++k) in >> c.box.hi[k];
    in >> c.density;
    if (!in) throw std::invalid_argument("box measure parse: bad cell record");
    return c;
  };
  while (is >> key) {
    if (key == "dim") {
      is >> dim;
      if (!is || dim < 1 || dim > kMaxDim) throw std::invalid_argument("box measure parse: bad dim");
    } else if (key == "r_supp") {
      is >> r_supp;
    } else if (key == "rho_max") {
      double ignored;
      is >> ignored;
    } else if (key == "cell") {
      cells.push_back(read_cell(is));
    } else if (key == "family") {
      size_t n_axes = 0;
      is >> n_axes;
      std::string sub;
      if (!(is >> sub) || sub != "base")
        throw std::invalid_argument("box measure parse: family without base");
      Family f;
      f.base = read_cell(is);
      for (size_t a = 0; a < n_axes; ++a) {
        if (!(is >> sub) || sub != "step")
          throw std::invalid_argument("box measure parse: family missing step");
        Family::Axis ax;
        ax.step = Vec(dim);
        for (int k = 0; k < dim; ++k) is >> ax.step[k];
        if (!(is >> sub) || sub != "count")
          throw std::invalid_argument("box measure parse: step missing count");
        is >> ax.count;
        if (!is) throw std::invalid_argument("box measure parse: bad step record");
        f.axes.push_back(ax);
      }
      families.push_back(std::move(f));
    } else {
      throw std::invalid_argument("box measure parse: unknown record '" + key + "'");
    }
  }
  return BoxMeasure(dim, std::move(cells), std::move(families), r_supp);
}

void save_text(const BoxMeasure& nu, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_text(nu);
}

BoxMeasure load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

}  // namespace fraclab::measures
