#include "fraclab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fraclab/parallel.hpp"

namespace fraclab::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Beyond this magnitude the phase is reduced mod 2*pi before exponentiation.
constexpr double kPhaseReduceThreshold = 1e6;

Complex unit_phase(double phase) {
  if (std::abs(phase) > kPhaseReduceThreshold) phase = std::remainder(phase, kTwoPi);
  return {std::cos(phase), std::sin(phase)};
}

void validate_atoms(int dim, const std::vector<Atom>& atoms) {
  if (dim < 1 || dim > kMaxDim - 1) throw std::invalid_argument("atom function: bad dimension");
  if (atoms.empty()) throw std::invalid_argument("atom function: needs at least one atom");
  for (const Atom& a : atoms) {
    if (a.node.dim != dim) throw std::invalid_argument("atom function: node dimension mismatch");
    if (!all_finite(a.node)) throw std::invalid_argument("atom function: non-finite node");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      throw std::invalid_argument("atom function: weights must be positive and finite");
    if (!std::isfinite(a.value.real()) || !std::isfinite(a.value.imag()))
      throw std::invalid_argument("atom function: non-finite value");
  }
  // Pairwise-distinct nodes, checked on a sorted copy.
  std::vector<Vec> nodes;
  nodes.reserve(atoms.size());
  for (const Atom& a : atoms) nodes.push_back(a.node);
  std::sort(nodes.begin(), nodes.end(), [dim](const Vec& a, const Vec& b) {
    for (int i = 0; i < dim; ++i) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  });
  for (size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] == nodes[i - 1]) throw std::invalid_argument("atom function: duplicate node");
  }
}

void validate_points(const std::vector<SpaceTimePoint>& points, int dim) {
  if (points.empty()) throw std::invalid_argument("evaluation: empty point list");
  for (const auto& p : points) {
    if (p.x.dim != dim || !all_finite(p.x) || !std::isfinite(p.t))
      throw std::invalid_argument("evaluation: bad point");
  }
}

}  // namespace

FrequencyAtomFunction::FrequencyAtomFunction(int dim, std::vector<Atom> atoms, double band_radius)
    : dim_(dim), atoms_(std::move(atoms)), band_radius_(band_radius) {
  validate_atoms(dim_, atoms_);
  if (!(band_radius_ >= 0.0) || !std::isfinite(band_radius_))
    throw std::invalid_argument("atom function: bad band radius");
  max_node_norm2_ = 0.0;
  for (const Atom& a : atoms_) {
    double n2 = norm2(a.node);
    max_node_norm2_ = std::max(max_node_norm2_, n2);
    if (std::sqrt(n2) > band_radius_ * (1.0 + 1e-12) + 1e-300)
      throw std::invalid_argument("atom function: node outside band radius");
  }
}

ConeAtomFunction::ConeAtomFunction(int dim, std::vector<Atom> atoms, double r_min, double r_max) {
  *this = with_relaxed_annulus(dim, std::move(atoms), r_min, r_max);
  if (r_max_ > 2.0 * r_min_ * (1.0 + 1e-12))
    throw std::invalid_argument("cone atoms: annulus must satisfy r_max <= 2 r_min");
}

ConeAtomFunction ConeAtomFunction::with_relaxed_annulus(int dim, std::vector<Atom> atoms,
                                                        double r_min, double r_max) {
  validate_atoms(dim, atoms);
  if (!(r_min > 0.0) || !(r_max >= r_min) || !std::isfinite(r_max))
    throw std::invalid_argument("cone atoms: need 0 < r_min <= r_max");
  for (const Atom& a : atoms) {
    double r = norm(a.node);
    if (r < r_min * (1.0 - 1e-12) || r > r_max * (1.0 + 1e-12))
      throw std::invalid_argument("cone atoms: node radius outside [r_min, r_max]");
    if (a.node[0] < -1e-15 * r)
      throw std::invalid_argument("cone atoms: nodes must satisfy xi_1 >= 0");
  }
  ConeAtomFunction f;
  f.dim_ = dim;
  f.atoms_ = std::move(atoms);
  f.r_min_ = r_min;
  f.r_max_ = r_max;
  return f;
}

Complex schrodinger_eval(const FrequencyAtomFunction& f, const Vec& x, double t,
                         double time_scale) {
  const double tau = t / time_scale;
  Complex sum = 0.0;
  for (const Atom& a : f.atoms()) {
    const double phase = dot(x, a.node) + tau * norm2(a.node);
    sum += a.weight * a.value * unit_phase(phase);
  }
  const double pref = std::pow(kTwoPi, -0.5 * f.dim());
  return pref * sum;
}

SampledField schrodinger_evolve(const FrequencyAtomFunction& f,
                                const std::vector<SpaceTimePoint>& points, double time_scale,
                                int workers) {
  if (!(time_scale >= 1.0)) throw std::invalid_argument("schrodinger_evolve: time_scale must be >= 1");
  validate_points(points, f.dim());
  SampledField out;
  out.points = points;
  out.values.resize(points.size());
  parallel_for(points.size(), workers, [&](size_t i) {
    out.values[i] = schrodinger_eval(f, points[i].x, points[i].t, time_scale);
  });
  return out;
}

FrequencyAtomFunction translate_frequency(const FrequencyAtomFunction& f, const Vec& theta) {
  if (theta.dim != f.dim() || !all_finite(theta))
    throw std::invalid_argument("translate_frequency: bad theta");
  std::vector<Atom> atoms = f.atoms();
  for (Atom& a : atoms) a.node += theta;
  return FrequencyAtomFunction(f.dim(), std::move(atoms), f.band_radius() + norm(theta));
}

Complex wave_eval(const ConeAtomFunction& f, const Vec& x, double t) {
  Complex sum = 0.0;
  for (const Atom& a : f.atoms()) {
    const double phase = dot(x, a.node) + t * norm(a.node);
    sum += a.weight * a.value * unit_phase(phase);
  }
  return sum;
}

SampledField wave_extension(const ConeAtomFunction& f, const std::vector<SpaceTimePoint>& points,
                            int workers) {
  validate_points(points, f.dim());
  SampledField out;
  out.points = points;
  out.values.resize(points.size());
  parallel_for(points.size(), workers, [&](size_t i) {
    out.values[i] = wave_eval(f, points[i].x, points[i].t);
  });
  return out;
}

double maximal_in_time(const FrequencyAtomFunction& f, const Vec& x, double t_max, double dt,
                       double time_scale) {
  if (!(t_max > 0.0) || !(dt > 0.0)) throw std::invalid_argument("maximal_in_time: need t_max, dt > 0");
  const double crit = dt * f.max_node_norm2() / time_scale;
  if (crit > 0.1) {
    throw std::invalid_argument("maximal_in_time: dt too coarse; need dt <= " +
                                std::to_string(0.1 * time_scale / f.max_node_norm2()));
  }
  const long steps = std::max(1L, static_cast<long>(std::floor(t_max / dt)));
  double best = 0.0;
  for (long k = 1; k <= steps; ++k) {
    best = std::max(best, std::abs(schrodinger_eval(f, x, static_cast<double>(k) * dt, time_scale)));
  }
  return best;
}

double h_s_norm(const FrequencyAtomFunction& f, double s) {
  if (s < 0.0) throw std::invalid_argument("h_s_norm: s must be >= 0");
  double sum = 0.0;
  for (const Atom& a : f.atoms()) sum += a.weight * std::pow(1.0 + norm2(a.node), s) * std::norm(a.value);
  return std::sqrt(sum);
}

double l2_norm(const FrequencyAtomFunction& f) { return h_s_norm(f, 0.0); }

double l2_norm(const ConeAtomFunction& f) {
  double sum = 0.0;
  for (const Atom& a : f.atoms()) sum += a.weight * std::norm(a.value);
  return std::sqrt(sum);
}

double weak_l1_level(const SampledField& u, const std::vector<double>& weights, double level) {
  if (!(level > 0.0)) throw std::invalid_argument("weak_l1_level: level must be > 0");
  if (weights.size() != u.values.size())
    throw std::invalid_argument("weak_l1_level: weights must align with field points");
  double mass = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("weak_l1_level: negative weight");
    if (std::abs(u.values[i]) > level) mass += weights[i];
  }
  return level * mass;
}

}  // namespace fraclab::spectral
